// place: persistence-landmark classification engine, batch front end.
//
// Subcommands: embed, select, evaluate, audit, bottleneck. All outputs are
// line-delimited JSON records plus flat TSV tables, deterministic given
// (dataset, config, seeds).
//
// Diagram file grammar (also accepted by `bottleneck`): one JSON record
// per line, {"points": [[birth, death], ...], "dim": 0, "label": 1} with
// "dim" and "label" optional and 0 <= birth < death required.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "place/io.hpp"
#include "place/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

place::TuDataset load_dataset_checked(const std::string& path) {
    return place::load_tu_dataset(path);
}

void ensure_out_dir(const std::string& dir) {
    if (!dir.empty() && dir != ".") fs::create_directories(dir);
}

std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (c == ':' || c == '/' || c == '+') c = '_';
    return out;
}

void add_common(CLI::App* cmd, place::RunConfig& cfg) {
    cmd->add_option("--dataset", cfg.dataset, "TU-format dataset directory")->required();
    cmd->add_option("--descriptors", cfg.descriptors,
                    "descriptor list; '+' pools parts (degree, hks:<t>, closeness, file:<path>)");
    cmd->add_option("--tau", cfg.tau_rule, "scale-center rule: proxy | crossing")
        ->check(CLI::IsMember({"proxy", "crossing"}));
    cmd->add_option("--n-scales", cfg.n_scales, "number of scales N");
    cmd->add_option("--n-max", cfg.n_max, "top-N persistence filter cap");
    cmd->add_option("--alpha", cfg.alpha, "certificate confidence level");
    cmd->add_option("--out", cfg.out_dir, "output directory");
}

nlohmann::json certificate_to_json(const place::CertificateReport& c) {
    nlohmann::json j;
    j["alpha"] = c.alpha;
    j["k"] = c.k;
    j["ell"] = c.ell;
    j["delta"] = c.delta;
    j["radius"] = c.radius;
    j["m_c"] = c.counts;
    j["delta_c"] = c.class_gap;
    j["trace"] = c.trace;
    j["op_norm"] = c.op_norm;
    j["stable_rank"] = c.stable_rank;
    j["r_pinelis"] = c.r_pinelis;
    j["r_bernstein"] = c.r_bernstein;
    j["r_gaussian"] = c.r_gaussian;
    j["r_bernstein_c"] = c.radius_bernstein_c;
    j["vp_out_of_regime"] = c.vp_out_of_regime;
    j["m_star_pinelis"] = c.thr_pinelis;
    j["m_star_bernstein"] = c.thr_bernstein;
    j["m_star_gaussian"] = c.thr_gaussian;
    j["fire_pinelis"] = c.fire_pinelis;
    j["fire_bernstein"] = c.fire_bernstein;
    j["fire_gaussian"] = c.fire_gaussian;
    return j;
}

int cmd_embed(const place::RunConfig& cfg) {
    const auto ds = load_dataset_checked(cfg.dataset);
    ensure_out_dir(cfg.out_dir);
    for (const auto& combo : cfg.descriptors) {
        const auto diagrams = place::compute_diagrams(combo, ds, cfg.n_max);
        const double tau = place::compute_tau(diagrams, ds.labels, cfg, cfg.seeds.front());
        const auto nu =
            place::make_scale_config(tau, cfg.n_scales, place::auto_bound(diagrams));

        std::vector<place::DiagramRecord> records;
        for (std::size_t i = 0; i < diagrams.size(); ++i)
            records.push_back({diagrams[i], ds.labels[i]});
        const std::string stem = (fs::path(cfg.out_dir) / sanitize(combo)).string();
        place::write_diagram_file(stem + ".diagrams.jsonl", records);

        std::vector<place::EmbeddedVector> X;
        X.reserve(diagrams.size());
        for (const auto& d : diagrams) X.push_back(place::embed(d, nu));
        place::write_embedding_matrix(stem + ".embedding.tsv", X, ds.labels);

        std::ofstream cfg_out(stem + ".scale_config.json");
        nlohmann::json j = place::scale_config_to_json(nu);
        j["tau_star"] = tau;
        j["descriptor"] = combo;
        j["n_max"] = cfg.n_max;
        cfg_out << j.dump(2) << "\n";
        std::cout << combo << ": " << diagrams.size() << " diagrams, ell = "
                  << nu.total_dim() << ", tau* = " << tau << "\n";
    }
    return 0;
}

int cmd_select(const place::RunConfig& cfg, const std::string& rule_name) {
    const auto ds = load_dataset_checked(cfg.dataset);
    ensure_out_dir(cfg.out_dir);
    place::SelectionRule rule = place::SelectionRule::mahalanobis;
    if (rule_name == "eta") rule = place::SelectionRule::eta;
    else if (rule_name == "delta_over_r") rule = place::SelectionRule::delta_over_r;
    else if (rule_name != "mah") throw std::runtime_error("unknown rule " + rule_name);

    std::map<std::string, std::vector<place::EmbeddedVector>> pool;
    for (const auto& combo : cfg.descriptors) {
        const auto diagrams = place::compute_diagrams(combo, ds, cfg.n_max);
        const double tau = place::compute_tau(diagrams, ds.labels, cfg, cfg.seeds.front());
        const auto nu =
            place::make_scale_config(tau, cfg.n_scales, place::auto_bound(diagrams));
        std::vector<place::EmbeddedVector> X;
        X.reserve(diagrams.size());
        for (const auto& d : diagrams) X.push_back(place::embed(d, nu));
        pool[combo] = std::move(X);
    }
    const auto rep = place::select_descriptor(pool, ds.labels, rule);

    const std::string table_path = (fs::path(cfg.out_dir) / "selection.tsv").string();
    std::ofstream table(table_path);
    table.precision(17);
    table << "descriptor\tell\tdelta\tR\teta\tdelta_over_R\trho_mah\t"
             "rank_eta\trank_ratio\trank_mah\n";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        table << r.name << '\t' << r.ell << '\t' << r.delta << '\t' << r.radius << '\t'
              << r.eta << '\t' << r.ratio << '\t' << r.rho_mah << '\t' << rep.rank_eta[i]
              << '\t' << rep.rank_ratio[i] << '\t' << rep.rank_mah[i] << '\n';
    }
    std::cout << "chosen (" << place::to_string(rep.rule) << "): " << rep.chosen << "\n"
              << "table: " << table_path << "\n";
    return 0;
}

int cmd_evaluate(const place::RunConfig& cfg) {
    const auto ds = load_dataset_checked(cfg.dataset);
    ensure_out_dir(cfg.out_dir);
    // every listed descriptor is pooled into one representation
    std::string combo;
    for (const auto& d : cfg.descriptors) combo += (combo.empty() ? "" : "+") + d;
    const auto diagrams = place::compute_diagrams(combo, ds, cfg.n_max);
    const auto result = place::evaluate(diagrams, ds.labels, cfg, &std::cerr);

    const std::string folds_path = (fs::path(cfg.out_dir) / "evaluate.folds.jsonl").string();
    std::ofstream folds(folds_path);
    for (const auto& fr : result.folds) {
        nlohmann::json j;
        j["seed"] = fr.seed;
        j["fold"] = fr.fold;
        j["tau_star"] = fr.tau_star;
        j["L"] = fr.bound;
        j["ell"] = fr.ell;
        j["nc_accuracy"] = fr.nc_accuracy;
        j["linear_accuracy"] = fr.linear_accuracy;
        j["C"] = fr.chosen_c;
        j["certificate"] = certificate_to_json(fr.certificate);
        folds << j.dump() << "\n";
    }
    const std::string summary_path = (fs::path(cfg.out_dir) / "evaluate.summary.tsv").string();
    std::ofstream summary(summary_path);
    summary.precision(17);
    summary << "descriptor\tfolds\tseeds\tnc_mean\tnc_sd\tlinear_mean\tlinear_sd\t"
               "fire_pinelis\tfire_bernstein\tfire_gaussian\n";
    summary << combo << '\t' << result.folds_used << '\t' << cfg.seeds.size() << '\t'
            << result.nc_mean << '\t' << result.nc_sd << '\t' << result.linear_mean << '\t'
            << result.linear_sd << '\t' << result.fire_pinelis << '\t'
            << result.fire_bernstein << '\t' << result.fire_gaussian << "\n";

    std::cout << combo << ": linear " << 100.0 * result.linear_mean << " +- "
              << 100.0 * result.linear_sd << " %, nc " << 100.0 * result.nc_mean << " +- "
              << 100.0 * result.nc_sd << " %\n"
              << "fire%: pinelis " << 100.0 * result.fire_pinelis << ", bernstein "
              << 100.0 * result.fire_bernstein << ", gaussian "
              << 100.0 * result.fire_gaussian << "\n"
              << "records: " << folds_path << "\n";
    return 0;
}

int cmd_audit(const place::RunConfig& cfg) {
    const auto ds = load_dataset_checked(cfg.dataset);
    ensure_out_dir(cfg.out_dir);
    for (const auto& combo : cfg.descriptors) {
        const auto diagrams = place::compute_diagrams(combo, ds, cfg.n_max);
        const auto res = place::run_audits(diagrams, ds.labels, cfg, cfg.seeds.front());

        const std::string stem = (fs::path(cfg.out_dir) / sanitize(combo)).string();
        std::ofstream table(stem + ".audit.tsv");
        table.precision(17);
        table << "descriptor\tn_pairs\tn_qualifying\tcoherent_pct\tbound_pct\t"
                 "p25\tp50\tp75\tmin\tseed\n";
        table << combo << '\t' << res.coherence.n_pairs_sampled << '\t'
              << res.coherence.n_qualifying << '\t' << 100.0 * res.coherence.coherent_fraction
              << '\t' << 100.0 * res.bound.bound_fraction << '\t' << res.bound.ratio_p25
              << '\t' << res.bound.ratio_p50 << '\t' << res.bound.ratio_p75 << '\t'
              << res.bound.ratio_min << '\t' << res.coherence.seed << '\n';

        nlohmann::json j;
        j["descriptor"] = combo;
        j["tau_star"] = res.tau_star;
        j["scale_config"] = place::scale_config_to_json(res.nu);
        j["n_pairs_sampled"] = res.coherence.n_pairs_sampled;
        j["n_qualifying"] = res.coherence.n_qualifying;
        j["coherent_fraction"] = res.coherence.coherent_fraction;
        j["bound_fraction"] = res.bound.bound_fraction;
        j["ratio_p25"] = res.bound.ratio_p25;
        j["ratio_p50"] = res.bound.ratio_p50;
        j["ratio_p75"] = res.bound.ratio_p75;
        j["ratio_min"] = res.bound.ratio_min;
        j["coherent_bound_violations"] = res.coherence.n_coherent_bound_violations;
        j["lambda_bridge"] = {{"delta_star", res.bridge.delta_star},
                              {"affine_bound", res.bridge.affine_bound},
                              {"step_bound", res.bridge.step_bound},
                              {"delta_hat", res.bridge.delta_hat},
                              {"affine_satisfied", res.bridge.affine_satisfied},
                              {"step_satisfied", res.bridge.step_satisfied}};
        std::ofstream(stem + ".audit.json") << j.dump(2) << "\n";

        std::cout << combo << ": qualifying " << res.coherence.n_qualifying << "/"
                  << res.coherence.n_pairs_sampled << ", coherent "
                  << 100.0 * res.coherence.coherent_fraction << " %, bound "
                  << 100.0 * res.bound.bound_fraction << " %, median ratio "
                  << res.bound.ratio_p50 << "\n";
    }
    return 0;
}

int cmd_bottleneck(const std::string& file_a, const std::string& file_b,
                   const std::string& out) {
    const auto A = place::read_diagram_file(file_a);
    const auto B = place::read_diagram_file(file_b);
    std::ostream* os = &std::cout;
    std::ofstream out_file;
    if (!out.empty()) {
        out_file.open(out);
        if (!out_file) throw std::runtime_error("cannot open " + out);
        os = &out_file;
    }
    os->precision(17);
    for (const auto& a : A) {
        bool first = true;
        for (const auto& b : B) {
            *os << (first ? "" : "\t") << place::bottleneck(a.diagram, b.diagram);
            first = false;
        }
        *os << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"place: persistence-landmark classification engine"};
    app.require_subcommand(1);

    place::RunConfig cfg;
    std::string select_rule = "mah";
    std::string bn_a, bn_b, bn_out;

    auto* embed = app.add_subcommand("embed", "dataset -> diagrams + embeddings");
    add_common(embed, cfg);
    embed->add_option("--seed", cfg.seeds, "seed(s); the first drives crossing tau*");

    auto* select = app.add_subcommand("select", "closed-form descriptor selection");
    add_common(select, cfg);
    select->add_option("--rule", select_rule, "mah | delta_over_r | eta")
        ->check(CLI::IsMember({"mah", "delta_over_r", "eta"}));
    select->add_option("--seed", cfg.seeds, "seed(s)");

    auto* evaluate = app.add_subcommand("evaluate", "stratified-CV accuracy + certificates");
    add_common(evaluate, cfg);
    evaluate->add_option("--folds", cfg.folds, "outer folds");
    evaluate->add_option("--seed", cfg.seeds, "seeds for fold partitioning");
    evaluate->add_option("--c-grid", cfg.c_grid, "regularization grid");

    auto* audit = app.add_subcommand("audit", "coherence + certificate-bound audits");
    add_common(audit, cfg);
    audit->add_option("--seed", cfg.seeds, "seed(s); the first drives pair sampling");
    audit->add_option("--pairs", cfg.audit_pairs, "sampled cross-class pairs");

    auto* bottleneck = app.add_subcommand("bottleneck", "pairwise bottleneck matrix");
    bottleneck->add_option("fileA", bn_a, "diagram file (JSON lines)")->required();
    bottleneck->add_option("fileB", bn_b, "diagram file (JSON lines)")->required();
    bottleneck->add_option("--out", bn_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (embed->parsed()) return cmd_embed(cfg);
        if (select->parsed()) return cmd_select(cfg, select_rule);
        if (evaluate->parsed()) return cmd_evaluate(cfg);
        if (audit->parsed()) return cmd_audit(cfg);
        if (bottleneck->parsed()) return cmd_bottleneck(bn_a, bn_b, bn_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "numeric guard: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
