#pragma once

// Batch drivers behind the CLI: dataset -> diagrams -> embedding ->
// selection / evaluation / certification / audits under the stratified-CV
// protocol. Everything here is deterministic given (dataset, config, seeds).

#include <cstdint>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "place/audit.hpp"
#include "place/certify.hpp"
#include "place/diagram.hpp"
#include "place/embedding.hpp"
#include "place/graphfilt.hpp"
#include "place/linear.hpp"
#include "place/stats.hpp"

namespace place {

struct RunConfig {
    std::string dataset;
    // each entry is one candidate descriptor; parts joined by '+' are pooled
    // (e.g. "degree+hks:10"); parts: degree | hks:<t> | closeness | file:<path>
    std::vector<std::string> descriptors = {"degree+hks:10"};
    std::string tau_rule = "proxy";  // proxy | crossing
    std::size_t n_scales = 5;
    std::size_t n_max = 50;
    std::size_t folds = 10;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    double alpha = 0.05;
    std::vector<double> c_grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
    std::size_t crossing_pairs = 200;
    std::size_t audit_pairs = 2000;
    std::string out_dir = ".";
};

/// Vertex functions for one part of a descriptor combination.
inline std::vector<VertexFunction> compute_vertex_functions(const std::string& part,
                                                            const TuDataset& ds) {
    std::vector<VertexFunction> out;
    if (part == "degree") {
        for (const auto& g : ds.graphs) out.push_back(descriptor_degree(g));
    } else if (part == "closeness") {
        for (const auto& g : ds.graphs) out.push_back(descriptor_closeness(g));
    } else if (part.rfind("hks:", 0) == 0) {
        const double t = std::stod(part.substr(4));
        for (const auto& g : ds.graphs) out.push_back(descriptor_hks(g, t));
    } else if (part.rfind("file:", 0) == 0) {
        out = load_vertex_function_table(part.substr(5), ds, part);
    } else {
        throw std::runtime_error("unknown descriptor '" + part +
                                 "' (expected degree, hks:<t>, closeness, or file:<path>)");
    }
    return out;
}

/// Pooled extended-persistence diagrams (H0 and H1 merged, top-N filtered)
/// for a '+'-combination of descriptor parts.
inline std::vector<PersistenceDiagram> compute_diagrams(const std::string& combo,
                                                        const TuDataset& ds,
                                                        std::size_t n_max) {
    std::vector<std::string> parts;
    {
        std::stringstream ss(combo);
        std::string part;
        while (std::getline(ss, part, '+'))
            if (!part.empty()) parts.push_back(part);
    }
    if (parts.empty()) throw std::runtime_error("empty descriptor combination");

    std::vector<std::vector<PersistenceDiagram>> per_graph(ds.graphs.size());
    for (const auto& part : parts) {
        const auto fns = compute_vertex_functions(part, ds);
        for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
            auto [h0, h1] = extended_persistence(ds.graphs[i], fns[i]);
            per_graph[i].push_back(std::move(h0));
            per_graph[i].push_back(std::move(h1));
        }
    }
    std::vector<PersistenceDiagram> out;
    out.reserve(ds.graphs.size());
    for (auto& parts_i : per_graph) out.push_back(pool_descriptors(parts_i, n_max));
    return out;
}

/// Scale center for a diagram pool under the configured rule.
inline double compute_tau(const std::vector<PersistenceDiagram>& diagrams,
                          const std::vector<int>& labels, const RunConfig& cfg,
                          std::uint64_t seed) {
    if (cfg.tau_rule == "proxy") return tau_proxy(diagrams);
    if (cfg.tau_rule == "crossing")
        return tau_crossing(diagrams, labels, cfg.crossing_pairs, seed);
    throw std::runtime_error("unknown tau rule '" + cfg.tau_rule + "'");
}

struct FoldResult {
    std::uint64_t seed = 0;
    std::size_t fold = 0;
    double tau_star = 0.0;
    double bound = 0.0;  // L
    std::size_t ell = 0;
    double nc_accuracy = 0.0;
    double linear_accuracy = 0.0;
    double chosen_c = 0.0;
    CertificateReport certificate;
};

struct EvaluateResult {
    std::vector<FoldResult> folds;
    double nc_mean = 0.0, nc_sd = 0.0;
    double linear_mean = 0.0, linear_sd = 0.0;
    double fire_pinelis = 0.0, fire_bernstein = 0.0, fire_gaussian = 0.0;
    std::size_t folds_used = 0;
};

namespace detail {

inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

}  // namespace detail

/// The CV protocol: stratified folds repeated over seeds; tau* and L are
/// recomputed on each training fold (never on test data).
inline EvaluateResult evaluate(const std::vector<PersistenceDiagram>& diagrams,
                               const std::vector<int>& labels, const RunConfig& cfg,
                               std::ostream* log = nullptr) {
    if (diagrams.size() != labels.size())
        throw std::runtime_error("evaluate: diagrams/labels size mismatch");
    std::map<int, std::size_t> class_count;
    for (int y : labels) ++class_count[y];
    if (class_count.size() < 2) throw std::runtime_error("evaluate: need >= 2 classes");
    std::size_t m_min_class = SIZE_MAX;
    for (const auto& [y, m] : class_count) m_min_class = std::min(m_min_class, m);
    std::size_t folds = cfg.folds;
    if (m_min_class < folds) {
        folds = m_min_class;
        if (log)
            *log << "warning: smallest class has " << m_min_class
                 << " members; reducing folds to " << folds << "\n";
    }
    if (folds < 2) throw std::runtime_error("evaluate: need at least 2 usable folds");

    std::map<int, std::size_t> label_index;
    for (const auto& [y, m] : class_count) {
        const std::size_t idx = label_index.size();
        label_index[y] = idx;
    }
    std::vector<std::size_t> cls(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) cls[i] = label_index[labels[i]];

    EvaluateResult result;
    std::vector<double> nc_accs, lin_accs;
    std::size_t fire_p = 0, fire_b = 0, fire_g = 0;

    for (std::uint64_t seed : cfg.seeds) {
        const auto fold_of = stratified_folds(cls, class_count.size(), folds, seed);
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<std::size_t> train_ids, test_ids;
            for (std::size_t i = 0; i < diagrams.size(); ++i)
                (fold_of[i] == f ? test_ids : train_ids).push_back(i);

            std::vector<PersistenceDiagram> train_diagrams;
            std::vector<int> train_labels;
            for (std::size_t i : train_ids) {
                train_diagrams.push_back(diagrams[i]);
                train_labels.push_back(labels[i]);
            }

            FoldResult fr;
            fr.seed = seed;
            fr.fold = f;
            fr.tau_star = compute_tau(train_diagrams, train_labels, cfg, seed * 1000 + f);
            fr.bound = auto_bound(train_diagrams);
            const ScaleConfig nu = make_scale_config(fr.tau_star, cfg.n_scales, fr.bound);
            fr.ell = nu.total_dim();

            std::vector<EmbeddedVector> train_x;
            train_x.reserve(train_ids.size());
            for (const auto& d : train_diagrams) train_x.push_back(embed(d, nu));

            const ClassStats stats = fit_class_stats(train_x, train_labels);
            const LinearModel model =
                train_linear(train_x, train_labels, cfg.c_grid, seed * 7919 + f);
            fr.chosen_c = model.C;
            fr.certificate = certify(stats, cfg.alpha);

            std::size_t nc_hits = 0, lin_hits = 0;
            for (std::size_t i : test_ids) {
                const EmbeddedVector x = embed(diagrams[i], nu);
                nc_hits += stats.labels[nc_predict(x, stats)] == labels[i] ? 1 : 0;
                lin_hits += model.labels[predict_linear(model, x)] == labels[i] ? 1 : 0;
            }
            fr.nc_accuracy = static_cast<double>(nc_hits) / static_cast<double>(test_ids.size());
            fr.linear_accuracy =
                static_cast<double>(lin_hits) / static_cast<double>(test_ids.size());

            nc_accs.push_back(fr.nc_accuracy);
            lin_accs.push_back(fr.linear_accuracy);
            fire_p += fr.certificate.fire_pinelis ? 1 : 0;
            fire_b += fr.certificate.fire_bernstein ? 1 : 0;
            fire_g += fr.certificate.fire_gaussian ? 1 : 0;
            result.folds.push_back(std::move(fr));

            if (log)
                *log << "seed " << seed << " fold " << f << ": nc "
                     << result.folds.back().nc_accuracy << " linear "
                     << result.folds.back().linear_accuracy << " (C "
                     << result.folds.back().chosen_c << ", ell "
                     << result.folds.back().ell << ")\n";
        }
    }
    const std::size_t total = result.folds.size();
    std::tie(result.nc_mean, result.nc_sd) = detail::mean_sd(nc_accs);
    std::tie(result.linear_mean, result.linear_sd) = detail::mean_sd(lin_accs);
    result.fire_pinelis = static_cast<double>(fire_p) / static_cast<double>(total);
    result.fire_bernstein = static_cast<double>(fire_b) / static_cast<double>(total);
    result.fire_gaussian = static_cast<double>(fire_g) / static_cast<double>(total);
    result.folds_used = folds;
    return result;
}

struct AuditRunResult {
    ScaleConfig nu;
    double tau_star = 0.0;
    AuditReport coherence;
    AuditReport bound;
    LambdaBridge bridge;
};

/// Full-pool audit at the configured scale count: coherence table,
/// certificate-bound table, and the lambda-bridge diagnostic.
inline AuditRunResult run_audits(const std::vector<PersistenceDiagram>& diagrams,
                                 const std::vector<int>& labels, const RunConfig& cfg,
                                 std::uint64_t seed) {
    AuditRunResult out;
    out.tau_star = compute_tau(diagrams, labels, cfg, seed);
    out.nu = make_scale_config(out.tau_star, cfg.n_scales, auto_bound(diagrams));
    out.coherence = audit_coherence(diagrams, labels, out.nu, cfg.audit_pairs, seed);
    out.bound = audit_certificate_bound(diagrams, labels, out.nu, cfg.audit_pairs, seed);
    std::vector<EmbeddedVector> X;
    X.reserve(diagrams.size());
    for (const auto& d : diagrams) X.push_back(embed(d, out.nu));
    out.bridge = lambda_bridge(diagrams, labels, out.nu, fit_class_stats(X, labels),
                               cfg.audit_pairs, seed);
    return out;
}

}  // namespace place
