#pragma once

// Per-class embedding statistics and the closed-form descriptor-selection
// statistics (Mahalanobis margin under Ledoit-Wolf shrinkage, the direct
// ratio, and the isotropic surrogate).

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "place/embedding.hpp"

namespace place {

namespace detail {

// Largest eigenvalue of C^T C / denom without materializing the ell x ell
// matrix: power iteration on the centered data, seeded start vector,
// 200 iterations or relative change below 1e-9.
inline double power_iteration_opnorm(const Eigen::MatrixXd& centered, double denom) {
    const Eigen::Index ell = centered.cols();
    if (ell == 0 || centered.rows() == 0 || denom <= 0.0) return 0.0;
    if (centered.norm() == 0.0) return 0.0;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd v(ell);
    for (Eigen::Index i = 0; i < ell; ++i) v[i] = u(rng);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = centered.transpose() * (centered * v) / denom;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / norm;
        if (it > 0 && std::fabs(next - lambda) <= 1e-9 * std::max(std::fabs(next), 1e-300)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace detail

struct ClassStats {
    std::vector<int> labels;                 // distinct labels, ascending
    std::vector<std::size_t> counts;         // m_c
    std::vector<Eigen::VectorXd> means;      // mu_c
    std::vector<double> trace;               // tr(Sigma_c), unbiased; 0 when m_c < 2
    std::vector<double> op_norm;             // ||Sigma_c||_op
    std::vector<double> within_radius;       // D_c = max ||Phi - mu_c||
    std::vector<double> class_gap;           // Delta_c = min_{c' != c} ||mu_c - mu_c'||
    std::vector<Eigen::MatrixXd> centered;   // per-class centered rows
    double radius = 0.0;                     // R_hat = max ||Phi(A_i)||

    std::size_t num_classes() const { return labels.size(); }
    std::size_t dim() const { return means.empty() ? 0 : static_cast<std::size_t>(means[0].size()); }

    std::size_t m_min() const {
        std::size_t m = SIZE_MAX;
        for (auto c : counts) m = std::min(m, c);
        return m;
    }

    /// Global class-mean separation; defined only for k >= 2.
    double delta() const {
        if (labels.size() < 2)
            throw std::logic_error("ClassStats::delta: separation undefined for a single class");
        double d = std::numeric_limits<double>::infinity();
        for (double g : class_gap) d = std::min(d, g);
        return d;
    }
};

inline ClassStats fit_class_stats(const std::vector<EmbeddedVector>& X,
                                  const std::vector<int>& y) {
    if (X.empty()) throw std::invalid_argument("fit_class_stats: empty sample");
    if (X.size() != y.size())
        throw std::invalid_argument("fit_class_stats: sample/label size mismatch");
    const Eigen::Index ell = X[0].size();
    for (const auto& x : X)
        if (x.size() != ell) throw std::invalid_argument("fit_class_stats: dimension mismatch");

    ClassStats s;
    {
        std::map<int, std::size_t> seen;
        for (int label : y) seen.emplace(label, 0);
        for (auto& [label, idx] : seen) {
            idx = s.labels.size();
            s.labels.push_back(label);
        }
        s.counts.assign(s.labels.size(), 0);
        for (int label : y) ++s.counts[seen[label]];

        const std::size_t k = s.labels.size();
        s.means.assign(k, Eigen::VectorXd::Zero(ell));
        for (std::size_t i = 0; i < X.size(); ++i) s.means[seen[y[i]]] += X[i];
        for (std::size_t c = 0; c < k; ++c) s.means[c] /= static_cast<double>(s.counts[c]);

        s.centered.resize(k);
        std::vector<std::size_t> row(k, 0);
        for (std::size_t c = 0; c < k; ++c)
            s.centered[c].resize(static_cast<Eigen::Index>(s.counts[c]), ell);
        for (std::size_t i = 0; i < X.size(); ++i) {
            const std::size_t c = seen[y[i]];
            s.centered[c].row(static_cast<Eigen::Index>(row[c]++)) = (X[i] - s.means[c]).transpose();
        }
    }

    const std::size_t k = s.labels.size();
    s.trace.assign(k, 0.0);
    s.op_norm.assign(k, 0.0);
    s.within_radius.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        const auto& C = s.centered[c];
        for (Eigen::Index i = 0; i < C.rows(); ++i)
            s.within_radius[c] = std::max(s.within_radius[c], C.row(i).norm());
        if (s.counts[c] >= 2) {
            const double denom = static_cast<double>(s.counts[c] - 1);
            s.trace[c] = C.squaredNorm() / denom;
            s.op_norm[c] = detail::power_iteration_opnorm(C, denom);
        }
    }
    for (const auto& x : X) s.radius = std::max(s.radius, x.norm());

    s.class_gap.assign(k, std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t c2 = 0; c2 < k; ++c2)
            if (c != c2)
                s.class_gap[c] = std::min(s.class_gap[c], (s.means[c] - s.means[c2]).norm());
    if (k == 1) s.class_gap[0] = std::numeric_limits<double>::quiet_NaN();
    return s;
}

/// Isotropic surrogate eta = Delta / sqrt(ell).
inline double eta(const ClassStats& s, std::size_t ell) {
    if (ell < 1) throw std::invalid_argument("eta: ell must be >= 1");
    return s.delta() / std::sqrt(static_cast<double>(ell));
}

// Dense Mahalanobis solves are refused above this dimension.
inline constexpr std::size_t kMaxDenseDim = 4096;

struct LedoitWolfCovariance {
    double rho = 0.0;  // shrinkage intensity in [0, 1]
    double mu = 0.0;   // target scale tr(S)/ell
    Eigen::MatrixXd sigma;
};

/// Ledoit-Wolf 2004 linear shrinkage toward the scaled identity
/// (tr(S)/ell) I, computed from the centered sample rows. The intensity
/// comes from the closed-form fourth-moment estimate; the scalar pieces
/// use the n x n Gram matrix so only the final shrunk matrix is ever
/// ell x ell.
inline LedoitWolfCovariance ledoit_wolf(const Eigen::MatrixXd& centered) {
    const Eigen::Index n = centered.rows(), ell = centered.cols();
    if (n < 2) throw std::invalid_argument("ledoit_wolf: need at least 2 samples");
    if (static_cast<std::size_t>(ell) > kMaxDenseDim)
        throw std::invalid_argument(
            "ledoit_wolf: dimension exceeds the dense guard (" +
            std::to_string(kMaxDenseDim) + "); use the eta or delta/R selection rules");

    LedoitWolfCovariance out;
    const double nd = static_cast<double>(n);
    const double elld = static_cast<double>(ell);

    const Eigen::MatrixXd gram = centered * centered.transpose();  // n x n
    const double tr_s = gram.trace() / nd;
    const double tr_s2 = gram.squaredNorm() / (nd * nd);  // tr(S^2)
    out.mu = tr_s / elld;

    // normalized Frobenius norms (<A,B> = tr(A B^T)/ell)
    const double d2 = tr_s2 / elld - out.mu * out.mu;
    double sum4 = 0.0;  // sum_i ||x_i||^4
    for (Eigen::Index i = 0; i < n; ++i) sum4 += gram(i, i) * gram(i, i);
    const double bbar2 = (sum4 / (nd * nd) - tr_s2 / nd) / elld;
    const double b2 = std::min(std::max(bbar2, 0.0), std::max(d2, 0.0));
    out.rho = d2 > 0.0 ? b2 / d2 : 1.0;

    out.sigma = (1.0 - out.rho) / nd * (centered.transpose() * centered);
    out.sigma.diagonal().array() += out.rho * out.mu;
    return out;
}

/// Mahalanobis margin between class means under the given covariance:
/// min over class pairs of sqrt(diff^T Sigma^{-1} diff). A numerically
/// zero covariance is replaced by eps I with eps = 1e-12 max(1, R_hat^2).
inline double mahalanobis_margin(const ClassStats& s, const Eigen::MatrixXd& shrunk) {
    if (s.num_classes() < 2)
        throw std::invalid_argument("mahalanobis_margin: need at least 2 classes");
    if (static_cast<std::size_t>(shrunk.rows()) != s.dim() || shrunk.rows() != shrunk.cols())
        throw std::invalid_argument("mahalanobis_margin: covariance shape mismatch");

    Eigen::MatrixXd sigma = shrunk;
    if (sigma.lpNorm<Eigen::Infinity>() == 0.0) {
        const double eps = 1e-12 * std::max(1.0, s.radius * s.radius);
        sigma.diagonal().array() += eps;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("mahalanobis_margin: covariance is not positive definite");

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < s.num_classes(); ++c)
        for (std::size_t c2 = c + 1; c2 < s.num_classes(); ++c2) {
            const Eigen::VectorXd diff = s.means[c] - s.means[c2];
            best = std::min(best, std::sqrt(diff.dot(llt.solve(diff))));
        }
    return best;
}

/// Pooled within-class centered rows stacked across classes.
inline Eigen::MatrixXd pooled_centered(const ClassStats& s) {
    Eigen::Index rows = 0;
    for (const auto& C : s.centered) rows += C.rows();
    Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(s.dim()));
    Eigen::Index at = 0;
    for (const auto& C : s.centered) {
        out.middleRows(at, C.rows()) = C;
        at += C.rows();
    }
    return out;
}

enum class SelectionRule { mahalanobis, delta_over_r, eta };

inline const char* to_string(SelectionRule r) {
    switch (r) {
        case SelectionRule::mahalanobis: return "mah";
        case SelectionRule::delta_over_r: return "delta_over_r";
        default: return "eta";
    }
}

struct DescriptorStats {
    std::string name;
    std::size_t ell = 0;
    double delta = 0.0;
    double radius = 0.0;
    double eta = 0.0;
    double ratio = 0.0;    // delta / R
    double rho_mah = std::numeric_limits<double>::quiet_NaN();
};

struct SelectionReport {
    std::vector<DescriptorStats> rows;       // ordered by descriptor name
    std::vector<std::size_t> rank_eta;       // 1-based rank of rows[i] under each statistic
    std::vector<std::size_t> rank_ratio;
    std::vector<std::size_t> rank_mah;
    SelectionRule rule = SelectionRule::mahalanobis;
    std::string chosen;
};

namespace detail {

inline std::vector<std::size_t> rank_desc(const std::vector<DescriptorStats>& rows,
                                          double DescriptorStats::*field) {
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = rows[a].*field, vb = rows[b].*field;
        const bool na = std::isnan(va), nb = std::isnan(vb);
        if (na != nb) return nb;  // NaN ranks last
        if (!na && va != vb) return va > vb;
        return rows[a].name < rows[b].name;
    });
    std::vector<std::size_t> rank(rows.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
    return rank;
}

}  // namespace detail

/// Evaluate the three selection statistics over a descriptor pool and pick
/// the argmax of the requested rule (ties broken by descriptor name).
inline SelectionReport select_descriptor(
    const std::map<std::string, std::vector<EmbeddedVector>>& pool,
    const std::vector<int>& y, SelectionRule rule) {
    if (pool.empty()) throw std::invalid_argument("select_descriptor: empty pool");
    SelectionReport rep;
    rep.rule = rule;
    for (const auto& [name, X] : pool) {
        const ClassStats s = fit_class_stats(X, y);
        DescriptorStats row;
        row.name = name;
        row.ell = s.dim();
        row.delta = s.delta();
        row.radius = s.radius;
        row.eta = eta(s, row.ell);
        row.ratio = s.radius > 0.0 ? row.delta / s.radius
                                   : std::numeric_limits<double>::quiet_NaN();
        if (row.ell <= kMaxDenseDim) {
            const auto lw = ledoit_wolf(pooled_centered(s));
            row.rho_mah = mahalanobis_margin(s, lw.sigma);
        } else if (rule == SelectionRule::mahalanobis) {
            throw std::invalid_argument(
                "select_descriptor: descriptor '" + name + "' has dimension " +
                std::to_string(row.ell) + " above the dense guard; use eta or delta/R");
        }
        rep.rows.push_back(std::move(row));
    }
    rep.rank_eta = detail::rank_desc(rep.rows, &DescriptorStats::eta);
    rep.rank_ratio = detail::rank_desc(rep.rows, &DescriptorStats::ratio);
    rep.rank_mah = detail::rank_desc(rep.rows, &DescriptorStats::rho_mah);
    const auto& rank = rule == SelectionRule::eta      ? rep.rank_eta
                       : rule == SelectionRule::delta_over_r ? rep.rank_ratio
                                                             : rep.rank_mah;
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
        if (rank[i] == 1) rep.chosen = rep.rows[i].name;
    return rep;
}

struct RiskRate {
    double rate = 0.0;           // 8 (k-1) R / (Delta sqrt(m_min))
    bool hypothesis_met = false; // m_min >= 128 R^2 log(4k/delta)/Delta^2 at delta = 0.05
    double required_m = 0.0;
};

inline RiskRate risk_rate(std::size_t k, double R, double delta, std::size_t m_min) {
    if (!(delta > 0.0)) throw std::invalid_argument("risk_rate: Delta must be > 0");
    if (m_min < 1) throw std::invalid_argument("risk_rate: m_min must be >= 1");
    RiskRate out;
    out.rate = 8.0 * static_cast<double>(k - 1) * R /
               (delta * std::sqrt(static_cast<double>(m_min)));
    out.required_m = 128.0 * R * R * std::log(4.0 * static_cast<double>(k) / 0.05) / (delta * delta);
    out.hypothesis_met = static_cast<double>(m_min) >= out.required_m;
    return out;
}

}  // namespace place
