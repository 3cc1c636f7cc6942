#pragma once

// Hat coordinates, single-scale and multiscale landmark embeddings, the
// closed-form scale-weight rule, the distortion slope lambda, and the
// tau* scale-center estimators.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "place/diagram.hpp"
#include "place/lattice.hpp"

namespace place {

using EmbeddedVector = Eigen::VectorXd;

/// Hat coordinate of landmark p at scale R: max{3R/2 - d_B(p, x), 0}.
inline double hat(double R, const Landmark& p, const DiagramPoint& x) {
    const double v = 1.5 * R - landmark_dist(R, p, x);
    return v > 0.0 ? v : 0.0;
}

namespace detail {

// (m, n) -> coordinate position, so embedding a point touches only the
// <= 4 lattice sites inside its hat window instead of scanning the grid.
struct GridIndex {
    std::unordered_map<std::int64_t, std::size_t> site;
    std::size_t star = 0;

    static std::int64_t key(int m, int n) {
        return (static_cast<std::int64_t>(m) << 32) | static_cast<std::int64_t>(n);
    }

    void build(const LandmarkGrid& g) {
        site.clear();
        site.reserve(g.landmarks.size());
        for (std::size_t i = 0; i < g.landmarks.size(); ++i) {
            const auto& lm = g.landmarks[i];
            if (lm.is_diagonal)
                star = i;
            else
                site.emplace(key(lm.m, lm.n), i);
        }
    }
};

inline void accumulate_point(const LandmarkGrid& g, const GridIndex& idx,
                             const DiagramPoint& x, double* block) {
    const double R = g.scale;
    const double radius = 1.5 * R;
    const int m_lo = static_cast<int>(std::floor((x.birth - radius) / R));
    const int m_hi = static_cast<int>(std::ceil((x.birth + radius) / R));
    const int n_lo = static_cast<int>(std::floor((x.death - radius) / R));
    const int n_hi = static_cast<int>(std::ceil((x.death + radius) / R));
    for (int m = m_lo; m <= m_hi; ++m) {
        if (m < 1 || (m % 2) == 0) continue;
        const double db = std::fabs(x.birth - m * R);
        if (db >= radius) continue;
        for (int n = std::max(n_lo, m + 3); n <= n_hi; ++n) {
            if ((n % 2) != 0) continue;
            const double dd = std::fabs(x.death - n * R);
            const double v = radius - std::max(db, dd);
            if (v <= 0.0) continue;
            const auto it = idx.site.find(GridIndex::key(m, n));
            if (it != idx.site.end()) block[it->second] += v;
        }
    }
    const double vstar = radius - diag_cost(x);
    if (vstar > 0.0) block[idx.star] += vstar;
}

}  // namespace detail

/// Unweighted single-scale summation embedding: coordinate at landmark p
/// is the sum over diagram points of hat(R, p, .). Empty diagram maps to
/// the zero vector.
inline EmbeddedVector embed_single_scale(const PersistenceDiagram& A, const LandmarkGrid& g) {
    EmbeddedVector out = EmbeddedVector::Zero(static_cast<Eigen::Index>(g.size()));
    detail::GridIndex idx;
    idx.build(g);
    for (const auto& x : A.points) detail::accumulate_point(g, idx, x, out.data());
    return out;
}

/// Closed-form equimarginal weights: w_k^2 proportional to
/// (d_{k+1}^2 - d_k^2) / R_k^2 with d_i = R_i - R_1, d_{N+1} = L - R_1,
/// normalized so the squares sum to one.
inline std::vector<double> closed_form_weights(const std::vector<double>& scales, double L) {
    const std::size_t N = scales.size();
    if (N == 0) throw std::invalid_argument("closed_form_weights: empty scale list");
    for (std::size_t k = 0; k < N; ++k) {
        if (!(scales[k] > 0.0)) throw std::invalid_argument("closed_form_weights: scales must be positive");
        if (k > 0 && !(scales[k] > scales[k - 1]))
            throw std::invalid_argument("closed_form_weights: scales must be strictly increasing");
    }
    if (!(scales.back() <= L)) throw std::invalid_argument("closed_form_weights: R_N must be <= L");
    if (!(L > scales.front())) throw std::invalid_argument("closed_form_weights: L must exceed R_1");

    std::vector<double> w2(N);
    double total = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const double dk = scales[k] - scales[0];
        const double dk1 = (k + 1 < N ? scales[k + 1] : L) - scales[0];
        w2[k] = (dk1 * dk1 - dk * dk) / (scales[k] * scales[k]);
        total += w2[k];
    }
    std::vector<double> w(N);
    for (std::size_t k = 0; k < N; ++k) w[k] = std::sqrt(w2[k] / total);
    return w;
}

/// Scale configuration: ordered scales with weights, grids, and block layout.
struct ScaleConfig {
    std::vector<double> scales;
    std::vector<double> weights;
    double bound = 0.0;  // L
    std::vector<LandmarkGrid> grids;
    std::vector<std::size_t> offsets;  // size N+1, offsets[N] == total dimension

    std::size_t num_scales() const { return scales.size(); }
    std::size_t total_dim() const { return offsets.empty() ? 0 : offsets.back(); }
    std::size_t block_offset(std::size_t k) const { return offsets[k]; }
    std::size_t block_size(std::size_t k) const { return offsets[k + 1] - offsets[k]; }

    mutable std::vector<detail::GridIndex> index_cache;
    const std::vector<detail::GridIndex>& indices() const {
        if (index_cache.size() != grids.size()) {
            index_cache.resize(grids.size());
            for (std::size_t k = 0; k < grids.size(); ++k) index_cache[k].build(grids[k]);
        }
        return index_cache;
    }
};

/// Assemble a configuration from explicit scales and weights.
inline ScaleConfig make_config(const std::vector<double>& scales,
                               const std::vector<double>& weights, double L) {
    if (scales.size() != weights.size())
        throw std::invalid_argument("make_config: scales/weights size mismatch");
    double s2 = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("make_config: weights must be nonnegative");
        s2 += w * w;
    }
    if (std::fabs(s2 - 1.0) > 1e-12)
        throw std::invalid_argument("make_config: weights must satisfy sum w^2 = 1");
    ScaleConfig cfg;
    cfg.scales = scales;
    cfg.weights = weights;
    cfg.bound = L;
    cfg.offsets.assign(1, 0);
    for (double R : scales) {
        cfg.grids.push_back(build_grid(R, L));
        cfg.offsets.push_back(cfg.offsets.back() + cfg.grids.back().size());
    }
    return cfg;
}

inline ScaleConfig make_config(const std::vector<double>& scales, double L) {
    return make_config(scales, closed_form_weights(scales, L), L);
}

/// Multiscale landmark embedding: per-scale blocks scaled by w_k 2^{-3/2}.
/// Diagrams are embedded at native cardinality; rejects a nonempty diagram
/// none of whose points lies inside [0, L]^2.
inline EmbeddedVector embed(const PersistenceDiagram& A, const ScaleConfig& cfg) {
    if (!A.points.empty()) {
        bool any_inside = false;
        for (const auto& x : A.points)
            if (x.death <= cfg.bound && x.birth >= 0.0) { any_inside = true; break; }
        if (!any_inside)
            throw std::invalid_argument("embed: every diagram point lies outside [0, L]^2");
    }
    static const double kBlockNorm = std::pow(2.0, -1.5);
    EmbeddedVector out = EmbeddedVector::Zero(static_cast<Eigen::Index>(cfg.total_dim()));
    const auto& idx = cfg.indices();
    for (std::size_t k = 0; k < cfg.num_scales(); ++k) {
        double* block = out.data() + cfg.block_offset(k);
        for (const auto& x : A.points)
            detail::accumulate_point(cfg.grids[k], idx[k], x, block);
        const double c = cfg.weights[k] * kBlockNorm;
        for (std::size_t j = 0; j < cfg.block_size(k); ++j) block[j] *= c;
    }
    return out;
}

/// Distortion slope lambda(nu): 1/48 times the minimum of the N ratios
/// sqrt(sum_{k<i} w_k^2 R_k^2)/(R_i - R_1) and sqrt(sum_k w_k^2 R_k^2)/(L - R_1).
inline double lambda_slope(const ScaleConfig& cfg) {
    const std::size_t N = cfg.num_scales();
    if (N == 0) throw std::invalid_argument("lambda_slope: empty configuration");
    double prefix = 0.0;
    double ratio_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < N; ++i) {
        prefix += cfg.weights[i - 1] * cfg.weights[i - 1] * cfg.scales[i - 1] * cfg.scales[i - 1];
        ratio_min = std::min(ratio_min, std::sqrt(prefix) / (cfg.scales[i] - cfg.scales[0]));
    }
    prefix += cfg.weights[N - 1] * cfg.weights[N - 1] * cfg.scales[N - 1] * cfg.scales[N - 1];
    ratio_min = std::min(ratio_min, std::sqrt(prefix) / (cfg.bound - cfg.scales[0]));
    return ratio_min / 48.0;
}

/// All ratios entering lambda(nu), for saturation diagnostics.
inline std::vector<double> lambda_ratios(const ScaleConfig& cfg) {
    std::vector<double> out;
    double prefix = 0.0;
    const std::size_t N = cfg.num_scales();
    for (std::size_t i = 1; i < N; ++i) {
        prefix += cfg.weights[i - 1] * cfg.weights[i - 1] * cfg.scales[i - 1] * cfg.scales[i - 1];
        out.push_back(std::sqrt(prefix) / (cfg.scales[i] - cfg.scales[0]));
    }
    prefix += cfg.weights[N - 1] * cfg.weights[N - 1] * cfg.scales[N - 1] * cfg.scales[N - 1];
    out.push_back(std::sqrt(prefix) / (cfg.bound - cfg.scales[0]));
    return out;
}

// Scales within this absolute slack of activation are treated as active,
// so borderline pairs are audited conservatively.
inline constexpr double kActiveScaleSlack = 1e-12;

/// Step-form certificate floor at separation delta:
/// (1/16) sqrt(sum over active scales of w_k^2 R_k^2), active = 3 R_k <= delta.
inline double step_floor(const ScaleConfig& cfg, double delta) {
    if (delta < 0.0) throw std::invalid_argument("step_floor: delta must be >= 0");
    double s = 0.0;
    for (std::size_t k = 0; k < cfg.num_scales(); ++k)
        if (3.0 * cfg.scales[k] <= delta + kActiveScaleSlack)
            s += cfg.weights[k] * cfg.weights[k] * cfg.scales[k] * cfg.scales[k];
    return std::sqrt(s) / 16.0;
}

namespace detail {
inline double median_inplace(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace detail

/// Proxy scale center: median half-persistence over all points of the pool.
inline double tau_proxy(const std::vector<PersistenceDiagram>& diagrams) {
    std::vector<double> hp;
    for (const auto& d : diagrams)
        for (const auto& p : d.points) hp.push_back(diag_cost(p));
    if (hp.empty()) throw std::invalid_argument("tau_proxy: empty point pool");
    return detail::median_inplace(hp);
}

/// Crossing scale center: median bottleneck distance over uniformly
/// sampled cross-class pairs (without replacement, seeded). Uses every
/// cross pair when n_pairs exceeds their count.
inline double tau_crossing(const std::vector<PersistenceDiagram>& diagrams,
                           const std::vector<int>& labels, std::size_t n_pairs,
                           std::uint64_t seed) {
    if (diagrams.size() != labels.size())
        throw std::invalid_argument("tau_crossing: diagrams/labels size mismatch");
    std::vector<std::pair<std::size_t, std::size_t>> cross;
    for (std::size_t i = 0; i < diagrams.size(); ++i)
        for (std::size_t j = i + 1; j < diagrams.size(); ++j)
            if (labels[i] != labels[j]) cross.emplace_back(i, j);
    if (cross.empty()) throw std::invalid_argument("tau_crossing: need at least 2 classes");
    if (cross.size() > n_pairs) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < n_pairs; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, cross.size() - 1);
            std::swap(cross[i], cross[pick(rng)]);
        }
        cross.resize(n_pairs);
    }
    std::vector<double> dist;
    dist.reserve(cross.size());
    for (const auto& [i, j] : cross) dist.push_back(bottleneck(diagrams[i], diagrams[j]));
    return detail::median_inplace(dist);
}

/// Geometric scale ladder centered at tau*: R_k = tau* 2^{k - ceil(N/2)},
/// rescaled if needed so R_N <= L. For N = 1 the single scale is clamped
/// to L/4, which keeps the grid nonempty.
inline ScaleConfig make_scale_config(double tau_star, std::size_t N, double L) {
    if (!(tau_star > 0.0)) throw std::invalid_argument("make_scale_config: tau* must be > 0");
    if (N < 1) throw std::invalid_argument("make_scale_config: N must be >= 1");
    if (tau_star >= L) throw std::invalid_argument("make_scale_config: tau* must be < L");
    std::vector<double> scales(N);
    if (N == 1) {
        scales[0] = std::min(tau_star, L / 4.0);
    } else {
        const std::size_t center = (N + 1) / 2;
        for (std::size_t k = 1; k <= N; ++k)
            scales[k - 1] = tau_star * std::pow(2.0, static_cast<double>(k) - static_cast<double>(center));
        if (scales.back() > L) {
            const double shrink = L / scales.back();
            for (double& R : scales) R *= shrink;
        }
    }
    return make_config(scales, L);
}

/// L auto-detection: max death over the pool times 1.05 headroom.
inline double auto_bound(const std::vector<PersistenceDiagram>& diagrams) {
    double dmax = 0.0;
    bool any = false;
    for (const auto& d : diagrams)
        for (const auto& p : d.points) {
            dmax = std::max(dmax, p.death);
            any = true;
        }
    if (!any) throw std::invalid_argument("auto_bound: empty pool");
    return dmax * 1.05;
}

}  // namespace place
