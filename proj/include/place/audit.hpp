#pragma once

// Empirical verification machinery: the per-scale coherence check, the
// sampled coherence and certificate-bound audits, and the lambda bridge
// from bottleneck separation to class-mean separation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "place/diagram.hpp"
#include "place/embedding.hpp"
#include "place/stats.hpp"

namespace place {

struct CoherenceScale {
    double scale = 0.0;
    bool active = false;        // 3 R_k <= d_B(A, B)
    double block_norm_sq = 0.0; // unweighted single-scale block difference
    double floor = 0.0;         // R_k^2 / 32
    bool floor_met = false;
};

struct CoherenceResult {
    double d_b = 0.0;
    bool qualifying = false;  // d_B >= 3 R_1
    bool coherent = false;    // floor met at every active scale
    std::vector<CoherenceScale> per_scale;
};

/// Check the per-scale block-norm floor ||Phi_Rk(A) - Phi_Rk(B)||^2 >= R_k^2/32
/// at every active scale. The per-scale entries also report inactive scales
/// (where the floor is not required), which is how the cancellation
/// construction is surfaced diagnostically.
inline CoherenceResult is_nu_coherent(const PersistenceDiagram& A,
                                      const PersistenceDiagram& B,
                                      const ScaleConfig& nu) {
    CoherenceResult res;
    res.d_b = bottleneck(A, B);
    res.qualifying = 3.0 * nu.scales.front() <= res.d_b + kActiveScaleSlack;
    res.coherent = true;
    for (std::size_t k = 0; k < nu.num_scales(); ++k) {
        CoherenceScale cs;
        cs.scale = nu.scales[k];
        cs.active = 3.0 * nu.scales[k] <= res.d_b + kActiveScaleSlack;
        EmbeddedVector diff = embed_single_scale(A, nu.grids[k]) -
                              embed_single_scale(B, nu.grids[k]);
        cs.block_norm_sq = diff.squaredNorm();
        cs.floor = nu.scales[k] * nu.scales[k] / 32.0;
        cs.floor_met = cs.block_norm_sq >= cs.floor;
        if (cs.active && !cs.floor_met) res.coherent = false;
        res.per_scale.push_back(cs);
    }
    return res;
}

struct AuditReport {
    std::size_t n_pairs_sampled = 0;
    std::size_t n_qualifying = 0;
    double coherent_fraction = std::numeric_limits<double>::quiet_NaN();
    double bound_fraction = std::numeric_limits<double>::quiet_NaN();
    double ratio_p25 = std::numeric_limits<double>::quiet_NaN();
    double ratio_p50 = std::numeric_limits<double>::quiet_NaN();
    double ratio_p75 = std::numeric_limits<double>::quiet_NaN();
    double ratio_min = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    // floor-chain consistency: coherent qualifying pairs violating the
    // aggregate step floor (must stay zero)
    std::size_t n_coherent_bound_violations = 0;
};

namespace detail {

inline double percentile(std::vector<double> v, double p) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

inline std::vector<std::pair<std::size_t, std::size_t>> sample_cross_pairs(
    const std::vector<int>& labels, std::size_t n_pairs, std::uint64_t seed) {
    std::vector<std::pair<std::size_t, std::size_t>> cross;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            if (labels[i] != labels[j]) cross.emplace_back(i, j);
    if (cross.empty())
        throw std::invalid_argument("audit: need at least 2 classes");
    if (cross.size() > n_pairs) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < n_pairs; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, cross.size() - 1);
            std::swap(cross[i], cross[pick(rng)]);
        }
        cross.resize(n_pairs);
    }
    return cross;
}

}  // namespace detail

/// One pass over uniformly sampled cross-class pairs computing both the
/// coherence audit and the certificate-bound audit quantities.
inline AuditReport audit_pairs(const std::vector<PersistenceDiagram>& diagrams,
                               const std::vector<int>& labels, const ScaleConfig& nu,
                               std::size_t n_pairs, std::uint64_t seed) {
    if (diagrams.size() != labels.size())
        throw std::invalid_argument("audit: diagrams/labels size mismatch");
    AuditReport rep;
    rep.seed = seed;
    const auto pairs = detail::sample_cross_pairs(labels, n_pairs, seed);
    rep.n_pairs_sampled = pairs.size();

    std::size_t coherent = 0, bound_ok = 0;
    std::vector<double> ratios;
    for (const auto& [i, j] : pairs) {
        const auto coh = is_nu_coherent(diagrams[i], diagrams[j], nu);
        if (!coh.qualifying) continue;
        ++rep.n_qualifying;
        if (coh.coherent) ++coherent;

        const double dist = (embed(diagrams[i], nu) - embed(diagrams[j], nu)).norm();
        const double floor = step_floor(nu, coh.d_b);
        const double ratio = dist / floor;
        ratios.push_back(ratio);
        const bool ok = ratio >= 1.0 - 1e-9;
        if (ok) ++bound_ok;
        if (coh.coherent && !ok) ++rep.n_coherent_bound_violations;
    }
    if (rep.n_qualifying > 0) {
        rep.coherent_fraction = static_cast<double>(coherent) / rep.n_qualifying;
        rep.bound_fraction = static_cast<double>(bound_ok) / rep.n_qualifying;
        rep.ratio_p25 = detail::percentile(ratios, 0.25);
        rep.ratio_p50 = detail::percentile(ratios, 0.50);
        rep.ratio_p75 = detail::percentile(ratios, 0.75);
        rep.ratio_min = *std::min_element(ratios.begin(), ratios.end());
    }
    return rep;
}

/// Coherence audit over sampled qualifying cross-class pairs.
inline AuditReport audit_coherence(const std::vector<PersistenceDiagram>& diagrams,
                                   const std::vector<int>& labels, const ScaleConfig& nu,
                                   std::size_t n_pairs, std::uint64_t seed) {
    return audit_pairs(diagrams, labels, nu, n_pairs, seed);
}

/// Certificate-bound audit: per-pair ratio of the embedded distance to the
/// step floor at the pair's bottleneck distance.
inline AuditReport audit_certificate_bound(const std::vector<PersistenceDiagram>& diagrams,
                                           const std::vector<int>& labels,
                                           const ScaleConfig& nu, std::size_t n_pairs,
                                           std::uint64_t seed) {
    return audit_pairs(diagrams, labels, nu, n_pairs, seed);
}

struct LambdaBridge {
    double delta_star = 0.0;   // sampled minimum cross-class bottleneck distance
    double affine_bound = 0.0; // lambda(nu) (delta* - R_1) - 2 max_c D_c
    double step_bound = 0.0;   // step-form sharpening of the same bound
    double delta_hat = 0.0;
    bool affine_satisfied = false;
    bool step_satisfied = false;
};

/// Lambda bridge diagnostic. delta* from sampled pairs is an upper bound on
/// the true support separation, so the implied bounds are reported as such.
inline LambdaBridge lambda_bridge(const std::vector<PersistenceDiagram>& diagrams,
                                  const std::vector<int>& labels, const ScaleConfig& nu,
                                  const ClassStats& stats, std::size_t n_pairs = 2000,
                                  std::uint64_t seed = 0) {
    const auto pairs = detail::sample_cross_pairs(labels, n_pairs, seed);
    LambdaBridge out;
    out.delta_star = std::numeric_limits<double>::infinity();
    for (const auto& [i, j] : pairs)
        out.delta_star = std::min(out.delta_star, bottleneck(diagrams[i], diagrams[j]));
    double d_max = 0.0;
    for (double d : stats.within_radius) d_max = std::max(d_max, d);
    out.affine_bound = lambda_slope(nu) * (out.delta_star - nu.scales.front()) - 2.0 * d_max;
    out.step_bound = step_floor(nu, out.delta_star) - 2.0 * d_max;
    out.delta_hat = stats.delta();
    out.affine_satisfied = out.delta_hat >= out.affine_bound - 1e-12;
    out.step_satisfied = out.delta_hat >= out.step_bound - 1e-12;
    return out;
}

}  // namespace place
