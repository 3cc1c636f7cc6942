#pragma once

// Nearest-centroid prediction with the three certificate radii, the
// firing logic, and the explicit per-class sample thresholds.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "place/special.hpp"
#include "place/stats.hpp"

namespace place {

/// Nearest-centroid prediction: index into stats.labels of the closest
/// class mean; ties go to the smaller label.
inline std::size_t nc_predict(const EmbeddedVector& x, const ClassStats& s) {
    if (s.num_classes() == 0) throw std::invalid_argument("nc_predict: unfitted stats");
    if (static_cast<std::size_t>(x.size()) != s.dim())
        throw std::invalid_argument("nc_predict: dimension mismatch");
    std::size_t best = 0;
    double best_d = (x - s.means[0]).norm();
    for (std::size_t c = 1; c < s.num_classes(); ++c) {
        const double d = (x - s.means[c]).norm();
        if (d < best_d) {
            best = c;
            best_d = d;
        }
    }
    return best;
}

/// Non-asymptotic Pinelis radius: 2 R sqrt(2 log(2k/alpha) / m).
inline double radius_pinelis(double R, std::size_t m_min, std::size_t k, double alpha) {
    if (m_min < 1) throw std::invalid_argument("radius_pinelis: m_min must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("radius_pinelis: alpha in (0,1)");
    return 2.0 * R * std::sqrt(2.0 * std::log(2.0 * static_cast<double>(k) / alpha) /
                               static_cast<double>(m_min));
}

/// Variance-aware Pinelis-Bernstein radius: sqrt(2 tr(Sigma_c) log(2k/alpha) / m_c).
inline double radius_bernstein(double tr_sigma_c, std::size_t m_c, std::size_t k, double alpha) {
    if (tr_sigma_c < 0.0) throw std::invalid_argument("radius_bernstein: trace must be >= 0");
    if (m_c < 1) throw std::invalid_argument("radius_bernstein: m_c must be >= 1");
    return std::sqrt(2.0 * tr_sigma_c * std::log(2.0 * static_cast<double>(k) / alpha) /
                     static_cast<double>(m_c));
}

/// Asymptotic Gaussian plug-in radius: sqrt(op_norm_c chi2_{ell, 1-alpha/k} / m_c).
inline double radius_gaussian(double op_norm_c, std::size_t m_c, std::size_t ell,
                              std::size_t k, double alpha) {
    if (m_c < 1) throw std::invalid_argument("radius_gaussian: m_c must be >= 1");
    if (ell < 1) throw std::invalid_argument("radius_gaussian: ell must be >= 1");
    const double q = chi2_quantile(ell, 1.0 - alpha / static_cast<double>(k));
    return std::sqrt(op_norm_c * q / static_cast<double>(m_c));
}

struct SampleThresholds {
    std::size_t pinelis = 0;
    std::size_t bernstein = 0;
    std::size_t gaussian = 0;
};

/// Per-class sample-size ceilings that make each radius fire:
/// m*_Pin = ceil(32 R^2 log(2k/a) / Delta_c^2),
/// m*_vP  = ceil(8 op_c log(2k/a) / Delta_c^2),
/// m*_G   = ceil(4 op_c chi2_{ell, a/k} / Delta_c^2).
inline SampleThresholds sample_thresholds(double R, double op_norm_c, double delta_c,
                                          std::size_t ell, std::size_t k, double alpha) {
    if (!(delta_c > 0.0)) throw std::invalid_argument("sample_thresholds: Delta_c must be > 0");
    const double log_term = std::log(2.0 * static_cast<double>(k) / alpha);
    const double d2 = delta_c * delta_c;
    const double q = chi2_quantile(ell, 1.0 - alpha / static_cast<double>(k));
    SampleThresholds t;
    t.pinelis = static_cast<std::size_t>(std::ceil(32.0 * R * R * log_term / d2));
    t.bernstein = static_cast<std::size_t>(std::ceil(8.0 * op_norm_c * log_term / d2));
    t.gaussian = static_cast<std::size_t>(std::ceil(4.0 * op_norm_c * q / d2));
    return t;
}

struct CertificateReport {
    double alpha = 0.05;
    std::size_t k = 0;
    std::size_t ell = 0;
    double delta = 0.0;   // global class-mean separation
    double radius = 0.0;  // R_hat

    std::vector<std::size_t> counts;       // m_c
    std::vector<double> class_gap;         // Delta_c
    std::vector<double> trace;             // tr(Sigma_c)
    std::vector<double> op_norm;           // ||Sigma_c||_op
    std::vector<double> stable_rank;       // tr / op
    std::vector<double> radius_bernstein_c;  // per-class vP radius
    std::vector<bool> vp_out_of_regime;    // t > tr(Sigma_c)/R small-deviation guard
    std::vector<double> thr_pinelis;       // per-class thresholds (inf when Delta_c = 0)
    std::vector<double> thr_bernstein;
    std::vector<double> thr_gaussian;

    double r_pinelis = 0.0;   // global, m = m_min
    double r_bernstein = 0.0; // max over classes
    double r_gaussian = 0.0;  // max over classes

    bool fire_pinelis = false;    // r_Pin < Delta/2
    bool fire_bernstein = false;  // per class: r_vP^(c) < Delta_c/2, all classes, in regime
    bool fire_gaussian = false;   // r_G < Delta/2
};

/// Evaluate the certificate for a fitted multi-class model: the three
/// radii, per-class thresholds, and the firing verdicts. Pinelis and
/// Gaussian compare to Delta/2 globally; the Pinelis-Bernstein verdict
/// requires the per-class inequality r^(c) < Delta_c/2 for every class.
inline CertificateReport certify(const ClassStats& s, double alpha) {
    if (s.num_classes() < 2) throw std::invalid_argument("certify: need k >= 2 classes");
    CertificateReport rep;
    rep.alpha = alpha;
    rep.k = s.num_classes();
    rep.ell = s.dim();
    rep.delta = s.delta();
    rep.radius = s.radius;
    rep.counts = s.counts;
    rep.class_gap = s.class_gap;
    rep.trace = s.trace;
    rep.op_norm = s.op_norm;

    rep.r_pinelis = radius_pinelis(s.radius, s.m_min(), rep.k, alpha);
    const double inf = std::numeric_limits<double>::infinity();
    bool vp_all = true;
    for (std::size_t c = 0; c < rep.k; ++c) {
        rep.stable_rank.push_back(s.op_norm[c] > 0.0 ? s.trace[c] / s.op_norm[c] : 0.0);
        const double rv = radius_bernstein(s.trace[c], s.counts[c], rep.k, alpha);
        const double rg = radius_gaussian(s.op_norm[c], s.counts[c], rep.ell, rep.k, alpha);
        rep.radius_bernstein_c.push_back(rv);
        rep.r_bernstein = std::max(rep.r_bernstein, rv);
        rep.r_gaussian = std::max(rep.r_gaussian, rg);

        // Small-deviation regime diagnostic (t <= tr(Sigma_c)/R). Reported
        // per class; the verdict itself stays the Table's inequality.
        const bool out_of_regime = s.radius > 0.0 && rv > s.trace[c] / s.radius;
        rep.vp_out_of_regime.push_back(out_of_regime);
        vp_all = vp_all && rv < 0.5 * s.class_gap[c];

        if (s.class_gap[c] > 0.0) {
            const auto thr = sample_thresholds(s.radius, s.op_norm[c], s.class_gap[c],
                                               rep.ell, rep.k, alpha);
            rep.thr_pinelis.push_back(static_cast<double>(thr.pinelis));
            rep.thr_bernstein.push_back(static_cast<double>(thr.bernstein));
            rep.thr_gaussian.push_back(static_cast<double>(thr.gaussian));
        } else {
            rep.thr_pinelis.push_back(inf);
            rep.thr_bernstein.push_back(inf);
            rep.thr_gaussian.push_back(inf);
        }
    }
    rep.fire_pinelis = rep.r_pinelis < 0.5 * rep.delta;
    rep.fire_bernstein = vp_all;
    rep.fire_gaussian = rep.r_gaussian < 0.5 * rep.delta;
    return rep;
}

}  // namespace place
