#pragma once

// Persistence-diagram data model, exact bottleneck distance, and the
// top-N persistence filter.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace place {

struct DiagramPoint {
    double birth = 0.0;
    double death = 0.0;
};

inline bool valid_point(const DiagramPoint& p) {
    return std::isfinite(p.birth) && std::isfinite(p.death) &&
           p.birth >= 0.0 && p.death > p.birth;
}

/// Lifetime death - birth.
inline double persistence(const DiagramPoint& p) { return p.death - p.birth; }

/// Matching cost against the formal diagonal point: (d - b) / 2.
inline double diag_cost(const DiagramPoint& p) { return 0.5 * (p.death - p.birth); }

/// l-infinity ground metric between two ordinary points.
inline double d_inf(const DiagramPoint& a, const DiagramPoint& b) {
    return std::max(std::fabs(a.birth - b.birth), std::fabs(a.death - b.death));
}

/// Bottleneck distance between two single-point diagrams:
/// min of the direct match and the route through the diagonal.
inline double bottleneck_single(const DiagramPoint& p, const DiagramPoint& q) {
    return std::min(d_inf(p, q), std::max(diag_cost(p), diag_cost(q)));
}

/// Bottleneck distance between a single point and the diagonal.
inline double bottleneck_single_diag(const DiagramPoint& p) { return diag_cost(p); }

struct PersistenceDiagram {
    std::vector<DiagramPoint> points;
    int homology_dim = 0;  // informational tag, 0 or 1

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Keep the n_max points of largest persistence. Ties are broken by
/// (birth, death) lexicographic order so the output is deterministic;
/// the result is sorted by decreasing persistence, which makes the
/// filter idempotent.
inline PersistenceDiagram filter_top_n(const PersistenceDiagram& d, std::size_t n_max) {
    if (n_max < 1) throw std::invalid_argument("filter_top_n: n_max must be >= 1");
    PersistenceDiagram out;
    out.homology_dim = d.homology_dim;
    out.points = d.points;
    std::sort(out.points.begin(), out.points.end(),
              [](const DiagramPoint& a, const DiagramPoint& b) {
                  const double pa = persistence(a), pb = persistence(b);
                  if (pa != pb) return pa > pb;
                  if (a.birth != b.birth) return a.birth < b.birth;
                  return a.death < b.death;
              });
    if (out.points.size() > n_max) out.points.resize(n_max);
    return out;
}

namespace detail {

// Augmenting-path matching on the doubled bipartite graph
// (A points + diagonal slots) x (B points + diagonal slots).
// Edge (i, j) exists when the corresponding matching cost is <= t.
class BottleneckFeasibility {
public:
    BottleneckFeasibility(const std::vector<DiagramPoint>& a,
                          const std::vector<DiagramPoint>& b)
        : a_(a), b_(b), na_(a.size()), nb_(b.size()) {}

    // Perfect matching of all na_+nb_ left nodes at threshold t?
    bool feasible(double t) const {
        const std::size_t nl = na_ + nb_, nr = nb_ + na_;
        std::vector<int> match_r(nr, -1);
        std::vector<char> used(nr, 0);
        std::size_t matched = 0;
        for (std::size_t i = 0; i < nl; ++i) {
            std::fill(used.begin(), used.end(), 0);
            if (try_augment(i, t, match_r, used)) ++matched;
        }
        return matched == nl;
    }

private:
    bool edge(std::size_t l, std::size_t r, double t) const {
        const bool l_real = l < na_, r_real = r < nb_;
        if (l_real && r_real) return d_inf(a_[l], b_[r]) <= t;
        if (l_real) return diag_cost(a_[l]) <= t;   // A point -> diagonal slot
        if (r_real) return diag_cost(b_[r]) <= t;   // diagonal slot -> B point
        return true;                                // diagonal -> diagonal
    }

    bool try_augment(std::size_t l, double t, std::vector<int>& match_r,
                     std::vector<char>& used) const {
        const std::size_t nr = nb_ + na_;
        for (std::size_t r = 0; r < nr; ++r) {
            if (used[r] || !edge(l, r, t)) continue;
            used[r] = 1;
            if (match_r[r] < 0 ||
                try_augment(static_cast<std::size_t>(match_r[r]), t, match_r, used)) {
                match_r[r] = static_cast<int>(l);
                return true;
            }
        }
        return false;
    }

    const std::vector<DiagramPoint>& a_;
    const std::vector<DiagramPoint>& b_;
    std::size_t na_, nb_;
};

}  // namespace detail

/// Exact bottleneck distance. Candidate costs are collected from all
/// cross pairs and diagonal projections; a binary search over the sorted
/// candidates finds the smallest threshold admitting a perfect matching,
/// so the result is always one of the candidate values (bit-for-bit
/// reproducible).
inline double bottleneck(const PersistenceDiagram& A, const PersistenceDiagram& B) {
    const auto& a = A.points;
    const auto& b = B.points;
    if (a.empty() && b.empty()) return 0.0;

    std::vector<double> cands;
    cands.reserve(a.size() * b.size() + a.size() + b.size() + 1);
    cands.push_back(0.0);
    for (const auto& p : a)
        for (const auto& q : b) cands.push_back(d_inf(p, q));
    for (const auto& p : a) cands.push_back(diag_cost(p));
    for (const auto& q : b) cands.push_back(diag_cost(q));
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

    detail::BottleneckFeasibility feas(a, b);
    std::size_t lo = 0, hi = cands.size() - 1;
    // the largest candidate (match everything somehow) is always feasible
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (feas.feasible(cands[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return cands[lo];
}

}  // namespace place
