#pragma once

// Landmark grid at a single scale: the parity-constrained lattice in the
// birth-death plane plus the formal diagonal landmark.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "place/diagram.hpp"

namespace place {

struct Landmark {
    bool is_diagonal = false;
    int m = 0;          // lattice indices; identity is exact across runs
    int n = 0;
    double birth = 0.0;  // m * R
    double death = 0.0;  // n * R
};

/// Bottleneck distance from a landmark to an ordinary point.
inline double landmark_dist(double scale, const Landmark& p, const DiagramPoint& x) {
    (void)scale;
    if (p.is_diagonal) return diag_cost(x);
    const DiagramPoint q{p.birth, p.death};
    return bottleneck_single(q, x);
}

struct LandmarkGrid {
    double scale = 0.0;   // R
    double bound = 0.0;   // L
    std::vector<Landmark> landmarks;  // lattice sites sorted by (m, n), diagonal last

    std::size_t size() const { return landmarks.size(); }
};

/// Build the grid at scale R within [0, L]^2: sites (mR, nR) with m odd,
/// n even >= 4, n >= m + 3, plus the diagonal landmark.
inline LandmarkGrid build_grid(double R, double L) {
    if (!(R > 0.0)) throw std::invalid_argument("build_grid: R must be > 0");
    if (R > L) throw std::invalid_argument("build_grid: R must be <= L");
    LandmarkGrid g;
    g.scale = R;
    g.bound = L;
    const int m_max = static_cast<int>(L / R);
    for (int m = 1; m <= m_max; m += 2) {
        if (m * R > L) break;
        for (int n = m + 3; n * R <= L; n += 2) {
            Landmark lm;
            lm.m = m;
            lm.n = n;
            lm.birth = m * R;
            lm.death = n * R;
            g.landmarks.push_back(lm);
        }
    }
    Landmark star;
    star.is_diagonal = true;
    g.landmarks.push_back(star);
    return g;
}

/// Number of landmarks whose hat support contains x, i.e. with
/// d_B(p, x) < 3R/2. The support is the open ball: points at distance
/// exactly 3R/2 carry zero hat mass and are not covered (every point of
/// the near-diagonal strip sits at distance exactly 3R/2 from every
/// first-row site, so the closed count would exceed the lemma's bound).
inline std::size_t cover_multiplicity(const LandmarkGrid& g, const DiagramPoint& x) {
    if (!(x.birth >= 0.0 && x.birth < x.death && x.death <= g.bound))
        throw std::invalid_argument("cover_multiplicity: point outside the region 0 <= b < d <= L");
    const double radius = 1.5 * g.scale;
    std::size_t count = 0;
    for (const auto& p : g.landmarks)
        if (landmark_dist(g.scale, p, x) < radius) ++count;
    return count;
}

}  // namespace place
