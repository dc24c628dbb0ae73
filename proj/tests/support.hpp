#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "multibang/grid.hpp"
#include "multibang/penalty.hpp"

namespace testsupport {

// g as the supremum of its affine pieces, written out independently of the library.
inline double g_reference(double v, const std::vector<double>& u) {
    if (v < u.front() || v > u.back()) return std::numeric_limits<double>::infinity();
    double g = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        g = std::max(g, 0.5 * ((u[i] + u[i + 1]) * v - u[i] * u[i + 1]));
    }
    return g;
}

inline multibang::ScalarField random_field(const multibang::Grid& grid, std::mt19937_64& rng,
                                           double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<> dist(lo, hi);
    multibang::ScalarField f(grid);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = dist(rng);
    return f;
}

inline double max_abs_diff(const multibang::ScalarField& a, const multibang::ScalarField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace testsupport
