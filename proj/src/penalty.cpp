#include "multibang/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "multibang/errors.hpp"

namespace multibang {

namespace {

// Index i of the piece [u_i, u_{i+1}] containing v, for v in [u_1, u_d].
std::size_t segment_of(double v, const AdmissibleSet& U) {
    const auto vals = U.values();
    const auto it = std::upper_bound(vals.begin(), vals.end(), v);
    const auto k = static_cast<std::size_t>(it - vals.begin());
    return std::min(k == 0 ? 0 : k - 1, U.size() - 2);
}

std::string describe(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

AdmissibleSet::AdmissibleSet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
        throw DomainError("admissible set needs at least two values");
    }
    min_gap_ = kInfinity;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || !std::isfinite(values_[i + 1]) ||
            !(values_[i] < values_[i + 1])) {
            throw DomainError("admissible values must be finite and strictly increasing");
        }
        min_gap_ = std::min(min_gap_, values_[i + 1] - values_[i]);
    }
}

ProxParams::ProxParams(double alpha, double gamma) : alpha_(alpha), gamma_(gamma) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be positive");
}

double g_value(double v, const AdmissibleSet& U) {
    if (!U.contains(v)) return kInfinity;
    const std::size_t i = segment_of(v, U);
    return 0.5 * ((U[i] + U[i + 1]) * v - U[i] * U[i + 1]);
}

double G_value(const ScalarField& u, const AdmissibleSet& U) {
    double s = 0.0;
    for (double v : u.values()) {
        const double gv = g_value(v, U);
        if (gv == kInfinity) return kInfinity;
        s += gv;
    }
    return u.grid().quad_weight() * s;
}

Interval subdiff_g(double v, const AdmissibleSet& U) {
    const std::size_t d = U.size();
    if (!U.contains(v)) return Interval::empty();
    if (v == U[0]) return {-kInfinity, U.midpoint(0), true, false};
    if (v == U[d - 1]) return {U.midpoint(d - 2), kInfinity, false, true};
    for (std::size_t i = 1; i + 1 < d; ++i) {
        if (v == U[i]) return Interval::closed(U.midpoint(i - 1), U.midpoint(i));
    }
    return Interval::point(U.midpoint(segment_of(v, U)));
}

Interval subdiff_g_star(double q, const AdmissibleSet& U) {
    const std::size_t d = U.size();
    for (std::size_t i = 0; i + 1 < d; ++i) {
        const double m = U.midpoint(i);
        if (q < m) return Interval::point(U[i]);
        if (q == m) return Interval::closed(U[i], U[i + 1]);
    }
    return Interval::point(U[d - 1]);
}

double bregman_g(double v2, double v1, double q, const AdmissibleSet& U) {
    if (!U.contains(v1) || !U.contains(v2)) {
        throw DomainError("Bregman distance needs both points in [u_1, u_d], got v2=" +
                          describe(v2) + ", v1=" + describe(v1));
    }
    if (!subdiff_g(v1, U).contains(q)) {
        throw InvalidSubgradient("q=" + describe(q) + " is not a subgradient of g at v1=" +
                                 describe(v1));
    }
    const double lo = std::min(v1, v2);
    const double hi = std::max(v1, v2);
    const bool forward = v2 >= v1;
    double d = 0.0;
    for (std::size_t i = 0; i + 1 < U.size(); ++i) {
        const double len = std::min(hi, U[i + 1]) - std::max(lo, U[i]);
        if (len <= 0.0) continue;
        const double slope_gap = forward ? U.midpoint(i) - q : q - U.midpoint(i);
        d += slope_gap * len;
    }
    return d;
}

double bregman_G(const ScalarField& u2, const ScalarField& u1, const ScalarField& p,
                 const AdmissibleSet& U) {
    require_same_grid(u2, u1);
    require_same_grid(u1, p);
    const Grid& grid = u1.grid();
    double s = 0.0;
    for (int j = 0; j < grid.n(); ++j) {
        for (int i = 0; i < grid.n(); ++i) {
            try {
                s += bregman_g(u2.at(i, j), u1.at(i, j), p.at(i, j), U);
            } catch (const InvalidSubgradient& e) {
                throw InvalidSubgradient("node (" + std::to_string(i) + ", " + std::to_string(j) +
                                         "): " + e.what());
            }
        }
    }
    return grid.quad_weight() * s;
}

double strict_subgradient(double v, const AdmissibleSet& U) {
    if (!U.contains(v)) {
        throw DomainError("strict subgradient needs v in [u_1, u_d], got " + describe(v));
    }
    for (double ui : U.values()) {
        if (v == ui) return ui;
    }
    return U.midpoint(segment_of(v, U));
}

double default_snap_tol(const AdmissibleSet& U) { return 1e-12 * (U.back() - U.front()); }

double snap(double v, const AdmissibleSet& U, double tol) {
    for (double ui : U.values()) {
        if (std::abs(v - ui) <= tol) return ui;
    }
    return v;
}

double snap(double v, const AdmissibleSet& U) { return snap(v, U, default_snap_tol(U)); }

double snap_subgradient(double q, const AdmissibleSet& U, double tol) {
    for (std::size_t i = 0; i + 1 < U.size(); ++i) {
        if (std::abs(q - U.midpoint(i)) <= tol) return U.midpoint(i);
    }
    return q;
}

double band_lower(std::size_t i, const ProxParams& params, const AdmissibleSet& U) {
    return params.alpha() * U.midpoint(i) + params.gamma() * U[i];
}

double band_upper(std::size_t i, const ProxParams& params, const AdmissibleSet& U) {
    return params.alpha() * U.midpoint(i) + params.gamma() * U[i + 1];
}

int prox_branch(double p, const ProxParams& params, const AdmissibleSet& U) {
    const std::size_t d = U.size();
    for (std::size_t i = 0; i + 1 < d; ++i) {
        if (p < band_lower(i, params, U)) return static_cast<int>(2 * i);
        if (p <= band_upper(i, params, U)) return static_cast<int>(2 * i + 1);
    }
    return static_cast<int>(2 * (d - 1));
}

double prox_H(double p, const ProxParams& params, const AdmissibleSet& U) {
    const int branch = prox_branch(p, params, U);
    const auto i = static_cast<std::size_t>(branch / 2);
    if (!is_transition_branch(branch)) return U[i];
    const double v = (p - params.alpha() * U.midpoint(i)) / params.gamma();
    return std::clamp(v, U[i], U[i + 1]);
}

ProxField prox_H_field(const ScalarField& p, const ProxParams& params, const AdmissibleSet& U) {
    ProxField out{ScalarField(p.grid()), {}};
    for (std::size_t k = 0; k < p.size(); ++k) {
        out.u[k] = prox_H(p[k], params, U);
        if (is_transition_branch(prox_branch(p[k], params, U))) out.transition_nodes.push_back(k);
    }
    return out;
}

std::vector<int> prox_branches(const ScalarField& p, const ProxParams& params,
                               const AdmissibleSet& U) {
    std::vector<int> labels(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) labels[k] = prox_branch(p[k], params, U);
    return labels;
}

ScalarField newton_diag(const ScalarField& p, const ProxParams& params, const AdmissibleSet& U) {
    ScalarField diag(p.grid());
    const double inv_gamma = 1.0 / params.gamma();
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (is_transition_branch(prox_branch(p[k], params, U))) diag[k] = inv_gamma;
    }
    return diag;
}

ScalarField newton_deriv_H(const ScalarField& p, const ScalarField& h, const ProxParams& params,
                           const AdmissibleSet& U) {
    require_same_grid(p, h);
    ScalarField out = newton_diag(p, params, U);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= h[k];
    return out;
}

}  // namespace multibang
