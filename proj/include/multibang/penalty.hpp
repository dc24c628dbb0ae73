#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "multibang/grid.hpp"

namespace multibang {

/// Sorted admissible parameter values u_1 < ... < u_d, d >= 2.
class AdmissibleSet {
public:
    explicit AdmissibleSet(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    double front() const noexcept { return values_.front(); }
    double back() const noexcept { return values_.back(); }
    double min_gap() const noexcept { return min_gap_; }
    /// (u_i + u_{i+1}) / 2, the slope of g on [u_i, u_{i+1}].
    double midpoint(std::size_t i) const noexcept { return 0.5 * (values_[i] + values_[i + 1]); }
    bool contains(double v) const noexcept { return v >= front() && v <= back(); }

    friend bool operator==(const AdmissibleSet& a, const AdmissibleSet& b) noexcept {
        return a.values_ == b.values_;
    }

private:
    std::vector<double> values_;
    double min_gap_;
};

/// Real interval with possibly infinite or open endpoints; holds subdifferentials.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    bool lower_open = true;
    bool upper_open = true;

    static Interval point(double x) noexcept { return {x, x, false, false}; }
    static Interval closed(double a, double b) noexcept { return {a, b, false, false}; }
    /// The open interval (0, 0).
    static Interval empty() noexcept { return {}; }

    bool is_empty() const noexcept {
        return lower > upper || (lower == upper && (lower_open || upper_open));
    }
    bool is_point() const noexcept { return lower == upper && !lower_open && !upper_open; }
    bool contains(double x) const noexcept {
        if (is_empty()) return false;
        const bool above = lower_open ? x > lower : x >= lower;
        const bool below = upper_open ? x < upper : x <= upper;
        return above && below;
    }

    friend bool operator==(const Interval& a, const Interval& b) noexcept {
        if (a.is_empty() || b.is_empty()) return a.is_empty() == b.is_empty();
        return a.lower == b.lower && a.upper == b.upper && a.lower_open == b.lower_open &&
               a.upper_open == b.upper_open;
    }
};

/// Regularization weight alpha and Moreau-Yosida parameter gamma, both > 0.
class ProxParams {
public:
    ProxParams(double alpha, double gamma);

    double alpha() const noexcept { return alpha_; }
    double gamma() const noexcept { return gamma_; }

private:
    double alpha_;
    double gamma_;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Multi-bang integrand g; +inf outside [u_1, u_d].
double g_value(double v, const AdmissibleSet& U);
/// w * sum_x g(u(x)).
double G_value(const ScalarField& u, const AdmissibleSet& U);

/// Convex subdifferential of g. Breakpoints are matched exactly; see snap().
Interval subdiff_g(double v, const AdmissibleSet& U);
/// Subdifferential of the Fenchel conjugate g*; never empty.
Interval subdiff_g_star(double q, const AdmissibleSet& U);

/// Bregman distance g(v2) - g(v1) - q (v2 - v1) for q in subdiff_g(v1).
///
/// Evaluated by integrating (slope - q) over the pieces of g between v1 and v2, so every
/// summand is nonnegative and distances inside one piece with q equal to its slope are
/// exactly zero.
double bregman_g(double v2, double v1, double q, const AdmissibleSet& U);
double bregman_G(const ScalarField& u2, const ScalarField& u1, const ScalarField& p,
                 const AdmissibleSet& U);

/// A subgradient strictly inside the admissible range required for pointwise convergence:
/// the slope on (u_i, u_{i+1}), and u_i itself at a breakpoint.
double strict_subgradient(double v, const AdmissibleSet& U);

/// Default breakpoint tolerance 1e-12 * (u_d - u_1).
double default_snap_tol(const AdmissibleSet& U);
/// Returns u_i if |v - u_i| <= tol for some i, otherwise v.
double snap(double v, const AdmissibleSet& U, double tol);
double snap(double v, const AdmissibleSet& U);
/// Returns the slope (u_i + u_{i+1})/2 if q is within tol of it, otherwise q.
double snap_subgradient(double q, const AdmissibleSet& U, double tol);

/// Piece of H_gamma containing p: 2i for the constant piece {u_i}, 2i+1 for the closed
/// transition band between u_i and u_{i+1}.
int prox_branch(double p, const ProxParams& params, const AdmissibleSet& U);
constexpr bool is_transition_branch(int branch) noexcept { return branch % 2 == 1; }

/// Lower and upper edge of the transition band between u_i and u_{i+1}:
/// alpha/2 (u_i + u_{i+1}) + gamma u_i  and  alpha/2 (u_i + u_{i+1}) + gamma u_{i+1}.
double band_lower(std::size_t i, const ProxParams& params, const AdmissibleSet& U);
double band_upper(std::size_t i, const ProxParams& params, const AdmissibleSet& U);

/// Moreau-Yosida regularized conjugate subdifferential H_gamma, i.e. the minimizer of
/// u -> alpha g(u) + gamma/2 u^2 - p u.
double prox_H(double p, const ProxParams& params, const AdmissibleSet& U);

struct ProxField {
    ScalarField u;
    /// Nodes whose dual value lies in a transition band (regularized singular set).
    std::vector<std::size_t> transition_nodes;
};

ProxField prox_H_field(const ScalarField& p, const ProxParams& params, const AdmissibleSet& U);

/// Branch labels of prox_branch for every node.
std::vector<int> prox_branches(const ScalarField& p, const ProxParams& params,
                               const AdmissibleSet& U);

/// Diagonal of the Newton derivative of H_gamma at p: 1/gamma on transition nodes, else 0.
ScalarField newton_diag(const ScalarField& p, const ProxParams& params, const AdmissibleSet& U);
/// Newton derivative of H_gamma at p applied to h.
ScalarField newton_deriv_H(const ScalarField& p, const ScalarField& h, const ProxParams& params,
                           const AdmissibleSet& U);

}  // namespace multibang
