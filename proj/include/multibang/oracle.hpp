#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "multibang/grid.hpp"
#include "multibang/penalty.hpp"
#include "multibang/poisson.hpp"

namespace multibang::oracle {

// Independent reference computations for the test suite and the `validate` command. None of
// these share code paths with the routines they check beyond the definition of g itself.

struct OracleConfig {
    int prox_grid_points = 200001;
    double fd_step = 1e-8;
    int dense_n_max = 4;

    void validate() const;
};

struct ProxEstimate {
    double value;
    /// Grid cell size; the true minimizer lies within one cell of `value`.
    double resolution;
};

/// Grid search over [u_1 - 1, u_d + 1] for the minimizer of alpha g(u) + gamma/2 u^2 - p u,
/// refined by golden-section search on the neighbouring cells.
ProxEstimate prox_bruteforce(double p, const ProxParams& params, const AdmissibleSet& U,
                             const OracleConfig& cfg = {});

/// (H(p + t h) - H(p)) / t with t = fd_step (1 + max|p|).
ScalarField fd_directional(const ScalarField& p, const ScalarField& h, const ProxParams& params,
                           const AdmissibleSet& U, const OracleConfig& cfg = {});

/// Nodes whose dual value is at least `margin` away from every band edge of H_gamma.
std::vector<bool> breakpoint_distant(const ScalarField& p, const ProxParams& params,
                                     const AdmissibleSet& U, double margin = 1e-6);

/// Row-major dense 2N x 2N block matrix [[I, A], [A, -diag(dN)]].
std::vector<double> assemble_block_matrix(const ScalarField& dN_diag);

/// Dense Gaussian elimination with partial pivoting on the assembled block system with
/// right-hand side -(r1, r2). Requires n <= dense_n_max.
NewtonCorrection dense_block_solve(const ScalarField& dN_diag, const ScalarField& r1,
                                   const ScalarField& r2, const OracleConfig& cfg = {});

/// Samples of sin(pi x1) sin(pi x2) on the grid.
ScalarField sine_mode(const Grid& grid);

// ---------------------------------------------------------------------------------------
// Check suite

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

using ProxFunction = std::function<double(double, const ProxParams&, const AdmissibleSet&)>;

struct SuiteOptions {
    std::vector<AdmissibleSet> sets{AdmissibleSet({0.0, 1.0, 2.0}),
                                    AdmissibleSet({0.0, 0.1, 0.15}),
                                    AdmissibleSet({0.0, 0.1, 0.11})};
    int convex_cases = 100000;
    int prox_cases = 10000;
    int fd_fields = 100;
    int fd_n = 16;
    int dense_instances = 50;
    std::uint64_t seed = 2024;
    /// Prox implementation under test; replaced by mutants in the suite's own tests.
    ProxFunction prox = [](double p, const ProxParams& params, const AdmissibleSet& U) {
        return prox_H(p, params, U);
    };
    OracleConfig oracle;
};

/// q in subdiff_g(v) iff v in subdiff_g_star(q), for every admissible set.
CheckResult check_conjugacy(const SuiteOptions& opts);
CheckResult check_bregman_nonnegative(const SuiteOptions& opts);
/// Three-point identity to 1e-12 absolute.
CheckResult check_three_point_identity(const SuiteOptions& opts);
/// Bregman distance is exactly zero inside a piece when q is its slope.
CheckResult check_zero_bregman_on_piece(const SuiteOptions& opts);
/// |prox - prox_bruteforce| <= 2 resolution, alpha in [1e-9, 1e-1], gamma in [1e-12, 1].
CheckResult check_prox_oracle(const SuiteOptions& opts);
/// newton_deriv_H vs fd_directional, relative error <= 1e-6 at breakpoint-distant nodes.
CheckResult check_newton_derivative(const SuiteOptions& opts);
/// schur_newton_solve vs dense_block_solve, relative error <= 1e-8, n in {3, 4}.
CheckResult check_newton_step_dense(const SuiteOptions& opts);
/// Max-error ratios of the manufactured sine solution for n = 16 -> 32 -> 64 in [3.5, 4.5].
CheckResult check_manufactured_convergence(const SuiteOptions& opts);

std::vector<CheckResult> run_suite(const SuiteOptions& opts = {});

}  // namespace multibang::oracle
