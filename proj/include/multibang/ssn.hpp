#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "multibang/grid.hpp"
#include "multibang/penalty.hpp"
#include "multibang/poisson.hpp"

namespace multibang {

struct SolverConfig {
    double gamma0 = 1.0;
    double gamma_factor = 0.1;
    double gamma_min = 1e-12;
    int max_newton = 100;
    double ls_shrink = 0.5;
    int ls_max = 20;
    /// Between gamma stages, move dual values on transition nodes so that H_gamma(p) is
    /// unchanged by the new gamma (p = alpha/2 (u_i + u_{i+1}) + gamma u).
    bool rescale_band_duals = true;
    LinearSolveOptions lin;

    void validate() const;
};

struct SolverState {
    ScalarField y;
    ScalarField p;
    double gamma;
    double residual_norm;
};

enum class Termination { FiniteTermination, ResidualTol, MaxNewtonExceeded, GammaFloor };

std::string_view to_string(Termination t) noexcept;

struct StageRecord {
    double gamma = 0.0;
    int newton_iters = 0;
    Termination termination = Termination::MaxNewtonExceeded;
    double residual = 0.0;
    /// Residual norm after each accepted iterate; entry 0 is the starting residual.
    std::vector<double> residual_trace;
    /// Iterations where no backtracking step decreased the residual.
    int line_search_failures = 0;
};

struct SolverReport {
    Termination termination = Termination::GammaFloor;
    std::vector<int> newton_iters_per_stage;
    std::vector<StageRecord> stages;
    double final_gamma = 0.0;
    double final_residual = 0.0;
    std::size_t singular_nodes = 0;

    int total_newton() const noexcept;
    /// True when every stage that ran ended in FiniteTermination or ResidualTol.
    bool all_stages_converged() const noexcept;
};

struct Residual {
    ScalarField r1;
    ScalarField r2;

    /// sqrt(||r1||^2 + ||r2||^2) in the discrete L^2 norm.
    double norm() const;
};

/// Residual of the reduced optimality system:
///   r1 = A p + y - y_delta,   r2 = A y - H_gamma(p).
Residual residual(const ScalarField& y, const ScalarField& p, const ScalarField& y_delta,
                  const ProxParams& params, const AdmissibleSet& U);

/// Newton correction (dy, dp) at state, with D_N H_gamma(p) taken from the branch of each node.
NewtonCorrection newton_step(const SolverState& state, const ScalarField& y_delta,
                             const ProxParams& params, const AdmissibleSet& U,
                             const SolverConfig& config, SchurSolver& schur);
NewtonCorrection newton_step(const SolverState& state, const ScalarField& y_delta,
                             const ProxParams& params, const AdmissibleSet& U,
                             const SolverConfig& config);

struct StageResult {
    SolverState state;
    StageRecord record;
};

/// Damped semismooth Newton iteration at fixed gamma (= state.gamma).
StageResult solve_fixed_gamma(SolverState state, const ScalarField& y_delta, double alpha,
                              const AdmissibleSet& U, const SolverConfig& config,
                              SchurSolver& schur);

/// Stage predictor: on nodes in a transition band at gamma_old, replace p by the dual value
/// giving the same H value at gamma_new. Shifts p by at most gamma_old * max|u_i|.
void rescale_band_duals(ScalarField& p, double alpha, double gamma_old, double gamma_new,
                        const AdmissibleSet& U);

struct WarmStart {
    ScalarField y;
    ScalarField p;
};

struct ContinuationResult {
    ScalarField u;
    SolverState state;
    SolverReport report;
};

/// Path-following in gamma: gamma0, gamma0*factor, ... down to gamma_min, each stage
/// warm-started from the previous one. A stage exceeding max_newton stops the path and the
/// last converged stage is returned.
ContinuationResult solve_with_continuation(const ScalarField& y_delta, double alpha,
                                           const AdmissibleSet& U, const SolverConfig& config,
                                           const std::optional<WarmStart>& warm = std::nullopt);
ContinuationResult solve_with_continuation(const ScalarField& y_delta, double alpha,
                                           const AdmissibleSet& U, const SolverConfig& config,
                                           const std::optional<WarmStart>& warm,
                                           SchurSolver& schur);

/// Case label of the unregularized optimality conditions at one node: {i, i} when p lies in
/// Q_i (u = u_i), {i, i+1} on the singular set Q_{i,i+1}, and {0, d-1} for the
/// undetermined alpha = 0, p = 0 case.
struct NodeClass {
    int first;
    int last;

    bool singular() const noexcept { return first != last; }
    friend bool operator==(const NodeClass&, const NodeClass&) = default;
};

struct Classification {
    std::vector<NodeClass> labels;
    std::size_t singular_count = 0;
};

/// Snap tolerance used for the singular set: 1e-10 * alpha * (u_d - u_1).
double singular_snap_tol(double alpha, const AdmissibleSet& U);

Classification classify_p(const ScalarField& p, double alpha, const AdmissibleSet& U);

}  // namespace multibang
