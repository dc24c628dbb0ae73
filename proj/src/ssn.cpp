#include "multibang/ssn.hpp"

#include <cmath>
#include <utility>

#include "multibang/errors.hpp"

namespace multibang {

void SolverConfig::validate() const {
    if (!(gamma0 > 0.0)) throw DomainError("gamma0 must be positive");
    if (!(gamma_factor > 0.0 && gamma_factor < 1.0)) {
        throw DomainError("gamma_factor must lie in (0, 1)");
    }
    if (!(gamma_min > 0.0 && gamma_min < gamma0)) {
        throw DomainError("gamma_min must be positive and below gamma0");
    }
    if (max_newton < 1) throw DomainError("max_newton must be at least 1");
    if (!(ls_shrink > 0.0 && ls_shrink < 1.0)) throw DomainError("ls_shrink must lie in (0, 1)");
    if (ls_max < 0) throw DomainError("ls_max must be nonnegative");
    lin.validate();
}

std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::FiniteTermination: return "finite_termination";
        case Termination::ResidualTol: return "residual_tol";
        case Termination::MaxNewtonExceeded: return "max_newton_exceeded";
        case Termination::GammaFloor: return "gamma_floor";
    }
    return "unknown";
}

int SolverReport::total_newton() const noexcept {
    int total = 0;
    for (int k : newton_iters_per_stage) total += k;
    return total;
}

bool SolverReport::all_stages_converged() const noexcept {
    for (const auto& s : stages) {
        if (s.termination != Termination::FiniteTermination &&
            s.termination != Termination::ResidualTol) {
            return false;
        }
    }
    return true;
}

double Residual::norm() const { return std::sqrt(inner(r1, r1) + inner(r2, r2)); }

Residual residual(const ScalarField& y, const ScalarField& p, const ScalarField& y_delta,
                  const ProxParams& params, const AdmissibleSet& U) {
    require_same_grid(y, p);
    require_same_grid(p, y_delta);
    Residual r{laplacian_apply(p), laplacian_apply(y)};
    r.r1 += y;
    r.r1 -= y_delta;
    for (std::size_t k = 0; k < p.size(); ++k) r.r2[k] -= prox_H(p[k], params, U);
    return r;
}

NewtonCorrection newton_step(const SolverState& state, const ScalarField& y_delta,
                             const ProxParams& params, const AdmissibleSet& U,
                             const SolverConfig& config, SchurSolver& schur) {
    const Residual r = residual(state.y, state.p, y_delta, params, U);
    return schur.solve(newton_diag(state.p, params, U), r.r1, r.r2, config.lin);
}

NewtonCorrection newton_step(const SolverState& state, const ScalarField& y_delta,
                             const ProxParams& params, const AdmissibleSet& U,
                             const SolverConfig& config) {
    SchurSolver schur(state.p.grid());
    return newton_step(state, y_delta, params, U, config, schur);
}

namespace {

struct Trial {
    ScalarField y;
    ScalarField p;
    Residual res;
    double norm;
    std::vector<int> branches;
};

Trial make_trial(const SolverState& state, const NewtonCorrection& step, double t,
                 const ScalarField& y_delta, const ProxParams& params, const AdmissibleSet& U) {
    ScalarField y = state.y;
    ScalarField p = state.p;
    y.axpy(t, step.dy);
    p.axpy(t, step.dp);
    Residual res = residual(y, p, y_delta, params, U);
    const double norm = res.norm();
    auto branches = prox_branches(p, params, U);
    return {std::move(y), std::move(p), std::move(res), norm, std::move(branches)};
}

}  // namespace

StageResult solve_fixed_gamma(SolverState state, const ScalarField& y_delta, double alpha,
                              const AdmissibleSet& U, const SolverConfig& config,
                              SchurSolver& schur) {
    const ProxParams params(alpha, state.gamma);
    Residual res = residual(state.y, state.p, y_delta, params, U);
    state.residual_norm = res.norm();
    std::vector<int> branches = prox_branches(state.p, params, U);
    const double tol = 1e-11 * (1.0 + norm_l2(y_delta));
    const double inv_gamma = 1.0 / state.gamma;

    StageRecord record;
    record.gamma = state.gamma;
    record.residual_trace.push_back(state.residual_norm);

    ScalarField diag(state.p.grid());
    for (int it = 1; it <= config.max_newton; ++it) {
        for (std::size_t k = 0; k < diag.size(); ++k) {
            diag[k] = is_transition_branch(branches[k]) ? inv_gamma : 0.0;
        }
        const NewtonCorrection step = schur.solve(diag, res.r1, res.r2, config.lin);
        Trial full = make_trial(state, step, 1.0, y_delta, params, U);

        // Same pieces of H_gamma before and after the full step: the system is affine there,
        // so the Newton iterate solves it.
        if (full.branches == branches) {
            state.y = std::move(full.y);
            state.p = std::move(full.p);
            state.residual_norm = full.norm;
            record.newton_iters = it;
            record.termination = Termination::FiniteTermination;
            record.residual = full.norm;
            record.residual_trace.push_back(full.norm);
            return {std::move(state), std::move(record)};
        }

        Trial accepted = std::move(full);
        if (!(accepted.norm < state.residual_norm)) {
            bool decreased = false;
            double t = 1.0;
            for (int m = 0; m < config.ls_max; ++m) {
                t *= config.ls_shrink;
                Trial trial = make_trial(state, step, t, y_delta, params, U);
                const bool better = trial.norm < accepted.norm;
                if (trial.norm < state.residual_norm) {
                    accepted = std::move(trial);
                    decreased = true;
                    break;
                }
                if (better) accepted = std::move(trial);
            }
            if (!decreased) ++record.line_search_failures;
        }

        state.y = std::move(accepted.y);
        state.p = std::move(accepted.p);
        state.residual_norm = accepted.norm;
        res = std::move(accepted.res);
        branches = std::move(accepted.branches);
        record.residual_trace.push_back(state.residual_norm);

        if (state.residual_norm <= tol) {
            record.newton_iters = it;
            record.termination = Termination::ResidualTol;
            record.residual = state.residual_norm;
            return {std::move(state), std::move(record)};
        }
    }
    record.newton_iters = config.max_newton;
    record.termination = Termination::MaxNewtonExceeded;
    record.residual = state.residual_norm;
    return {std::move(state), std::move(record)};
}

void rescale_band_duals(ScalarField& p, double alpha, double gamma_old, double gamma_new,
                        const AdmissibleSet& U) {
    const ProxParams old_params(alpha, gamma_old);
    for (std::size_t k = 0; k < p.size(); ++k) {
        const int branch = prox_branch(p[k], old_params, U);
        if (!is_transition_branch(branch)) continue;
        const double u = prox_H(p[k], old_params, U);
        p[k] = alpha * U.midpoint(static_cast<std::size_t>(branch / 2)) + gamma_new * u;
    }
}

ContinuationResult solve_with_continuation(const ScalarField& y_delta, double alpha,
                                           const AdmissibleSet& U, const SolverConfig& config,
                                           const std::optional<WarmStart>& warm) {
    SchurSolver schur(y_delta.grid());
    return solve_with_continuation(y_delta, alpha, U, config, warm, schur);
}

ContinuationResult solve_with_continuation(const ScalarField& y_delta, double alpha,
                                           const AdmissibleSet& U, const SolverConfig& config,
                                           const std::optional<WarmStart>& warm,
                                           SchurSolver& schur) {
    config.validate();
    const Grid& grid = y_delta.grid();
    SolverState state{warm ? warm->y : ScalarField(grid), warm ? warm->p : ScalarField(grid),
                      config.gamma0, 0.0};
    if (warm) {
        require_same_grid(state.y, y_delta);
        require_same_grid(state.p, y_delta);
    }

    SolverReport report;
    bool have_converged_stage = false;
    // gamma_k = gamma0 * factor^k; the small slack keeps gamma_min itself in the schedule
    const double floor = config.gamma_min * (1.0 - 1e-9);
    for (int k = 0;; ++k) {
        const double gamma = config.gamma0 * std::pow(config.gamma_factor, k);
        if (gamma < floor) {
            report.termination = Termination::GammaFloor;
            break;
        }
        SolverState start = state;
        if (have_converged_stage && config.rescale_band_duals) {
            rescale_band_duals(start.p, alpha, state.gamma, gamma, U);
        }
        start.gamma = gamma;
        StageResult stage = solve_fixed_gamma(std::move(start), y_delta, alpha, U, config, schur);
        report.newton_iters_per_stage.push_back(stage.record.newton_iters);
        const bool failed = stage.record.termination == Termination::MaxNewtonExceeded;
        report.stages.push_back(std::move(stage.record));
        if (failed) {
            report.termination = Termination::MaxNewtonExceeded;
            if (!have_converged_stage) state = std::move(stage.state);
            break;
        }
        state = std::move(stage.state);
        have_converged_stage = true;
    }

    const ProxParams params(alpha, state.gamma);
    ProxField prox = prox_H_field(state.p, params, U);
    report.final_gamma = state.gamma;
    report.final_residual = state.residual_norm;
    report.singular_nodes = prox.transition_nodes.size();
    return {std::move(prox.u), std::move(state), std::move(report)};
}

double singular_snap_tol(double alpha, const AdmissibleSet& U) {
    return 1e-10 * alpha * (U.back() - U.front());
}

Classification classify_p(const ScalarField& p, double alpha, const AdmissibleSet& U) {
    if (!(alpha >= 0.0)) throw DomainError("classification needs alpha >= 0");
    const int d = static_cast<int>(U.size());
    const double tol = singular_snap_tol(alpha, U);
    Classification out;
    out.labels.reserve(p.size());
    for (double q : p.values()) {
        NodeClass c{0, 0};
        if (alpha == 0.0 && q == 0.0) {
            c = {0, d - 1};
        } else {
            int below = 0;
            bool on_breakpoint = false;
            for (int i = 0; i + 1 < d; ++i) {
                const double b = alpha * U.midpoint(static_cast<std::size_t>(i));
                if (std::abs(q - b) <= tol) {
                    c = {i, i + 1};
                    on_breakpoint = true;
                    break;
                }
                if (q > b) below = i + 1;
            }
            if (!on_breakpoint) c = {below, below};
        }
        if (c.singular()) ++out.singular_count;
        out.labels.push_back(c);
    }
    return out;
}

}  // namespace multibang
