#include <algorithm>
#include <numeric>
#include <cmath>
#include <fstream>
#include <string>
#include <random>

#include "doctest.h"
#include "multibang/errors.hpp"
#include "multibang/oracle.hpp"
#include "multibang/phantom.hpp"
#include "multibang/regpath.hpp"
#include "multibang/ssn.hpp"
#include "support.hpp"

using namespace multibang;
using testsupport::random_field;

namespace {

const AdmissibleSet kDesk({0.0, 0.1, 0.15});

struct DeskProblem {
    ScalarField u_true;
    NoisyData data;
};

DeskProblem desk_problem(std::uint64_t seed = 0, int n = 32) {
    const Grid grid(n);
    ScalarField u_true = build_phantom({PhantomKind::TwoDisks, kDesk}, grid);
    NoisyData data = make_noisy_data(forward_data(u_true), std::ldexp(1.0, -5), seed);
    return {std::move(u_true), std::move(data)};
}

// Exact solution of the reduced system at (alpha, gamma) built from a chosen dual field:
// y = K H(p), y_delta = A p + y.
struct FixedPoint {
    ScalarField y, p, y_delta;
};

FixedPoint fixed_point(const ScalarField& p, const ProxParams& params, const AdmissibleSet& U) {
    LinearSolveOptions tight;
    tight.rel_tol = 1e-14;
    ScalarField y = poisson_solve(prox_H_field(p, params, U).u, tight);
    ScalarField y_delta = laplacian_apply(p) + y;
    return {std::move(y), p, std::move(y_delta)};
}

// dual values well inside branches of H_gamma
ScalarField interior_duals(const Grid& grid, const ProxParams& params, const AdmissibleSet& U,
                           std::mt19937_64& rng) {
    std::uniform_real_distribution<> unit(0.2, 0.8);
    ScalarField p(grid);
    for (std::size_t k = 0; k < p.size(); ++k) {
        switch (k % 3) {
            case 0: p[k] = band_lower(0, params, U) - unit(rng); break;
            case 1: p[k] = band_lower(0, params, U) + unit(rng) * (band_upper(0, params, U) - band_lower(0, params, U)); break;
            default: p[k] = band_upper(0, params, U) + unit(rng) * (band_lower(1, params, U) - band_upper(0, params, U)); break;
        }
    }
    return p;
}

}  // namespace

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.gamma_min = 2.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SolverConfig{};
    cfg.gamma_factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SolverConfig{};
    cfg.max_newton = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    CHECK(to_string(Termination::FiniteTermination) == "finite_termination");
}

TEST_CASE("residual examples") {
    const Grid grid(6);
    const AdmissibleSet U({0.0, 1.0, 2.0});
    const ProxParams params(1.0, 0.5);
    const Residual zero = residual(ScalarField(grid), ScalarField(grid), ScalarField(grid), params, U);
    CHECK(norm_max(zero.r1) == 0.0);
    CHECK(norm_max(zero.r2) == 0.0);

    std::mt19937_64 rng(1);
    const ScalarField p = interior_duals(grid, params, U, rng);
    const FixedPoint fp = fixed_point(p, params, U);
    CHECK(residual(fp.y, fp.p, fp.y_delta, params, U).norm() <= 1e-10 * (1.0 + norm_l2(fp.y_delta)));

    // recomputation with the brute-force prox
    const ScalarField y = random_field(grid, rng);
    const ScalarField q = random_field(grid, rng, -1.0, 3.0);
    const ScalarField yd = random_field(grid, rng);
    const Residual r = residual(y, q, yd, params, U);
    const ScalarField Aq = laplacian_apply(q);
    const ScalarField Ay = laplacian_apply(y);
    for (std::size_t k = 0; k < y.size(); ++k) {
        const auto h = oracle::prox_bruteforce(q[k], params, U);
        CHECK(r.r1[k] == doctest::Approx(Aq[k] + y[k] - yd[k]));
        CHECK(std::abs(r.r2[k] - (Ay[k] - h.value)) <= 2.0 * h.resolution + 1e-12 * std::abs(Ay[k]));
    }
}

TEST_CASE("newton step at a solution is zero") {
    const Grid grid(8);
    const AdmissibleSet U({0.0, 1.0, 2.0});
    const ProxParams params(0.5, 0.1);
    std::mt19937_64 rng(2);
    const FixedPoint fp = fixed_point(interior_duals(grid, params, U, rng), params, U);
    const SolverState state{fp.y, fp.p, params.gamma(), 0.0};
    const NewtonCorrection step = newton_step(state, fp.y_delta, params, U, SolverConfig{});
    CHECK(norm_l2(step.dy) <= 1e-8 * norm_l2(fp.y));
    CHECK(norm_l2(step.dp) <= 1e-8 * norm_l2(fp.p));
}

TEST_CASE("one newton step solves the system when the active set is fixed") {
    const Grid grid(10);
    const AdmissibleSet U({0.0, 1.0, 2.0});
    const ProxParams params(0.5, 0.1);
    std::mt19937_64 rng(3);
    const FixedPoint fp = fixed_point(interior_duals(grid, params, U, rng), params, U);
    // perturbation far smaller than the distance to any band edge
    SolverState start{fp.y + 1e-4 * random_field(grid, rng), fp.p + 1e-4 * random_field(grid, rng),
                      params.gamma(), 0.0};
    REQUIRE(prox_branches(start.p, params, U) == prox_branches(fp.p, params, U));
    const NewtonCorrection step = newton_step(start, fp.y_delta, params, U, SolverConfig{});
    const ScalarField y1 = start.y + step.dy;
    const ScalarField p1 = start.p + step.dp;
    CHECK(residual(y1, p1, fp.y_delta, params, U).norm() <= 1e-8);
}

TEST_CASE("newton step matches the dense oracle on a toy problem") {
    const Grid grid(3);
    const AdmissibleSet U({0.0, 1.0, 2.0});
    const ProxParams params(1.0, 0.25);
    std::mt19937_64 rng(4);
    const SolverState state{random_field(grid, rng), random_field(grid, rng, 0.0, 2.5), params.gamma(), 0.0};
    const ScalarField yd = random_field(grid, rng);
    const NewtonCorrection fast = newton_step(state, yd, params, U, SolverConfig{});
    const Residual r = residual(state.y, state.p, yd, params, U);
    const NewtonCorrection ref = oracle::dense_block_solve(newton_diag(state.p, params, U), r.r1, r.r2);
    CHECK(norm_raw(fast.dy - ref.dy) <= 1e-8 * norm_raw(ref.dy));
    CHECK(norm_raw(fast.dp - ref.dp) <= 1e-8 * norm_raw(ref.dp));
}

TEST_CASE("zero data terminates immediately") {
    const Grid grid(8);
    SchurSolver schur(grid);
    const SolverState start{ScalarField(grid), ScalarField(grid), 1e-3, 0.0};
    const StageResult r = solve_fixed_gamma(start, ScalarField(grid), 1e-2, kDesk, SolverConfig{}, schur);
    CHECK(r.record.termination == Termination::FiniteTermination);
    CHECK(r.record.newton_iters == 1);
    CHECK(prox_H_field(r.state.p, ProxParams(1e-2, 1e-3), kDesk).u == ScalarField(grid));

    const ContinuationResult c = solve_with_continuation(ScalarField(grid), 1e-2, kDesk, SolverConfig{});
    CHECK(c.u == ScalarField(grid));
    for (const auto& stage : c.report.stages) CHECK(stage.termination == Termination::FiniteTermination);
}

TEST_CASE("consistent data with a constant parameter") {
    // Reference: alpha-free scaled minimizer w with u = u_2 - alpha w, from an independent QP
    // solve (tools/qp_reference.py). The data cannot pin u near the Dirichlet boundary, so
    // about 30% of the nodes differ from u_2 for every small alpha on this grid.
    const Grid grid(24);
    std::ifstream in(std::string(TEST_DATA_DIR) + "/constant_u2_n24.txt");
    REQUIRE(in);
    std::vector<double> w_ref;
    for (double v; in >> v;) w_ref.push_back(v);
    REQUIRE(w_ref.size() == grid.size());
    double w_max = 0.0;
    for (double v : w_ref) w_max = std::max(w_max, std::abs(v));

    const double alpha = 1e-7;
    const ScalarField y = forward_data(ScalarField(grid, kDesk[1]));
    const ContinuationResult c = solve_with_continuation(y, alpha, kDesk, SolverConfig{});
    CHECK(c.report.termination == Termination::GammaFloor);
    CHECK(c.report.all_stages_converged());

    double diff = 0.0;
    std::size_t exact = 0, ref_zero = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double w = (kDesk[1] - c.u[k]) / alpha;
        diff = std::max(diff, std::abs(w - w_ref[k]));
        const bool zero_ref = std::abs(w_ref[k]) <= 1e-6 * w_max;
        ref_zero += zero_ref;
        if (c.u[k] == kDesk[1]) {
            ++exact;
            CHECK(zero_ref);
        }
    }
    CHECK(diff <= 1e-4 * w_max);
    CHECK(static_cast<double>(exact) >= 0.9 * static_cast<double>(ref_zero));
    CHECK(static_cast<double>(ref_zero) / static_cast<double>(grid.size()) == doctest::Approx(0.70).epsilon(0.02));
}

TEST_CASE("desk problem: continuation trace") {
    const DeskProblem desk = desk_problem();
    const MorozovResult sel = select_alpha_morozov(desk.data.y_delta, desk.data.delta_eff, kDesk,
                                                   DiscrepancyConfig{}, SolverConfig{});
    const SolverReport& report = sel.solution.report;
    const SolverConfig cfg;
    CHECK(report.termination == Termination::GammaFloor);
    CHECK(report.stages.size() == 13);
    CHECK(report.final_gamma == doctest::Approx(1e-12));
    CHECK(report.stages.back().termination == Termination::FiniteTermination);
    for (const auto& stage : report.stages) {
        CHECK(stage.newton_iters <= cfg.max_newton);
        CHECK((stage.termination == Termination::FiniteTermination ||
               stage.termination == Termination::ResidualTol));
        CHECK(stage.line_search_failures == 0);
        for (std::size_t k = 1; k < stage.residual_trace.size(); ++k) {
            CHECK(stage.residual_trace[k] <= stage.residual_trace[k - 1]);
        }
    }
    CHECK(report.newton_iters_per_stage.size() == report.stages.size());
    CHECK(report.total_newton() == std::accumulate(report.newton_iters_per_stage.begin(),
                                                   report.newton_iters_per_stage.end(), 0));

    // fixed point at the final gamma
    const ProxParams params(sel.alpha, report.final_gamma);
    const double res = residual(sel.solution.state.y, sel.solution.state.p, desk.data.y_delta, params, kDesk).norm();
    CHECK(res <= 10.0 * cfg.lin.rel_tol * (1.0 + norm_l2(desk.data.y_delta)));

    // range and multi-bang structure
    const ProxField pf = prox_H_field(sel.solution.state.p, params, kDesk);
    CHECK(pf.u == sel.solution.u);
    CHECK(report.singular_nodes == pf.transition_nodes.size());
    std::vector<bool> in_band(sel.solution.u.size(), false);
    for (auto k : pf.transition_nodes) in_band[k] = true;
    for (std::size_t k = 0; k < sel.solution.u.size(); ++k) {
        const double v = sel.solution.u[k];
        CHECK(kDesk.contains(v));
        if (!in_band[k]) CHECK((v == kDesk[0] || v == kDesk[1] || v == kDesk[2]));
    }
}

TEST_CASE("warm-started stages need no more iterations than cold starts") {
    const double alpha = 1e-4;
    std::vector<int> warm, cold;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DeskProblem desk = desk_problem(seed, 24);
        const Grid& grid = desk.u_true.grid();
        SolverConfig cfg;
        const ContinuationResult c = solve_with_continuation(desk.data.y_delta, alpha, kDesk, cfg);
        warm.push_back(c.report.total_newton());
        int total = 0;
        SchurSolver schur(grid);
        for (const auto& stage : c.report.stages) {
            const SolverState zero{ScalarField(grid), ScalarField(grid), stage.gamma, 0.0};
            total += solve_fixed_gamma(zero, desk.data.y_delta, alpha, kDesk, cfg, schur).record.newton_iters;
        }
        cold.push_back(total);
    }
    std::sort(warm.begin(), warm.end());
    std::sort(cold.begin(), cold.end());
    INFO("warm median " << warm[2] << ", cold median " << cold[2]);
    CHECK(warm[2] <= cold[2]);
}

TEST_CASE("large alpha collapses to the lowest value") {
    const DeskProblem desk = desk_problem();
    const ContinuationResult c = solve_with_continuation(desk.data.y_delta, 1.0, kDesk, SolverConfig{});
    CHECK(c.u == ScalarField(desk.u_true.grid(), kDesk[0]));
}

TEST_CASE("smaller alpha shifts labels upward") {
    const DeskProblem desk = desk_problem(0, 24);
    double previous_mean = -1.0;
    for (double alpha : {1e-1, 1e-3, 1e-5}) {
        const ContinuationResult c = solve_with_continuation(desk.data.y_delta, alpha, kDesk, SolverConfig{});
        double mean = 0.0;
        for (double v : c.u.values()) mean += v;
        mean /= static_cast<double>(c.u.size());
        CHECK(mean >= previous_mean);
        previous_mean = mean;
    }
}

TEST_CASE("stage predictor keeps H unchanged on bands") {
    const Grid grid(5);
    std::mt19937_64 rng(6);
    const AdmissibleSet U({0.0, 1.0, 2.0});
    const double alpha = 0.3, g_old = 0.1, g_new = 0.01;
    ScalarField p = random_field(grid, rng, -0.5, 1.5);
    const ProxField before = prox_H_field(p, ProxParams(alpha, g_old), U);
    rescale_band_duals(p, alpha, g_old, g_new, U);
    const ProxField after = prox_H_field(p, ProxParams(alpha, g_new), U);
    for (auto k : before.transition_nodes) CHECK(after.u[k] == doctest::Approx(before.u[k]).epsilon(1e-12));
}

TEST_CASE("classify_p examples") {
    const Grid grid(4);
    const AdmissibleSet U({0.0, 1.0, 2.0});
    const Classification below = classify_p(ScalarField(grid, 0.4), 1.0, U);
    CHECK(below.singular_count == 0);
    for (const auto& l : below.labels) CHECK(l == NodeClass{0, 0});

    const Classification singular = classify_p(ScalarField(grid, 0.5), 1.0, U);
    CHECK(singular.singular_count == grid.size());
    for (const auto& l : singular.labels) CHECK(l == NodeClass{0, 1});

    const Classification top = classify_p(ScalarField(grid, 1.2), 1.0, U);
    for (const auto& l : top.labels) CHECK(l == NodeClass{1, 1});

    CHECK(classify_p(ScalarField(grid, 0.5 + 1e-12), 1.0, U).singular_count == grid.size());
    CHECK_THROWS_AS(classify_p(ScalarField(grid), -1.0, U), DomainError);
}
