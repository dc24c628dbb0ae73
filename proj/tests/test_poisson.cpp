#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "multibang/errors.hpp"
#include "multibang/oracle.hpp"
#include "multibang/poisson.hpp"
#include "support.hpp"

using namespace multibang;
using testsupport::max_abs_diff;
using testsupport::random_field;

TEST_CASE("grid geometry") {
    CHECK_THROWS_AS(Grid(2), DomainError);
    const Grid grid(4);
    CHECK(grid.h() == doctest::Approx(0.2));
    CHECK(grid.quad_weight() == doctest::Approx(0.04));
    CHECK(grid.index(1, 2) == 9);
    CHECK(grid.x1(0) == doctest::Approx(0.2));
    CHECK(grid.x2(3) == doctest::Approx(0.8));
    CHECK_THROWS_AS(ScalarField(grid, std::vector<double>(15)), DimensionError);
}

TEST_CASE("inner product and norms") {
    const Grid grid(10);
    CHECK(norm_l2(ScalarField(grid, 1.0)) * norm_l2(ScalarField(grid, 1.0)) ==
          doctest::Approx(100.0 * grid.quad_weight()));
    std::mt19937_64 rng(1);
    for (int c = 0; c < 50; ++c) {
        const ScalarField u = random_field(grid, rng);
        const ScalarField v = random_field(grid, rng);
        CHECK(inner(u, v) == inner(v, u));
        CHECK(std::abs(inner(u, v)) <= norm_l2(u) * norm_l2(v) * (1.0 + 1e-14));
    }
    CHECK_THROWS_AS(inner(ScalarField(grid), ScalarField(Grid(5))), DimensionError);
    CHECK_THROWS_AS(ScalarField(grid) += ScalarField(Grid(5)), DimensionError);
}

TEST_CASE("laplacian examples") {
    const Grid grid(12);
    CHECK(laplacian_apply(ScalarField(grid)) == ScalarField(grid));

    // sine mode is an eigenvector with eigenvalue (4 - 4 cos(pi h)) / h^2
    const ScalarField s = oracle::sine_mode(grid);
    const double h = grid.h();
    const double lambda = (4.0 - 2.0 * std::cos(std::numbers::pi * h) - 2.0 * std::cos(std::numbers::pi * h)) / (h * h);
    const ScalarField As = laplacian_apply(s);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(As[k] == doctest::Approx(lambda * s[k]).epsilon(1e-12));

    std::mt19937_64 rng(4);
    for (int c = 0; c < 20; ++c) {
        const ScalarField y = random_field(grid, rng);
        const ScalarField z = random_field(grid, rng);
        const double a = inner(laplacian_apply(y), z);
        const double b = inner(y, laplacian_apply(z));
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(a) + 1e-12);
    }
}

TEST_CASE("laplacian matches the assembled block") {
    const Grid grid(3);
    const auto M = oracle::assemble_block_matrix(ScalarField(grid));
    const std::size_t N = grid.size();
    std::mt19937_64 rng(9);
    const ScalarField y = random_field(grid, rng);
    const ScalarField Ay = laplacian_apply(y);
    for (std::size_t r = 0; r < N; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < N; ++c) s += M[(N + r) * 2 * N + c] * y[c];
        CHECK(Ay[r] == doctest::Approx(s));
    }
}

TEST_CASE("poisson_solve examples") {
    const Grid grid(31);
    CHECK(poisson_solve(ScalarField(grid)) == ScalarField(grid));

    ScalarField y(grid);
    for (int j = 0; j < grid.n(); ++j)
        for (int i = 0; i < grid.n(); ++i) {
            const double x1 = grid.x1(i), x2 = grid.x2(j);
            y.at(i, j) = x1 * (1 - x1) * x2 * (1 - x2);
        }
    const ScalarField f = laplacian_apply(y);
    LinearSolveOptions opts;
    const ScalarField sol = poisson_solve(f, opts);
    CHECK(norm_l2(laplacian_apply(sol) - f) <= opts.rel_tol * norm_l2(f));
    CHECK(norm_l2(sol - y) <= 1e-8 * norm_l2(y));
}

TEST_CASE("poisson_solve manufactured convergence") {
    const double two_pi2 = 2.0 * std::numbers::pi * std::numbers::pi;
    LinearSolveOptions opts;
    opts.rel_tol = 1e-12;
    std::vector<double> errors;
    for (int n : {16, 32, 64}) {
        const Grid grid(n);
        const ScalarField exact = oracle::sine_mode(grid);
        const ScalarField y = poisson_solve(two_pi2 * exact, opts);
        const double err = norm_max(y - exact);
        // O(h^2) with constant at most 1
        CHECK(err <= grid.h() * grid.h());
        errors.push_back(err);
    }
    CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.125));
    CHECK(errors[1] / errors[2] == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("poisson_solve budget exhaustion reports the residual") {
    const Grid grid(32);
    std::mt19937_64 rng(8);
    LinearSolveOptions opts;
    opts.max_iter = 2;
    try {
        poisson_solve(random_field(grid, rng), opts);
        FAIL("expected SolverFailure");
    } catch (const SolverFailure& e) {
        CHECK(e.achieved_residual() > 0.0);
    }
    LinearSolveOptions bad;
    bad.rel_tol = 2.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("K is self-adjoint and order preserving") {
    const Grid grid(20);
    std::mt19937_64 rng(12);
    LinearSolveOptions opts;
    for (int c = 0; c < 5; ++c) {
        const ScalarField f = random_field(grid, rng);
        const ScalarField g = random_field(grid, rng);
        const double a = inner(poisson_solve(f, opts), g);
        const double b = inner(f, poisson_solve(g, opts));
        CHECK(std::abs(a - b) <= 10.0 * opts.rel_tol * norm_l2(f) * norm_l2(g));

        const ScalarField pos = random_field(grid, rng, 0.0, 1.0);
        const ScalarField y = poisson_solve(pos, opts);
        for (std::size_t k = 0; k < y.size(); ++k) CHECK(y[k] >= -1e-9 * norm_max(y));
    }
}

TEST_CASE("schur solve examples") {
    const Grid grid(10);
    const NewtonCorrection zero = schur_newton_solve(ScalarField(grid), ScalarField(grid), ScalarField(grid));
    CHECK(zero.dy == ScalarField(grid));
    CHECK(zero.dp == ScalarField(grid));

    std::mt19937_64 rng(6);
    LinearSolveOptions opts;
    const ScalarField r1 = random_field(grid, rng);
    const ScalarField r2 = random_field(grid, rng);
    const NewtonCorrection c = schur_newton_solve(ScalarField(grid), r1, r2, opts);
    // substitute into both block rows
    const ScalarField row1 = c.dy + laplacian_apply(c.dp) + r1;
    const ScalarField row2 = laplacian_apply(c.dy) + r2;
    const double res = std::hypot(norm_l2(row1), norm_l2(row2));
    CHECK(res <= opts.rel_tol * (norm_l2(r1) + norm_l2(r2)));
}

TEST_CASE("schur solve matches the dense block oracle") {
    std::mt19937_64 rng(21);
    std::bernoulli_distribution on(0.5);
    for (int n : {3, 4}) {
        const Grid grid(n);
        for (int c = 0; c < 10; ++c) {
            const double inv_gamma = c % 2 == 0 ? 1.0 : 1e4;
            ScalarField d(grid);
            for (std::size_t k = 0; k < d.size(); ++k) d[k] = on(rng) ? inv_gamma : 0.0;
            const ScalarField r1 = random_field(grid, rng);
            const ScalarField r2 = random_field(grid, rng);
            const NewtonCorrection fast = schur_newton_solve(d, r1, r2);
            const NewtonCorrection ref = oracle::dense_block_solve(d, r1, r2);
            const double scale = std::hypot(norm_raw(ref.dy), norm_raw(ref.dp));
            CHECK(std::hypot(norm_raw(fast.dy - ref.dy), norm_raw(fast.dp - ref.dp)) <= 1e-8 * scale);
        }
    }
}

TEST_CASE("schur solver reuses its factorization") {
    const Grid grid(8);
    SchurSolver solver(grid);
    std::mt19937_64 rng(3);
    const ScalarField d(grid, 2.0);
    solver.solve(d, random_field(grid, rng), random_field(grid, rng));
    solver.solve(d, random_field(grid, rng), random_field(grid, rng));
    CHECK(solver.factorizations() == 1);
    solver.solve(ScalarField(grid, 1.0), random_field(grid, rng), random_field(grid, rng));
    CHECK(solver.factorizations() == 2);
}

TEST_CASE("dense oracle basics") {
    const Grid grid(3);
    std::mt19937_64 rng(30);
    ScalarField d(grid);
    for (std::size_t k = 0; k < d.size(); k += 2) d[k] = 5.0;
    const auto M = oracle::assemble_block_matrix(d);
    const std::size_t size = 2 * grid.size();
    double asym = 0.0;
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) asym = std::max(asym, std::abs(M[r * size + c] - M[c * size + r]));
    CHECK(asym <= 1e-14);
    const NewtonCorrection z = oracle::dense_block_solve(d, ScalarField(grid), ScalarField(grid));
    CHECK(norm_max(z.dy) == 0.0);
    CHECK(norm_max(z.dp) == 0.0);
    CHECK_THROWS_AS(oracle::dense_block_solve(ScalarField(Grid(5)), ScalarField(Grid(5)), ScalarField(Grid(5))),
                    DomainError);
}
