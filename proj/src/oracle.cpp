#include "multibang/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "multibang/errors.hpp"

namespace multibang::oracle {

void OracleConfig::validate() const {
    if (prox_grid_points < 3) throw DomainError("prox_grid_points must be at least 3");
    if (!(fd_step > 0.0)) throw DomainError("fd_step must be positive");
    if (dense_n_max < 3) throw DomainError("dense_n_max must be at least 3");
}

namespace {

// Objective values near the minimizer differ by gamma (u - u*)^2 while alpha g(u) - p u can be
// O(alpha); with gamma down to 1e-12 this is below double rounding, so evaluate in quad.
using Quad = __float128;

// g as the maximum of its affine pieces; only called inside [u_1, u_d].
Quad g_max_form(Quad v, const AdmissibleSet& U) {
    Quad g = 0.5 * ((Quad(U[0]) + U[1]) * v - Quad(U[0]) * U[1]);
    for (std::size_t i = 1; i + 1 < U.size(); ++i) {
        const Quad piece = 0.5 * ((Quad(U[i]) + U[i + 1]) * v - Quad(U[i]) * U[i + 1]);
        if (piece > g) g = piece;
    }
    return g;
}

Quad prox_objective(Quad u, double p, const ProxParams& params, const AdmissibleSet& U) {
    return Quad(params.alpha()) * g_max_form(u, U) + 0.5 * Quad(params.gamma()) * u * u - p * u;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace

ProxEstimate prox_bruteforce(double p, const ProxParams& params, const AdmissibleSet& U,
                             const OracleConfig& cfg) {
    cfg.validate();
    const Quad lo = Quad(U.front()) - 1;
    const Quad hi = Quad(U.back()) + 1;
    const long last = cfg.prox_grid_points - 1;
    const Quad cell = (hi - lo) / last;
    const auto x = [&](long k) { return lo + cell * k; };
    const auto f = [&](Quad u) { return prox_objective(u, p, params, U); };

    // grid indices inside [u_1, u_d]
    long kb = static_cast<long>(static_cast<double>((Quad(U.front()) - lo) / cell));
    while (x(kb) < U.front()) ++kb;
    long ke = static_cast<long>(static_cast<double>((Quad(U.back()) - lo) / cell));
    while (ke > kb && x(ke) > U.back()) --ke;
    while (ke < last && x(ke + 1) <= U.back()) ++ke;

    // the objective is strictly convex, so its samples are a strictly convex sequence
    while (ke - kb > 2) {
        const long m1 = kb + (ke - kb) / 3;
        const long m2 = ke - (ke - kb) / 3;
        if (f(x(m1)) < f(x(m2))) {
            ke = m2 - 1;
        } else {
            kb = m1;
        }
    }
    long best_k = kb;
    for (long k = kb + 1; k <= ke; ++k) {
        if (f(x(k)) < f(x(best_k))) best_k = k;
    }

    // refine between the neighbouring grid points
    Quad a = std::max<Quad>(U.front(), x(best_k - 1));
    Quad b = std::min<Quad>(U.back(), x(best_k + 1));
    Quad ratio = 0.6180339887498949;  // root of r^2 + r - 1, polished below
    ratio -= (ratio * ratio + ratio - 1) / (2 * ratio + 1);
    Quad c = b - ratio * (b - a);
    Quad d = a + ratio * (b - a);
    Quad fc = f(c);
    Quad fd = f(d);
    for (int it = 0; it < 100; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    Quad best = (a + b) / 2;
    Quad fbest = f(best);
    for (Quad candidate : {Quad(U.front()), Quad(U.back()), x(best_k)}) {
        const Quad fcand = f(candidate);
        if (fcand < fbest) {
            fbest = fcand;
            best = candidate;
        }
    }
    return {static_cast<double>(best), static_cast<double>(cell)};
}

ScalarField fd_directional(const ScalarField& p, const ScalarField& h, const ProxParams& params,
                           const AdmissibleSet& U, const OracleConfig& cfg) {
    require_same_grid(p, h);
    const double t = cfg.fd_step * (1.0 + norm_max(p));
    ScalarField shifted = p;
    shifted.axpy(t, h);
    ScalarField out = prox_H_field(shifted, params, U).u;
    out -= prox_H_field(p, params, U).u;
    out *= 1.0 / t;
    return out;
}

std::vector<bool> breakpoint_distant(const ScalarField& p, const ProxParams& params,
                                     const AdmissibleSet& U, double margin) {
    std::vector<bool> ok(p.size(), true);
    for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t i = 0; i + 1 < U.size(); ++i) {
            if (std::abs(p[k] - band_lower(i, params, U)) < margin ||
                std::abs(p[k] - band_upper(i, params, U)) < margin) {
                ok[k] = false;
            }
        }
    }
    return ok;
}

std::vector<double> assemble_block_matrix(const ScalarField& dN_diag) {
    const Grid& grid = dN_diag.grid();
    const int n = grid.n();
    const std::size_t N = grid.size();
    const std::size_t M = 2 * N;
    const double inv_h2 = 1.0 / grid.quad_weight();
    std::vector<double> mat(M * M, 0.0);
    auto put_laplacian = [&](std::size_t row0, std::size_t col0) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const std::size_t r = grid.index(i, j);
                mat[(row0 + r) * M + col0 + r] = 4.0 * inv_h2;
                if (i > 0) mat[(row0 + r) * M + col0 + grid.index(i - 1, j)] = -inv_h2;
                if (i + 1 < n) mat[(row0 + r) * M + col0 + grid.index(i + 1, j)] = -inv_h2;
                if (j > 0) mat[(row0 + r) * M + col0 + grid.index(i, j - 1)] = -inv_h2;
                if (j + 1 < n) mat[(row0 + r) * M + col0 + grid.index(i, j + 1)] = -inv_h2;
            }
        }
    };
    for (std::size_t k = 0; k < N; ++k) {
        mat[k * M + k] = 1.0;
        mat[(N + k) * M + N + k] = -dN_diag[k];
    }
    put_laplacian(0, N);
    put_laplacian(N, 0);
    return mat;
}

NewtonCorrection dense_block_solve(const ScalarField& dN_diag, const ScalarField& r1,
                                   const ScalarField& r2, const OracleConfig& cfg) {
    require_same_grid(dN_diag, r1);
    require_same_grid(r1, r2);
    const Grid& grid = dN_diag.grid();
    if (grid.n() > cfg.dense_n_max) {
        throw DomainError("dense oracle limited to n <= " + std::to_string(cfg.dense_n_max));
    }
    const std::size_t N = grid.size();
    const std::size_t M = 2 * N;
    std::vector<double> a = assemble_block_matrix(dN_diag);
    std::vector<double> b(M);
    for (std::size_t k = 0; k < N; ++k) {
        b[k] = -r1[k];
        b[N + k] = -r2[k];
    }
    for (std::size_t col = 0; col < M; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < M; ++r) {
            if (std::abs(a[r * M + col]) > std::abs(a[piv * M + col])) piv = r;
        }
        if (a[piv * M + col] == 0.0) {
            throw SolverFailure("dense block matrix is singular", kInfinity);
        }
        if (piv != col) {
            for (std::size_t c = 0; c < M; ++c) std::swap(a[col * M + c], a[piv * M + c]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < M; ++r) {
            const double factor = a[r * M + col] / a[col * M + col];
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < M; ++c) a[r * M + c] -= factor * a[col * M + c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(M);
    for (std::size_t r = M; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < M; ++c) s -= a[r * M + c] * x[c];
        x[r] = s / a[r * M + r];
    }
    NewtonCorrection out{ScalarField(grid), ScalarField(grid)};
    for (std::size_t k = 0; k < N; ++k) {
        out.dy[k] = x[k];
        out.dp[k] = x[N + k];
    }
    return out;
}

ScalarField sine_mode(const Grid& grid) {
    ScalarField s(grid);
    const double pi = std::numbers::pi;
    for (int j = 0; j < grid.n(); ++j) {
        for (int i = 0; i < grid.n(); ++i) {
            s.at(i, j) = std::sin(pi * grid.x1(i)) * std::sin(pi * grid.x2(j));
        }
    }
    return s;
}

// ---------------------------------------------------------------------------------------

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<>(a, b)(rng); }

double log_uniform(Rng& rng, double a, double b) {
    return std::exp(uniform(rng, std::log(a), std::log(b)));
}

bool coin(Rng& rng, double prob) { return uniform(rng, 0.0, 1.0) < prob; }

std::size_t pick(Rng& rng, std::size_t count) {
    return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

// v in [u_1, u_d], landing on an admissible value 30% of the time.
double sample_point(Rng& rng, const AdmissibleSet& U) {
    if (coin(rng, 0.3)) return U[pick(rng, U.size())];
    return uniform(rng, U.front(), U.back());
}

// q in subdiff_g(v), with infinite ends cut at one range length past the last slope.
double sample_subgradient(Rng& rng, double v, const AdmissibleSet& U) {
    const Interval s = subdiff_g(v, U);
    if (s.is_point()) return s.lower;
    const double span = U.back() - U.front();
    const double lo = std::isfinite(s.lower) ? s.lower : s.upper - span;
    const double hi = std::isfinite(s.upper) ? s.upper : s.lower + span;
    const double r = uniform(rng, 0.0, 1.0);
    if (r < 0.15 && std::isfinite(s.lower)) return s.lower;
    if (r < 0.3 && std::isfinite(s.upper)) return s.upper;
    return uniform(rng, lo, hi);
}

// Dual value around the bands of H_gamma: exactly on an edge 10% of the time, inside a band 30%.
double sample_dual(Rng& rng, const ProxParams& params, const AdmissibleSet& U) {
    const std::size_t bands = U.size() - 1;
    const std::size_t i = pick(rng, bands);
    const double r = uniform(rng, 0.0, 1.0);
    if (r < 0.05) return band_lower(i, params, U);
    if (r < 0.1) return band_upper(i, params, U);
    if (r < 0.4) return uniform(rng, band_lower(i, params, U), band_upper(i, params, U));
    const double w = (params.alpha() + params.gamma()) * (U.back() - U.front());
    return uniform(rng, band_lower(0, params, U) - w, band_upper(bands - 1, params, U) + w);
}

template <class Body>
CheckResult timed(std::string name, Body&& body) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult result;
    result.name = std::move(name);
    try {
        body(result);
    } catch (const std::exception& e) {
        result.passed = false;
        result.detail = std::string("exception: ") + e.what();
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace

CheckResult check_conjugacy(const SuiteOptions& opts) {
    return timed("conjugacy", [&](CheckResult& out) {
        Rng rng(opts.seed);
        long failures = 0;
        long total = 0;
        for (const auto& U : opts.sets) {
            const double span = U.back() - U.front();
            for (int c = 0; c < opts.convex_cases; ++c) {
                const double v = sample_point(rng, U);
                double q;
                if (coin(rng, 0.3)) {
                    q = U.midpoint(pick(rng, U.size() - 1));
                } else if (coin(rng, 0.3)) {
                    q = sample_subgradient(rng, v, U);
                } else {
                    q = uniform(rng, U.midpoint(0) - span, U.midpoint(U.size() - 2) + span);
                }
                const bool forward = subdiff_g(v, U).contains(q);
                const bool backward = subdiff_g_star(q, U).contains(v);
                if (forward != backward) ++failures;
                ++total;
            }
        }
        out.passed = failures == 0;
        out.detail = std::to_string(total) + " pairs, " + std::to_string(failures) + " mismatches";
    });
}

CheckResult check_bregman_nonnegative(const SuiteOptions& opts) {
    return timed("bregman_nonnegativity", [&](CheckResult& out) {
        Rng rng(opts.seed + 1);
        double worst = 0.0;
        long total = 0;
        for (const auto& U : opts.sets) {
            for (int c = 0; c < opts.convex_cases; ++c) {
                const double v1 = sample_point(rng, U);
                const double q1 = sample_subgradient(rng, v1, U);
                const double v2 = sample_point(rng, U);
                worst = std::min(worst, bregman_g(v2, v1, q1, U));
                ++total;
            }
        }
        out.passed = worst >= 0.0;
        out.detail = std::to_string(total) + " cases, min distance " + sci(worst);
    });
}

CheckResult check_three_point_identity(const SuiteOptions& opts) {
    return timed("three_point_identity", [&](CheckResult& out) {
        Rng rng(opts.seed + 2);
        double worst = 0.0;
        long total = 0;
        for (const auto& U : opts.sets) {
            for (int c = 0; c < opts.convex_cases; ++c) {
                const double v1 = sample_point(rng, U);
                const double q1 = sample_subgradient(rng, v1, U);
                const double v2 = sample_point(rng, U);
                const double q2 = sample_subgradient(rng, v2, U);
                const double v3 = sample_point(rng, U);
                const double lhs = bregman_g(v3, v1, q1, U);
                const double rhs =
                    bregman_g(v3, v2, q2, U) + bregman_g(v2, v1, q1, U) + (q2 - q1) * (v3 - v2);
                worst = std::max(worst, std::abs(lhs - rhs));
                ++total;
            }
        }
        out.passed = worst <= 1e-12;
        out.detail = std::to_string(total) + " triples, max defect " + sci(worst);
    });
}

CheckResult check_zero_bregman_on_piece(const SuiteOptions& opts) {
    return timed("zero_bregman_on_piece", [&](CheckResult& out) {
        Rng rng(opts.seed + 3);
        long nonzero = 0;
        long total = 0;
        for (const auto& U : opts.sets) {
            for (int c = 0; c < opts.convex_cases; ++c) {
                const std::size_t i = pick(rng, U.size() - 1);
                double v_true = uniform(rng, U[i], U[i + 1]);
                if (v_true == U[i] || v_true == U[i + 1]) continue;
                const double r = uniform(rng, 0.0, 1.0);
                const double v = r < 0.1 ? U[i] : r < 0.2 ? U[i + 1] : uniform(rng, U[i], U[i + 1]);
                if (bregman_g(v, v_true, U.midpoint(i), U) != 0.0) ++nonzero;
                ++total;
            }
        }
        out.passed = nonzero == 0;
        out.detail = std::to_string(total) + " cases, " + std::to_string(nonzero) + " nonzero";
    });
}

CheckResult check_prox_oracle(const SuiteOptions& opts) {
    return timed("prox_oracle_equivalence", [&](CheckResult& out) {
        Rng rng(opts.seed + 4);
        long failures = 0;
        long total = 0;
        double worst_ratio = 0.0;
        double max_resolution_ratio = 0.0;
        for (const auto& U : opts.sets) {
            for (int c = 0; c < opts.prox_cases; ++c) {
                const ProxParams params(log_uniform(rng, 1e-9, 1e-1), log_uniform(rng, 1e-12, 1.0));
                const double p = sample_dual(rng, params, U);
                const ProxEstimate ref = prox_bruteforce(p, params, U, opts.oracle);
                const double err = std::abs(opts.prox(p, params, U) - ref.value);
                worst_ratio = std::max(worst_ratio, err / ref.resolution);
                max_resolution_ratio =
                    std::max(max_resolution_ratio, ref.resolution / (U.back() - U.front() + 2.0));
                if (err > 2.0 * ref.resolution) ++failures;
                ++total;
            }
        }
        const bool resolution_ok = max_resolution_ratio < 1e-4;
        out.passed = failures == 0 && resolution_ok;
        out.detail = std::to_string(total) + " triples, " + std::to_string(failures) +
                     " outside 2 cells, max error/cell " + sci(worst_ratio) +
                     (resolution_ok ? "" : ", oracle grid too coarse");
    });
}

CheckResult check_newton_derivative(const SuiteOptions& opts) {
    return timed("newton_derivative_fd", [&](CheckResult& out) {
        Rng rng(opts.seed + 5);
        const Grid grid(opts.fd_n);
        double worst = 0.0;
        long eligible = 0;
        for (int f = 0; f < opts.fd_fields; ++f) {
            const AdmissibleSet& U = opts.sets[static_cast<std::size_t>(f) % opts.sets.size()];
            const ProxParams params(log_uniform(rng, 1e-2, 1.0), log_uniform(rng, 1e-3, 1.0));
            ScalarField p(grid);
            ScalarField h(grid);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                p[k] = sample_dual(rng, params, U);
                h[k] = (coin(rng, 0.5) ? 1.0 : -1.0) * uniform(rng, 0.5, 1.0);
            }
            const ScalarField analytic = newton_deriv_H(p, h, params, U);
            const ScalarField numeric = fd_directional(p, h, params, U, opts.oracle);
            const auto distant = breakpoint_distant(p, params, U);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                if (!distant[k]) continue;
                ++eligible;
                const double scale = std::abs(analytic[k]);
                const double err = std::abs(numeric[k] - analytic[k]);
                worst = std::max(worst, scale > 0.0 ? err / scale : (err > 0.0 ? kInfinity : 0.0));
            }
        }
        out.passed = worst <= 1e-6 && eligible > 0;
        out.detail = std::to_string(eligible) + " nodes, max relative error " + sci(worst);
    });
}

CheckResult check_newton_step_dense(const SuiteOptions& opts) {
    return timed("newton_step_dense", [&](CheckResult& out) {
        Rng rng(opts.seed + 6);
        double worst = 0.0;
        LinearSolveOptions lin;
        for (int c = 0; c < opts.dense_instances; ++c) {
            const Grid grid(3 + c % (opts.oracle.dense_n_max - 2));
            const double inv_gamma = 1.0 / log_uniform(rng, 1e-3, 1.0);
            ScalarField diag(grid), r1(grid), r2(grid);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                diag[k] = coin(rng, 0.5) ? inv_gamma : 0.0;
                r1[k] = uniform(rng, -1.0, 1.0);
                r2[k] = uniform(rng, -1.0, 1.0);
            }
            const NewtonCorrection fast = schur_newton_solve(diag, r1, r2, lin);
            const NewtonCorrection ref = dense_block_solve(diag, r1, r2, opts.oracle);
            const double diff = std::hypot(norm_raw(fast.dy - ref.dy), norm_raw(fast.dp - ref.dp));
            const double scale = std::hypot(norm_raw(ref.dy), norm_raw(ref.dp));
            worst = std::max(worst, diff / scale);
        }
        out.passed = worst <= 1e-8;
        out.detail = std::to_string(opts.dense_instances) + " instances, max relative error " +
                     sci(worst);
    });
}

CheckResult check_manufactured_convergence(const SuiteOptions&) {
    return timed("manufactured_convergence", [&](CheckResult& out) {
        LinearSolveOptions lin;
        lin.rel_tol = 1e-12;
        const double two_pi2 = 2.0 * std::numbers::pi * std::numbers::pi;
        std::vector<double> errors;
        for (int n : {16, 32, 64}) {
            const Grid grid(n);
            const ScalarField exact = sine_mode(grid);
            const ScalarField y = poisson_solve(two_pi2 * exact, lin);
            errors.push_back(norm_max(y - exact));
        }
        const double r1 = errors[0] / errors[1];
        const double r2 = errors[1] / errors[2];
        out.passed = r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5;
        out.detail = "max errors " + sci(errors[0]) + ", " + sci(errors[1]) + ", " +
                     sci(errors[2]) + "; ratios " + sci(r1) + ", " + sci(r2);
    });
}

std::vector<CheckResult> run_suite(const SuiteOptions& opts) {
    return {check_conjugacy(opts),        check_bregman_nonnegative(opts),
            check_three_point_identity(opts), check_zero_bregman_on_piece(opts),
            check_prox_oracle(opts),      check_newton_derivative(opts),
            check_newton_step_dense(opts), check_manufactured_convergence(opts)};
}

}  // namespace multibang::oracle
