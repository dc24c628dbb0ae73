#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "multibang/grid.hpp"

namespace multibang {

struct LinearSolveOptions {
    double rel_tol = 1e-10;
    /// Defaults to 10 n^2 when unset.
    std::optional<int> max_iter;

    void validate() const;
    int max_iter_for(const Grid& grid) const;
};

/// Five-point Dirichlet Laplacian A = -Delta: (4y_ij - y_i+-1,j - y_i,j+-1) / h^2.
ScalarField laplacian_apply(const ScalarField& y);
void laplacian_apply(const ScalarField& y, ScalarField& out);

/// Applies K = A^{-1} (= K^*) by conjugate gradients; ||A y - f|| <= rel_tol ||f||.
/// Throws SolverFailure when the iteration budget runs out.
ScalarField poisson_solve(const ScalarField& f, const LinearSolveOptions& opts = {});

struct NewtonCorrection {
    ScalarField dy;
    ScalarField dp;
};

/// Solver for the symmetric Newton block system
///
///     [ I   A ] [dy]     [r1]
///     [ A  -D ] [dp] = - [r2],      D = diag(dN_diag) >= 0,
///
/// through the reduced SPD system (A A + D) dp = r2 - A r1 and dy = -r1 - A dp.
/// The sparsity pattern of A A + D is analyzed once per grid; the numeric factorization
/// is reused while D stays unchanged.
class SchurSolver {
public:
    explicit SchurSolver(Grid grid);
    ~SchurSolver();
    SchurSolver(SchurSolver&&) noexcept;
    SchurSolver& operator=(SchurSolver&&) noexcept;

    const Grid& grid() const noexcept;

    /// Block residual of the result is <= rel_tol (||r1|| + ||r2||); SolverFailure otherwise.
    NewtonCorrection solve(const ScalarField& dN_diag, const ScalarField& r1, const ScalarField& r2,
                           const LinearSolveOptions& opts = {});

    /// Number of numeric factorizations performed so far.
    int factorizations() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around SchurSolver.
NewtonCorrection schur_newton_solve(const ScalarField& dN_diag, const ScalarField& r1,
                                    const ScalarField& r2, const LinearSolveOptions& opts = {});

/// Stacked residual of the block system for a candidate (dy, dp).
std::pair<ScalarField, ScalarField> block_residual(const ScalarField& dN_diag,
                                                   const ScalarField& r1, const ScalarField& r2,
                                                   const ScalarField& dy, const ScalarField& dp);

}  // namespace multibang
