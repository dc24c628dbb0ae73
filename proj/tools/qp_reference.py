"""Reference minimizer for consistent data y = K u with u = u_2 everywhere.

With u = u_2 - alpha w and alpha small enough that u stays in [u_1, u_d], the Tikhonov
functional divided by alpha^2 no longer depends on alpha:

    1/2 |K w|^2 + sum_x h^2 max(-s_lo w, -s_hi w)

where s_lo, s_hi are the slopes of g left and right of u_2. This script solves that QP with
cvxpy and writes w, one value per line in row-major node order.

    python3 tools/qp_reference.py 24 tests/data/constant_u2_n24.txt
"""

import sys

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def main() -> None:
    n = int(sys.argv[1])
    out = sys.argv[2]
    values = (0.0, 0.1, 0.15)
    s_lo = 0.5 * (values[0] + values[1])
    s_hi = 0.5 * (values[1] + values[2])

    h = 1.0 / (n + 1)
    t = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n))
    a = (sp.kron(sp.eye(n), t) + sp.kron(t, sp.eye(n))) / h**2
    k = np.linalg.inv(a.toarray())

    w = cp.Variable(n * n)
    objective = 0.5 * h * h * cp.sum_squares(k @ w) + h * h * cp.sum(cp.maximum(-s_lo * w, -s_hi * w))
    problem = cp.Problem(cp.Minimize(objective))
    problem.solve(solver=cp.CLARABEL, tol_gap_abs=1e-14, tol_gap_rel=1e-12, tol_feas=1e-12)
    if problem.status != "optimal":
        raise SystemExit(f"solver status {problem.status}")
    np.savetxt(out, w.value, fmt="%.17g")


if __name__ == "__main__":
    main()
