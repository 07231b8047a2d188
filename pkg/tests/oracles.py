"""Independent reference computations used by the tests.

Nothing here calls the solvers or residual code of the package; operators are
re-declared as plain vectorized numpy functions.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


# ---------------------------------------------------------------------------
# box-constrained 2D instances


def box_gap(lower, upper, f, lo, hi, Y):
    """Closed-form worst violation over the whole box for interval-valued operators.

    ``A(y) = [lower(y), upper(y)]`` coordinatewise, so
    ``sup_{ξ in K} <f, ξ-y> - [A(y), ξ-y]_+`` separates into one concave
    piecewise-linear function of ``d_i = ξ_i - y_i`` per coordinate, which is
    maximized at an end of ``[lo_i - y_i, hi_i - y_i]`` or at ``d_i = 0``.
    ``Y`` has shape ``(m, n)``; returns shape ``(m,)``.
    """
    L, U = lower(Y), upper(Y)
    out = np.zeros_like(Y)
    for d in (lo - Y, hi - Y):
        out = np.maximum(out, f * d - np.maximum(L * d, U * d))
    return out.sum(axis=1)


def grid_minimizer(lower, upper, f, lo, hi, nodes=201):
    """Grid point of ``K`` with the smallest closed-form gap, and the cell size."""
    ax = [np.linspace(lo[i], hi[i], nodes) for i in range(2)]
    X1, X2 = np.meshgrid(*ax, indexing="ij")
    Y = np.stack([X1.ravel(), X2.ravel()], axis=1)
    g = box_gap(lower, upper, f, lo, hi, Y)
    k = int(np.argmin(g))
    return Y[k], (hi - lo) / (nodes - 1), float(g[k])


# ---------------------------------------------------------------------------
# 1D Signorini


def dirichlet_solve(f_nodes, b0, b1):
    """Interior of ``-y'' = f`` on ``n`` nodes with end values ``b0, b1`` (3-point stencil)."""
    n = len(f_nodes)
    h = 1.0 / (n - 1)
    m = n - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = -1.0
    ab[1, :] = 2.0
    ab[2, :-1] = -1.0
    rhs = h * h * np.asarray(f_nodes[1:-1], dtype=float).copy()
    rhs[0] += b0
    rhs[-1] += b1
    y = np.empty(n)
    y[0], y[-1] = b0, b1
    y[1:-1] = solve_banded((1, 1), ab, rhs)
    return y


def boundary_balance(y, f_nodes):
    """Nodal balance ``(A y - m f)`` at both ends for the unit-coefficient stencil."""
    n = len(y)
    h = 1.0 / (n - 1)
    r0 = (y[0] - y[1]) / h ** 2 - 0.5 * f_nodes[0]
    r1 = (y[-1] - y[-2]) / h ** 2 - 0.5 * f_nodes[-1]
    return np.array([r0, r1])


def signorini_oracle(f_nodes, top=1.0, levels=8, width=21):
    """Brute-force search over boundary values with zooming grids.

    Minimizes the complementarity defect ``sum_b |min(y_b, r_b)|`` over
    ``(y_0, y_1) >= 0``, each candidate completed by a Dirichlet solve.
    """
    centre = np.array([top / 2, top / 2])
    half = top / 2
    best = None
    for _ in range(levels):
        a0 = np.clip(np.linspace(centre[0] - half, centre[0] + half, width), 0, None)
        a1 = np.clip(np.linspace(centre[1] - half, centre[1] + half, width), 0, None)
        for b0 in a0:
            for b1 in a1:
                y = dirichlet_solve(f_nodes, b0, b1)
                r = boundary_balance(y, f_nodes)
                val = float(np.sum(np.abs(np.minimum([b0, b1], r))))
                if best is None or val < best[0]:
                    best = (val, y)
        centre = best[1][[0, -1]]
        half *= 0.2
    return best[1], best[0]
