"""Coercive truncation: solve on ``K ∩ B_R`` for growing ``R``.

A solution strictly inside the ball is a local solution of the untruncated
problem and, by convexity of the gap in ``ξ``, a global one.  Coercive
operators guarantee such a radius exists; without coercivity the schedule
may run out, which is reported as ``max_iter``.
"""

from __future__ import annotations

import numpy as np

from ..core.problem import VIMOProblem
from ..errors import InfeasibleError
from .extragradient import solve_extragradient
from .report import SolveReport
from .residual import certify, natural_residual, witness_selection

DEFAULT_RADII = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
INTERIOR = 1e-9


def solve_truncated(problem: VIMOProblem, radii=DEFAULT_RADII, tol: float = 1e-7, step: float = 0.1,
                    max_iter: int = 10000, seed: int = 0, y0=None) -> SolveReport:
    """Truncated solves with an interior-of-the-ball stopping rule.

    Stops at the first radius whose solution satisfies ``||y|| < R`` and has
    residual at most ``tol`` on probes of the untruncated problem.  The
    returned report's ``info`` holds the radius and per-radius results.
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly increasing")
    y = None if y0 is None else np.asarray(y0, dtype=float)
    per_radius = []
    total = 0
    trace = []
    rep = None
    for R in radii:
        try:
            K_R = problem.K.intersect_ball(R)
        except InfeasibleError:
            per_radius.append({"radius": R, "status": "infeasible"})
            continue
        sub = VIMOProblem(problem.A, problem.f, K_R, problem.phi, name=f"{problem.name}|R={R:g}")
        start = None if y is None else sub.prox_feasible(y, 1e-12)
        rep = solve_extragradient(sub, start, step=step, tol=tol, max_iter=max_iter, seed=seed)
        total += rep.iterations
        y = rep.y
        norm = float(np.linalg.norm(y))
        interior = norm < R * (1.0 - INTERIOR)
        r = certify(problem, y, seed=seed) if interior else float("inf")
        nat = natural_residual(problem, y) if interior else float("inf")
        trace.append((total, rep.residual))
        per_radius.append({"radius": R, "status": rep.status, "norm": norm, "interior": interior,
                           "residual": r})
        if interior and rep.converged and max(r, nat) <= tol:
            w = witness_selection(problem, y)
            return SolveReport(y=y, residual=r, iterations=total, witness_w=w, trace=trace,
                               status="converged", method="truncation",
                               info={"radius": R, "radii": per_radius, "natural_residual": nat})
    if rep is None:
        return SolveReport(y=problem.witness, residual=float("inf"), iterations=0,
                           witness_w=np.zeros(problem.dim), trace=trace, status="infeasible",
                           method="truncation", info={"radii": per_radius})
    r = certify(problem, y, seed=seed) if problem.feasible(y) else float("inf")
    return SolveReport(y=y, residual=r, iterations=total, witness_w=rep.witness_w, trace=trace,
                       status="max_iter", method="truncation", info={"radius": radii[-1], "radii": per_radius})


def solve_inclusion(A, f, radii=DEFAULT_RADII, tol: float = 1e-7, **opts) -> SolveReport:
    """``co A(y) ∋ f`` on the whole space, via :func:`solve_truncated` with ``φ = 0``."""
    return solve_truncated(VIMOProblem(A, f, name="inclusion"), radii, tol, **opts)
