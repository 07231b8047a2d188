"""Reduction of the problem with ``φ`` to a pure variational inequality.

The space is augmented by one scalar ``μ``; the constraint set becomes the
epigraph ``{(y, μ) : y in K, μ >= φ(y)}``, the operator ``(y, μ) ->
(A(y), 0)`` and the right-hand side ``(f, -1)``.  At a solution the last
component of ``f̃ - w̃`` is ``-1``, which forces the normal cone of the
epigraph to be non-horizontal, i.e. ``μ = φ(y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.functions import zero_function
from ..core.operators import SetValuedOperator
from ..core.problem import VIMOProblem
from ..core.sets import Epigraph
from ..core.vectors import as_vector
from ..errors import InfeasibleError
from .extragradient import solve_extragradient
from .report import SolveReport
from .residual import certify

MU_TOL = 1e-6


def lift_operator(A: SetValuedOperator) -> SetValuedOperator:
    """``(y, μ) -> A(y) x {0}``."""
    n = A.dim

    def support(z, zeta):
        return A.support_oracle(z[:n], zeta[:n]) if zeta[:n].any() else 0.0

    def select(z, h):
        return np.append(A.selection_oracle(z[:n], h[:n]), 0.0)

    batch = None
    if A.batch_support is not None:
        batch = lambda z, Z: A.batch_support(z[:n], Z[:, :n])  # noqa: E731

    return SetValuedOperator(n + 1, support, select, lambda z: A.norms(z[:n]), name=f"lift({A.name})",
                             single_valued=A.single_valued, bounded_image=A.bounded_image,
                             structure=A.structure, lipschitz=A.lipschitz, batch_support=batch)


@dataclass
class LiftedProblem:
    base: VIMOProblem
    lifted: VIMOProblem

    @property
    def lifted_dim(self) -> int:
        return self.base.dim + 1

    def contains(self, z) -> bool:
        return self.lifted.K.contains(z)


def epigraph_lift(problem: VIMOProblem) -> LiftedProblem:
    """Pure variational inequality on the epigraph of ``φ`` over ``K``.

    Raises
    ------
    InfeasibleError
        If ``φ`` is ``+inf`` on all of ``K``.
    """
    phi_w = problem.phi.value(problem.witness)
    if not math.isfinite(phi_w):
        raise InfeasibleError("φ is identically +inf on K")
    E = Epigraph(problem.K, problem.phi, witness=problem.witness)
    f = np.append(problem.f, -1.0)
    lifted = VIMOProblem(lift_operator(problem.A), f, E, zero_function(problem.dim + 1),
                         witness=E.witness, name=f"{problem.name}~")
    return LiftedProblem(problem, lifted)


def unlift(lp: LiftedProblem, lifted_report: SolveReport, tol: float = 1e-7, seed: int = 0) -> SolveReport:
    """Map a lifted solution back to ``y`` and re-certify it on the base problem.

    The returned report is ``converged`` only if the lifted run converged, the
    base residual is at most ``2 tol`` and ``|μ - φ(y)| <= 1e-6``.
    """
    z = as_vector(lifted_report.y, lp.lifted_dim, "lifted solution")
    y, mu = z[:-1].copy(), float(z[-1])
    base = lp.base
    if not base.feasible(y):
        y = base.K.project(y)
    mu_gap = abs(mu - base.phi.value(y))
    r = certify(base, y, seed=seed)
    ok = lifted_report.converged and r <= 2 * tol and mu_gap <= MU_TOL
    info = {"mu": mu, "mu_gap": mu_gap, "lifted_residual": lifted_report.residual}
    return SolveReport(y=y, residual=r, iterations=lifted_report.iterations,
                       witness_w=np.asarray(lifted_report.witness_w)[:-1], trace=list(lifted_report.trace),
                       status="converged" if ok else "max_iter", method="epigraph-lift", info=info)


def solve_lifted(problem: VIMOProblem, y0=None, **opts) -> SolveReport:
    """Solve through :func:`epigraph_lift` and :func:`unlift`."""
    lp = epigraph_lift(problem)
    z0 = None
    if y0 is not None:
        y0 = as_vector(y0, problem.dim, "y0")
        z0 = lp.lifted.K.project(np.append(y0, problem.phi.value(y0) if problem.feasible(y0) else 0.0))
    rep = solve_extragradient(lp.lifted, z0, **opts)
    return unlift(lp, rep, tol=opts.get("tol", 1e-7), seed=opts.get("seed", 0))
