"""Selection-based extragradient for ``co A(y) + ∂φ(y) + N_K(y) ∋ f``.

Each iteration picks ``w_k`` in ``co A(y_k)`` nearest to ``f - n_k``, where
``n_k`` estimates the element of ``∂φ + N_K`` found by the previous
backward step, and then performs

    ȳ = T_s(y - s (w - f)),    w̄ in co A(ȳ),    y+ = T_s(y - s (w̄ - f)),

with ``T_s = argmin_{x in K} s φ(x) + ||x - .||^2 / 2``.  The step is halved
while ``s ||w - w̄|| > θ ||y - ȳ||`` and allowed to grow slowly afterwards.
Convergence is certified by the probe residual.  A final polish snaps
coordinates to nearby kinks (zero and box faces), where set-valued
operators and nonsmooth ``φ`` usually place solutions, and re-solves the
remaining coordinates.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ..core.operators import nearest_selection
from ..core.problem import VIMOProblem
from ..core.sets import Box, WholeSpace
from ..core.vectors import as_vector
from ..errors import NonFiniteError
from .report import SolveReport
from .residual import (DEFAULT_PROBES, PROBE_RADIUS, natural_residual, residual, static_probes, trial_points,
                       witness_selection)

log = logging.getLogger(__name__)

THETA = 0.9
GROWTH = 1.2
MIN_STEP = 1e-14
SNAP_LEVELS = (1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2)


class _Stepper:
    """Shared state of one extragradient run on ``problem``."""

    def __init__(self, problem: VIMOProblem, step: float):
        self.p = problem
        self.step0 = float(step)
        self.s = float(step)

    def T(self, v, s):
        return self.p.prox_feasible(v, s)

    def select(self, y, target):
        w = nearest_selection(self.p.A, y, target)
        if not np.all(np.isfinite(w)):
            raise NonFiniteError("selection returned non-finite values")
        return w

    def iterate(self, y, n):
        """One accepted extragradient step from ``(y, n)``; returns ``(y+, n+, w)``."""
        f = self.p.f
        w = self.select(y, f - n)
        while True:
            s = self.s
            v = y - s * (w - f)
            yb = self.T(v, s)
            nb = (v - yb) / s
            wb = self.select(yb, f - nb)
            gap = float(np.linalg.norm(y - yb))
            if s * float(np.linalg.norm(w - wb)) <= THETA * gap or s <= MIN_STEP or gap == 0.0:
                break
            self.s = 0.5 * s
        u = y - s * (wb - f)
        y_new = self.T(u, s)
        n_new = (u - y_new) / s
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteError("iterate became non-finite")
        self.s = min(self.step0, self.s * GROWTH)
        return y_new, n_new, w


def witness_defect(problem: VIMOProblem, y, w, probes) -> float:
    """``max_ξ <f - w, ξ - y> - φ(ξ) + φ(y)``: how far ``w`` is from certifying ``y``."""
    y = as_vector(y, problem.dim)
    D = np.asarray(probes, dtype=float) - y
    phi_y = problem.phi.value(y)
    vals = D @ (problem.f - w) - np.array([problem.phi.value(x) for x in probes]) + phi_y
    return max(0.0, float(np.max(vals)))


def _snap_candidates(problem: VIMOProblem, y: np.ndarray):
    """Points obtained by moving near-kink coordinates onto the kink.

    Yields ``(level, snapped_y, fixed_mask)`` for increasing thresholds.
    """
    lo, hi = problem.K.bounding_box() if isinstance(problem.K, (Box, WholeSpace)) else (None, None)
    seen = set()
    for lev in SNAP_LEVELS:
        z = y.copy()
        fixed = np.abs(y) <= lev
        z[fixed] = 0.0
        if lo is not None:
            at_lo = np.isfinite(lo) & (np.abs(y - lo) <= lev)
            at_hi = np.isfinite(hi) & (np.abs(y - hi) <= lev)
            z[at_lo], z[at_hi] = lo[at_lo], hi[at_hi]
            fixed = fixed | at_lo | at_hi
        key = tuple(np.flatnonzero(fixed))
        if not fixed.any() or key in seen:
            continue
        seen.add(key)
        if problem.feasible(z):
            yield lev, z, fixed


def _merit(problem: VIMOProblem, y, static):
    """``(probe residual, natural residual, witness)`` at ``y``."""
    w = witness_selection(problem, y)
    probes = np.vstack([static, trial_points(problem, y, w)])
    return residual(problem, y, probes), natural_residual(problem, y, w), w


def polish(problem: VIMOProblem, y, static_fn, step: float, tol: float, max_iter: int = 2000):
    """Try snapped candidates; return ``(y, residual, natural, note)`` of the best one."""
    best = (y, math.inf, math.inf, None)
    for lev, z, fixed in _snap_candidates(problem, y):
        if max(best[1], best[2]) <= tol:
            break
        free = np.flatnonzero(~fixed)
        if len(free):
            try:
                sub = problem.restrict(free, anchor=z)
            except Exception:  # restricted slice may be empty or singular
                continue
            rep = solve_extragradient(sub, z[free], step=step, tol=tol, max_iter=max_iter,
                                      do_polish=False, probe_count=64)
            z = z.copy()
            z[free] = rep.y
        r, nat, _ = _merit(problem, z, static_fn(z))
        log.debug("polish level %g: residual %.3g, natural %.3g", lev, r, nat)
        if max(r, nat) < max(best[1], best[2]):
            best = (z, r, nat, f"snapped {int(fixed.sum())} coordinates at level {lev:g}")
    return best


def solve_extragradient(problem: VIMOProblem, y0=None, step: float = 0.1, tol: float = 1e-7,
                        max_iter: int = 10000, probe_count: int = DEFAULT_PROBES, seed: int = 0,
                        probe_radius: float = PROBE_RADIUS, check_every: int = 10,
                        do_polish: bool = True) -> SolveReport:
    """Extragradient solve of the inclusion form of ``problem``.

    Parameters
    ----------
    problem : VIMOProblem
    y0 : array_like, optional
        Start; projected into ``K ∩ dom φ`` if infeasible.  Defaults to the
        problem witness.
    step : float
        Initial (and maximal) step.
    tol : float
        Tolerance for both the probe residual and the natural residual.
    max_iter : int
    probe_count, seed, probe_radius :
        Probe battery used to certify convergence.
    check_every : int
        Iterations between residual evaluations.
    do_polish : bool
        Try snapping to kinks when the iteration stalls.

    Returns
    -------
    SolveReport
        ``status="max_iter"`` carries the iterate of smallest merit.
    """
    if step <= 0 or tol <= 0:
        raise ValueError("step and tol must be positive")
    y = problem.witness.copy() if y0 is None else as_vector(y0, problem.dim, "y0")
    info = {}
    if not problem.feasible(y):
        y = problem.prox_feasible(y, 1e-12)
        info["start_projected"] = True

    bounded = problem.K.is_bounded
    fixed = static_probes(problem, y, probe_count, seed, probe_radius) if bounded else None

    def static_fn(z):
        return fixed if bounded else static_probes(problem, z, probe_count, seed, probe_radius)

    st = _Stepper(problem, step)
    n = np.zeros(problem.dim)
    r, nat, w = _merit(problem, y, static_fn(y))
    best = (y.copy(), r, nat, w)
    trace = [(0, r)]
    status = "converged" if max(r, nat) <= tol else "max_iter"
    k = 0
    while status != "converged" and k < max_iter:
        y_new, n, _ = st.iterate(y, n)
        k += 1
        stalled = st.s <= MIN_STEP or not np.any(y_new != y)
        y = y_new
        if k % check_every == 0 or stalled:
            r, nat, w = _merit(problem, y, static_fn(y))
            trace.append((k, r))
            if max(r, nat) < max(best[1], best[2]):
                best = (y.copy(), r, nat, w)
            if max(r, nat) <= tol:
                status = "converged"
                break
            if stalled:
                break   # only a polish can help now

    last_y = y
    y, r, nat, w = best
    if status != "converged" and do_polish:
        # the stalled last iterate is usually closest to the kink even when
        # its merit is not yet smaller than the best one seen
        for start in (last_y, best[0]):
            y2, r2, nat2, note = polish(problem, start, static_fn, step, tol)
            if max(r2, nat2) < max(r, nat):
                y, r, nat = y2, r2, nat2
                w = witness_selection(problem, y)
                info["polish"] = note
            if max(r, nat) <= tol:
                break
        trace.append((k, r))
        if max(r, nat) <= tol:
            status = "converged"
    info["final_step"] = st.s
    info["natural_residual"] = nat
    info["witness_defect"] = witness_defect(problem, y, w, np.vstack([static_fn(y), trial_points(problem, y, w)]))
    return SolveReport(y=y, residual=r, iterations=k, witness_w=w, trace=trace, status=status,
                       method="extragradient", info=info)
