"""Merit function: worst violation of the variational inequality over probes.

For fixed ``y`` the map

    g(ξ) = <f, ξ - y> - [A(y), ξ - y]_+ - φ(ξ) + φ(y)

is concave in ``ξ`` with ``g(y) = 0``, so a violation anywhere in
``K ∩ dom φ`` implies a (scaled) violation on every segment towards ``y``.
Probes near ``y`` therefore detect non-solutions even when ``K`` is unbounded.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import qmc

from ..core.operators import nearest_selection
from ..core.problem import VIMOProblem
from ..core.vectors import as_points, as_vector
from ..errors import InfeasibleError

DEFAULT_PROBES = 256
PROBE_RADIUS = 1.0
_PROBE_TAU = 1e-12
_TRIAL_STEPS = (1e-3, 1e-2, 1e-1, 1.0)


def violations(problem: VIMOProblem, y, probes) -> np.ndarray:
    """``g(ξ)`` for each probe row ``ξ`` (no flooring, ``y`` not added)."""
    y = as_vector(y, problem.dim, "y")
    Xi = as_points(probes, problem.dim, "probes")
    D = Xi - y
    sup = problem.A.support_many(y, D)
    phi_y = problem.phi.value(y)
    phi_xi = np.array([problem.phi.value(x) for x in Xi])
    with np.errstate(invalid="ignore"):
        g = D @ problem.f - sup - phi_xi + phi_y
    # probes outside dom φ or with unbounded support never violate
    return np.where(np.isnan(g), -np.inf, g)


def residual(problem: VIMOProblem, y, probes, tol: float = 1e-9) -> float:
    """``max(0, sup_ξ <f, ξ-y> - [A(y), ξ-y]_+ - φ(ξ) + φ(y))`` over the probes.

    Parameters
    ----------
    problem : VIMOProblem
    y : array_like
        Candidate, must lie in ``K ∩ dom φ`` (to ``tol``).
    probes : array_like
        Rows are points of ``K ∩ dom φ``.  The probe ``ξ = y`` is implicit.

    Raises
    ------
    InfeasibleError
        If ``y`` is not feasible.
    """
    y = as_vector(y, problem.dim, "y")
    if not problem.feasible(y, tol):
        raise InfeasibleError("residual requested at an infeasible point")
    Xi = as_points(probes, problem.dim, "probes")
    if len(Xi) == 0:
        return 0.0
    return max(0.0, float(np.max(violations(problem, y, Xi))))


def probe_batch(problem: VIMOProblem, y=None, count: int = DEFAULT_PROBES, seed: int = 0,
                radius: float = PROBE_RADIUS) -> np.ndarray:
    """Feasible quasi-random probes for :func:`residual`.

    Scrambled Sobol points fill the bounding box of ``K`` when ``K`` is
    bounded and the cube of half-width ``radius`` around ``y`` otherwise.  The
    batch also contains the axis points ``y ± radius e_i``, the box vertices in
    low dimension, ``y`` itself and the forward-backward trial points of
    :func:`trial_points`.  Every point lies in ``K ∩ dom φ``.
    """
    y = problem.witness.copy() if y is None else as_vector(y, problem.dim, "y")
    out = static_probes(problem, y, count, seed, radius)
    return np.vstack([out, trial_points(problem, y)]) if problem.feasible(y) else out


def static_probes(problem: VIMOProblem, y=None, count: int = DEFAULT_PROBES, seed: int = 0,
                  radius: float = PROBE_RADIUS) -> np.ndarray:
    """The part of :func:`probe_batch` that does not depend on the operator."""
    n = problem.dim
    y = problem.witness.copy() if y is None else as_vector(y, n, "y")
    lo, hi = problem.K.bounding_box()
    bounded = bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))
    if not bounded:
        lo = np.where(np.isfinite(lo), np.maximum(lo, y - radius), y - radius)
        hi = np.where(np.isfinite(hi), np.minimum(hi, y + radius), y + radius)
        hi = np.maximum(hi, lo)
    pts = [y[None, :]]
    if count > 0:
        m = 1 << max(0, math.ceil(math.log2(count)))
        sob = qmc.Sobol(n, scramble=True, seed=seed).random(m)[:count]
        pts.append(lo + sob * (hi - lo))
    eye = np.eye(n)
    pts.append(y + radius * eye)
    pts.append(y - radius * eye)
    if bounded and n <= 8:
        corners = np.array(np.meshgrid(*[[a, b] for a, b in zip(lo, hi)], indexing="ij")).reshape(n, -1).T
        pts.append(corners)
    P = np.vstack(pts)
    out = np.empty_like(P)
    for i, p in enumerate(P):
        out[i] = p if problem.feasible(p, 0.0) else problem.prox_feasible(p, _PROBE_TAU)
    return out


def witness_selection(problem: VIMOProblem, y, n=None, step: float = 1.0, rounds: int = 5) -> np.ndarray:
    """Element ``w`` of ``co A(y)`` with ``f - w`` (nearly) in ``∂φ(y) + N_K(y)``.

    Alternates the nearest selection to ``f - n`` with the backward-step
    estimate ``n = (v - T(v)) / step`` at ``v = y + step (f - w)``.
    """
    y = as_vector(y, problem.dim, "y")
    f = problem.f
    n = np.zeros(problem.dim) if n is None else np.asarray(n, dtype=float)
    w = nearest_selection(problem.A, y, f - n)
    for _ in range(rounds):
        v = y + step * (f - w)
        n = (v - problem.prox_feasible(v, step)) / step
        w_new = nearest_selection(problem.A, y, f - n)
        if np.allclose(w_new, w, rtol=0, atol=1e-15):
            break
        w = w_new
    return w


def trial_points(problem: VIMOProblem, y, w=None) -> np.ndarray:
    """Forward-backward trial points ``T_s(y + s (f - w))`` for a few steps ``s``.

    When ``φ`` is curved the violation of the inequality is concentrated
    near these points, where a fixed quasi-random batch can miss it.
    """
    y = as_vector(y, problem.dim, "y")
    w = witness_selection(problem, y) if w is None else w
    return np.array([problem.prox_feasible(y + s * (problem.f - w), s) for s in _TRIAL_STEPS])


def natural_residual(problem: VIMOProblem, y, w=None) -> float:
    """``||y - T_1(y + f - w)||``, zero exactly when ``f - w`` is in ``∂φ(y) + N_K(y)``."""
    y = as_vector(y, problem.dim, "y")
    w = witness_selection(problem, y) if w is None else w
    return float(np.linalg.norm(y - problem.prox_feasible(y + problem.f - w, 1.0)))


def certify(problem: VIMOProblem, y, count: int = DEFAULT_PROBES, seed: int = 0,
            radius: float = PROBE_RADIUS) -> float:
    """Residual on a fresh probe batch built around ``y``."""
    return residual(problem, y, probe_batch(problem, y, count, seed, radius))
