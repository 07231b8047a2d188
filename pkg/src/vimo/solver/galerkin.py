"""Galerkin filters and the homotopy on the auxiliary inclusion.

On a bounded polytope ``K_F`` the auxiliary set-valued map is

    L_ε(λ, y) = co{ (1 - λ) P_ε(y) + λ (f - A(y)) },
    P_ε(y)    = [K_F ∩ (y - N(y))] \\ B_ε(y) - y,

so ``P_ε`` points from ``y`` into the set along inward normals.  At
``λ = 0`` its zeros are interior points; at ``λ = 1`` a zero (completed by
the normal cone on the boundary) solves the restricted variational
inequality.  :func:`homotopy_solve` follows approximate zeros along a
``λ`` schedule and falls back to extragradient when the tracking fails.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ..core.hull import distance_to_hull_plus_cone, min_norm_point, unique_rows
from ..core.operators import SetValuedOperator, selection_battery
from ..core.problem import VIMOProblem
from ..core.sets import Box, ConvexSet
from ..core.vectors import as_vector
from ..errors import InfeasibleError, PreconditionError
from .extragradient import polish, solve_extragradient
from .report import SolveReport
from .residual import (DEFAULT_PROBES, PROBE_RADIUS, certify, natural_residual, static_probes,
                       witness_selection)

log = logging.getLogger(__name__)

LAMBDA_SCHEDULE = (0.0, 0.25, 0.5, 0.75, 1.0)


# ---------------------------------------------------------------------------
# filters


@dataclass(frozen=True)
class GalerkinFilter:
    """Strictly nested coordinate index sets ``F_1 ⊂ F_2 ⊂ ... ⊆ {0..n-1}``."""

    subspaces: tuple
    dim: int

    def __init__(self, subspaces, dim: int):
        subs = tuple(tuple(sorted(set(int(i) for i in F))) for F in subspaces)
        if not subs:
            raise ValueError("a filter needs at least one subspace")
        for F in subs:
            if not F:
                raise ValueError("subspaces must be nonempty")
            if F[0] < 0 or F[-1] >= dim:
                raise ValueError(f"index out of range for dimension {dim}")
        for a, b in zip(subs, subs[1:]):
            if not (set(a) < set(b)):
                raise ValueError("subspaces must be strictly nested")
        object.__setattr__(self, "subspaces", subs)
        object.__setattr__(self, "dim", int(dim))

    @classmethod
    def full(cls, dim: int) -> "GalerkinFilter":
        return cls([range(dim)], dim)

    @classmethod
    def strided(cls, dim: int, strides=(8, 4, 2, 1)) -> "GalerkinFilter":
        """Every ``s``-th coordinate (plus the last) for decreasing strides."""
        subs = []
        for s in strides:
            F = sorted(set(range(0, dim, s)) | {dim - 1})
            if not subs or set(subs[-1]) < set(F):
                subs.append(F)
        return cls(subs, dim)

    def __len__(self):
        return len(self.subspaces)

    def __iter__(self):
        return iter(self.subspaces)


class BasisFilter:
    """Nested subspaces ``range(B_1) ⊂ range(B_2) ⊂ ...`` given by basis matrices.

    Used for discretizations where coordinate subspaces are a poor Galerkin
    chain, e.g. coarse-grid interpolants of a grid function.
    """

    def __init__(self, bases, dim: int):
        bs = [np.atleast_2d(np.asarray(B, dtype=float)) for B in bases]
        if not bs:
            raise ValueError("a filter needs at least one subspace")
        ranks = []
        for B in bs:
            if B.shape[0] != dim:
                raise ValueError(f"basis rows must equal the dimension {dim}")
            ranks.append(np.linalg.matrix_rank(B))
            if ranks[-1] != B.shape[1]:
                raise ValueError("basis columns must be linearly independent")
        for a, b, ra, rb in zip(bs, bs[1:], ranks, ranks[1:]):
            if ra >= rb or np.linalg.matrix_rank(np.hstack([a, b])) != rb:
                raise ValueError("subspaces must be strictly nested")
        self.bases = tuple(bs)
        self.dim = int(dim)

    def __len__(self):
        return len(self.bases)

    def __iter__(self):
        return iter(self.bases)


# ---------------------------------------------------------------------------
# auxiliary map


def _box_cone_vertices(K: Box, y: np.ndarray, tol: float) -> np.ndarray:
    """Vertices of ``K ∩ (y - N_K(y))`` for a box: a product of intervals."""
    lo, hi = K.bounding_box()
    ivals = []
    for i in range(K.dim):
        at_lo = abs(y[i] - lo[i]) <= tol * max(1.0, abs(lo[i]))
        at_hi = abs(y[i] - hi[i]) <= tol * max(1.0, abs(hi[i]))
        if at_lo and at_hi:
            ivals.append([y[i]])
        elif at_lo:
            ivals.append([y[i], hi[i]])
        elif at_hi:
            ivals.append([lo[i], y[i]])
        else:
            ivals.append([y[i]])
    if np.prod([len(v) for v in ivals]) > 4096:
        raise PreconditionError("too many active faces for vertex enumeration")
    return np.array(list(itertools.product(*ivals)), dtype=float)


def _polytope_cone_points(K: ConvexSet, y: np.ndarray, tol: float, directions: int, seed: int) -> np.ndarray:
    """Extreme points of ``K ∩ (y - cone(N))`` found by linear programs.

    Variables are ``(x, μ)`` with ``x = y - N^T μ``, ``μ >= 0`` and ``G x <= h``.
    """
    G, h = K.inequalities()
    N = K.normal_cone_generators(y, tol)
    n = K.dim
    if len(N) == 0:
        return y[None, :]
    m = len(N)
    A_ub = -G @ N.T
    b_ub = h - G @ y
    rng = np.random.default_rng(seed)
    objs = [e for e in np.eye(n)] + [-e for e in np.eye(n)] + list(rng.normal(size=(directions, n)))
    pts = [y]
    for c in objs:
        # max <c, x> = <c, y> - min <N c, μ>
        res = linprog(N @ c, A_ub=A_ub, b_ub=b_ub, bounds=[(0, None)] * m, method="highs")
        if res.status == 0:
            pts.append(y - N.T @ res.x)
    return unique_rows(np.array(pts))


def auxiliary_map(K_F: ConvexSet, A: SetValuedOperator, f, eps: float, lam: float, y,
                  directions: int = 16, seed: int = 0, tol: float = 1e-9) -> np.ndarray:
    """Finite generators whose convex hull approximates ``L_ε(λ, y)``.

    Parameters
    ----------
    K_F : ConvexSet
        Bounded polytope (a :class:`Box` or :class:`Polytope`).
    A : SetValuedOperator
    f : array_like
    eps : float
        Radius of the excluded ball; ``0`` keeps the whole cone slice.
    lam : float
        Homotopy parameter in ``[0, 1]``.
    y : array_like
        Point of ``K_F``.

    Returns
    -------
    ndarray
        Rows ``(1 - λ) p + λ (f - w)`` for extreme points ``p`` of ``P_ε(y)``
        and battery selections ``w`` of ``co A(y)``; duplicates removed.

    Raises
    ------
    PreconditionError
        If ``K_F`` is not a bounded polytope, or ``P_ε(y)`` is empty at a
        boundary point (``ε`` too large).
    """
    if not (K_F.is_polytope and K_F.is_bounded):
        raise PreconditionError("auxiliary map needs a bounded polytope")
    if not 0.0 <= lam <= 1.0 or eps < 0:
        raise ValueError("need 0 <= lambda <= 1 and eps >= 0")
    y = as_vector(y, K_F.dim, "y")
    f = as_vector(f, K_F.dim, "f")
    if not K_F.contains(y, tol):
        raise InfeasibleError("auxiliary map evaluated outside K_F")

    if lam < 1.0:
        if isinstance(K_F, Box):
            S = _box_cone_vertices(K_F, y, tol)
        else:
            S = _polytope_cone_points(K_F, y, tol, directions, seed)
        D = S - y
        dist = np.linalg.norm(D, axis=1)
        interior = bool(np.all(dist <= tol))
        if interior or eps == 0.0:
            P = D
        else:
            far = dist >= eps
            P = np.vstack([D[far], eps * D[dist > eps] / dist[dist > eps, None]]) if far.any() else D[:0]
            if len(P) == 0:
                raise PreconditionError(f"P_eps(y) is empty at a boundary point; eps={eps} is too large")
        P = unique_rows(P)
    else:
        P = np.zeros((1, K_F.dim))

    if lam > 0.0:
        W = unique_rows(f - selection_battery(A, y))
    else:
        W = np.zeros((1, K_F.dim))
    gens = [(1.0 - lam) * p + lam * q for p in P for q in W]
    return unique_rows(np.array(gens))


def aux_defect(K_F: ConvexSet, A: SetValuedOperator, f, y, tol: float = 1e-9) -> float:
    """``dist(0, co(L(1, y)) - cone N_{K_F}(y))``; zero at restricted solutions."""
    gens = auxiliary_map(K_F, A, f, 0.0, 1.0, y, tol=tol)
    N = K_F.normal_cone_generators(y, tol)
    return distance_to_hull_plus_cone(gens, -N if len(N) else None)


# ---------------------------------------------------------------------------
# homotopy


@dataclass
class HomotopyResult:
    """Result of :func:`homotopy_solve`; ``path`` holds ``(λ, y, defect)``."""

    y: np.ndarray
    residual: float
    path: list = field(default_factory=list)
    fallback: bool = False
    converged: bool = False
    iterations: int = 0

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.y, dtype=dtype)


def _flow(K_F, A, f, eps, lam, y, s0, tol, max_iter, seed):
    """Projected minimum-norm flow ``y <- P_K(y + s d)``, ``d`` nearest-to-0 in ``co L``."""
    s = s0

    def move(z, step):
        d = min_norm_point(auxiliary_map(K_F, A, f, eps, lam, z, seed=seed))
        z_new = K_F.project(z + step * d)
        return z_new, float(np.linalg.norm(z_new - z)) / step

    z_new, m = move(y, s)
    it = 0
    while it < max_iter and m > tol and s > 1e-14:
        it += 1
        z_next, m_next = move(z_new, s)
        if m_next > m:
            s *= 0.5
            z_new, m = move(y, s)
            continue
        y, z_new, m = z_new, z_next, m_next
    return y, m, it


def homotopy_solve(K_F: ConvexSet, A: SetValuedOperator, f, eps: float = 0.0,
                   lambda_schedule=LAMBDA_SCHEDULE, tol: float = 1e-7, y0=None, step: float = 0.1,
                   max_iter: int = 2000, seed: int = 0) -> HomotopyResult:
    """Track zeros of the auxiliary map from ``λ = 0`` to ``λ = 1``.

    At each scheduled ``λ > 0`` the projected min-norm flow is run from the
    previous point.  The final point is accepted when
    ``dist(0, co L(1, y) - N(y)) <= tol`` and the probe residual of the
    restricted problem is at most ``tol``; a polish is tried otherwise, and
    extragradient on the restricted problem is the last resort.
    """
    lams = [float(v) for v in lambda_schedule]
    if not lams or lams[-1] != 1.0 or any(b <= a for a, b in zip(lams, lams[1:])) or lams[0] < 0:
        raise ValueError("lambda schedule must increase strictly and end at 1")
    f = as_vector(f, K_F.dim, "f")
    prob = VIMOProblem(A, f, K_F)
    y = K_F.witness if y0 is None else K_F.project(as_vector(y0, K_F.dim, "y0"))
    path = []
    total = 0
    for lam in lams:
        if lam > 0:
            y, m, it = _flow(K_F, A, f, eps, lam, y, step, tol, max_iter, seed)
            total += it
        else:
            m = distance_to_hull_plus_cone(auxiliary_map(K_F, A, f, eps, 0.0, y, seed=seed))
        path.append((lam, y.copy(), float(m)))

    static = static_probes(prob, y, DEFAULT_PROBES, seed, PROBE_RADIUS)

    def accept(z):
        return aux_defect(K_F, A, f, z) <= tol and certify(prob, z, seed=seed) <= tol \
            and natural_residual(prob, z) <= tol

    if accept(y):
        return HomotopyResult(y, certify(prob, y, seed=seed), path, False, True, total)
    z, r, nat, _ = polish(prob, y, lambda _z: static, step, tol)
    if max(r, nat) <= tol and aux_defect(K_F, A, f, z) <= tol:
        path.append((1.0, z.copy(), aux_defect(K_F, A, f, z)))
        return HomotopyResult(z, r, path, False, True, total)
    log.info("homotopy did not reach a zero; falling back to extragradient")
    rep = solve_extragradient(prob, y, step=step, tol=tol, seed=seed)
    return HomotopyResult(rep.y, rep.residual, path, True, rep.converged, total + rep.iterations)


# ---------------------------------------------------------------------------
# Galerkin


def solve_galerkin(problem: VIMOProblem, filt, inner_tol: float = 1e-7, step: float = 0.1,
                   max_iter: int = 10000, seed: int = 0, inner: str = "auto") -> SolveReport:
    """Solve the restricted problems along a Galerkin filter.

    For a :class:`GalerkinFilter` off-subspace coordinates stay at the
    problem witness; a :class:`BasisFilter` restricts to ``y = B z``.  Each stage starts
    from the previous stage's solution; the trace records ``(stage,
    full-problem residual)``.  ``inner`` is ``"homotopy"``, ``"extragradient"``
    or ``"auto"`` (homotopy for bounded polytopes with ``φ = 0``).
    """
    if filt.dim != problem.dim:
        raise ValueError("filter dimension differs from the problem")
    basis = isinstance(filt, BasisFilter)
    anchor = problem.witness.copy()
    y = anchor.copy()
    trace, stages, skipped = [], [], []
    last_rep = None
    total = 0
    for k, F in enumerate(filt):
        try:
            if basis:
                sub = problem.restrict_basis(F)
                z0 = np.linalg.lstsq(F, y, rcond=None)[0]
            else:
                idx = np.asarray(F, dtype=int)
                sub = problem.restrict(idx, anchor=y)
                z0 = y[idx]
        except InfeasibleError:
            skipped.append(k)
            log.warning("stage %d: restricted feasible set is empty, skipped", k)
            continue
        use_h = inner == "homotopy" or (inner == "auto" and sub.K.is_polytope and sub.K.is_bounded
                                         and sub.phi.is_zero)
        z0 = z0 if sub.feasible(z0) else sub.K.project(z0)
        if use_h:
            h = homotopy_solve(sub.K, sub.A, sub.f, tol=inner_tol, y0=z0, step=step, seed=seed)
            z, its, how = h.y, h.iterations, "homotopy+extragradient" if h.fallback else "homotopy"
        else:
            rep = solve_extragradient(sub, z0, step=step, tol=inner_tol, max_iter=max_iter, seed=seed)
            z, its, how = rep.y, rep.iterations, "extragradient"
        total += its
        if basis:
            y = F @ z
        else:
            y = y.copy()
            y[idx] = z
        r = certify(problem, y, seed=seed)
        trace.append((k, r))
        stages.append({"stage": k, "size": len(z), "inner": how, "residual": r})
        last_rep = z
    if last_rep is None:
        return SolveReport(y=anchor, residual=math.inf, iterations=0, witness_w=np.zeros(problem.dim),
                           trace=trace, status="infeasible", method="galerkin",
                           info={"skipped": skipped})
    r = trace[-1][1]
    nat = natural_residual(problem, y)
    w = witness_selection(problem, y)
    status = "converged" if max(r, nat) <= inner_tol else "max_iter"
    return SolveReport(y=y, residual=r, iterations=total, witness_w=w, trace=trace, status=status,
                       method="galerkin", info={"stages": stages, "skipped": skipped, "natural_residual": nat})
