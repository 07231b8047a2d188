"""Set-valued operators on R^n, accessed only through support values.

An operator ``A: R^n -> 2^(R^n)`` is an oracle bundle:

* ``support_oracle(y, xi)`` gives the upper support value
  ``[A(y), xi]_+ = sup_{d in A(y)} <d, xi>``;
* ``selection_oracle(y, hint)`` returns an element of the closed convex hull
  of ``A(y)``; for ``hint != 0`` it is an argsup of ``<., hint>``;
* ``norm_oracle(y)`` returns ``(||A y||_-, ||A y||_+)``.

Support values of ``A`` and of its closed convex hull coincide, so nothing in
this package distinguishes the two.  Every operator is strong: the oracles are
defined at every ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DimensionError, InfeasibleError, NonFiniteError
from .hull import min_norm_point, nearest_in_hull
from .vectors import as_points, as_vector, frozen

SupportOracle = Callable[[np.ndarray, np.ndarray], float]
SelectionOracle = Callable[[np.ndarray, np.ndarray], np.ndarray]
NormOracle = Callable[[np.ndarray], "tuple[float, float]"]


@dataclass(frozen=True, eq=False)
class SetValuedOperator:
    """Oracle representation of a strong set-valued map on R^n.

    ``single_valued`` and ``structure`` describe what a constructor knows about
    the images; black-box operators leave them at their defaults.  The optional
    ``batch_support`` evaluates ``[A(y), xi_k]_+`` for the rows of a matrix at
    once and is only a speed-up.
    """

    dim: int
    support_oracle: SupportOracle
    selection_oracle: SelectionOracle
    norm_oracle: NormOracle
    name: str = "operator"
    single_valued: bool = False
    bounded_image: bool = True
    structure: str | None = None
    lipschitz: float | None = None
    batch_support: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DimensionError(f"dimension must be a positive integer, got {self.dim}")

    def _check(self, val: float) -> float:
        if math.isnan(val) or val == -math.inf:
            raise NonFiniteError(f"{self.name}: support oracle returned {val}")
        if val == math.inf and self.bounded_image:
            raise NonFiniteError(f"{self.name}: infinite support value for a bounded-image operator")
        return val

    def support_plus(self, y, xi) -> float:
        y = as_vector(y, self.dim, "y")
        xi = as_vector(xi, self.dim, "xi")
        if not xi.any():
            return 0.0
        return self._check(float(self.support_oracle(y, xi)))

    def support_minus(self, y, xi) -> float:
        """Lower support value, defined as ``-support_plus(y, -xi)``."""
        return -self.support_plus(y, -as_vector(xi, self.dim, "xi"))

    def support_many(self, y, Xi) -> np.ndarray:
        y = as_vector(y, self.dim, "y")
        Xi = as_points(Xi, self.dim, "directions")
        if self.batch_support is not None:
            vals = np.asarray(self.batch_support(y, Xi), dtype=float)
            vals = np.where(np.any(Xi != 0.0, axis=1), vals, 0.0)
        else:
            vals = np.array([self.support_oracle(y, xi) if xi.any() else 0.0 for xi in Xi], dtype=float)
        if np.isnan(vals).any() or (vals == -np.inf).any():
            raise NonFiniteError(f"{self.name}: support oracle returned NaN or -inf")
        if self.bounded_image and np.isinf(vals).any():
            raise NonFiniteError(f"{self.name}: infinite support value for a bounded-image operator")
        return vals

    def selection(self, y, hint=None) -> np.ndarray:
        y = as_vector(y, self.dim, "y")
        hint = np.zeros(self.dim) if hint is None else as_vector(hint, self.dim, "hint")
        w = np.asarray(self.selection_oracle(y, hint), dtype=float).reshape(self.dim)
        if not np.all(np.isfinite(w)):
            raise NonFiniteError(f"{self.name}: selection oracle returned non-finite values")
        return w

    def norms(self, y) -> tuple[float, float]:
        lo, hi = self.norm_oracle(as_vector(y, self.dim, "y"))
        return float(lo), float(hi)

    def norm_plus(self, y) -> float:
        """``sup ||d||`` over the image; ``inf`` signals an unbounded image."""
        return self.norms(y)[1]

    def norm_minus(self, y) -> float:
        return self.norms(y)[0]

    def __repr__(self):
        return f"SetValuedOperator({self.name!r}, dim={self.dim})"


# ---------------------------------------------------------------------------
# constructors


def single_valued(F: Callable[[np.ndarray], np.ndarray], dim: int, name: str = "map",
                  lipschitz: float | None = None, params: dict | None = None) -> SetValuedOperator:
    """Wrap a point-to-point map ``F`` as the operator ``y -> {F(y)}``."""

    def value(y):
        return np.asarray(F(y), dtype=float).reshape(dim)

    def norms(y):
        n = float(np.linalg.norm(value(y)))
        return n, n

    return SetValuedOperator(
        dim, lambda y, xi: float(value(y) @ xi), lambda y, h: value(y), norms,
        name=name, single_valued=True, structure="convex-compact", lipschitz=lipschitz,
        batch_support=lambda y, Xi: Xi @ value(y), params=params or {})


def linear(M, name: str = "linear") -> SetValuedOperator:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise DimensionError("linear operator needs a square matrix")
    M = frozen(M)
    return single_valued(lambda y: M @ y, M.shape[0], name=name,
                         lipschitz=float(np.linalg.norm(M, 2)), params={"matrix": M.tolist()})


def identity(dim: int) -> SetValuedOperator:
    return single_valued(lambda y: y, dim, name="identity", lipschitz=1.0)


def negative_identity(dim: int) -> SetValuedOperator:
    return single_valued(lambda y: -y, dim, name="negative-identity", lipschitz=1.0)


def rotation(angle: float = math.pi / 2) -> SetValuedOperator:
    """Planar rotation; monotone with zero margin when ``angle = pi/2``."""
    c, s = math.cos(angle), math.sin(angle)
    op = linear([[c, -s], [s, c]], name="rotation")
    return op


def constant(c) -> SetValuedOperator:
    c = frozen(as_vector(c))
    return single_valued(lambda y: c, c.shape[0], name="constant", lipschitz=0.0,
                         params={"value": c.tolist()})


def power_operator(dim: int, p: float) -> SetValuedOperator:
    """``y -> ||y||^(p-2) y`` (the duality map of ``L_p`` type growth)."""
    if p < 2:
        raise ValueError("power operator needs p >= 2")

    def F(y):
        n = np.linalg.norm(y)
        return y * n ** (p - 2) if n > 0 else np.zeros_like(y)

    return single_valued(F, dim, name=f"power-{p:g}", params={"p": p})


def cubic(dim: int) -> SetValuedOperator:
    return single_valued(lambda y: y ** 3, dim, name="cubic")


def box_operator(lower: Callable, upper: Callable, dim: int, name: str = "box",
                 params: dict | None = None) -> SetValuedOperator:
    """``A(y) = [lower(y), upper(y)]`` (coordinatewise box)."""

    def bounds(y):
        lo = np.asarray(lower(y), dtype=float).reshape(dim)
        hi = np.asarray(upper(y), dtype=float).reshape(dim)
        if np.any(lo > hi):
            raise InfeasibleError(f"{name}: empty box image")
        return lo, hi

    def support(y, xi):
        lo, hi = bounds(y)
        return float(np.sum(np.maximum(lo * xi, hi * xi)))

    def batch(y, Xi):
        lo, hi = bounds(y)
        return np.sum(np.maximum(lo * Xi, hi * Xi), axis=1)

    def select(y, h):
        lo, hi = bounds(y)
        return np.where(h > 0, hi, np.where(h < 0, lo, 0.5 * (lo + hi)))

    def norms(y):
        lo, hi = bounds(y)
        return (float(np.linalg.norm(np.clip(0.0, lo, hi))),
                float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))))

    return SetValuedOperator(dim, support, select, norms, name=name, structure="convex-compact",
                             batch_support=batch, params=params or {})


def constant_box(lo, hi) -> SetValuedOperator:
    lo, hi = frozen(as_vector(lo)), frozen(as_vector(hi))
    if lo.shape != hi.shape:
        raise DimensionError("box bounds differ in dimension")
    return box_operator(lambda y: lo, lambda y: hi, lo.shape[0], name="constant-box",
                        params={"lo": lo.tolist(), "hi": hi.tolist()})


def abs_subdifferential(dim: int) -> SetValuedOperator:
    """Subdifferential of the l1 norm: ``sign(y_i)``, or ``[-1, 1]`` where ``y_i = 0``."""

    def lower(y):
        return np.where(y > 0, 1.0, -1.0)

    def upper(y):
        return np.where(y < 0, -1.0, 1.0)

    return box_operator(lower, upper, dim, name="abs-subdifferential")


def ball_operator(center: Callable, radius: Callable, dim: int, name: str = "ball") -> SetValuedOperator:
    """``A(y) = closed ball B(center(y), radius(y))``."""

    def parts(y):
        c = np.asarray(center(y), dtype=float).reshape(dim)
        r = float(radius(y))
        if r < 0:
            raise InfeasibleError(f"{name}: negative radius")
        return c, r

    def support(y, xi):
        c, r = parts(y)
        return float(c @ xi + r * np.linalg.norm(xi))

    def batch(y, Xi):
        c, r = parts(y)
        return Xi @ c + r * np.linalg.norm(Xi, axis=1)

    def select(y, h):
        c, r = parts(y)
        n = np.linalg.norm(h)
        return c + r * h / n if n > 0 else c

    def norms(y):
        c, r = parts(y)
        nc = float(np.linalg.norm(c))
        return max(0.0, nc - r), nc + r

    return SetValuedOperator(dim, support, select, norms, name=name, structure="convex-compact",
                             batch_support=batch)


def finite_set(points: Callable, dim: int, name: str = "finite-set") -> SetValuedOperator:
    """``A(y)`` is the finite point set ``points(y)`` (rows)."""

    def pts(y):
        return as_points(points(y), dim, name)

    def support(y, xi):
        return float(np.max(pts(y) @ xi))

    def batch(y, Xi):
        return np.max(Xi @ pts(y).T, axis=1)

    def select(y, h):
        P = pts(y)
        if not h.any():
            return P.mean(axis=0)
        return P[int(np.argmax(P @ h))]

    def norms(y):
        n = np.linalg.norm(pts(y), axis=1)
        return float(n.min()), float(n.max())

    return SetValuedOperator(dim, support, select, norms, name=name, batch_support=batch)


def constant_finite_set(points) -> SetValuedOperator:
    P = frozen(as_points(points))
    op = finite_set(lambda y: P, P.shape[1], name="constant-finite-set")
    return op


def step_operator() -> SetValuedOperator:
    """Discontinuous map on R: ``{0}`` for ``y <= 0`` and ``{-1}`` for ``y > 0``."""
    return single_valued(lambda y: np.where(y > 0, -1.0, 0.0), 1, name="step")


def reciprocal() -> SetValuedOperator:
    """``{1/y}`` for ``y != 0`` and ``{0}`` at the origin; unbounded near 0."""
    return single_valued(lambda y: np.where(y != 0, 1.0 / np.where(y != 0, y, 1.0), 0.0), 1,
                         name="reciprocal")


def sum_operator(A: SetValuedOperator, B: SetValuedOperator) -> SetValuedOperator:
    """Minkowski sum ``y -> A(y) + B(y)``.

    Support values and selections add.  For multivalued summands the norm pair
    is the bracket ``(max(0, a_- - b_+, b_- - a_+), a_+ + b_+)``, which contains
    the true values.
    """
    if A.dim != B.dim:
        raise DimensionError(f"cannot add operators of dimension {A.dim} and {B.dim}")
    both_single = A.single_valued and B.single_valued

    def norms(y):
        if both_single:
            n = float(np.linalg.norm(A.selection(y) + B.selection(y)))
            return n, n
        a_lo, a_hi = A.norms(y)
        b_lo, b_hi = B.norms(y)
        return max(0.0, a_lo - b_hi, b_lo - a_hi), a_hi + b_hi

    batch = None
    if A.batch_support is not None and B.batch_support is not None:
        batch = lambda y, Xi: A.batch_support(y, Xi) + B.batch_support(y, Xi)  # noqa: E731
    lip = None if A.lipschitz is None or B.lipschitz is None else A.lipschitz + B.lipschitz
    structure = "convex-compact" if A.structure == B.structure == "convex-compact" else None
    return SetValuedOperator(
        A.dim,
        lambda y, xi: A.support_oracle(y, xi) + B.support_oracle(y, xi),
        lambda y, h: A.selection_oracle(y, h) + B.selection_oracle(y, h),
        norms,
        name=f"({A.name} + {B.name})",
        single_valued=both_single,
        bounded_image=A.bounded_image and B.bounded_image,
        structure=structure,
        lipschitz=lip,
        batch_support=batch,
    )


def scaled_operator(A: SetValuedOperator, c: float) -> SetValuedOperator:
    """``y -> c A(y)`` for a real ``c``."""
    c = float(c)

    def support(y, xi):
        return A.support_oracle(y, c * xi) if c else 0.0

    def norms(y):
        lo, hi = A.norms(y)
        return abs(c) * lo, abs(c) * hi

    return SetValuedOperator(
        A.dim, support, lambda y, h: c * A.selection_oracle(y, c * h), norms,
        name=f"{c:g}*{A.name}", single_valued=A.single_valued, bounded_image=A.bounded_image,
        structure=A.structure, lipschitz=None if A.lipschitz is None else abs(c) * A.lipschitz)


def subdifferential_operator(phi, samples: int = 20, t_max: float = 1e-2) -> SetValuedOperator:
    """Operator ``y -> ∂φ(y)`` built from difference quotients of ``φ``.

    ``[∂φ(y), ξ]_+`` is the directional derivative ``φ'(y; ξ)``.  It is
    estimated from above as the smallest one-sided quotient
    ``(φ(y + t u) - φ(y)) / t`` on the grid ``t = t_max 2^-k``,
    ``k < samples``, for the unit direction ``u = ξ / ||ξ||`` and then scaled
    by ``||ξ||`` so the estimate stays positively homogeneous.  Selections
    come from the subgradient oracle of ``φ``.
    """
    if samples < 1:
        raise ValueError("samples must be a positive integer")
    dim = phi.dim
    grid = t_max * 0.5 ** np.arange(samples)

    def base(y):
        v = phi.value(y)
        if math.isinf(v):
            raise InfeasibleError(f"y is outside dom {phi.name}")
        return v

    def support(y, xi):
        fy = base(y)
        m = float(np.max(np.abs(xi)))
        if m == 0.0:
            return 0.0
        # scale first so tiny directions do not underflow in the norm
        nxi = m * float(np.linalg.norm(xi / m))
        u = (xi / m) / (nxi / m)
        q = min((phi.value(y + t * u) - fy) / t for t in grid)
        return nxi * q

    def norms(y):
        eye = np.eye(dim)
        s = np.array([[support(y, e), support(y, -e)] for e in eye])
        hi = float(np.linalg.norm(np.max(np.abs(s), axis=1)))
        g = float(np.linalg.norm(phi.subgrad(y)))
        return min(g, hi), hi

    return SetValuedOperator(dim, support, lambda y, h: phi.subgrad(y), norms,
                             name=f"subdifferential({phi.name})",
                             bounded_image=not phi.restricted_domain,
                             structure="convex-compact")


# ---------------------------------------------------------------------------
# selections used by the solvers


def nearest_selection(A: SetValuedOperator, y: np.ndarray, target: np.ndarray,
                      max_rounds: int = 60) -> np.ndarray:
    """Point of ``co A(y)`` closest to ``target``.

    Fully corrective Frank-Wolfe: the selection oracle acts as the linear
    minimization oracle and the active generators are re-optimized exactly
    with :func:`~vimo.core.hull.nearest_in_hull`.  Finite for polytopal images.
    """
    if A.single_valued:
        return A.selection(y)
    gens = [A.selection(y, np.zeros(A.dim))]
    p = gens[0]
    for _ in range(max_rounds):
        d = target - p
        nd = float(d @ d)
        if nd <= 1e-30:
            break
        s = A.selection(y, d)
        if float((s - p) @ d) <= 1e-13 * (1.0 + nd):
            break
        gens.append(s)
        p = nearest_in_hull(np.array(gens), target)
    return p


def selection_battery(A: SetValuedOperator, y: np.ndarray) -> np.ndarray:
    """Selections for the hints ``0, ±e_i`` (rows, duplicates kept)."""
    eye = np.eye(A.dim)
    hints = np.vstack([np.zeros(A.dim), eye, -eye]) if not A.single_valued else np.zeros((1, A.dim))
    return np.array([A.selection(y, h) for h in hints])


def distance_to_image(A: SetValuedOperator, y: np.ndarray, target: np.ndarray) -> float:
    return float(np.linalg.norm(nearest_selection(A, y, target) - target))


__all__ = [
    "SetValuedOperator", "single_valued", "linear", "identity", "negative_identity", "rotation",
    "constant", "power_operator", "cubic", "box_operator", "constant_box", "abs_subdifferential",
    "ball_operator", "finite_set", "constant_finite_set", "step_operator", "reciprocal",
    "sum_operator", "scaled_operator", "subdifferential_operator", "nearest_selection",
    "selection_battery", "distance_to_image", "min_norm_point",
]
