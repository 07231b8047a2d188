"""Closed convex constraint sets with projection, support and cone queries."""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np
from scipy.optimize import brentq, linprog

from ..errors import DimensionError, InfeasibleError, PreconditionError
from .hull import ldp
from .vectors import as_points, as_vector, frozen

MEMBERSHIP_TOL = 1e-9


class ConvexSet:
    """Nonempty closed convex subset of R^n.

    Subclasses certify nonemptiness at construction and store a feasible
    ``witness``.  Instances are immutable by convention.
    """

    kind = "abstract"

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionError("dimension must be positive")
        self.dim = int(dim)

    # -- required interface
    def contains(self, y, tol: float = MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def project(self, y) -> np.ndarray:
        raise NotImplementedError

    def support(self, xi) -> float:
        raise NotImplementedError

    @property
    def witness(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_bounded(self) -> bool:
        raise NotImplementedError

    # -- optional interface
    def inequalities(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows ``(G, h)`` with ``K = {y : G y <= h}`` (polytope kinds only)."""
        raise PreconditionError(f"normal cones are only available for polytopes, not {self.kind}")

    @property
    def is_polytope(self) -> bool:
        return False

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return np.full(self.dim, -np.inf), np.full(self.dim, np.inf)

    def restrict(self, indices, anchor) -> "ConvexSet":
        """The slice ``{z : embed(z) in K}`` where off-index coordinates equal ``anchor``."""
        raise NotImplementedError(f"restriction is not defined for {self.kind}")

    def intersect_ball(self, radius: float, center=None) -> "ConvexSet":
        return BallIntersection(self, radius, center)

    def active_rows(self, y, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        G, h = self.inequalities()
        y = as_vector(y, self.dim)
        return np.flatnonzero(G @ y >= h - tol * np.maximum(1.0, np.abs(h)))

    def normal_cone_generators(self, y, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """Outward normals of the active constraints; their conic hull is ``N_K(y)``."""
        if not self.contains(y, tol):
            raise InfeasibleError("normal cone requested at a point outside the set")
        G, _ = self.inequalities()
        return G[self.active_rows(y, tol)]

    def in_tangent_cone(self, y, d, tol: float = MEMBERSHIP_TOL) -> bool:
        """``d`` lies in ``T_K(y)`` (polar of the normal cone)."""
        N = self.normal_cone_generators(y, tol)
        d = as_vector(d, self.dim)
        return bool(np.all(N @ d <= tol)) if len(N) else True

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class WholeSpace(ConvexSet):
    kind = "whole-space"

    def contains(self, y, tol=MEMBERSHIP_TOL):
        as_vector(y, self.dim)
        return True

    def project(self, y):
        return as_vector(y, self.dim).copy()

    def support(self, xi):
        xi = as_vector(xi, self.dim)
        return 0.0 if not xi.any() else math.inf

    @property
    def witness(self):
        return np.zeros(self.dim)

    @property
    def is_bounded(self):
        return False

    @property
    def is_polytope(self):
        return True

    def inequalities(self):
        return np.zeros((0, self.dim)), np.zeros(0)

    def restrict(self, indices, anchor):
        return WholeSpace(len(indices))


class Box(ConvexSet):
    """``{y : lo <= y <= hi}``; infinite bounds are allowed."""

    kind = "box"

    def __init__(self, lo, hi):
        lo = np.asarray(lo, dtype=float).ravel()
        hi = np.asarray(hi, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise DimensionError("box bounds differ in dimension")
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise ValueError("NaN box bound")
        if np.any(lo > hi) or np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise InfeasibleError("empty box")
        super().__init__(lo.shape[0])
        self.lo, self.hi = frozen(lo), frozen(hi)

    def contains(self, y, tol=MEMBERSHIP_TOL):
        y = as_vector(y, self.dim)
        return bool(np.all(y >= self.lo - tol) and np.all(y <= self.hi + tol))

    def project(self, y):
        return np.clip(as_vector(y, self.dim), self.lo, self.hi)

    def support(self, xi):
        xi = as_vector(xi, self.dim)
        pos = np.where(xi > 0, xi * self.hi, 0.0)
        neg = np.where(xi < 0, xi * self.lo, 0.0)
        return float(np.sum(pos) + np.sum(neg))

    @property
    def witness(self):
        return np.clip(np.zeros(self.dim), self.lo, self.hi)

    @property
    def is_bounded(self):
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    @property
    def is_polytope(self):
        return True

    def inequalities(self):
        eye = np.eye(self.dim)
        rows, rhs = [], []
        for i in range(self.dim):
            if np.isfinite(self.hi[i]):
                rows.append(eye[i])
                rhs.append(self.hi[i])
            if np.isfinite(self.lo[i]):
                rows.append(-eye[i])
                rhs.append(-self.lo[i])
        return np.array(rows).reshape(-1, self.dim), np.array(rhs)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def vertices(self) -> np.ndarray:
        if not self.is_bounded:
            raise PreconditionError("unbounded box has no vertex list")
        grids = np.array(np.meshgrid(*[[l, h] for l, h in zip(self.lo, self.hi)], indexing="ij"))
        return np.unique(grids.reshape(self.dim, -1).T, axis=0)

    def restrict(self, indices, anchor):
        idx = np.asarray(indices, dtype=int)
        return Box(self.lo[idx], self.hi[idx])

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class Ball(ConvexSet):
    kind = "ball"

    def __init__(self, center, radius: float):
        c = as_vector(center, name="center")
        if not radius >= 0:
            raise InfeasibleError("ball radius must be nonnegative")
        super().__init__(c.shape[0])
        self.center, self.radius = frozen(c), float(radius)

    def contains(self, y, tol=MEMBERSHIP_TOL):
        y = as_vector(y, self.dim)
        return bool(np.linalg.norm(y - self.center) <= self.radius + tol)

    def project(self, y):
        y = as_vector(y, self.dim)
        d = y - self.center
        n = np.linalg.norm(d)
        if n <= self.radius:
            return y.copy()
        return self.center + d * (self.radius / n)

    def support(self, xi):
        xi = as_vector(xi, self.dim)
        return float(self.center @ xi + self.radius * np.linalg.norm(xi))

    @property
    def witness(self):
        return self.center.copy()

    @property
    def is_bounded(self):
        return True

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def restrict(self, indices, anchor):
        idx = np.asarray(indices, dtype=int)
        off = np.setdiff1d(np.arange(self.dim), idx)
        anchor = as_vector(anchor, self.dim)
        r2 = self.radius ** 2 - float(np.sum((anchor[off] - self.center[off]) ** 2))
        if r2 < 0:
            raise InfeasibleError("restricted ball is empty")
        return Ball(self.center[idx], math.sqrt(r2))

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius:g})"


class Polytope(ConvexSet):
    """Halfspace polytope ``{y : G y <= h}``."""

    kind = "halfspace-polytope"

    def __init__(self, G, h):
        G = as_points(G, name="constraint rows")
        h = as_vector(h, G.shape[0], "right-hand side")
        super().__init__(G.shape[1])
        self.G, self.h = frozen(G), frozen(h)
        res = linprog(np.zeros(self.dim), A_ub=self.G, b_ub=self.h, bounds=[(None, None)] * self.dim,
                      method="highs")
        if res.status != 0:
            raise InfeasibleError("polytope is empty")
        self._witness = frozen(self.project(res.x))

    def contains(self, y, tol=MEMBERSHIP_TOL):
        y = as_vector(y, self.dim)
        return bool(np.all(self.G @ y <= self.h + tol * np.maximum(1.0, np.abs(self.h))))

    def project(self, y):
        y = as_vector(y, self.dim)
        if self.contains(y, 0.0):
            return y.copy()
        z = ldp(-self.G, self.G @ y - self.h)
        if z is None:
            raise InfeasibleError("projection onto an empty polytope")
        return y + z

    def support(self, xi):
        xi = as_vector(xi, self.dim)
        if not xi.any():
            return 0.0
        res = linprog(-xi, A_ub=self.G, b_ub=self.h, bounds=[(None, None)] * self.dim, method="highs")
        if res.status == 3:
            return math.inf
        return float(-res.fun)

    @property
    def witness(self):
        return self._witness.copy()

    @cached_property
    def _box(self):
        lo = np.array([-self.support(-e) for e in np.eye(self.dim)])
        hi = np.array([self.support(e) for e in np.eye(self.dim)])
        return lo, hi

    @property
    def is_bounded(self):
        lo, hi = self._box
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    @property
    def is_polytope(self):
        return True

    def inequalities(self):
        return self.G.copy(), self.h.copy()

    def bounding_box(self):
        lo, hi = self._box
        return lo.copy(), hi.copy()

    def restrict(self, indices, anchor):
        idx = np.asarray(indices, dtype=int)
        off = np.setdiff1d(np.arange(self.dim), idx)
        anchor = as_vector(anchor, self.dim)
        return Polytope(self.G[:, idx], self.h - self.G[:, off] @ anchor[off])


def dykstra(projections, y, max_iter: int = 5000, tol: float = 1e-13) -> np.ndarray:
    """Dykstra's alternating projection onto an intersection of convex sets."""
    x = np.array(y, dtype=float)
    incr = [np.zeros_like(x) for _ in projections]
    for _ in range(max_iter):
        x_old = x
        for i, P in enumerate(projections):
            z = P(x + incr[i])
            incr[i] = x + incr[i] - z
            x = z
        if np.linalg.norm(x - x_old) <= tol * max(1.0, np.linalg.norm(x)):
            break
    return x


class BallIntersection(ConvexSet):
    """``K ∩ B_R(center)``: the truncated sets used for coercive problems."""

    kind = "intersection-with-ball"

    def __init__(self, base: ConvexSet, radius: float, center=None):
        super().__init__(base.dim)
        center = np.zeros(base.dim) if center is None else as_vector(center, base.dim)
        self.base = base
        self.ball = Ball(center, radius)
        p = base.project(center)
        if np.linalg.norm(p - center) > radius + MEMBERSHIP_TOL:
            raise InfeasibleError("base set does not meet the ball")
        self._witness = frozen(p)

    @property
    def radius(self):
        return self.ball.radius

    def contains(self, y, tol=MEMBERSHIP_TOL):
        return self.base.contains(y, tol) and self.ball.contains(y, tol)

    def project(self, y):
        y = as_vector(y, self.dim)
        if isinstance(self.base, WholeSpace):
            return self.ball.project(y)
        if self.contains(y, 0.0):
            return y.copy()
        z = self.base.project(y)
        if self.ball.contains(z, 0.0):
            return z
        x = dykstra([self.base.project, self.ball.project], y)
        # land exactly inside the ball; base membership holds to Dykstra accuracy
        return self.ball.project(x)

    def support(self, xi):
        xi = as_vector(xi, self.dim)
        if not xi.any():
            return 0.0
        if isinstance(self.base, WholeSpace):
            return self.ball.support(xi)
        # maximize a linear function by projecting a far point (exact only asymptotically)
        far = self.ball.center + xi / np.linalg.norm(xi) * 1e6 * max(1.0, self.radius)
        return float(self.project(far) @ xi)

    @property
    def witness(self):
        return self._witness.copy()

    @property
    def is_bounded(self):
        return True

    def bounding_box(self):
        blo, bhi = self.base.bounding_box()
        clo, chi = self.ball.bounding_box()
        return np.maximum(blo, clo), np.minimum(bhi, chi)

    def restrict(self, indices, anchor):
        ball = self.ball.restrict(indices, anchor)
        return BallIntersection(self.base.restrict(indices, anchor), ball.radius, ball.center)


def prox_on_set(phi, K: ConvexSet, v, tau: float, max_iter: int = 2000) -> np.ndarray:
    """``argmin_{x in K} tau φ(x) + ||x - v||^2 / 2``.

    Exact when ``φ`` is zero, ``K`` is the whole space, or ``K`` is a box and
    ``φ`` separable (clip of the prox).  Otherwise the Dykstra-like proximal
    splitting of Bauschke and Combettes is iterated to convergence.
    """
    v = np.asarray(v, dtype=float)
    if phi is None or phi.is_zero:
        return K.project(v)
    if isinstance(K, WholeSpace):
        return phi.prox(v, tau)
    if isinstance(K, Box) and phi.separable:
        return K.project(phi.prox(v, tau))
    x = v.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iter):
        x_old = x
        y = phi.prox(x + p, tau)
        p = x + p - y
        x = K.project(y + q)
        q = y + q - x
        if np.linalg.norm(x - x_old) <= 1e-14 * max(1.0, np.linalg.norm(x)):
            break
    return x


class Epigraph(ConvexSet):
    """``{(y, mu) : y in K ∩ dom φ, mu >= φ(y)}`` in R^(n+1)."""

    kind = "epigraph"

    def __init__(self, base: ConvexSet, phi, witness=None):
        if phi.dim != base.dim:
            raise DimensionError("function and set differ in dimension")
        super().__init__(base.dim + 1)
        self.base, self.phi = base, phi
        w = base.witness if witness is None else as_vector(witness, base.dim)
        if not math.isfinite(phi.value(w)):
            w = prox_on_set(phi, base, w, 1.0)
        fw = phi.value(w)
        if not math.isfinite(fw):
            raise InfeasibleError("φ is identically +inf on K")
        self._witness = frozen(np.append(w, fw))

    def contains(self, z, tol=MEMBERSHIP_TOL):
        z = as_vector(z, self.dim)
        y, mu = z[:-1], z[-1]
        if not self.base.contains(y, tol):
            return False
        fy = self.phi.value(y)
        return math.isfinite(fy) and mu >= fy - tol * max(1.0, abs(fy))

    def _psi(self, x):
        return self.phi.value(x) if self.base.contains(x) else math.inf

    def project(self, z):
        z = as_vector(z, self.dim)
        v, s = z[:-1], z[-1]
        pv = self.base.project(v)
        if s >= self._psi(pv):
            return np.append(pv, s)

        # projection is (prox_{t ψ}(v), s + t) where ψ(prox_{t ψ}(v)) = s + t
        def gap(t):
            if t <= 0:
                return self._psi(pv) - s
            return self._psi(prox_on_set(self.phi, self.base, v, t)) - s - t

        lo, hi = 0.0, 1.0
        while gap(hi) > 0:
            lo, hi = hi, 2 * hi
            if hi > 1e12:
                raise InfeasibleError("epigraph projection failed to bracket")
        t = brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=300) if lo < hi else hi
        x = prox_on_set(self.phi, self.base, v, t)
        return np.append(x, max(s + t, self.phi.value(x)))

    def support(self, xi):
        raise NotImplementedError("support of an epigraph is not provided")

    @property
    def witness(self):
        return self._witness.copy()

    @property
    def is_bounded(self):
        return False
