"""The quadruple ``(A, φ, K, f)`` and its restrictions to coordinate subspaces."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from ..errors import DimensionError, InfeasibleError, PreconditionError
from .functions import ProperConvexFunction, zero_function
from .operators import SetValuedOperator
from .sets import Box, ConvexSet, Polytope, WholeSpace, prox_on_set
from .vectors import as_vector, frozen


class VIMOProblem:
    """Find ``y in K ∩ dom φ`` with

        [A(y), ξ - y]_+ + φ(ξ) - φ(y) >= <f, ξ - y>   for all ξ in K ∩ dom φ.

    ``phi`` defaults to zero and ``K`` to the whole space.  A feasible witness
    is certified at construction (given, or found by a proximal projection).
    """

    def __init__(self, A: SetValuedOperator, f, K: ConvexSet | None = None,
                 phi: ProperConvexFunction | None = None, witness=None, name: str = "vimo"):
        self.A = A
        self.dim = A.dim
        self.f = frozen(as_vector(f, self.dim, "f"))
        self.K = WholeSpace(self.dim) if K is None else K
        self.phi = zero_function(self.dim) if phi is None else phi
        self.name = name
        if self.K.dim != self.dim or self.phi.dim != self.dim:
            raise DimensionError("operator, function, set and right-hand side must share one dimension")
        if witness is None:
            witness = self.K.witness
            if not self.feasible(witness):
                witness = self.prox_feasible(witness, 1.0)
        witness = as_vector(witness, self.dim, "witness")
        if not self.feasible(witness):
            raise InfeasibleError("dom φ ∩ K has no certified point")
        self.witness = frozen(witness)

    def feasible(self, y, tol: float = 1e-9) -> bool:
        y = as_vector(y, self.dim)
        return self.K.contains(y, tol) and math.isfinite(self.phi.value(y))

    def prox_feasible(self, v, tau: float) -> np.ndarray:
        """``argmin_{x in K} tau φ(x) + ||x - v||^2 / 2``."""
        return prox_on_set(self.phi, self.K, v, tau)

    def restrict(self, indices, anchor=None) -> "VIMOProblem":
        """Problem on the coordinate subspace ``indices``; other coordinates frozen at ``anchor``."""
        idx = np.asarray(sorted(set(int(i) for i in indices)), dtype=int)
        anchor = self.witness if anchor is None else as_vector(anchor, self.dim, "anchor")
        K = self.K.restrict(idx, anchor)
        A = restrict_operator(self.A, idx, anchor)
        phi = restrict_function(self.phi, idx, anchor)
        w = K.project(anchor[idx])
        sub = VIMOProblem(A, self.f[idx], K, phi, witness=w if _ok(K, phi, w) else None,
                          name=f"{self.name}|F")
        sub.indices = idx
        sub.anchor = frozen(anchor)
        return sub

    def restrict_basis(self, B) -> "VIMOProblem":
        """Problem on ``range(B)``: ``y = B z`` with ``z`` in ``{z : B z in K}``.

        Only ``φ = 0`` is supported.  The operator becomes ``z -> B^T A(B z)``
        and the load ``B^T f``.
        """
        if not self.phi.is_zero:
            raise PreconditionError("basis restriction needs phi = 0")
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[0] != self.dim:
            raise DimensionError("basis must have one row per coordinate")
        sub = VIMOProblem(basis_operator(self.A, B), B.T @ self.f, basis_set(self.K, B), name=f"{self.name}|B")
        sub.basis = frozen(B)
        return sub

    def embed(self, z, indices, anchor) -> np.ndarray:
        y = np.array(anchor, dtype=float)
        y[np.asarray(indices, dtype=int)] = z
        return y

    def __repr__(self):
        return f"VIMOProblem({self.name!r}, dim={self.dim}, A={self.A.name}, phi={self.phi.name}, K={self.K.kind})"


def _ok(K, phi, w) -> bool:
    return K.contains(w) and math.isfinite(phi.value(w))


def _embedder(indices, anchor):
    idx = np.asarray(indices, dtype=int)
    base = np.array(anchor, dtype=float)

    def embed(z):
        y = base.copy()
        y[idx] = z
        return y

    def embed_dir(z):
        y = np.zeros_like(base)
        y[idx] = z
        return y

    return idx, embed, embed_dir


def restrict_operator(A: SetValuedOperator, indices, anchor) -> SetValuedOperator:
    """``z -> I_F^* A(I_F z)`` with ``I_F`` the anchored coordinate embedding."""
    idx, embed, embed_dir = _embedder(indices, anchor)
    k = len(idx)

    def support(z, zeta):
        return A.support_oracle(embed(z), embed_dir(zeta))

    def select(z, h):
        return A.selection_oracle(embed(z), embed_dir(h))[idx]

    def norms(z):
        if A.single_valued:
            n = float(np.linalg.norm(select(z, np.zeros(k))))
            return n, n
        return 0.0, A.norms(embed(z))[1]

    batch = None
    if A.batch_support is not None:
        def batch(z, Z):
            full = np.zeros((Z.shape[0], A.dim))
            full[:, idx] = Z
            return A.batch_support(embed(z), full)

    return SetValuedOperator(k, support, select, norms, name=f"{A.name}|F", single_valued=A.single_valued,
                             bounded_image=A.bounded_image, structure=A.structure, lipschitz=A.lipschitz,
                             batch_support=batch)


def basis_operator(A: SetValuedOperator, B) -> SetValuedOperator:
    """``z -> B^T A(B z)``, with support ``[A(Bz), B ζ]_+``."""
    B = np.asarray(B, dtype=float)
    k = B.shape[1]

    def support(z, zeta):
        return A.support_oracle(B @ z, B @ zeta)

    def select(z, h):
        return B.T @ A.selection_oracle(B @ z, B @ h)

    def norms(z):
        if A.single_valued:
            n = float(np.linalg.norm(select(z, np.zeros(k))))
            return n, n
        return 0.0, float(np.linalg.norm(B, 2)) * A.norms(B @ z)[1]

    batch = None
    if A.batch_support is not None:
        def batch(z, Z):
            return A.batch_support(B @ z, Z @ B.T)

    return SetValuedOperator(k, support, select, norms, name=f"{A.name}|B", single_valued=A.single_valued,
                             bounded_image=A.bounded_image, structure=A.structure, batch_support=batch)


def basis_set(K: ConvexSet, B) -> ConvexSet:
    """``{z : B z in K}`` for the whole space, a box or a halfspace polytope.

    A box pulled back by a nonnegative interpolation basis (every column has
    a row equal to its unit vector) stays a box; otherwise the preimage is
    written as a polytope.
    """
    B = np.asarray(B, dtype=float)
    k = B.shape[1]
    if isinstance(K, WholeSpace):
        return WholeSpace(k)
    if isinstance(K, Box):
        unit = [np.flatnonzero(np.all(B == np.eye(k)[j], axis=1)) for j in range(k)]
        if np.all(B >= 0) and all(len(u) for u in unit):
            rows = np.array([u[0] for u in unit])
            lo, hi = K.lo[rows], K.hi[rows]
            with np.errstate(invalid="ignore"):
                low = np.where(B == 0, 0.0, B * lo).sum(axis=1)
                high = np.where(B == 0, 0.0, B * hi).sum(axis=1)
            if np.all(low >= K.lo) and np.all(high <= K.hi):
                return Box(lo, hi)
        G = np.vstack([B, -B])
        h = np.concatenate([K.hi, -K.lo])
        keep = np.isfinite(h)
        return Polytope(G[keep], h[keep]) if keep.any() else WholeSpace(k)
    if K.is_polytope:
        G, h = K.inequalities()
        return Polytope(G @ B, h)
    raise PreconditionError(f"cannot pull back a {K.kind} set through a basis")


def restrict_function(phi: ProperConvexFunction, indices, anchor) -> ProperConvexFunction:
    """``z -> φ(I_F z)``; the prox is exact for separable ``φ``, numerical otherwise."""
    if phi.is_zero:
        return zero_function(len(indices))
    idx, embed, _ = _embedder(indices, anchor)

    if phi.separable:
        def prox(z, t):
            return phi.prox(embed(z), t)[idx]
    else:
        def prox(z, t):
            obj = lambda x: phi.value(embed(x)) + float((x - z) @ (x - z)) / (2 * t)  # noqa: E731
            return minimize(obj, z, method="Powell", options={"xtol": 1e-12, "ftol": 1e-14}).x

    return ProperConvexFunction(len(idx), lambda z: phi.value(embed(z)), lambda z: phi.subgrad(embed(z))[idx],
                                prox, name=f"{phi.name}|F", separable=phi.separable,
                                restricted_domain=phi.restricted_domain, params=dict(phi.params))
