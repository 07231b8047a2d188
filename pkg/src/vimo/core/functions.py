"""Proper convex lower semi-continuous functions and variation moduli."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DimensionError, NonConvexError
from .vectors import as_vector, frozen


@dataclass(frozen=True, eq=False)
class ProperConvexFunction:
    """A convex ``φ: R^n -> R ∪ {+inf}`` given by value, subgradient and prox oracles.

    ``prox(y, tau)`` is ``argmin_x φ(x) + ||x - y||^2 / (2 tau)``.
    ``separable`` marks functions of the form ``sum_i φ_i(y_i)``; for those
    the prox acts coordinatewise, which the solvers use to restrict to
    coordinate subspaces and to combine with box constraints exactly.
    """

    dim: int
    value_oracle: Callable[[np.ndarray], float]
    subgrad_oracle: Callable[[np.ndarray], np.ndarray]
    prox_oracle: Callable[[np.ndarray, float], np.ndarray]
    name: str = "phi"
    separable: bool = False
    restricted_domain: bool = False
    params: dict = field(default_factory=dict)

    def value(self, y) -> float:
        return float(self.value_oracle(as_vector(y, self.dim, "y")))

    def subgrad(self, y) -> np.ndarray:
        return np.asarray(self.subgrad_oracle(as_vector(y, self.dim, "y")), dtype=float).reshape(self.dim)

    def prox(self, y, tau: float) -> np.ndarray:
        if tau <= 0:
            raise ValueError("prox parameter must be positive")
        return np.asarray(self.prox_oracle(as_vector(y, self.dim, "y"), float(tau)), dtype=float).reshape(self.dim)

    @property
    def is_zero(self) -> bool:
        return self.params.get("kind") == "zero"

    def in_domain(self, y) -> bool:
        return math.isfinite(self.value(y))


def zero_function(dim: int) -> ProperConvexFunction:
    return ProperConvexFunction(dim, lambda y: 0.0, lambda y: np.zeros_like(y), lambda y, t: y.copy(),
                                name="zero", separable=True, params={"kind": "zero"})


def l1_norm(dim: int, weight: float = 1.0) -> ProperConvexFunction:
    """``weight * ||y||_1``; its prox is soft thresholding."""
    if weight < 0:
        raise NonConvexError("l1 weight must be nonnegative")
    return ProperConvexFunction(
        dim,
        lambda y: weight * float(np.sum(np.abs(y))),
        lambda y: weight * np.sign(y),
        lambda y, t: np.sign(y) * np.maximum(np.abs(y) - weight * t, 0.0),
        name="l1", separable=True, params={"kind": "l1", "weight": weight})


def half_squared_norm(dim: int, weight: float = 1.0) -> ProperConvexFunction:
    if weight < 0:
        raise NonConvexError("weight must be nonnegative")
    return ProperConvexFunction(
        dim,
        lambda y: 0.5 * weight * float(y @ y),
        lambda y: weight * y,
        lambda y, t: y / (1.0 + weight * t),
        name="half-squared", separable=True, params={"kind": "half_squared", "weight": weight})


def hinge(dim: int, weight: float = 1.0) -> ProperConvexFunction:
    """``weight * sum_i max(0, y_i)``."""
    if weight < 0:
        raise NonConvexError("weight must be nonnegative")

    def prox(y, t):
        return np.where(y > weight * t, y - weight * t, np.where(y < 0, y, 0.0))

    return ProperConvexFunction(
        dim,
        lambda y: weight * float(np.sum(np.maximum(y, 0.0))),
        lambda y: weight * (y > 0).astype(float),
        prox, name="hinge", separable=True, params={"kind": "hinge", "weight": weight})


def box_indicator(lo, hi) -> ProperConvexFunction:
    """Indicator of ``[lo, hi]``: ``0`` inside, ``+inf`` outside."""
    lo, hi = frozen(as_vector(lo)), frozen(as_vector(hi))
    if lo.shape != hi.shape:
        raise DimensionError("bounds differ in dimension")
    if np.any(lo > hi):
        raise ValueError("empty box")

    def value(y):
        return 0.0 if np.all(y >= lo - 1e-12) and np.all(y <= hi + 1e-12) else math.inf

    return ProperConvexFunction(
        lo.shape[0], value, lambda y: np.zeros_like(y), lambda y, t: np.clip(y, lo, hi),
        name="box-indicator", separable=True, restricted_domain=True,
        params={"kind": "box_indicator", "lo": lo.tolist(), "hi": hi.tolist()})


def convexity_violations(phi: ProperConvexFunction, samples: int = 64, seed: int = 0,
                         radius: float = 2.0) -> dict:
    """Worst sampled violations of the convexity, subgradient and prox invariants.

    Returns nonnegative numbers; zero means no violation was observed.
    """
    rng = np.random.default_rng(seed)
    worst = {"convexity": 0.0, "subgradient": 0.0, "prox": 0.0}
    for _ in range(samples):
        a = rng.uniform(-radius, radius, phi.dim)
        b = rng.uniform(-radius, radius, phi.dim)
        lam = rng.uniform()
        fa, fb = phi.value(a), phi.value(b)
        if math.isfinite(fa) and math.isfinite(fb):
            fm = phi.value(lam * a + (1 - lam) * b)
            worst["convexity"] = max(worst["convexity"], fm - (lam * fa + (1 - lam) * fb))
            g = phi.subgrad(a)
            worst["subgradient"] = max(worst["subgradient"], fa + g @ (b - a) - fb)
        tau = rng.uniform(0.1, 1.0)
        p = phi.prox(a, tau)
        fp = phi.value(p)
        if math.isfinite(fp) and math.isfinite(fb):
            # (a - p)/tau must be a subgradient at p
            g = (a - p) / tau
            worst["prox"] = max(worst["prox"], fp + g @ (b - p) - fb)
    return worst


def from_callables(dim: int, value, subgrad, prox, name: str = "custom", separable: bool = False,
                   tol: float = 1e-9, samples: int = 64, seed: int = 0) -> ProperConvexFunction:
    """Build a function from user oracles, rejecting it if sampled convexity fails."""
    phi = ProperConvexFunction(dim, value, subgrad, prox, name=name, separable=separable,
                               params={"kind": "custom"})
    bad = convexity_violations(phi, samples=samples, seed=seed)
    if bad["convexity"] > tol:
        raise NonConvexError(f"{name} failed the sampled convexity test (violation {bad['convexity']:.3g})")
    return phi


@dataclass(frozen=True, eq=False)
class VariationModulus:
    """The function ``C(r1, r2)`` bounding the defect from monotonicity.

    It must be continuous with ``C(r1, tau r2) / tau -> 0`` as ``tau -> 0``.
    """

    eval: Callable[[float, float], float]
    description: str = ""
    params: dict = field(default_factory=dict)

    def __call__(self, r1: float, r2: float) -> float:
        return float(self.eval(r1, r2))

    def slope_sequence(self, r1: float, r2: float, levels: int = 60) -> np.ndarray:
        """``C(r1, 2^-k r2) 2^k`` for ``k = 0 .. levels-1``."""
        return np.array([self(r1, r2 * 0.5 ** k) * 2.0 ** k for k in range(levels)])

    def vanishing_slope(self, r1: float, r2: float, tol: float = 1e-6, levels: int = 60) -> bool:
        seq = self.slope_sequence(r1, r2, levels)
        if not np.all(np.isfinite(seq)):
            return False
        return bool(np.all(np.abs(seq[-5:]) <= tol))

    def continuous_on(self, r1s, r2s, tol: float = 1e-6) -> bool:
        """Sampled continuity: small perturbations of the arguments move the value little."""
        for r1 in r1s:
            for r2 in r2s:
                base = self(r1, r2)
                if not math.isfinite(base):
                    return False
                near = self(r1 + 1e-10, r2 + 1e-10)
                if abs(near - base) > tol * max(1.0, abs(base)):
                    return False
        return True


def zero_modulus() -> VariationModulus:
    return VariationModulus(lambda r1, r2: 0.0, "C = 0", {"kind": "zero"})


def power_modulus(exponent: float, scale: float = 1.0) -> VariationModulus:
    """``C(r1, r2) = scale * r2^exponent``; admissible only for ``exponent > 1``."""
    return VariationModulus(lambda r1, r2: scale * r2 ** exponent, f"C = {scale:g} r2^{exponent:g}",
                            {"kind": "power", "exponent": exponent, "scale": scale})
