"""Vector coercion and extended-real arithmetic.

Vectors are plain one-dimensional ``float64`` numpy arrays; the dual pairing
is the Euclidean inner product.  Functions that may take the value ``+inf``
follow these rules: ``inf - finite = inf``, ``finite - inf = -inf`` and
``inf - inf`` raises :class:`~vimo.errors.ExtendedRealError`.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DimensionError, ExtendedRealError, NonFiniteError


def as_vector(x, dim: int | None = None, name: str = "vector") -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float array, optionally of length ``dim``."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"{name} has non-finite coordinates")
    return v


def as_points(x, dim: int | None = None, name: str = "points") -> np.ndarray:
    """Coerce ``x`` to a finite ``(m, dim)`` array of row vectors."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 1:
        p = p.reshape(-1, 1) if dim == 1 else p.reshape(1, -1)
    if p.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D array of row vectors")
    if dim is not None and p.shape[1] != dim:
        raise DimensionError(f"{name} have dimension {p.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(p)):
        raise NonFiniteError(f"{name} contain non-finite coordinates")
    return p


def frozen(v: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``v``."""
    out = np.array(v, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def ext_sub(a: float, b: float) -> float:
    """Extended-real subtraction ``a - b`` on ``R ∪ {+inf}``."""
    if math.isnan(a) or math.isnan(b):
        raise ExtendedRealError("NaN is not an extended real")
    if math.isinf(a) and math.isinf(b):
        raise ExtendedRealError("inf - inf is undefined")
    return a - b


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v
