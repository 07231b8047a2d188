"""Small exact convex-geometry kernels built on NNLS.

All routines reduce to least-distance programming (LDP),

    minimize ||x||  subject to  G x >= h,

which Lawson and Hanson solve exactly with one NNLS call.  The NNLS solver is
kept local because ``scipy.optimize.nnls`` (1.15) can stop at suboptimal
points.  Minimum-norm points of ``co{g_j} + cone{d_i}`` follow from the LDP dual.
"""

from __future__ import annotations

import numpy as np

_ZERO = 1e-13


def nnls(A: np.ndarray, b: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Lawson-Hanson active-set solver for ``min ||A x - b||, x >= 0``."""
    m, n = A.shape
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    AtA = A.T @ A
    Atb = A.T @ b
    if tol is None:
        tol = 10 * np.finfo(float).eps * max(m, n) * max(1.0, float(np.abs(AtA).max(initial=0.0)))
    max_iter = 3 * n + 30
    w = Atb - AtA @ x
    it = 0
    while (~passive).any() and w[~passive].max() > tol and it < max_iter:
        j = np.flatnonzero(~passive)[np.argmax(w[~passive])]
        passive[j] = True
        s = np.zeros(n)
        while True:
            it += 1
            s = np.zeros(n)
            idx = np.flatnonzero(passive)
            s[idx] = np.linalg.lstsq(A[:, idx], b, rcond=None)[0]
            if s[idx].min() > 0:
                break
            neg = idx[s[idx] <= 0]
            alpha = np.min(x[neg] / (x[neg] - s[neg]))
            x = x + alpha * (s - x)
            passive &= x > tol
            x[~passive] = 0.0
            if not passive.any():
                break
        if passive.any():
            x = s
        w = Atb - AtA @ x
    return x


def ldp(G: np.ndarray, h: np.ndarray) -> np.ndarray | None:
    """Solve ``min ||x|| s.t. G x >= h``; return ``None`` when infeasible."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float).ravel()
    m, n = G.shape
    if m == 0:
        return np.zeros(n)
    scale = max(1.0, float(np.max(np.abs(G))), float(np.max(np.abs(h))))
    E = np.vstack([G.T, h[None, :]]) / scale
    e = np.zeros(n + 1)
    e[-1] = 1.0
    u = nnls(E, e)
    r = E @ u - e
    if np.linalg.norm(r) <= _ZERO or abs(r[-1]) <= _ZERO:
        return None
    return -r[:n] / r[-1]


def min_norm_point(points: np.ndarray, cone: np.ndarray | None = None) -> np.ndarray:
    """Minimum-norm point of ``co(points) + cone(cone)``.

    Returns the zero vector when the origin belongs to the set.
    """
    Q = np.atleast_2d(np.asarray(points, dtype=float))
    n = Q.shape[1]
    if Q.shape[0] == 1 and (cone is None or len(cone) == 0):
        return Q[0].copy()
    G, h = Q, np.ones(Q.shape[0])
    if cone is not None and len(cone):
        D = np.atleast_2d(np.asarray(cone, dtype=float))
        G = np.vstack([Q, D])
        h = np.concatenate([h, np.zeros(D.shape[0])])
    x = ldp(G, h)
    if x is None:
        return np.zeros(n)
    nx = float(x @ x)
    if nx == 0.0:
        return np.zeros(n)
    return x / nx


def nearest_in_hull(points: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``target`` onto the convex hull of ``points``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    t = np.asarray(target, dtype=float)
    return t + min_norm_point(P - t)


def distance_to_hull_plus_cone(points, cone=None) -> float:
    """Distance from the origin to ``co(points) + cone(cone)``."""
    return float(np.linalg.norm(min_norm_point(points, cone)))


def unique_rows(P: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Deduplicate rows up to ``tol`` (sup norm) and sort them lexicographically."""
    P = np.atleast_2d(P)
    if P.shape[0] == 0:
        return P
    keep: list[np.ndarray] = []
    for row in P:
        if not any(np.max(np.abs(row - k)) <= tol for k in keep):
            keep.append(row)
    out = np.array(keep)
    order = np.lexsort(out.T[::-1])
    return out[order]
