"""Finite-difference Signorini problem on the unit interval or square.

The quasilinear form ``sum_ij ∫ a_ij(x, y, Dy) ∂_j y ∂_i ξ dx`` is
discretized edge by edge: every grid edge carries the flux
``q_e = (a(x_e, y_e, g_e) g_e)_axis`` of the gradient estimate ``g_e`` at
its midpoint, and

    <A_1(y), ξ> = sum_e ω_e q_e (ξ_q - ξ_p) / h,

with ``ω_e = 1/2`` on edges lying in the boundary of the square.  The
normalization divides the integral by the cell volume ``h^d``, so a unit
coefficient gives the Neumann Laplacian scaled by ``1/h^2`` and the load
becomes ``m ⊙ f`` with nodal mass fractions ``m``.

The optional set-valued part collects the nonsmooth ``y``-dependence of the
coefficients: ``A_2(y)`` is the nodal interval ``m Σ_ij [∂_y a_ij] ∂_i y ∂_j y``.

Contact acts on the boundary nodes only: ``K = {y : y_b >= 0 on Γ}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .classes import ClassReport, _growth_rule, quasi_random, register_reverifier
from .core.operators import SetValuedOperator, box_operator, single_valued, sum_operator
from .core.problem import VIMOProblem
from .core.sets import Box
from .core.vectors import as_vector
from .errors import InfeasibleError, PreconditionError
from .solver.extragradient import solve_extragradient
from .solver.report import SolveReport
from .solver.residual import witness_selection


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class GridConfig:
    """Uniform grid on ``[0, 1]^dimension`` with ``nodes_per_axis`` nodes per side."""

    dimension: int = 1
    nodes_per_axis: int = 17

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise PreconditionError("only 1D and 2D grids are supported")
        if self.nodes_per_axis < 3:
            raise PreconditionError("need at least 3 nodes per axis for a nonempty interior")

    @property
    def h(self) -> float:
        return 1.0 / (self.nodes_per_axis - 1)

    @property
    def shape(self) -> tuple:
        return (self.nodes_per_axis,) * self.dimension

    @property
    def size(self) -> int:
        return self.nodes_per_axis ** self.dimension

    def coordinates(self) -> np.ndarray:
        """Node coordinates, shape ``(size, dimension)``, row-major order."""
        t = np.linspace(0.0, 1.0, self.nodes_per_axis)
        mesh = np.meshgrid(*([t] * self.dimension), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def boundary_mask(self) -> np.ndarray:
        idx = np.indices(self.shape).reshape(self.dimension, -1)
        last = self.nodes_per_axis - 1
        return np.any((idx == 0) | (idx == last), axis=0)

    def boundary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.boundary_mask())

    def mass(self) -> np.ndarray:
        """Nodal volume fractions: 1 inside, 1/2 per boundary side touched."""
        idx = np.indices(self.shape).reshape(self.dimension, -1)
        last = self.nodes_per_axis - 1
        sides = np.sum((idx == 0) | (idx == last), axis=0)
        return 0.5 ** sides

    def edges(self):
        """``(p, q, axis, omega)`` for every edge ``p -> q = p + e_axis``."""
        N = self.nodes_per_axis
        idx = np.arange(self.size).reshape(self.shape)
        P, Q, AX, OM = [], [], [], []
        last = N - 1
        for ax in range(self.dimension):
            sl_p = [slice(None)] * self.dimension
            sl_q = [slice(None)] * self.dimension
            sl_p[ax], sl_q[ax] = slice(0, last), slice(1, N)
            p = idx[tuple(sl_p)].ravel()
            q = idx[tuple(sl_q)].ravel()
            om = np.ones(len(p))
            if self.dimension == 2:
                other = np.indices(self.shape)[1 - ax][tuple(sl_p)].ravel()
                om[(other == 0) | (other == last)] = 0.5
            P.append(p), Q.append(q), AX.append(np.full(len(p), ax)), OM.append(om)
        return np.concatenate(P), np.concatenate(Q), np.concatenate(AX), np.concatenate(OM)

    def gradient(self, y: np.ndarray) -> np.ndarray:
        """Nodal gradient by central (one-sided at the ends) differences, shape ``(size, d)``."""
        Y = y.reshape(self.shape)
        if self.dimension == 1:
            return np.gradient(Y, self.h)[:, None]
        g = np.gradient(Y, self.h)
        return np.stack([gi.ravel() for gi in g], axis=1)


# ---------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Coefficients ``a_ij(x, y, ξ)`` with the data of their growth conditions.

    ``a(x, y, xi)`` is vectorized: ``x`` has shape ``(m, d)``, ``y`` shape
    ``(m,)``, ``xi`` shape ``(m, d)`` and the result shape ``(m, d, d)``.
    ``da_dy`` (optional) returns the interval ``(lo, hi)`` of the
    subdifferential of ``a`` in ``y`` with the same shapes; it generates the
    set-valued part of the operator.
    """

    a: Callable
    p: float
    g: Callable
    k: tuple
    gamma: Callable
    dim: int
    da_dy: Callable | None = None
    name: str = "coefficients"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.p < 2:
            raise PreconditionError("growth exponent p must be at least 2")
        if len(self.k) != self.dim + 1 or any(v < 0 for v in self.k):
            raise PreconditionError("need nonnegative k_0..k_d")

    def bound(self, x, y, xi) -> np.ndarray:
        """``g(x) + k_0 |y|^(p-2) + sum_i k_i |ξ_i|^(p-2)``."""
        e = self.p - 2
        k = np.asarray(self.k, dtype=float)
        return (np.asarray(self.g(x), dtype=float) + k[0] * np.abs(y) ** e
                + np.sum(k[1:] * np.abs(xi) ** e, axis=1))


def default_coefficients(dim: int = 1, p: float = 2.0) -> CoefficientField:
    """``a_ij = δ_ij (1 + |y|^(p-2))``, ``g = 1``, ``k = 1``, ``γ(R) = R / d``.

    Only ``p = 2`` or ``p >= 3`` are accepted so that the ``y``-derivative of
    the coefficient stays locally bounded.
    """
    if not (p == 2 or p >= 3):
        raise PreconditionError("default coefficients need p = 2 or p >= 3")
    e = p - 2
    eye = np.eye(dim)

    def a(x, y, xi):
        return (1.0 + np.abs(y) ** e)[:, None, None] * eye

    def da_dy(x, y, xi):
        if e == 0:
            z = np.zeros((len(y), dim, dim))
            return z, z
        if e == 1:
            lo = np.where(y > 0, 1.0, -1.0)
            hi = np.where(y < 0, -1.0, 1.0)
        else:
            lo = hi = e * np.abs(y) ** (e - 1) * np.sign(y)
        return lo[:, None, None] * eye, hi[:, None, None] * eye

    return CoefficientField(a, p, lambda x: np.ones(len(x)), (1.0,) * (dim + 1), lambda R: R / dim, dim,
                            da_dy=da_dy, name=f"default(p={p:g})", params={"kind": "default", "p": p})


def constant_coefficients(dim: int = 1, value: float = 1.0, gamma: Callable | None = None) -> CoefficientField:
    """``a_ij = value δ_ij`` with ``g = value`` and ``γ(R) = value R / d`` unless given."""
    eye = np.eye(dim)
    gam = (lambda R: value * R / dim) if gamma is None else gamma
    return CoefficientField(lambda x, y, xi: np.full((len(y), 1, 1), value) * eye, 2.0,
                            lambda x: np.full(len(x), value), (0.0,) * (dim + 1), gam, dim,
                            name=f"constant({value:g})", params={"kind": "constant", "value": value})


# ---------------------------------------------------------------------------
# growth conditions


def _samples(dim, count, seed, scale=3.0):
    """Seeded ``(x, y, ξ)`` triples; magnitudes spread over ``10^-3 .. 10^scale``."""
    U = (quasi_random(count, 2 + 2 * dim, seed) + 1.0) / 2.0
    x = U[:, :dim]
    mag = 10.0 ** (-3.0 + (scale + 3.0) * U[:, dim:dim + 1 + dim])
    sgn = np.where(U[:, dim + 1 + dim:dim + 2 + dim] > 0.5, 1.0, -1.0)
    y = mag[:, 0] * sgn[:, 0]
    xi = mag[:, 1:] * np.where(np.arange(dim) % 2 == 0, sgn, -sgn)
    # exact zeros catch the degenerate cases of the conditions
    y[:4] = 0.0
    xi[:2] = 0.0
    return x, y, xi


def _x_jump(coeffs, x0, y, xi, axis, points=1025, depth=40):
    """Largest jump of ``a`` along the ``axis`` line through ``x0``, bisected to width ``2^-depth``.

    Returns ``(jump, allowed, x)`` with ``x`` the left end of the final interval.
    """
    t = np.linspace(0.0, 1.0, points)
    X = np.repeat(np.asarray(x0, dtype=float)[None], points, axis=0)
    X[:, axis] = t

    def val(Xs):
        m = len(Xs)
        return np.asarray(coeffs.a(Xs, np.repeat(y, m), np.repeat(xi, m, axis=0)), dtype=float)

    V = val(X)
    k = int(np.argmax(np.max(np.abs(np.diff(V, axis=0)), axis=(1, 2))))
    a, b = X[k].copy(), X[k + 1].copy()
    va, vb = V[k], V[k + 1]
    for _ in range(depth):
        mid = 0.5 * (a + b)
        vm = val(mid[None])[0]
        if np.max(np.abs(vm - va)) >= np.max(np.abs(vb - vm)):
            b, vb = mid, vm
        else:
            a, va = mid, vm
    jump = float(np.max(np.abs(vb - va)))
    return jump, 1e-5 * (1.0 + float(np.max(np.abs(va)))), a


def check_growth_conditions(coeffs: CoefficientField, samples: int = 200, seed: int = 0,
                            gamma_radii=None, tol: float = 1e-9) -> ClassReport:
    """Continuity in ``x``, the growth bound and the ellipticity/γ-divergence condition.

    Ellipticity is evaluated with ``R = sum_i |ξ_i|``; an ``R`` that also
    contains ``|y|`` fails at ``ξ = 0`` for every coefficient.  The
    divergence of ``γ`` uses the growth rule of the coercivity checker on a
    geometric ``R`` grid.
    """
    if samples < 1:
        raise PreconditionError("samples must be positive")
    d = coeffs.dim
    x, y, xi = _samples(d, samples, seed)
    A = np.asarray(coeffs.a(x, y, xi), dtype=float)
    details, wit = {}, None
    margins = []

    # 1. continuity in x: scan lines through the first samples along each axis,
    # then bisect the largest jump; a continuous coefficient's jump vanishes
    jumps = [_x_jump(coeffs, x[m], y[m:m + 1], xi[m:m + 1], ax)
             for m in range(min(samples, 16)) for ax in range(d)]
    k = int(np.argmax([j[0] - j[1] for j in jumps]))
    jump, lim, xj = jumps[k]
    m = k // d
    details["continuity"] = bool(all(jj <= ll for jj, ll, _ in jumps))
    margins.append(float(min(ll - jj for jj, ll, _ in jumps)))
    if not details["continuity"]:
        wit = {"condition": "continuity", "x": xj, "y": y[m], "xi": xi[m], "jump": jump}

    # 2. growth bound
    B = coeffs.bound(x, y, xi)
    excess = np.max(np.abs(A), axis=(1, 2)) - B
    j = int(np.argmax(excess))
    details["growth"] = bool(np.all(excess <= tol * (1.0 + B)))
    margins.append(float(-np.max(excess)))
    if not details["growth"] and wit is None:
        ij = np.unravel_index(int(np.argmax(np.abs(A[j]))), (d, d))
        wit = {"condition": "growth", "x": x[j], "y": y[j], "xi": xi[j], "i": int(ij[0]), "j": int(ij[1]),
               "value": float(A[j][ij]), "bound": float(B[j])}

    # 3a. divergence of γ
    radii = np.array([10.0 ** k for k in range(5)]) if gamma_radii is None else np.asarray(gamma_radii, float)
    gam = np.array([coeffs.gamma(r) for r in radii])
    ok, m = _growth_rule(gam)
    details["gamma_divergence"] = ok
    details["gamma"] = gam
    margins.append(m)
    if not ok and wit is None:
        wit = {"condition": "gamma_divergence", "radii": radii, "gamma": gam}

    # 3b. ellipticity against γ(R) R
    R = np.sum(np.abs(xi), axis=1)
    quad = np.einsum("mi,mij,mj->m", xi, A, xi)
    need = np.array([coeffs.gamma(r) * r for r in R])
    slack = quad - need
    j = int(np.argmin(slack))
    details["ellipticity"] = bool(np.all(slack >= -tol * (1.0 + np.abs(need))))
    margins.append(float(np.min(slack)))
    if not details["ellipticity"] and wit is None:
        wit = {"condition": "ellipticity", "x": x[j], "y": y[j], "xi": xi[j], "quadratic": quad[j],
               "required": need[j]}

    verdict = "pass" if wit is None else "fail"
    return ClassReport("growth_conditions", verdict, float(min(margins)), 3 * samples + len(radii), wit, tol,
                       ["ellipticity uses R = sum |xi_i|", "gamma must increase with non-shrinking increments"],
                       details)


def _rv_growth(report, coeffs=None, **_):
    w = report.witness
    if coeffs is None:
        raise ValueError("re-verifying a growth report needs the coefficient field")
    cond = w["condition"]
    if cond == "gamma_divergence":
        return not _growth_rule(np.array([coeffs.gamma(r) for r in w["radii"]]))[0]
    x = np.atleast_2d(np.asarray(w["x"], dtype=float))
    y = np.atleast_1d(np.asarray(w["y"], dtype=float))
    xi = np.atleast_2d(np.asarray(w["xi"], dtype=float))
    A = np.asarray(coeffs.a(x, y, xi), dtype=float)
    if cond == "growth":
        B = coeffs.bound(x, y, xi)
        return float(np.max(np.abs(A)) - B[0]) > report.tolerance * (1.0 + B[0])
    if cond == "ellipticity":
        r = float(np.sum(np.abs(xi)))
        need = coeffs.gamma(r) * r
        return float(xi[0] @ A[0] @ xi[0]) - need < -report.tolerance * (1.0 + abs(need))
    ax = int(np.argmax([_x_jump(coeffs, x[0], y, xi, i)[0] for i in range(x.shape[1])]))
    jump, lim, _ = _x_jump(coeffs, x[0], y, xi, ax)
    return jump > lim


register_reverifier("growth_conditions", _rv_growth)


# ---------------------------------------------------------------------------
# assembly


def _grid_function(f, grid: GridConfig) -> np.ndarray:
    X = grid.coordinates()
    if callable(f):
        return np.asarray(f(X), dtype=float).reshape(grid.size)
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.size, float(arr))
    return as_vector(arr.ravel(), grid.size, "f")


def assemble_operator(grid: GridConfig, coeffs: CoefficientField) -> SetValuedOperator:
    """Single-valued part ``A_1`` of the discrete operator."""
    if coeffs.dim != grid.dimension:
        raise PreconditionError("coefficient and grid dimensions differ")
    P, Q, AX, OM = grid.edges()
    X = grid.coordinates()
    Xe = 0.5 * (X[P] + X[Q])
    h = grid.h
    rows = np.arange(len(P))
    n = grid.size

    def F(y):
        G = grid.gradient(y)
        ge = 0.5 * (G[P] + G[Q])
        ge[rows, AX] = (y[Q] - y[P]) / h
        ye = 0.5 * (y[P] + y[Q])
        Ae = np.asarray(coeffs.a(Xe, ye, ge), dtype=float)
        q = np.einsum("mj,mj->m", Ae[rows, AX, :], ge) * OM / h
        out = np.zeros(n)
        np.add.at(out, Q, q)
        np.add.at(out, P, -q)
        return out

    return single_valued(F, n, name=f"signorini-a1[{coeffs.name}]", params={"grid": grid.shape})


def nonsmooth_part(grid: GridConfig, coeffs: CoefficientField) -> SetValuedOperator:
    """Set-valued part ``A_2(y) = m Σ_ij [∂_y a_ij] ∂_i y ∂_j y`` as a nodal box."""
    if coeffs.da_dy is None:
        raise PreconditionError("coefficient field has no y-subdifferential")
    X = grid.coordinates()
    m = grid.mass()

    def bounds(y):
        G = grid.gradient(y)
        lo, hi = coeffs.da_dy(X, y, G)
        s = G[:, :, None] * G[:, None, :]
        a, b = lo * s, hi * s
        return m * np.sum(np.minimum(a, b), axis=(1, 2)), m * np.sum(np.maximum(a, b), axis=(1, 2))

    return box_operator(lambda y: bounds(y)[0], lambda y: bounds(y)[1], grid.size,
                        name=f"signorini-a2[{coeffs.name}]")


@dataclass
class SignoriniInstance:
    problem: VIMOProblem
    boundary_index_set: np.ndarray
    grid: GridConfig
    coeffs: CoefficientField
    f_nodes: np.ndarray
    f_vec: np.ndarray
    include_nonsmooth: bool = False
    coefficient_report: ClassReport | None = None


def build_signorini_problem(grid: GridConfig, coeffs: CoefficientField, f, include_nonsmooth: bool | None = None,
                            check_samples: int = 200, seed: int = 0) -> SignoriniInstance:
    """Assemble the discrete inequality ``a_1(y, ξ-y) + [A_2(y), ξ-y]_+ >= <f, ξ-y>`` on ``K``.

    Parameters
    ----------
    grid : GridConfig
    coeffs : CoefficientField
    f : callable, scalar or array
        Load; callables receive node coordinates of shape ``(size, d)``.
    include_nonsmooth : bool, optional
        Add the set-valued part; defaults to whether ``coeffs.da_dy`` exists.

    Raises
    ------
    PreconditionError
        If the coefficient battery fails.
    """
    rep = check_growth_conditions(coeffs, check_samples, seed)
    if rep.verdict != "pass":
        raise PreconditionError(f"coefficient battery failed: {rep.witness}")
    A = assemble_operator(grid, coeffs)
    if include_nonsmooth is None:
        include_nonsmooth = coeffs.da_dy is not None
    if include_nonsmooth:
        A = sum_operator(A, nonsmooth_part(grid, coeffs))
    fn = _grid_function(f, grid)
    f_vec = grid.mass() * fn
    bnd = grid.boundary_mask()
    K = Box(np.where(bnd, 0.0, -np.inf), np.full(grid.size, np.inf))
    prob = VIMOProblem(A, f_vec, K, witness=np.zeros(grid.size), name=f"signorini-{grid.dimension}d")
    return SignoriniInstance(prob, grid.boundary_indices(), grid, coeffs, fn, f_vec, include_nonsmooth, rep)


def solve_signorini(inst: SignoriniInstance, tol: float = 1e-7, step: float = 0.1, max_iter: int = 50000,
                    seed: int = 0, y0=None) -> SolveReport:
    return solve_extragradient(inst.problem, y0, step=step, tol=tol, max_iter=max_iter, seed=seed)


# ---------------------------------------------------------------------------
# complementarity


def conormal_flux(inst: SignoriniInstance, y, w=None) -> np.ndarray:
    """Discrete conormal flux ``∂y/∂ν_A`` at the boundary nodes.

    The nodal balance ``w - m f`` of a boundary node is the flux through its
    share of ``Γ`` divided by ``h^(d-1)``; multiplying by ``h`` turns it into
    the flux density.  ``w`` defaults to the element of ``co A(y)`` closest to
    the load (the certified selection at a solution).
    """
    y = as_vector(y, inst.grid.size, "y")
    if w is None:
        w = witness_selection(inst.problem, y)
    return inst.grid.h * (w - inst.f_vec)[inst.boundary_index_set]


def verify_complementarity(inst: SignoriniInstance, y, tol: float = 1e-5) -> ClassReport:
    """``y >= 0``, ``∂y/∂ν_A >= 0`` and ``y ∂y/∂ν_A = 0`` at every boundary node, within ``tol``.

    Raises
    ------
    InfeasibleError
        If a boundary value is below ``-tol``.
    """
    y = as_vector(y, inst.grid.size, "y")
    b = inst.boundary_index_set
    yb = y[b]
    if np.any(yb < -tol):
        raise InfeasibleError("boundary values violate y >= 0")
    flux = conormal_flux(inst, y)
    prod = np.abs(yb * flux)
    slack = np.minimum(np.minimum(yb, flux), -prod)
    j = int(np.argmin(slack))
    margin = float(slack[j])
    ok = margin >= -tol
    X = inst.grid.coordinates()
    wit = None if ok else {"node": int(b[j]), "x": X[b[j]], "y": float(yb[j]), "flux": float(flux[j]),
                           "product": float(prod[j])}
    return ClassReport("complementarity", "pass" if ok else "fail", margin, len(b), wit, tol,
                       ["flux recovered from the nodal balance of the nearest selection"],
                       {"min_y": float(yb.min()), "min_flux": float(flux.min()), "max_product": float(prod.max())})


def _rv_complementarity(report, instance=None, y=None, **_):
    if instance is None or y is None:
        raise ValueError("re-verifying complementarity needs the instance and y")
    again = verify_complementarity(instance, y, report.tolerance)
    return again.verdict == "fail"


register_reverifier("complementarity", _rv_complementarity)


# ---------------------------------------------------------------------------
# grids and filters


def prolong(coarse: GridConfig, y, fine: GridConfig) -> np.ndarray:
    """Linear (bilinear in 2D) interpolation of a coarse grid function."""
    if coarse.dimension != fine.dimension:
        raise PreconditionError("grids differ in dimension")
    return _interpolate(coarse.nodes_per_axis, as_vector(y, coarse.size, "y"), fine)


def _interpolate(nc: int, y: np.ndarray, fine: GridConfig) -> np.ndarray:
    tc = np.linspace(0.0, 1.0, nc)
    if fine.dimension == 1:
        return np.interp(np.linspace(0.0, 1.0, fine.nodes_per_axis), tc, y)
    from scipy.interpolate import RegularGridInterpolator
    return RegularGridInterpolator((tc, tc), y.reshape(nc, nc))(fine.coordinates())


def coarse_bases(grid: GridConfig, strides=(8, 4, 2, 1)) -> list:
    """Interpolation matrices from the stride-``s`` subgrids to ``grid``."""
    N = grid.nodes_per_axis
    out = []
    for s in strides:
        if (N - 1) % s:
            raise PreconditionError(f"stride {s} does not divide {N - 1}")
        nc = (N - 1) // s + 1
        if nc < 2:
            raise PreconditionError(f"stride {s} leaves fewer than two nodes per axis")
        eye = np.eye(nc ** grid.dimension)
        out.append(np.stack([_interpolate(nc, e, grid) for e in eye], axis=1))
    return out


def node_filter(grid: GridConfig, strides=(8, 4, 2, 1)):
    """Galerkin chain of coarse-grid interpolants, finest last."""
    from .solver.galerkin import BasisFilter
    return BasisFilter(coarse_bases(grid, strides), grid.size)


def reflect(grid: GridConfig, y) -> np.ndarray:
    """Grid function mirrored in every axis."""
    Y = as_vector(y, grid.size, "y").reshape(grid.shape)
    return np.flip(Y).ravel()


def export_rows(inst: SignoriniInstance, y) -> list:
    """Rows ``(x..., y, flux)`` for CSV export; flux is blank off the boundary."""
    X = inst.grid.coordinates()
    flux = np.full(inst.grid.size, math.nan)
    flux[inst.boundary_index_set] = conormal_flux(inst, y)
    return [list(X[i]) + [float(y[i]), None if math.isnan(flux[i]) else float(flux[i])]
            for i in range(inst.grid.size)]


__all__ = [
    "GridConfig", "CoefficientField", "default_coefficients", "constant_coefficients",
    "check_growth_conditions", "build_signorini_problem", "SignoriniInstance", "assemble_operator",
    "nonsmooth_part", "solve_signorini", "conormal_flux", "verify_complementarity", "prolong",
    "node_filter", "reflect", "export_rows",
]
