"""Sampled checkers for the operator classes and the implications between them.

Every checker returns a :class:`ClassReport`.  Limit statements are decided
on finite geometric grids and sequence tails, so ``pass`` always means "no
violation on this evidence".  A ``fail`` carries a witness that
:func:`reverify` re-evaluates from scratch.

Tolerances: algebraic inequalities use ``ALGEBRAIC_TOL`` scaled by the size
of the compared terms; limit-based checks use ``LIMIT_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .core.functions import VariationModulus, zero_modulus
from .core.operators import SetValuedOperator
from .core.vectors import as_vector
from .errors import DimensionError, PreconditionError

ALGEBRAIC_TOL = 1e-9
LIMIT_TOL = 1e-6
VERDICTS = ("pass", "fail", "inconclusive")


@dataclass
class ClassReport:
    """Verdict of one sampled class check.

    ``margin`` is the worst slack observed (negative means violated),
    ``witness`` the data needed to reproduce a failure, ``details`` any
    per-check diagnostics.
    """

    check: str
    verdict: str
    margin: float
    samples_used: int
    witness: dict | None = None
    tolerance: float = ALGEBRAIC_TOL
    notes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "fail" and self.witness is None:
            raise ValueError("a failing report needs a witness")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_record(self) -> dict:
        return {
            "record": "class_report",
            "check": self.check,
            "verdict": self.verdict,
            "margin": _num(self.margin),
            "samples_used": int(self.samples_used),
            "tolerance": float(self.tolerance),
            "witness": _plain(self.witness),
            "notes": list(self.notes),
            "details": _plain(self.details),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ClassReport":
        if rec.get("record") != "class_report":
            raise ValueError("not a class_report record")
        return cls(check=rec["check"], verdict=rec["verdict"], margin=float(rec["margin"]),
                   samples_used=int(rec["samples_used"]), witness=rec.get("witness"),
                   tolerance=float(rec["tolerance"]), notes=list(rec.get("notes", [])),
                   details=rec.get("details", {}))

    def __eq__(self, other):
        if not isinstance(other, ClassReport):
            return NotImplemented
        return self.to_record() == other.to_record()


def _num(x):
    x = float(x)
    if math.isfinite(x):
        return x + 0.0    # drops the sign of zero
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _plain(obj):
    if obj is None:
        return None
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _arr(x):
    return np.array(x, dtype=float)


# ---------------------------------------------------------------------------
# sampling


def quasi_random(count: int, dim: int, seed: int = 0, radius: float = 1.0) -> np.ndarray:
    """``count`` scrambled Sobol points in ``[-radius, radius]^dim``."""
    if count < 1:
        raise ValueError("count must be positive")
    m = 1 << max(0, math.ceil(math.log2(count)))
    pts = qmc.Sobol(dim, scramble=True, seed=seed).random(m)[:count]
    return radius * (2.0 * pts - 1.0)


def sample_pairs(dim: int, count: int = 200, seed: int = 0, radius: float = 1.0) -> list:
    """Quasi-random pairs ``(y1, y2)`` in the cube of half-width ``radius``."""
    P = quasi_random(count, 2 * dim, seed, radius)
    return [(p[:dim], p[dim:]) for p in P]


def sample_triples(dim: int, count: int = 50, seed: int = 0, radius: float = 1.0) -> list:
    """Quasi-random ``(y, ξ, h)`` triples; points of the pair set ``y = 0`` are included."""
    P = quasi_random(count, 3 * dim, seed, radius)
    out = [(p[:dim], p[dim:2 * dim], p[2 * dim:]) for p in P]
    eye = np.eye(dim)
    for e in eye:    # kinks of the battery operators sit at the origin
        out.append((np.zeros(dim), e, e))
        out.append((np.zeros(dim), -e, e))
    return out


def compact_norm(weights=None) -> Callable[[np.ndarray], float]:
    """The weighted Euclidean norm standing in for the compact norm."""
    if weights is None:
        return lambda v: float(np.linalg.norm(v))
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return lambda v: float(np.sqrt(np.sum(w * np.asarray(v) ** 2)))


def _scaled_tol(tol, *vals):
    return tol * (1.0 + sum(abs(v) for v in vals if math.isfinite(v)))


# ---------------------------------------------------------------------------
# monotone and semi-bounded variation


def _variation_slack(A: SetValuedOperator, y1, y2):
    d = y1 - y2
    lhs = A.support_minus(y1, d)
    rhs = A.support_plus(y2, d)
    return lhs, rhs


def check_monotone(A: SetValuedOperator, pairs: Sequence, tol: float = ALGEBRAIC_TOL) -> ClassReport:
    """``[A(y1), y1-y2]_- >= [A(y2), y1-y2]_+`` on every pair."""
    return _variation_check(A, pairs, None, None, None, tol, "monotone")


def check_semibounded_variation(A: SetValuedOperator, C: VariationModulus, R: float, pairs: Sequence,
                                weights=None, tol: float = ALGEBRAIC_TOL) -> ClassReport:
    """``[A(y1), y1-y2]_- >= [A(y2), y1-y2]_+ - C(R, ||y1-y2||')`` on pairs in the ``R``-ball.

    The modulus is validated as well (vanishing slope and sampled
    continuity); an invalid ``C`` makes the report fail.

    Raises
    ------
    PreconditionError
        If a pair member lies outside the ball of radius ``R``.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    for y1, y2 in pairs:
        if np.linalg.norm(y1) > R * (1 + 1e-12) or np.linalg.norm(y2) > R * (1 + 1e-12):
            raise PreconditionError(f"pair member outside the ball of radius {R}")
    return _variation_check(A, pairs, C, R, weights, tol, "semibounded_variation")


def _modulus_valid(C: VariationModulus, r1s, r2s) -> tuple[bool, bool]:
    slope_ok = all(C.vanishing_slope(r1, r2, LIMIT_TOL) for r1 in r1s for r2 in r2s)
    return slope_ok, C.continuous_on(r1s, [0.0] + list(r2s))


def _variation_check(A, pairs, C, R, weights, tol, name):
    if len(pairs) == 0:
        raise PreconditionError("empty pair list")
    norm = compact_norm(weights)
    worst, wit = math.inf, None
    notes = []
    details = {}
    if C is not None:
        r1s, r2s = [0.5 * R, R], [0.1, 1.0, 2 * R]
        slope_ok, cont_ok = _modulus_valid(C, r1s, r2s)
        details.update({"modulus": C.description, "vanishing_slope": slope_ok, "continuous": cont_ok})
        if not (slope_ok and cont_ok):
            notes.append("variation modulus fails the vanishing-slope or continuity requirement")
            wit = {"modulus": C.description, "invalid_modulus": True, "r1": r1s, "r2": r2s}
            return ClassReport(name, "fail", -math.inf, 0, wit, tol, notes, details)
    for y1, y2 in pairs:
        y1, y2 = as_vector(y1, A.dim, "y1"), as_vector(y2, A.dim, "y2")
        lhs, rhs = _variation_slack(A, y1, y2)
        c = C(R, norm(y1 - y2)) if C is not None else 0.0
        slack = lhs - rhs + c
        scaled = slack / (1.0 + abs(lhs) + abs(rhs) + abs(c))
        if scaled < worst:
            worst = scaled
            wit = {"y1": y1, "y2": y2, "lhs": lhs, "rhs": rhs, "C": c, "slack": slack}
    verdict = "pass" if worst >= -tol else "fail"
    if name == "semibounded_variation":
        wit.update({"R": R, "weights": None if weights is None else list(weights)})
    return ClassReport(name, verdict, worst, len(pairs), wit if verdict == "fail" else None, tol,
                       notes + ["margin is the worst slack relative to the size of the compared terms"],
                       details)


# ---------------------------------------------------------------------------
# radial semi-continuity


def default_t_grid(levels: int = 60) -> np.ndarray:
    return 0.5 ** np.arange(1, levels + 1)


def check_radial_semicontinuity(A: SetValuedOperator, triples: Sequence, t_grid=None, weak: bool = False,
                                tol: float = LIMIT_TOL) -> ClassReport:
    """``liminf_{t -> +0} [A(y + t ξ), h]_+ >= [A(y), h]_-`` on a geometric grid.

    The liminf is the minimum over the second half of ``t_grid``.  With
    ``weak=True`` the direction ``h`` is forced to ``-ξ``.
    """
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise PreconditionError("empty t grid")
    if np.any(np.diff(t) >= 0) or t[-1] >= 1e-6 or t[0] <= 0:
        raise PreconditionError("t grid must decrease strictly from a positive value to below 1e-6")
    tail = t[len(t) // 2:]
    worst, wit = math.inf, None
    for y, xi, h in triples:
        y, xi = as_vector(y, A.dim, "y"), as_vector(xi, A.dim, "xi")
        h = -xi if weak else as_vector(h, A.dim, "h")
        vals = [A.support_plus(y + s * xi, h) for s in tail]
        lim = min(vals)
        ref = A.support_minus(y, h)
        slack = lim - ref
        if slack < worst:
            worst = slack
            wit = {"y": y, "xi": xi, "h": h, "t_tail": tail, "liminf": lim, "lower": ref, "weak": weak}
    verdict = "pass" if worst >= -tol else "fail"
    return ClassReport("radial_semicontinuity", verdict, worst, len(triples) * len(tail),
                       wit if verdict == "fail" else None, tol,
                       ["liminf taken as the minimum over the tail of the t grid"]
                       + (["weak variant with h = -xi"] if weak else []))


# ---------------------------------------------------------------------------
# coercivity


def coercivity_quotients(A: SetValuedOperator, y0, radii, directions, phi=None) -> np.ndarray:
    """``min_u ([A(r u), r u - y0]_- - φ(r u)) / r`` for each radius ``r``."""
    y0 = as_vector(y0, A.dim, "y0")
    out = []
    for r in radii:
        q = math.inf
        for u in directions:
            y = r * u
            val = A.support_minus(y, y - y0)
            if phi is not None:
                val -= phi.value(y)
            q = min(q, val / r)
        out.append(q)
    return np.array(out)


def _directions(dim: int, count: int, seed: int) -> np.ndarray:
    D = quasi_random(count, dim, seed) if count else np.zeros((0, dim))
    D = np.vstack([np.eye(dim), -np.eye(dim), D])
    n = np.linalg.norm(D, axis=1)
    return D[n > 1e-12] / n[n > 1e-12, None]


def _growth_rule(q: np.ndarray) -> tuple[bool, float]:
    """Strictly increasing with non-shrinking increments on a geometric grid."""
    if not np.all(np.isfinite(q)):
        return False, -math.inf
    inc = np.diff(q)
    if len(inc) == 0:
        return False, -math.inf
    margin = float(min(inc.min(), inc[-1] - inc[0]))
    return bool(np.all(inc > 0) and inc[-1] >= inc[0]), margin


def check_coercivity(A: SetValuedOperator, y0, radii=None, directions: int = 16, seed: int = 0,
                     phi=None) -> ClassReport:
    """Divergence of the normalized lower support value along rays.

    Passes when the sampled quotient increases strictly across ``radii`` and
    its increments do not shrink, i.e. it outgrows every level reached so
    far.  With ``phi`` the quotient subtracts ``φ(y)`` (the variant used for
    problems with a convex term).
    """
    radii = np.array([10.0 ** k for k in range(5)]) if radii is None else np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise PreconditionError("radii must be positive and strictly increasing")
    notes = []
    if radii[-1] < 1e3:
        notes.append("largest radius is below 1e3; divergence evidence is weak")
    U = _directions(A.dim, directions, seed)
    q = coercivity_quotients(A, y0, radii, U, phi)
    ok, margin = _growth_rule(q)
    wit = None
    if not ok:
        wit = {"y0": as_vector(y0, A.dim), "radii": radii, "quotients": q, "directions": U,
               "with_phi": phi is not None}
    return ClassReport("coercivity", "pass" if ok else "fail", margin, len(radii) * len(U), wit, LIMIT_TOL,
                       notes + ["quotient must increase with non-shrinking increments"],
                       {"radii": radii, "quotients": q})


# ---------------------------------------------------------------------------
# local boundedness and trajectories


@dataclass
class Trajectory:
    """Points ``y_j`` approaching ``limit`` with strictly decreasing gaps."""

    points: np.ndarray
    limit: np.ndarray
    selections: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.limit = np.asarray(self.limit, dtype=float).ravel()
        if self.points.shape[1] != self.limit.shape[0]:
            raise DimensionError("trajectory points and limit differ in dimension")
        gaps = np.linalg.norm(self.points - self.limit, axis=1)
        if len(gaps) < 2 or np.any(np.diff(gaps) >= 0):
            raise ValueError("trajectory gaps must decrease strictly")
        if gaps[-1] >= 1e-6:
            raise ValueError("final gap of a trajectory must be below 1e-6")
        if self.selections is not None:
            self.selections = np.atleast_2d(np.asarray(self.selections, dtype=float))
            if self.selections.shape != self.points.shape:
                raise DimensionError("selections must match the points")

    @classmethod
    def geometric(cls, limit, direction, ratio: float = 0.5, count: int = 40,
                  A: SetValuedOperator | None = None, hint=None) -> "Trajectory":
        """``y_j = limit + ratio^j direction``; selections from ``A`` if given."""
        limit = np.asarray(limit, dtype=float).ravel()
        d = np.asarray(direction, dtype=float).ravel()
        if not 0 < ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        pts = np.array([limit + ratio ** j * d for j in range(count)])
        sel = None
        if A is not None:
            sel = np.array([A.selection(p, hint) for p in pts])
        return cls(pts, limit, sel)

    def tail(self, fraction: float = 0.25) -> slice:
        m = len(self.points)
        k = max(3, int(math.ceil(fraction * m)))
        return slice(max(0, m - k), m)


def check_local_boundedness(A: SetValuedOperator, y, eps: float = 1e-2, probes: int = 64, seed: int = 0,
                            growth_cap: float = 1e6, shells: int = 30) -> ClassReport:
    """``sup ||A(ξ)||_+`` over the ``eps``-ball around ``y`` is finite.

    The ball is sampled by quasi-random points and by shells of radius
    ``eps 2^-k`` along the axes; an infinite value, or values beyond
    ``growth_cap * max(1, ||A(y)||_+)``, fail.
    """
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    y = as_vector(y, A.dim, "y")
    pts = [y + eps * p / max(1.0, np.linalg.norm(p)) for p in quasi_random(probes, A.dim, seed)]
    for k in range(shells):
        for e in np.vstack([np.eye(A.dim), -np.eye(A.dim)]):
            pts.append(y + eps * 0.5 ** k * e)
    base = A.norm_plus(y)
    cap = growth_cap * max(1.0, base if math.isfinite(base) else 1.0)
    M, arg = -math.inf, None
    for p in pts:
        v = A.norm_plus(p)
        if math.isnan(v):
            v = math.inf
        if v > M:
            M, arg = v, p
    ok = math.isfinite(base) and math.isfinite(M) and M <= cap
    wit = None if ok else {"y": y, "point": arg, "norm": M, "cap": cap, "eps": eps}
    return ClassReport("local_boundedness", "pass" if ok else "fail", cap - M, len(pts), wit, LIMIT_TOL,
                       ["bound M is the largest sampled norm"], {"M": M, "cap": cap})


def check_sequential_local_boundedness(A: SetValuedOperator, traj: Trajectory, growth_cap: float = 1e6
                                       ) -> ClassReport:
    """Uniform bound of ``||A(y_j)||_+`` on the tail of a trajectory."""
    tail = traj.points[traj.tail()]
    norms = np.array([A.norm_plus(p) for p in tail])
    first = norms[0] if math.isfinite(norms[0]) else math.inf
    cap = growth_cap * max(1.0, first)
    M = float(np.max(norms))
    ok = bool(np.all(np.isfinite(norms)) and M <= cap)
    j = int(np.argmax(norms))
    wit = None if ok else {"points": tail, "norms": norms, "index": j, "cap": cap}
    return ClassReport("sequential_local_boundedness", "pass" if ok else "fail",
                       cap - M if math.isfinite(M) else -math.inf, len(tail), wit, LIMIT_TOL,
                       ["bound checked on the final quarter of the trajectory"], {"M": M})


# ---------------------------------------------------------------------------
# pseudo-monotone surrogate


def check_pseudomonotone_surrogate(A: SetValuedOperator, traj: Trajectory, probe_dirs: Sequence,
                                   generalized: bool = False, tol: float = LIMIT_TOL,
                                   containment_dirs: int = 32, seed: int = 0) -> ClassReport:
    """Finite-tail surrogate of the pseudo-monotone limit condition.

    If ``max_tail <w_j, y_j - y> <= tol`` then for every probe ``v = y + d``
    the tail minimum of ``<w_j, y_j - v>`` must be at least
    ``[A(y), y - v]_- - tol``.  ``generalized=True`` checks instead that the
    selections converge to some ``w`` in ``co A(y)`` and that
    ``<w_j, y_j> -> <w, y>``.  A failed hypothesis makes the report
    inconclusive.
    """
    if traj.selections is None:
        raise PreconditionError("trajectory carries no selections")
    sl = traj.tail()
    Y, W, y = traj.points[sl], traj.selections[sl], traj.limit
    hyp = float(np.max(np.sum(W * (Y - y), axis=1)))
    details = {"hypothesis": hyp}
    if hyp > tol:
        return ClassReport("pseudomonotone_surrogate", "inconclusive", 0.0, len(Y), None, tol,
                           ["hypothesis limsup <w_j, y_j - y> <= 0 not met on the tail"], details)
    worst, wit = math.inf, None
    count = 0
    if not generalized:
        for d in probe_dirs:
            v = y + as_vector(d, A.dim, "probe direction")
            lhs = float(np.min(np.sum(W * (Y - v), axis=1)))
            rhs = A.support_minus(y, y - v)
            count += len(Y)
            slack = lhs - rhs
            if slack < worst:
                worst = slack
                wit = {"points": Y, "selections": W, "limit": y, "v": v, "liminf": lhs, "lower": rhs}
    else:
        w = W[-1]
        spread = float(np.max(np.linalg.norm(W[-3:] - w, axis=1)))
        inner = abs(float(W[-1] @ Y[-1]) - float(w @ y))
        U = _directions(A.dim, containment_dirs, seed)
        contain = min(A.support_plus(y, u) - float(w @ u) for u in U)
        count = len(Y) + len(U)
        worst = min(-spread, -inner, contain)
        details.update({"spread": spread, "inner_gap": inner, "containment": contain})
        wit = {"points": Y, "selections": W, "limit": y, "w": w, "directions": U}
    verdict = "pass" if worst >= -tol else "fail"
    return ClassReport("pseudomonotone_surrogate" + ("_generalized" if generalized else ""), verdict, worst,
                       count, wit if verdict == "fail" else None, tol,
                       ["conclusion tested against the lower support value of A(y)"], details)


# ---------------------------------------------------------------------------
# witnesses


def reverify(report: ClassReport, A: SetValuedOperator | None = None, C: VariationModulus | None = None,
             phi=None, **context) -> bool:
    """Re-evaluate a failing report's witness; ``True`` if the violation reproduces.

    Extra keyword ``context`` reaches checkers registered by other modules.
    """
    if report.verdict != "fail" or report.witness is None:
        return False
    fn = _REVERIFIERS.get(report.check)
    if fn is None:
        raise ValueError(f"no re-verifier for check {report.check!r}")
    return bool(fn(report, A=A, C=C, phi=phi, **context))


def _rv_variation(rep, A, C, **_):
    w = rep.witness
    if w.get("invalid_modulus"):
        return C is not None and not all(_modulus_valid(C, w["r1"], w["r2"]))
    y1, y2 = _arr(w["y1"]), _arr(w["y2"])
    lhs, rhs = _variation_slack(A, y1, y2)
    c = 0.0
    if rep.check == "semibounded_variation":
        c = C(float(w["R"]), compact_norm(w.get("weights"))(y1 - y2))
    return lhs - rhs + c < -_scaled_tol(rep.tolerance, lhs, rhs, c)


def _rv_radial(rep, A, **_):
    w = rep.witness
    y, xi, h = _arr(w["y"]), _arr(w["xi"]), _arr(w["h"])
    lim = min(A.support_plus(y + s * xi, h) for s in w["t_tail"])
    return lim - A.support_minus(y, h) < -rep.tolerance


def _rv_coercivity(rep, A, phi=None, **_):
    w = rep.witness
    q = coercivity_quotients(A, _arr(w["y0"]), _arr(w["radii"]), _arr(w["directions"]),
                             phi if w.get("with_phi") else None)
    return not _growth_rule(q)[0]


def _rv_local(rep, A, **_):
    w = rep.witness
    v = A.norm_plus(_arr(w["point"]))
    return not math.isfinite(v) or v > float(w["cap"])


def _rv_sequential(rep, A, **_):
    w = rep.witness
    norms = np.array([A.norm_plus(p) for p in _arr(w["points"])])
    return bool(np.any(~np.isfinite(norms)) or norms.max() > float(w["cap"]))


def _rv_pseudo(rep, A, **_):
    w = rep.witness
    Y, W, y = _arr(w["points"]), _arr(w["selections"]), _arr(w["limit"])
    if "v" in w:
        v = _arr(w["v"])
        return float(np.min(np.sum(W * (Y - v), axis=1))) - A.support_minus(y, y - v) < -rep.tolerance
    wl = _arr(w["w"])
    spread = float(np.max(np.linalg.norm(W[-3:] - wl, axis=1)))
    inner = abs(float(W[-1] @ Y[-1]) - float(wl @ y))
    contain = min(A.support_plus(y, u) - float(wl @ u) for u in _arr(w["directions"]))
    return min(-spread, -inner, contain) < -rep.tolerance


_REVERIFIERS: dict[str, Callable] = {
    "monotone": _rv_variation,
    "semibounded_variation": _rv_variation,
    "radial_semicontinuity": _rv_radial,
    "coercivity": _rv_coercivity,
    "local_boundedness": _rv_local,
    "sequential_local_boundedness": _rv_sequential,
    "pseudomonotone_surrogate": _rv_pseudo,
    "pseudomonotone_surrogate_generalized": _rv_pseudo,
}


def register_reverifier(check: str, fn: Callable) -> None:
    """Let other modules add re-verifiers for their own report kinds."""
    _REVERIFIERS[check] = fn


# ---------------------------------------------------------------------------
# implications


def implication_monotone_sbv(A: SetValuedOperator, pairs: Sequence, R: float | None = None) -> ClassReport:
    """Sampled check that passing the monotone test implies SBV with ``C = 0``."""
    mono = check_monotone(A, pairs)
    if R is None:
        R = max(max(np.linalg.norm(a), np.linalg.norm(b)) for a, b in pairs) * (1 + 1e-9) + 1e-12
    sbv = check_semibounded_variation(A, zero_modulus(), R, pairs)
    details = {"monotone": mono.verdict, "sbv_zero": sbv.verdict}
    if mono.verdict != "pass":
        return ClassReport("implication_monotone_sbv", "pass", 0.0, len(pairs), None, ALGEBRAIC_TOL,
                           ["premise (monotone) not met; implication holds vacuously"], details)
    ok = sbv.verdict == "pass"
    return ClassReport("implication_monotone_sbv", "pass" if ok else "fail", sbv.margin, 2 * len(pairs),
                       None if ok else sbv.witness, ALGEBRAIC_TOL, [], details)


@dataclass
class Battery:
    """Sample battery shared by the checkers of :func:`pseudomonotone_harness`."""

    pairs: list
    triples: list
    trajectories: list
    probe_dirs: np.ndarray
    R: float

    @classmethod
    def standard(cls, dim: int, seed: int = 0, pairs: int = 200, triples: int = 40, trajectories: int = 8,
                 radius: float = 1.0) -> "Battery":
        P = sample_pairs(dim, pairs, seed, radius)
        T = sample_triples(dim, triples, seed + 1, radius)
        limits = quasi_random(trajectories, dim, seed + 2, radius)
        dirs = quasi_random(trajectories, dim, seed + 3, 1.0)
        trajs = [(np.zeros(dim), np.eye(dim)[0])] + list(zip(limits, dirs))
        probe = np.vstack([np.eye(dim), -np.eye(dim), quasi_random(8, dim, seed + 4, 1.0)])
        R = radius * math.sqrt(dim) * (1 + 1e-9)
        return cls(P, T, trajs, probe, R)


def pseudomonotone_harness(A: SetValuedOperator, C: VariationModulus | None = None,
                        battery: Battery | None = None, seed: int = 0) -> ClassReport:
    """Radial semi-continuity and SBV imply the pseudo-monotone surrogate and local boundedness.

    Premises and conclusions are checked on one battery.  Unmet premises
    make the implication hold vacuously (``pass`` with a note); a met
    premise with a failed conclusion is a ``fail`` carrying that witness.
    """
    C = zero_modulus() if C is None else C
    b = Battery.standard(A.dim, seed) if battery is None else battery
    rad = check_radial_semicontinuity(A, b.triples)
    sbv = check_semibounded_variation(A, C, b.R, b.pairs)
    details = {"radial": rad.verdict, "sbv": sbv.verdict}
    if not (rad.passed and sbv.passed):
        return ClassReport("pseudomonotone_implication", "pass", 0.0, rad.samples_used + sbv.samples_used, None, LIMIT_TOL,
                           ["premises not met; implication holds vacuously"], details)
    conclusions = []
    for lim, d in b.trajectories:
        tr = Trajectory.geometric(lim, d, A=A)
        conclusions.append(check_pseudomonotone_surrogate(A, tr, b.probe_dirs))
        conclusions.append(check_pseudomonotone_surrogate(A, tr, b.probe_dirs, generalized=True))
        conclusions.append(check_sequential_local_boundedness(A, tr))
        conclusions.append(check_local_boundedness(A, lim, seed=seed))
    used = rad.samples_used + sbv.samples_used + sum(c.samples_used for c in conclusions)
    details["conclusions"] = {}
    for c in conclusions:
        details["conclusions"][c.check] = details["conclusions"].get(c.check, []) + [c.verdict]
    bad = [c for c in conclusions if c.verdict == "fail"]
    if bad:
        return ClassReport("pseudomonotone_implication", "fail", bad[0].margin, used,
                           {"conclusion": bad[0].check, **bad[0].witness}, LIMIT_TOL, [], details)
    margin = min(c.margin for c in conclusions if c.verdict == "pass")
    return ClassReport("pseudomonotone_implication", "pass", margin, used, None, LIMIT_TOL, [], details)


def standard_battery(dim: int = 2) -> list:
    """Constructor-built operators as ``(name, operator, modulus)`` triples.

    The modulus is one under which the operator has semi-bounded variation,
    or ``None`` when no admissible modulus is known (images with interior
    in more than one point, which no vanishing-slope ``C`` can absorb).
    """
    from .core import operators as ops
    from .core.functions import VariationModulus, hinge
    M = np.array([[2.0, 1.0], [0.0, 1.0]])[:dim, :dim]
    sq = VariationModulus(lambda r1, r2: r2 * r2, "C = r2^2", {"kind": "power", "exponent": 2.0, "scale": 1.0})
    zero = zero_modulus()
    return [
        ("identity", ops.identity(dim), zero),
        ("linear-psd", ops.linear(M if dim == 2 else np.eye(dim)), zero),
        ("rotation", ops.rotation() if dim == 2 else ops.identity(dim), zero),
        ("power-3", ops.power_operator(dim, 3.0), zero),
        ("cubic", ops.cubic(dim), zero),
        ("abs-subdifferential", ops.abs_subdifferential(dim), zero),
        ("abs+identity", ops.sum_operator(ops.abs_subdifferential(dim), ops.identity(dim)), zero),
        ("hinge-subdifferential", ops.subdifferential_operator(hinge(dim)), zero),
        ("negative-identity", ops.negative_identity(dim), sq),
        ("abs-identity", ops.sum_operator(ops.abs_subdifferential(dim), ops.negative_identity(dim)), sq),
        ("constant-box", ops.constant_box(-np.ones(dim), 2 * np.ones(dim)), None),
        ("ball", ops.ball_operator(lambda y: y, lambda y: 0.5, dim), None),
        ("finite-set", ops.finite_set(lambda y: np.vstack([y, 2 * y, -np.ones(dim)]), dim), None),
        ("constant-finite-set", ops.constant_finite_set(np.vstack([np.eye(dim), -np.eye(dim), np.ones(dim)])),
         None),
    ]
