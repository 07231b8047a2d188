import numpy as np
import pytest

from batteries import box_instance, phi_battery
from oracles import box_gap
from vimo.core import (Box, VIMOProblem, WholeSpace, abs_subdifferential, constant, cubic, identity, l1_norm,
                       linear, rotation)
from vimo.errors import InfeasibleError, PreconditionError
from vimo.solver import (BasisFilter, GalerkinFilter, SolveReport, aux_defect, auxiliary_map, certify,
                         epigraph_lift, homotopy_solve, probe_batch, residual,
                         solve_extragradient, solve_galerkin, solve_inclusion, solve_lifted, solve_truncated,
                         unlift)

TOL = 1e-7


def projection_problem():
    return VIMOProblem(identity(2), [2.0, 0.5], Box([0, 0], [1, 1]))


# ---------------------------------------------------------------------------
# residual


def test_residual_worked_examples():
    p = projection_problem()
    probes = probe_batch(p, [1.0, 0.5])
    assert residual(p, [1.0, 0.5], probes) == pytest.approx(0.0, abs=1e-12)
    assert residual(p, [0.0, 0.5], [[1.0, 0.5]]) >= 1.0
    q = VIMOProblem(abs_subdifferential(1), [0.5])
    assert residual(q, [0.0], np.linspace(-2, 2, 41)[:, None]) == 0.0


def test_residual_is_nonnegative_and_rejects_infeasible():
    p = projection_problem()
    assert residual(p, [0.3, 0.3], [[0.3, 0.3]]) == 0.0
    with pytest.raises(InfeasibleError):
        residual(p, [2.0, 0.0], [[0.5, 0.5]])


@pytest.mark.parametrize("seed", range(6))
def test_probe_residual_is_bounded_by_closed_form_gap(seed):
    # probes lie in K, so the probe residual is a lower bound of the exact gap over K
    p, lower, upper, f, lo, hi = box_instance(seed)
    rng = np.random.default_rng(seed)
    for y in rng.uniform(lo, hi, (5, 2)):
        r = certify(p, y, seed=seed)
        g = box_gap(lower, upper, f, lo, hi, y[None])[0]
        assert -1e-12 <= r <= g + 1e-9


def test_probe_batch_is_feasible_and_seeded():
    p = projection_problem()
    P1, P2 = probe_batch(p, seed=3), probe_batch(p, seed=3)
    assert np.array_equal(P1, P2)
    assert all(p.K.contains(x, 1e-12) for x in P1)
    assert not np.array_equal(P1, probe_batch(p, seed=4))


# ---------------------------------------------------------------------------
# extragradient


def test_extragradient_worked_examples():
    r1 = solve_extragradient(projection_problem(), tol=TOL)
    assert r1.converged and np.allclose(r1.y, [1.0, 0.5], atol=1e-6)
    r2 = solve_extragradient(VIMOProblem(abs_subdifferential(1), [0.5]), [1.0], tol=TOL)
    assert r2.converged and abs(r2.y[0]) <= 1e-6
    r3 = solve_extragradient(VIMOProblem(identity(1), [2.0], phi=l1_norm(1)), tol=TOL)
    assert r3.converged and r3.y[0] == pytest.approx(1.0, abs=1e-6)


def test_converged_report_invariants():
    p = projection_problem()
    rep = solve_extragradient(p, tol=TOL)
    assert rep.residual <= TOL
    # witness certifies the solution on sampled feasible points
    xi = probe_batch(p, rep.y, seed=11)
    lhs = (xi - rep.y) @ rep.witness_w
    rhs = (xi - rep.y) @ p.f
    assert np.all(lhs >= rhs - TOL)
    # the witness lies in co A(y)
    for d in np.random.default_rng(0).normal(size=(50, 2)):
        assert d @ rep.witness_w <= p.A.support_plus(rep.y, d) + 1e-9


def test_max_iter_reported():
    rep = solve_extragradient(VIMOProblem(constant([1.0]), [0.0]), [0.0], tol=TOL, max_iter=30)
    assert rep.status == "max_iter"
    assert len(rep.trace) >= 1


@pytest.mark.parametrize("seed", range(8))
def test_monotone_battery_converges_and_certifies(seed):
    p, *_ = box_instance(seed)
    rep = solve_extragradient(p, tol=TOL, seed=seed)
    assert rep.converged
    assert min(r for _, r in rep.trace) <= TOL or rep.residual <= TOL
    assert certify(p, rep.y, seed=1000 + seed) <= 2 * TOL


def test_rotation_plus_identity_is_solved():
    # monotone but not symmetric; solution of y + Ry = f is (I + R)^-1 f
    M = np.array([[1.0, -1.0], [1.0, 1.0]])
    f = np.array([1.0, 2.0])
    rep = solve_extragradient(VIMOProblem(linear(M), f), tol=TOL)
    assert np.allclose(rep.y, np.linalg.solve(M, f), atol=1e-6)
    assert rotation().support_plus([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)


def test_multistart_agreement():
    p, *_ = box_instance(4)
    lo, hi = p.K.bounding_box()
    ys = [solve_extragradient(p, y0, tol=TOL).y for y0 in (lo, hi, (lo + hi) / 2)]
    for y in ys[1:]:
        assert np.linalg.norm(y - ys[0]) <= 1e-6


def test_report_round_trip():
    rep = solve_extragradient(projection_problem(), tol=TOL)
    assert SolveReport.from_record(rep.to_record()) == rep


# ---------------------------------------------------------------------------
# epigraph lift


def test_lift_membership_and_right_side():
    lp = epigraph_lift(VIMOProblem(identity(1), [2.0], phi=l1_norm(1)))
    assert lp.lifted_dim == 2
    assert lp.contains([1.0, 1.0]) and not lp.contains([1.0, 0.5])
    assert lp.lifted.f.tolist() == [2.0, -1.0]


def test_lift_matches_direct_on_shrinkage():
    p = VIMOProblem(identity(1), [2.0], phi=l1_norm(1))
    rep = solve_lifted(p, tol=TOL)
    assert rep.converged and rep.y[0] == pytest.approx(1.0, abs=1e-6)
    assert rep.y[0] == pytest.approx(solve_extragradient(p, tol=TOL).y[0], abs=10 * TOL)


@pytest.mark.parametrize("name,problem,known", phi_battery(), ids=[b[0] for b in phi_battery()])
def test_lift_and_direct_agree(name, problem, known):
    direct = solve_extragradient(problem, tol=TOL)
    lifted = solve_lifted(problem, tol=TOL)
    assert direct.converged and lifted.converged
    assert np.linalg.norm(direct.y - lifted.y) <= 10 * TOL
    assert lifted.info["mu_gap"] <= 1e-6
    if known is not None:
        assert np.allclose(direct.y, known, atol=1e-6)


def test_unlift_of_foreign_report():
    p = VIMOProblem(identity(1), [2.0], phi=l1_norm(1))
    lp = epigraph_lift(p)
    fake = SolveReport(y=np.array([1.0, 1.0]), residual=0.0, iterations=0, witness_w=np.zeros(2),
                       status="converged")
    assert unlift(lp, fake).converged
    off = SolveReport(y=np.array([1.0, 3.0]), residual=0.0, iterations=0, witness_w=np.zeros(2),
                      status="converged")
    assert not unlift(lp, off).converged


# ---------------------------------------------------------------------------
# auxiliary map, homotopy, Galerkin


def test_auxiliary_map_hand_cases():
    K = Box([0.0], [1.0])
    g = auxiliary_map(K, identity(1), [2.0], 0.0, 1.0, [0.3])
    assert g.tolist() == [[1.7]]
    g0 = auxiliary_map(K, identity(1), [2.0], 0.1, 0.0, [0.0])
    assert sorted(g0.ravel().tolist()) == pytest.approx([0.1, 1.0])


def test_auxiliary_map_interior_point_uses_zero_convention():
    g = auxiliary_map(Box([0.0], [1.0]), identity(1), [2.0], 0.0, 0.0, [0.5])
    assert np.allclose(g, 0.0)


def test_auxiliary_map_eps_too_large():
    with pytest.raises(PreconditionError):
        auxiliary_map(Box([0.0], [1.0]), identity(1), [2.0], 2.0, 0.0, [0.0])


def test_aux_defect_zero_at_solution():
    K = Box([0.0, 0.0], [1.0, 1.0])
    assert aux_defect(K, identity(2), [2.0, 0.5], [1.0, 0.5]) <= 1e-12
    assert aux_defect(K, identity(2), [2.0, 0.5], [0.5, 0.5]) > 0.1


@pytest.mark.parametrize("A,f,K,expected", [
    (identity(1), [2.0], Box([0.0], [1.0]), 1.0),
    (identity(1), [0.5], Box([0.0], [1.0]), 0.5),
    (abs_subdifferential(1), [0.5], Box([-1.0], [1.0]), 0.0),
])
def test_homotopy_examples(A, f, K, expected):
    h = homotopy_solve(K, A, f, tol=TOL)
    assert float(np.asarray(h)[0]) == pytest.approx(expected, abs=1e-6)
    assert h.residual <= TOL


def test_galerkin_full_filter_matches_direct():
    p, *_ = box_instance(2)
    g = solve_galerkin(p, GalerkinFilter.full(2), inner_tol=TOL)
    d = solve_extragradient(p, tol=TOL)
    assert np.linalg.norm(g.y - d.y) <= 10 * TOL


def test_galerkin_two_stage_example():
    p = VIMOProblem(identity(2), [2.0, 0.5], Box([0, 0], [1, 1]), witness=[0.0, 0.0])
    g = solve_galerkin(p, GalerkinFilter([[0], [0, 1]], 2), inner_tol=TOL)
    st = g.info["stages"]
    assert st[0]["size"] == 1 and st[1]["size"] == 2
    assert np.allclose(g.y, [1.0, 0.5], atol=1e-6)
    assert [r for _, r in g.trace] == sorted([r for _, r in g.trace], reverse=True)


def test_filter_validation():
    with pytest.raises(ValueError):
        GalerkinFilter([[0, 1], [0]], 2)
    with pytest.raises(ValueError):
        GalerkinFilter([[0], [0]], 2)
    with pytest.raises(ValueError):
        BasisFilter([np.eye(3)[:, :2], np.eye(3)[:, [0, 2]]], 3)


def test_basis_filter_galerkin_reaches_direct_solution():
    p = VIMOProblem(identity(3), [2.0, 0.5, -1.0], Box([0, 0, 0], [1, 1, 1]))
    B1 = np.array([[1.0], [1.0], [1.0]])
    B2 = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]])
    g = solve_galerkin(p, BasisFilter([B1, B2, np.eye(3)], 3), inner_tol=TOL)
    assert np.allclose(g.y, [1.0, 0.5, 0.0], atol=1e-6)
    rs = [r for _, r in g.trace]
    assert all(b <= a + 1e-12 for a, b in zip(rs, rs[1:]))


# ---------------------------------------------------------------------------
# truncation


def test_truncation_stops_at_first_interior_radius():
    p = VIMOProblem(identity(2), [3.0, 4.0])
    rep = solve_truncated(p, radii=[1, 2, 4, 8], tol=TOL)
    assert rep.converged and rep.info["radius"] == 8
    assert np.allclose(rep.y, [3.0, 4.0], atol=1e-6)
    again = solve_truncated(p, radii=[16], tol=TOL)
    assert np.linalg.norm(again.y - rep.y) <= 10 * TOL


def test_inclusion_mode_cubic_root():
    rep = solve_inclusion(cubic(1), [8.0], tol=TOL)
    assert rep.converged and rep.y[0] == pytest.approx(2.0, abs=1e-6)


def test_truncation_without_solution_exhausts_schedule():
    rep = solve_inclusion(constant([0.0]), [1.0], radii=[1, 2, 4], tol=TOL, max_iter=500)
    assert rep.status == "max_iter"


def test_truncation_rejects_bad_radii():
    with pytest.raises(ValueError):
        solve_truncated(VIMOProblem(identity(1), [1.0]), radii=[2, 1])


def test_whole_space_is_unbounded():
    assert not WholeSpace(2).is_bounded
