import numpy as np
import pytest

from oracles import boundary_balance, dirichlet_solve, signorini_oracle
from vimo.classes import check_coercivity, reverify
from vimo.errors import InfeasibleError, PreconditionError
from vimo.obstacle import (CoefficientField, GridConfig, assemble_operator, build_signorini_problem,
                           check_growth_conditions, coarse_bases, constant_coefficients, conormal_flux,
                           default_coefficients, export_rows, node_filter, nonsmooth_part, prolong, reflect,
                           solve_signorini, verify_complementarity)
from vimo.solver import certify, solve_galerkin

TOL = 1e-7


@pytest.fixture(scope="module")
def pushed_down():
    inst = build_signorini_problem(GridConfig(1, 17), constant_coefficients(1), -1.0)
    return inst, solve_signorini(inst, tol=TOL)


@pytest.fixture(scope="module")
def pushed_up():
    inst = build_signorini_problem(GridConfig(1, 17), constant_coefficients(1),
                                   lambda X: np.where(X[:, 0] < 0.3, 2.0, -1.0))
    return inst, solve_signorini(inst, tol=TOL)


# ---------------------------------------------------------------------------
# grids


def test_grid_geometry():
    g = GridConfig(1, 5)
    assert g.h == 0.25 and g.boundary_indices().tolist() == [0, 4]
    assert g.mass().tolist() == [0.5, 1, 1, 1, 0.5]
    g2 = GridConfig(2, 5)
    assert g2.size == 25 and len(g2.boundary_indices()) == 16
    assert g2.mass().reshape(5, 5)[0, 0] == 0.25
    with pytest.raises((ValueError, PreconditionError)):
        GridConfig(1, 2)
    with pytest.raises((ValueError, PreconditionError)):
        GridConfig(3, 5)


def test_unit_coefficients_give_laplacian_stencil(rng):
    n = 9
    g = GridConfig(1, n)
    A = assemble_operator(g, constant_coefficients(1))
    L = (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1))
    L[0, 0] = L[-1, -1] = 1.0
    L /= g.h ** 2
    for y in rng.normal(size=(5, n)):
        assert np.allclose(A.selection(y), L @ y)


def test_unit_coefficients_give_five_point_stencil_inside(rng):
    g = GridConfig(2, 6)
    A = assemble_operator(g, constant_coefficients(2))
    y = rng.normal(size=g.size)
    Y = y.reshape(6, 6)
    lap = (4 * Y[1:-1, 1:-1] - Y[:-2, 1:-1] - Y[2:, 1:-1] - Y[1:-1, :-2] - Y[1:-1, 2:]) / g.h ** 2
    assert np.allclose(A.selection(y).reshape(6, 6)[1:-1, 1:-1], lap)


def test_assembled_operator_vanishes_at_zero():
    g = GridConfig(1, 5)
    inst = build_signorini_problem(g, default_coefficients(1, 3.0), 1.0)
    assert np.all(inst.problem.A.selection(np.zeros(5)) == 0.0)
    assert inst.include_nonsmooth
    assert inst.problem.A.norm_plus(np.zeros(5)) == 0.0


def test_nonsmooth_part_is_an_interval_at_kinks():
    g = GridConfig(1, 5)
    A2 = nonsmooth_part(g, default_coefficients(1, 3.0))
    y = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
    e = np.zeros(5)
    e[1] = 1.0
    # at node 1, y = 0 is a kink of |y| and the gradient is nonzero
    assert A2.support_plus(y, e) > 0 and A2.support_minus(y, e) < 0
    with pytest.raises(PreconditionError):
        nonsmooth_part(g, constant_coefficients(1))


def test_solution_is_symmetric_under_reflection():
    g = GridConfig(1, 17)
    inst = build_signorini_problem(g, default_coefficients(1, 3.0), lambda X: np.cos(2 * np.pi * X[:, 0]) - 0.5)
    rep = solve_signorini(inst, tol=TOL)
    assert rep.converged
    assert np.max(np.abs(rep.y - reflect(g, rep.y))) <= 100 * TOL


# ---------------------------------------------------------------------------
# growth conditions


@pytest.mark.parametrize("dim,p", [(1, 2.0), (1, 3.0), (2, 2.0), (2, 4.0)])
def test_default_coefficients_pass(dim, p):
    assert check_growth_conditions(default_coefficients(dim, p)).passed


def test_constant_gamma_fails_divergence():
    c = constant_coefficients(1, gamma=lambda R: 1.0)
    rep = check_growth_conditions(c)
    assert rep.verdict == "fail" and rep.witness["condition"] == "gamma_divergence"
    assert reverify(rep, coeffs=c)


def test_gradient_dependent_coefficient_satisfies_growth_bound():
    def a(x, y, xi):
        return (1.0 + np.abs(xi[:, 0]))[:, None, None] * np.eye(1)
    c = CoefficientField(a, 3.0, lambda x: np.ones(len(x)), (0.0, 1.0), lambda R: R, 1)
    rep = check_growth_conditions(c)
    # |a| = 1 + |xi_1| equals g + k_1 |xi_1|^(p-2) exactly
    assert rep.details["growth"] and rep.passed


def test_crafted_growth_violation():
    def a(x, y, xi):
        return np.where(np.abs(y) > 2.0, 50.0, 1.0)[:, None, None] * np.eye(1)
    c = CoefficientField(a, 2.0, lambda x: np.ones(len(x)), (1.0, 0.0), lambda R: R, 1)
    rep = check_growth_conditions(c)
    assert rep.verdict == "fail" and rep.witness["condition"] == "growth"
    assert abs(rep.witness["y"]) > 2.0 and rep.witness["value"] == 50.0
    assert reverify(rep, coeffs=c)
    with pytest.raises(PreconditionError):
        build_signorini_problem(GridConfig(1, 5), c, 1.0)


def test_discontinuous_coefficient_fails_continuity():
    def a(x, y, xi):
        return np.where(x[:, 0] < 0.5, 1.0, 2.0)[:, None, None] * np.eye(1)
    c = CoefficientField(a, 2.0, lambda x: np.full(len(x), 2.0), (0.0, 0.0), lambda R: R, 1)
    rep = check_growth_conditions(c)
    assert rep.verdict == "fail" and rep.witness["condition"] == "continuity"
    assert rep.witness["x"][0] == pytest.approx(0.5, abs=1e-9) and rep.witness["jump"] == 1.0
    assert reverify(rep, coeffs=c)


def test_steep_but_continuous_coefficient_passes_continuity():
    def a(x, y, xi):
        return (1.5 + 0.5 * np.tanh(200 * (x[:, 0] - 0.5)))[:, None, None] * np.eye(1)
    c = CoefficientField(a, 2.0, lambda x: np.full(len(x), 2.0), (0.0, 0.0), lambda R: R, 1)
    assert check_growth_conditions(c).details["continuity"]


def test_coefficient_field_validation():
    with pytest.raises(PreconditionError):
        CoefficientField(lambda x, y, xi: None, 1.5, lambda x: x, (0.0, 0.0), lambda R: R, 1)
    with pytest.raises(PreconditionError):
        default_coefficients(1, 2.5)


def test_assembled_operator_is_coercive():
    g = GridConfig(1, 9)
    inst = build_signorini_problem(g, default_coefficients(1, 3.0), 0.0)
    assert check_coercivity(inst.problem.A, np.zeros(g.size)).passed


# ---------------------------------------------------------------------------
# solutions and complementarity


def test_pushed_down_solution(pushed_down):
    inst, rep = pushed_down
    assert rep.converged
    x = inst.grid.coordinates()[:, 0]
    assert np.max(np.abs(rep.y - x * (x - 1) / 2)) <= 1e-6
    ref, defect = signorini_oracle(inst.f_nodes)
    assert defect <= 1e-8
    assert np.max(np.abs(rep.y - ref)) <= 1e-4
    c = verify_complementarity(inst, rep.y, 100 * TOL)
    assert c.passed
    # active contact at both ends with nonnegative flux
    assert rep.y[0] == pytest.approx(0.0, abs=1e-9) and c.details["min_flux"] >= -100 * TOL


def test_pushed_up_end_lifts_off(pushed_up):
    inst, rep = pushed_up
    assert rep.converged
    assert rep.y[0] > 0.1
    flux = conormal_flux(inst, rep.y)
    assert abs(flux[0]) <= 1e-5
    assert verify_complementarity(inst, rep.y, 100 * TOL).passed
    ref, _ = signorini_oracle(inst.f_nodes)
    assert np.max(np.abs(rep.y - ref)) <= 1e-4
    # independent check of the free end: the Dirichlet solve with the found end values balances
    y = dirichlet_solve(inst.f_nodes, rep.y[0], rep.y[-1])
    assert np.allclose(y, rep.y, atol=1e-6)
    assert abs(boundary_balance(rep.y, inst.f_nodes)[0]) <= 1e-4


def test_zero_load_zero_solution_is_exactly_complementary():
    inst = build_signorini_problem(GridConfig(1, 9), constant_coefficients(1), 0.0)
    rep = verify_complementarity(inst, np.zeros(9), 1e-12)
    assert rep.passed and rep.margin == 0.0


def test_complementarity_failure_and_infeasibility(pushed_down):
    inst, rep = pushed_down
    y = rep.y.copy()
    y += 0.5    # lifts both ends while the load still pushes down
    bad = verify_complementarity(inst, y, 1e-5)
    assert bad.verdict == "fail"
    assert reverify(bad, instance=inst, y=y)
    with pytest.raises(InfeasibleError):
        verify_complementarity(inst, rep.y - 1.0)


def test_two_dimensional_instance():
    g = GridConfig(2, 9)
    inst = build_signorini_problem(g, constant_coefficients(2), -1.0)
    rep = solve_signorini(inst, tol=TOL)
    assert rep.converged
    assert verify_complementarity(inst, rep.y, 100 * TOL).passed
    assert np.max(np.abs(rep.y - reflect(g, rep.y))) <= 100 * TOL


# ---------------------------------------------------------------------------
# refinement and Galerkin chain


def test_prolongation_is_exact_for_linear_functions():
    c, f = GridConfig(1, 5), GridConfig(1, 17)
    assert np.allclose(prolong(c, 2 * c.coordinates()[:, 0] + 1, f), 2 * f.coordinates()[:, 0] + 1)
    c2, f2 = GridConfig(2, 3), GridConfig(2, 5)
    lin = lambda X: X[:, 0] - 3 * X[:, 1]
    assert np.allclose(prolong(c2, lin(c2.coordinates()), f2), lin(f2.coordinates()))


def test_refinement_keeps_residual_bounded(pushed_down):
    fine, rep = pushed_down
    coarse = build_signorini_problem(GridConfig(1, 9), constant_coefficients(1), -1.0)
    rc = solve_signorini(coarse, tol=TOL)
    up = prolong(coarse.grid, rc.y, fine.grid)
    # the fine stencil turns interpolation kinks into O(1) nodal defects, so the
    # prolonged residual stays bounded by that of the trivial start but does not vanish
    r = certify(fine.problem, up)
    assert np.isfinite(r) and r <= certify(fine.problem, np.zeros(fine.grid.size)) + 1e-9
    assert certify(fine.problem, rep.y) <= TOL


def test_node_filter_trace_is_non_increasing():
    g = GridConfig(1, 17)
    inst = build_signorini_problem(g, constant_coefficients(1), -1.0)
    rep = solve_galerkin(inst.problem, node_filter(g), inner_tol=TOL)
    rs = [r for _, r in rep.trace]
    assert len(rs) == 4
    assert all(b <= a for a, b in zip(rs, rs[1:]))
    assert rs[-1] <= TOL


def test_coarse_bases_validation():
    with pytest.raises(PreconditionError):
        coarse_bases(GridConfig(1, 17), strides=(3,))
    B = coarse_bases(GridConfig(1, 9), strides=(4, 1))
    assert B[0].shape == (9, 3) and np.allclose(B[1], np.eye(9))


def test_export_rows(pushed_down):
    inst, rep = pushed_down
    rows = export_rows(inst, rep.y)
    assert len(rows) == 17 and rows[0][2] is not None and rows[5][2] is None
    assert rows[16][0] == 1.0
