"""Seeded instance families shared by the solver tests and the acceptance run."""

from __future__ import annotations

import numpy as np

from vimo.core import (Box, VIMOProblem, abs_subdifferential, ball_operator, box_operator, constant_box,
                       constant_finite_set, cubic, half_squared_norm, hinge, identity, l1_norm, linear,
                       negative_identity, power_operator, rotation, scaled_operator, single_valued,
                       sum_operator)
from vimo.core.functions import box_indicator


def operator_battery(dim=2):
    """Constructor-built operators on R^2 with exact support values."""
    M = np.array([[2.0, 1.0], [0.0, 1.0]])
    return [
        identity(dim), negative_identity(dim), linear(M), rotation(), power_operator(dim, 3), cubic(dim),
        abs_subdifferential(dim), sum_operator(abs_subdifferential(dim), identity(dim)),
        constant_box([-1.0, 0.0], [2.0, 0.5]),
        ball_operator(lambda y: y, lambda y: 1.0 + float(y @ y), dim),
        constant_finite_set([[0.0, 1.0], [1.0, 0.0], [-1.0, -1.0], [0.2, 0.1]]),
        scaled_operator(abs_subdifferential(dim), -2.0),
    ]


def box_instance(seed: int):
    """Strongly monotone 2D instance on a random box.

    Even seeds: affine ``M y + c`` with ``M = mu I + skew + small symmetric``.
    Odd seeds: ``mu y + a ∂|y|`` coordinatewise (interval images).
    Returns ``(problem, lower, upper, f, lo, hi)`` with vectorized interval
    bounds for the closed-form oracle.
    """
    rng = np.random.default_rng(seed)
    lo = rng.uniform(-2, 0, 2)
    hi = lo + rng.uniform(1, 3, 2)
    f = rng.uniform(-3, 3, 2)
    mu = rng.uniform(0.5, 2.0)
    if seed % 2 == 0:
        S = rng.uniform(-1, 1, (2, 2))
        S = 0.1 * mu * (S + S.T) / 2
        M = mu * np.eye(2) + rng.uniform(-1, 1) * np.array([[0.0, 1.0], [-1.0, 0.0]]) + S
        c = rng.uniform(-1, 1, 2)

        def lower(Y):
            return Y @ M.T + c
        upper = lower
        A = single_valued(lambda y: M @ y + c, 2, name="affine")
    else:
        a = rng.uniform(0.2, 1.0, 2)

        def lower(Y):
            return mu * Y + np.where(Y > 0, a, -a)

        def upper(Y):
            return mu * Y + np.where(Y < 0, -a, a)
        A = box_operator(lambda y: lower(y[None])[0], lambda y: upper(y[None])[0], 2, name="shifted-abs")
    return VIMOProblem(A, f, Box(lo, hi)), lower, upper, f, lo, hi


def phi_battery():
    """Ten instances with a nonzero convex term and their known solutions (or ``None``)."""
    M = np.array([[2.0, 1.0], [-1.0, 2.0]])
    return [
        ("shrinkage", VIMOProblem(identity(1), [2.0], phi=l1_norm(1)), np.array([1.0])),
        ("shrinkage-neg", VIMOProblem(identity(1), [-0.4], phi=l1_norm(1, 0.5)), np.array([0.0])),
        ("l1-2d", VIMOProblem(identity(2), [2.0, -0.3], phi=l1_norm(2)), np.array([1.0, 0.0])),
        ("quadratic", VIMOProblem(identity(2), [2.0, -1.0], phi=half_squared_norm(2)), np.array([1.0, -0.5])),
        ("hinge", VIMOProblem(identity(1), [3.0], phi=hinge(1)), np.array([2.0])),
        ("hinge-below", VIMOProblem(identity(1), [-1.5], phi=hinge(1)), np.array([-1.5])),
        ("box-indicator", VIMOProblem(identity(2), [3.0, -2.0], phi=box_indicator([0, -1], [1, 1])),
         np.array([1.0, -1.0])),
        ("l1-on-box", VIMOProblem(identity(2), [2.5, 0.5], Box([-1, -1], [1, 1]), l1_norm(2)),
         np.array([1.0, 0.0])),
        ("affine-l1", VIMOProblem(linear(M), [3.0, 1.0], phi=l1_norm(2, 0.5)), None),
        ("affine-quadratic", VIMOProblem(linear(M), [1.0, 2.0], Box([-2, -2], [2, 2]), half_squared_norm(2)),
         None),
    ]
