"""Domain types and the support-function calculus."""

from .functions import (ProperConvexFunction, VariationModulus, box_indicator, convexity_violations,
                        from_callables, half_squared_norm, hinge, l1_norm, power_modulus, zero_function,
                        zero_modulus)
from .operators import (SetValuedOperator, abs_subdifferential, ball_operator, box_operator, constant,
                        constant_box, constant_finite_set, cubic, finite_set, identity, linear,
                        nearest_selection, negative_identity, power_operator, reciprocal, rotation,
                        scaled_operator, single_valued, step_operator, subdifferential_operator,
                        sum_operator)
from .problem import VIMOProblem, restrict_function, restrict_operator
from .sets import Ball, BallIntersection, Box, ConvexSet, Epigraph, Polytope, WholeSpace, prox_on_set
from .vectors import as_vector, ext_sub


def support_plus(A: SetValuedOperator, y, xi) -> float:
    return A.support_plus(y, xi)


def support_minus(A: SetValuedOperator, y, xi) -> float:
    return A.support_minus(y, xi)


def selection(A: SetValuedOperator, y, hint=None):
    return A.selection(y, hint)


def norm_plus(A: SetValuedOperator, y) -> float:
    return A.norm_plus(y)


def norm_minus(A: SetValuedOperator, y) -> float:
    return A.norm_minus(y)
