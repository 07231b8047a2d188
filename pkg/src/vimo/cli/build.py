"""Turn validated config blocks into library objects."""

from __future__ import annotations

import numpy as np

from ..core import functions as fn
from ..core import operators as ops
from ..core.problem import VIMOProblem
from ..core.sets import Ball, Box, Polytope, WholeSpace
from ..errors import VimoError
from .config import ConfigError, InstanceConfig, ModulusConfig, OperatorConfig, PhiConfig, SetConfig


def _dim_check(vec, dim, what):
    if vec is not None and len(vec) != dim:
        raise ConfigError(f"{what}: expected length {dim}, got {len(vec)}")
    return vec


def build_operator(blk: OperatorConfig, dim: int) -> ops.SetValuedOperator:
    k = blk.kind
    if k == "identity":
        return ops.identity(dim)
    if k == "negative_identity":
        return ops.negative_identity(dim)
    if k == "linear":
        M = np.asarray(blk.matrix, dtype=float)
        if M.shape != (dim, dim):
            raise ConfigError(f"operator.matrix: expected shape ({dim}, {dim}), got {M.shape}")
        return ops.linear(M)
    if k == "rotation":
        if dim != 2:
            raise ConfigError("operator kind 'rotation' needs dim 2")
        return ops.rotation(np.pi / 2 if blk.angle is None else blk.angle)
    if k == "constant":
        return ops.constant(_dim_check(blk.value, dim, "operator.value"))
    if k == "power":
        return ops.power_operator(dim, blk.p)
    if k == "cubic":
        return ops.cubic(dim)
    if k == "constant_box":
        return ops.constant_box(_dim_check(blk.lo, dim, "operator.lo"), _dim_check(blk.hi, dim, "operator.hi"))
    if k == "abs_subdifferential":
        return ops.abs_subdifferential(dim)
    if k == "ball":
        c = np.asarray(_dim_check(blk.center, dim, "operator.center"), dtype=float)
        r = float(blk.radius)
        return ops.ball_operator(lambda y: c, lambda y: r, dim)
    if k == "finite_set":
        P = np.asarray(blk.points, dtype=float)
        if P.ndim != 2 or P.shape[1] != dim:
            raise ConfigError(f"operator.points: rows must have length {dim}")
        return ops.constant_finite_set(P)
    if k in ("step", "reciprocal"):
        if dim != 1:
            raise ConfigError(f"operator kind {k!r} needs dim 1")
        return ops.step_operator() if k == "step" else ops.reciprocal()
    if k == "sum":
        terms = [build_operator(t, dim) for t in blk.terms]
        out = terms[0]
        for t in terms[1:]:
            out = ops.sum_operator(out, t)
        return out
    if k == "scaled":
        return ops.scaled_operator(build_operator(blk.of, dim), blk.scale)
    raise ConfigError(f"unknown operator kind {k!r}")


def build_phi(blk: PhiConfig, dim: int) -> fn.ProperConvexFunction:
    if blk.kind == "zero":
        return fn.zero_function(dim)
    if blk.kind == "l1":
        return fn.l1_norm(dim, blk.weight)
    if blk.kind == "half_squared":
        return fn.half_squared_norm(dim, blk.weight)
    if blk.kind == "hinge":
        return fn.hinge(dim, blk.weight)
    if blk.lo is None or blk.hi is None:
        raise ConfigError("phi kind 'box_indicator' needs lo and hi")
    return fn.box_indicator(_dim_check(blk.lo, dim, "phi.lo"), _dim_check(blk.hi, dim, "phi.hi"))


def build_set(blk: SetConfig, dim: int):
    if blk.kind == "whole":
        return WholeSpace(dim)
    if blk.kind == "box":
        return Box(_dim_check(blk.lo, dim, "K.lo"), _dim_check(blk.hi, dim, "K.hi"))
    if blk.kind == "ball":
        return Ball(_dim_check(blk.center, dim, "K.center"), blk.radius)
    G = np.asarray(blk.G, dtype=float)
    if G.ndim != 2 or G.shape[1] != dim:
        raise ConfigError(f"K.G: rows must have length {dim}")
    return Polytope(G, blk.h)


def build_problem(blk: InstanceConfig) -> VIMOProblem:
    d = blk.dim
    try:
        A = build_operator(blk.operator, d)
        return VIMOProblem(A, _dim_check(blk.f, d, "instance.f"), build_set(blk.K, d), build_phi(blk.phi, d),
                           name=blk.name)
    except VimoError as exc:
        raise ConfigError(f"instance: {exc}") from exc


def build_modulus(blk: ModulusConfig) -> fn.VariationModulus:
    if blk.kind == "zero":
        return fn.zero_modulus()
    return fn.power_modulus(blk.exponent, blk.scale)
