"""Solvers for the variational inequality, its inclusion form and the pure VI."""

from .extragradient import polish, solve_extragradient
from .galerkin import (BasisFilter, GalerkinFilter, HomotopyResult, aux_defect, auxiliary_map, homotopy_solve,
                       solve_galerkin)
from .lift import LiftedProblem, epigraph_lift, lift_operator, solve_lifted, unlift
from .report import SolveReport
from .residual import (certify, natural_residual, probe_batch, residual, static_probes, trial_points,
                       violations, witness_selection)
from .truncation import solve_inclusion, solve_truncated

__all__ = [
    "SolveReport", "residual", "violations", "probe_batch", "static_probes", "trial_points", "certify",
    "natural_residual", "witness_selection", "solve_extragradient", "polish", "epigraph_lift",
    "lift_operator", "unlift", "solve_lifted", "LiftedProblem", "BasisFilter", "GalerkinFilter", "auxiliary_map",
    "aux_defect", "homotopy_solve", "HomotopyResult", "solve_galerkin", "solve_truncated", "solve_inclusion",
]
