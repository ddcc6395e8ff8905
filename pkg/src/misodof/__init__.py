"""Exact polyhedral tools for rate-splitting DoF regions of the MISO broadcast channel."""

from .dof_model import (
    CsitProfile,
    NotAchievable,
    Strategy,
    alpha_drop_min,
    expected_intermediate,
    outer_bound,
    private_dof_cap_full,
    rs_after_power_elim,
    rs_after_private_elim,
    rs_region_single_power,
    sum_dof,
    synthesize_strategy,
)
from .fme import EliminationTrace, eliminate, project, prune, substitute_equality
from .geometry import (
    FarkasCertificate,
    enumerate_vertices,
    equivalent,
    feasible,
    is_implied,
    maximize,
    minimal_form,
)
from .poly_core import (
    InequalitySystem,
    LinearConstraint,
    VarId,
    canonicalize,
    contains,
    evaluate,
    normalize,
)
from .report import VerificationReport, run_verification

__version__ = "0.1.0"

__all__ = [
    "CsitProfile",
    "EliminationTrace",
    "FarkasCertificate",
    "InequalitySystem",
    "LinearConstraint",
    "NotAchievable",
    "Strategy",
    "VarId",
    "VerificationReport",
    "alpha_drop_min",
    "canonicalize",
    "contains",
    "eliminate",
    "enumerate_vertices",
    "equivalent",
    "evaluate",
    "expected_intermediate",
    "feasible",
    "is_implied",
    "maximize",
    "minimal_form",
    "normalize",
    "outer_bound",
    "private_dof_cap_full",
    "project",
    "prune",
    "rs_after_power_elim",
    "rs_after_private_elim",
    "rs_region_single_power",
    "run_verification",
    "substitute_equality",
    "sum_dof",
    "synthesize_strategy",
]
