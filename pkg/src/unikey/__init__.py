"""unikey."""

import importlib.metadata

__version__ = importlib.metadata.version("unikey")


from unikey.bounds.chain import BoundsReport, bounds_chain
from unikey.bounds.keyrate import intrinsic_information, minimum_intrinsic_information_b1, one_way_rate
from unikey.bounds.unique_bounds import b_gui, b_sui
from unikey.core.channel import Channel, apply_channel
from unikey.core.information import cmi, entropy, mutual_information
from unikey.core.joint import JointDist, l1_distance, marginal, random_dirichlet, tensor_power
from unikey.decomposition.blackwell import DominanceVerdict, blackwell_dominates, cross_check_ui
from unikey.decomposition.polytope import MarginalPolytope, Roles, build_polytope, feasible_point
from unikey.decomposition.unique import (
    DecompositionResult,
    compute_ui,
    compute_ui_oracle,
    consistency_residual,
    decompose,
    min_synergy_distribution,
)
from unikey.errors import DistributionError, InvariantViolation, NormalizationWarning, UnikeyError
from unikey.options import BoundsOptions, SolverOptions

__all__ = [
    "BoundsOptions",
    "BoundsReport",
    "Channel",
    "DecompositionResult",
    "DistributionError",
    "DominanceVerdict",
    "InvariantViolation",
    "JointDist",
    "MarginalPolytope",
    "NormalizationWarning",
    "Roles",
    "SolverOptions",
    "UnikeyError",
    "__version__",
    "apply_channel",
    "b_gui",
    "b_sui",
    "blackwell_dominates",
    "bounds_chain",
    "build_polytope",
    "cmi",
    "compute_ui",
    "compute_ui_oracle",
    "consistency_residual",
    "cross_check_ui",
    "decompose",
    "entropy",
    "feasible_point",
    "intrinsic_information",
    "l1_distance",
    "marginal",
    "min_synergy_distribution",
    "minimum_intrinsic_information_b1",
    "mutual_information",
    "one_way_rate",
    "random_dirichlet",
    "tensor_power",
]
