"""Key-rate upper estimates that nest the unique-information solver.

Both objectives are evaluated through :func:`unikey.decomposition.unique.compute_ui`
on the four-variable joint (S, Y, Z, Z'), so the outer search over Z'|SYZ is
gradient-free: a coordinate search on the channel logits with a shrinking step.
"""

import logging
from collections.abc import Callable

import numpy as np
from scipy.special import softmax

from unikey.bounds.keyrate import (
    CONVERGED,
    BoundEstimate,
    constant_kernel,
    lift_eve_channel,
    role_table,
)
from unikey.core.channel import Channel, apply_channel
from unikey.core.information import cmi
from unikey.core.joint import FloatArray, JointDist
from unikey.decomposition.polytope import RolesLike
from unikey.decomposition.unique import compute_ui
from unikey.options import BoundsOptions

logger = logging.getLogger(__name__)

BUDGET_EXHAUSTED = "budget_exhausted"
INITIAL_PERTURBATION = 2.0
MIN_PERTURBATION = 1e-3
_LOGIT_FLOOR = 1e-9

Evaluator = Callable[[FloatArray], float]


class NestedUIProblem:
    """Evaluates the two nested objectives for channels Z'|SYZ on a fixed (S, Y, Z) table."""

    def __init__(self, base: JointDist, options: BoundsOptions) -> None:
        """Fix the flattened input and the auxiliary alphabet size."""
        self.base = base
        self.options = options
        n_s, n_y, n_z = base.shape
        self.rows = n_s * n_y * n_z
        self.cols = max(options.z_prime_size or self.rows, n_z)
        s, y, z = base.names
        self.names = (s, y, z, f"{z}'")

    def channel(self, kernel: FloatArray) -> Channel:
        """Channel Z'|SYZ for a kernel."""
        return Channel(self.base.variables, (self.names[3], self.cols), kernel)

    def extended(self, kernel: FloatArray) -> JointDist:
        """Joint over (S, Y, Z, Z')."""
        return apply_channel(self.base, self.channel(kernel))

    def eve_unique(self, joint: JointDist) -> float:
        """``UI(SY; Z' \\ Z)``."""
        s, y, z, zp = self.names
        return compute_ui(joint, ((s, y), zp, z), self.options.ui).ui

    def gui(self, kernel: FloatArray) -> float:
        """``I(S;Y|Z') + UI(SY; Z' \\ Z)``."""
        joint = self.extended(kernel)
        s, y, _, zp = self.names
        return cmi(joint, s, y, zp) + self.eve_unique(joint)

    def sui(self, kernel: FloatArray) -> float:
        """``UI(S;Y \\ Z') + UI(SY; Z' \\ Z)``."""
        joint = self.extended(kernel)
        s, y, _, zp = self.names
        return compute_ui(joint, (s, y, zp), self.options.ui).ui + self.eve_unique(joint)


def coordinate_search(
    evaluate: Evaluator,
    candidates: list[FloatArray],
    max_evals: int,
) -> tuple[float, FloatArray, str]:
    """Minimize ``evaluate`` over row-stochastic kernels by logit coordinate perturbations.

    Candidates are evaluated first; the search then starts from the best one,
    perturbs one logit at a time by plus or minus the current step, keeps any
    improvement and halves the step after a sweep without one.

    Returns:
        tuple[float, FloatArray, str]: Best value, its kernel and the search status.
    """
    evals = 0
    best_value = float("inf")
    best_kernel = candidates[0]
    for kernel in candidates:
        if evals >= max_evals:
            break
        value = evaluate(kernel)
        evals += 1
        if value < best_value:
            best_value, best_kernel = value, kernel

    logits = np.log(np.maximum(best_kernel, _LOGIT_FLOOR))
    step = INITIAL_PERTURBATION
    while step >= MIN_PERTURBATION:
        improved = False
        for index in np.ndindex(*logits.shape):
            for sign in (1.0, -1.0):
                if evals >= max_evals:
                    return best_value, best_kernel, BUDGET_EXHAUSTED
                trial = logits.copy()
                trial[index] += sign * step
                kernel = softmax(trial, axis=1)
                value = evaluate(kernel)
                evals += 1
                if value < best_value:
                    best_value, best_kernel, logits = value, kernel, trial
                    improved = True
                    break
        if not improved:
            step *= 0.5
    return best_value, best_kernel, CONVERGED


def _nested_bound(
    d: JointDist,
    roles: RolesLike,
    options: BoundsOptions | None,
    objective: str,
    extra: list[FloatArray],
) -> BoundEstimate:
    options = options or BoundsOptions()
    base = role_table(d, roles)
    problem = NestedUIProblem(base, options)
    identity = lift_eve_channel(np.eye(base.shape[2]), base.shape, problem.cols)
    candidates = [identity, constant_kernel(problem.rows, problem.cols), *extra]
    evaluate = problem.gui if objective == "gui" else problem.sui
    value, kernel, status = coordinate_search(evaluate, candidates, options.max_evals)
    if status == BUDGET_EXHAUSTED:
        logger.info("%s search used its budget of %d evaluations", objective, options.max_evals)
    return BoundEstimate(value, {"Z'|SYZ": problem.channel(kernel)}, status)


def b_gui(
    d: JointDist,
    roles: RolesLike = None,
    options: BoundsOptions | None = None,
    b1_witness: Channel | None = None,
) -> BoundEstimate:
    """Upper estimate of ``min I(S;Y|Z') + UI(SY; Z' \\ Z)`` over Z'|SYZ.

    The Markov channel Z' = Z, the constant channel and, when given, the B1
    witness are evaluated before the coordinate search. The status is
    ``budget_exhausted`` when the search ran out of ``options.max_evals``.
    """
    extra = []
    if b1_witness is not None:
        problem = NestedUIProblem(role_table(d, roles), options or BoundsOptions())
        if b1_witness.kernel.shape == (problem.rows, problem.cols):
            extra.append(np.asarray(b1_witness.kernel))
    return _nested_bound(d, roles, options, "gui", extra)


def b_sui(d: JointDist, roles: RolesLike = None, options: BoundsOptions | None = None) -> BoundEstimate:
    """Upper estimate of ``min UI(S;Y \\ Z') + UI(SY; Z' \\ Z)`` over Z'|SYZ.

    The Markov channel Z' = Z achieves ``UI(S;Y\\Z)``, which is the exact value
    of this minimum.
    """
    return _nested_bound(d, roles, options, "sui", [])
