"""Blackwell (degradation) order between the channels S -> Y and S -> Z.

Z dominates Y with respect to S when some channel lambda(y|z) reproduces the
(S, Y) marginal from the (S, Z) marginal. Dominance holds exactly when
``UI(S;Y\\Z)`` vanishes.
"""

import logging
from dataclasses import dataclass

import numpy as np

from unikey.core.channel import Channel
from unikey.core.joint import JointDist
from unikey.decomposition.polytope import RolesLike, build_polytope
from unikey.decomposition.unique import compute_ui
from unikey.options import SolverOptions
from unikey.solvers.simplex import solve_lp

logger = logging.getLogger(__name__)

DOMINANCE_THRESHOLD = 1e-7
AGREEMENT_SLACK = 1e-5


@dataclass(frozen=True)
class DominanceVerdict:
    """Result of the degradation test.

    Attributes:
        dominates (bool): Whether Z dominates Y, i.e. ``residual <= 1e-7``.
        witness (Channel | None): Best channel Z -> Y' found by the program.
        residual (float): L1 distance between the garbled (S, Z) marginal and the (S, Y) marginal.
    """

    dominates: bool
    witness: Channel | None
    residual: float


def blackwell_dominates(d: JointDist, roles: RolesLike = None) -> DominanceVerdict:
    """Decide whether Z dominates Y in the Blackwell order with respect to S.

    Solves ``min sum |sum_z P(s,z) lambda(y|z) - P(s,y)|`` over row-stochastic
    ``lambda`` as a linear program with split slack variables; the optimum is
    zero exactly when a garbling exists.

    Args:
        d (JointDist): Input distribution.
        roles (RolesLike): S, Y and Z role groups.

    Returns:
        DominanceVerdict: Verdict, residual and the best channel found.
    """
    poly = build_polytope(d, roles)
    n_s, n_y, n_z = poly.shape
    n_lambda = n_z * n_y
    n_slack = n_s * n_y

    A = np.zeros((n_slack + n_z, n_lambda + 2 * n_slack))
    b = np.concatenate([poly.pair_sy.reshape(-1), np.ones(n_z)])
    for s in range(n_s):
        for y in range(n_y):
            row = s * n_y + y
            A[row, y:n_lambda:n_y] = poly.pair_sz[s]
            A[row, n_lambda + row] = -1.0
            A[row, n_lambda + n_slack + row] = 1.0
    for z in range(n_z):
        A[n_slack + z, z * n_y : (z + 1) * n_y] = 1.0
    costs = np.concatenate([np.zeros(n_lambda), np.ones(2 * n_slack)])

    result = solve_lp(costs, A, b)
    if result.x is None:
        logger.error("degradation program ended with status %s", result.status.value)
        return DominanceVerdict(dominates=False, witness=None, residual=float("inf"))

    kernel = np.maximum(result.x[:n_lambda].reshape(n_z, n_y), 0.0)
    kernel /= kernel.sum(axis=1, keepdims=True)
    _, y_name, z_name = poly.base.names
    witness = Channel([(z_name, n_z)], (f"{y_name}'", n_y), kernel)
    residual = float(np.abs(poly.pair_sz @ kernel - poly.pair_sy).sum())
    return DominanceVerdict(dominates=residual <= DOMINANCE_THRESHOLD, witness=witness, residual=residual)


def cross_check_ui(d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None) -> bool:
    """Whether ``UI <= gap + 1e-5`` agrees with the dominance verdict.

    Disagreement is logged as an error and reported, never raised.
    """
    result = compute_ui(d, roles, options)
    verdict = blackwell_dominates(d, roles)
    vanishes = result.ui <= result.gap + AGREEMENT_SLACK
    if vanishes != verdict.dominates:
        logger.error(
            "UI=%.9f (gap %.3g) disagrees with dominance verdict %s (residual %.3g)",
            result.ui,
            result.gap,
            verdict.dominates,
            verdict.residual,
        )
    return vanishes == verdict.dominates
