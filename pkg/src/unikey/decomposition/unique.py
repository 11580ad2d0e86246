"""Unique, shared and synergistic information of a joint distribution.

``UI(S;Y\\Z)`` is the minimum of I_Q(S;Y|Z) over all Q sharing the (S, Y) and
(S, Z) marginals of P. Shared and synergistic parts follow as
``SI = I(S;Y) - UI`` and ``CI = I(S;Y|Z) - UI``.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

from unikey.core.information import cmi, cmi_table
from unikey.core.joint import JointDist
from unikey.decomposition.polytope import MarginalPolytope, RolesLike, build_polytope
from unikey.errors import InvariantViolation
from unikey.options import SolverOptions
from unikey.solvers.base import AbstractUISolver, SolverRun
from unikey.solvers.frank_wolfe import FrankWolfeSolver
from unikey.solvers.oracle import MultiplicativeOracleSolver

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecompositionResult:
    """Unique-information decomposition with its solver certificate.

    Attributes:
        ui (float): Unique information of Y about S w.r.t. Z, an upper value of the optimum.
        si (float): Shared information ``I(S;Y) - ui``.
        ci (float): Synergistic information ``I(S;Y|Z) - ui``.
        q_star (JointDist): Feasible minimizer over the flattened (S, Y, Z) axes.
        gap (float): Certified optimality gap; the optimum lies in ``[ui - gap, ui]``.
        iterations (int): Solver iterations.
        method (str): Solver identifier.
        converged (bool): Whether the gap met the tolerance before the iteration cap.
    """

    ui: float
    si: float
    ci: float
    q_star: JointDist
    gap: float
    iterations: int
    method: str
    converged: bool


class Residual(NamedTuple):
    """A measured residual together with the solver gaps that bound it."""

    value: float
    gap: float


class TrivialBounds(NamedTuple):
    """``max(0, I(S;Y) - I(S;Z)) <= UI <= min(I(S;Y), I(S;Y|Z))``."""

    lower: float
    upper: float


class Decomposition(NamedTuple):
    """Both unique parts together with the shared and synergistic parts."""

    unique_y: float
    unique_z: float
    shared: float
    synergistic: float
    gap: float


def _finish(poly: MarginalPolytope, run: SolverRun, tolerance: float) -> DecompositionResult:
    increase = run.first_increase()
    if increase is not None:
        raise InvariantViolation(
            f"{run.method} objective increased at iteration {increase}: "
            f"{run.trace[increase - 1]!r} -> {run.trace[increase]!r}"
        )
    table = run.table
    value = run.value
    base_value = poly.objective(poly.base.table)
    # the input itself is feasible
    if base_value < value:
        table, value = poly.base.table, base_value

    q_star = poly.wrap(table)
    if not poly.contains(q_star):
        raise InvariantViolation(f"{run.method} returned a point outside the marginal polytope")
    ui = cmi_table(q_star.table, (0,), (1,), (2,))
    gap = max(ui - run.lower, 0.0)
    i_sy = cmi_table(poly.pair_sy, (0,), (1,))
    i_sy_z = poly.objective(poly.base.table)
    return DecompositionResult(
        ui=ui,
        si=i_sy - ui,
        ci=i_sy_z - ui,
        q_star=q_star,
        gap=gap,
        iterations=run.iterations,
        method=run.method,
        converged=run.converged or gap <= tolerance,
    )


def solve_ui(d: JointDist, roles: RolesLike, solver: AbstractUISolver) -> DecompositionResult:
    """Minimize I(S;Y|Z) over the marginal polytope of ``d`` with a given solver.

    Args:
        d (JointDist): Input distribution.
        roles (RolesLike): S, Y and Z role groups; the first three variables by default.
        solver (AbstractUISolver): Solver instance carrying its options.

    Returns:
        DecompositionResult: Values, minimizer and certificate.

    Raises:
        DistributionError: On invalid roles.
        InvariantViolation: If the solver leaves the polytope or its objective increases.
    """
    poly = build_polytope(d, roles)
    result = _finish(poly, solver.minimize(poly), solver.options.tolerance)
    logger.debug(
        "%s: UI=%.9f gap=%.3g after %d iterations", result.method, result.ui, result.gap, result.iterations
    )
    return result


def compute_ui(d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None) -> DecompositionResult:
    """UI(S;Y\\Z) with SI and CI via Frank-Wolfe with a certified gap.

    A run that hits the iteration cap is still returned, with ``converged``
    false and its honest gap.
    """
    return solve_ui(d, roles, FrankWolfeSolver(options))


def compute_ui_oracle(
    d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None
) -> DecompositionResult:
    """UI(S;Y\\Z) by the independent multi-start cycle-coordinate descent."""
    return solve_ui(d, roles, MultiplicativeOracleSolver(options))


def min_synergy_distribution(
    d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None
) -> JointDist:
    """The minimizer Q* of I_Q(S;Y|Z) over the polytope; its synergy is zero up to the gap."""
    return compute_ui(d, roles, options).q_star


def trivial_bounds(d: JointDist, roles: RolesLike = None) -> TrivialBounds:
    """Bounds on UI that hold without solving anything."""
    poly = build_polytope(d, roles)
    i_sy = cmi_table(poly.pair_sy, (0,), (1,))
    i_sz = cmi_table(poly.pair_sz, (0,), (1,))
    return TrivialBounds(max(i_sy - i_sz, 0.0), min(i_sy, poly.objective(poly.base.table)))


def consistency_residual(d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None) -> Residual:
    """``|I(S;Y) + UI(S;Z\\Y) - I(S;Z) - UI(S;Y\\Z)|`` with the two solver gaps summed.

    Both sides of the identity equal the shared information, so the residual
    should not exceed the combined gap.
    """
    poly = build_polytope(d, roles)
    forward = compute_ui(poly.base, None, options)
    backward = compute_ui(poly.base, _swapped_names(poly), options)
    s, y, z = poly.base.names
    value = abs(cmi(poly.base, s, y) + backward.ui - cmi(poly.base, s, z) - forward.ui)
    return Residual(value, forward.gap + backward.gap)


def _swapped_names(poly: MarginalPolytope) -> tuple[str, str, str]:
    s, y, z = poly.base.names
    return s, z, y


def decompose(d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None) -> Decomposition:
    """Full bivariate decomposition: both unique parts, shared and synergistic information.

    The shared part is averaged over the two consistent ways of computing it.
    """
    poly = build_polytope(d, roles)
    s, y, z = poly.base.names
    forward = compute_ui(poly.base, (s, y, z), options)
    backward = compute_ui(poly.base, (s, z, y), options)
    shared = 0.5 * (forward.si + backward.si)
    return Decomposition(forward.ui, backward.ui, shared, forward.ci, forward.gap + backward.gap)


def shared_information(d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None) -> float:
    """SI(S;Y,Z) = I(S;Y) - UI(S;Y\\Z)."""
    return compute_ui(d, roles, options).si


def synergistic_information(d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None) -> float:
    """CI(S;Y,Z) = I(S;Y|Z) - UI(S;Y\\Z)."""
    return compute_ui(d, roles, options).ci
