"""Numerical checks of the properties of unique information.

Every check returns a :class:`CheckOutcome` whose ``slack`` is non-negative
when the property holds exactly; the check passes when ``slack >= -tolerance``
and any side condition it tests (``consistent``) holds. Tolerances are the
gaps reported by the participating solver runs plus a slack: ``CHECK_SLACK`` for
checks built on certified UI runs, the looser ``SEARCH_SLACK`` where an
uncertified bound search takes part. The chain check reuses the tolerance of
:func:`~unikey.bounds.chain.bounds_chain` itself.
"""

import logging
from collections.abc import Callable, Sequence
from typing import NamedTuple

from unikey.bounds.chain import bounds_chain
from unikey.bounds.keyrate import minimum_intrinsic_information_b1
from unikey.bounds.unique_bounds import b_sui
from unikey.core.channel import Channel, apply_channel, input_variables
from unikey.core.information import cmi, entropy
from unikey.core.joint import JointDist, as_names, flatten_roles, l1_distance, tensor_power
from unikey.decomposition.blackwell import blackwell_dominates, cross_check_ui
from unikey.decomposition.polytope import RolesLike, resolve_roles
from unikey.decomposition.unique import compute_ui, consistency_residual
from unikey.errors import DistributionError
from unikey.options import BoundsOptions, SolverOptions

logger = logging.getLogger(__name__)

CHECK_SLACK = 1e-4
# bound searches carry no certificate of their own
SEARCH_SLACK = 1e-3
CONTINUITY_ENVELOPE = 0.5


class CheckOutcome(NamedTuple):
    """Measured slack of one property on one instance.

    Attributes:
        slack (float): Signed margin; negative values measure a violation.
        tolerance (float): Allowed violation derived from solver gaps.
        consistent (bool): Outcome of any side condition the check asserts.
        label (str | None): Optional classification recorded by the suite.
    """

    slack: float
    tolerance: float
    consistent: bool = True
    label: str | None = None

    @property
    def passed(self) -> bool:
        """Whether the property holds within tolerance."""
        return self.consistent and self.slack >= -self.tolerance


FourRoles = Sequence[str | Sequence[str]] | None


def _four_roles(d: JointDist, roles: FourRoles) -> tuple[tuple[str, ...], ...]:
    if roles is None:
        if len(d.variables) < 4:
            raise DistributionError(f"need four variables, got {list(d.names)}")
        return tuple((name,) for name in d.names[:4])
    if len(roles) != 4:
        raise DistributionError("four role groups are required")
    return tuple(as_names(group) for group in roles)


def check_consistency(
    d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None, slack: float = CHECK_SLACK
) -> CheckOutcome:
    """``I(S;Y) + UI(S;Z\\Y) = I(S;Z) + UI(S;Y\\Z)`` up to the two gaps."""
    residual = consistency_residual(d, roles, options)
    return CheckOutcome(-residual.value, residual.gap + slack)


def check_blackwell_vanishing(
    d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None, slack: float = CHECK_SLACK
) -> CheckOutcome:
    """UI vanishes on a distribution where Z dominates Y, and the dominance test agrees."""
    result = compute_ui(d, roles, options)
    verdict = blackwell_dominates(d, roles)
    agree = cross_check_ui(d, roles, options)
    return CheckOutcome(-result.ui, result.gap + slack, consistent=agree and verdict.dominates)


def check_normalization(
    d: JointDist, roles: RolesLike = None, options: SolverOptions | None = None, slack: float = CHECK_SLACK
) -> CheckOutcome:
    """On a perfect secret (Y = S, Z independent of both) UI equals ``H(S)``."""
    s, _, _ = resolve_roles(d, roles)
    result = compute_ui(d, roles, options)
    return CheckOutcome(-abs(result.ui - entropy(d, s)), result.gap + slack)


def check_triangle(
    d4: JointDist, roles: FourRoles = None, options: SolverOptions | None = None, slack: float = CHECK_SLACK
) -> CheckOutcome:
    """``UI(S;Y\\Z') + UI(S;Z'\\Z) - UI(S;Y\\Z)`` for roles (S, Y, Z, Z')."""
    s, y, z, zp = _four_roles(d4, roles)
    via = compute_ui(d4, (s, y, zp), options)
    step = compute_ui(d4, (s, zp, z), options)
    direct = compute_ui(d4, (s, y, z), options)
    return CheckOutcome(via.ui + step.ui - direct.ui, via.gap + step.gap + direct.gap + slack)


def check_corollary(
    d4: JointDist, roles: FourRoles = None, options: SolverOptions | None = None, slack: float = CHECK_SLACK
) -> CheckOutcome:
    """``UI(S;Y\\Z') + UI(SY;Z'\\Z) - UI(S;Y\\Z)`` for roles (S, Y, Z, Z')."""
    s, y, z, zp = _four_roles(d4, roles)
    via = compute_ui(d4, (s, y, zp), options)
    step = compute_ui(d4, (s + y, zp, z), options)
    direct = compute_ui(d4, (s, y, z), options)
    return CheckOutcome(via.ui + step.ui - direct.ui, via.gap + step.gap + direct.gap + slack)


def check_eve_monotonicity(
    d: JointDist,
    ch: Channel,
    roles: RolesLike = None,
    options: SolverOptions | None = None,
    slack: float = CHECK_SLACK,
) -> CheckOutcome:
    """Garbling Eve's variable never decreases UI.

    Z' is produced from Z by ``ch``, so SY - Z - Z' is a Markov chain. Returns
    ``UI(S;Y\\Z') - UI(S;Y\\Z)``; ``consistent`` records whether revealing Z'
    in addition to Z leaves UI unchanged.
    """
    s, y, z = resolve_roles(d, roles)
    if ch.input_names != z:
        raise DistributionError(f"Eve's channel must read {list(z)}, got {list(ch.input_names)}")
    extended = apply_channel(d, ch)
    zp = ch.output_var[0]
    before = compute_ui(extended, (s, y, z), options)
    after = compute_ui(extended, (s, y, (zp,)), options)
    both = compute_ui(extended, (s, y, (*z, zp)), options)
    tolerance = before.gap + after.gap + slack
    identity_holds = abs(both.ui - before.ui) <= before.gap + both.gap + slack
    return CheckOutcome(after.ui - before.ui, tolerance, consistent=identity_holds)


def check_alice_bob_monotonicity(
    d: JointDist,
    ch: Channel,
    roles: RolesLike = None,
    options: SolverOptions | None = None,
    slack: float = CHECK_SLACK,
) -> CheckOutcome:
    """Garbling Alice's or Bob's variable never increases UI.

    ``ch`` reads either the S or the Y group; the other role is kept. Returns
    ``UI(S;Y\\Z) - UI(S';Y\\Z)`` or ``UI(S;Y\\Z) - UI(S;Y'\\Z)``.
    """
    s, y, z = resolve_roles(d, roles)
    extended = apply_channel(d, ch)
    garbled = (ch.output_var[0],)
    if ch.input_names == s:
        after_roles = (garbled, y, z)
    elif ch.input_names == y:
        after_roles = (s, garbled, z)
    else:
        raise DistributionError(f"channel must read S {list(s)} or Y {list(y)}, got {list(ch.input_names)}")
    before = compute_ui(extended, (s, y, z), options)
    after = compute_ui(extended, after_roles, options)
    return CheckOutcome(before.ui - after.ui, before.gap + after.gap + slack)


def check_public_communication(
    d: JointDist,
    f: Callable[..., int],
    f_size: int,
    roles: RolesLike = None,
    options: SolverOptions | None = None,
    slack: float = CHECK_SLACK,
) -> CheckOutcome:
    """Publishing ``F = f(S)`` to everyone never increases UI.

    Three copies of F are attached so that each role can hold its own;
    returns ``UI(S;Y\\Z) - UI(SF;YF\\ZF)``.
    """
    s, y, z = resolve_roles(d, roles)
    inputs = input_variables(d, s)
    extended = d
    copies = []
    for party in ("A", "B", "E"):
        name = f"F{party}"
        extended = apply_channel(extended, Channel.from_function(inputs, (name, f_size), f))
        copies.append(name)
    before = compute_ui(extended, (s, y, z), options)
    after = compute_ui(extended, ((*s, copies[0]), (*y, copies[1]), (*z, copies[2])), options)
    return CheckOutcome(before.ui - after.ui, before.gap + after.gap + slack)


def check_locking(
    d4: JointDist, roles: FourRoles = None, options: SolverOptions | None = None, slack: float = CHECK_SLACK
) -> CheckOutcome:
    """Revealing U to Eve costs at most ``H(U)``: ``UI(S;Y\\ZU) - UI(S;Y\\Z) + H(U)``."""
    s, y, z, u = _four_roles(d4, roles)
    before = compute_ui(d4, (s, y, z), options)
    after = compute_ui(d4, (s, y, z + u), options)
    return CheckOutcome(after.ui - before.ui + entropy(d4, u), before.gap + after.gap + slack)


def check_additivity(
    d: JointDist,
    n: int = 2,
    roles: RolesLike = None,
    options: SolverOptions | None = None,
    slack: float = CHECK_SLACK,
) -> CheckOutcome:
    """UI is additive on independent copies; the slack is ``-|UI(d^n) - n UI(d)|``."""
    base = flatten_roles(d, resolve_roles(d, roles), names=("S", "Y", "Z"))
    single = compute_ui(base, None, options)
    power = compute_ui(tensor_power(base, n), None, options)
    deviation = abs(power.ui - n * single.ui)
    return CheckOutcome(-deviation, n * single.gap + power.gap + slack)


def check_continuity(
    d: JointDist,
    other: JointDist,
    roles: RolesLike = None,
    options: SolverOptions | None = None,
    envelope: float = CONTINUITY_ENVELOPE,
) -> CheckOutcome:
    """Nearby distributions have nearby UI, within a sanity envelope.

    The slack is ``-|UI(d) - UI(other)|`` and the tolerance is the envelope
    plus both gaps.
    """
    distance = l1_distance(d, other)
    first = compute_ui(d, roles, options)
    second = compute_ui(other, roles, options)
    logger.debug("continuity pair at L1 distance %.3g: %.9f vs %.9f", distance, first.ui, second.ui)
    return CheckOutcome(-abs(first.ui - second.ui), envelope + first.gap + second.gap)


def check_chain(d: JointDist, roles: RolesLike = None, options: BoundsOptions | None = None) -> CheckOutcome:
    """The hard part of the key-rate chain: ``one_way <= UI <= B1``.

    The label records whether the one-way estimate sits strictly below UI or
    meets it, for tallying how often the two coincide.
    """
    report = bounds_chain(d, roles, options)
    slack = min(report.ui - report.one_way_lower, report.b1_upper - report.ui)
    label = "one_way_below_ui" if report.one_way_lower < report.ui - report.tolerance else "one_way_meets_ui"
    return CheckOutcome(slack, report.tolerance, label=label)


def check_collapse_at_qstar(
    d: JointDist, roles: RolesLike = None, options: BoundsOptions | None = None, slack: float = SEARCH_SLACK
) -> CheckOutcome:
    """At the minimum-synergy distribution the chain squeezes onto UI.

    Computes Q*, then at Q*: ``UI``, ``I(S;Y|Z)`` and B1. The slack is minus
    the width of the squeeze ``max(|CMI - UI|, B1 - UI)``; ``consistent``
    records ``UI <= B1 + tolerance``.
    """
    options = options or BoundsOptions()
    q_star = compute_ui(d, roles, options.ui).q_star
    s, y, z = q_star.names
    at_q = compute_ui(q_star, None, options.ui)
    conditional = cmi(q_star, s, y, z)
    b1 = minimum_intrinsic_information_b1(q_star, None, options)
    tolerance = 2.0 * at_q.gap + slack
    width = max(abs(conditional - at_q.ui), b1.value - at_q.ui)
    return CheckOutcome(-width, tolerance, consistent=at_q.ui <= b1.value + tolerance)


def check_nested_ui(
    d: JointDist, roles: RolesLike = None, options: BoundsOptions | None = None, slack: float = SEARCH_SLACK
) -> CheckOutcome:
    """The nested bound ``min UI(S;Y\\Z') + UI(SY;Z'\\Z)`` equals UI."""
    options = options or BoundsOptions()
    result = compute_ui(d, roles, options.ui)
    nested = b_sui(d, roles, options)
    return CheckOutcome(-abs(nested.value - result.ui), 2.0 * result.gap + slack)


def perturbed(d: JointDist, direction: JointDist, distance: float) -> JointDist:
    """Mix ``d`` towards ``direction`` so that the L1 distance from ``d`` is ``distance``.

    Raises:
        DistributionError: If the layouts differ or ``distance`` cannot be reached.
    """
    full = l1_distance(d, direction)
    if full < distance:
        raise DistributionError(f"cannot move {distance} in L1 towards a point {full} away")
    weight = distance / full
    return JointDist(d.variables, (1.0 - weight) * d.table + weight * direction.table)


def parity(*symbols: int) -> int:
    """Parity of the sum of the symbols, a deterministic public message."""
    return sum(symbols) % 2
