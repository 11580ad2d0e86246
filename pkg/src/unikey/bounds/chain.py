"""The full chain of secret-key-rate bounds around unique information.

``S_one_way <= UI <= B1 <= I_reduced <= I_intrinsic <= I(S;Y|Z)``, with the
nested ``UI <= B_gUI <= B1`` alongside. Inequalities that only a solver bug can
break raise :class:`~unikey.errors.InvariantViolation`; those that may fail
because a nonconvex search stopped early are reported as soft violations.
"""

import logging

from pydantic import BaseModel, ConfigDict

from unikey.bounds.keyrate import (
    BoundEstimate,
    intrinsic_information,
    minimum_intrinsic_information_b1,
    one_way_rate,
    reduced_intrinsic_heuristic,
    role_table,
    trivial_two_way_bounds,
)
from unikey.bounds.unique_bounds import b_gui, b_sui
from unikey.core.channel import Channel
from unikey.core.information import cmi
from unikey.core.joint import JointDist
from unikey.decomposition.polytope import RolesLike
from unikey.decomposition.unique import compute_ui
from unikey.errors import InvariantViolation
from unikey.options import BoundsOptions

logger = logging.getLogger(__name__)

CHAIN_SLACK = 1e-4
STRUCTURAL_SLACK = 1e-9


class BoundsReport(BaseModel):
    """Every bound of the chain with estimate directions, witnesses and flags.

    Attributes:
        one_way_lower (float): Value of the best one-way strategy found (lower estimate).
        ui (float): Unique information ``UI(S;Y\\Z)``.
        ui_gap (float): Certified gap of ``ui``.
        b1_upper (float): Minimum intrinsic information estimate (upper estimate).
        b_gui_upper (float): Nested-UI bound estimate (upper estimate).
        b_sui_upper (float | None): Optional second nested-UI bound (upper estimate).
        reduced_intrinsic_upper (float): Heuristic reduced intrinsic information estimate.
        intrinsic_upper (float): Intrinsic information estimate (upper estimate).
        cmi (float): ``I(S;Y|Z)``.
        trivial_lower (float): Elementary lower bound on the two-way rate.
        trivial_upper (float): Elementary upper bound on the two-way rate.
        tolerance (float): Tolerance used for the hard and soft checks.
        witnesses (dict): Channel kernels keyed by ``bound:channel``.
        flags (dict): Search status per bound.
        soft_violations (list): Names of soft inequalities that failed beyond tolerance.
    """

    model_config = ConfigDict(frozen=True)

    one_way_lower: float
    ui: float
    ui_gap: float
    b1_upper: float
    b_gui_upper: float
    b_sui_upper: float | None = None
    reduced_intrinsic_upper: float
    intrinsic_upper: float
    cmi: float
    trivial_lower: float
    trivial_upper: float
    tolerance: float
    witnesses: dict[str, list[list[float]]]
    flags: dict[str, str]
    soft_violations: list[str]

    def chain(self) -> list[tuple[str, float, str]]:
        """Ordered ``(label, value, direction)`` rows; direction is ``lower``, ``upper`` or ``exact``."""
        rows = [
            ("one_way_lower", self.one_way_lower, "lower"),
            ("ui", self.ui, "exact"),
            ("b_gui_upper", self.b_gui_upper, "upper"),
        ]
        if self.b_sui_upper is not None:
            rows.append(("b_sui_upper", self.b_sui_upper, "upper"))
        rows += [
            ("b1_upper", self.b1_upper, "upper"),
            ("reduced_intrinsic_upper", self.reduced_intrinsic_upper, "upper"),
            ("intrinsic_upper", self.intrinsic_upper, "upper"),
            ("cmi", self.cmi, "exact"),
        ]
        return rows


def _kernels(prefix: str, estimate: BoundEstimate) -> dict[str, list[list[float]]]:
    return {f"{prefix}:{name}": _rows(channel) for name, channel in estimate.witnesses.items()}


def _rows(channel: Channel) -> list[list[float]]:
    return [[float(p) for p in row] for row in channel.kernel]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvariantViolation(message)


def bounds_chain(
    d: JointDist,
    roles: RolesLike = None,
    options: BoundsOptions | None = None,
    *,
    include_sui: bool = False,
) -> BoundsReport:
    """Compute UI, every key-rate bound and the conditional mutual information.

    Args:
        d (JointDist): Input distribution.
        roles (RolesLike): S, Y and Z role groups.
        options (BoundsOptions | None): Search settings, including the nested UI solver's.
        include_sui (bool): Also run the second nested-UI bound.

    Returns:
        BoundsReport: The populated chain.

    Raises:
        InvariantViolation: If ``one_way <= UI``, ``UI <= B1``, ``B1 <= I_intrinsic``
            or ``I_intrinsic <= I(S;Y|Z)`` fails beyond tolerance.
    """
    options = options or BoundsOptions()
    base = role_table(d, roles)
    s, y, z = base.names

    ui = compute_ui(base, None, options.ui)
    one_way = one_way_rate(base, None, options)
    intrinsic = intrinsic_information(base, None, options)
    b1 = minimum_intrinsic_information_b1(base, None, options, intrinsic)
    reduced = reduced_intrinsic_heuristic(base, None, options.u_cap, options, intrinsic)
    gui = b_gui(base, None, options, b1.witnesses["Z'|SYZ"])
    sui = b_sui(base, None, options) if include_sui else None
    conditional = cmi(base, s, y, z)
    trivial = trivial_two_way_bounds(base)
    tolerance = ui.gap + CHAIN_SLACK

    _require(one_way.value <= ui.ui + tolerance, f"one-way rate {one_way.value!r} exceeds UI {ui.ui!r}")
    _require(ui.ui <= b1.value + tolerance, f"UI {ui.ui!r} exceeds B1 {b1.value!r}")
    _require(
        b1.value <= intrinsic.value + STRUCTURAL_SLACK,
        f"B1 {b1.value!r} exceeds intrinsic information {intrinsic.value!r}",
    )
    _require(
        intrinsic.value <= conditional + STRUCTURAL_SLACK,
        f"intrinsic information {intrinsic.value!r} exceeds I(S;Y|Z) {conditional!r}",
    )

    soft = {
        "b_gui_below_ui": gui.value < ui.ui - tolerance,
        "b_gui_above_b1": gui.value > b1.value + tolerance,
        "b1_above_reduced_intrinsic": b1.value > reduced.value + tolerance,
        "reduced_intrinsic_below_ui": reduced.value < ui.ui - tolerance,
        "reduced_intrinsic_above_intrinsic": reduced.value > intrinsic.value + STRUCTURAL_SLACK,
    }
    if sui is not None:
        soft["b_sui_off_ui"] = abs(sui.value - ui.ui) > tolerance + options.ui.tolerance
    violations = sorted(name for name, failed in soft.items() if failed)
    for name in violations:
        logger.warning("soft chain inequality failed: %s", name)

    flags = {
        "ui": "converged" if ui.converged else "iteration_cap",
        "one_way": one_way.status,
        "intrinsic": intrinsic.status,
        "b1": b1.status,
        "reduced_intrinsic": reduced.status,
        "b_gui": gui.status,
    }
    witnesses = {
        **_kernels("one_way", one_way),
        **_kernels("intrinsic", intrinsic),
        **_kernels("b1", b1),
        **_kernels("reduced_intrinsic", reduced),
        **_kernels("b_gui", gui),
    }
    if sui is not None:
        flags["b_sui"] = sui.status
        witnesses.update(_kernels("b_sui", sui))

    return BoundsReport(
        one_way_lower=one_way.value,
        ui=ui.ui,
        ui_gap=ui.gap,
        b1_upper=b1.value,
        b_gui_upper=gui.value,
        b_sui_upper=None if sui is None else sui.value,
        reduced_intrinsic_upper=reduced.value,
        intrinsic_upper=intrinsic.value,
        cmi=conditional,
        trivial_lower=trivial.lower,
        trivial_upper=trivial.upper,
        tolerance=tolerance,
        witnesses=witnesses,
        flags=flags,
        soft_violations=violations,
    )
