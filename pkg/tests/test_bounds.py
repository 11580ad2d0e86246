"""Test the secret-key-rate bounds and their chain."""

from collections.abc import Callable

import numpy as np
import pytest
from pydantic import ValidationError

from unikey.bounds.chain import BoundsReport, bounds_chain
from unikey.bounds.descent import SmoothObjective
from unikey.bounds.keyrate import (
    HEURISTIC,
    IntrinsicObjective,
    MinimumIntrinsicObjective,
    OneWayRateObjective,
    ReducedIntrinsicObjective,
    intrinsic_information,
    minimum_intrinsic_information_b1,
    one_way_rate,
    reduced_intrinsic_heuristic,
    trivial_two_way_bounds,
)
from unikey.core.channel import apply_channel
from unikey.core.information import cmi
from unikey.core.joint import FloatArray, JointDist, random_dirichlet
from unikey.decomposition.unique import compute_ui
from unikey.options import BoundsOptions


def test_perfect_secret_bit_bounds(perfect_secret_bit: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test every bound sits at one bit."""
    assert one_way_rate(perfect_secret_bit, None, quick_bounds).value == pytest.approx(1.0, abs=1e-4)
    assert intrinsic_information(perfect_secret_bit, None, quick_bounds).value == pytest.approx(1.0, abs=1e-6)
    assert minimum_intrinsic_information_b1(perfect_secret_bit, None, quick_bounds).value == pytest.approx(
        1.0, abs=1e-4
    )


def test_xor_bounds(xor: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test a constant Z' removes all of XOR's conditional information."""
    assert one_way_rate(xor, None, quick_bounds).value == pytest.approx(0.0, abs=1e-6)
    assert intrinsic_information(xor, None, quick_bounds).value == pytest.approx(0.0, abs=1e-9)
    assert minimum_intrinsic_information_b1(xor, None, quick_bounds).value == pytest.approx(0.0, abs=1e-9)
    assert cmi(xor, "S", "Y", "Z") == pytest.approx(1.0)


def test_degraded_intrinsic_vanishes(degraded: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test Eve holding S leaves nothing to distil."""
    assert intrinsic_information(degraded, None, quick_bounds).value == pytest.approx(0.0, abs=1e-9)
    assert one_way_rate(degraded, None, quick_bounds).value <= 1e-4


def test_one_way_rate_beats_the_trivial_candidates(quick_bounds: BoundsOptions) -> None:
    """Test the estimate is at least I(S;Y) - I(S;Z) and its witnesses are channels."""
    d = random_dirichlet((2, 2, 2), 1.0, 91)
    estimate = one_way_rate(d, None, quick_bounds)

    assert estimate.value >= max(cmi(d, "S", "Y") - cmi(d, "S", "Z"), 0.0) - 1e-12
    assert set(estimate.witnesses) == {"U|S", "V|U"}
    assert estimate.witnesses["U|S"].output_var == ("U", 4)
    assert estimate.witnesses["V|U"].output_var == ("V", 2)


def test_intrinsic_witness_reproduces_value(quick_bounds: BoundsOptions) -> None:
    """Test applying the witness to Z gives the reported I(S;Y|Z')."""
    d = random_dirichlet((2, 2, 3), 1.0, 92)
    estimate = intrinsic_information(d, None, quick_bounds)
    extended = apply_channel(d, estimate.witnesses["Z'|Z"])

    assert cmi(extended, "S", "Y", "Z'") == pytest.approx(estimate.value, abs=1e-9)
    assert estimate.value <= min(cmi(d, "S", "Y", "Z"), cmi(d, "S", "Y")) + 1e-12


def test_b1_below_intrinsic(quick_bounds: BoundsOptions) -> None:
    """Test the lifted warm start keeps B1 under the intrinsic estimate."""
    d = random_dirichlet((2, 2, 2), 1.0, 93)
    intrinsic = intrinsic_information(d, None, quick_bounds)
    b1 = minimum_intrinsic_information_b1(d, None, quick_bounds, intrinsic)

    assert b1.value <= intrinsic.value + 1e-9
    assert b1.witnesses["Z'|SYZ"].output_var == ("Z'", 8)


def test_b1_respects_auxiliary_alphabet_override() -> None:
    """Test z_prime_size sets the witness output size."""
    options = BoundsOptions(restarts=1, max_steps=50, z_prime_size=3)
    b1 = minimum_intrinsic_information_b1(random_dirichlet((2, 2, 2), 1.0, 94), None, options)

    assert b1.witnesses["Z'|SYZ"].output_var == ("Z'", 3)


def test_reduced_intrinsic_is_heuristic(quick_bounds: BoundsOptions) -> None:
    """Test the reduced estimate never exceeds the intrinsic one and is flagged."""
    d = random_dirichlet((2, 2, 2), 1.0, 95)
    intrinsic = intrinsic_information(d, None, quick_bounds)
    reduced = reduced_intrinsic_heuristic(d, None, 2, quick_bounds, intrinsic)
    trivial = reduced_intrinsic_heuristic(d, None, 1, quick_bounds, intrinsic)

    assert reduced.status == HEURISTIC
    assert reduced.value <= intrinsic.value + 1e-9
    assert trivial.value == intrinsic.value


def test_trivial_two_way_bounds(perfect_secret_bit: JointDist, xor: JointDist) -> None:
    """Test the elementary two-way bounds on the canonical examples."""
    assert trivial_two_way_bounds(perfect_secret_bit) == pytest.approx((1.0, 1.0))
    assert trivial_two_way_bounds(xor) == pytest.approx((0.0, 0.0), abs=1e-12)


OBJECTIVES: dict[str, Callable[[FloatArray], SmoothObjective]] = {
    "one_way": lambda table: OneWayRateObjective(table, 2, 2),
    "intrinsic": lambda table: IntrinsicObjective(table, 2),
    "b1": lambda table: MinimumIntrinsicObjective(table, 3),
    "reduced": lambda table: ReducedIntrinsicObjective(table, 2, 2),
}


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("name", sorted(OBJECTIVES))
def test_logit_gradients_match_finite_differences(name: str, seed: int) -> None:
    """Test the chain-ruled logit gradients against central differences with step 1e-6."""
    objective = OBJECTIVES[name](random_dirichlet((2, 2, 2), 1.0, 950 + seed).table)
    logits = objective.random_logits(np.random.default_rng(seed))
    gradients = objective.logit_gradients(logits)
    step = 1e-6

    for block, theta in enumerate(logits):
        for index in np.ndindex(*theta.shape):
            shifted_up = [t.copy() for t in logits]
            shifted_down = [t.copy() for t in logits]
            shifted_up[block][index] += step
            shifted_down[block][index] -= step
            numeric = (
                objective.value(objective.kernels(shifted_up)) - objective.value(objective.kernels(shifted_down))
            ) / (2 * step)
            assert numeric == pytest.approx(gradients[block][index], rel=1e-4, abs=1e-7)


def test_search_is_reproducible(quick_bounds: BoundsOptions) -> None:
    """Test the same seed gives the same value and witness, sequential or pooled."""
    d = random_dirichlet((2, 3, 2), 1.0, 96)
    first = intrinsic_information(d, None, quick_bounds)
    second = intrinsic_information(d, None, quick_bounds.model_copy(update={"workers": 3}))

    assert first.value == second.value
    np.testing.assert_array_equal(first.witnesses["Z'|Z"].kernel, second.witnesses["Z'|Z"].kernel)


def test_chain_on_perfect_secret_bit(perfect_secret_bit: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test the whole chain collapses to one bit."""
    report = bounds_chain(perfect_secret_bit, None, quick_bounds)

    for label, value, _ in report.chain():
        assert value == pytest.approx(1.0, abs=1e-3), label
    assert report.flags["ui"] == "converged"
    assert report.soft_violations == []


def test_chain_on_xor(xor: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test the chain is zero up to the conditional mutual information of one bit."""
    report = bounds_chain(xor, None, quick_bounds)

    assert report.one_way_lower == pytest.approx(0.0, abs=1e-6)
    assert report.ui == pytest.approx(0.0, abs=1e-6)
    assert report.b1_upper == pytest.approx(0.0, abs=1e-9)
    assert report.intrinsic_upper == pytest.approx(0.0, abs=1e-9)
    assert report.cmi == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(3))
def test_chain_holds_on_random_draws(seed: int, quick_bounds: BoundsOptions) -> None:
    """Test the hard inequalities and the report layout on random draws."""
    d = random_dirichlet((2, 2, 2), 1.0, 600 + seed)
    report = bounds_chain(d, None, quick_bounds)
    tol = report.tolerance

    assert report.one_way_lower <= report.ui + tol
    assert report.ui <= report.b1_upper + tol
    assert report.b1_upper <= report.intrinsic_upper + 1e-9
    assert report.intrinsic_upper <= report.cmi + 1e-9
    assert report.ui == pytest.approx(compute_ui(d, None, quick_bounds.ui).ui, abs=1e-12)
    assert {"one_way", "intrinsic", "b1", "reduced_intrinsic", "b_gui", "ui"} == set(report.flags)
    assert all(key.split(":")[0] in report.flags for key in report.witnesses)


def test_chain_rows_and_directions(copy: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test the ordered rows carry their estimate direction, with the optional nested bound."""
    report = bounds_chain(copy, None, quick_bounds, include_sui=True)
    rows = report.chain()

    assert [label for label, _, _ in rows] == [
        "one_way_lower",
        "ui",
        "b_gui_upper",
        "b_sui_upper",
        "b1_upper",
        "reduced_intrinsic_upper",
        "intrinsic_upper",
        "cmi",
    ]
    assert {label: direction for label, _, direction in rows}["one_way_lower"] == "lower"
    assert report.flags["b_sui"] in {"converged", "budget_exhausted"}


def test_report_is_frozen(xor: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test reports cannot be mutated after construction."""
    report = bounds_chain(xor, None, quick_bounds)

    with pytest.raises(ValidationError):
        report.ui = 3.0  # type: ignore[misc]
    assert BoundsReport.model_validate(report.model_dump()) == report
