"""Test the key-rate bounds that nest the unique-information solver."""

import numpy as np
import pytest

from unikey.bounds.keyrate import CONVERGED
from unikey.bounds.unique_bounds import BUDGET_EXHAUSTED, NestedUIProblem, b_gui, b_sui, coordinate_search
from unikey.core.joint import JointDist, random_dirichlet
from unikey.decomposition.unique import compute_ui
from unikey.options import BoundsOptions


def test_coordinate_search_stops_at_optimum() -> None:
    """Test a start at the minimizer shrinks the step until it converges."""
    value, kernel, status = coordinate_search(
        lambda k: float((k[0, 0] - 0.5) ** 2), [np.full((2, 2), 0.5)], max_evals=500
    )

    assert status == CONVERGED
    assert value == 0.0
    np.testing.assert_allclose(kernel, 0.5)


def test_coordinate_search_reports_exhausted_budget() -> None:
    """Test an objective that keeps improving runs out of evaluations."""
    value, kernel, status = coordinate_search(lambda k: float(k[:, 0].sum()), [np.full((2, 2), 0.5)], max_evals=60)

    assert status == BUDGET_EXHAUSTED
    assert value < 0.5
    np.testing.assert_allclose(kernel.sum(axis=1), 1.0)


def test_coordinate_search_picks_best_candidate() -> None:
    """Test exact candidates are compared before any perturbation."""
    good = np.array([[0.0, 1.0], [0.0, 1.0]])
    value, _, _ = coordinate_search(lambda k: float(k[:, 0].sum()), [np.full((2, 2), 0.5), good], max_evals=2)

    assert value == 0.0


def test_markov_channel_gives_ui(perfect_secret_bit: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test Z' = Z makes the nested objective equal UI(S;Y\\Z)."""
    problem = NestedUIProblem(perfect_secret_bit, quick_bounds)
    identity = np.tile(np.eye(2, problem.cols), (4, 1))

    assert problem.names == ("S", "Y", "Z", "Z'")
    assert problem.sui(identity) == pytest.approx(1.0, abs=1e-4)
    assert problem.gui(identity) == pytest.approx(1.0, abs=1e-4)


def test_b_sui_on_perfect_secret_bit(perfect_secret_bit: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test the second nested bound equals one bit."""
    estimate = b_sui(perfect_secret_bit, None, quick_bounds)

    assert estimate.value == pytest.approx(1.0, abs=1e-4)
    assert estimate.witnesses["Z'|SYZ"].output_var == ("Z'", 8)


def test_b_gui_on_xor(xor: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test a constant Z' drives the nested bound to zero."""
    assert b_gui(xor, None, quick_bounds).value == pytest.approx(0.0, abs=1e-6)


def test_b_gui_brackets_ui(quick_bounds: BoundsOptions) -> None:
    """Test UI sits below the nested bound on a random draw."""
    d = random_dirichlet((2, 2, 2), 1.0, 701)
    ui = compute_ui(d, None, quick_bounds.ui)
    estimate = b_gui(d, None, quick_bounds)

    assert ui.ui - ui.gap - 1e-4 <= estimate.value
    assert estimate.status in {CONVERGED, BUDGET_EXHAUSTED}


def test_b_gui_ignores_mismatched_b1_witness(quick_bounds: BoundsOptions) -> None:
    """Test a witness with the wrong auxiliary alphabet is not used as a candidate."""
    d = random_dirichlet((2, 2, 2), 1.0, 702)
    small = quick_bounds.model_copy(update={"max_evals": 3})
    witness = NestedUIProblem(d, small.model_copy(update={"z_prime_size": 3})).channel(np.full((8, 3), 1 / 3))

    with_witness = b_gui(d, None, small, witness)
    without = b_gui(d, None, small)

    assert with_witness.value == without.value
