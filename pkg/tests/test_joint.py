"""Test joint distributions and their arithmetic."""

import numpy as np
import pytest

from tests.resources import point_mass, uniform_bit
from unikey.core.information import entropy
from unikey.core.joint import (
    JointDist,
    flatten_roles,
    l1_distance,
    marginal,
    random_dirichlet,
    rename,
    tensor_power,
)
from unikey.errors import DistributionError, NormalizationWarning


def test_table_is_row_major_and_read_only() -> None:
    """Test the last variable varies fastest and the table cannot be written."""
    d = JointDist([("A", 2), ("B", 3)], np.arange(6) / 15.0)

    assert d.shape == (2, 3)
    assert d.table[0, 2] == pytest.approx(2 / 15)
    assert d.table[1, 0] == pytest.approx(3 / 15)
    with pytest.raises(ValueError):
        d.table[0, 0] = 1.0


def test_invalid_layouts_are_rejected() -> None:
    """Test duplicate names, bad sizes and size mismatches."""
    with pytest.raises(DistributionError):
        JointDist([("A", 2), ("A", 2)], [0.25] * 4)
    with pytest.raises(DistributionError):
        JointDist([("A", 0)], [])
    with pytest.raises(DistributionError):
        JointDist([("A", 2)], [0.2, 0.3, 0.5])


def test_negative_probabilities_are_rejected() -> None:
    """Test entries below zero raise."""
    with pytest.raises(DistributionError):
        JointDist([("A", 2)], [1.5, -0.5])


def test_small_normalization_error_warns_and_renormalizes() -> None:
    """Test a 1e-7 deviation is corrected with a warning."""
    with pytest.warns(NormalizationWarning):
        d = JointDist([("A", 2)], [0.5, 0.5 + 1e-7])

    assert d.probs.sum() == pytest.approx(1.0, abs=1e-15)


def test_large_normalization_error_raises() -> None:
    """Test a deviation above 1e-6 is an error."""
    with pytest.raises(DistributionError):
        JointDist([("A", 2)], [0.5, 0.6])


def test_marginal_of_uniform_cube_is_uniform_bit() -> None:
    """Test summing out Y and Z of a uniform cube."""
    d = JointDist([("S", 2), ("Y", 2), ("Z", 2)], np.full(8, 0.125))

    assert marginal(d, {"S"}).allclose(uniform_bit())


def test_marginal_on_all_variables_is_identity(xor: JointDist) -> None:
    """Test keeping every variable returns the same distribution."""
    assert marginal(xor, ["Z", "S", "Y"]).allclose(xor)


def test_marginal_keeps_original_order(xor: JointDist) -> None:
    """Test the XOR (S, Z) marginal is uniform and ordered as in the input."""
    pair = marginal(xor, ["Z", "S"])

    assert pair.names == ("S", "Z")
    np.testing.assert_allclose(pair.table, np.full((2, 2), 0.25))


def test_marginal_errors(xor: JointDist) -> None:
    """Test unknown and empty variable sets."""
    with pytest.raises(DistributionError):
        marginal(xor, ["W"])
    with pytest.raises(DistributionError):
        marginal(xor, [])


def test_flatten_roles_builds_product_alphabets(xor: JointDist) -> None:
    """Test grouping (S, Y) into one variable with S most significant."""
    flat = flatten_roles(xor, [["S", "Y"], "Z"])

    assert flat.variables == (("(S,Y)", 4), ("Z", 2))
    np.testing.assert_allclose(flat.table, xor.table.reshape(4, 2))


def test_flatten_roles_rejects_overlap(xor: JointDist) -> None:
    """Test a variable cannot sit in two groups."""
    with pytest.raises(DistributionError):
        flatten_roles(xor, [["S", "Y"], ["Y"]])


def test_rename(xor: JointDist) -> None:
    """Test renaming keeps the table."""
    renamed = rename(xor, {"Z": "E"})

    assert renamed.names == ("S", "Y", "E")
    np.testing.assert_array_equal(renamed.table, xor.table)


def test_l1_distance() -> None:
    """Test zero, maximal and symmetric distances."""
    first, second = point_mass(0), point_mass(1)
    d1 = random_dirichlet((2, 3), 1.0, 1)
    d2 = random_dirichlet((2, 3), 1.0, 2)

    assert l1_distance(first, first) == 0.0
    assert l1_distance(first, second) == pytest.approx(2.0)
    assert l1_distance(d1, d2) == pytest.approx(l1_distance(d2, d1))


def test_l1_distance_layout_mismatch() -> None:
    """Test distributions over different layouts cannot be compared."""
    with pytest.raises(DistributionError):
        l1_distance(uniform_bit("A"), uniform_bit("B"))


def test_tensor_power_of_one_is_identity(xor: JointDist) -> None:
    """Test n = 1 returns the input."""
    assert tensor_power(xor, 1).allclose(xor)


def test_tensor_power_entropy_is_additive() -> None:
    """Test three copies of a uniform bit carry three bits."""
    assert entropy(tensor_power(uniform_bit(), 3)) == pytest.approx(3.0)


def test_tensor_power_groups_per_role(xor: JointDist) -> None:
    """Test grouped copies keep names and square alphabet sizes."""
    square = tensor_power(xor, 2)

    assert square.variables == (("S", 4), ("Y", 4), ("Z", 4))
    assert square.table[1, 2, 3] == pytest.approx(xor.table[0, 1, 1] * xor.table[1, 0, 1])


def test_tensor_power_ungrouped_names() -> None:
    """Test copies can be kept as separate variables."""
    square = tensor_power(uniform_bit(), 2, grouped=False)

    assert square.names == ("S_1", "S_2")


def test_tensor_power_budget(xor: JointDist) -> None:
    """Test the state budget is enforced."""
    with pytest.raises(DistributionError):
        tensor_power(xor, 4, max_states=1000)
    with pytest.raises(DistributionError):
        tensor_power(xor, 0)


def test_random_dirichlet_is_deterministic() -> None:
    """Test the same seed produces identical arrays."""
    first = random_dirichlet((2, 2, 2), 1.0, 42)
    second = random_dirichlet((2, 2, 2), 1.0, 42)

    np.testing.assert_array_equal(first.table, second.table)
    assert first.names == ("S", "Y", "Z")
    assert first.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_random_dirichlet_concentration() -> None:
    """Test a very large concentration gives a nearly uniform draw."""
    d = random_dirichlet((2, 2, 2), 1e6, 3)

    assert d.probs.max() - d.probs.min() < 0.01


def test_random_dirichlet_rejects_bad_concentration() -> None:
    """Test non-positive concentrations raise."""
    with pytest.raises(DistributionError):
        random_dirichlet((2, 2), 0.0, 1)
