"""Test the marginal polytope and its cycle basis."""

import numpy as np
import pytest

from unikey.core.joint import JointDist, random_dirichlet
from unikey.decomposition.polytope import Roles, build_polytope, feasible_point, resolve_roles
from unikey.errors import DistributionError


@pytest.mark.parametrize(("shape", "size"), [((2, 2, 2), 2), ((3, 3, 3), 12), ((2, 3, 4), 12)])
def test_cycle_basis_dimension(shape: tuple[int, int, int], size: int) -> None:
    """Test the basis has |S| (|Y| - 1) (|Z| - 1) moves."""
    poly = build_polytope(random_dirichlet(shape, 1.0, 0))

    assert len(poly.cycle_basis) == size


def test_moves_preserve_pair_marginals() -> None:
    """Test every move has zero (S, Y) and (S, Z) sums."""
    poly = build_polytope(random_dirichlet((3, 3, 2), 1.0, 1))
    moves = poly.move_tensor()

    np.testing.assert_array_equal(moves.sum(axis=3), 0.0)
    np.testing.assert_array_equal(moves.sum(axis=2), 0.0)


def test_small_moves_stay_inside() -> None:
    """Test a small step along each move from an interior point stays in the polytope."""
    poly = build_polytope(random_dirichlet((2, 3, 3), 1.0, 2))
    interior = poly.feasible_table()

    for move in poly.cycle_basis:
        assert poly.contains(interior + 1e-4 * interior.min() * poly.move_table(move))


def test_conditional_independence_coupling_is_member() -> None:
    """Test Q(s,y,z) = P(s) P(y|s) P(z|s) matches both pair marginals."""
    d = random_dirichlet((3, 2, 3), 1.0, 3)
    poly = build_polytope(d)

    assert poly.contains(feasible_point(poly))
    assert poly.contains(d)


def test_feasible_point_examples(xor: JointDist, perfect_secret_bit: JointDist) -> None:
    """Test XOR gives the uniform cube and the perfect secret bit is its own coupling."""
    uniform = feasible_point(build_polytope(xor))

    np.testing.assert_allclose(uniform.table, np.full((2, 2, 2), 0.125))
    assert feasible_point(build_polytope(perfect_secret_bit)).allclose(perfect_secret_bit)


def test_zero_probability_slices_stay_empty() -> None:
    """Test S symbols of probability zero carry no mass in the coupling."""
    table = np.zeros((3, 2, 2))
    table[:2] = 1.0 / 8.0
    poly = build_polytope(JointDist([("S", 3), ("Y", 2), ("Z", 2)], table))

    assert poly.active == (0, 1)
    np.testing.assert_array_equal(poly.feasible_table()[2], 0.0)


def test_membership_rejects_other_marginals(xor: JointDist, copy: JointDist) -> None:
    """Test a distribution with different pair marginals is outside."""
    assert not build_polytope(xor).contains(copy)


def test_grouped_roles_are_flattened() -> None:
    """Test multi-variable roles become product alphabets."""
    d = random_dirichlet((2, 2, 2, 3), 1.0, 4, names=["S", "Y", "Z", "W"])
    poly = build_polytope(d, (["S", "Y"], "W", "Z"))

    assert poly.base.variables == (("(S,Y)", 4), ("W", 3), ("Z", 2))
    assert len(poly.cycle_basis) == 4 * 2 * 1


def test_role_errors(xor: JointDist) -> None:
    """Test empty, overlapping and unknown roles."""
    with pytest.raises(DistributionError):
        resolve_roles(xor, ("S", "Y"))
    with pytest.raises(DistributionError):
        resolve_roles(xor, ("S", [], "Z"))
    with pytest.raises(DistributionError):
        resolve_roles(xor, ("S", "S", "Z"))
    with pytest.raises(DistributionError):
        resolve_roles(xor, ("S", "Y", "Q"))


def test_roles_default_and_swap(xor: JointDist) -> None:
    """Test defaults come from the first three variables."""
    roles = resolve_roles(xor)

    assert roles == Roles(("S",), ("Y",), ("Z",))
    assert roles.swapped() == Roles(("S",), ("Z",), ("Y",))


def test_certified_lower_bounds_the_objective() -> None:
    """Test the linearization bound never exceeds the objective at any member."""
    poly = build_polytope(random_dirichlet((2, 2, 3), 1.0, 5))
    table = poly.feasible_table()
    lower, vertex = poly.certified_lower(table)

    assert poly.contains(vertex)
    assert lower <= poly.objective(table) + 1e-9
    assert lower <= poly.objective(poly.base.table) + 1e-9
