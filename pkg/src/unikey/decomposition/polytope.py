import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from unikey.core.information import cmi_table, entropy_table
from unikey.core.joint import FloatArray, JointDist, as_names, flatten_roles, group_name
from unikey.errors import DistributionError
from unikey.solvers.simplex import solve_transportation

MEMBERSHIP_TOLERANCE = 1e-9
SMOOTHING = 1e-12
_LN2 = math.log(2.0)
_TINY = np.finfo(np.float64).tiny

RoleGroup = str | Sequence[str]


class Roles(NamedTuple):
    """Variable groups playing the parts of S (Alice), Y (Bob) and Z (Eve)."""

    s: tuple[str, ...]
    y: tuple[str, ...]
    z: tuple[str, ...]

    @classmethod
    def of(cls, s: RoleGroup, y: RoleGroup, z: RoleGroup) -> "Roles":
        """Build roles from names or groups of names."""
        return cls(as_names(s), as_names(y), as_names(z))

    def swapped(self) -> "Roles":
        """Roles with Y and Z exchanged, i.e. the ``UI(S;Z\\Y)`` problem."""
        return Roles(self.s, self.z, self.y)

    @property
    def names(self) -> tuple[str, str, str]:
        """Product-alphabet names of the flattened S, Y and Z axes."""
        return group_name(self.s), group_name(self.y), group_name(self.z)


RolesLike = Roles | Sequence[RoleGroup] | None


def resolve_roles(d: JointDist, roles: RolesLike = None) -> Roles:
    """Validate ``roles`` against ``d``, defaulting to its first three variables.

    Raises:
        DistributionError: If roles are missing, empty, overlapping or unknown.
    """
    if roles is None:
        if len(d.variables) < 3:
            raise DistributionError(f"need at least three variables for default roles, got {list(d.names)}")
        resolved = Roles.of(*d.names[:3])
    else:
        if len(roles) != 3:
            raise DistributionError("roles need exactly three groups: S, Y and Z")
        resolved = roles if isinstance(roles, Roles) else Roles.of(*roles)

    seen: set[str] = set()
    for label, group in zip("SYZ", resolved, strict=True):
        if not group:
            raise DistributionError(f"role {label} is empty")
        for name in group:
            d.axis(name)
        if seen.intersection(group):
            raise DistributionError(f"role {label} overlaps another role on {sorted(seen.intersection(group))}")
        seen.update(group)
    return resolved


class CycleMove(NamedTuple):
    """Four-point move ``+(y, z) + (y0, z0) - (y, z0) - (y0, z)`` inside the slice ``s``."""

    s: int
    y: int
    y0: int
    z: int
    z0: int


@dataclass(frozen=True)
class MarginalPolytope:
    """Joint distributions of (S, Y, Z) sharing the (S, Y) and (S, Z) marginals of ``base``.

    Attributes:
        base (JointDist): Input restricted and flattened to three role axes.
        roles (Roles): The role groups the axes came from.
        pair_sy (FloatArray): ``|S| x |Y|`` marginal table.
        pair_sz (FloatArray): ``|S| x |Z|`` marginal table.
        cycle_basis (tuple[CycleMove, ...]): Moves spanning the affine hull directions.
        h_s_given_z (float): H(S|Z) in bits, constant over the polytope.
    """

    base: JointDist
    roles: Roles
    pair_sy: FloatArray = field(repr=False)
    pair_sz: FloatArray = field(repr=False)
    cycle_basis: tuple[CycleMove, ...] = field(repr=False)
    h_s_given_z: float

    @property
    def shape(self) -> tuple[int, int, int]:
        """``(|S|, |Y|, |Z|)``."""
        s, y, z = self.base.shape
        return s, y, z

    @property
    def p_s(self) -> FloatArray:
        """Marginal of S."""
        return self.pair_sy.sum(axis=1)

    @property
    def active(self) -> tuple[int, ...]:
        """S symbols with positive probability; the others are pinned to zero."""
        return tuple(int(s) for s in np.flatnonzero(self.p_s > 0.0))

    def wrap(self, table: FloatArray) -> JointDist:
        """Build a distribution over the polytope's axes from a table."""
        return JointDist(self.base.variables, np.maximum(table, 0.0))

    def contains(self, q: JointDist | FloatArray, atol: float = MEMBERSHIP_TOLERANCE) -> bool:
        """Whether ``q`` matches both pair marginals within ``atol``."""
        table = q.table if isinstance(q, JointDist) else np.asarray(q)
        if table.shape != self.shape or np.any(table < -atol):
            return False
        return bool(
            np.allclose(table.sum(axis=2), self.pair_sy, rtol=0.0, atol=atol)
            and np.allclose(table.sum(axis=1), self.pair_sz, rtol=0.0, atol=atol)
        )

    def feasible_table(self) -> FloatArray:
        """Conditional-independence coupling ``P(s) P(y|s) P(z|s)``."""
        p_s = self.p_s
        safe = np.where(p_s > 0.0, p_s, 1.0)
        table = self.pair_sy[:, :, None] * self.pair_sz[:, None, :] / safe[:, None, None]
        table[p_s <= 0.0] = 0.0
        return table

    def objective(self, table: FloatArray) -> float:
        """I(S;Y|Z) in bits of a table over the polytope's axes."""
        return cmi_table(table, (0,), (1,), (2,))

    @property
    def support(self) -> NDArray[np.bool_]:
        """Entries allowed to carry mass: both P(s, y) and P(s, z) positive."""
        return (self.pair_sy[:, :, None] > 0.0) & (self.pair_sz[:, None, :] > 0.0)

    def smoothed(self, table: FloatArray, smoothing: float = SMOOTHING) -> FloatArray:
        """Mix a table with the uniform table on the support so every allowed entry is positive."""
        support = self.support
        return np.where(support, (1.0 - smoothing) * np.maximum(table, 0.0) + smoothing / support.sum(), 0.0)

    def surrogate_gradient(self, table: FloatArray, smoothing: float = SMOOTHING) -> FloatArray:
        """Gradient of the convex surrogate ``sum Q log2(Q / Q_yz) + H(S|Z)`` at the smoothed table.

        The surrogate agrees with I(S;Y|Z) on the polytope and is convex on the
        whole nonnegative orthant, so its linearization gives a valid lower bound.
        """
        smooth = self.smoothed(table, smoothing)
        q_yz = smooth.sum(axis=0, keepdims=True)
        ratio = np.where(smooth > 0.0, smooth / np.maximum(q_yz, _TINY), 1.0)
        return np.log(ratio) / _LN2

    def surrogate_slope(self, table: FloatArray, direction: FloatArray, smoothing: float = SMOOTHING) -> float:
        """Directional derivative of the surrogate at ``table`` along ``direction``."""
        return float(np.sum(self.surrogate_gradient(table, smoothing) * direction))

    def linear_minimizer(self, gradient: FloatArray) -> FloatArray:
        """Vertex of the polytope minimizing ``<gradient, V>``.

        Each active S slice is an independent transportation problem with
        margins ``P(s, .)`` and ``P(s, .)`` over Y and Z.
        """
        vertex = np.zeros(self.shape)
        for s in self.active:
            vertex[s] = solve_transportation(gradient[s], self.pair_sy[s], self.pair_sz[s])
        return vertex

    def certified_lower(self, table: FloatArray, smoothing: float = SMOOTHING) -> tuple[float, FloatArray]:
        """Linearization lower bound on the minimum of I(S;Y|Z) over the polytope.

        Returns:
            tuple[float, FloatArray]: The bound in bits and the minimizing vertex.
        """
        gradient = self.surrogate_gradient(table, smoothing)
        vertex = self.linear_minimizer(gradient)
        return self.h_s_given_z + float(np.sum(gradient * vertex)), vertex

    def move_table(self, move: CycleMove) -> FloatArray:
        """Direction table of a single cycle move."""
        direction = np.zeros(self.shape)
        direction[move.s, move.y, move.z] += 1.0
        direction[move.s, move.y0, move.z0] += 1.0
        direction[move.s, move.y, move.z0] -= 1.0
        direction[move.s, move.y0, move.z] -= 1.0
        return direction

    def move_tensor(self) -> FloatArray:
        """Stack of all move direction tables, shape ``(len(cycle_basis), |S|, |Y|, |Z|)``."""
        if not self.cycle_basis:
            return np.zeros((0, *self.shape))
        return np.stack([self.move_table(move) for move in self.cycle_basis])


def cycle_basis(pair_sy: FloatArray, pair_sz: FloatArray) -> tuple[CycleMove, ...]:
    """Enumerate ``|S| (|Y| - 1) (|Z| - 1)`` moves, anchored per slice at the heaviest Y and Z symbols."""
    moves = []
    for s in range(pair_sy.shape[0]):
        y0 = int(np.argmax(pair_sy[s]))
        z0 = int(np.argmax(pair_sz[s]))
        moves.extend(
            CycleMove(s, y, y0, z, z0)
            for y in range(pair_sy.shape[1])
            if y != y0
            for z in range(pair_sz.shape[1])
            if z != z0
        )
    return tuple(moves)


def build_polytope(d: JointDist, roles: RolesLike = None) -> MarginalPolytope:
    """Flatten ``d`` to (S, Y, Z) role axes and describe its marginal polytope.

    Args:
        d (JointDist): Input distribution.
        roles (RolesLike): Role groups; the first three variables by default.

    Returns:
        MarginalPolytope: Pair marginals, cycle basis and the constant H(S|Z).

    Raises:
        DistributionError: On empty, overlapping or unknown roles.
    """
    resolved = resolve_roles(d, roles)
    base = flatten_roles(d, resolved, resolved.names)
    table = base.table
    pair_sy = table.sum(axis=2)
    pair_sz = table.sum(axis=1)
    pair_sy.setflags(write=False)
    pair_sz.setflags(write=False)
    return MarginalPolytope(
        base=base,
        roles=resolved,
        pair_sy=pair_sy,
        pair_sz=pair_sz,
        cycle_basis=cycle_basis(pair_sy, pair_sz),
        h_s_given_z=max(entropy_table(pair_sz) - entropy_table(pair_sz.sum(axis=0)), 0.0),
    )


def feasible_point(poly: MarginalPolytope) -> JointDist:
    """The conditional-independence coupling ``Q(s,y,z) = P(s) P(y|s) P(z|s)``, a member of the polytope."""
    return poly.wrap(poly.feasible_table())
