"""Secret-key-rate bounds built from channel optimizations.

Maximizations (the one-way rate) report the value of the best strategy found,
a lower estimate. Minimizations (intrinsic information, B1, the reduced
intrinsic heuristic) report the value of the best channel found, an upper
estimate. Witness channels always reproduce the reported value.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from unikey.bounds.descent import Block, Kernels, SearchResult, SmoothObjective, search
from unikey.core.channel import Channel
from unikey.core.information import cmi_gradient, cmi_table, entropy_table
from unikey.core.joint import FloatArray, JointDist
from unikey.decomposition.polytope import RolesLike, build_polytope
from unikey.options import BoundsOptions

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)
_TINY = np.finfo(np.float64).tiny

CONVERGED = "converged"
STEP_CAP = "step_cap"
HEURISTIC = "heuristic"


class BoundEstimate(NamedTuple):
    """A bound value with the channels achieving it and the search status."""

    value: float
    witnesses: dict[str, Channel]
    status: str


def role_table(d: JointDist, roles: RolesLike = None) -> JointDist:
    """``d`` flattened to its (S, Y, Z) role axes."""
    return build_polytope(d, roles).base


def _status(result: SearchResult) -> str:
    return CONVERGED if result.converged else STEP_CAP


def constant_kernel(rows: int, cols: int) -> FloatArray:
    """Kernel sending every input to symbol 0."""
    kernel = np.zeros((rows, cols))
    kernel[:, 0] = 1.0
    return kernel


def padded_kernel(kernel: FloatArray, cols: int) -> FloatArray:
    """Embed ``kernel`` into a wider output alphabet; the extra symbols get no mass."""
    out = np.zeros((kernel.shape[0], cols))
    out[:, : kernel.shape[1]] = kernel
    return out


class OneWayRateObjective(SmoothObjective):
    """Negated ``I(U;Y|V) - I(U;Z|V)`` for channels U|S and V|U."""

    def __init__(self, table: FloatArray, u_size: int, v_size: int) -> None:
        """Store the (S, Y) and (S, Z) marginals of an (S, Y, Z) table."""
        self.p_sy = table.sum(axis=2)
        self.p_sz = table.sum(axis=1)
        self.blocks = (Block.over(self.p_sy.sum(axis=1), u_size), Block.over(np.ones(u_size), v_size))

    def _joints(self, kernels: Kernels) -> tuple[FloatArray, FloatArray]:
        to_u, to_v = kernels
        j_y = np.einsum("uy,uv->vuy", to_u.T @ self.p_sy, to_v)
        j_z = np.einsum("uz,uv->vuz", to_u.T @ self.p_sz, to_v)
        return j_y, j_z

    def value(self, kernels: Kernels) -> float:
        """Negated one-way strategy value in bits."""
        j_y, j_z = self._joints(kernels)
        return cmi_table(j_z, (1,), (2,), (0,)) - cmi_table(j_y, (1,), (2,), (0,))

    def gradients(self, kernels: Kernels) -> Kernels:
        """Derivatives with respect to U|S and V|U."""
        to_u, to_v = kernels
        j_y, j_z = self._joints(kernels)
        grads = []
        for pair, joint, sign in ((self.p_sy, j_y, -1.0), (self.p_sz, j_z, 1.0)):
            g = cmi_gradient(joint, (1,), (2,), (0,))
            a = to_u.T @ pair
            d_v = np.einsum("vuy,uy->uv", g, a)
            d_u = pair @ np.einsum("vuy,uv->uy", g, to_v).T
            grads.append((sign * d_u, sign * d_v))
        return [grads[0][0] + grads[1][0], grads[0][1] + grads[1][1]]


class IntrinsicObjective(SmoothObjective):
    """``I(S;Y|Z')`` for a channel Z'|Z."""

    def __init__(self, table: FloatArray, out_size: int) -> None:
        """Store an (S, Y, Z) table."""
        self.table = table
        self.blocks = (Block.over(table.sum(axis=(0, 1)), out_size),)

    def joint(self, kernels: Kernels) -> FloatArray:
        """Joint table over (S, Y, Z')."""
        return np.einsum("syz,zw->syw", self.table, kernels[0])

    def value(self, kernels: Kernels) -> float:
        """Conditional mutual information given the garbled eavesdropper output."""
        return cmi_table(self.joint(kernels), (0,), (1,), (2,))

    def gradients(self, kernels: Kernels) -> Kernels:
        """Derivative with respect to Z'|Z."""
        g = cmi_gradient(self.joint(kernels), (0,), (1,), (2,))
        return [np.einsum("syz,syw->zw", self.table, g)]


class MinimumIntrinsicObjective(SmoothObjective):
    """``I(S;Y|Z') + I(SY;Z'|Z)`` for a channel Z'|SYZ."""

    def __init__(self, table: FloatArray, out_size: int) -> None:
        """Store an (S, Y, Z) table."""
        self.table = table
        self.flat = table.reshape(-1)
        self.blocks = (Block.over(self.flat, out_size),)

    def joint(self, kernels: Kernels) -> FloatArray:
        """Joint table over (S, Y, Z, Z')."""
        return (self.flat[:, None] * kernels[0]).reshape(*self.table.shape, -1)

    def value(self, kernels: Kernels) -> float:
        """B1 objective in bits."""
        p4 = self.joint(kernels)
        return cmi_table(p4, (0,), (1,), (3,)) + cmi_table(p4, (0, 1), (3,), (2,))

    def gradients(self, kernels: Kernels) -> Kernels:
        """Derivative with respect to Z'|SYZ."""
        p4 = self.joint(kernels)
        g = cmi_gradient(p4, (0,), (1,), (3,)) + cmi_gradient(p4, (0, 1), (3,), (2,))
        return [self.flat[:, None] * g.reshape(self.flat.size, -1)]


class ReducedIntrinsicObjective(SmoothObjective):
    """``I(S;Y|Z') + H(U)`` for channels U|SYZ and Z'|ZU."""

    def __init__(self, table: FloatArray, u_size: int, out_size: int) -> None:
        """Store an (S, Y, Z) table."""
        self.table = table
        self.u_size = u_size
        p_z = table.sum(axis=(0, 1))
        self.blocks = (
            Block.over(table.reshape(-1), u_size),
            Block.over(np.repeat(p_z, u_size), out_size),
        )

    def _parts(self, kernels: Kernels) -> tuple[FloatArray, FloatArray, FloatArray]:
        to_u, to_w = kernels
        n_s, n_y, n_z = self.table.shape
        with_u = self.table[..., None] * to_u.reshape(n_s, n_y, n_z, self.u_size)
        w = to_w.reshape(n_z, self.u_size, -1)
        return with_u, w, np.einsum("syzu,zuw->syw", with_u, w)

    def value(self, kernels: Kernels) -> float:
        """Heuristic reduced-intrinsic objective in bits."""
        with_u, _, joint = self._parts(kernels)
        return cmi_table(joint, (0,), (1,), (2,)) + entropy_table(with_u.sum(axis=(0, 1, 2)))

    def gradients(self, kernels: Kernels) -> Kernels:
        """Derivatives with respect to U|SYZ and Z'|ZU."""
        with_u, w, joint = self._parts(kernels)
        g = cmi_gradient(joint, (0,), (1,), (2,))
        p_u = with_u.sum(axis=(0, 1, 2))
        d_entropy = -(np.log(np.maximum(p_u, _TINY)) + 1.0) / _LN2
        d_with_u = np.einsum("zuw,syw->syzu", w, g) + d_entropy
        d_u = (self.table[..., None] * d_with_u).reshape(-1, self.u_size)
        d_w = np.einsum("syzu,syw->zuw", with_u, g).reshape(-1, w.shape[2])
        return [d_u, d_w]


def one_way_rate(d: JointDist, roles: RolesLike = None, options: BoundsOptions | None = None) -> BoundEstimate:
    """Lower estimate of the one-way secret key rate.

    Maximizes ``I(U;Y|V) - I(U;Z|V)`` over U|S with ``|U| = |S|^2`` and V|U
    with ``|V| = |S|``. The candidates ``U = S`` and constant ``U`` make the
    result at least ``max(0, I(S;Y) - I(S;Z))``. Global optimality is not certified.
    """
    options = options or BoundsOptions()
    base = role_table(d, roles)
    s_name = base.names[0]
    n_s = base.shape[0]
    n_u, n_v = n_s * n_s, n_s
    objective = OneWayRateObjective(base.table, n_u, n_v)
    candidates = [
        [padded_kernel(np.eye(n_s), n_u), constant_kernel(n_u, n_v)],
        [constant_kernel(n_s, n_u), constant_kernel(n_u, n_v)],
    ]
    result = search(objective, options, candidates)
    to_u, to_v = result.kernels
    witnesses = {
        "U|S": Channel([(s_name, n_s)], ("U", n_u), to_u),
        "V|U": Channel([("U", n_u)], ("V", n_v), to_v),
    }
    return BoundEstimate(max(-result.value, 0.0), witnesses, _status(result))


def intrinsic_information(d: JointDist, roles: RolesLike = None, options: BoundsOptions | None = None) -> BoundEstimate:
    """Upper estimate of the intrinsic information ``min I(S;Y|Z')`` over Z'|Z with ``|Z'| = |Z|``.

    The identity and constant channels are always evaluated, so the result
    never exceeds ``min(I(S;Y|Z), I(S;Y))``.
    """
    options = options or BoundsOptions()
    base = role_table(d, roles)
    z_name = base.names[2]
    n_z = base.shape[2]
    objective = IntrinsicObjective(base.table, n_z)
    result = search(objective, options, [[np.eye(n_z)], [constant_kernel(n_z, n_z)]])
    witness = Channel([(z_name, n_z)], (f"{z_name}'", n_z), result.kernels[0])
    return BoundEstimate(result.value, {"Z'|Z": witness}, _status(result))


def lift_eve_channel(kernel: FloatArray, table_shape: tuple[int, ...], cols: int) -> FloatArray:
    """Turn a channel Z'|Z into Z'|SYZ ignoring S and Y, padded to ``cols`` outputs."""
    n_s, n_y, _ = table_shape
    return np.tile(padded_kernel(kernel, cols), (n_s * n_y, 1))


def minimum_intrinsic_information_b1(
    d: JointDist,
    roles: RolesLike = None,
    options: BoundsOptions | None = None,
    intrinsic: BoundEstimate | None = None,
) -> BoundEstimate:
    """Upper estimate of B1 ``= min I(S;Y|Z') + I(SY;Z'|Z)`` over Z'|SYZ.

    The output alphabet has ``|S||Y||Z|`` symbols unless ``options.z_prime_size``
    says otherwise. The intrinsic-information witness, lifted to ignore S and
    Y, is evaluated exactly and used as a warm start, so the result never
    exceeds the intrinsic estimate; the constant channel bounds it by I(S;Y).

    Args:
        d (JointDist): Input distribution.
        roles (RolesLike): S, Y and Z role groups.
        options (BoundsOptions | None): Search settings.
        intrinsic (BoundEstimate | None): A precomputed intrinsic estimate to lift.
    """
    options = options or BoundsOptions()
    base = role_table(d, roles)
    n_s, n_y, n_z = base.shape
    n_w = max(options.z_prime_size or n_s * n_y * n_z, n_z)
    intrinsic = intrinsic or intrinsic_information(base, None, options)
    lifted = lift_eve_channel(intrinsic.witnesses["Z'|Z"].kernel, base.shape, n_w)
    identity = lift_eve_channel(np.eye(n_z), base.shape, n_w)
    objective = MinimumIntrinsicObjective(base.table, n_w)
    result = search(
        objective,
        options,
        candidates=[[lifted], [identity], [constant_kernel(n_s * n_y * n_z, n_w)]],
        warm_starts=[[lifted]],
    )
    s_name, y_name, z_name = base.names
    witness = Channel([(s_name, n_s), (y_name, n_y), (z_name, n_z)], (f"{z_name}'", n_w), result.kernels[0])
    return BoundEstimate(result.value, {"Z'|SYZ": witness}, _status(result))


def reduced_intrinsic_heuristic(
    d: JointDist,
    roles: RolesLike = None,
    u_cap: int | None = None,
    options: BoundsOptions | None = None,
    intrinsic: BoundEstimate | None = None,
) -> BoundEstimate:
    """Heuristic upper estimate of the reduced intrinsic information with ``|U| = u_cap``.

    Minimizes ``I(S;Y|Z') + H(U)`` over U|SYZ and Z'|ZU with ``|Z'| = |Z| u_cap``.
    No cardinality bound is known for the true infimum, so the result is
    always flagged as heuristic. A constant U is among the candidates, which
    keeps the value at or below the intrinsic estimate.
    """
    options = options or BoundsOptions()
    u_size = u_cap or options.u_cap
    base = role_table(d, roles)
    intrinsic = intrinsic or intrinsic_information(base, None, options)
    if u_size == 1:
        return BoundEstimate(intrinsic.value, dict(intrinsic.witnesses), HEURISTIC)

    n_s, n_y, n_z = base.shape
    n_w = n_z * u_size
    constant_u = constant_kernel(n_s * n_y * n_z, u_size)
    eve = np.full((n_z, u_size, n_w), 1.0 / n_w)
    eve[:, 0, :] = padded_kernel(intrinsic.witnesses["Z'|Z"].kernel, n_w)
    objective = ReducedIntrinsicObjective(base.table, u_size, n_w)
    result = search(objective, options, candidates=[[constant_u, eve.reshape(n_z * u_size, n_w)]])

    s_name, y_name, z_name = base.names
    to_u, to_w = result.kernels
    witnesses = {
        "U|SYZ": Channel([(s_name, n_s), (y_name, n_y), (z_name, n_z)], ("U", u_size), to_u),
        "Z'|ZU": Channel([(z_name, n_z), ("U", u_size)], (f"{z_name}'", n_w), to_w),
    }
    return BoundEstimate(result.value, witnesses, HEURISTIC)


class TwoWayBounds(NamedTuple):
    """Elementary bounds on the two-way key rate."""

    lower: float
    upper: float


def trivial_two_way_bounds(d: JointDist, roles: RolesLike = None) -> TwoWayBounds:
    """``max(I(S;Y) - I(S;Z), I(Y;S) - I(Y;Z), 0) <= S <= min(I(S;Y), I(S;Y|Z))``."""
    table = role_table(d, roles).table
    i_sy = cmi_table(table, (0,), (1,))
    i_sz = cmi_table(table, (0,), (2,))
    i_yz = cmi_table(table, (1,), (2,))
    i_sy_z = cmi_table(table, (0,), (1,), (2,))
    return TwoWayBounds(max(i_sy - i_sz, i_sy - i_yz, 0.0), min(i_sy, i_sy_z))
