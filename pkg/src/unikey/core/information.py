"""Entropic quantities in bits.

The table-level helpers (:func:`entropy_table`, :func:`cmi_table`,
:func:`cmi_gradient`) accept unnormalized nonnegative tables so solvers can use
them on iterates and perturbations directly.
"""

import math
from collections.abc import Iterable

import numpy as np
from scipy.special import entr

from unikey.core.joint import FloatArray, JointDist, as_names
from unikey.errors import DistributionError

STRUCTURAL_ZERO = 1e-15
_LN2 = math.log(2.0)
_TINY = np.finfo(np.float64).tiny


def entropy_table(table: FloatArray) -> float:
    """Shannon entropy in bits of a nonnegative table, entries below 1e-15 treated as zero."""
    cleaned = np.where(table < STRUCTURAL_ZERO, 0.0, table)
    return float(entr(cleaned).sum() / _LN2)


def _sum_axes(table: FloatArray, axes: Iterable[int]) -> FloatArray:
    axes = tuple(axes)
    return table.sum(axis=axes, keepdims=True) if axes else table


def cmi_table(table: FloatArray, a: tuple[int, ...], b: tuple[int, ...], c: tuple[int, ...] = ()) -> float:
    """I(A;B|C) in bits of a table whose axes are partitioned into groups.

    Axes outside ``a``, ``b`` and ``c`` are summed out. The table need not be normalized.
    """
    ndim = table.ndim
    rest = tuple(i for i in range(ndim) if i not in a + b + c)
    joint = _sum_axes(table, rest)
    j_ac = _sum_axes(joint, b)
    j_bc = _sum_axes(joint, a)
    j_c = _sum_axes(joint, a + b)
    value = entropy_table(j_ac) + entropy_table(j_bc) - entropy_table(joint) - entropy_table(j_c)
    return max(value, 0.0)


def cmi_gradient(table: FloatArray, a: tuple[int, ...], b: tuple[int, ...], c: tuple[int, ...] = ()) -> FloatArray:
    """Gradient of :func:`cmi_table` with respect to every entry of ``table``.

    Returns ``log2(J_abc J_c / (J_ac J_bc))`` broadcast back to the table shape,
    where ``J`` are the marginal tables. Log arguments are floored at the
    smallest positive double, so callers should smooth the table first.
    """
    rest = tuple(i for i in range(table.ndim) if i not in a + b + c)
    joint = _sum_axes(table, rest)
    j_ac = _sum_axes(joint, b)
    j_bc = _sum_axes(joint, a)
    j_c = _sum_axes(joint, a + b)
    floor = _TINY
    grad = (
        np.log(np.maximum(joint, floor))
        + np.log(np.maximum(j_c, floor))
        - np.log(np.maximum(j_ac, floor))
        - np.log(np.maximum(j_bc, floor))
    ) / _LN2
    return np.broadcast_to(grad, table.shape).copy()


def _check_disjoint(*groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for group in groups:
        overlap = seen.intersection(group)
        if overlap:
            raise DistributionError(f"variable sets overlap on {sorted(overlap)}")
        seen.update(group)


def entropy(
    d: JointDist,
    vars: str | Iterable[str] | None = None,  # noqa: A002
    given: str | Iterable[str] = (),
) -> float:
    """Conditional Shannon entropy H(vars | given) in bits.

    Args:
        d (JointDist): The distribution.
        vars (str | Iterable[str] | None): Variables whose entropy is measured; all by default.
        given (str | Iterable[str]): Conditioning variables, possibly empty.

    Returns:
        float: Entropy in bits, never negative.

    Raises:
        DistributionError: If the sets overlap or name unknown variables.
    """
    target = d.names if vars is None else as_names(vars)
    condition = as_names(given)
    _check_disjoint(target, condition)
    a = d.axes(target)
    c = d.axes(condition)
    rest = tuple(i for i in range(len(d.variables)) if i not in a + c)
    joint = _sum_axes(d.table, rest)
    value = entropy_table(joint) - entropy_table(_sum_axes(joint, a))
    return max(value, 0.0)


def cmi(d: JointDist, a: str | Iterable[str], b: str | Iterable[str], c: str | Iterable[str] = ()) -> float:
    """Conditional mutual information I(A;B|C) in bits; ``c`` may be empty.

    Raises:
        DistributionError: If the sets overlap, ``a`` or ``b`` is empty, or a name is unknown.
    """
    a_names, b_names, c_names = as_names(a), as_names(b), as_names(c)
    if not a_names or not b_names:
        raise DistributionError("mutual information needs nonempty variable sets")
    _check_disjoint(a_names, b_names, c_names)
    return cmi_table(d.table, d.axes(a_names), d.axes(b_names), d.axes(c_names))


def mutual_information(d: JointDist, a: str | Iterable[str], b: str | Iterable[str]) -> float:
    """Plain mutual information I(A;B) in bits."""
    return cmi(d, a, b)
