import logging
import math
import warnings
from collections.abc import Iterable, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from unikey.errors import DistributionError, NormalizationWarning

logger = logging.getLogger(__name__)

Variable = tuple[str, int]
FloatArray = NDArray[np.float64]

MAX_STATES = 2**20
DEFAULT_NAMES = ("S", "Y", "Z", "Zp", "U", "V")

_SILENT_RENORMALIZATION = 1e-9
_WARNED_RENORMALIZATION = 1e-6
_NEGATIVE_SLACK = 1e-12


def as_names(names: str | Iterable[str]) -> tuple[str, ...]:
    """Normalize a single variable name or an iterable of names to a tuple."""
    if isinstance(names, str):
        return (names,)
    return tuple(names)


def _normalize_probabilities(probs: FloatArray) -> FloatArray:
    if not np.all(np.isfinite(probs)):
        raise DistributionError("probabilities must be finite")
    if np.any(probs < -_NEGATIVE_SLACK):
        raise DistributionError(f"negative probability {float(probs.min())!r}")
    probs = np.maximum(probs, 0.0)

    total = float(probs.sum())
    deviation = abs(total - 1.0)
    if deviation > _WARNED_RENORMALIZATION:
        raise DistributionError(f"probabilities sum to {total!r}, expected 1")
    if deviation > _SILENT_RENORMALIZATION:
        warnings.warn(
            f"probabilities sum to {total!r}; renormalizing",
            NormalizationWarning,
            stacklevel=4,
        )
    if deviation > 0.0:
        probs = probs / total
    return probs


class JointDist:
    """A dense joint probability mass function over named finite variables.

    Probabilities are stored row-major with the last listed variable varying
    fastest. Instances are immutable; the underlying array is read-only.
    """

    __slots__ = ("_table", "_variables")

    def __init__(self, variables: Sequence[Variable], probs: ArrayLike) -> None:
        """Validate and store a joint distribution.

        Args:
            variables (Sequence[Variable]): Ordered ``(name, size)`` pairs.
            probs (ArrayLike): Flat or already shaped probabilities.

        Raises:
            DistributionError: On duplicate names, non-positive sizes, a size
                mismatch, negative entries or a normalization error above 1e-6.
        """
        variables = tuple((str(name), int(size)) for name, size in variables)
        if not variables:
            raise DistributionError("a joint distribution needs at least one variable")
        names = [name for name, _ in variables]
        if len(set(names)) != len(names):
            raise DistributionError(f"duplicate variable names in {names}")
        for name, size in variables:
            if not name:
                raise DistributionError("variable names must be non-empty")
            if size < 1:
                raise DistributionError(f"variable '{name}' has size {size}, expected >= 1")

        shape = tuple(size for _, size in variables)
        flat = np.asarray(probs, dtype=np.float64).reshape(-1)
        if flat.size != math.prod(shape):
            raise DistributionError(f"expected {math.prod(shape)} probabilities for shape {shape}, got {flat.size}")

        table = _normalize_probabilities(flat).reshape(shape)
        table.setflags(write=False)
        self._variables = variables
        self._table = table

    @property
    def variables(self) -> tuple[Variable, ...]:
        """The ordered ``(name, size)`` pairs."""
        return self._variables

    @property
    def names(self) -> tuple[str, ...]:
        """The ordered variable names."""
        return tuple(name for name, _ in self._variables)

    @property
    def shape(self) -> tuple[int, ...]:
        """Alphabet sizes in variable order."""
        return self._table.shape

    @property
    def table(self) -> FloatArray:
        """Read-only probability table with one axis per variable."""
        return self._table

    @property
    def probs(self) -> FloatArray:
        """Read-only flat probability vector (row-major)."""
        return self._table.reshape(-1)

    def size_of(self, name: str) -> int:
        """Alphabet size of a variable."""
        return self._variables[self.axis(name)][1]

    def axis(self, name: str) -> int:
        """Axis index of a variable.

        Raises:
            DistributionError: If the variable is unknown.
        """
        for index, (candidate, _) in enumerate(self._variables):
            if candidate == name:
                return index
        raise DistributionError(f"unknown variable '{name}', expected one of {list(self.names)}")

    def axes(self, names: str | Iterable[str]) -> tuple[int, ...]:
        """Axis indices for a group of variable names."""
        return tuple(self.axis(name) for name in as_names(names))

    def allclose(self, other: "JointDist", atol: float = 1e-9) -> bool:
        """Whether two distributions share a layout and agree entrywise within ``atol``."""
        return self._variables == other.variables and bool(np.allclose(self._table, other.table, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        """Short representation with the variable layout."""
        layout = ", ".join(f"{name}:{size}" for name, size in self._variables)
        return f"JointDist({layout})"


def marginal(d: JointDist, keep: str | Iterable[str]) -> JointDist:
    """Sum out every variable not in ``keep``; kept variables stay in their original order.

    Raises:
        DistributionError: If ``keep`` is empty or names an unknown variable.
    """
    wanted = set(as_names(keep))
    if not wanted:
        raise DistributionError("marginal needs at least one variable to keep")
    for name in wanted:
        d.axis(name)
    kept_axes = tuple(i for i, name in enumerate(d.names) if name in wanted)
    summed = tuple(i for i in range(len(d.variables)) if i not in kept_axes)
    table = d.table.sum(axis=summed) if summed else d.table
    return JointDist([d.variables[i] for i in kept_axes], table)


def group_name(names: Sequence[str]) -> str:
    """Name of the product-alphabet variable built from ``names``."""
    return names[0] if len(names) == 1 else "(" + ",".join(names) + ")"


def flatten_roles(
    d: JointDist,
    groups: Sequence[str | Sequence[str]],
    names: Sequence[str] | None = None,
) -> JointDist:
    """Collapse each group of variables into one product-alphabet variable.

    Variables outside every group are summed out. Within a group the first
    listed variable is the most significant digit of the product symbol.

    Args:
        d (JointDist): Source distribution.
        groups (Sequence): One entry per output variable, each a name or names.
        names (Sequence[str] | None): Output variable names; defaults to
            :func:`group_name` of each group.

    Returns:
        JointDist: Distribution with exactly ``len(groups)`` variables.

    Raises:
        DistributionError: On empty or overlapping groups or unknown names.
    """
    resolved = [as_names(group) for group in groups]
    seen: set[str] = set()
    for group in resolved:
        if not group:
            raise DistributionError("role groups must be non-empty")
        overlap = seen.intersection(group)
        if overlap or len(set(group)) != len(group):
            raise DistributionError(f"role groups overlap on {sorted(overlap) or list(group)}")
        seen.update(group)

    out_names = list(names) if names is not None else [group_name(group) for group in resolved]
    if len(out_names) != len(resolved):
        raise DistributionError("one output name is required per role group")

    order = [d.axis(name) for group in resolved for name in group]
    dropped = tuple(i for i in range(len(d.variables)) if i not in order)
    table = d.table.sum(axis=dropped) if dropped else d.table
    remaining = [i for i in range(len(d.variables)) if i not in dropped]
    table = np.transpose(table, [remaining.index(i) for i in order])

    sizes = [math.prod(d.size_of(name) for name in group) for group in resolved]
    return JointDist(list(zip(out_names, sizes, strict=True)), table.reshape(sizes))


def rename(d: JointDist, mapping: Mapping[str, str]) -> JointDist:
    """Return ``d`` with variables renamed according to ``mapping``."""
    for name in mapping:
        d.axis(name)
    return JointDist([(mapping.get(name, name), size) for name, size in d.variables], d.table)


def l1_distance(d1: JointDist, d2: JointDist) -> float:
    """Sum of absolute entry differences.

    Raises:
        DistributionError: If the variable layouts differ.
    """
    if d1.variables != d2.variables:
        raise DistributionError(f"layout mismatch: {d1.variables} vs {d2.variables}")
    return float(np.abs(d1.table - d2.table).sum())


def tensor_power(d: JointDist, n: int, *, grouped: bool = True, max_states: int = MAX_STATES) -> JointDist:
    """The ``n``-fold independent product of ``d``.

    With ``grouped`` each variable ``X`` becomes the product-alphabet variable
    ``X^n`` (same name, size ``|X|**n``, copy 1 most significant). Otherwise the
    copies are kept apart as ``X_1 .. X_n``, ordered variable by variable.

    Raises:
        DistributionError: If ``n < 1`` or the result exceeds ``max_states``.
    """
    if n < 1:
        raise DistributionError(f"tensor power needs n >= 1, got {n}")
    states = math.prod(d.shape) ** n
    if states > max_states:
        raise DistributionError(f"tensor power has {states} states, exceeding the budget of {max_states}")
    if n == 1:
        return d

    table = d.table
    for _ in range(n - 1):
        table = np.multiply.outer(table, d.table)
    k = len(d.variables)
    # axes are ordered copy-major; regroup variable-major
    table = np.transpose(table, [copy * k + var for var in range(k) for copy in range(n)])

    if grouped:
        variables = [(name, size**n) for name, size in d.variables]
        return JointDist(variables, table.reshape([size for _, size in variables]))
    return JointDist([(f"{name}_{copy + 1}", size) for name, size in d.variables for copy in range(n)], table)


def random_dirichlet(
    shape: Sequence[int],
    concentration: float,
    seed: int | np.random.SeedSequence | np.random.Generator,
    names: Sequence[str] | None = None,
) -> JointDist:
    """Draw a reproducible joint distribution from a symmetric Dirichlet law.

    Args:
        shape (Sequence[int]): Alphabet sizes.
        concentration (float): Symmetric Dirichlet parameter, must be positive.
        seed (int | SeedSequence | Generator): Seed for :func:`numpy.random.default_rng`, or a generator to draw from.
        names (Sequence[str] | None): Variable names; defaults to S, Y, Z, Zp, U, V.

    Raises:
        DistributionError: On a non-positive concentration or bad shape.
    """
    if not concentration > 0:
        raise DistributionError(f"concentration must be positive, got {concentration}")
    shape = tuple(int(size) for size in shape)
    if names is None:
        names = [DEFAULT_NAMES[i] if i < len(DEFAULT_NAMES) else f"X{i}" for i in range(len(shape))]
    if len(names) != len(shape):
        raise DistributionError("one name is required per dimension")

    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.full(math.prod(shape), float(concentration)))
    return JointDist(list(zip(names, shape, strict=True)), probs / probs.sum())
