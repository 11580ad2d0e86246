import math
from collections.abc import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import softmax

from unikey.core.joint import FloatArray, JointDist, Variable, as_names
from unikey.errors import DistributionError

_ROW_TOLERANCE = 1e-9
_NEGATIVE_SLACK = 1e-12


class Channel:
    """A stochastic kernel from a (product) input alphabet to one output variable.

    Rows are indexed by the joint input symbol in row-major order over
    ``input_vars``; each row is a probability vector over the output alphabet.
    """

    __slots__ = ("_input_vars", "_kernel", "_output_var")

    def __init__(self, input_vars: Sequence[Variable], output_var: Variable, kernel: ArrayLike) -> None:
        """Validate and store a channel.

        Args:
            input_vars (Sequence[Variable]): Ordered ``(name, size)`` input variables.
            output_var (Variable): ``(name, size)`` of the produced variable.
            kernel (ArrayLike): Matrix with one row per joint input symbol.

        Raises:
            DistributionError: On shape mismatch, negative entries or rows not summing to 1.
        """
        input_vars = tuple((str(name), int(size)) for name, size in input_vars)
        output_var = (str(output_var[0]), int(output_var[1]))
        if not input_vars:
            raise DistributionError("a channel needs at least one input variable")
        rows = math.prod(size for _, size in input_vars)
        matrix = np.array(kernel, dtype=np.float64)
        if output_var[1] < 1 or matrix.size != rows * output_var[1]:
            raise DistributionError(f"kernel shape {matrix.shape} does not match ({rows}, {output_var[1]})")
        matrix = matrix.reshape(rows, output_var[1])
        if np.any(matrix < -_NEGATIVE_SLACK):
            raise DistributionError("channel kernels must be nonnegative")
        matrix = np.maximum(matrix, 0.0)
        sums = matrix.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _ROW_TOLERANCE):
            raise DistributionError(f"channel rows must sum to 1, got {sums.tolist()}")
        matrix = matrix / sums[:, None]
        matrix.setflags(write=False)

        self._input_vars = input_vars
        self._output_var = output_var
        self._kernel = matrix

    @property
    def input_vars(self) -> tuple[Variable, ...]:
        """Ordered ``(name, size)`` input variables."""
        return self._input_vars

    @property
    def input_names(self) -> tuple[str, ...]:
        """Names of the input variables."""
        return tuple(name for name, _ in self._input_vars)

    @property
    def output_var(self) -> Variable:
        """``(name, size)`` of the output variable."""
        return self._output_var

    @property
    def kernel(self) -> FloatArray:
        """Read-only row-stochastic matrix."""
        return self._kernel

    def compose(self, other: "Channel") -> "Channel":
        """Feed this channel's output through ``other``.

        Args:
            other (Channel): Channel whose single input matches this output.

        Returns:
            Channel: Garbled channel from this channel's inputs to ``other``'s output.

        Raises:
            DistributionError: If ``other`` does not read exactly this output.
        """
        if other.input_vars != (self._output_var,):
            raise DistributionError(f"cannot compose: {other.input_vars} does not read {self._output_var}")
        return Channel(self._input_vars, other.output_var, self._kernel @ other.kernel)

    @classmethod
    def identity(cls, input_var: Variable, output_name: str) -> "Channel":
        """Noiseless copy of a single variable."""
        return cls([input_var], (output_name, input_var[1]), np.eye(input_var[1]))

    @classmethod
    def constant(cls, input_vars: Sequence[Variable], output_var: Variable, symbol: int = 0) -> "Channel":
        """Channel that always emits ``symbol`` regardless of its input."""
        rows = math.prod(size for _, size in input_vars)
        kernel = np.zeros((rows, output_var[1]))
        kernel[:, symbol] = 1.0
        return cls(input_vars, output_var, kernel)

    @classmethod
    def uniform(cls, input_vars: Sequence[Variable], output_var: Variable) -> "Channel":
        """Channel whose output is uniform and independent of its input."""
        rows = math.prod(size for _, size in input_vars)
        return cls(input_vars, output_var, np.full((rows, output_var[1]), 1.0 / output_var[1]))

    @classmethod
    def from_function(
        cls,
        input_vars: Sequence[Variable],
        output_var: Variable,
        function: Callable[..., int],
    ) -> "Channel":
        """Deterministic channel ``out = function(*inputs)``.

        Raises:
            DistributionError: If ``function`` returns a symbol outside the output alphabet.
        """
        sizes = [size for _, size in input_vars]
        kernel = np.zeros((math.prod(sizes), output_var[1]))
        for row, symbols in enumerate(np.ndindex(*sizes)):
            out = int(function(*symbols))
            if not 0 <= out < output_var[1]:
                raise DistributionError(f"function output {out} outside alphabet of size {output_var[1]}")
            kernel[row, out] = 1.0
        return cls(input_vars, output_var, kernel)

    @classmethod
    def binary_symmetric(cls, input_var: Variable, output_name: str, flip: float) -> "Channel":
        """Binary symmetric channel with crossover probability ``flip``."""
        if input_var[1] != 2 or not 0.0 <= flip <= 1.0:
            raise DistributionError("binary symmetric channels need a binary input and 0 <= flip <= 1")
        return cls([input_var], (output_name, 2), [[1.0 - flip, flip], [flip, 1.0 - flip]])

    @classmethod
    def from_logits(cls, input_vars: Sequence[Variable], output_var: Variable, logits: ArrayLike) -> "Channel":
        """Channel whose rows are the softmax of ``logits``."""
        rows = math.prod(size for _, size in input_vars)
        matrix = np.asarray(logits, dtype=np.float64).reshape(rows, output_var[1])
        return cls(input_vars, output_var, softmax(matrix, axis=1))

    @classmethod
    def random(
        cls,
        input_vars: Sequence[Variable],
        output_var: Variable,
        seed: int | np.random.SeedSequence | np.random.Generator,
        concentration: float = 1.0,
    ) -> "Channel":
        """Channel with independent Dirichlet rows, reproducible from ``seed``."""
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        rows = math.prod(size for _, size in input_vars)
        kernel = rng.dirichlet(np.full(output_var[1], float(concentration)), size=rows)
        return cls(input_vars, output_var, kernel / kernel.sum(axis=1, keepdims=True))

    def __repr__(self) -> str:
        """Short representation with input and output layout."""
        inputs = ", ".join(f"{name}:{size}" for name, size in self._input_vars)
        return f"Channel({inputs} -> {self._output_var[0]}:{self._output_var[1]})"


def input_variables(d: JointDist, names: str | Sequence[str]) -> list[Variable]:
    """The ``(name, size)`` pairs of ``names`` as laid out in ``d``."""
    return [(name, d.size_of(name)) for name in as_names(names)]


def apply_channel(d: JointDist, ch: Channel) -> JointDist:
    """Extend ``d`` by the output of ``ch`` driven by its input variables.

    The new variable is appended last and is conditionally independent of
    every other variable given the channel inputs.

    Raises:
        DistributionError: On an output name collision or an input layout mismatch.
    """
    out_name, out_size = ch.output_var
    if out_name in d.names:
        raise DistributionError(f"output variable '{out_name}' already exists")
    for name, size in ch.input_vars:
        if d.size_of(name) != size:
            raise DistributionError(f"channel expects '{name}' of size {size}, distribution has {d.size_of(name)}")

    kernel = ch.kernel.reshape([size for _, size in ch.input_vars] + [out_size])
    axes = list(range(len(d.variables)))
    out_axis = len(axes)
    table = np.einsum(d.table, axes, kernel, [*d.axes(ch.input_names), out_axis], [*axes, out_axis])
    return JointDist([*d.variables, ch.output_var], table)
