from abc import ABC, abstractmethod
from typing import ClassVar, NamedTuple

from unikey.core.information import cmi_table
from unikey.core.joint import FloatArray
from unikey.decomposition.polytope import MarginalPolytope
from unikey.options import SolverOptions

MONOTONE_SLACK = 1e-12


class SolverRun(NamedTuple):
    """Raw outcome of minimizing I(S;Y|Z) over a marginal polytope.

    Attributes:
        table (FloatArray): Best feasible table found.
        value (float): I(S;Y|Z) at ``table``, an upper value of the optimum.
        lower (float): Certified lower bound on the optimum.
        iterations (int): Iterations spent (summed over starts for multi-start solvers).
        converged (bool): Whether the solver's own stopping rule was met before its cap.
        method (str): Solver identifier.
        trace (tuple[float, ...]): Objective of every accepted iterate, for single-path solvers.
    """

    table: FloatArray
    value: float
    lower: float
    iterations: int
    converged: bool
    method: str
    trace: tuple[float, ...] = ()

    def first_increase(self, slack: float = MONOTONE_SLACK) -> int | None:
        """Index of the first iterate whose objective exceeds its predecessor's by more than ``slack``."""
        for index in range(1, len(self.trace)):
            if self.trace[index] > self.trace[index - 1] + slack:
                return index
        return None

    @property
    def gap(self) -> float:
        """Certified optimality gap, never negative."""
        return max(self.value - self.lower, 0.0)


class AbstractUISolver(ABC):
    """Base class for solvers of ``min I_Q(S;Y|Z)`` over a marginal polytope.

    Subclasses are single-owner state machines: build one per solve or reuse it
    sequentially, but do not share an instance between threads.
    """

    method: ClassVar[str]

    def __init__(self, options: SolverOptions | None = None) -> None:
        """Store solver settings, falling back to the defaults."""
        self.options = options or SolverOptions()

    @abstractmethod
    def minimize(self, poly: MarginalPolytope) -> SolverRun:
        """Minimize I(S;Y|Z) over ``poly``.

        Args:
            poly (MarginalPolytope): The feasible set.

        Returns:
            SolverRun: Best feasible table with its value and certificate.
        """

    def trivial_lower(self, poly: MarginalPolytope) -> float:
        """The bound ``max(0, I(S;Y) - I(S;Z))``, valid everywhere on the polytope."""
        i_sy = cmi_table(poly.pair_sy, (0,), (1,))
        i_sz = cmi_table(poly.pair_sz, (0,), (1,))
        return max(i_sy - i_sz, 0.0)
