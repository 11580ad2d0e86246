import logging
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from unikey.core.information import cmi_gradient
from unikey.core.joint import FloatArray
from unikey.decomposition.polytope import MarginalPolytope
from unikey.solvers.base import AbstractUISolver, SolverRun

logger = logging.getLogger(__name__)

STEP_COLLAPSE = 1e-14
BOUNDARY_MASS = 1e-13
STALL_WINDOW = 100
STALL_IMPROVEMENT = 1e-12
_BOUNDARY_FRACTION = 0.99


class StartResult(NamedTuple):
    """Outcome of one oracle start."""

    index: int
    table: FloatArray
    value: float
    iterations: int
    collapsed: bool


def max_step(table: FloatArray, direction: FloatArray) -> float:
    """Largest ``t`` with ``table + t * direction >= 0``; infinite if no entry decreases."""
    decreasing = direction < 0.0
    if not np.any(decreasing):
        return float("inf")
    return float(np.min(np.maximum(table[decreasing], 0.0) / -direction[decreasing]))


class MultiplicativeOracleSolver(AbstractUISolver):
    """Multi-start descent in cycle-move coordinates with multiplicative step adaptation.

    Shares no code path with the Frank-Wolfe solver besides the polytope
    description: iterates move along the cycle basis using the exact gradient
    of I(S;Y|Z), the step grows by 2 after every accepted move and halves after
    every rejected one, and a start ends when the step collapses.
    """

    method = "oracle"

    def _moves(self, poly: MarginalPolytope) -> FloatArray:
        support = poly.support
        tensor = poly.move_tensor()
        usable = [i for i, move in enumerate(tensor) if np.all(support[move != 0.0])]
        return tensor[usable]

    def _starts(self, poly: MarginalPolytope, moves: FloatArray) -> list[FloatArray]:
        origin = poly.feasible_table()
        starts = [origin]
        if not len(moves):
            return starts
        for child in np.random.SeedSequence(self.options.seed).spawn(self.options.starts - 1):
            rng = np.random.default_rng(child)
            direction = np.tensordot(rng.standard_normal(len(moves)), moves, axes=1)
            reach = max_step(origin, direction)
            starts.append(origin + 0.5 * min(reach, 1.0) * direction)
        return starts

    @staticmethod
    def _blocked(table: FloatArray, moves: FloatArray, coordinates: FloatArray) -> NDArray[np.bool_]:
        """Moves that would push an entry already at the boundary below zero."""
        at_boundary = table <= BOUNDARY_MASS
        signed = -coordinates[:, None, None, None] * moves
        return np.any((signed < 0.0) & at_boundary, axis=(1, 2, 3))

    def _descend(self, poly: MarginalPolytope, moves: FloatArray, index: int, table: FloatArray) -> StartResult:
        value = poly.objective(table)
        step = 1.0
        checkpoint = value
        for iteration in range(1, self.options.oracle_max_iters + 1):
            smooth = poly.smoothed(table, self.options.smoothing)
            gradient = cmi_gradient(smooth, (0,), (1,), (2,))
            coordinates = np.tensordot(moves, gradient, axes=([1, 2, 3], [0, 1, 2]))
            coordinates[self._blocked(table, moves, coordinates)] = 0.0
            direction = -np.tensordot(coordinates, moves, axes=1)
            reach = max_step(table, direction)
            length = min(step, _BOUNDARY_FRACTION * reach)
            if length < STEP_COLLAPSE or not np.any(coordinates):
                return StartResult(index, table, value, iteration, collapsed=True)

            candidate = table + length * direction
            candidate_value = poly.objective(candidate)
            if candidate_value < value:
                table, value = candidate, candidate_value
                step = 2.0 * length
            else:
                step = 0.5 * length

            if iteration % STALL_WINDOW == 0:
                if checkpoint - value < STALL_IMPROVEMENT and step < 1e-6:
                    return StartResult(index, table, value, iteration, collapsed=True)
                checkpoint = value
        return StartResult(index, table, value, self.options.oracle_max_iters, collapsed=False)

    def minimize(self, poly: MarginalPolytope) -> SolverRun:
        """Run every start and keep the lowest value, ties going to the lowest start index."""
        moves = self._moves(poly)
        starts = self._starts(poly, moves)
        if not len(moves):
            results = [StartResult(0, starts[0], poly.objective(starts[0]), 0, collapsed=True)]
        elif self.options.workers > 1:
            with ThreadPoolExecutor(max_workers=self.options.workers) as pool:
                results = list(pool.map(lambda item: self._descend(poly, moves, *item), enumerate(starts)))
        else:
            results = [self._descend(poly, moves, index, table) for index, table in enumerate(starts)]

        best = min(results, key=lambda result: (result.value, result.index))
        lower, _ = poly.certified_lower(best.table, self.options.smoothing)
        lower = max(lower, self.trivial_lower(poly))
        iterations = sum(result.iterations for result in results)
        converged = all(result.collapsed for result in results)
        if not converged:
            logger.warning("oracle starts hit the iteration cap of %d", self.options.oracle_max_iters)
        logger.debug("oracle best start %d of %d: value %.9f", best.index, len(results), best.value)
        table = np.maximum(best.table, 0.0)
        return SolverRun(table, best.value, min(lower, best.value), iterations, converged, self.method)
