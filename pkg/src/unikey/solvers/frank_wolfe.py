import logging
from typing import NamedTuple

import numpy as np

from unikey.core.joint import FloatArray
from unikey.decomposition.polytope import MarginalPolytope
from unikey.solvers.base import AbstractUISolver, SolverRun

logger = logging.getLogger(__name__)

SMOOTHING_DECAY = 1e-3
SMOOTHING_FLOOR = 1e-150
_MAX_BACKTRACKS = 60
_MIN_WEIGHT = 1e-15


def _atom_key(table: FloatArray) -> bytes:
    return np.round(table, 14).tobytes()


class ActiveSet:
    """Convex combination of polytope points representing the current iterate."""

    def __init__(self, start: FloatArray) -> None:
        """Start from a single atom with full weight."""
        self.atoms: dict[bytes, tuple[FloatArray, float]] = {_atom_key(start): (start, 1.0)}

    def __len__(self) -> int:
        """Number of atoms with positive weight."""
        return len(self.atoms)

    def worst(self, gradient: FloatArray) -> tuple[bytes, FloatArray, float]:
        """Atom maximizing ``<gradient, atom>``, the away direction's origin."""
        key = max(self.atoms, key=lambda k: (float(np.sum(gradient * self.atoms[k][0])), k))
        atom, weight = self.atoms[key]
        return key, atom, weight

    def toward(self, vertex: FloatArray, gamma: float) -> None:
        """Record a Frank-Wolfe step of size ``gamma`` towards ``vertex``."""
        if gamma >= 1.0:
            self.atoms = {_atom_key(vertex): (vertex, 1.0)}
            return
        self.atoms = {k: (atom, weight * (1.0 - gamma)) for k, (atom, weight) in self.atoms.items()}
        key = _atom_key(vertex)
        weight = self.atoms[key][1] if key in self.atoms else 0.0
        self.atoms[key] = (vertex, weight + gamma)
        self._prune()

    def away(self, key: bytes, gamma: float, gamma_max: float) -> None:
        """Record an away step of size ``gamma`` from the atom ``key``."""
        self.atoms = {k: (atom, weight * (1.0 + gamma)) for k, (atom, weight) in self.atoms.items()}
        atom, weight = self.atoms[key]
        if gamma >= gamma_max:
            del self.atoms[key]
        else:
            self.atoms[key] = (atom, weight - gamma)
        self._prune()

    def _prune(self) -> None:
        self.atoms = {k: v for k, v in self.atoms.items() if v[1] > _MIN_WEIGHT}


class Step(NamedTuple):
    """An accepted move: its size, the new table and its exact objective."""

    gamma: float
    table: FloatArray
    value: float


class FrankWolfeSolver(AbstractUISolver):
    """Conditional gradient descent over the marginal polytope with exact line search.

    Each iteration solves one transportation program per S slice to obtain the
    Frank-Wolfe vertex; the same linearization gives a certified lower bound,
    and the run stops once the best bound is within ``tolerance`` of the
    current value or the iteration cap is reached.

    The linearization uses a smoothed table, which keeps the bound valid but
    can make the step direction useless for the exact objective on cells with
    almost no mass. When neither the away step nor the plain step decreases
    the objective, the smoothing shrinks by ``SMOOTHING_DECAY`` and the
    iteration is retried.
    """

    method = "frank_wolfe"

    def line_search(
        self, poly: MarginalPolytope, table: FloatArray, direction: FloatArray, gamma_max: float, smoothing: float
    ) -> float:
        """Minimize the convex surrogate along ``table + gamma * direction`` for ``gamma`` in ``[0, gamma_max]``.

        Bisects on the sign of the directional derivative. Returns the left end
        of the final bracket, or its right end when the left one never moved.
        """
        if poly.surrogate_slope(table + gamma_max * direction, direction, smoothing) <= 0.0:
            return gamma_max
        lo, hi = 0.0, gamma_max
        for _ in range(self.options.line_search_steps):
            mid = 0.5 * (lo + hi)
            if poly.surrogate_slope(table + mid * direction, direction, smoothing) < 0.0:
                lo = mid
            else:
                hi = mid
        return lo if lo > 0.0 else hi

    def _descend(
        self, poly: MarginalPolytope, table: FloatArray, value: float, direction: FloatArray, gamma: float
    ) -> Step | None:
        """Halve ``gamma`` until the exact objective strictly decreases."""
        for _ in range(_MAX_BACKTRACKS):
            candidate = table + gamma * direction
            candidate_value = poly.objective(candidate)
            if candidate_value < value:
                return Step(gamma, candidate, candidate_value)
            gamma *= 0.5
        return None

    def _try(
        self,
        poly: MarginalPolytope,
        table: FloatArray,
        value: float,
        gradient: FloatArray,
        direction: FloatArray,
        gamma_max: float,
        smoothing: float,
    ) -> Step | None:
        if float(np.sum(gradient * direction)) >= 0.0:
            return None
        gamma = self.line_search(poly, table, direction, gamma_max, smoothing)
        return self._descend(poly, table, value, direction, gamma)

    def minimize(self, poly: MarginalPolytope) -> SolverRun:
        """Run Frank-Wolfe (with away steps unless disabled) from the conditional-independence coupling."""
        options = self.options
        table = poly.feasible_table()
        value = poly.objective(table)
        lower = self.trivial_lower(poly)
        atoms = ActiveSet(table)
        trace = [value]
        smoothing = options.smoothing

        iterations = 0
        converged = stalled = False
        while True:
            gradient = poly.surrogate_gradient(table, smoothing)
            vertex = poly.linear_minimizer(gradient)
            lower = max(lower, poly.h_s_given_z + float(np.sum(gradient * vertex)))
            if value - lower <= options.tolerance:
                converged = True
                break
            if iterations >= options.max_iters:
                break
            iterations += 1

            step: Step | None = None
            away_key: bytes | None = None
            gamma_max = 1.0
            if options.away_steps and len(atoms) > 1:
                key, atom, weight = atoms.worst(gradient)
                away = table - atom
                if weight < 1.0 and float(np.sum(gradient * away)) < float(np.sum(gradient * (vertex - table))):
                    gamma_max = weight / (1.0 - weight)
                    step = self._try(poly, table, value, gradient, away, gamma_max, smoothing)
                    away_key = key if step is not None else None
            if step is None:
                gamma_max = 1.0
                step = self._try(poly, table, value, gradient, vertex - table, gamma_max, smoothing)
            if step is None:
                if smoothing * SMOOTHING_DECAY < SMOOTHING_FLOOR:
                    stalled = True
                    break
                smoothing *= SMOOTHING_DECAY
                logger.debug("no decrease at iteration %d, smoothing lowered to %.1e", iterations, smoothing)
                continue

            if away_key is None:
                atoms.toward(vertex, step.gamma)
            else:
                atoms.away(away_key, step.gamma, gamma_max)
            table, value = step.table, step.value
            trace.append(value)

        if stalled:
            logger.warning(
                "Frank-Wolfe found no decrease after %d iterations at smoothing %.1e, gap %.3g > tolerance %.3g",
                iterations,
                smoothing,
                value - lower,
                options.tolerance,
            )
        elif not converged:
            logger.warning(
                "Frank-Wolfe hit the iteration cap of %d with gap %.3g > tolerance %.3g",
                options.max_iters,
                value - lower,
                options.tolerance,
            )
        logger.debug("Frank-Wolfe finished: value %.9f, lower %.9f, %d iterations", value, lower, iterations)
        table = np.maximum(table, 0.0)
        return SolverRun(table, value, min(lower, value), iterations, converged, self.method, tuple(trace))
