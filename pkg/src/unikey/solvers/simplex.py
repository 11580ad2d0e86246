"""Dense two-phase simplex for small equality-form linear programs.

Solves ``min c @ x`` subject to ``A_eq @ x = b_eq`` and ``x >= 0``. Entering
columns follow Bland's rule (lowest index with negative reduced cost) and ratio
test ties go to the lowest basis index, so the method never cycles.
"""

import enum
import functools
import logging
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike

from unikey.core.joint import FloatArray

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-10
FEASIBILITY_TOLERANCE = 1e-9
MAX_PIVOTS = 50_000


class LPStatus(str, enum.Enum):
    """Outcome of a linear program."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    PIVOT_LIMIT = "pivot_limit"


class LPResult(NamedTuple):
    """Solution of :func:`solve_lp`; ``x`` is ``None`` unless a basic feasible point was found."""

    status: LPStatus
    x: FloatArray | None
    objective: float
    pivots: int


def _pivot(tableau: FloatArray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def _entering(costs: FloatArray) -> int:
    candidates = np.flatnonzero(costs < -PIVOT_TOLERANCE)
    return int(candidates[0]) if candidates.size else -1


def _leaving(tableau: FloatArray, col: int, basis: list[int]) -> int:
    column = tableau[:-1, col]
    rows = np.flatnonzero(column > PIVOT_TOLERANCE)
    if not rows.size:
        return -1
    ratios = tableau[rows, -1] / column[rows]
    best = ratios.min()
    ties = rows[ratios <= best + PIVOT_TOLERANCE * max(1.0, abs(best))]
    return int(min(ties, key=lambda r: basis[r]))


def _run(tableau: FloatArray, basis: list[int], max_pivots: int) -> tuple[LPStatus, int]:
    for pivots in range(max_pivots):
        col = _entering(tableau[-1, :-1])
        if col < 0:
            return LPStatus.OPTIMAL, pivots
        row = _leaving(tableau, col, basis)
        if row < 0:
            return LPStatus.UNBOUNDED, pivots
        _pivot(tableau, row, col)
        basis[row] = col
    return LPStatus.PIVOT_LIMIT, max_pivots


def _drive_out_artificials(tableau: FloatArray, basis: list[int], n: int) -> FloatArray:
    """Pivot artificial variables out of the basis, dropping rows that are redundant."""
    keep = []
    for row, var in enumerate(basis):
        if var < n:
            keep.append(row)
            continue
        candidates = np.flatnonzero(np.abs(tableau[row, :n]) > PIVOT_TOLERANCE)
        if candidates.size:
            col = int(candidates[0])
            _pivot(tableau, row, col)
            basis[row] = col
            keep.append(row)
    basis[:] = [basis[row] for row in keep]
    return tableau[[*keep, tableau.shape[0] - 1]]


def solve_lp(c: ArrayLike, A_eq: ArrayLike, b_eq: ArrayLike, *, max_pivots: int = MAX_PIVOTS) -> LPResult:
    """Minimize ``c @ x`` over ``{x >= 0 : A_eq @ x = b_eq}``.

    Args:
        c (ArrayLike): Cost vector of length ``n``.
        A_eq (ArrayLike): ``m x n`` constraint matrix.
        b_eq (ArrayLike): Right-hand side of length ``m``.
        max_pivots (int): Pivot budget shared by both phases.

    Returns:
        LPResult: Status, optimal point, objective value and pivot count.

    Raises:
        ValueError: If the shapes are inconsistent.
    """
    costs = np.asarray(c, dtype=np.float64).reshape(-1)
    A = np.array(A_eq, dtype=np.float64, ndmin=2)
    b = np.array(b_eq, dtype=np.float64).reshape(-1)
    m, n = A.shape
    if costs.size != n or b.size != m:
        raise ValueError(f"inconsistent LP shapes: c={costs.size}, A={A.shape}, b={b.size}")

    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = A
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[-1, :n] = -A.sum(axis=0)
    tableau[-1, -1] = -b.sum()
    basis = list(range(n, n + m))

    status, first = _run(tableau, basis, max_pivots)
    if status is not LPStatus.OPTIMAL:
        return LPResult(status, None, float("nan"), first)
    infeasibility = -tableau[-1, -1]
    if infeasibility > FEASIBILITY_TOLERANCE * max(1.0, float(b.sum())):
        return LPResult(LPStatus.INFEASIBLE, None, float("nan"), first)

    tableau = _drive_out_artificials(tableau, basis, n)
    tableau = np.delete(tableau, np.s_[n : n + m], axis=1)
    tableau[-1] = 0.0
    tableau[-1, :n] = costs
    for row, var in enumerate(basis):
        tableau[-1] -= costs[var] * tableau[row]

    status, second = _run(tableau, basis, max_pivots - first)
    if status is not LPStatus.OPTIMAL:
        return LPResult(status, None, float("nan"), first + second)

    x = np.zeros(n)
    x[basis] = np.maximum(tableau[:-1, -1], 0.0)
    logger.debug("simplex solved %dx%d program in %d pivots", m, n, first + second)
    return LPResult(LPStatus.OPTIMAL, x, float(costs @ x), first + second)


@functools.lru_cache(maxsize=64)
def transportation_constraints(rows: int, cols: int) -> FloatArray:
    """Equality matrix fixing row and column sums of a ``rows x cols`` plan flattened row-major."""
    matrix = np.zeros((rows + cols, rows * cols))
    for i in range(rows):
        matrix[i, i * cols : (i + 1) * cols] = 1.0
    for j in range(cols):
        matrix[rows + j, j::cols] = 1.0
    matrix.setflags(write=False)
    return matrix


def solve_transportation(cost: FloatArray, row_sums: FloatArray, col_sums: FloatArray) -> FloatArray:
    """Cheapest transport plan with the given margins.

    Args:
        cost (FloatArray): ``rows x cols`` cost matrix.
        row_sums (FloatArray): Required row sums.
        col_sums (FloatArray): Required column sums; must have the same total.

    Returns:
        FloatArray: Optimal ``rows x cols`` plan, a vertex of the transportation polytope.

    Raises:
        ArithmeticError: If the simplex does not reach an optimum.
    """
    rows, cols = cost.shape
    rhs = np.concatenate([row_sums, col_sums * (row_sums.sum() / max(col_sums.sum(), np.finfo(float).tiny))])
    result = solve_lp(cost.reshape(-1), transportation_constraints(rows, cols), rhs)
    if result.x is None:
        raise ArithmeticError(f"transportation subproblem ended with status {result.status.value}")
    return result.x.reshape(rows, cols)
