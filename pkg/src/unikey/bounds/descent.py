"""Multi-restart descent over products of stochastic matrices.

Channels are parametrized by logits with softmax rows. Rows belonging to input
symbols of probability zero are frozen at the uniform distribution. Every
restart is independent; results are merged by value with the lowest restart
index winning ties, so the outcome does not depend on the worker count.
"""

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import softmax

from unikey.core.joint import FloatArray
from unikey.options import BoundsOptions

logger = logging.getLogger(__name__)

GROWTH = 1.25
INITIAL_STEP = 1.0
_LOGIT_FLOOR = 1e-12

Kernels = list[FloatArray]


class Block(NamedTuple):
    """Shape of one channel matrix and the rows frozen at uniform."""

    rows: int
    cols: int
    frozen: NDArray[np.bool_]

    @classmethod
    def over(cls, input_mass: FloatArray, cols: int) -> "Block":
        """Block whose rows are frozen where the input marginal vanishes."""
        mass = np.asarray(input_mass).reshape(-1)
        return cls(mass.size, cols, mass <= 0.0)


class SmoothObjective(ABC):
    """A differentiable function of one or more channel matrices, to be minimized."""

    blocks: tuple[Block, ...]

    @abstractmethod
    def value(self, kernels: Kernels) -> float:
        """Objective in bits."""

    @abstractmethod
    def gradients(self, kernels: Kernels) -> Kernels:
        """Partial derivatives with respect to every kernel entry."""

    def kernels(self, logits: Kernels) -> Kernels:
        """Softmax rows of ``logits``, frozen rows set to uniform."""
        out = []
        for block, theta in zip(self.blocks, logits, strict=True):
            kernel = softmax(theta, axis=1)
            kernel[block.frozen] = 1.0 / block.cols
            out.append(kernel)
        return out

    def logit_gradients(self, logits: Kernels) -> Kernels:
        """Chain rule through the row softmax."""
        kernels = self.kernels(logits)
        out = []
        for block, kernel, grad in zip(self.blocks, kernels, self.gradients(kernels), strict=True):
            centred = grad - np.sum(kernel * grad, axis=1, keepdims=True)
            theta_grad = kernel * centred
            theta_grad[block.frozen] = 0.0
            out.append(theta_grad)
        return out

    def to_logits(self, kernels: Kernels) -> Kernels:
        """Logits reproducing ``kernels`` up to the floor applied to zero entries."""
        return [np.log(np.maximum(kernel, _LOGIT_FLOOR)) for kernel in kernels]

    def random_logits(self, rng: np.random.Generator) -> Kernels:
        """Standard normal logits."""
        return [rng.standard_normal((block.rows, block.cols)) for block in self.blocks]


class Outcome(NamedTuple):
    """One descent or candidate evaluation."""

    index: int
    value: float
    kernels: Kernels
    converged: bool


class SearchResult(NamedTuple):
    """Best outcome over every candidate, warm start and restart."""

    value: float
    kernels: Kernels
    converged: bool
    source: str


def descend(objective: SmoothObjective, logits: Kernels, options: BoundsOptions, index: int = 0) -> Outcome:
    """Gradient descent on logits with step halving on non-descent and growth on success.

    Stops when the step falls below ``options.min_step`` (converged) or after
    ``options.max_steps`` steps.
    """
    kernels = objective.kernels(logits)
    value = objective.value(kernels)
    step = INITIAL_STEP
    for _ in range(options.max_steps):
        if step < options.min_step:
            return Outcome(index, value, kernels, converged=True)
        grads = objective.logit_gradients(logits)
        trial = [theta - step * grad for theta, grad in zip(logits, grads, strict=True)]
        trial_kernels = objective.kernels(trial)
        trial_value = objective.value(trial_kernels)
        if trial_value < value:
            logits, kernels, value = trial, trial_kernels, trial_value
            step *= GROWTH
        else:
            step *= 0.5
    return Outcome(index, value, kernels, converged=step < options.min_step)


def search(
    objective: SmoothObjective,
    options: BoundsOptions,
    candidates: Sequence[Kernels] = (),
    warm_starts: Sequence[Kernels] = (),
) -> SearchResult:
    """Minimize ``objective`` over exact candidates, refined warm starts and random restarts.

    Args:
        objective (SmoothObjective): Function of the channel matrices.
        options (BoundsOptions): Restart count, step limits, seed and workers.
        candidates (Sequence[Kernels]): Channels evaluated exactly, never moved.
        warm_starts (Sequence[Kernels]): Channels used as descent starting points.

    Returns:
        SearchResult: The lowest value found and the channels achieving it.
    """
    exact = [Outcome(i, objective.value(k), [np.asarray(m) for m in k], True) for i, k in enumerate(candidates)]
    offset = len(exact)
    starts = [objective.to_logits(kernels) for kernels in warm_starts]
    for child in np.random.SeedSequence(options.seed).spawn(options.restarts):
        starts.append(objective.random_logits(np.random.default_rng(child)))

    jobs = [(offset + i, logits) for i, logits in enumerate(starts)]
    if options.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            refined = list(pool.map(lambda job: descend(objective, job[1], options, job[0]), jobs))
    else:
        refined = [descend(objective, logits, options, index) for index, logits in jobs]

    for outcome in refined:
        if not outcome.converged:
            logger.debug("restart %d stopped at the step cap with value %.9f", outcome.index, outcome.value)

    outcomes = exact + refined
    if not outcomes:
        raise ValueError("search needs at least one candidate or restart")
    best = min(outcomes, key=lambda outcome: (outcome.value, outcome.index))
    if best.index < offset:
        source = "candidate"
    elif best.index < offset + len(warm_starts):
        source = "warm_start"
    else:
        source = "restart"
    logger.debug("best of %d outcomes from %s %d: %.9f", len(outcomes), source, best.index, best.value)
    return SearchResult(best.value, best.kernels, best.converged, source)
