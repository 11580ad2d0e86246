"""Seeded ensembles of property checks and their aggregated reports.

Instance ``i`` of the ``k``-th shape of a property draws from
``SeedSequence((config.seed, property code, k, seed_offset + i))``, so any
recorded seed reproduces its instance regardless of what else the suite runs.
"""

import asyncio
import logging
import math
from collections.abc import Callable
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from unikey.core.channel import Channel, apply_channel
from unikey.core.joint import JointDist, random_dirichlet
from unikey.errors import InputFileError, UnikeyError
from unikey.harness.checks import (
    CHECK_SLACK,
    CONTINUITY_ENVELOPE,
    SEARCH_SLACK,
    CheckOutcome,
    check_additivity,
    check_alice_bob_monotonicity,
    check_blackwell_vanishing,
    check_chain,
    check_collapse_at_qstar,
    check_consistency,
    check_continuity,
    check_corollary,
    check_eve_monotonicity,
    check_locking,
    check_nested_ui,
    check_normalization,
    check_public_communication,
    check_triangle,
    parity,
    perturbed,
)
from unikey.options import BoundsOptions, SolverOptions

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib  # type: ignore[no-redef]

logger = logging.getLogger(__name__)

PropertyId = Literal[
    "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P9", "PROP1", "COR1", "PROP3", "LOCK", "THM4", "COLLAPSE"
]
PROPERTY_IDS: tuple[str, ...] = (
    "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P9", "PROP1", "COR1", "PROP3", "LOCK", "THM4", "COLLAPSE",
)  # fmt: skip
FOUR_VARIABLE = frozenset({"PROP1", "COR1", "LOCK"})
CONTINUITY_DISTANCE = 1e-3


class EnsembleSpec(BaseModel):
    """One property checked on ``count`` seeded draws of every shape in ``shapes``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    property_id: PropertyId
    shapes: list[tuple[PositiveInt, ...]]
    count: PositiveInt = 100
    seed_offset: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_arity(self) -> "EnsembleSpec":
        arity = 4 if self.property_id in FOUR_VARIABLE else 3
        for shape in self.shapes:
            if len(shape) != arity:
                raise ValueError(f"{self.property_id} needs {arity}-variable shapes, got {shape}")
        return self


class SuiteConfig(BaseModel):
    """Seeds, ensembles and solver settings of a property suite.

    Attributes:
        seed (int): Root seed shared by every ensemble.
        concentration (float): Symmetric Dirichlet parameter of random draws.
        slack (float): Slack added to the gap-derived tolerances of checks on certified UI runs.
        search_slack (float): Slack of the checks that compare UI against a bound search.
        continuity_envelope (float): Allowed UI change between the perturbed pairs of P7.
        options (SolverOptions): Settings of every UI computation.
        bounds (BoundsOptions): Settings of the key-rate bound searches.
        ensembles (list[EnsembleSpec]): What to check.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default=0, ge=0, lt=2**64)
    concentration: PositiveFloat = 1.0
    slack: float = Field(default=CHECK_SLACK, ge=0.0)
    search_slack: float = Field(default=SEARCH_SLACK, ge=0.0)
    continuity_envelope: PositiveFloat = CONTINUITY_ENVELOPE
    options: SolverOptions = SolverOptions()
    bounds: BoundsOptions = BoundsOptions()
    ensembles: list[EnsembleSpec] = []

    @classmethod
    def default(cls, count: int = 100) -> "SuiteConfig":
        """Every property on ``count`` draws, split over shapes 2x2x2 and 3x3x2 (2x2x2x2 for four variables)."""
        ensembles = []
        for property_id in PROPERTY_IDS:
            if property_id in FOUR_VARIABLE:
                ensembles.append(EnsembleSpec(property_id=property_id, shapes=[(2, 2, 2, 2)], count=count))
            else:
                half = max(count // 2, 1)
                ensembles.append(EnsembleSpec(property_id=property_id, shapes=[(2, 2, 2), (3, 3, 2)], count=half))
        return cls(ensembles=ensembles)

    @classmethod
    def from_toml(cls, path: str | Path) -> "SuiteConfig":
        """Load a suite configuration from a TOML file.

        Raises:
            InputFileError: If the file cannot be read or does not validate.
        """
        try:
            with Path(path).open("rb") as handle:
                data = tomllib.load(handle)
            return cls.model_validate(data)
        except (OSError, tomllib.TOMLDecodeError, ValueError) as e:
            raise InputFileError(f"invalid suite configuration {path}: {e}") from e


class PropertyReport(BaseModel):
    """Aggregated outcome of one ensemble on one shape.

    Attributes:
        property_id (str): Checked property.
        shape (tuple[int, ...]): Alphabet sizes of the draws.
        instances (int): Instances checked.
        violations (int): Instances failing beyond tolerance, errors included.
        errors (int): Instances whose check raised.
        worst_slack (float | None): Smallest ``slack + tolerance`` observed.
        seeds (list[int]): Instance seeds checked.
        failed_seeds (list[int]): Instance seeds that violated the property.
        labels (dict[str, int]): Tally of the labels the check attached.
    """

    model_config = ConfigDict(frozen=True)

    property_id: str
    shape: tuple[int, ...]
    instances: int
    violations: int
    errors: int = 0
    worst_slack: float | None = None
    seeds: list[int]
    failed_seeds: list[int] = []
    labels: dict[str, int] = {}

    @property
    def passed(self) -> bool:
        """Whether no instance violated the property."""
        return self.violations == 0


def _rng(config: SuiteConfig, property_id: str, shape_index: int, instance: int) -> np.random.Generator:
    code = PROPERTY_IDS.index(property_id)
    return np.random.default_rng(np.random.SeedSequence((config.seed, code, shape_index, instance)))


def _draw(shape: tuple[int, ...], config: SuiteConfig, rng: np.random.Generator, names: tuple[str, ...]) -> JointDist:
    return random_dirichlet(shape, config.concentration, rng, names)


def _markov_chain(shape: tuple[int, ...], config: SuiteConfig, rng: np.random.Generator) -> JointDist:
    """S -> Z -> Y with random channels, laid out as (S, Z, Y)."""
    n_s, n_y, n_z = shape
    source = JointDist([("S", n_s)], rng.dirichlet(np.full(n_s, config.concentration)))
    with_z = apply_channel(source, Channel.random([("S", n_s)], ("Z", n_z), rng, config.concentration))
    return apply_channel(with_z, Channel.random([("Z", n_z)], ("Y", n_y), rng, config.concentration))


def _perfect_secret(shape: tuple[int, ...], config: SuiteConfig, rng: np.random.Generator) -> JointDist:
    """Uniform S, Y = S and Z drawn independently of both."""
    n_s, _, n_z = shape
    eve = rng.dirichlet(np.full(n_z, config.concentration))
    table = np.einsum("sy,z->syz", np.eye(n_s) / n_s, eve)
    return JointDist([("S", n_s), ("Y", n_s), ("Z", n_z)], table)


def run_instance(
    config: SuiteConfig, property_id: str, shape: tuple[int, ...], shape_index: int, seed: int
) -> CheckOutcome:
    """Build and check one instance; deterministic in its arguments."""
    rng = _rng(config, property_id, shape_index, seed)
    options, slack = config.options, config.slack
    three = ("S", "Y", "Z")
    match property_id:
        case "P1":
            return check_consistency(_draw(shape, config, rng, three), None, options, slack)
        case "P2":
            return check_blackwell_vanishing(_markov_chain(shape, config, rng), three, options, slack)
        case "P3":
            d = _draw(shape, config, rng, three)
            party = ("S", "Y")[int(rng.integers(2))]
            size = d.size_of(party)
            ch = Channel.random([(party, size)], (f"{party}'", size), rng, config.concentration)
            return check_alice_bob_monotonicity(d, ch, None, options, slack)
        case "P4":
            d = _draw(shape, config, rng, three)
            return check_public_communication(d, parity, 2, None, options, slack)
        case "P5":
            return check_normalization(_perfect_secret(shape, config, rng), None, options, slack)
        case "P6":
            return check_additivity(_draw(shape, config, rng, three), 2, None, options, slack)
        case "P7":
            d = _draw(shape, config, rng, three)
            other = perturbed(d, _draw(shape, config, rng, three), CONTINUITY_DISTANCE)
            return check_continuity(d, other, None, options, config.continuity_envelope)
        case "P9":
            d = _draw(shape, config, rng, three)
            n_z = d.size_of("Z")
            ch = Channel.random([("Z", n_z)], ("Z'", n_z), rng, config.concentration)
            return check_eve_monotonicity(d, ch, None, options, slack)
        case "PROP1":
            return check_triangle(_draw(shape, config, rng, ("S", "Y", "Z", "Zp")), None, options, slack)
        case "COR1":
            return check_corollary(_draw(shape, config, rng, ("S", "Y", "Z", "Zp")), None, options, slack)
        case "LOCK":
            return check_locking(_draw(shape, config, rng, ("S", "Y", "Z", "U")), None, options, slack)
        case "PROP3":
            return check_nested_ui(_draw(shape, config, rng, three), None, _bounds(config), config.search_slack)
        case "THM4":
            return check_chain(_draw(shape, config, rng, three), None, _bounds(config))
        case "COLLAPSE":
            return check_collapse_at_qstar(_draw(shape, config, rng, three), None, _bounds(config), config.search_slack)
    raise ValueError(f"unknown property {property_id!r}")


def _bounds(config: SuiteConfig) -> BoundsOptions:
    return config.bounds.model_copy(update={"ui": config.options})


def run_ensemble(config: SuiteConfig, spec: EnsembleSpec, shape_index: int) -> PropertyReport:
    """Check every instance of one shape; failures are counted, never raised."""
    shape = tuple(spec.shapes[shape_index])
    seeds = [spec.seed_offset + i for i in range(spec.count)]
    violations = errors = 0
    worst = math.inf
    failed: list[int] = []
    labels: dict[str, int] = {}
    for seed in seeds:
        try:
            outcome = run_instance(config, spec.property_id, shape, shape_index, seed)
        except (UnikeyError, ArithmeticError, ValueError) as e:
            errors += 1
            violations += 1
            failed.append(seed)
            logger.error("%s %s seed %d raised %s: %s", spec.property_id, shape, seed, type(e).__name__, e)
            continue
        worst = min(worst, outcome.slack + outcome.tolerance)
        if outcome.label is not None:
            labels[outcome.label] = labels.get(outcome.label, 0) + 1
        if not outcome.passed:
            violations += 1
            failed.append(seed)
            logger.error(
                "%s %s seed %d violated: slack %.3g, tolerance %.3g, consistent %s",
                spec.property_id,
                shape,
                seed,
                outcome.slack,
                outcome.tolerance,
                outcome.consistent,
            )
    return PropertyReport(
        property_id=spec.property_id,
        shape=shape,
        instances=len(seeds),
        violations=violations,
        errors=errors,
        worst_slack=None if math.isinf(worst) else worst,
        seeds=seeds,
        failed_seeds=failed,
        labels=labels,
    )


def _jobs(config: SuiteConfig) -> list[tuple[EnsembleSpec, int]]:
    return [(spec, index) for spec in config.ensembles for index in range(len(spec.shapes))]


def _sorted(reports: list[PropertyReport]) -> list[PropertyReport]:
    return sorted(reports, key=lambda r: (r.property_id, r.seeds[0] if r.seeds else -1, r.shape))


def run_suite(config: SuiteConfig, progress: Callable[[PropertyReport], None] | None = None) -> list[PropertyReport]:
    """Run every ensemble of ``config``.

    Args:
        config (SuiteConfig): Suite definition; an empty ensemble list yields an empty report.
        progress (Callable | None): Called with each report as it completes.

    Returns:
        list[PropertyReport]: Reports sorted by property id, then first seed and shape.
    """
    reports = []
    for spec, index in _jobs(config):
        report = run_ensemble(config, spec, index)
        if progress is not None:
            progress(report)
        reports.append(report)
    return _sorted(reports)


async def arun_suite(config: SuiteConfig) -> list[PropertyReport]:
    """Asynchronous :func:`run_suite`; every ensemble runs in a worker thread."""
    reports = await asyncio.gather(
        *(asyncio.to_thread(run_ensemble, config, spec, index) for spec, index in _jobs(config))
    )
    return _sorted(list(reports))
