"""Test the property checks and the seeded suite runner."""

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from tests.resources import markov_chain
from unikey.core.channel import Channel
from unikey.core.joint import JointDist, l1_distance, random_dirichlet
from unikey.errors import DistributionError, InputFileError
from unikey.harness import suite
from unikey.harness.checks import (
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
from unikey.harness.suite import EnsembleSpec, PropertyReport, SuiteConfig, arun_suite, run_ensemble, run_suite
from unikey.options import BoundsOptions

FOUR = ("S", "Y", "Z", "Zp")


def test_outcome_passes_within_tolerance() -> None:
    """Test the pass rule combines slack, tolerance and the side condition."""
    assert CheckOutcome(-1e-5, 1e-4).passed
    assert not CheckOutcome(-1e-3, 1e-4).passed
    assert not CheckOutcome(0.5, 1e-4, consistent=False).passed


def test_consistency_on_xor(xor: JointDist) -> None:
    """Test the shared-information identity on XOR."""
    assert check_consistency(xor).passed


def test_blackwell_vanishing(degraded: JointDist, perfect_secret_bit: JointDist) -> None:
    """Test the degradation check passes on a garbled Bob and fails on a secret bit."""
    assert check_blackwell_vanishing(degraded).passed
    assert check_blackwell_vanishing(markov_chain(3, 2, 2, 3)).passed
    assert not check_blackwell_vanishing(perfect_secret_bit).passed


def test_normalization(perfect_secret_bit: JointDist, copy: JointDist) -> None:
    """Test UI equals H(S) on a perfect secret and not on a copy."""
    assert check_normalization(perfect_secret_bit).passed
    assert not check_normalization(copy).passed


@pytest.mark.parametrize("seed", range(2))
def test_triangle_and_corollary(seed: int) -> None:
    """Test both chaining inequalities on four-variable draws."""
    d4 = random_dirichlet((2, 2, 2, 2), 1.0, 800 + seed, names=FOUR)

    assert check_triangle(d4).passed
    assert check_corollary(d4).passed


def test_four_variable_checks_need_four_variables(xor: JointDist) -> None:
    """Test a three-variable input is rejected."""
    with pytest.raises(DistributionError):
        check_triangle(xor)
    with pytest.raises(DistributionError):
        check_locking(xor, ("S", "Y", "Z"))


def test_eve_monotonicity() -> None:
    """Test garbling Z never decreases UI and revealing Z' next to Z changes nothing."""
    d = random_dirichlet((2, 2, 3), 1.0, 810)
    outcome = check_eve_monotonicity(d, Channel.random([("Z", 3)], ("Z'", 2), 811))

    assert outcome.passed
    assert outcome.consistent


def test_eve_monotonicity_needs_a_channel_on_z(xor: JointDist) -> None:
    """Test a channel reading another variable is rejected."""
    with pytest.raises(DistributionError):
        check_eve_monotonicity(xor, Channel.identity(("Y", 2), "Y'"))


@pytest.mark.parametrize("party", ["S", "Y"])
def test_alice_bob_monotonicity(party: str) -> None:
    """Test garbling either legitimate party never increases UI."""
    d = random_dirichlet((2, 2, 2), 1.0, 820)

    assert check_alice_bob_monotonicity(d, Channel.binary_symmetric((party, 2), f"{party}'", 0.2)).passed


def test_alice_bob_monotonicity_rejects_eve_channel(xor: JointDist) -> None:
    """Test a channel on Z is not a garbling of Alice or Bob."""
    with pytest.raises(DistributionError):
        check_alice_bob_monotonicity(xor, Channel.identity(("Z", 2), "Z'"))


def test_public_communication() -> None:
    """Test publishing the parity of S never increases UI."""
    d = random_dirichlet((3, 2, 2), 1.0, 830)

    assert check_public_communication(d, parity, 2).passed


def test_locking() -> None:
    """Test handing a bit to Eve costs at most one bit."""
    d4 = random_dirichlet((2, 2, 2, 2), 1.0, 840, names=("S", "Y", "Z", "U"))

    assert check_locking(d4).passed


def test_additivity_and_continuity() -> None:
    """Test tensor-power additivity and the continuity envelope."""
    d = random_dirichlet((2, 2, 2), 1.0, 850)
    other = perturbed(d, random_dirichlet((2, 2, 2), 1.0, 851), 1e-3)

    assert check_additivity(d).passed
    assert check_continuity(d, other).passed


def test_chain_label(perfect_secret_bit: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test the one-way estimate meets UI on a perfect secret."""
    outcome = check_chain(perfect_secret_bit, None, quick_bounds)

    assert outcome.passed
    assert outcome.label == "one_way_meets_ui"


def test_nested_ui(perfect_secret_bit: JointDist, quick_bounds: BoundsOptions) -> None:
    """Test the second nested bound matches UI on a perfect secret."""
    assert check_nested_ui(perfect_secret_bit, None, quick_bounds).passed


def test_collapse_at_qstar(quick_bounds: BoundsOptions) -> None:
    """Test the chain squeezes onto UI at the minimum-synergy distribution."""
    assert check_collapse_at_qstar(random_dirichlet((2, 2, 2), 1.0, 860), None, quick_bounds).passed


def test_perturbed_moves_exact_distance() -> None:
    """Test the mixed point sits at the requested L1 distance."""
    d = random_dirichlet((2, 3), 1.0, 870, names=["A", "B"])
    other = random_dirichlet((2, 3), 1.0, 871, names=["A", "B"])

    assert l1_distance(d, perturbed(d, other, 1e-3)) == pytest.approx(1e-3)
    with pytest.raises(DistributionError):
        perturbed(d, d, 1e-3)


def test_parity() -> None:
    """Test the public message."""
    assert parity(1, 2) == 1
    assert parity(1, 1, 0) == 0


def test_ensemble_arity_is_validated() -> None:
    """Test four-variable properties reject three-variable shapes and vice versa."""
    with pytest.raises(ValidationError):
        EnsembleSpec(property_id="PROP1", shapes=[(2, 2, 2)])
    with pytest.raises(ValidationError):
        EnsembleSpec(property_id="P1", shapes=[(2, 2, 2, 2)])
    with pytest.raises(ValidationError):
        EnsembleSpec(property_id="P8", shapes=[(2, 2, 2)])  # type: ignore[arg-type]


def test_default_suite_layout() -> None:
    """Test every property is scheduled with the acceptance shapes."""
    config = SuiteConfig.default(count=10)
    by_id = {spec.property_id: spec for spec in config.ensembles}

    assert set(by_id) == set(suite.PROPERTY_IDS)
    assert by_id["P1"].shapes == [(2, 2, 2), (3, 3, 2)]
    assert by_id["P1"].count == 5
    assert by_id["LOCK"].shapes == [(2, 2, 2, 2)]
    assert by_id["LOCK"].count == 10


def test_empty_suite_is_empty() -> None:
    """Test no ensembles means no reports."""
    assert run_suite(SuiteConfig()) == []


def test_suite_is_deterministic() -> None:
    """Test reruns report identical values and seeds, and reports come back sorted."""
    config = SuiteConfig(
        seed=5,
        ensembles=[
            EnsembleSpec(property_id="P5", shapes=[(2, 2, 2)], count=2),
            EnsembleSpec(property_id="P1", shapes=[(2, 2, 2), (3, 3, 2)], count=2, seed_offset=10),
        ],
    )
    seen: list[PropertyReport] = []

    first = run_suite(config, progress=seen.append)
    second = run_suite(config)

    assert first == second
    assert len(seen) == 3
    assert [(r.property_id, r.shape) for r in first] == [("P1", (2, 2, 2)), ("P1", (3, 3, 2)), ("P5", (2, 2, 2))]
    assert first[0].seeds == [10, 11]
    assert all(report.passed for report in first)


def test_recorded_seed_reproduces_instance() -> None:
    """Test a single instance can be rerun from its seed alone."""
    config = SuiteConfig(seed=3)

    first = suite.run_instance(config, "P9", (2, 2, 2), 0, 4)
    again = suite.run_instance(config, "P9", (2, 2, 2), 0, 4)

    assert first == again


@pytest.mark.parametrize(
    ("property_id", "field"),
    [
        ("P2", "slack"),
        ("P6", "slack"),
        ("P7", "continuity_envelope"),
        ("PROP3", "search_slack"),
        ("COLLAPSE", "search_slack"),
    ],
)
def test_configured_tolerances_reach_the_checks(property_id: str, field: str, quick_bounds: BoundsOptions) -> None:
    """Test raising a configured slack raises the instance tolerance by the same amount."""
    config = SuiteConfig(seed=4, bounds=quick_bounds)
    loosened = config.model_copy(update={field: getattr(config, field) + 0.25})

    tight = suite.run_instance(config, property_id, (2, 2, 2), 0, 1)
    loose = suite.run_instance(loosened, property_id, (2, 2, 2), 0, 1)

    assert loose.slack == tight.slack
    assert loose.tolerance - tight.tolerance == pytest.approx(0.25)


def test_errors_are_counted_not_raised(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test an instance that raises becomes a violation with its seed recorded."""

    def explode(*_: object) -> CheckOutcome:
        raise ArithmeticError("boom")

    monkeypatch.setattr(suite, "run_instance", explode)
    report = run_ensemble(SuiteConfig(), EnsembleSpec(property_id="P1", shapes=[(2, 2, 2)], count=3), 0)

    assert report.errors == 3
    assert report.violations == 3
    assert report.failed_seeds == [0, 1, 2]
    assert report.worst_slack is None
    assert not report.passed


def test_labels_are_tallied(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test outcome labels are counted per ensemble."""
    outcomes = iter([CheckOutcome(0.0, 1e-4, label="a"), CheckOutcome(-1.0, 1e-4, label="b")])
    monkeypatch.setattr(suite, "run_instance", lambda *_: next(outcomes))
    report = run_ensemble(SuiteConfig(), EnsembleSpec(property_id="THM4", shapes=[(2, 2, 2)], count=2), 0)

    assert report.labels == {"a": 1, "b": 1}
    assert report.failed_seeds == [1]
    assert report.worst_slack == pytest.approx(-1.0 + 1e-4)


def test_from_toml(tmp_path: Path) -> None:
    """Test loading a configuration with nested options."""
    path = tmp_path / "suite.toml"
    path.write_text(
        "seed = 9\n\n[options]\ntolerance = 1e-5\n\n"
        '[[ensembles]]\nproperty_id = "P2"\nshapes = [[2, 2, 2]]\ncount = 4\n'
    )
    config = SuiteConfig.from_toml(path)

    assert config.seed == 9
    assert config.options.tolerance == 1e-5
    assert config.ensembles == [EnsembleSpec(property_id="P2", shapes=[(2, 2, 2)], count=4)]


@pytest.mark.parametrize("content", ["seed = ", "seed = -1\n", "unknown = 1\n"])
def test_from_toml_errors(tmp_path: Path, content: str) -> None:
    """Test malformed and invalid configurations."""
    path = tmp_path / "suite.toml"
    path.write_text(content)

    with pytest.raises(InputFileError):
        SuiteConfig.from_toml(path)
    with pytest.raises(InputFileError):
        SuiteConfig.from_toml(tmp_path / "missing.toml")


@pytest.mark.asyncio
async def test_async_suite_matches_sync() -> None:
    """Test the threaded runner gives the same sorted reports."""
    config = SuiteConfig(
        ensembles=[
            EnsembleSpec(property_id="P6", shapes=[(2, 2, 2)], count=1),
            EnsembleSpec(property_id="P3", shapes=[(2, 2, 2), (3, 3, 2)], count=1),
        ]
    )

    assert await arun_suite(config) == run_suite(config)


@pytest.mark.slow
def test_default_suite_passes() -> None:
    """Test every property on the acceptance-size ensembles."""
    reports = run_suite(SuiteConfig.default())

    failures = {(r.property_id, r.shape): r.failed_seeds for r in reports if not r.passed}
    assert failures == {}
    assert np.isfinite([r.worst_slack for r in reports if r.worst_slack is not None]).all()
