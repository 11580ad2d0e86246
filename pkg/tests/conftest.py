"""."""

from pathlib import Path

import pytest

from unikey.core import canonical
from unikey.core.joint import JointDist
from unikey.options import BoundsOptions


@pytest.fixture
def perfect_secret_bit() -> JointDist:
    """Y = S uniform, Z an independent uniform bit."""
    return canonical.perfect_secret_bit()


@pytest.fixture
def xor() -> JointDist:
    """S, Y independent uniform bits and Z = S xor Y."""
    return canonical.xor()


@pytest.fixture
def copy() -> JointDist:
    """Y = Z = S, a uniform bit."""
    return canonical.copy()


@pytest.fixture
def and_gate() -> JointDist:
    """S = Y and Z for independent uniform bits Y, Z."""
    return canonical.and_gate()


@pytest.fixture
def degraded() -> JointDist:
    """Z = S and Y a noisy copy of S."""
    return canonical.degraded(0.1)


@pytest.fixture
def quick_bounds() -> BoundsOptions:
    """Small search budgets for the key-rate bounds."""
    return BoundsOptions(restarts=3, max_steps=300, max_evals=40, seed=7)


@pytest.fixture
def fixture_file(tmp_path: Path) -> Path:
    """Path of a distribution file inside a temporary directory."""
    return tmp_path / "dist.json"
