"""Distribution files: JSON or TOML documents describing a joint distribution.

A file lists its variables and either a dense row-major ``probs`` array (last
variable fastest) or sparse ``entries`` of index tuples and probabilities,
plus optional default roles. The canonical dump is what :func:`dump_text`
writes, and reading then writing it reproduces it byte for byte.
"""

import json
import logging
import math
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import tomli_w
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveInt, ValidationError, model_validator

from unikey.core.joint import JointDist
from unikey.errors import DistributionError, InputFileError

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib  # type: ignore[no-redef]

logger = logging.getLogger(__name__)

FIXTURE_PACKAGE = "unikey.fixtures"


class VariableSpec(BaseModel):
    """A named finite alphabet."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1)
    size: PositiveInt


class SparseEntry(BaseModel):
    """One nonzero cell of a sparse table."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    index: list[int]
    p: NonNegativeFloat


class RoleSpec(BaseModel):
    """Default role groups stored with a distribution."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    s: list[str] | None = None
    y: list[str] | None = None
    z: list[str] | None = None
    zprime: list[str] | None = None
    u: list[str] | None = None

    def triple(self) -> tuple[list[str], list[str], list[str]] | None:
        """The S, Y and Z groups, when all three are given."""
        if self.s and self.y and self.z:
            return self.s, self.y, self.z
        return None


class DistributionFile(BaseModel):
    """Validated content of a distribution file.

    Attributes:
        variables (list[VariableSpec]): Ordered variables.
        probs (list[float] | None): Dense probabilities, row-major.
        entries (list[SparseEntry] | None): Sparse probabilities.
        roles (RoleSpec | None): Default roles.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    variables: list[VariableSpec] = Field(min_length=1)
    probs: list[NonNegativeFloat] | None = None
    entries: list[SparseEntry] | None = None
    roles: RoleSpec | None = None

    @model_validator(mode="after")
    def _check_layout(self) -> "DistributionFile":
        names = [variable.name for variable in self.variables]
        if len(set(names)) != len(names):
            raise ValueError(f"variable names must be unique, got {names}")
        if (self.probs is None) == (self.entries is None):
            raise ValueError("exactly one of 'probs' and 'entries' is required")
        shape = self.shape
        if self.probs is not None and len(self.probs) != math.prod(shape):
            raise ValueError(f"'probs' has {len(self.probs)} entries, the variables need {math.prod(shape)}")
        if self.entries is not None:
            seen: set[tuple[int, ...]] = set()
            for entry in self.entries:
                index = tuple(entry.index)
                if len(index) != len(shape) or any(not 0 <= i < n for i, n in zip(index, shape, strict=False)):
                    raise ValueError(f"sparse index {list(index)} out of range for shape {list(shape)}")
                if index in seen:
                    raise ValueError(f"sparse index {list(index)} appears twice")
                seen.add(index)
        if self.roles is not None:
            for group in (self.roles.s, self.roles.y, self.roles.z, self.roles.zprime, self.roles.u):
                unknown = set(group or ()) - set(names)
                if unknown:
                    raise ValueError(f"roles name unknown variables {sorted(unknown)}")
        return self

    @property
    def shape(self) -> tuple[int, ...]:
        """Alphabet sizes."""
        return tuple(variable.size for variable in self.variables)

    def to_joint(self) -> JointDist:
        """Build the distribution; small normalization errors are corrected with a warning.

        Raises:
            DistributionError: On negative or badly normalized probabilities.
        """
        table = np.zeros(self.shape)
        if self.probs is not None:
            table = np.asarray(self.probs, dtype=np.float64).reshape(self.shape)
        else:
            for entry in self.entries or ():
                table[tuple(entry.index)] = entry.p
        return JointDist([(variable.name, variable.size) for variable in self.variables], table)

    @classmethod
    def from_joint(cls, d: JointDist, roles: RoleSpec | None = None) -> "DistributionFile":
        """Dense file content for a distribution."""
        return cls(
            variables=[VariableSpec(name=name, size=size) for name, size in d.variables],
            probs=[float(p) for p in d.probs],
            roles=roles,
        )


def _is_toml(path: str | Path) -> bool:
    return Path(path).suffix.lower() == ".toml"


def parse_text(text: str, toml: bool = False) -> DistributionFile:
    """Parse and validate file content.

    Raises:
        InputFileError: If the text is not valid JSON or TOML or violates the schema.
    """
    try:
        if toml:
            return DistributionFile.model_validate(tomllib.loads(text))
        return DistributionFile.model_validate_json(text)
    except (ValidationError, tomllib.TOMLDecodeError) as e:
        raise InputFileError(f"malformed distribution file: {e}") from e


def dump_text(content: DistributionFile, toml: bool = False) -> str:
    """Canonical text: sorted keys, two-space JSON indentation, unset fields omitted."""
    data: dict[str, Any] = content.model_dump(mode="json", exclude_none=True)
    if toml:
        return tomli_w.dumps(data)
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def load_file(path: str | Path) -> DistributionFile:
    """Read a JSON file, or a TOML file when the suffix is ``.toml``.

    Raises:
        InputFileError: If the file cannot be read or is malformed.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputFileError(f"cannot read {path}: {e}") from e
    return parse_text(text, toml=_is_toml(path))


def write_file(path: str | Path, content: DistributionFile) -> None:
    """Write the canonical text of ``content``, as TOML when the suffix is ``.toml``.

    Raises:
        InputFileError: If the path cannot be written.
    """
    try:
        Path(path).write_text(dump_text(content, toml=_is_toml(path)), encoding="utf-8")
    except OSError as e:
        raise InputFileError(f"cannot write {path}: {e}") from e
    logger.info("wrote %s", path)


def fixture_names() -> list[str]:
    """Names of the bundled fixtures."""
    folder = resources.files(FIXTURE_PACKAGE)
    return sorted(item.name.removesuffix(".json") for item in folder.iterdir() if item.name.endswith(".json"))


def load_fixture(name: str) -> DistributionFile:
    """Load a bundled fixture by name.

    Raises:
        InputFileError: If no fixture has that name.
    """
    resource = resources.files(FIXTURE_PACKAGE).joinpath(f"{name}.json")
    if not resource.is_file():
        raise InputFileError(f"unknown fixture '{name}', expected one of {fixture_names()}")
    return parse_text(resource.read_text(encoding="utf-8"))


def load_joint(content: DistributionFile) -> JointDist:
    """:meth:`DistributionFile.to_joint` with distribution errors reported as input errors."""
    try:
        return content.to_joint()
    except DistributionError as e:
        raise InputFileError(str(e)) from e
