"""Test serializer utils."""

import json
import math

import numpy as np

from unikey.core.channel import Channel
from unikey.core.joint import JointDist
from unikey.utils.serializer import (
    ChannelSerializer,
    FloatSerializer,
    JointDistSerializer,
    replace_unserializable_fields,
)


def test_float_serialization() -> None:
    """Test rounding to six decimals, negative zero and non-finite values."""
    document = {"ui": np.float64(0.123456789), "zero": -0.0, "gap": math.inf, "nan": math.nan}
    serialized = replace_unserializable_fields(document)

    assert serialized["ui"] == 0.123457
    assert type(serialized["ui"]) is float
    assert math.copysign(1.0, serialized["zero"]) == 1.0
    assert serialized["gap"] is None
    assert serialized["nan"] is None
    assert math.isnan(FloatSerializer.deserialize(None))


def test_bool_and_integers() -> None:
    """Test booleans stay booleans and numpy integers become ints."""
    serialized = replace_unserializable_fields({"converged": True, "iterations": np.int64(12)})

    assert serialized["converged"] is True
    assert serialized["iterations"] == 12
    assert type(serialized["iterations"]) is int


def test_channel_serialization() -> None:
    """Test channels keep their layout and round-trip to the same kernel."""
    ch = Channel.binary_symmetric(("Z", 2), "Z'", 0.1)
    serialized = replace_unserializable_fields({"witness": ch})["witness"]

    assert serialized["inputs"] == [{"name": "Z", "size": 2}]
    assert serialized["output"] == {"name": "Z'", "size": 2}
    assert serialized["kernel"] == [[0.9, 0.1], [0.1, 0.9]]
    np.testing.assert_allclose(ChannelSerializer.deserialize(serialized).kernel, ch.kernel)


def test_joint_serialization() -> None:
    """Test distributions become the dense file layout."""
    d = JointDist([("S", 2)], [0.25, 0.75])
    serialized = JointDistSerializer.serialize(d)

    assert serialized == {"variables": [{"name": "S", "size": 2}], "probs": [0.25, 0.75]}
    assert JointDistSerializer.deserialize(serialized).allclose(d)


def test_nested_serialization() -> None:
    """Test nested mappings, tuples and arrays end up JSON-compatible."""
    data = {
        "meta": {"shape": (2, 2), "table": np.eye(2)},
        "witnesses": [Channel.identity(("S", 2), "T")],
    }

    serialized = replace_unserializable_fields(data)

    assert serialized["meta"]["shape"] == [2, 2]
    assert serialized["meta"]["table"] == [[1.0, 0.0], [0.0, 1.0]]
    assert json.loads(json.dumps(serialized)) == serialized
