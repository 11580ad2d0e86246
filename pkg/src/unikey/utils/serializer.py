import math
from abc import ABC, abstractmethod
from collections.abc import Mapping
from typing import Any

import numpy as np
from pydantic import BaseModel

from unikey.core.channel import Channel
from unikey.core.joint import JointDist

PRECISION = 6


class BaseTypeSerializer(ABC):
    """Abstract base class for type serializers.

    Implementations define how to convert values to and from JSON-compatible types.
    """

    @staticmethod
    @abstractmethod
    def serialize(value: Any) -> Any:
        """Convert a Python value into a JSON-compatible format.

        Args:
            value (Any): The value to serialize.

        Returns:
            Any: A serialized version of the value.
        """

    @staticmethod
    @abstractmethod
    def deserialize(value: Any) -> Any:
        """Convert a JSON value back to its in-memory type.

        Args:
            value (Any): The value to deserialize.

        Returns:
            Any: The original Python representation.
        """


def _round(value: float) -> float | None:
    if not math.isfinite(value):
        return None
    # normalizes -0.0
    return round(float(value), PRECISION) + 0.0


class FloatSerializer(BaseTypeSerializer):
    """Serializer for Python and numpy floats, rounded to the report precision.

    Non-finite values become ``null``.
    """

    @staticmethod
    def serialize(value: float | np.floating[Any]) -> float | None:
        """Round to six decimals.

        Args:
            value (float): The number to serialize.

        Returns:
            float | None: The rounded number, or ``None`` when it is not finite.
        """
        return _round(float(value))

    @staticmethod
    def deserialize(value: float | None) -> float:
        """Map ``null`` back to NaN."""
        return math.nan if value is None else float(value)


class IntegerSerializer(BaseTypeSerializer):
    """Serializer for numpy integers."""

    @staticmethod
    def serialize(value: np.integer[Any]) -> int:
        """Convert to a Python int."""
        return int(value)

    @staticmethod
    def deserialize(value: int) -> np.int64:
        """Convert to a numpy int64."""
        return np.int64(value)


class ArraySerializer(BaseTypeSerializer):
    """Serializer for numpy arrays, converting them to nested lists of rounded floats."""

    @staticmethod
    def serialize(value: np.ndarray[Any, Any]) -> Any:
        """Convert an array to nested lists.

        Args:
            value (np.ndarray): The array to serialize.

        Returns:
            list: Nested lists with one level per array dimension.
        """
        if value.ndim == 0:
            return FloatSerializer.serialize(value.item())
        return [ArraySerializer.serialize(row) for row in value]

    @staticmethod
    def deserialize(value: Any) -> np.ndarray[Any, Any]:
        """Convert nested lists back into a float array."""
        return np.asarray(value, dtype=np.float64)


class ChannelSerializer(BaseTypeSerializer):
    """Serializer for channels, keeping their layout next to the kernel rows."""

    @staticmethod
    def serialize(value: Channel) -> dict[str, Any]:
        """Convert a channel to a mapping with ``inputs``, ``output`` and ``kernel``."""
        return {
            "inputs": [{"name": name, "size": size} for name, size in value.input_vars],
            "output": {"name": value.output_var[0], "size": value.output_var[1]},
            "kernel": ArraySerializer.serialize(value.kernel),
        }

    @staticmethod
    def deserialize(value: dict[str, Any]) -> Channel:
        """Rebuild a channel from its mapping."""
        inputs = [(item["name"], item["size"]) for item in value["inputs"]]
        output = (value["output"]["name"], value["output"]["size"])
        return Channel(inputs, output, value["kernel"])


class JointDistSerializer(BaseTypeSerializer):
    """Serializer for joint distributions in the dense distribution-file layout."""

    @staticmethod
    def serialize(value: JointDist) -> dict[str, Any]:
        """Convert a distribution to ``variables`` and flat ``probs``."""
        return {
            "variables": [{"name": name, "size": size} for name, size in value.variables],
            "probs": [FloatSerializer.serialize(p) for p in value.probs],
        }

    @staticmethod
    def deserialize(value: dict[str, Any]) -> JointDist:
        """Rebuild a distribution from its mapping."""
        return JointDist([(item["name"], item["size"]) for item in value["variables"]], value["probs"])


HANDLER_MAPPING: Mapping[Any, BaseTypeSerializer] = {
    np.ndarray: ArraySerializer(),
    Channel: ChannelSerializer(),
    JointDist: JointDistSerializer(),
    np.integer: IntegerSerializer(),
    float: FloatSerializer(),
    np.floating: FloatSerializer(),
}


def _handler(value: Any) -> BaseTypeSerializer | None:
    if isinstance(value, bool):
        return None
    for value_type, handler in HANDLER_MAPPING.items():
        if isinstance(value, value_type):
            return handler
    return None


def serialize_value(value: Any) -> Any:
    """Serialize one value, recursing into containers and pydantic models."""
    if isinstance(value, BaseModel):
        return replace_unserializable_fields(value.model_dump())
    if isinstance(value, dict):
        return replace_unserializable_fields(value)
    if isinstance(value, (list, tuple, set)):
        return [serialize_value(element) for element in value]
    handler = _handler(value)
    return handler.serialize(value) if handler is not None else value


def replace_unserializable_fields(document: Mapping[str, Any]) -> dict[str, Any]:
    """Recursively replace values that JSON cannot hold with serialized equivalents.

    Floats are rounded to six decimals so that machine output carries exactly
    the precision of the table output.

    Args:
        document (Mapping): The original report.

    Returns:
        dict: A new mapping with string keys and JSON-compatible values.
    """
    return {str(key): serialize_value(value) for key, value in document.items()}
