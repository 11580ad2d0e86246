"""Canonical three-bit distributions over S, Y, Z used as fixtures and sanity anchors."""

from collections.abc import Callable

from unikey.core.joint import JointDist

BITS = (("S", 2), ("Y", 2), ("Z", 2))


def perfect_secret_bit() -> JointDist:
    """Y = S uniform, Z an independent uniform bit (UI = 1)."""
    return JointDist(BITS, [0.25, 0.25, 0.0, 0.0, 0.0, 0.0, 0.25, 0.25])


def xor() -> JointDist:
    """S, Y independent uniform bits and Z = S xor Y (UI = 0, CI = 1)."""
    return JointDist(BITS, [0.25, 0.0, 0.0, 0.25, 0.0, 0.25, 0.25, 0.0])


def and_gate() -> JointDist:
    """Y, Z independent uniform bits and S = Y and Z."""
    return JointDist(BITS, [0.25, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0, 0.25])


def copy() -> JointDist:
    """Y = Z = S, a uniform bit (UI = 0, SI = 1)."""
    return JointDist(BITS, [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5])


def degraded(flip: float = 0.1) -> JointDist:
    """Z = S uniform and Y = S through a binary symmetric channel."""
    keep = 0.5 * (1.0 - flip)
    noise = 0.5 * flip
    return JointDist(BITS, [keep, 0.0, noise, 0.0, 0.0, noise, 0.0, keep])


CANONICAL: dict[str, Callable[[], JointDist]] = {
    "perfect_secret_bit": perfect_secret_bit,
    "xor": xor,
    "and": and_gate,
    "copy": copy,
    "degraded": degraded,
}
