"""Velocity-to-bit-flip mapping through S- or V-shaped transfer functions."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["TransferKind", "FlipMode", "FlipPolicy", "transfer", "apply_flip"]


class TransferKind(str, enum.Enum):
    S_SHAPED = "s"
    V_SHAPED = "v"


class FlipMode(str, enum.Enum):
    FIXED = "fixed"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class FlipPolicy:
    """Source of the threshold compared against the transfer value.

    FIXED uses ``fixed_value`` for every bit (0.5 by default, which makes the
    flip deterministic given the velocity); SAMPLED draws a fresh uniform per bit.
    """

    mode: FlipMode = FlipMode.FIXED
    fixed_value: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "mode", FlipMode(self.mode))
        if not 0.0 <= self.fixed_value <= 1.0:
            raise ConfigError(f"fixed_value must lie in [0, 1], got {self.fixed_value}")


def transfer(kind: TransferKind, v):
    kind = TransferKind(kind)
    v = np.asarray(v, dtype=float)
    if kind is TransferKind.S_SHAPED:
        # Two-branch logistic avoids overflow in exp for large |v|.
        out = np.where(v >= 0, 1.0 / (1.0 + np.exp(-np.abs(v))),
                       np.exp(-np.abs(v)) / (1.0 + np.exp(-np.abs(v))))
    else:
        out = np.abs(np.tanh(v))
    return out if out.ndim else float(out)


def apply_flip(mask, velocity, kind: TransferKind, policy: FlipPolicy, rng=None) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    velocity = np.asarray(velocity, dtype=float)
    if mask.shape != velocity.shape:
        raise ValueError(f"mask {mask.shape} and velocity {velocity.shape} differ in shape")
    if policy.mode is FlipMode.FIXED:
        r = np.full(mask.shape, policy.fixed_value)
    else:
        if rng is None:
            raise ValueError("SAMPLED flip mode needs a random generator")
        r = rng.random(mask.shape)
    # r < transfer(v) is tested through the inverse transfer so the decision
    # is exact at the boundary (S(v) rounds to 0.5 for |v| below ~1e-16).
    with np.errstate(divide="ignore"):
        if TransferKind(kind) is TransferKind.S_SHAPED:
            flip = velocity > np.log(r) - np.log1p(-r)
        else:
            flip = np.abs(velocity) > np.arctanh(r)
    return np.where(flip, ~mask, mask)
