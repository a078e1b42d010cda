"""Impulse response reconstruction from decay curves.

Reversing the cumulative decay redistributes energy over time; the square
root of each step gives a magnitude envelope whose per-sample energy
matches the curve exactly.  Polarity is not recoverable and is assigned
stochastically: independent random signs, or "sticky" signs that keep the
previous polarity with a configurable probability to preserve
low-frequency coherence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edc import Edc, enforce_monotone
from .errors import ValidationError
from .simulator import SAMPLE_RATE, Rir

DEFAULT_STICKINESS = 0.90


@dataclass(frozen=True)
class SignPolicy:
    """Polarity assignment: mode "rs" (independent) or "rss" (sticky)."""

    mode: str
    stickiness: float = DEFAULT_STICKINESS
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("rs", "rss"):
            raise ValidationError(f"unknown sign mode {self.mode!r}, expected 'rs' or 'rss'")
        if self.mode == "rss" and not 0.0 <= self.stickiness <= 1.0:
            raise ValidationError(f"stickiness {self.stickiness} outside [0, 1]")


def reverse_diff(edc: Edc) -> np.ndarray:
    """Per-sample energy steps of a decay curve.

    The final sample receives the curve's terminal energy so that the
    steps sum exactly to the curve's first value.
    """
    values = edc.values
    d = np.empty_like(values)
    d[:-1] = values[:-1] - values[1:]
    d[-1] = values[-1]
    return d


def magnitude_from_edc(edc: Edc) -> np.ndarray:
    """Non-negative sample magnitudes whose squares reproduce the decay."""
    return np.sqrt(np.maximum(reverse_diff(edc), 0.0))


def assign_signs(
    h_mag: np.ndarray, policy: SignPolicy, sample_rate: int = SAMPLE_RATE
) -> Rir:
    """Apply a stochastic polarity sequence to a magnitude envelope."""
    h_mag = np.asarray(h_mag, dtype=float)
    if np.any(h_mag < 0):
        raise ValidationError("magnitude envelope must be non-negative")
    rng = np.random.default_rng(policy.seed)
    n = len(h_mag)
    if policy.mode == "rs":
        signs = rng.integers(0, 2, size=n) * 2.0 - 1.0
    else:
        # First sign fixed positive; each later sample keeps the previous
        # polarity with probability `stickiness`.
        flips = np.where(rng.random(n - 1) < policy.stickiness, 1.0, -1.0)
        signs = np.concatenate(([1.0], np.cumprod(flips)))
    return Rir(samples=h_mag * signs, sample_rate=sample_rate)


def reconstruct(edc: Edc, policy: SignPolicy) -> Rir:
    """Full reconstruction: energy steps, magnitudes, then signs.

    Non-monotone (predicted) curves are first passed through a running
    minimum, which preserves the per-sample energy budget instead of
    silently discarding it at the clamp.
    """
    mono = Edc(values=enforce_monotone(edc.values), sample_rate=edc.sample_rate)
    return assign_signs(magnitude_from_edc(mono), policy, sample_rate=edc.sample_rate)
