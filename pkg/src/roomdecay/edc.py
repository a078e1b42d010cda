"""Schroeder energy decay curves and the fixed prediction grid.

The decay curve is the reverse-time cumulative sum of squared impulse
response samples, normalized to start at 1.  The network predicts decay
on a fixed 1440-point grid at 480 Hz (3 s span, ~2.1 ms resolution);
conversions between the grids preserve monotonicity exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .simulator import Rir

GRID_LENGTH = 1440
GRID_RATE = 480
DB_FLOOR = -120.0

_LOG_FLOOR = 10.0 ** (DB_FLOOR / 10.0)
_MONOTONE_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class Edc:
    """Normalized decay curve at its native sample rate."""

    values: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValidationError("decay curve must have at least one value")


@dataclass(frozen=True, eq=False)
class EdcGrid:
    """Decay curve on the fixed 1440-point / 480 Hz prediction grid."""

    values: np.ndarray
    grid_rate: int = GRID_RATE

    def __post_init__(self):
        if self.values.shape != (GRID_LENGTH,):
            raise ValidationError(f"grid must have exactly {GRID_LENGTH} values")


def check_edc_invariants(values: np.ndarray, tol_start: float = 1e-12) -> None:
    """Raise unless values start at 1, stay in [0, 1] and never increase."""
    if abs(values[0] - 1.0) > tol_start:
        raise ValidationError(f"decay curve starts at {values[0]}, expected 1")
    if np.any(values < 0.0) or np.any(values > 1.0 + tol_start):
        raise ValidationError("decay curve values outside [0, 1]")
    if np.any(np.diff(values) > _MONOTONE_TOL):
        raise ValidationError("decay curve is not non-increasing")


def compute_edc(rir: Rir, normalized: bool = True) -> Edc:
    """Reverse-time cumulative energy of an impulse response.

    With ``normalized=False`` the raw cumulative energy is returned (its
    first value is the total energy).
    """
    energy = np.asarray(rir.samples, dtype=float) ** 2
    curve = np.cumsum(energy[::-1])[::-1]
    if normalized:
        total = curve[0]
        if total <= 0.0:
            raise NumericError("cannot normalize the decay of an all-zero response")
        curve = curve / total
    return Edc(values=curve, sample_rate=rir.sample_rate)


def to_db(edc: Edc, floor_db: float = DB_FLOOR) -> np.ndarray:
    """10 log10 of the decay values, floored."""
    floor = 10.0 ** (floor_db / 10.0)
    return 10.0 * np.log10(np.maximum(edc.values, floor))


def enforce_monotone(values: np.ndarray) -> np.ndarray:
    """Running minimum; restores the non-increasing invariant of predictions."""
    return np.minimum.accumulate(np.asarray(values, dtype=float))


def downsample_edc(edc: Edc) -> EdcGrid:
    """Subsample the cumulative curve onto the fixed grid.

    Every k-th sample is taken directly (k = rate / 480), so monotonicity
    is preserved exactly.  Curves shorter than the 3 s span hold their
    final value; longer curves are truncated.
    """
    if edc.sample_rate % GRID_RATE != 0:
        raise ValidationError(
            f"sample rate {edc.sample_rate} is not a multiple of the grid rate {GRID_RATE}"
        )
    step = edc.sample_rate // GRID_RATE
    idx = np.minimum(np.arange(GRID_LENGTH) * step, len(edc.values) - 1)
    return EdcGrid(values=edc.values[idx].copy())


def write_edc_csv(path, edc: Edc) -> None:
    """One value per line, preceded by a sample-rate comment header."""
    with open(path, "w") as fh:
        fh.write(f"# sample_rate_hz={edc.sample_rate}\n")
        for v in edc.values:
            fh.write(f"{v:.17g}\n")


def read_edc_csv(path) -> Edc:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# sample_rate_hz="):
            raise ValidationError(f"{path}: missing sample_rate_hz header")
        try:
            rate = int(header.split("=", 1)[1])
            values = np.array([float(line) for line in fh if line.strip()])
        except ValueError as exc:
            raise ValidationError(f"{path}: bad decay curve file: {exc}") from exc
    if values.size == 0:
        raise ValidationError(f"{path}: no decay values")
    return Edc(values=values, sample_rate=rate)


def upsample_edc(grid: EdcGrid, target_rate: int = 48_000) -> Edc:
    """Log-domain linear interpolation back to audio rate.

    The log of a monotone sequence interpolates monotonically, so the
    result keeps the decay invariants; values are floored at -120 dB
    before taking the log.
    """
    if target_rate % grid.grid_rate != 0:
        raise ValidationError(
            f"target rate {target_rate} is not a multiple of the grid rate {grid.grid_rate}"
        )
    step = target_rate // grid.grid_rate
    log_values = np.log10(np.maximum(grid.values, _LOG_FLOOR))
    coarse_pos = np.arange(len(log_values)) * step
    fine_pos = np.arange(coarse_pos[-1] + 1)
    interp = np.interp(fine_pos, coarse_pos, log_values)
    return Edc(values=10.0 ** interp, sample_rate=target_rate)
