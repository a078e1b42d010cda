"""Lattice image-source simulation of shoebox room impulse responses.

Ground truth for training and evaluation.  Every mirror image of the
source across the box walls contributes one arrival with amplitude
(product of per-hit reflection factors) / distance; arrivals are placed
on the 48 kHz sample grid with an 81-tap Hann-windowed-sinc fractional
delay and the seven octave bands are combined through the zero-phase
Butterworth filter bank.

The mirror lattice factorizes per axis: an image is identified by a
lattice index n and a parity p per axis, with coordinate
(1-2p)*src + 2*n*L and |n-p| + |n| wall hits on that axis.  Distances
and hit counts are therefore built from per-axis arrays and combined by
broadcasting, chunked to bound memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bands
from .errors import NumericError, ValidationError
from .rooms import RoomSpec

SAMPLE_RATE = 48_000
SPEED_OF_SOUND = 343.0

KERNEL_TAPS = 81
_HALF = KERNEL_TAPS // 2  # 40
# Fractional delays are quantized to 1/PHASE_STEPS of a sample before the
# kernel lookup; 1/64-sample worst-case timing error, far below one sample.
PHASE_STEPS = 32

DURATION_FLOOR_S = 0.5
DURATION_CAP_S = 3.0
DURATION_T60_FACTOR = 1.5

_MIN_SOURCE_RECEIVER_M = 1e-3
_CHUNK_CANDIDATES = 4_000_000


@dataclass(frozen=True, eq=False)
class Rir:
    """Time-domain room impulse response."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE
    room_id: str | None = None

    def __post_init__(self):
        if len(self.samples) < 1:
            raise ValidationError("impulse response must have at least one sample")
        if not np.all(np.isfinite(self.samples)):
            raise ValidationError("impulse response contains non-finite samples")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def fractional_delay_kernel(frac: float) -> np.ndarray:
    """81-tap Hann-windowed sinc centered at tap 40 + frac, frac in [-0.5, 0.5]."""
    u = np.arange(KERNEL_TAPS) - _HALF - frac
    window = 0.5 * (1.0 + np.cos(np.pi * u / (_HALF + 0.5)))
    window[np.abs(u) > _HALF + 0.5] = 0.0
    return np.sinc(u) * window


_KERNEL_TABLE = np.stack(
    [fractional_delay_kernel(-0.5 + r / PHASE_STEPS) for r in range(PHASE_STEPS + 1)]
)


def _axis_images(src: float, rcv: float, length: float, max_dist: float):
    """Per-axis image offsets and wall-hit counts within max_dist."""
    deltas = []
    counts = []
    for p in (0, 1):
        mirrored = (1 - 2 * p) * src
        lo = int(np.ceil((rcv - mirrored - max_dist) / (2.0 * length)))
        hi = int(np.floor((rcv - mirrored + max_dist) / (2.0 * length)))
        n = np.arange(lo, hi + 1)
        deltas.append(mirrored + 2.0 * n * length - rcv)
        counts.append(np.abs(n - p) + np.abs(n))
    return np.concatenate(deltas), np.concatenate(counts).astype(np.int32)


def image_arrivals(room: RoomSpec, max_distance_m: float):
    """Distances and total reflection counts of all images within reach.

    Returns (distances_m, reflection_counts), unordered.
    """
    if room.source_receiver_distance < _MIN_SOURCE_RECEIVER_M:
        raise ValidationError("source and receiver coincide (1/r singularity)")

    axes = [
        _axis_images(room.source_xyz[i], room.receiver_xyz[i], float(room.dims[i]), max_distance_m)
        for i in range(3)
    ]
    dx2, cx = axes[0][0] ** 2, axes[0][1]
    dy2, cy = axes[1][0] ** 2, axes[1][1]
    dz2, cz = axes[2][0] ** 2, axes[2][1]

    yz2 = dy2[:, None] + dz2[None, :]
    cyz = cy[:, None] + cz[None, :]
    plane = yz2.size
    chunk = max(1, _CHUNK_CANDIDATES // max(plane, 1))

    limit2 = max_distance_m * max_distance_m
    dist_parts = []
    count_parts = []
    for start in range(0, dx2.size, chunk):
        sl = slice(start, start + chunk)
        d2 = dx2[sl, None, None] + yz2[None, :, :]
        keep = d2 <= limit2
        if not np.any(keep):
            continue
        dist_parts.append(np.sqrt(d2[keep]))
        count_parts.append((cx[sl, None, None] + cyz[None, :, :])[keep])

    if not dist_parts:
        return np.empty(0), np.empty(0, dtype=np.int32)
    return np.concatenate(dist_parts), np.concatenate(count_parts)


def _place_arrivals(
    distances: np.ndarray,
    weights: np.ndarray,
    n_samples: int,
    sample_rate: int,
) -> np.ndarray:
    """Accumulate kernel-interpolated arrivals onto the sample grid.

    Arrivals are histogrammed per quantized fractional-delay phase, then
    all phases are expanded through the kernel table with one matrix
    product and overlap-added.
    """
    delay = distances * (sample_rate / SPEED_OF_SOUND)
    base = np.rint(delay).astype(np.int64)
    phase = np.rint((delay - base + 0.5) * PHASE_STEPS).astype(np.int64)

    n_base = n_samples + 1
    hist = np.bincount(
        phase * n_base + base,
        weights=weights,
        minlength=(PHASE_STEPS + 1) * n_base,
    ).reshape(PHASE_STEPS + 1, n_base)

    expanded = _KERNEL_TABLE.T @ hist
    out = np.zeros(n_samples + KERNEL_TAPS)
    for k in range(KERNEL_TAPS):
        out[k : k + n_base] += expanded[k]
    return out[_HALF : _HALF + n_samples]


def _band_weights(counts: np.ndarray, distances: np.ndarray, alpha: float) -> np.ndarray:
    beta = np.sqrt(1.0 - alpha)
    power_table = beta ** np.arange(int(counts.max()) + 1 if counts.size else 1)
    return power_table[counts] / distances


def _check_duration(duration_s: float) -> int:
    if duration_s <= 0:
        raise ValidationError("duration must be positive")
    return int(round(duration_s * SAMPLE_RATE))


def simulate_band_rir(room: RoomSpec, band_index: int, duration_s: float) -> Rir:
    """Raw (unfiltered) image-source arrival train for one octave band."""
    n_samples = _check_duration(duration_s)
    alpha = room.absorption[band_index]
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"band absorption {alpha} outside (0, 1]")
    distances, counts = image_arrivals(room, duration_s * SPEED_OF_SOUND)
    samples = _place_arrivals(
        distances, _band_weights(counts, distances, alpha), n_samples, SAMPLE_RATE
    )
    return Rir(samples=samples, sample_rate=SAMPLE_RATE, room_id=room.room_id)


def simulate_rir(room: RoomSpec, duration_s: float) -> Rir:
    """Broadband RIR: band trains filtered through their octaves and summed.

    Output is normalized to unit peak amplitude.
    """
    n_samples = _check_duration(duration_s)
    for b, alpha in enumerate(room.absorption):
        if not 0.0 < alpha <= 1.0:
            raise ValidationError(f"band {b} absorption {alpha} outside (0, 1]")

    distances, counts = image_arrivals(room, duration_s * SPEED_OF_SOUND)
    total = np.zeros(n_samples)
    for b, alpha in enumerate(room.absorption):
        train = _place_arrivals(
            distances, _band_weights(counts, distances, alpha), n_samples, SAMPLE_RATE
        )
        total += bands.bandpass(train, b, SAMPLE_RATE)

    peak = np.max(np.abs(total))
    if peak == 0.0:
        raise NumericError("simulated response is identically zero")
    return Rir(samples=total / peak, sample_rate=SAMPLE_RATE, room_id=room.room_id)


def predict_t60_eyring(room: RoomSpec, band_index: int) -> float:
    """Statistical reverberation time 0.161 V / (-S ln(1 - mean absorption))."""
    alpha = room.absorption[band_index]
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"band absorption {alpha} outside (0, 1)")
    return 0.161 * room.volume_m3 / (-room.surface_m2 * np.log(1.0 - alpha))


def default_duration(room: RoomSpec) -> float:
    """Simulation length: 1.5x the slowest band's predicted decay, 0.5..3 s."""
    slowest = max(predict_t60_eyring(room, b) for b in range(bands.N_BANDS))
    return float(np.clip(DURATION_T60_FACTOR * slowest, DURATION_FLOOR_S, DURATION_CAP_S))
