"""Shoebox room descriptions, the room sampler, feature packing and dataset splits.

A room is a rectangular box with one source, one receiver and seven
octave-band surface-averaged absorption coefficients.  The sampler draws
rooms from the simulated-room population used for model training:
dimensions uniform within fixed ranges, a material preset per surface
(area-weighted into the band averages) and rejection-sampled
source/receiver positions with a bounded separation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ValidationError

N_FEATURES = 16
N_BANDS = 7

FEATURE_NAMES = (
    "length_m",
    "width_m",
    "height_m",
    "source_x",
    "source_y",
    "source_z",
    "receiver_x",
    "receiver_y",
    "receiver_z",
    "alpha_125",
    "alpha_250",
    "alpha_500",
    "alpha_1000",
    "alpha_2000",
    "alpha_4000",
    "alpha_8000",
)

# Absorption profiles per material, one coefficient per octave band
# (125 Hz .. 8 kHz).  All values stay inside [0.14, 0.65] so any
# area-weighted mixture does too.
MATERIAL_PRESETS: dict[str, tuple[float, ...]] = {
    "painted_masonry": (0.14, 0.15, 0.16, 0.18, 0.20, 0.22, 0.24),
    "gypsum_board": (0.16, 0.18, 0.22, 0.28, 0.34, 0.40, 0.45),
    "thin_carpet": (0.20, 0.24, 0.30, 0.38, 0.46, 0.54, 0.60),
    "wood_panel": (0.45, 0.38, 0.32, 0.27, 0.23, 0.20, 0.18),
    "resonant_panel": (0.60, 0.52, 0.44, 0.36, 0.30, 0.26, 0.22),
    "coated_concrete": (0.30, 0.30, 0.30, 0.30, 0.30, 0.30, 0.30),
    "perforated_tile": (0.50, 0.50, 0.50, 0.50, 0.50, 0.50, 0.50),
    "heavy_curtain": (0.22, 0.28, 0.38, 0.50, 0.58, 0.62, 0.65),
    "mineral_wool": (0.35, 0.42, 0.50, 0.55, 0.52, 0.46, 0.40),
    "plastered_brick": (0.15, 0.17, 0.20, 0.24, 0.30, 0.38, 0.50),
}

ABSORPTION_MIN = 0.14
ABSORPTION_MAX = 0.65


@dataclass(frozen=True)
class RoomSpec:
    """Geometry, source/receiver placement and band absorption of one room."""

    length_m: float
    width_m: float
    height_m: float
    source_xyz: tuple[float, float, float]
    receiver_xyz: tuple[float, float, float]
    absorption: tuple[float, ...]
    room_id: str | None = None

    def __post_init__(self):
        if len(self.absorption) != N_BANDS:
            raise ValidationError(
                f"expected {N_BANDS} absorption coefficients, got {len(self.absorption)}"
            )
        for name in ("length_m", "width_m", "height_m"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        for a in self.absorption:
            if not 0.0 < a <= 1.0:
                raise ValidationError(f"absorption coefficient {a} outside (0, 1]")

    @property
    def dims(self) -> np.ndarray:
        return np.array([self.length_m, self.width_m, self.height_m])

    @property
    def volume_m3(self) -> float:
        return self.length_m * self.width_m * self.height_m

    @property
    def surface_m2(self) -> float:
        lw = self.length_m * self.width_m
        lh = self.length_m * self.height_m
        wh = self.width_m * self.height_m
        return 2.0 * (lw + lh + wh)

    @property
    def source_receiver_distance(self) -> float:
        s = np.asarray(self.source_xyz)
        r = np.asarray(self.receiver_xyz)
        return float(np.linalg.norm(s - r))


@dataclass(frozen=True)
class RoomRanges:
    """Sampler configuration; defaults reproduce the simulated-room population."""

    length_m: tuple[float, float] = (3.0, 6.0)
    width_m: tuple[float, float] = (3.0, 6.0)
    height_m: tuple[float, float] = (2.5, 4.0)
    distance_m: tuple[float, float] = (1.0, 4.0)
    wall_margin_m: float = 0.3
    presets: tuple[tuple[float, ...], ...] = tuple(MATERIAL_PRESETS.values())
    # Fixed positions bypass rejection sampling (still validated).
    source_xyz: tuple[float, float, float] | None = None
    receiver_xyz: tuple[float, float, float] | None = None

    def __post_init__(self):
        for name in ("length_m", "width_m", "height_m", "distance_m"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ConfigError(f"invalid range for {name}: ({lo}, {hi})")
        if not self.presets:
            raise ConfigError("at least one absorption preset is required")
        for p in self.presets:
            if len(p) != N_BANDS:
                raise ConfigError("absorption presets must have 7 band values")


REJECTION_BUDGET = 10_000

# Surfaces in area-weighting order: two L*W (floor/ceiling), two L*H, two W*H.
_SURFACE_COUNT = 6


def _surface_areas(length: float, width: float, height: float) -> np.ndarray:
    lw = length * width
    lh = length * height
    wh = width * height
    return np.array([lw, lw, lh, lh, wh, wh])


def sample_room(rng_seed: int, ranges: RoomRanges | None = None) -> RoomSpec:
    """Draw one room; deterministic for a given seed.

    Dimensions are uniform within their ranges.  Each of the six surfaces
    gets a uniformly chosen material preset; the room's band absorption is
    the area-weighted mean over surfaces.  Source and receiver are drawn
    uniformly inside the margin box and resampled as a pair until their
    distance falls inside the configured interval.
    """
    ranges = ranges if ranges is not None else RoomRanges()
    rng = np.random.default_rng(rng_seed)

    length = float(rng.uniform(*ranges.length_m))
    width = float(rng.uniform(*ranges.width_m))
    height = float(rng.uniform(*ranges.height_m))

    presets = np.asarray(ranges.presets)
    surface_idx = rng.integers(0, len(presets), size=_SURFACE_COUNT)
    areas = _surface_areas(length, width, height)
    absorption = areas @ presets[surface_idx] / areas.sum()

    margin = ranges.wall_margin_m
    lo = np.array([margin, margin, margin])
    hi = np.array([length - margin, width - margin, height - margin])
    if np.any(hi <= lo):
        raise ConfigError("wall margin leaves no interior volume for placement")

    d_lo, d_hi = ranges.distance_m
    if ranges.source_xyz is not None and ranges.receiver_xyz is not None:
        source = np.asarray(ranges.source_xyz, dtype=float)
        receiver = np.asarray(ranges.receiver_xyz, dtype=float)
        dist = float(np.linalg.norm(source - receiver))
        if not d_lo <= dist <= d_hi:
            raise ConfigError(
                f"fixed source/receiver distance {dist:.3f} m outside [{d_lo}, {d_hi}]"
            )
    else:
        for _ in range(REJECTION_BUDGET):
            source = rng.uniform(lo, hi)
            receiver = rng.uniform(lo, hi)
            dist = float(np.linalg.norm(source - receiver))
            if d_lo <= dist <= d_hi:
                break
        else:
            raise ConfigError(
                f"no source/receiver pair with distance in [{d_lo}, {d_hi}] "
                f"after {REJECTION_BUDGET} draws"
            )

    return RoomSpec(
        length_m=length,
        width_m=width,
        height_m=height,
        source_xyz=tuple(float(v) for v in source),
        receiver_xyz=tuple(float(v) for v in receiver),
        absorption=tuple(float(a) for a in absorption),
    )


def to_features(room: RoomSpec) -> np.ndarray:
    """Pack a room into the fixed 16-value model input layout."""
    return np.array(
        [
            room.length_m,
            room.width_m,
            room.height_m,
            *room.source_xyz,
            *room.receiver_xyz,
            *room.absorption,
        ],
        dtype=float,
    )


def from_features(values: np.ndarray, room_id: str | None = None) -> RoomSpec:
    """Inverse of :func:`to_features`."""
    values = np.asarray(values, dtype=float)
    if values.shape != (N_FEATURES,):
        raise ValidationError(f"expected {N_FEATURES} features, got shape {values.shape}")
    return RoomSpec(
        length_m=float(values[0]),
        width_m=float(values[1]),
        height_m=float(values[2]),
        source_xyz=tuple(float(v) for v in values[3:6]),
        receiver_xyz=tuple(float(v) for v in values[6:9]),
        absorption=tuple(float(v) for v in values[9:16]),
        room_id=room_id,
    )


@dataclass(frozen=True)
class NormStats:
    """Per-feature min/max fitted on the training split."""

    feat_min: np.ndarray
    feat_max: np.ndarray

    def __post_init__(self):
        if self.feat_min.shape != (N_FEATURES,) or self.feat_max.shape != (N_FEATURES,):
            raise ValidationError("normalization stats must cover all 16 features")
        if np.any(self.feat_max < self.feat_min):
            raise ValidationError("feature max below min")


def fit_minmax(features: np.ndarray) -> NormStats:
    """Fit per-feature extrema over a (n, 16) feature matrix."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.shape[1] != N_FEATURES:
        raise ValidationError(f"expected {N_FEATURES} feature columns")
    return NormStats(
        feat_min=features.min(axis=0).copy(),
        feat_max=features.max(axis=0).copy(),
    )


def normalize(features: np.ndarray, stats: NormStats) -> np.ndarray:
    """Map features to [0, 1] per coordinate.

    Out-of-range inputs are clamped so unseen rooms stay inside the trained
    input domain; degenerate features (max == min) map to 0.
    """
    features = np.asarray(features, dtype=float)
    span = stats.feat_max - stats.feat_min
    safe_span = np.where(span > 0, span, 1.0)
    scaled = (features - stats.feat_min) / safe_span
    scaled = np.where(span > 0, scaled, 0.0)
    return np.clip(scaled, 0.0, 1.0)


def denormalize(scaled: np.ndarray, stats: NormStats) -> np.ndarray:
    """Inverse of :func:`normalize` on in-range values."""
    scaled = np.asarray(scaled, dtype=float)
    span = stats.feat_max - stats.feat_min
    return stats.feat_min + scaled * span


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/validation/test index lists covering a dataset."""

    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray

    @property
    def n_total(self) -> int:
        return len(self.train) + len(self.validation) + len(self.test)


def split_dataset(n: int, seed: int) -> DatasetSplit:
    """Shuffle indices 0..n-1 and split 60/20/20, rounding toward train."""
    if n < 5:
        raise ValidationError(f"need at least 5 records to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_val = int(np.floor(0.2 * n))
    n_test = int(np.floor(0.2 * n))
    n_train = n - n_val - n_test
    return DatasetSplit(
        train=perm[:n_train].copy(),
        validation=perm[n_train : n_train + n_val].copy(),
        test=perm[n_train + n_val :].copy(),
    )
