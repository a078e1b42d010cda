"""Dataset generation and on-disk layout.

A dataset directory holds one CSV row per room: the 16 raw features and
the 1440-point target decay grid, plus the train-split normalization
statistics and a manifest with every seed needed to reproduce the files
bit-for-bit.  Rooms are simulated independently from per-room seeds
derived from the master seed, so generation parallelizes across
processes without changing the output.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __about__
from .edc import GRID_LENGTH, compute_edc, downsample_edc
from .errors import ValidationError
from .rooms import (
    FEATURE_NAMES,
    N_FEATURES,
    DatasetSplit,
    NormStats,
    fit_minmax,
    from_features,
    sample_room,
    split_dataset,
    to_features,
)
from .simulator import (
    DURATION_CAP_S,
    DURATION_FLOOR_S,
    DURATION_T60_FACTOR,
    default_duration,
    simulate_rir,
)
from .audio import write_wav

FEATURES_FILE = "features.csv"
GRIDS_FILE = "edc_grids.csv"
NORM_STATS_FILE = "norm_stats.csv"
MANIFEST_FILE = "manifest.json"

_FLOAT_FMT = "{:.17g}"


def derive_room_seeds(master_seed: int, n: int) -> list[int]:
    """Counter-derived per-room seeds, stable under parallel generation."""
    words = np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)
    return [int(w) for w in words]


def derive_split_seed(master_seed: int) -> int:
    return int(np.random.SeedSequence([master_seed, 0x51]).generate_state(1, np.uint64)[0])


def room_id_for(index: int) -> str:
    return f"room_{index:05d}"


def _simulate_record(args):
    index, room_seed, rir_path = args
    room = sample_room(room_seed)
    duration = default_duration(room)
    rir = simulate_rir(room, duration)
    grid = downsample_edc(compute_edc(rir))
    if rir_path is not None:
        write_wav(rir_path, rir.samples, rir.sample_rate)
    return index, to_features(room), grid.values, duration


def generate_dataset(
    out_dir: str | Path,
    n_rooms: int,
    master_seed: int,
    jobs: int = 1,
    save_rirs: bool = False,
) -> dict:
    """Simulate rooms and write the dataset directory; returns the manifest."""
    if n_rooms < 5:
        raise ValidationError("need at least 5 rooms to form train/val/test splits")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rir_dir = out_dir / "rirs"
    if save_rirs:
        rir_dir.mkdir(exist_ok=True)

    seeds = derive_room_seeds(master_seed, n_rooms)
    tasks = [
        (i, seeds[i], (rir_dir / f"{room_id_for(i)}.wav") if save_rirs else None)
        for i in range(n_rooms)
    ]

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_simulate_record, tasks, chunksize=4))
    else:
        results = [_simulate_record(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    features = np.stack([r[1] for r in results])
    grids = np.stack([r[2] for r in results])

    split_seed = derive_split_seed(master_seed)
    split = split_dataset(n_rooms, split_seed)
    stats = fit_minmax(features[split.train])

    _write_matrix_csv(out_dir / FEATURES_FILE, list(FEATURE_NAMES), features)
    _write_matrix_csv(
        out_dir / GRIDS_FILE, [f"g{i:04d}" for i in range(GRID_LENGTH)], grids
    )
    _write_norm_stats(out_dir / NORM_STATS_FILE, stats)

    manifest = {
        "master_seed": master_seed,
        "n_rooms": n_rooms,
        "split_seed": split_seed,
        "split_proportions": [0.6, 0.2, 0.2],
        "duration_policy": {
            "t60_factor": DURATION_T60_FACTOR,
            "floor_s": DURATION_FLOOR_S,
            "cap_s": DURATION_CAP_S,
        },
        "simulator_version": __about__.__version__,
        "rirs_saved": save_rirs,
    }
    with open(out_dir / MANIFEST_FILE, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _write_matrix_csv(path: Path, columns: list[str], matrix: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["room_id", *columns])
        for i, row in enumerate(matrix):
            writer.writerow([room_id_for(i), *(_FLOAT_FMT.format(v) for v in row)])


def _read_matrix_csv(path: Path, n_columns: int) -> tuple[list[str], np.ndarray]:
    ids = []
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != n_columns + 1:
            raise ValidationError(f"{path}: expected {n_columns + 1} columns")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != n_columns + 1:
                raise ValidationError(f"{path}:{lineno}: wrong column count")
            ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: bad value: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return ids, np.asarray(rows)


def _write_norm_stats(path: Path, stats: NormStats) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "min", "max"])
        for i, name in enumerate(FEATURE_NAMES):
            writer.writerow(
                [name, _FLOAT_FMT.format(stats.feat_min[i]), _FLOAT_FMT.format(stats.feat_max[i])]
            )


def read_norm_stats(path: str | Path) -> NormStats:
    mins = []
    maxs = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["feature", "min", "max"]:
            raise ValidationError(f"{path}: bad normalization stats header")
        for name, lo, hi in reader:
            if name != FEATURE_NAMES[len(mins)]:
                raise ValidationError(f"{path}: unexpected feature order at {name!r}")
            mins.append(float(lo))
            maxs.append(float(hi))
    if len(mins) != N_FEATURES:
        raise ValidationError(f"{path}: expected {N_FEATURES} feature rows")
    return NormStats(feat_min=np.asarray(mins), feat_max=np.asarray(maxs))


class Dataset:
    """Loaded dataset directory: features, target grids, stats, manifest."""

    def __init__(self, root: str | Path):
        root = Path(root)
        for required in (FEATURES_FILE, GRIDS_FILE, NORM_STATS_FILE, MANIFEST_FILE):
            if not (root / required).exists():
                raise ValidationError(f"{root}: missing {required}")
        self.root = root
        ids_f, self.features = _read_matrix_csv(root / FEATURES_FILE, N_FEATURES)
        ids_g, self.grids = _read_matrix_csv(root / GRIDS_FILE, GRID_LENGTH)
        if ids_f != ids_g:
            raise ValidationError(f"{root}: feature and grid room ids disagree")
        self.room_ids = ids_f
        self.stats = read_norm_stats(root / NORM_STATS_FILE)
        with open(root / MANIFEST_FILE) as fh:
            self.manifest = json.load(fh)

    def __len__(self) -> int:
        return len(self.room_ids)

    def split(self) -> DatasetSplit:
        return split_dataset(len(self), int(self.manifest["split_seed"]))

    def room(self, index: int):
        return from_features(self.features[index], room_id=self.room_ids[index])
