"""Versioned binary model container.

Layout: magic ``EDCM``, version u32, header length u64, JSON header with
the shape table and training config, then the raw float64 array bytes in
table order.  Normalization statistics ride along as two extra arrays so
the whole round trip is bit-exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .network import ModelParams
from .rooms import NormStats
from .training import TrainConfig

MAGIC = b"EDCM"
VERSION = 1

_HEAD = struct.Struct("<4sIQ")


def save_model(
    path: str | Path, params: ModelParams, config: TrainConfig, stats: NormStats
) -> None:
    arrays = params.array_items() + [
        ("norm_min", stats.feat_min),
        ("norm_max", stats.feat_max),
    ]
    header = {
        "arrays": [{"name": name, "shape": list(arr.shape)} for name, arr in arrays],
        "config": config.to_dict(),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, len(blob)))
        fh.write(blob)
        for _, arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path: str | Path) -> tuple[ModelParams, TrainConfig, NormStats]:
    with open(path, "rb") as fh:
        head = fh.read(_HEAD.size)
        if len(head) < _HEAD.size:
            raise ValidationError(f"{path}: truncated model file")
        magic, version, header_len = _HEAD.unpack(head)
        if magic != MAGIC:
            raise ValidationError(f"{path}: not a model file (bad magic)")
        if version != VERSION:
            raise ValidationError(f"{path}: unsupported model version {version}")
        try:
            header = json.loads(fh.read(header_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{path}: corrupt model header: {exc}") from exc

        arrays = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ValidationError(f"{path}: truncated array {entry['name']}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()

    try:
        stats = NormStats(feat_min=arrays.pop("norm_min"), feat_max=arrays.pop("norm_max"))
        params = ModelParams(**arrays)
        config = TrainConfig(**header["config"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: incomplete model container: {exc}") from exc
    return params, config, stats
