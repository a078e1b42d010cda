"""Mono WAV input/output (float32 out, PCM and float accepted in)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import ValidationError

_PCM_SCALE = {
    np.dtype(np.int16): 2.0**15,
    np.dtype(np.int32): 2.0**31,
}


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a mono WAV file as float64 samples in [-1, 1] plus its rate."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except ValueError as exc:
        raise ValidationError(f"{path}: not a readable WAV file: {exc}") from exc
    if data.ndim != 1:
        raise ValidationError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.dtype in _PCM_SCALE:
        samples = data.astype(np.float64) / _PCM_SCALE[data.dtype]
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValidationError(f"{path}: unsupported WAV sample format {data.dtype}")
    return samples, int(rate)


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write float32 mono WAV."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise ValidationError("only mono output is supported")
    wavfile.write(path, int(sample_rate), samples.astype(np.float32))
