"""Acoustic parameter estimators and objective/statistical metrics.

Decay-slope parameters follow the usual fit conventions: T20 from the
-5..-25 dB interval (times 3), early decay time from 0..-10 dB (times 6),
clarity from the energy ratio before/after 50 ms.  Signal metrics
(correlation, normalized MSE, spectral MSE) compare reconstructed against
reference impulse responses, and rating statistics summarize listening
test scores per stimulus.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as _signal

from .edc import Edc, to_db
from .errors import NumericError, ValidationError
from .simulator import Rir

C50_CLAMP_DB = 60.0
CI95_FACTOR = 1.96
SPECTRUM_FLOOR_DB = -120.0


def decay_fit(edc_db: np.ndarray, hi_db: float, lo_db: float, sample_rate: float) -> float:
    """Least-squares slope (dB/s) of the curve between two dB levels."""
    if hi_db <= lo_db:
        raise ValidationError("fit interval must satisfy hi_db > lo_db")
    edc_db = np.asarray(edc_db, dtype=float)
    if edc_db.min() > lo_db:
        raise NumericError(
            f"insufficient decay range: curve bottoms out at {edc_db.min():.1f} dB, "
            f"needs {lo_db:.1f} dB"
        )
    mask = (edc_db <= hi_db) & (edc_db >= lo_db)
    if mask.sum() < 2:
        raise NumericError("fewer than two samples inside the fit interval")
    t = np.flatnonzero(mask) / sample_rate
    y = edc_db[mask]
    t_c = t - t.mean()
    denom = np.dot(t_c, t_c)
    if denom == 0.0:
        raise NumericError("degenerate fit interval")
    return float(np.dot(t_c, y - y.mean()) / denom)


def _slope_to_rt(slope: float) -> float:
    if slope >= 0.0:
        raise NumericError("decay slope is non-negative; no reverberation time")
    return -60.0 / slope


def t20(edc: Edc) -> float:
    """Reverberation time from the -5..-25 dB slope, extrapolated to -60 dB."""
    return _slope_to_rt(decay_fit(to_db(edc), -5.0, -25.0, edc.sample_rate))


def edt(edc: Edc) -> float:
    """Early decay time from the 0..-10 dB slope, extrapolated to -60 dB."""
    return _slope_to_rt(decay_fit(to_db(edc), 0.0, -10.0, edc.sample_rate))


def c50(edc: Edc) -> float:
    """Clarity: dB ratio of energy before vs after 50 ms, clamped to +-60 dB."""
    idx = min(int(round(0.05 * edc.sample_rate)), len(edc.values) - 1)
    tail = float(edc.values[idx])
    if tail <= 0.0:
        return C50_CLAMP_DB
    if tail >= 1.0:
        return -C50_CLAMP_DB
    return float(np.clip(10.0 * np.log10((1.0 - tail) / tail), -C50_CLAMP_DB, C50_CLAMP_DB))


def _paired(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape or a.size == 0:
        raise ValidationError("metric inputs must be non-empty and equally sized")
    return a, b


def mae(actual, predicted) -> float:
    a, p = _paired(actual, predicted)
    return float(np.mean(np.abs(a - p)))


def rmse(actual, predicted) -> float:
    a, p = _paired(actual, predicted)
    return float(np.sqrt(np.mean((a - p) ** 2)))


def r2(actual, predicted) -> float:
    """Coefficient of determination (1 minus residual/total variance)."""
    a, p = _paired(actual, predicted)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise NumericError("targets are constant; coefficient of determination undefined")
    return 1.0 - float(np.sum((a - p) ** 2)) / ss_tot


def pearson(a, b) -> float:
    a, b = _paired(a, b)
    a_c = a - a.mean()
    b_c = b - b.mean()
    denom = np.sqrt(np.dot(a_c, a_c) * np.dot(b_c, b_c))
    if denom == 0.0:
        raise NumericError("zero variance input; correlation undefined")
    return float(np.clip(np.dot(a_c, b_c) / denom, -1.0, 1.0))


def _peak_normalize(samples: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(samples))
    if peak == 0.0:
        raise NumericError("all-zero signal cannot be normalized")
    return samples / peak


def _common_length(a: np.ndarray, b: np.ndarray):
    n = max(len(a), len(b))
    pa = np.zeros(n)
    pa[: len(a)] = a
    pb = np.zeros(n)
    pb[: len(b)] = b
    return pa, pb


def rir_mse(a: Rir, b: Rir) -> float:
    """Mean squared sample difference of peak-normalized responses.

    The shorter response is zero-padded; absolute scale is discarded
    because reconstructions carry no meaningful gain.
    """
    if a.sample_rate != b.sample_rate:
        raise ValidationError("sample rates differ")
    pa, pb = _common_length(_peak_normalize(a.samples), _peak_normalize(b.samples))
    return float(np.mean((pa - pb) ** 2))


def spectral_mse_db(a: Rir, b: Rir) -> float:
    """Mean squared difference of dB magnitude spectra.

    Both responses are zero-padded to the next power of two of the longer
    length; magnitudes are floored at -120 dB.  No amplitude normalization
    is applied, so a global gain offset contributes directly.
    """
    if a.sample_rate != b.sample_rate:
        raise ValidationError("sample rates differ")
    n = 1 << max(len(a.samples), len(b.samples)).bit_length()
    floor = 10.0 ** (SPECTRUM_FLOOR_DB / 20.0)
    spec_a = 20.0 * np.log10(np.maximum(np.abs(np.fft.rfft(a.samples, n)), floor))
    spec_b = 20.0 * np.log10(np.maximum(np.abs(np.fft.rfft(b.samples, n)), floor))
    return float(np.mean((spec_a - spec_b) ** 2))


@dataclass(frozen=True)
class MushraStats:
    """Summary statistics of one rating stimulus."""

    stimulus: str
    n: int
    mean: float
    std: float
    median: float
    sem: float
    ci95: float


def mushra_stats(records) -> dict[str, MushraStats]:
    """Per-stimulus mean/std/median/SEM/CI95 of listening-test scores.

    ``records`` is an iterable of (stimulus, participant, trial, score)
    tuples with scores on the 0-100 scale.  The sample standard deviation
    (n-1) is used; a single-score group reports zero spread with a
    warning.  CI95 is the 1.96 * SEM convention.
    """
    groups: dict[str, list[float]] = {}
    for row in records:
        stimulus, _participant, _trial, score = row
        score = float(score)
        if not 0.0 <= score <= 100.0:
            raise ValidationError(f"score {score} outside the 0-100 scale")
        groups.setdefault(str(stimulus), []).append(score)
    if not groups:
        raise ValidationError("no rating records")

    out = {}
    for stimulus, scores in groups.items():
        values = np.asarray(scores)
        n = len(values)
        if n == 1:
            warnings.warn(
                f"stimulus {stimulus!r} has a single rating; spread reported as 0",
                stacklevel=2,
            )
            std = 0.0
        else:
            std = float(np.std(values, ddof=1))
        sem = std / np.sqrt(n)
        out[stimulus] = MushraStats(
            stimulus=stimulus,
            n=n,
            mean=float(np.mean(values)),
            std=std,
            median=float(np.median(values)),
            sem=float(sem),
            ci95=float(CI95_FACTOR * sem),
        )
    return out


def read_ratings_csv(path: str | Path) -> list[tuple[str, str, str, float]]:
    """Load rating rows; columns stimulus, participant, trial, score."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"{path}: empty ratings file")
        expected = ["stimulus", "participant", "trial", "score"]
        if [c.strip().lower() for c in header] != expected:
            raise ValidationError(f"{path}: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValidationError(f"{path}:{lineno}: expected 4 columns")
            try:
                score = float(row[3])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: bad score {row[3]!r}") from exc
            rows.append((row[0], row[1], row[2], score))
    if not rows:
        raise ValidationError(f"{path}: no rating records")
    return rows


def convolve(audio: np.ndarray, audio_rate: int, rir: Rir) -> np.ndarray:
    """FFT convolution of dry audio with an impulse response.

    Output length is len(audio) + len(rir) - 1, peak-normalized to
    -1 dBFS.  Sample rates must match; resampling is out of scope.
    """
    if audio_rate != rir.sample_rate:
        raise ValidationError(
            f"audio rate {audio_rate} Hz differs from response rate {rir.sample_rate} Hz"
        )
    audio = np.asarray(audio, dtype=float)
    if audio.ndim != 1 or audio.size == 0:
        raise ValidationError("audio must be non-empty and mono")
    wet = _signal.fftconvolve(audio, rir.samples, mode="full")
    peak = np.max(np.abs(wet))
    if peak == 0.0:
        raise NumericError("convolution result is identically zero")
    return wet * (10.0 ** (-1.0 / 20.0) / peak)
