"""roomdecay: energy decay curve prediction and RIR reconstruction.

Library layout:

- :mod:`roomdecay.rooms` — room sampling, feature packing, normalization, splits
- :mod:`roomdecay.simulator` — image-source ground-truth RIRs
- :mod:`roomdecay.edc` — Schroeder decay curves and the prediction grid
- :mod:`roomdecay.reconstruct` — RIR reconstruction with stochastic polarity
- :mod:`roomdecay.network` / :mod:`roomdecay.training` — the LSTM regressor
- :mod:`roomdecay.metrics` — acoustic parameters and objective metrics
- :mod:`roomdecay.dataset` / :mod:`roomdecay.cli` — files and commands
"""

from .__about__ import __version__
from .edc import Edc, EdcGrid, compute_edc, downsample_edc, to_db, upsample_edc
from .errors import ConfigError, NumericError, RoomdecayError, ValidationError
from .metrics import c50, edt, mae, mushra_stats, pearson, r2, rir_mse, rmse, spectral_mse_db, t20
from .network import ModelParams, composite_loss, forward, init_params, predict, predict_grid
from .reconstruct import SignPolicy, assign_signs, magnitude_from_edc, reconstruct, reverse_diff
from .rooms import (
    DatasetSplit,
    NormStats,
    RoomRanges,
    RoomSpec,
    fit_minmax,
    from_features,
    normalize,
    denormalize,
    sample_room,
    split_dataset,
    to_features,
)
from .simulator import (
    Rir,
    default_duration,
    predict_t60_eyring,
    simulate_band_rir,
    simulate_rir,
)
from .training import AdamState, TrainConfig, TrainReport, TrainingData, adam_step, train

__all__ = [
    "__version__",
    "AdamState",
    "ConfigError",
    "DatasetSplit",
    "Edc",
    "EdcGrid",
    "ModelParams",
    "NormStats",
    "NumericError",
    "Rir",
    "RoomRanges",
    "RoomSpec",
    "RoomdecayError",
    "SignPolicy",
    "TrainConfig",
    "TrainReport",
    "TrainingData",
    "ValidationError",
    "adam_step",
    "assign_signs",
    "c50",
    "composite_loss",
    "compute_edc",
    "default_duration",
    "denormalize",
    "downsample_edc",
    "edt",
    "fit_minmax",
    "forward",
    "from_features",
    "init_params",
    "mae",
    "magnitude_from_edc",
    "mushra_stats",
    "normalize",
    "pearson",
    "predict",
    "predict_grid",
    "predict_t60_eyring",
    "r2",
    "reconstruct",
    "reverse_diff",
    "rir_mse",
    "rmse",
    "sample_room",
    "simulate_band_rir",
    "simulate_rir",
    "spectral_mse_db",
    "split_dataset",
    "t20",
    "to_db",
    "to_features",
    "train",
    "upsample_edc",
]
