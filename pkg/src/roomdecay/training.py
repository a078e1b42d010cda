"""Adam optimization, the training loop and early stopping."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ValidationError
from .network import (
    DEFAULT_DENSE,
    DEFAULT_HIDDEN,
    ModelParams,
    batch_objective,
    composite_loss,
    forward,
    init_params,
    zero_grads,
)
from .rooms import DatasetSplit, NormStats, normalize


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    dropout_p: float = 0.3
    loss_alpha: float = 1.0
    loss_beta: float = 0.5
    max_epochs: int = 200
    patience: int = 10
    batch_size: int = 32
    seed: int = 0
    hidden_units: int = DEFAULT_HIDDEN
    dense_units: int = DEFAULT_DENSE

    def __post_init__(self):
        if self.loss_alpha < 0 or self.loss_beta < 0:
            raise ValidationError("loss weights must be non-negative")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValidationError("dropout probability must lie in [0, 1)")
        if self.max_epochs < 1 or self.patience < 1 or self.batch_size < 1:
            raise ValidationError("epochs, patience and batch size must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(m=zero_grads(params), v=zero_grads(params))


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    config: TrainConfig,
) -> None:
    """One bias-corrected Adam update, in place.

    The entries of ``grads`` are consumed as scratch space to avoid
    temporary allocations on multi-million-parameter blocks.
    """
    state.t += 1
    b1, b2 = config.adam_beta1, config.adam_beta2
    corr1 = 1.0 - b1**state.t
    corr2 = 1.0 - b2**state.t
    for name, arr in params.array_items():
        g = grads[name]
        m, v = state.m[name], state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        g *= g
        v += (1.0 - b2) * g
        # reuse g as the update scratch: lr * m_hat / (sqrt(v_hat) + eps)
        np.sqrt(v, out=g)
        g /= np.sqrt(corr2)
        g += config.adam_eps
        np.divide(m, g, out=g)
        g *= config.learning_rate / corr1
        arr -= g


@dataclass
class TrainReport:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopping_reason: str = ""
    wall_clock_s: float = 0.0

    @property
    def n_epochs(self) -> int:
        return len(self.train_losses)


@dataclass(frozen=True, eq=False)
class TrainingData:
    """Raw features, target decay grids and the fitted normalization."""

    features: np.ndarray  # (n, 16) raw
    grids: np.ndarray  # (n, grid length)
    stats: NormStats

    def __post_init__(self):
        if self.features.shape[0] != self.grids.shape[0]:
            raise ValidationError("feature and target row counts differ")


def _epoch_batches(train_idx: np.ndarray, batch_size: int, rng: np.random.Generator):
    perm = rng.permutation(train_idx)
    for start in range(0, len(perm), batch_size):
        yield perm[start : start + batch_size]


def evaluate_loss(
    params: ModelParams, x: np.ndarray, y: np.ndarray, config: TrainConfig
) -> float:
    """Deterministic (no dropout) mean composite loss."""
    pred = forward(params, x)
    losses, _ = composite_loss(pred, y, alpha=config.loss_alpha, beta=config.loss_beta)
    return float(np.mean(losses))


def train(
    data: TrainingData, split: DatasetSplit, config: TrainConfig
) -> tuple[ModelParams, TrainReport]:
    """Mini-batch training with early stopping on the validation loss.

    Fully deterministic for a fixed config seed: epoch shuffles and
    dropout masks are derived from (seed, epoch, batch).  The parameters
    from the best validation epoch are returned, not the final ones.
    """
    if len(split.train) == 0 or len(split.validation) == 0:
        raise ValidationError("training and validation splits must be non-empty")

    x_all = normalize(data.features, data.stats)
    y_all = np.asarray(data.grids, dtype=float)

    params = init_params(
        input_dim=x_all.shape[1],
        hidden_dim=config.hidden_units,
        dense_dim=config.dense_units,
        output_dim=y_all.shape[1],
        seed=config.seed,
    )
    state = AdamState.for_params(params)
    report = TrainReport()

    x_val = x_all[split.validation]
    y_val = y_all[split.validation]

    best_val = np.inf
    best_params = params.copy()
    epochs_since_best = 0
    started = time.perf_counter()

    for epoch in range(1, config.max_epochs + 1):
        shuffle_rng = np.random.default_rng([config.seed, epoch, 0x5])
        seen = 0
        epoch_loss = 0.0
        for batch_idx, batch in enumerate(
            _epoch_batches(split.train, config.batch_size, shuffle_rng)
        ):
            dropout_rng = np.random.default_rng([config.seed, epoch, batch_idx, 0xD])
            loss, grads = batch_objective(
                params,
                x_all[batch],
                y_all[batch],
                alpha=config.loss_alpha,
                beta=config.loss_beta,
                dropout_p=config.dropout_p,
                dropout_rng=dropout_rng,
            )
            adam_step(params, grads, state, config)
            epoch_loss += loss * len(batch)
            seen += len(batch)

        val_loss = evaluate_loss(params, x_val, y_val, config)
        report.train_losses.append(epoch_loss / seen)
        report.val_losses.append(val_loss)

        if val_loss < best_val:
            best_val = val_loss
            best_params = params.copy()
            report.best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= config.patience:
                report.stopping_reason = "early_stopping"
                break
    else:
        report.stopping_reason = "max_epochs"

    report.wall_clock_s = time.perf_counter() - started
    return best_params, report
