"""Command-line entry point wiring all stages together.

Every command validates its inputs, writes a run manifest next to its
outputs and exits with 0 on success, 2 on usage errors, 3 on validation
errors and 4 on numeric failures.  All randomness is seed-controlled, so
re-running a command reproduces its outputs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .__about__ import __version__
from . import checkpoint, metrics
from .audio import read_wav, write_wav
from .dataset import Dataset, generate_dataset
from .edc import Edc, EdcGrid, GRID_RATE, read_edc_csv, upsample_edc, write_edc_csv
from .errors import ConfigError, NumericError, ValidationError
from .network import forward, postprocess_prediction, predict_grid
from .reconstruct import SignPolicy, reconstruct
from .rooms import N_FEATURES, RoomSpec, normalize, to_features
from .simulator import Rir, default_duration, simulate_rir
from .training import TrainConfig, TrainingData, train

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4


def _manifest_path(target: Path) -> Path:
    if target.is_dir():
        return target / "run_manifest.json"
    return target.with_name(target.name + ".manifest.json")


def _write_manifest(target: Path, command: str, config: dict, inputs: list, outputs: list):
    manifest = {
        "command": command,
        "config": config,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    path = _manifest_path(target)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _default_jobs() -> int:
    env = os.environ.get("ROOMDECAY_JOBS")
    if env is None:
        return 1
    try:
        jobs = int(env)
    except ValueError as exc:
        raise ConfigError(f"ROOMDECAY_JOBS={env!r} is not an integer") from exc
    if jobs < 1:
        raise ConfigError("ROOMDECAY_JOBS must be at least 1")
    return jobs


def cmd_gen_dataset(args) -> int:
    out = Path(args.out)
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    generate_dataset(
        out, n_rooms=args.rooms, master_seed=args.seed, jobs=jobs, save_rirs=args.save_rirs
    )
    _write_manifest(
        out,
        "gen-dataset",
        {"rooms": args.rooms, "seed": args.seed, "jobs": jobs, "save_rirs": args.save_rirs},
        inputs=[],
        outputs=sorted(str(p) for p in out.iterdir() if p.name != "run_manifest.json"),
    )
    return EXIT_OK


_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(TrainConfig)}


def _read_train_config_file(path: Path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_FIELDS:
                raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = raw
    return values


def _coerce_config(values: dict) -> TrainConfig:
    kwargs = {}
    for key, raw in values.items():
        if raw is None:
            continue
        target = _CONFIG_FIELDS[key]
        caster = int if target in (int, "int") else float
        try:
            kwargs[key] = caster(raw)
        except ValueError as exc:
            raise ValidationError(f"config key {key}: bad value {raw!r}") from exc
    return TrainConfig(**kwargs)


def cmd_train(args) -> int:
    values: dict = {}
    inputs = [args.dataset]
    if args.config:
        values.update(_read_train_config_file(Path(args.config)))
        inputs.append(args.config)
    overrides = {
        "seed": args.seed,
        "max_epochs": args.epochs,
        "batch_size": args.batch_size,
        "learning_rate": args.lr,
        "dropout_p": args.dropout,
        "patience": args.patience,
        "hidden_units": args.hidden,
        "dense_units": args.dense,
        "loss_alpha": args.alpha,
        "loss_beta": args.beta,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    config = _coerce_config(values)

    data = Dataset(args.dataset)
    training = TrainingData(features=data.features, grids=data.grids, stats=data.stats)
    params, report = train(training, data.split(), config)

    out = Path(args.out)
    checkpoint.save_model(out, params, config, data.stats)
    outputs = [out]
    if args.log:
        with open(args.log, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_loss"])
            for i, (tr, vl) in enumerate(zip(report.train_losses, report.val_losses), 1):
                writer.writerow([i, f"{tr:.17g}", f"{vl:.17g}"])
        outputs.append(Path(args.log))
    _write_manifest(out, "train", config.to_dict(), inputs, outputs)
    print(
        f"trained {report.n_epochs} epochs (best {report.best_epoch}, "
        f"{report.stopping_reason}), val loss {min(report.val_losses):.3e}"
    )
    return EXIT_OK


def _load_room_json(path: Path) -> RoomSpec:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return RoomSpec(
            length_m=float(payload["length_m"]),
            width_m=float(payload["width_m"]),
            height_m=float(payload["height_m"]),
            source_xyz=tuple(float(v) for v in payload["source_xyz"]),
            receiver_xyz=tuple(float(v) for v in payload["receiver_xyz"]),
            absorption=tuple(float(v) for v in payload["absorption"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: incomplete room description: {exc}") from exc


def _parse_feature_string(text: str) -> np.ndarray:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != N_FEATURES:
        raise ValidationError(f"expected {N_FEATURES} feature values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ValidationError(f"bad feature value: {exc}") from exc


def cmd_predict(args) -> int:
    params, _config, stats = checkpoint.load_model(args.model)
    inputs = [args.model]
    if args.room:
        room = _load_room_json(Path(args.room))
        inputs.append(args.room)
        features = to_features(room)
    else:
        features = _parse_feature_string(args.features)

    grid = predict_grid(params, stats, features)
    if args.grid:
        out_edc = Edc(values=grid.values, sample_rate=GRID_RATE)
    else:
        out_edc = upsample_edc(grid)
    out = Path(args.out)
    write_edc_csv(out, out_edc)
    _write_manifest(
        out,
        "predict",
        {"model": args.model, "room": args.room, "features": args.features, "grid": args.grid},
        inputs,
        [out],
    )
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    edc = read_edc_csv(args.edc)
    policy = SignPolicy(mode=args.method, stickiness=args.stickiness, seed=args.seed)
    rir = reconstruct(edc, policy)
    out = Path(args.out)
    write_wav(out, rir.samples, rir.sample_rate)
    _write_manifest(
        out,
        "reconstruct",
        {
            "edc": args.edc,
            "method": args.method,
            "stickiness": args.stickiness,
            "seed": args.seed,
        },
        [args.edc],
        [out],
    )
    return EXIT_OK


def cmd_convolve(args) -> int:
    audio, audio_rate = read_wav(args.audio)
    rir_samples, rir_rate = read_wav(args.rir)
    wet = metrics.convolve(audio, audio_rate, Rir(samples=rir_samples, sample_rate=rir_rate))
    out = Path(args.out)
    write_wav(out, wet, audio_rate)
    _write_manifest(
        out, "convolve", {"audio": args.audio, "rir": args.rir}, [args.audio, args.rir], [out]
    )
    return EXIT_OK


def _estimate_params(values: np.ndarray, rate: int):
    curve = Edc(values=values, sample_rate=rate)
    out = {}
    for name, fn in (("t20", metrics.t20), ("edt", metrics.edt), ("c50", metrics.c50)):
        try:
            out[name] = fn(curve)
        except NumericError:
            out[name] = float("nan")
    return out


def cmd_eval(args) -> int:
    params, _config, stats = checkpoint.load_model(args.model)
    data = Dataset(args.dataset)
    split = data.split()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    x = normalize(data.features[split.test], data.stats)
    raw_pred = forward(params, x)
    predicted = np.stack([postprocess_prediction(row) for row in raw_pred])
    targets = data.grids[split.test]

    err = predicted - targets
    abs_err = np.abs(err)
    curves_path = out_dir / "edc_error_curves.csv"
    with open(curves_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "mean_mae", "std_mae", "mean_rmse", "std_rmse"])
        times = np.arange(targets.shape[1]) / GRID_RATE
        mean_mae = abs_err.mean(axis=0)
        std_mae = abs_err.std(axis=0)
        mean_rmse = np.sqrt((err**2).mean(axis=0))
        std_rmse = np.sqrt((err**2).std(axis=0))
        for row in zip(times, mean_mae, std_mae, mean_rmse, std_rmse):
            writer.writerow([f"{v:.10g}" for v in row])

    report_path = out_dir / "parameter_report.csv"
    pairs: dict[str, list[tuple[float, float]]] = {"t20": [], "edt": [], "c50": []}
    with open(report_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["room_id", "t20_target", "t20_pred", "edt_target", "edt_pred",
             "c50_target", "c50_pred"]
        )
        for row_idx, ds_idx in enumerate(split.test):
            tgt = _estimate_params(targets[row_idx], GRID_RATE)
            prd = _estimate_params(predicted[row_idx], GRID_RATE)
            writer.writerow(
                [data.room_ids[ds_idx]]
                + [f"{tgt[k]:.10g}" for k in ("t20",)] + [f"{prd['t20']:.10g}"]
                + [f"{tgt['edt']:.10g}", f"{prd['edt']:.10g}"]
                + [f"{tgt['c50']:.10g}", f"{prd['c50']:.10g}"]
            )
            for key in pairs:
                if np.isfinite(tgt[key]) and np.isfinite(prd[key]):
                    pairs[key].append((tgt[key], prd[key]))

    summary_path = out_dir / "parameter_summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "n", "mae", "rmse", "r2"])
        for key, values in pairs.items():
            if len(values) < 2:
                writer.writerow([key, len(values), "nan", "nan", "nan"])
                continue
            actual = np.array([v[0] for v in values])
            pred = np.array([v[1] for v in values])
            writer.writerow(
                [
                    key,
                    len(values),
                    f"{metrics.mae(actual, pred):.10g}",
                    f"{metrics.rmse(actual, pred):.10g}",
                    f"{metrics.r2(actual, pred):.10g}",
                ]
            )

    rir_path = out_dir / "rir_metrics.csv"
    n_rir = min(args.rir_rooms, len(split.test))
    with open(rir_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["room_id", "pearson", "pearson_abs", "rir_mse", "spectral_mse_db"]
        )
        for row_idx in range(n_rir):
            ds_idx = split.test[row_idx]
            room = data.room(ds_idx)
            truth = simulate_rir(room, default_duration(room))
            pred_edc = upsample_edc(EdcGrid(values=predicted[row_idx]))
            recon = reconstruct(
                pred_edc, SignPolicy(mode="rss", seed=args.rir_seed + row_idx)
            )
            n = max(len(truth.samples), len(recon.samples))
            a = np.zeros(n)
            a[: len(truth.samples)] = truth.samples / np.max(np.abs(truth.samples))
            b = np.zeros(n)
            b[: len(recon.samples)] = recon.samples / np.max(np.abs(recon.samples))
            # Reconstructions carry an arbitrary global polarity, so the
            # sign-agnostic correlation is the meaningful one.
            corr = metrics.pearson(a, b)
            writer.writerow(
                [
                    data.room_ids[ds_idx],
                    f"{corr:.10g}",
                    f"{abs(corr):.10g}",
                    f"{metrics.rir_mse(truth, recon):.10g}",
                    f"{metrics.spectral_mse_db(truth, recon):.10g}",
                ]
            )

    _write_manifest(
        out_dir,
        "eval",
        {
            "model": args.model,
            "dataset": args.dataset,
            "rir_rooms": args.rir_rooms,
            "rir_seed": args.rir_seed,
        },
        [args.model, args.dataset],
        [curves_path, report_path, summary_path, rir_path],
    )
    print(f"evaluated {len(split.test)} held-out rooms -> {out_dir}")
    return EXIT_OK


def cmd_mushra_stats(args) -> int:
    rows = metrics.read_ratings_csv(args.ratings)
    stats = metrics.mushra_stats(rows)
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stimulus", "n", "mean", "std", "median", "sem", "ci95"])
        for name in sorted(stats):
            s = stats[name]
            writer.writerow(
                [s.stimulus, s.n]
                + [f"{v:.10g}" for v in (s.mean, s.std, s.median, s.sem, s.ci95)]
            )
    _write_manifest(out, "mushra-stats", {"ratings": args.ratings}, [args.ratings], [out])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roomdecay",
        description="Predict room energy decay curves and reconstruct impulse responses.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="simulate rooms and write a dataset directory")
    p.add_argument("--rooms", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=None, help="defaults to $ROOMDECAY_JOBS or 1")
    p.add_argument("--save-rirs", action="store_true")
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("train", help="train the decay predictor on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config", help="key=value file with training settings")
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="per-epoch loss CSV")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--dropout", type=float)
    p.add_argument("--patience", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--dense", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict a decay curve for one room")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--room", help="room description JSON file")
    group.add_argument("--features", help="16 comma-separated raw feature values")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", action="store_true", help="emit the 480 Hz grid instead of 48 kHz")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("reconstruct", help="reconstruct an impulse response from a decay curve")
    p.add_argument("--edc", required=True)
    p.add_argument("--method", choices=["rs", "rss"], required=True)
    p.add_argument("--stickiness", type=float, default=0.90)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("convolve", help="convolve dry audio with an impulse response")
    p.add_argument("--audio", required=True)
    p.add_argument("--rir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("eval", help="evaluate a model against a dataset's held-out rooms")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--rir-rooms", type=int, default=4)
    p.add_argument("--rir-seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mushra-stats", help="summarize listening-test rating scores")
    p.add_argument("--ratings", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mushra_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValidationError, ConfigError) as exc:
        print(f"error: validation: {str(exc).replace(chr(10), ' ')}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"error: numeric: {str(exc).replace(chr(10), ' ')}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"error: validation: missing file: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
