"""Command-line pipeline: synth, train, evaluate, importance, report.

Exit codes: 0 success, 2 configuration error, 3 input parse/decode error,
4 I/O error (missing or unwritable files). Verbosity is controlled by the
RANPREDICT_LOG environment variable (debug/info/warning/error).

Every artifact is deterministic for a fixed config: rerunning any command
with the same inputs reproduces byte-identical files. The test partition is
reconstructed from (seed, train_fraction) at evaluate time, so train and
evaluate must share those settings.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import Scaler, TaskSpec, build_task, fit_scaler, split_train_test, transform
from .errors import ConfigError, CsvSchemaError, ModelDecodeError, UnsupportedModelError
from .importance import gain_importance
from .ingest import CleaningPolicy, align_timestamps, filter_outliers, parse_metrics_csv, write_metrics_csv
from .metrics import error_histogram, evaluate as evaluate_metrics, mse as mse_metric
from .regressors import (
    VARIANT_SECOND_ORDER,
    deserialize_model,
    fit_boosted_leafwise,
    fit_boosted_second_order,
    fit_forest,
    fit_linear,
    fit_tree,
    predict,
    serialize_model,
)
from .regressors import BoostedModel, ForestModel, LinearModel, TreeModel
from .synthgen import GenConfig, generate

log = logging.getLogger("ranpredict")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_IO = 4

MODEL_NAMES = ("linear", "tree", "forest", "xgb_like", "lgbm_like")

SCALER_FORMAT = "ranpredict.scaler"
SCALER_VERSION = 1

_BOOL_KEYS = {"drop_zero_brate", "temporal", "forest_bootstrap"}
_INT_KEYS = {
    "n_samples", "seed", "tti_period", "error_hist_bins",
    "tree_min_samples_leaf",
    "forest_n_trees", "forest_min_samples_leaf",
    "xgb_n_rounds", "xgb_min_samples_leaf",
    "lgbm_n_rounds", "lgbm_num_leaves", "lgbm_n_bins", "lgbm_min_samples_leaf",
}
_OPT_INT_KEYS = {"tree_max_depth", "forest_max_depth", "xgb_max_depth"}
_FLOAT_KEYS = {
    "snr_mean_db", "snr_std_db", "bler_steepness", "brate_scale_kbps", "noise_std_kbps",
    "train_fraction", "snr_min_db", "snr_max_db", "zscore_cutoff",
    "forest_feature_fraction", "xgb_learning_rate", "xgb_lambda",
    "lgbm_learning_rate", "lgbm_lambda",
}
_FLOAT_LIST_KEYS = {"mcs_table", "snr_thresholds_db"}
_STR_KEYS = {"task", "models"}

KNOWN_KEYS = (
    _BOOL_KEYS | _INT_KEYS | _OPT_INT_KEYS | _FLOAT_KEYS | _FLOAT_LIST_KEYS | _STR_KEYS
)


def load_config_file(path: str | Path) -> dict:
    """Parse a flat key = value config file (``#`` comments, blank lines ok)."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            value = value.strip()
            if key not in KNOWN_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _convert(key, value, where=f"{path}:{lineno}")
    return values


def _convert(key: str, value: str, where: str):
    try:
        if key in _BOOL_KEYS:
            low = value.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if key in _INT_KEYS:
            return int(value)
        if key in _OPT_INT_KEYS:
            return None if value.lower() == "none" else int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _FLOAT_LIST_KEYS:
            return tuple(float(v) for v in value.split(","))
        return value
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from exc


def _merged_config(args) -> dict:
    cfg = load_config_file(args.config) if getattr(args, "config", None) else {}
    for flag in ("seed", "task", "models", "train_fraction"):
        value = getattr(args, flag, None)
        if value is not None:
            cfg[flag] = value
    if getattr(args, "temporal", False):
        cfg["temporal"] = True
    if getattr(args, "n", None) is not None:
        cfg["n_samples"] = args.n
    return cfg


def _selected_models(cfg: dict) -> list:
    raw = cfg.get("models", ",".join(MODEL_NAMES))
    names = [s.strip() for s in raw.split(",") if s.strip()]
    if not names:
        raise ConfigError("no models selected")
    for name in names:
        if name not in MODEL_NAMES:
            raise ConfigError(f"unknown model {name!r}; expected subset of {', '.join(MODEL_NAMES)}")
    return names


def _gen_config(cfg: dict) -> GenConfig:
    kwargs = {}
    for key in ("n_samples", "seed", "snr_mean_db", "snr_std_db", "mcs_table",
                "snr_thresholds_db", "bler_steepness", "brate_scale_kbps",
                "noise_std_kbps", "tti_period"):
        if key in cfg:
            kwargs[key] = cfg[key]
    return GenConfig(**kwargs)


def _cleaning_policy(cfg: dict) -> CleaningPolicy:
    kwargs = {}
    for key in ("snr_min_db", "snr_max_db", "zscore_cutoff", "drop_zero_brate"):
        if key in cfg:
            kwargs[key] = cfg[key]
    return CleaningPolicy(**kwargs)


def _load_records(paths: list, policy: CleaningPolicy):
    records = []
    for path in paths:
        with open(path, encoding="utf-8", newline="") as fh:
            result = parse_metrics_csv(fh)
        for err in result.errors:
            log.warning("%s:%d: %s (%s) -- row skipped", path, err.line, err.message, err.column)
        log.info("%s: parsed %d rows, rejected %d", path, result.n_parsed, result.n_rejected)
        records.extend(result.records)
    aligned, duplicates = align_timestamps(records)
    kept, dropped = filter_outliers(aligned, policy)
    log.info("cleaning: %d duplicate timestamps, %d outlier rows dropped", duplicates, dropped)
    return kept


def _build_splits(cfg: dict, records):
    task = TaskSpec(cfg.get("task", "brate"))
    X, y = build_task(records, task)
    return task, split_train_test(
        X,
        y,
        train_fraction=cfg.get("train_fraction", 0.8),
        seed=cfg.get("seed", 0),
        temporal=cfg.get("temporal", False),
    )


def _fitter(name: str, cfg: dict):
    if name == "linear":
        return fit_linear
    if name == "tree":
        return lambda X, y: fit_tree(
            X, y,
            max_depth=cfg.get("tree_max_depth", 8),
            min_samples_leaf=cfg.get("tree_min_samples_leaf", 5),
        )
    if name == "forest":
        return lambda X, y: fit_forest(
            X, y,
            n_trees=cfg.get("forest_n_trees", 100),
            max_depth=cfg.get("forest_max_depth", 8),
            min_samples_leaf=cfg.get("forest_min_samples_leaf", 5),
            feature_fraction=cfg.get("forest_feature_fraction", 1.0 / 3.0),
            bootstrap=cfg.get("forest_bootstrap", True),
            seed=cfg.get("seed", 0),
        )
    if name == "xgb_like":
        return lambda X, y: fit_boosted_second_order(
            X, y,
            n_rounds=cfg.get("xgb_n_rounds", 200),
            learning_rate=cfg.get("xgb_learning_rate", 0.1),
            reg_lambda=cfg.get("xgb_lambda", 1.0),
            max_depth=cfg.get("xgb_max_depth", 8),
            min_samples_leaf=cfg.get("xgb_min_samples_leaf", 5),
            seed=cfg.get("seed", 0),
        )
    if name == "lgbm_like":
        return lambda X, y: fit_boosted_leafwise(
            X, y,
            n_rounds=cfg.get("lgbm_n_rounds", 200),
            learning_rate=cfg.get("lgbm_learning_rate", 0.1),
            reg_lambda=cfg.get("lgbm_lambda", 1.0),
            num_leaves=cfg.get("lgbm_num_leaves", 31),
            n_bins=cfg.get("lgbm_n_bins", 64),
            min_samples_leaf=cfg.get("lgbm_min_samples_leaf", 5),
            seed=cfg.get("seed", 0),
        )
    raise ConfigError(f"unknown model {name!r}")


def model_cli_name(model) -> str:
    """The CLI-facing name of a model instance."""
    if isinstance(model, LinearModel):
        return "linear"
    if isinstance(model, TreeModel):
        return "tree"
    if isinstance(model, ForestModel):
        return "forest"
    if isinstance(model, BoostedModel):
        return "xgb_like" if model.variant == VARIANT_SECOND_ORDER else "lgbm_like"
    raise TypeError(f"not a model: {type(model).__name__}")


def _write_scaler(path: Path, scaler: Scaler, column_names) -> None:
    payload = {
        "format": SCALER_FORMAT,
        "version": SCALER_VERSION,
        "column_names": list(column_names),
        "means": [float(v) for v in scaler.means],
        "stds": [float(v) for v in scaler.stds],
    }
    path.write_bytes(json.dumps(payload, sort_keys=True, separators=(",", ":")).encode())


def _read_scaler(path: Path) -> tuple[Scaler, tuple]:
    try:
        payload = json.loads(path.read_bytes().decode("utf-8"))
        if payload.get("format") != SCALER_FORMAT or payload.get("version") != SCALER_VERSION:
            raise ModelDecodeError(f"{path}: not a scaler file of a supported version")
        scaler = Scaler(
            means=np.array(payload["means"], dtype=float),
            stds=np.array(payload["stds"], dtype=float),
        )
        return scaler, tuple(payload["column_names"])
    except ModelDecodeError:
        raise
    except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ModelDecodeError(f"{path}: malformed scaler payload: {exc}") from exc


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    cfg = _merged_config(args)
    gen = _gen_config(cfg)
    records = generate(gen)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        raise FileNotFoundError(f"output directory does not exist: {out.parent}")
    write_metrics_csv(records, out)
    if not records:
        log.warning("n_samples is 0: wrote a header-only file")
        print(f"warning: wrote header-only file (n_samples=0) to {out}")
    print(f"wrote {len(records)} records to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _merged_config(args)
    names = _selected_models(cfg)
    records = _load_records(args.input, _cleaning_policy(cfg))
    task, (X_tr, y_tr, X_te, y_te) = _build_splits(cfg, records)
    scaler = fit_scaler(X_tr)
    X_tr_s = transform(scaler, X_tr)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_scaler(out / "scaler.json", scaler, X_tr.column_names)

    summary_rows = []
    for name in names:
        started = time.perf_counter()
        model = _fitter(name, cfg)(X_tr_s, y_tr)
        wall = time.perf_counter() - started
        train_mse = mse_metric(y_tr.values, predict(model, X_tr_s).values)
        (out / f"model_{name}.json").write_bytes(serialize_model(model))
        summary_rows.append((name, _fmt(train_mse), X_tr.n_rows, X_te.n_rows))
        print(f"{name}: train_mse={train_mse:.6g} wall={wall:.3f}s")
    _write_csv(out / "train_summary.csv", ("model", "train_mse", "n_train", "n_test"), summary_rows)
    print(f"trained {len(names)} model(s) on {X_tr.n_rows} rows (task={task.target}); wrote {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _merged_config(args)
    names = _selected_models(cfg)
    records = _load_records(args.input, _cleaning_policy(cfg))
    task, (X_tr, y_tr, X_te, y_te) = _build_splits(cfg, records)

    model_dir = Path(args.model_dir or args.out)
    scaler, scaler_cols = _read_scaler(model_dir / "scaler.json")
    if scaler_cols != X_te.column_names:
        raise ConfigError(
            f"scaler was fit on columns {scaler_cols}, task uses {X_te.column_names}"
        )
    X_te_s = transform(scaler, X_te)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n_bins = cfg.get("error_hist_bins", 50)
    comparison_rows = []
    for name in names:
        model_path = model_dir / f"model_{name}.json"
        if not model_path.exists():
            raise FileNotFoundError(f"missing model file: {model_path}")
        model = deserialize_model(model_path.read_bytes())
        if model.feature_names != X_te.column_names:
            raise ConfigError(
                f"{model_path}: model was trained on columns {model.feature_names}, "
                f"task uses {X_te.column_names}"
            )
        y_pred = predict(model, X_te_s).values
        result = evaluate_metrics(y_te.values, y_pred)
        comparison_rows.append((name, _fmt(result.mse), _fmt(result.rmse), _fmt(result.r2)))
        _write_csv(
            out / f"scatter_{name}.csv",
            ("actual", "predicted"),
            ((_fmt(a), _fmt(p)) for a, p in zip(y_te.values, y_pred)),
        )
        hist = error_histogram(y_te.values, y_pred, n_bins=n_bins)
        _write_csv(
            out / f"error_hist_{name}.csv",
            ("bin_left", "bin_right", "count"),
            (
                (_fmt(left), _fmt(right), int(count))
                for left, right, count in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts)
            ),
        )
        print(f"{name}: mse={result.mse:.6g} rmse={result.rmse:.6g} r2={result.r2:.6g}")
    _write_csv(out / "comparison.csv", ("model", "mse", "rmse", "r2"), comparison_rows)
    print(f"evaluated {len(names)} model(s) on {X_te.n_rows} test rows; wrote {out}")
    return EXIT_OK


def cmd_importance(args) -> int:
    model_path = Path(args.model)
    if not model_path.exists():
        raise FileNotFoundError(f"missing model file: {model_path}")
    model = deserialize_model(model_path.read_bytes())
    report = gain_importance(model)
    name = model_cli_name(model)
    if not report.has_splits:
        log.warning("model %s has no splits; all importance shares are 0", model_path)
        print(f"warning: {name} model has no splits; importance shares are all 0")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"importance_{name}.csv"
    _write_csv(
        path,
        ("feature", "total_gain", "share"),
        ((e.name, _fmt(e.total_gain), _fmt(e.share)) for e in report.ranked()),
    )
    for entry in report.ranked():
        print(f"{entry.name}: share={entry.share:.4f} total_gain={entry.total_gain:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out)
    comparison = out / "comparison.csv"
    if not comparison.exists():
        raise FileNotFoundError(f"missing evaluate output: {comparison}")
    with open(comparison, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]

    expected = []
    for name, *_ in data:
        expected.append(out / f"scatter_{name}.csv")
        expected.append(out / f"error_hist_{name}.csv")
    missing = [str(p) for p in expected if not p.exists()]
    if missing:
        raise FileNotFoundError("missing evaluate output(s): " + ", ".join(missing))

    lines = ["# Pipeline report", "", "## Model comparison", ""]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    for row in data:
        lines.append("| " + " | ".join(row) + " |")

    importance_files = sorted(out.glob("importance_*.csv"))
    if importance_files:
        lines += ["", "## Feature importance", ""]
        for path in importance_files:
            with open(path, encoding="utf-8", newline="") as fh:
                irows = list(csv.reader(fh))
            lines.append(f"### {path.stem.removeprefix('importance_')}")
            lines.append("")
            lines.append("| " + " | ".join(irows[0]) + " |")
            lines.append("|" + "---|" * len(irows[0]))
            for row in irows[1:]:
                lines.append("| " + " | ".join(row) + " |")
            lines.append("")

    lines += ["", "## Prediction artifacts", ""]
    for name, *_ in data:
        lines.append(f"- scatter_{name}.csv")
        lines.append(f"- error_hist_{name}.csv")
    lines.append("")
    (out / "report.md").write_text("\n".join(lines), encoding="utf-8")
    print(f"wrote {out / 'report.md'}")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ranpredict",
        description="Telemetry KPI prediction pipeline: synth, train, evaluate, importance, report.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--seed", type=int, help="PRNG seed (overrides config)")

    p = sub.add_parser("synth", parents=[common], help="generate synthetic telemetry CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--n", type=int, help="number of samples (overrides config n_samples)")
    p.set_defaults(func=cmd_synth)

    run = argparse.ArgumentParser(add_help=False, parents=[common])
    run.add_argument("--task", choices=("brate", "snr"), help="prediction target")
    run.add_argument("--models", help="comma list from: " + ", ".join(MODEL_NAMES))
    run.add_argument("--train-fraction", dest="train_fraction", type=float)
    run.add_argument("--temporal", action="store_true",
                     help="split by record order instead of shuffling")

    p = sub.add_parser("train", parents=[run], help="train models and write model/scaler files")
    p.add_argument("--input", required=True, nargs="+", help="telemetry CSV path(s)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[run], help="evaluate trained models on the test split")
    p.add_argument("--input", required=True, nargs="+", help="telemetry CSV path(s)")
    p.add_argument("--out", required=True, help="output directory for evaluation artifacts")
    p.add_argument("--model-dir", dest="model_dir", help="directory with model files (default: --out)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", help="gain-based feature importance of a model file")
    p.add_argument("--model", required=True, help="path to a model_*.json file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("report", help="assemble a Markdown report from evaluate outputs")
    p.add_argument("--out", required=True, help="directory holding evaluate outputs")
    p.set_defaults(func=cmd_report)
    return parser


def _setup_logging() -> None:
    level_name = os.environ.get("RANPREDICT_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnsupportedModelError, ValueError) as exc:
        log.error("%s: %s", args.command, exc)
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CsvSchemaError, ModelDecodeError) as exc:
        log.error("%s: %s", args.command, exc)
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        log.error("%s: %s", args.command, exc)
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return EXIT_IO


def console_main() -> None:
    raise SystemExit(main())
