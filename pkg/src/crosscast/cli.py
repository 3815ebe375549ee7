"""``crosscast`` command line.

    crosscast ingest --in prices.csv [--gap-policy reject|fill]
    crosscast features
    crosscast train --model mlr|lstm|both [--epochs N --seed N --hidden N --window N --features a,b,c]
    crosscast predict [--date YYYY-MM-DD]
    crosscast detect
    crosscast evaluate

All subcommands share ``--workdir`` (artifact directory) and ``--config`` (a
``key = value`` file; command-line flags take precedence). Seed resolution:
``--seed``, then the config file, then ``$CROSSCAST_SEED``, then 0.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import datetime as dt
import json
import logging
import sys
from pathlib import Path

from . import pipeline
from .dataset import FEATURE_COLUMNS
from .indicators import IndicatorConfig
from .lstm import TrainConfig
from .phase import PhaseConfig

# config-file keys, grouped by the dataclass they feed
RUN_KEYS = {"workdir": Path, "input": Path, "gap_policy": str, "model": str, "features": str,
            "train_fraction": float, "ridge": float, "date": dt.date.fromisoformat}
TRAIN_KEYS = {"epochs": int, "seed": int, "hidden": int, "window": int, "learning_rate": float,
              "batch_size": int, "gradient_clip": float}
TRAIN_FIELD = {"hidden": "hidden_size", "window": "window_length"}
INDICATOR_KEYS = {f.name: f.type for f in dataclasses.fields(IndicatorConfig)}
PHASE_KEYS = {"short_window": int, "long_window": int}


def read_config(path: Path) -> dict[str, str]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    text = Path(path).read_text(encoding="utf-8")
    parser.read_string("[crosscast]\n" + text)
    values = dict(parser["crosscast"])
    known = set(RUN_KEYS) | set(TRAIN_KEYS) | set(INDICATOR_KEYS) | set(PHASE_KEYS)
    unknown = sorted(set(values) - known)
    if unknown:
        raise pipeline.PipelineError(f"{path}: unknown config key(s): {', '.join(unknown)}")
    return values


def _convert(key: str, raw, kind):
    if kind in ("int", int):
        return int(raw)
    if kind in ("float", float):
        return float(raw)
    try:
        return kind(raw)
    except (TypeError, ValueError) as err:
        raise pipeline.PipelineError(f"bad value for {key}: {raw!r} ({err})") from None


def build_config(args: argparse.Namespace) -> pipeline.RunConfig:
    file_values = read_config(args.config) if getattr(args, "config", None) else {}
    flags = {k: v for k, v in vars(args).items() if v is not None}
    flags.pop("command", None)
    flags.pop("config", None)
    flags.pop("verbose", None)
    if "in_path" in flags:
        flags["input"] = flags.pop("in_path")
    merged = {**file_values, **flags}

    def pick(keys):
        out = {}
        for key, kind in keys.items():
            if key in merged:
                try:
                    out[key] = _convert(key, merged[key], kind)
                except ValueError as err:
                    raise pipeline.PipelineError(f"bad value for {key}: {merged[key]!r}") from err
        return out

    run = pick(RUN_KEYS)
    if "features" in run:
        run["features"] = tuple(f.strip() for f in run["features"].split(",") if f.strip())
    train = {TRAIN_FIELD.get(k, k): v for k, v in pick(TRAIN_KEYS).items()}
    train.setdefault("seed", pipeline.default_seed())
    try:
        return pipeline.RunConfig(
            **run,
            indicators=IndicatorConfig(**pick(INDICATOR_KEYS)),
            training=TrainConfig(**train),
            phase=PhaseConfig(**pick(PHASE_KEYS)),
        )
    except (TypeError, ValueError) as err:
        raise pipeline.PipelineError(f"invalid configuration: {err}") from None


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workdir", type=Path, help="artifact directory (default: crosscast_run)")
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="crosscast",
                                     description="Forecast closes and detect 50/200-day crosses ahead of time.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="validate an OHLCV CSV into the workdir")
    p.add_argument("--in", dest="in_path", type=Path, help="input CSV (date,open,high,low,close,volume)")
    p.add_argument("--gap-policy", dest="gap_policy", choices=["reject", "fill"])

    p = sub.add_parser("features", parents=[common], help="write indicator and dataset CSVs")
    p.add_argument("--features", help="comma-separated feature columns")

    p = sub.add_parser("train", parents=[common], help="fit the regression bank and/or the LSTM")
    p.add_argument("--model", choices=["mlr", "lstm", "both"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--hidden", type=int, help="LSTM units (default 7)")
    p.add_argument("--window", type=int, help="days of context per LSTM sample")
    p.add_argument("--features", help=f"comma-separated subset of: {','.join(FEATURE_COLUMNS)}")
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--ridge", type=float, help="ridge penalty for the regression bank (extension; default 0)")

    p = sub.add_parser("predict", parents=[common], help="forecast 22 closes from one anchor day")
    p.add_argument("--date", help="anchor day (default: last candle)")
    p.add_argument("--model", choices=["mlr", "lstm", "both"])

    sub.add_parser("detect", parents=[common], help="splice forecasts and report crosses")
    sub.add_parser("evaluate", parents=[common], help="compare predicted and actual MA curves")
    return parser


def run(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "ingest":
            series = pipeline.ingest(cfg)
            print(f"{len(series)} candles, {series.fills} filled -> {cfg.workdir / 'candles.csv'}")
        elif args.command == "features":
            data = pipeline.features(cfg)
            print(f"{len(data)} dataset rows x {data.X.shape[1]} features -> {cfg.workdir / 'dataset.csv'}")
        elif args.command == "train":
            for name, path in pipeline.train(cfg).items():
                print(f"{name} -> {path}")
        elif args.command == "predict":
            fc = pipeline.predict(cfg)
            for name, closes in fc["models"].items():
                print(f"{name}: {fc['anchor_date']} +21d close {closes[-1]:.6g}")
        elif args.command == "detect":
            for name, rep in pipeline.detect(cfg).items():
                last = next((lab for lab in reversed(rep.labels) if lab), None)
                adv = ", ".join(f"{e.kind}@{e.date}" for e in rep.advance_events) or "none"
                print(f"{name}: {len(rep.events)} crosses, advance: {adv}, final phase: {last}")
        elif args.command == "evaluate":
            print(pipeline.evaluate(cfg)["table"])
    except (pipeline.PipelineError, ValueError, OSError, json.JSONDecodeError, KeyError) as err:
        print(f"crosscast: error: {err}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
