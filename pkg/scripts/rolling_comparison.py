"""Train both models once, then forecast from many anchor days in the test
period and compare the projected 50/200-day MAs against the realised ones.

Writes per-anchor metrics (CSV) and a plot-ready series of actual vs. predicted
MAs for the last anchor, and prints the mean of every metric per model.

    python scripts/rolling_comparison.py prices.csv --epochs 2000 --out results/
"""
from __future__ import annotations

import argparse
import csv
import logging
from pathlib import Path

import numpy as np

from crosscast import dataset as D
from crosscast import lstm, mlr, phase
from crosscast.evaluation import METRICS, compare_reports
from crosscast.ingest import load_csv, validate_series
from crosscast.lstm import TrainConfig


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("csv", type=Path)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden", type=int, default=7)
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--step", type=int, default=7, help="days between anchors")
    p.add_argument("--out", type=Path, default=Path("results"))
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    series = validate_series(load_csv(args.csv), "fill")
    table = D.build_features(series)
    data = D.attach_targets(table)
    train, _ = D.chrono_split(data)
    scaler = D.fit_scaler(train)
    scaled_train = D.apply_scaler(train, scaler)

    bank = mlr.fit_bank(scaled_train)
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed, hidden_size=args.hidden, window_length=args.window)
    params, history = lstm.train(scaled_train, cfg)

    X = scaler.transform_X(table.matrix())
    row_of = {d: k for k, d in enumerate(table.dates)}
    anchors = [d for d in data.dates[len(train):] if row_of[d] >= cfg.window_length - 1]
    anchors = [d for d in anchors[::args.step] if series.dates.index(d) >= 199]

    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    last = None
    for anchor in anchors:
        k = row_of[anchor]
        forecasts = {
            "mlr": scaler.inverse_Y(mlr.predict_bank(bank, X[k:k + 1])[0]),
            "lstm": scaler.inverse_Y(lstm.forward(params, X[k - cfg.window_length + 1:k + 1])[0]),
        }
        history_part = series.until(anchor)
        truth = series.candles[:len(history_part) + 21]
        truth_series = phase.SplicedSeries([c.date for c in truth], np.array([c.close for c in truth]),
                                           [phase.ACTUAL] * len(truth))
        actual = phase.report_for(truth_series)
        reports = {m: phase.build_report(history_part, f) for m, f in forecasts.items()}
        summary = compare_reports(reports, actual)
        for window, per_model in summary["metrics"].items():
            for model, metrics in per_model.items():
                rows.append({"anchor": anchor.isoformat(), "curve": window, "model": model,
                             **{m: metrics[m] for m in METRICS}})
        last = (actual, reports)

    with open(args.out / "rolling_metrics.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["anchor", "curve", "model", *METRICS])
        writer.writeheader()
        writer.writerows(rows)
    with open(args.out / "loss_history.csv", "w") as fh:
        fh.write("epoch,loss\n" + "".join(f"{e},{v!r}\n" for e, v in enumerate(history, 1)))
    if last:
        actual, reports = last
        with open(args.out / "last_anchor_curves.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["date", "actual_sma50", "actual_sma200", *(f"{m}_sma{n}" for m in reports for n in (50, 200))])
            for i, d in enumerate(actual.series.dates):
                w.writerow([d.isoformat(), actual.sma_short[i], actual.sma_long[i],
                            *(v for m in reports for v in (reports[m].sma_short[i], reports[m].sma_long[i]))])

    print(f"{len(anchors)} anchors; mean metrics over the 21 forecast days:")
    for curve in ("sma50", "sma200"):
        for model in ("mlr", "lstm"):
            sel = [r for r in rows if r["curve"] == curve and r["model"] == model]
            parts = []
            for m in METRICS:
                vals = [r[m] for r in sel if r[m] is not None]
                parts.append(f"{m}={np.mean(vals):.4g}" if vals else f"{m}=-")
            print(f"  {curve:<7} {model:<5} " + " ".join(parts))


if __name__ == "__main__":
    main()
