"""Quantitative comparison of predicted vs. actual moving-average curves."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .phase import PREDICTED, CrossEvent, PhaseReport

MATCH_WINDOW_DAYS = 30
# metric -> True when larger is better
METRICS = {"rmse": False, "pearson_r": True, "slope_agreement": True, "cross_timing_abs": False}


@dataclass(frozen=True)
class CurveMetrics:
    rmse: float
    pearson_r: float | None
    slope_agreement: float | None
    n_points: int
    cross_timing_error: list[int] | None = None
    cross_misses: int = 0

    @property
    def cross_timing_abs(self) -> float | None:
        if not self.cross_timing_error:
            return None
        return float(np.mean(np.abs(self.cross_timing_error)))

    def to_json(self) -> dict:
        out = asdict(self)
        out["cross_timing_abs"] = self.cross_timing_abs
        return out


def match_events(actual: list[CrossEvent], predicted: list[CrossEvent],
                 max_days: int = MATCH_WINDOW_DAYS) -> tuple[list[int], int]:
    """Greedy same-kind nearest-date matching; returns (signed offsets, unmatched count)."""
    free = list(actual)
    offsets = []
    unmatched = 0
    for ev in predicted:
        best = None
        for cand in free:
            if cand.kind != ev.kind:
                continue
            gap = (ev.date - cand.date).days
            if abs(gap) <= max_days and (best is None or abs(gap) < abs(best[1])):
                best = (cand, gap)
        if best is None:
            unmatched += 1
        else:
            free.remove(best[0])
            offsets.append(best[1])
    return offsets, unmatched + len(free)


def curve_metrics(actual_ma, predicted_ma, actual_events=None, predicted_events=None) -> CurveMetrics:
    """RMSE, Pearson r and day-over-day slope-sign agreement over jointly defined days.

    Correlation is ``None`` when either curve is constant on the shared days;
    slope agreement is ``None`` when no two consecutive days are shared.
    """
    a = np.asarray(actual_ma, dtype=float)
    p = np.asarray(predicted_ma, dtype=float)
    if a.shape != p.shape:
        raise ValueError("curves must be aligned")
    shared = ~(np.isnan(a) | np.isnan(p))
    if not shared.any():
        raise ValueError("curves share no defined points")
    da, dp = a[shared], p[shared]
    rmse = float(np.sqrt(np.mean((da - dp) ** 2)))

    r = None
    if len(da) >= 2 and np.ptp(da) > 0 and np.ptp(dp) > 0:
        ca, cp = da - da.mean(), dp - dp.mean()
        r = float(np.clip(ca @ cp / np.sqrt((ca @ ca) * (cp @ cp)), -1.0, 1.0))

    pairs = shared[1:] & shared[:-1]
    slope = None
    if pairs.any():
        sa = np.sign(np.diff(a))[pairs]
        sp = np.sign(np.diff(p))[pairs]
        slope = float(np.mean(sa == sp))

    timing, misses = None, 0
    if actual_events is not None and predicted_events is not None and (actual_events or predicted_events):
        timing, misses = match_events(actual_events, predicted_events)
    return CurveMetrics(rmse, r, slope, int(shared.sum()), timing, misses)


def _region_mask(report: PhaseReport, region: str) -> np.ndarray:
    if region == "all":
        return np.ones(len(report.series), dtype=bool)
    if region == "predicted":
        return np.array([p == PREDICTED for p in report.series.provenance])
    raise ValueError(f"unknown region {region!r}")


def _winner(values: dict[str, float | None], larger_better: bool, rtol: float = 1e-12) -> str:
    known = {k: v for k, v in values.items() if v is not None}
    if len(known) < len(values):
        return "n/a"
    ordered = sorted(known.items(), key=lambda kv: kv[1], reverse=larger_better)
    best, runner = ordered[0], ordered[1]
    if abs(best[1] - runner[1]) <= rtol * max(1.0, abs(best[1]), abs(runner[1])):
        return "tie"
    return best[0]


def compare_reports(models: dict[str, PhaseReport], actual: PhaseReport,
                    region: str = "predicted") -> dict:
    """Per-window curve metrics for each model plus a per-metric winner.

    ``region="predicted"`` restricts the comparison to forecast days (history is
    shared by construction); ``"all"`` uses every day. The overall verdict names a
    model only when it wins or ties every metric; otherwise it is ``"mixed"``.
    With a single model there is nothing to rank and the verdict is ``"n/a"``.
    """
    if not models:
        raise ValueError("no model reports to compare")
    for name, rep in models.items():
        if rep.series.dates != actual.series.dates:
            raise ValueError(f"{name} report covers a different date range than the actual report")
    mask = np.ones(len(actual.series), dtype=bool)
    for rep in models.values():
        mask &= _region_mask(rep, region)
    if not mask.any():
        mask[:] = True

    def in_region(evs):
        return [e for e in evs if mask[e.index]]

    table = {}
    for window, attr in ((actual.short_window, "sma_short"), (actual.long_window, "sma_long")):
        act = np.where(mask, getattr(actual, attr), np.nan)
        table[f"sma{window}"] = {
            name: curve_metrics(act, np.where(mask, getattr(rep, attr), np.nan),
                                in_region(actual.events), in_region(rep.events))
            for name, rep in models.items()
        }

    winners = {}
    if len(models) > 1:
        for window, per_model in table.items():
            for metric, larger in METRICS.items():
                winners[f"{window}.{metric}"] = _winner(
                    {n: getattr(m, metric) for n, m in per_model.items()}, larger)
    decided = {w for w in winners.values() if w != "n/a"}
    if len(models) < 2:
        verdict = "n/a"
    elif not decided or decided == {"tie"}:
        verdict = "tie"
    elif len(decided - {"tie"}) == 1:
        verdict = (decided - {"tie"}).pop()
    else:
        verdict = "mixed"
    return {
        "region": region,
        "models": list(models),
        "metrics": {w: {n: m.to_json() for n, m in pm.items()} for w, pm in table.items()},
        "winners": winners,
        "verdict": verdict,
    }


def compare_models(mlr_report: PhaseReport, lstm_report: PhaseReport, actual: PhaseReport,
                   region: str = "predicted") -> dict:
    return compare_reports({"mlr": mlr_report, "lstm": lstm_report}, actual, region)


def format_table(summary: dict) -> str:
    names = summary["models"]
    lines = [f"{'curve':<8} {'metric':<17} " + " ".join(f"{n:>12}" for n in names) + "  winner"]
    for window, per_model in summary["metrics"].items():
        for metric in METRICS:
            cells = []
            for name in names:
                v = per_model[name][metric]
                cells.append("-" if v is None else f"{v:.6g}")
            winner = summary["winners"].get(f"{window}.{metric}", "-")
            lines.append(f"{window:<8} {metric:<17} " + " ".join(f"{c:>12}" for c in cells)
                         + f"  {winner}")
    lines.append(f"verdict: {summary['verdict']}")
    return "\n".join(lines)
