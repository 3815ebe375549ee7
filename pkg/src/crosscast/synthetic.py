"""Deterministic candle generators for fixtures and experiments."""
from __future__ import annotations

import datetime as dt

import numpy as np

from .ingest import Candle, CandleSeries


def candles_from_closes(closes, start=dt.date(2012, 1, 1), volume=None, spread=0.01,
                        seed: int = 0) -> CandleSeries:
    """Wrap a close path into valid candles.

    open = previous close; high/low pad the body by a random fraction up to
    ``spread`` (random so that high/low are not an exact linear function of
    open/close, which would make the regression design rank-deficient).
    """
    closes = np.asarray(closes, dtype=float)
    rng = np.random.default_rng(seed)
    k = np.arange(len(closes))
    if volume is None:
        volume = 1000.0 + 100.0 * np.cos(2 * np.pi * k / 45.0) + rng.uniform(0, 50, len(closes))
    up = rng.uniform(0, spread, len(closes))
    down = rng.uniform(0, spread, len(closes))
    out = []
    for k, c in enumerate(closes):
        o = closes[k - 1] if k else c
        out.append(Candle(start + dt.timedelta(days=k), float(o), float(max(o, c) * (1 + up[k])),
                          float(min(o, c) * (1 - down[k])), float(c), float(volume[k])))
    return CandleSeries(tuple(out))


def sine_closes(n: int = 500, level: float = 100.0, amplitude: float = 30.0, period: float = 60.0):
    t = np.arange(n)
    return level + amplitude * np.sin(2 * np.pi * t / period)


def random_walk_closes(n: int, seed: int = 0, start: float = 100.0, vol: float = 0.02):
    rng = np.random.default_rng(seed)
    return start * np.exp(np.cumsum(rng.normal(0.0, vol, size=n)))


def regime_closes(n: int = 900, seed: int = 0):
    """Random walk with slow bull/bear drift swings, so 50/200-day crosses occur."""
    rng = np.random.default_rng(seed)
    drift = 0.004 * np.sin(2 * np.pi * np.arange(n) / 360.0)
    return 100.0 * np.exp(np.cumsum(drift + rng.normal(0.0, 0.012, size=n)))
