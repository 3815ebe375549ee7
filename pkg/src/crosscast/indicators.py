"""Batch technical indicators over a close-price series.

Every function returns a float array aligned 1:1 with its input; cells inside
the warmup prefix are NaN. ``warmup_lengths`` gives, per output column, the
number of leading samples needed before the first defined value (so the first
defined index is ``warmup - 1``).
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


@dataclass(frozen=True)
class IndicatorConfig:
    sma_short: int = 50
    sma_long: int = 200
    rsi_period: int = 14
    macd_fast: int = 12
    macd_slow: int = 26
    macd_signal: int = 9
    momentum_period: int = 10
    bb_period: int = 20
    bb_k: float = 2.0
    roc_period: int = 10

    def __post_init__(self):
        periods = {k: v for k, v in asdict(self).items() if k != "bb_k"}
        for name, value in periods.items():
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value}")
        if self.macd_fast >= self.macd_slow:
            raise ValueError("macd_fast must be < macd_slow")
        if self.sma_short >= self.sma_long:
            raise ValueError("sma_short must be < sma_long")
        if self.bb_k <= 0:
            raise ValueError("bb_k must be > 0")
        if self.bb_period < 2:
            raise ValueError("bb_period must be >= 2")

    def warmup_lengths(self) -> dict[str, int]:
        return {
            "open": 1, "high": 1, "low": 1, "close": 1, "volume": 1,
            "sma_short": self.sma_short,
            "sma_long": self.sma_long,
            "rsi": self.rsi_period + 1,
            "macd_line": self.macd_slow,
            "macd_signal": self.macd_slow + self.macd_signal - 1,
            "macd_hist": self.macd_slow + self.macd_signal - 1,
            "momentum": self.momentum_period + 1,
            "bb_middle": self.bb_period,
            "bb_upper": self.bb_period,
            "bb_lower": self.bb_period,
            "roc": self.roc_period + 1,
        }


def _as_array(closes) -> np.ndarray:
    return np.asarray(closes, dtype=float)


def _check_window(n: int, minimum: int = 1) -> None:
    if int(n) != n or n < minimum:
        raise ValueError(f"window must be an integer >= {minimum}, got {n}")


def sma(closes, n: int) -> np.ndarray:
    _check_window(n)
    x = _as_array(closes)
    out = np.full(x.shape, np.nan)
    if n <= len(x):
        out[n - 1:] = sliding_window_view(x, n).mean(axis=1)
    return out


def ema(closes, n: int) -> np.ndarray:
    """EMA seeded with the SMA of the first ``n`` values, alpha = 2/(n+1)."""
    _check_window(n)
    x = _as_array(closes)
    out = np.full(x.shape, np.nan)
    if n > len(x):
        return out
    alpha = 2.0 / (n + 1)
    prev = x[:n].mean()
    out[n - 1] = prev
    for i in range(n, len(x)):
        prev = alpha * x[i] + (1.0 - alpha) * prev
        out[i] = prev
    return out


def rsi(closes, period: int = 14) -> np.ndarray:
    """Wilder's RSI. First defined at index ``period``."""
    _check_window(period)
    x = _as_array(closes)
    out = np.full(x.shape, np.nan)
    if len(x) < period + 1:
        return out
    delta = np.diff(x)
    gains = np.where(delta > 0, delta, 0.0)
    losses = np.where(delta < 0, -delta, 0.0)
    avg_gain = gains[:period].mean()
    avg_loss = losses[:period].mean()
    out[period] = _rsi_value(avg_gain, avg_loss)
    for i in range(period, len(delta)):
        avg_gain = (avg_gain * (period - 1) + gains[i]) / period
        avg_loss = (avg_loss * (period - 1) + losses[i]) / period
        out[i + 1] = _rsi_value(avg_gain, avg_loss)
    return out


def _rsi_value(avg_gain: float, avg_loss: float) -> float:
    if avg_loss == 0:
        return 100.0
    if avg_gain == 0:
        return 0.0
    return 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)


def macd(closes, fast: int = 12, slow: int = 26, signal: int = 9):
    """Return ``(macd_line, signal_line, histogram)``."""
    _check_window(fast)
    _check_window(slow)
    _check_window(signal)
    if fast >= slow:
        raise ValueError("fast must be < slow")
    x = _as_array(closes)
    line = ema(x, fast) - ema(x, slow)
    sig = np.full(x.shape, np.nan)
    defined = np.flatnonzero(~np.isnan(line))
    if len(defined):
        start = defined[0]
        sig[start:] = ema(line[start:], signal)
    return line, sig, line - sig


def momentum(closes, n: int = 10) -> np.ndarray:
    _check_window(n)
    x = _as_array(closes)
    out = np.full(x.shape, np.nan)
    if n < len(x):
        out[n:] = x[n:] - x[:-n]
    return out


def bollinger(closes, n: int = 20, k: float = 2.0):
    """Return ``(middle, upper, lower)`` using the population standard deviation."""
    _check_window(n, minimum=2)
    if k <= 0:
        raise ValueError("k must be > 0")
    x = _as_array(closes)
    middle = np.full(x.shape, np.nan)
    sigma = np.full(x.shape, np.nan)
    if n <= len(x):
        windows = sliding_window_view(x, n)
        middle[n - 1:] = windows.mean(axis=1)
        sigma[n - 1:] = windows.std(axis=1)
    return middle, middle + k * sigma, middle - k * sigma


def roc(closes, n: int = 10) -> np.ndarray:
    """Percentage rate of change over ``n`` days."""
    _check_window(n)
    x = _as_array(closes)
    out = np.full(x.shape, np.nan)
    if n < len(x):
        out[n:] = 100.0 * (x[n:] - x[:-n]) / x[:-n]
    return out


def compute_all(open_, high, low, close, volume, cfg: IndicatorConfig) -> dict[str, np.ndarray]:
    """Every column known to the feature builder, keyed by name."""
    close = _as_array(close)
    line, sig, hist = macd(close, cfg.macd_fast, cfg.macd_slow, cfg.macd_signal)
    mid, upper, lower = bollinger(close, cfg.bb_period, cfg.bb_k)
    return {
        "open": _as_array(open_),
        "high": _as_array(high),
        "low": _as_array(low),
        "close": close,
        "volume": _as_array(volume),
        "sma_short": sma(close, cfg.sma_short),
        "sma_long": sma(close, cfg.sma_long),
        "rsi": rsi(close, cfg.rsi_period),
        "macd_line": line,
        "macd_signal": sig,
        "macd_hist": hist,
        "momentum": momentum(close, cfg.momentum_period),
        "bb_middle": mid,
        "bb_upper": upper,
        "bb_lower": lower,
        "roc": roc(close, cfg.roc_period),
    }
