import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from crosscast import indicators as ind
from crosscast.indicators import IndicatorConfig


def assert_matches(got, want, atol=1e-9):
    got = np.asarray(got)
    want = np.asarray(want, dtype=float)
    np.testing.assert_array_equal(np.isnan(got), np.isnan(want))
    mask = ~np.isnan(want)
    np.testing.assert_allclose(got[mask], want[mask], rtol=0, atol=atol)


def first_defined(values):
    return int(np.flatnonzero(~np.isnan(values))[0])


def walk(n, seed):
    rng = np.random.default_rng(seed)
    return 100 * np.exp(np.cumsum(rng.normal(0, 0.03, n)))


def test_sma_small():
    assert_matches(ind.sma([1, 2, 3, 4, 5], 3), [math.nan, math.nan, 2, 3, 4])


def test_sma_window_longer_than_series():
    assert np.isnan(ind.sma([1, 2], 3)).all()


@pytest.mark.parametrize("n", [1, 7, 50])
def test_sma_constant(n):
    out = ind.sma(np.full(80, 3.5), n)
    assert_matches(out[n - 1:], np.full(81 - n, 3.5), atol=0)


def test_sma_random_vs_oracle():
    x = walk(500, 1)
    assert_matches(ind.sma(x, 50), oracles.sma(list(x), 50))


def test_ema_hand_unrolled():
    assert_matches(ind.ema([1, 1, 1, 2], 2), [math.nan, 1, 1, 5 / 3], atol=1e-15)


def test_ema_constant_and_unit_window():
    assert_matches(ind.ema(np.full(30, 2.0), 9)[8:], np.full(22, 2.0), atol=1e-15)
    x = walk(40, 2)
    assert_matches(ind.ema(x, 1), x, atol=0)


def test_rsi_monotone_series():
    up = np.arange(1.0, 60.0)
    assert set(ind.rsi(up, 14)[14:]) == {100.0}
    assert set(ind.rsi(up[::-1], 14)[14:]) == {0.0}


def test_rsi_alternating_tends_to_fifty():
    x = 100 + np.array([0.0, 1.0] * 300)
    out = ind.rsi(x, 100)
    assert_matches(out, oracles.rsi(list(x), 100))
    assert abs(out[-1] - 50) < 0.5


def test_rsi_too_short():
    assert np.isnan(ind.rsi([1, 2, 3], 3)).all()


def test_macd_constant():
    line, sig, hist = ind.macd(np.full(60, 7.0))
    for arr in (line, sig, hist):
        assert np.allclose(arr[~np.isnan(arr)], 0, atol=1e-12)


def test_macd_ramp_converges_to_lag_difference():
    # steady-state EMA lag on a unit ramp is (n-1)/2, so the line tends to (26-12)/2 = 7
    x = np.arange(400.0)
    line, _, _ = ind.macd(x, 12, 26, 9)
    assert_matches(line, oracles.macd(list(x), 12, 26, 9)[0])
    assert abs(line[-1] - 7.0) < 1e-9
    assert np.all(line[25:] > 0)


def test_macd_random_vs_oracle():
    x = walk(300, 3)
    for got, want in zip(ind.macd(x, 12, 26, 9), oracles.macd(list(x), 12, 26, 9)):
        assert_matches(got, want)


def test_macd_requires_fast_below_slow():
    with pytest.raises(ValueError):
        ind.macd(np.ones(50), 26, 12, 9)


def test_momentum():
    assert_matches(ind.momentum([1, 2, 4, 7], 2), [math.nan, math.nan, 3, 5])
    assert np.all(ind.momentum(np.full(20, 4.0), 5)[5:] == 0)
    with pytest.raises(ValueError):
        ind.momentum([1, 2, 3], 0)


def test_bollinger_examples():
    mid, up, lo = ind.bollinger([1, 3], 2, 2)
    assert (mid[1], up[1], lo[1]) == (2.0, 4.0, 0.0)
    mid, up, lo = ind.bollinger(np.full(30, 5.0), 20, 2)
    assert np.all(up[19:] == 5.0) and np.all(lo[19:] == 5.0) and np.all(mid[19:] == 5.0)


def test_bollinger_random_vs_oracle():
    x = walk(400, 4)
    for got, want in zip(ind.bollinger(x, 20, 2.0), oracles.bollinger(list(x), 20, 2.0)):
        assert_matches(got, want)


def test_roc_examples():
    assert ind.roc([10, 15, 20], 2)[2] == 100.0
    assert_matches(ind.roc([10, 10, 5], 2), [math.nan, math.nan, -50])
    assert np.all(ind.roc(np.full(15, 3.0), 10)[10:] == 0)


def test_config_validation():
    with pytest.raises(ValueError):
        IndicatorConfig(macd_fast=26, macd_slow=12)
    with pytest.raises(ValueError):
        IndicatorConfig(bb_k=0)
    with pytest.raises(ValueError):
        IndicatorConfig(rsi_period=0)
    with pytest.raises(ValueError):
        IndicatorConfig(sma_short=200, sma_long=50)


def test_warmup_lengths_match_first_defined_index():
    x = walk(400, 5)
    cfg = IndicatorConfig()
    cols = ind.compute_all(x, x, x, x, x, cfg)
    for name, warm in cfg.warmup_lengths().items():
        assert first_defined(cols[name]) == warm - 1, name


series = st.lists(st.floats(1.0, 1e4), min_size=60, max_size=120).map(np.array)


@settings(max_examples=40, deadline=None)
@given(series, st.integers(1, 20))
def test_shift_equivariance(x, cut):
    cfg = IndicatorConfig(sma_short=5, sma_long=10)
    whole = ind.compute_all(x, x, x, x, x, cfg)
    part = ind.compute_all(x[cut:], x[cut:], x[cut:], x[cut:], x[cut:], cfg)
    for name in ("sma_short", "sma_long", "momentum", "roc", "bb_upper", "bb_lower"):
        w, p = whole[name][cut:], part[name]
        both = ~np.isnan(p)
        np.testing.assert_allclose(p[both], w[both], rtol=1e-9, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(series)
def test_bounds_and_identities(x):
    r = ind.rsi(x, 14)
    defined = r[~np.isnan(r)]
    assert np.all((defined >= 0) & (defined <= 100))
    mid, up, lo = ind.bollinger(x, 20, 2.0)
    ok = ~np.isnan(mid)
    assert np.all(up[ok] >= mid[ok]) and np.all(mid[ok] >= lo[ok])
    assert np.array_equal(mid, ind.sma(x, 20), equal_nan=True)
    line, sig, hist = ind.macd(x)
    both = ~np.isnan(hist)
    assert np.array_equal(hist[both], (line - sig)[both])
