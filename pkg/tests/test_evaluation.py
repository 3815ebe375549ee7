import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crosscast import phase, synthetic
from crosscast.evaluation import compare_models, curve_metrics, format_table, match_events
from crosscast.phase import CrossEvent


def test_identity():
    a = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    m = curve_metrics(a, a)
    assert (m.rmse, m.pearson_r, m.slope_agreement) == (0.0, 1.0, 1.0)


def test_constant_offset():
    a = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    m = curve_metrics(a, a + 100)
    assert m.rmse == pytest.approx(100, rel=1e-12)
    assert m.pearson_r == pytest.approx(1.0, abs=1e-12)
    assert m.slope_agreement == 1.0


def test_negated_zero_mean():
    a = np.array([-3.0, -1.0, 1.0, 3.0])
    # cov = -sum(a^2) = -20, var_a = var_p = 20 -> r = -1
    assert curve_metrics(a, -a).pearson_r == pytest.approx(-1.0, abs=1e-15)


def test_constant_curve_has_no_correlation():
    m = curve_metrics(np.full(5, 2.0), np.arange(5.0))
    assert m.pearson_r is None and m.rmse > 0 and m.slope_agreement == 0.0


def test_nan_days_are_skipped():
    a = np.array([np.nan, 1.0, 2.0, 3.0])
    p = np.array([0.0, np.nan, 2.0, 4.0])
    m = curve_metrics(a, p)
    assert m.n_points == 2 and m.slope_agreement == 1.0
    with pytest.raises(ValueError):
        curve_metrics(np.array([np.nan]), np.array([1.0]))


curves = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).normal(size=(2, 40)).cumsum(axis=1))


@settings(max_examples=50, deadline=None)
@given(curves, st.floats(-1e3, 1e3))
def test_properties(pair, c):
    a, b = pair
    ab, ba = curve_metrics(a, b), curve_metrics(b, a)
    assert ab.rmse == pytest.approx(ba.rmse, rel=1e-12)
    assert abs(ab.pearson_r) == pytest.approx(abs(ba.pearson_r), rel=1e-12)
    assert curve_metrics(a + c, b).slope_agreement == ab.slope_agreement or np.any(np.diff(a + c) == 0)
    h1, h2 = curve_metrics(a[:15], b[:15]), curve_metrics(a[15:], b[15:])
    assert ab.rmse ** 2 == pytest.approx((15 * h1.rmse ** 2 + 25 * h2.rmse ** 2) / 40, rel=1e-10)


def _ev(day, kind):
    return CrossEvent(day, dt.date(2020, 1, 1) + dt.timedelta(days=day), kind, 0.0, 0.0)


def test_match_events():
    offsets, misses = match_events([_ev(10, "golden"), _ev(80, "death")],
                                   [_ev(14, "golden"), _ev(40, "death"), _ev(200, "golden")])
    assert offsets == [4] and misses == 3


def _report(closes, forecast):
    h = synthetic.candles_from_closes(closes)
    return phase.build_report(h, forecast)


@pytest.fixture(scope="module")
def reports():
    closes = synthetic.regime_closes(400, seed=5)
    truth = synthetic.regime_closes(421, seed=5)
    h = synthetic.candles_from_closes(closes)
    actual = phase.report_for(phase.SplicedSeries(
        phase.splice(h, np.concatenate([[0.0], truth[400:]])).dates, truth, ["actual"] * 421))
    good = phase.build_report(h, np.concatenate([[0.0], truth[400:] * 1.001]))
    bad = phase.build_report(h, np.concatenate([[0.0], truth[400:][::-1] * 1.2]))
    return actual, good, bad


def test_dominance(reports):
    actual, good, bad = reports
    s = compare_models(bad, good, actual)
    assert s["verdict"] == "lstm"
    assert {w for w in s["winners"].values()} <= {"lstm", "n/a", "tie"}
    assert "lstm" in format_table(s)


def test_identical_reports_tie(reports):
    actual, good, _ = reports
    assert compare_models(good, good, actual)["verdict"] == "tie"


def test_mixed_verdict(reports):
    actual, _, _ = reports
    h_closes = actual.series.closes[:400]
    truth = actual.series.closes[400:]
    h = synthetic.candles_from_closes(h_closes)
    # A: close in level but zig-zags (slopes disagree); B: right shape, shifted far away
    zigzag = truth + np.where(np.arange(21) % 2, 3.0, -3.0)
    a = phase.build_report(h, np.concatenate([[0.0], zigzag]))
    b = phase.build_report(h, np.concatenate([[0.0], truth + 40.0]))
    s = compare_models(a, b, actual)
    assert s["winners"]["sma50.rmse"] == "mlr"
    assert s["winners"]["sma50.slope_agreement"] == "lstm"
    assert s["verdict"] == "mixed"


def test_date_mismatch(reports):
    actual, good, _ = reports
    other = _report(synthetic.regime_closes(300, seed=1), np.ones(22))
    with pytest.raises(ValueError, match="date range"):
        compare_models(other, good, actual)
