"""Slow, independent reference implementations used only by the tests.

Everything here is written with scalar Python loops and ``math`` so that it
shares no code path with the vectorized implementations under test.
"""
import math

NAN = float("nan")


def sma(xs, n):
    out = [NAN] * len(xs)
    for i in range(n - 1, len(xs)):
        out[i] = math.fsum(xs[i - n + 1:i + 1]) / n
    return out


def ema(xs, n):
    out = [NAN] * len(xs)
    if n > len(xs):
        return out
    alpha = 2.0 / (n + 1)
    value = math.fsum(xs[:n]) / n
    out[n - 1] = value
    for i in range(n, len(xs)):
        value = alpha * xs[i] + (1 - alpha) * value
        out[i] = value
    return out


def rsi(xs, period):
    out = [NAN] * len(xs)
    if len(xs) < period + 1:
        return out
    gains, losses = [], []
    for a, b in zip(xs, xs[1:]):
        gains.append(max(b - a, 0.0))
        losses.append(max(a - b, 0.0))
    ag = sum(gains[:period]) / period
    al = sum(losses[:period]) / period

    def value(g, l):
        if l == 0:
            return 100.0
        if g == 0:
            return 0.0
        return 100 - 100 / (1 + g / l)

    out[period] = value(ag, al)
    for k in range(period, len(gains)):
        ag = (ag * (period - 1) + gains[k]) / period
        al = (al * (period - 1) + losses[k]) / period
        out[k + 1] = value(ag, al)
    return out


def macd(xs, fast, slow, signal):
    ef, es = ema(xs, fast), ema(xs, slow)
    line = [a - b for a, b in zip(ef, es)]
    first = next(i for i, v in enumerate(line) if not math.isnan(v)) if any(
        not math.isnan(v) for v in line) else len(line)
    sig = [NAN] * first + ema(line[first:], signal)
    hist = [a - b for a, b in zip(line, sig)]
    return line, sig, hist


def momentum(xs, n):
    return [NAN if i < n else xs[i] - xs[i - n] for i in range(len(xs))]


def roc(xs, n):
    return [NAN if i < n else 100 * (xs[i] - xs[i - n]) / xs[i - n] for i in range(len(xs))]


def bollinger(xs, n, k):
    mid, up, lo = [NAN] * len(xs), [NAN] * len(xs), [NAN] * len(xs)
    for i in range(n - 1, len(xs)):
        w = xs[i - n + 1:i + 1]
        m = math.fsum(w) / n
        sd = math.sqrt(math.fsum((v - m) ** 2 for v in w) / n)
        mid[i], up[i], lo[i] = m, m + k * sd, m - k * sd
    return mid, up, lo


def crosses(short, long_):
    """Brute-force sign scan. For every jointly defined day, find the regime by
    walking back to the nearest day with a strict inequality; an event is a day
    whose regime is nonzero and differs from the previous day's regime."""
    defined = [not (math.isnan(a) or math.isnan(b)) for a, b in zip(short, long_)]

    def regime(d):
        j = d
        while j >= 0 and defined[j]:
            if short[j] > long_[j]:
                return 1
            if short[j] < long_[j]:
                return -1
            j -= 1
        return 0

    events = []
    for d in range(1, len(short)):
        if not (defined[d] and defined[d - 1]):
            continue
        now, before = regime(d), regime(d - 1)
        if now != 0 and now != before:
            events.append((d, "golden" if now > 0 else "death"))
    return events


def _sig(z):
    return 1.0 / (1.0 + math.exp(-z))


def lstm_cell(W, b, x, h, C):
    """Straight-line gate equations. ``W``/``b`` are dicts keyed f, i, c, o of
    nested lists; returns (h, C, f, i, c_tilde, o) as lists."""
    v = list(h) + list(x)
    H = len(h)

    def affine(g, j):
        return sum(W[g][j][k] * v[k] for k in range(len(v))) + b[g][j]

    f = [_sig(affine("f", j)) for j in range(H)]
    i = [_sig(affine("i", j)) for j in range(H)]
    c = [math.tanh(affine("c", j)) for j in range(H)]
    o = [_sig(affine("o", j)) for j in range(H)]
    C_new = [f[j] * C[j] + i[j] * c[j] for j in range(H)]
    h_new = [o[j] * math.tanh(C_new[j]) for j in range(H)]
    return h_new, C_new, f, i, c, o


def central_difference(fn, arr, idx, eps=1e-5):
    old = arr[idx]
    arr[idx] = old + eps
    plus = fn()
    arr[idx] = old - eps
    minus = fn()
    arr[idx] = old
    return (plus - minus) / (2 * eps)
