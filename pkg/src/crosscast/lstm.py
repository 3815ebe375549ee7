"""Single-layer LSTM with a ReLU dense head, trained by BPTT and Adam.

The recurrent cell follows the textbook gate formulation on the concatenation
``[h_{t-1}, x_t]``; the final hidden state feeds a dense 15 -> 31 -> 22 stack
with ReLU on every layer, including the output. All arrays are float64.

Functions accept either a single sample (``window`` of shape ``(T, input)``) or
a batch (``(B, T, input)``); the leading batch axis is carried through.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

log = logging.getLogger(__name__)

GATES = ("f", "i", "c", "o")
PARAM_NAMES = ("W_f", "b_f", "W_i", "b_i", "W_c", "b_c", "W_o", "b_o",
               "W_d1", "b_d1", "W_d2", "b_d2", "W_out", "b_out")


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}: loss={loss}")


@dataclass(frozen=True)
class TrainConfig:
    window_length: int = 30
    hidden_size: int = 7
    epochs: int = 2000
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    gradient_clip: float = 5.0
    dense_sizes: tuple[int, int] = (15, 31)
    output_size: int = 22
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    forget_bias: float = 1.0

    def __post_init__(self):
        for name in ("window_length", "hidden_size", "batch_size", "output_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not self.gradient_clip > 0:
            raise ValueError("gradient_clip must be > 0")


@dataclass
class LstmParams:
    W_f: np.ndarray
    b_f: np.ndarray
    W_i: np.ndarray
    b_i: np.ndarray
    W_c: np.ndarray
    b_c: np.ndarray
    W_o: np.ndarray
    b_o: np.ndarray
    W_d1: np.ndarray
    b_d1: np.ndarray
    W_d2: np.ndarray
    b_d2: np.ndarray
    W_out: np.ndarray
    b_out: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.W_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_f.shape[1] - self.W_f.shape[0]

    def arrays(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "LstmParams":
        return LstmParams(**{k: v.copy() for k, v in self.arrays().items()})

    def zeros_like(self) -> "LstmParams":
        return LstmParams(**{k: np.zeros_like(v) for k, v in self.arrays().items()})

    def check(self) -> None:
        H = self.hidden_size
        for g in GATES:
            W, b = getattr(self, f"W_{g}"), getattr(self, f"b_{g}")
            if W.shape != self.W_f.shape or b.shape != (H,):
                raise ValueError(f"gate {g} has shape {W.shape}/{b.shape}, expected {self.W_f.shape}/({H},)")
        prev = H
        for name in ("d1", "d2", "out"):
            W, b = getattr(self, f"W_{name}"), getattr(self, f"b_{name}")
            if W.shape[1] != prev or b.shape != (W.shape[0],):
                raise ValueError(f"dense layer {name} does not chain: {W.shape} after width {prev}")
            prev = W.shape[0]
        for k, v in self.arrays().items():
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{k} holds non-finite values")

    def to_json(self) -> dict:
        return {k: {"shape": list(v.shape), "data": v.ravel().tolist()}
                for k, v in self.arrays().items()}

    @classmethod
    def from_json(cls, obj: dict) -> "LstmParams":
        p = cls(**{k: np.array(obj[k]["data"], dtype=float).reshape(obj[k]["shape"])
                   for k in PARAM_NAMES})
        p.check()
        return p


class CellState(NamedTuple):
    h: np.ndarray
    C: np.ndarray


class GateRecord(NamedTuple):
    concat: np.ndarray
    f: np.ndarray
    i: np.ndarray
    c_tilde: np.ndarray
    o: np.ndarray
    C_prev: np.ndarray
    tanh_C: np.ndarray


@dataclass
class Tape:
    records: list[GateRecord]
    h_last: np.ndarray
    z1: np.ndarray
    a1: np.ndarray
    z2: np.ndarray
    a2: np.ndarray
    z3: np.ndarray


def init_params(seed: int, input_size: int, cfg: TrainConfig = TrainConfig()) -> LstmParams:
    """Gate weights ~ U(+-1/sqrt(hidden + input)); dense weights He-normal; b_f = forget_bias."""
    if input_size < 1:
        raise ValueError("input_size must be >= 1")
    rng = np.random.default_rng(seed)
    H = cfg.hidden_size
    bound = 1.0 / np.sqrt(H + input_size)
    gates = {}
    for g in GATES:
        gates[f"W_{g}"] = rng.uniform(-bound, bound, size=(H, H + input_size))
        gates[f"b_{g}"] = np.zeros(H)
    gates["b_f"] = np.full(H, float(cfg.forget_bias))
    dense = {}
    prev = H
    for name, width in zip(("d1", "d2", "out"), (*cfg.dense_sizes, cfg.output_size)):
        dense[f"W_{name}"] = rng.normal(0.0, np.sqrt(2.0 / prev), size=(width, prev))
        dense[f"b_{name}"] = np.zeros(width)
        prev = width
    return LstmParams(**gates, **dense)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _stacked(p: LstmParams) -> tuple[np.ndarray, np.ndarray]:
    return (np.concatenate([p.W_f, p.W_i, p.W_c, p.W_o]),
            np.concatenate([p.b_f, p.b_i, p.b_c, p.b_o]))


def _cell(W: np.ndarray, b: np.ndarray, H: int, x_t: np.ndarray, prev: CellState):
    concat = np.concatenate([prev.h, x_t], axis=-1)
    z = concat @ W.T + b
    f = _sigmoid(z[..., :H])
    i = _sigmoid(z[..., H:2 * H])
    c_tilde = np.tanh(z[..., 2 * H:3 * H])
    o = _sigmoid(z[..., 3 * H:])
    C = f * prev.C + i * c_tilde
    tanh_C = np.tanh(C)
    return CellState(o * tanh_C, C), GateRecord(concat, f, i, c_tilde, o, prev.C, tanh_C)


def cell_forward(p: LstmParams, x_t: np.ndarray, prev: CellState) -> tuple[CellState, GateRecord]:
    """One step: forget/input/output gates, candidate, new cell state and output."""
    x_t = np.asarray(x_t, dtype=float)
    if x_t.shape[-1] != p.input_size or prev.h.shape[-1] != p.hidden_size:
        raise ValueError(f"cell expects input {p.input_size} / hidden {p.hidden_size}, "
                         f"got {x_t.shape[-1]} / {prev.h.shape[-1]}")
    if not np.all(np.isfinite(x_t)):
        raise ValueError("non-finite cell input")
    return _cell(*_stacked(p), p.hidden_size, x_t, prev)


def zero_state(p: LstmParams, batch_shape=()) -> CellState:
    shape = (*batch_shape, p.hidden_size)
    return CellState(np.zeros(shape), np.zeros(shape))


def _relu(z):
    return np.maximum(z, 0.0)


def forward(p: LstmParams, window) -> tuple[np.ndarray, Tape]:
    """Run the cell over ``window`` from a zero state, then the dense head."""
    window = np.asarray(window, dtype=float)
    if window.ndim not in (2, 3) or window.shape[-2] < 1:
        raise ValueError("window must have shape (T, input) or (B, T, input) with T >= 1")
    if window.shape[-1] != p.input_size:
        raise ValueError(f"window rows have {window.shape[-1]} features, params expect {p.input_size}")
    if not np.all(np.isfinite(window)):
        raise ValueError("non-finite values in window")
    W, b = _stacked(p)
    H = p.hidden_size
    state = zero_state(p, window.shape[:-2])
    records = []
    for t in range(window.shape[-2]):
        state, rec = _cell(W, b, H, window[..., t, :], state)
        records.append(rec)
    z1 = state.h @ p.W_d1.T + p.b_d1
    a1 = _relu(z1)
    z2 = a1 @ p.W_d2.T + p.b_d2
    a2 = _relu(z2)
    z3 = a2 @ p.W_out.T + p.b_out
    return _relu(z3), Tape(records, state.h, z1, a1, z2, a2, z3)


def _outer(dz: np.ndarray, a: np.ndarray) -> np.ndarray:
    # sums over every leading (batch) axis
    return dz.reshape(-1, dz.shape[-1]).T @ a.reshape(-1, a.shape[-1])


def _bsum(dz: np.ndarray) -> np.ndarray:
    return dz.reshape(-1, dz.shape[-1]).sum(axis=0)


def backward(p: LstmParams, tape: Tape, d_out: np.ndarray) -> LstmParams:
    """Gradients of a scalar loss given ``d_out`` = dLoss/d(output)."""
    g = p.zeros_like()
    dz3 = d_out * (tape.z3 > 0)
    g.W_out = _outer(dz3, tape.a2)
    g.b_out = _bsum(dz3)
    dz2 = (dz3 @ p.W_out) * (tape.z2 > 0)
    g.W_d2 = _outer(dz2, tape.a1)
    g.b_d2 = _bsum(dz2)
    dz1 = (dz2 @ p.W_d2) * (tape.z1 > 0)
    g.W_d1 = _outer(dz1, tape.h_last)
    g.b_d1 = _bsum(dz1)

    H = p.hidden_size
    W, _ = _stacked(p)
    dW = np.zeros_like(W)
    db = np.zeros(4 * H)
    dh = dz1 @ p.W_d1
    dC_next = np.zeros_like(dh)
    for rec in reversed(tape.records):
        d_o = dh * rec.tanh_C
        dC = dC_next + dh * rec.o * (1.0 - rec.tanh_C ** 2)
        dz = np.concatenate([
            dC * rec.C_prev * rec.f * (1.0 - rec.f),
            dC * rec.c_tilde * rec.i * (1.0 - rec.i),
            dC * rec.i * (1.0 - rec.c_tilde ** 2),
            d_o * rec.o * (1.0 - rec.o),
        ], axis=-1)
        dC_next = dC * rec.f
        dW += _outer(dz, rec.concat)
        db += _bsum(dz)
        dh = (dz @ W)[..., :H]
    for k, gate in enumerate(GATES):
        setattr(g, f"W_{gate}", dW[k * H:(k + 1) * H])
        setattr(g, f"b_{gate}", db[k * H:(k + 1) * H])
    return g


def loss_and_gradients(p: LstmParams, windows, targets) -> tuple[float, LstmParams]:
    """Mean squared error over every sample and horizon, with its full BPTT gradient."""
    windows = np.asarray(windows, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if windows.ndim == 2:
        windows, targets = windows[None], targets[None]
    if len(windows) == 0:
        raise ValueError("empty batch")
    out, tape = forward(p, windows)
    resid = out - targets
    loss = float(np.mean(resid ** 2))
    if not np.isfinite(loss):
        raise FloatingPointError("non-finite loss")
    grads = backward(p, tape, 2.0 * resid / resid.size)
    return loss, grads


def make_windows(X: np.ndarray, window_length: int) -> np.ndarray:
    """Trailing windows anchored at rows ``window_length - 1 .. n - 1``; shape (n - W + 1, W, input)."""
    X = np.asarray(X, dtype=float)
    if len(X) < window_length:
        raise ValueError(f"need at least {window_length} rows for one window, got {len(X)}")
    return np.ascontiguousarray(sliding_window_view(X, window_length, axis=0).transpose(0, 2, 1))


def _clip(grads: LstmParams, max_norm: float) -> float:
    arrs = grads.arrays()
    norm = float(np.sqrt(sum(float(np.sum(v * v)) for v in arrs.values())))
    if norm > max_norm:
        scale = max_norm / norm
        for v in arrs.values():
            v *= scale
    return norm


@dataclass
class _Adam:
    cfg: TrainConfig
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    def step(self, p: LstmParams, g: LstmParams) -> None:
        c = self.cfg
        self.t += 1
        bc1 = 1.0 - c.beta1 ** self.t
        bc2 = 1.0 - c.beta2 ** self.t
        for name, grad in g.arrays().items():
            m = self.m.setdefault(name, np.zeros_like(grad))
            v = self.v.setdefault(name, np.zeros_like(grad))
            m *= c.beta1
            m += (1.0 - c.beta1) * grad
            v *= c.beta2
            v += (1.0 - c.beta2) * grad * grad
            param = getattr(p, name)
            param -= c.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + c.adam_eps)


def train(train_ds, cfg: TrainConfig = TrainConfig(), params: LstmParams | None = None):
    """Fit on a scaled dataset. Returns ``(params, per-epoch mean loss list)``.

    Each row ``i >= window_length - 1`` is a sample: features of rows
    ``i - W + 1 .. i`` predict ``Y[i]``. The shuffle order is drawn from a
    generator seeded with ``cfg.seed`` so runs are reproducible.
    """
    windows = make_windows(train_ds.X, cfg.window_length)
    targets = np.asarray(train_ds.Y, dtype=float)[cfg.window_length - 1:]
    if targets.shape[1] != cfg.output_size:
        raise ValueError(f"dataset has {targets.shape[1]} targets, network emits {cfg.output_size}")
    p = params.copy() if params is not None else init_params(cfg.seed, windows.shape[-1], cfg)
    rng = np.random.default_rng([cfg.seed, 1])
    opt = _Adam(cfg)
    history: list[float] = []
    n = len(windows)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            try:
                loss, grads = loss_and_gradients(p, windows[idx], targets[idx])
            except FloatingPointError:
                raise TrainingDiverged(epoch, float("nan")) from None
            _clip(grads, cfg.gradient_clip)
            opt.step(p, grads)
            total += loss * len(idx)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(epoch, epoch_loss)
        history.append(epoch_loss)
        if epoch % 100 == 0:
            log.info("epoch %d loss %.6g", epoch, epoch_loss)
    return p, history


@dataclass(frozen=True)
class Forecast:
    dates: list
    closes: np.ndarray  # (rows, 22) in price units


def predict_scaled(p: LstmParams, X_scaled: np.ndarray, window_length: int) -> np.ndarray:
    """Scaled outputs for every anchor row ``>= window_length - 1`` of a scaled feature matrix."""
    out, _ = forward(p, make_windows(X_scaled, window_length))
    return out


def predict(p: LstmParams, ds, scaler, window_length: int) -> Forecast:
    """Forecast closes for each usable row of a scaled dataset, in price units."""
    if len(scaler.means) != p.input_size:
        raise ValueError(f"scaler has {len(scaler.means)} features, network expects {p.input_size}")
    scaled = predict_scaled(p, ds.X, window_length)
    return Forecast(list(ds.dates[window_length - 1:]), scaler.inverse_Y(scaled))


def with_config(cfg: TrainConfig, **overrides) -> TrainConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
