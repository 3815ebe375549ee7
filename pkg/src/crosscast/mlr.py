"""Per-horizon ordinary least squares: one independent linear model per target column."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg


class RankDeficientError(ValueError):
    def __init__(self, dependent: list[str], horizon: int | None = None):
        self.dependent = dependent
        self.horizon = horizon
        where = f"horizon {horizon}: " if horizon is not None else ""
        super().__init__(f"{where}rank-deficient design matrix; linearly dependent column(s): "
                         + ", ".join(dependent))


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coefficients: np.ndarray
    residual_variance: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + np.asarray(X, dtype=float) @ self.coefficients


@dataclass(frozen=True)
class MlrBank:
    models: list[LinearModel]
    feature_names: list[str]

    def __post_init__(self):
        p = len(self.feature_names)
        if any(len(m.coefficients) != p for m in self.models):
            raise ValueError("every model must carry one coefficient per feature")

    def __len__(self) -> int:
        return len(self.models)

    def to_json(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "models": [
                {"horizon": h, "intercept": m.intercept,
                 "coefficients": m.coefficients.tolist(),
                 "residual_variance": m.residual_variance}
                for h, m in enumerate(self.models)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MlrBank":
        models = sorted(obj["models"], key=lambda m: m["horizon"])
        return cls([LinearModel(float(m["intercept"]), np.array(m["coefficients"], dtype=float),
                                float(m["residual_variance"])) for m in models],
                   list(obj["feature_names"]))


def fit_ols(X, y, feature_names=None, ridge: float = 0.0) -> LinearModel:
    """Least-squares fit of ``y ~ b0 + X b`` through a column-pivoted QR factorization.

    ``ridge > 0`` appends ``sqrt(ridge) * I`` rows that shrink the slopes (not the
    intercept). This is an extension and is off by default.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if len(y) != n:
        raise ValueError(f"X has {n} rows but y has {len(y)}")
    if n <= p + 1:
        raise ValueError(f"need more than {p + 1} rows for {p} features, got {n}")
    names = ["intercept", *(feature_names or [f"x{j}" for j in range(p)])]

    A = np.column_stack([np.ones(n), X])
    b = y
    if ridge > 0:
        pen = np.hstack([np.zeros((p, 1)), np.sqrt(ridge) * np.eye(p)])
        A = np.vstack([A, pen])
        b = np.concatenate([y, np.zeros(p)])

    Q, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(float).eps * diag[0]
    rank = int(np.sum(diag > tol))
    if rank < p + 1:
        raise RankDeficientError([names[j] for j in piv[rank:]])

    beta_piv = linalg.solve_triangular(R, Q.T @ b)
    beta = np.empty(p + 1)
    beta[piv] = beta_piv
    resid = y - A[:n] @ beta
    rss = float(resid @ resid)
    return LinearModel(float(beta[0]), beta[1:], rss / (n - p - 1))


def fit_bank(train, ridge: float = 0.0) -> MlrBank:
    """One ``fit_ols`` per target column of a (scaled) dataset, in horizon order."""
    if len(train) == 0:
        raise ValueError("cannot fit on an empty dataset")
    X, Y, feature_names = train.X, train.Y, train.feature_names
    models = []
    for h in range(Y.shape[1]):
        try:
            models.append(fit_ols(X, Y[:, h], feature_names, ridge=ridge))
        except RankDeficientError as err:
            raise RankDeficientError(err.dependent, horizon=h) from None
        except ValueError as err:
            raise ValueError(f"horizon {h}: {err}") from None
    return MlrBank(models, list(feature_names))


def predict_bank(bank: MlrBank, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != len(bank.feature_names):
        raise ValueError(f"bank expects {len(bank.feature_names)} features, got {X.shape[1]}")
    intercepts = np.array([m.intercept for m in bank.models])
    coefs = np.column_stack([m.coefficients for m in bank.models])
    return intercepts + X @ coefs


def r2_score(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or len(y_true) < 2:
        raise ValueError("r2_score needs two equal-length vectors of at least 2 points")
    tss = float(np.sum((y_true - y_true.mean()) ** 2))
    if tss == 0:
        raise ValueError("r2_score undefined for constant y_true")
    rss = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - rss / tss
