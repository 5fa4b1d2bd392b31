"""L2-regularized logistic regression on standardized difference features.

The cost is the mean cross-entropy plus lambda * sum(coef^2); the
intercept is excluded from the penalty. Fitting is deterministic
full-batch gradient descent with backtracking line search from a zero
start, so identical inputs always produce identical models.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .dataio import PairExample, TeamSeason
from .errors import DataError

_CLAMP = 1e-12

MODEL_FORMAT = "bracketlab_model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Scaler:
    """Per-feature training means and population standard deviations."""

    feature_names: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray


@dataclass(frozen=True)
class FitMeta:
    iterations: int
    final_cost: float
    grad_inf_norm: float
    converged: bool


@dataclass(frozen=True)
class FitModel:
    """Trained coefficients (standardized scale) plus the scaler."""

    coefficients: np.ndarray
    intercept: float
    scaler: Scaler
    lam: float
    zero_intercept: bool
    max_iter: int
    tol: float
    fit_meta: FitMeta

    def win_probability(self, a: TeamSeason, b: TeamSeason) -> float:
        return predict_proba(self, a, b)


def _example_matrix(examples: Sequence[PairExample]) -> np.ndarray:
    if not examples:
        raise ValueError("empty example set")
    X = np.stack([ex.x for ex in examples]).astype(np.float64)
    if X.ndim != 2:
        raise ValueError("examples must hold 1-D feature vectors")
    return X


def fit_scaler(
    examples: Sequence[PairExample],
    feature_names: Sequence[str] | None = None,
) -> Scaler:
    """Means and population standard deviations of the example features."""
    X = _example_matrix(examples)
    p = X.shape[1]
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(p))
    feature_names = tuple(feature_names)
    if len(feature_names) != p:
        raise ValueError(f"{len(feature_names)} names for {p} features")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    for i, s in enumerate(stds):
        if s == 0.0:
            raise DataError(f"feature {feature_names[i]} has zero variance")
    return Scaler(feature_names=feature_names, means=means, stds=stds)


def transform(scaler: Scaler, x: np.ndarray) -> np.ndarray:
    """Standardize a feature vector or matrix: (x - mean) / std."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != len(scaler.feature_names):
        raise ValueError(
            f"dimension mismatch: {x.shape[-1]} values, scaler has {len(scaler.feature_names)}"
        )
    return (x - scaler.means) / scaler.stds


def logistic(t):
    """Numerically stable 1 / (1 + exp(-t)); no overflow for |t| <= 700."""
    if isinstance(t, (int, float)):
        t = float(t)
        if t >= 0.0:
            return 1.0 / (1.0 + math.exp(-t))
        e = math.exp(t)
        return e / (1.0 + e)
    arr = np.asarray(t, dtype=np.float64)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    e = np.exp(arr[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def cost(
    params: tuple[float, np.ndarray],
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
) -> float:
    """Regularized cost on a standardized example set.

    Probabilities are clamped to [1e-12, 1 - 1e-12] before the logs;
    the intercept is not penalized.
    """
    if len(X) == 0:
        raise ValueError("empty example set")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    intercept, coefs = params
    coefs = np.asarray(coefs, dtype=np.float64)
    h = logistic(intercept + X @ coefs)
    h = np.clip(h, _CLAMP, 1.0 - _CLAMP)
    ce = -(y * np.log(h) + (1.0 - y) * np.log(1.0 - h)).mean()
    return float(ce + lam * coefs @ coefs)


def cost_gradient(
    params: tuple[float, np.ndarray],
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
) -> tuple[float, np.ndarray]:
    """(d cost / d intercept, d cost / d coefficients)."""
    intercept, coefs = params
    coefs = np.asarray(coefs, dtype=np.float64)
    h = logistic(intercept + X @ coefs)
    r = h - y
    g0 = float(r.mean())
    g = X.T @ r / len(y) + 2.0 * lam * coefs
    return g0, g


def fit(
    train: Sequence[PairExample],
    lam: float,
    feature_names: Sequence[str] | None = None,
    *,
    zero_intercept: bool = False,
    max_iter: int = 10000,
    tol: float = 1e-6,
) -> FitModel:
    """Fit the model by gradient descent with backtracking line search.

    Deterministic: zero initialization and a fixed schedule. Stops when
    the gradient infinity-norm drops to `tol`; if max_iter is exhausted
    first the model comes back with fit_meta.converged False.
    """
    X_raw = _example_matrix(train)
    y = np.array([ex.y for ex in train], dtype=np.float64)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if not zero_intercept and (y.min() == y.max()):
        raise DataError("single-class training data; mirror the examples or fix the intercept")

    scaler = fit_scaler(train, feature_names)
    Z = transform(scaler, X_raw)
    p = Z.shape[1]

    n_params = p if zero_intercept else p + 1
    m = len(y)

    def unpack(v):
        if zero_intercept:
            return 0.0, v
        return float(v[0]), v[1:]

    def f(v):
        return cost(unpack(v), Z, y, lam)

    def fg(v):
        b0, w = unpack(v)
        h = logistic(b0 + Z @ w)
        hc = np.clip(h, _CLAMP, 1.0 - _CLAMP)
        c = -(y * np.log(hc) + (1.0 - y) * np.log(1.0 - hc)).mean() + lam * w @ w
        r = h - y
        g = Z.T @ r / m + 2.0 * lam * w
        full = g if zero_intercept else np.concatenate(([r.mean()], g))
        return float(c), full

    v = np.zeros(n_params)
    fval, grad = fg(v)
    step = 0.5
    iterations = 0
    stalled = False
    while iterations < max_iter and not stalled:
        g_inf = float(np.abs(grad).max())
        if g_inf <= tol:
            break
        gg = float(grad @ grad)
        t = step * 2.0
        while True:
            v_new = v - t * grad
            if f(v_new) <= fval - 1e-4 * t * gg:
                break
            t *= 0.5
            if t < 1e-18:
                # descent direction no longer improves at float precision
                stalled = True
                break
        if stalled:
            break
        v = v_new
        step = t
        fval, grad = fg(v)
        iterations += 1
    g_inf = float(np.abs(grad).max())
    converged = g_inf <= tol

    intercept, coefs = unpack(v)
    return FitModel(
        coefficients=np.array(coefs, dtype=np.float64),
        intercept=float(intercept),
        scaler=scaler,
        lam=float(lam),
        zero_intercept=zero_intercept,
        max_iter=max_iter,
        tol=tol,
        fit_meta=FitMeta(
            iterations=iterations,
            final_cost=float(fval),
            grad_inf_norm=g_inf,
            converged=converged,
        ),
    )


def _raw_features(team: TeamSeason, names: tuple[str, ...]) -> list[float]:
    unknown = [n for n in names if n not in team.features]
    if unknown:
        raise DataError(f"{team.team_name}: missing features {', '.join(unknown)}")
    values = [team.features[n] for n in names]
    if any(v is None for v in values):
        raise DataError(f"{team.team_name}: unimputed features, impute first")
    return values


def predict_proba(model: FitModel, a: TeamSeason, b: TeamSeason) -> float:
    """P(team a beats team b) under the fitted model.

    Delegates to the kernel's scalar routine so that predictions,
    single-game simulations and the Monte Carlo loop all compute the
    exact same probability.
    """
    names = model.scaler.feature_names
    fa = _raw_features(a, names)
    fb = _raw_features(b, names)
    return _kernels.pair_probability(
        fa, fb, model.scaler.means, model.scaler.stds, model.coefficients, model.intercept
    )


def accuracy(model: FitModel, examples: Sequence[PairExample]) -> float:
    """Percent of examples classified correctly at the 0.5 threshold.

    A probability of exactly 0.5 predicts class 1.
    """
    X = _example_matrix(examples)
    y = np.array([ex.y for ex in examples])
    h = logistic(model.intercept + transform(model.scaler, X) @ model.coefficients)
    predicted = (h >= 0.5).astype(int)
    return float(100.0 * (predicted == y).mean())


def feature_importance(model: FitModel) -> list[tuple[str, float]]:
    """(feature, |coefficient|) sorted descending, name-order ties."""
    pairs = [
        (name, abs(float(c)))
        for name, c in zip(model.scaler.feature_names, model.coefficients)
    ]
    return sorted(pairs, key=lambda nc: (-nc[1], nc[0]))


def select_features(model: FitModel, threshold: float) -> list[str]:
    """Features with |coefficient| >= threshold, in original order."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return [
        name
        for name, c in zip(model.scaler.feature_names, model.coefficients)
        if abs(float(c)) >= threshold
    ]


def restrict_examples(
    examples: Sequence[PairExample],
    feature_names: Sequence[str],
    keep: Sequence[str],
) -> list[PairExample]:
    """Project examples onto a subset of features (for a selection refit)."""
    feature_names = list(feature_names)
    idx = [feature_names.index(name) for name in keep]
    return [PairExample(x=ex.x[idx], y=ex.y, pair_id=ex.pair_id) for ex in examples]


def save_model(model: FitModel, path) -> None:
    """Write the model as versioned JSON; floats round-trip bit-exactly."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "feature_names": list(model.scaler.feature_names),
        "means": [float(v) for v in model.scaler.means],
        "stds": [float(v) for v in model.scaler.stds],
        "coefficients": [float(v) for v in model.coefficients],
        "intercept": model.intercept,
        "lambda": model.lam,
        "options": {
            "zero_intercept": model.zero_intercept,
            "max_iter": model.max_iter,
            "tol": model.tol,
        },
        "fit_meta": {
            "iterations": model.fit_meta.iterations,
            "final_cost": model.fit_meta.final_cost,
            "grad_inf_norm": model.fit_meta.grad_inf_norm,
            "converged": model.fit_meta.converged,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> FitModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a valid model file ({exc})") from None
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise DataError(f"{path}: unrecognized model format/version")
    opts = doc["options"]
    meta = doc["fit_meta"]
    return FitModel(
        coefficients=np.array(doc["coefficients"], dtype=np.float64),
        intercept=float(doc["intercept"]),
        scaler=Scaler(
            feature_names=tuple(doc["feature_names"]),
            means=np.array(doc["means"], dtype=np.float64),
            stds=np.array(doc["stds"], dtype=np.float64),
        ),
        lam=float(doc["lambda"]),
        zero_intercept=bool(opts["zero_intercept"]),
        max_iter=int(opts["max_iter"]),
        tol=float(opts["tol"]),
        fit_meta=FitMeta(
            iterations=int(meta["iterations"]),
            final_cost=float(meta["final_cost"]),
            grad_inf_norm=float(meta["grad_inf_norm"]),
            converged=bool(meta["converged"]),
        ),
    )
