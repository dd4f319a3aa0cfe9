"""
Opinion-score aggregation, the linear quality model and its evaluation.
"""
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np
from scipy import stats as _st
from scipy.linalg import solve_triangular

from .core import FEATURE_NAMES, FeatureVector, QualityModel
from .errors import (
    InsufficientData,
    LengthMismatch,
    MalformedInput,
    NoRatings,
    RankDeficient,
    ZeroVariance,
)

RIDGE_LAMBDA = 1e-8
SINGULAR_CONDITION = 1e12
MIN_TRAIN_ROWS = 8
EXACT_PVALUE_MAX_N = 10


# -- opinion scores ---------------------------------------------------------


class RatingTable:
    """Rows of ``(stimulus_id, rater_id, score)`` with scores in 1..5."""

    def __init__(self, rows=()):
        self._rows = []
        self._seen = set()
        for row in rows:
            self.add(*row)

    def add(self, stimulus_id, rater_id, score):
        if isinstance(score, bool) or int(score) != score or not 1 <= score <= 5:
            raise MalformedInput(f"opinion score must be an integer in 1..5, got {score!r}")
        key = (stimulus_id, rater_id)
        if key in self._seen:
            raise MalformedInput(f"duplicate rating for stimulus {stimulus_id!r} by {rater_id!r}")
        self._seen.add(key)
        self._rows.append((stimulus_id, rater_id, int(score)))

    def __len__(self):
        return len(self._rows)

    def __iter__(self):
        return iter(self._rows)

    def scores(self, stimulus_id):
        return [s for sid, _, s in self._rows if sid == stimulus_id]

    def stimuli(self):
        return list(dict.fromkeys(sid for sid, _, _ in self._rows))


def compute_mos(table, stimulus_id):
    """Mean opinion score of one stimulus (see :func:`mos_with_count` for N)."""
    return mos_with_count(table, stimulus_id)[0]


def mos_with_count(table, stimulus_id):
    scores = table.scores(stimulus_id)
    if not scores:
        raise NoRatings(f"no ratings for stimulus {stimulus_id!r}")
    return float(np.mean(scores)), len(scores)


def mos_table(table):
    """``{stimulus_id: (mos, n_ratings)}`` for every rated stimulus."""
    return {sid: mos_with_count(table, sid) for sid in table.stimuli()}


# -- datasets ---------------------------------------------------------------


@dataclass(frozen=True)
class LabeledDataset:
    """Stimulus ids, an ``(N, 7)`` feature matrix and MOS labels.

    Labels must lie on the 1..5 rating scale unless ``check_range`` is off
    (planted synthetic labels can fall outside it).
    """

    ids: tuple
    features: np.ndarray
    mos: np.ndarray
    check_range: bool = True

    def __post_init__(self):
        ids = tuple(self.ids)
        X = np.array(self.features, dtype=float)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, 7)
        y = np.array(self.mos, dtype=float).ravel()
        if X.ndim != 2 or X.shape[1] != 7:
            raise MalformedInput(f"features must have shape (N, 7), got {X.shape}")
        if not (len(ids) == len(X) == len(y)):
            raise LengthMismatch("ids, features and mos must have equal length")
        if len(set(ids)) != len(ids):
            raise MalformedInput("stimulus ids must be unique")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise MalformedInput("features and mos must be finite")
        if self.check_range and np.any((y < 1) | (y > 5)):
            raise MalformedInput("mos values must lie in [1, 5]")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "mos", y)

    @classmethod
    def from_rows(cls, rows, check_range=True):
        """From ``(stimulus_id, FeatureVector or 7 values, mos)`` rows."""
        rows = list(rows)
        ids = [r[0] for r in rows]
        X = [r[1].as_array() if isinstance(r[1], FeatureVector) else r[1] for r in rows]
        X = np.array(X, dtype=float).reshape(len(rows), 7)
        return cls(ids, X, [r[2] for r in rows], check_range)

    def __len__(self):
        return len(self.ids)

    def take(self, idx):
        idx = np.asarray(idx, dtype=int)
        return LabeledDataset(
            tuple(self.ids[i] for i in idx), self.features[idx], self.mos[idx], self.check_range
        )


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def split_indices(n, split):
    """Seeded uniform permutation cut into train and validation index arrays."""
    n_train = int(round(split.train_fraction * n))
    n_train = min(max(n_train, 1), n - 1) if n > 1 else n
    perm = np.random.default_rng(split.seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split_dataset(data, split):
    tr, va = split_indices(len(data), split)
    return data.take(tr), data.take(va)


# -- model ------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    model: QualityModel
    validation_mse: Optional[float]
    ridge_lambda: float
    n_train: int
    n_validation: int
    train_mse: float

    def __iter__(self):
        # ``model, val_mse = fit_model(...)``
        return iter((self.model, self.validation_mse))


def solve_least_squares(X, y, ridge=RIDGE_LAMBDA):
    """Least squares via the normal equations ``(X^T X) w = X^T y``.

    When ``X^T X`` is numerically singular the system is retried as
    ``(X^T X + ridge I) w = X^T y``.  Returns ``(w, lambda_used)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    A = X.T @ X
    b = X.T @ y
    if np.linalg.cond(A) < SINGULAR_CONDITION:
        try:
            L = np.linalg.cholesky(A)
            return _cho_solve(L, b), 0.0
        except np.linalg.LinAlgError:
            pass
    A_r = A + ridge * np.eye(len(A))
    try:
        L = np.linalg.cholesky(A_r)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient(f"design matrix is rank deficient even with ridge {ridge}") from exc
    if np.linalg.cond(A_r) >= 1.0 / np.finfo(float).eps:
        raise RankDeficient(f"design matrix is rank deficient even with ridge {ridge}")
    return _cho_solve(L, b), ridge


def _cho_solve(L, b):
    z = solve_triangular(L, b, lower=True)
    return solve_triangular(L.T, z, lower=False)


def fit_model(data, split=None, intercept=False):
    """Fit the linear quality model on the training part of ``data``.

    The validation part is only used to report its MSE.  ``split=None`` uses
    the default 80/20 split with seed 0.
    """
    split = split or SplitConfig()
    tr, va = split_indices(len(data), split)
    if len(tr) < MIN_TRAIN_ROWS:
        raise InsufficientData(
            f"{len(tr)} training rows; at least {MIN_TRAIN_ROWS} are needed"
        )
    return fit_on(data.take(tr), data.take(va) if len(va) else None, intercept)


def fit_on(train, validation=None, intercept=False):
    """Fit on an explicit training set (no splitting)."""
    if len(train) < MIN_TRAIN_ROWS:
        raise InsufficientData(
            f"{len(train)} training rows; at least {MIN_TRAIN_ROWS} are needed"
        )
    X = train.features
    if intercept:
        X = np.column_stack([X, np.ones(len(X))])
    w, lam = solve_least_squares(X, train.mos)
    model = QualityModel(tuple(w[:7]), float(w[7]) if intercept else 0.0)
    val = None
    if validation is not None and len(validation):
        val = mse(predict_many(model, validation.features), validation.mos)
    train_mse = mse(predict_many(model, train.features), train.mos)
    return FitResult(model, val, lam, len(train), 0 if validation is None else len(validation), train_mse)


def predict(model, f):
    """Raw model output ``sum_i w_i f_i`` (+ intercept); not clamped."""
    arr = f.as_array() if isinstance(f, FeatureVector) else np.asarray(f, dtype=float)
    return float(np.dot(model.weights, arr) + model.intercept)


def predict_clamped(model, f):
    """Model output clipped to the 1..5 rating scale."""
    return float(np.clip(predict(model, f), 1.0, 5.0))


def predict_many(model, X):
    return np.asarray(X, dtype=float) @ np.asarray(model.weights) + model.intercept


# -- evaluation statistics --------------------------------------------------


def _pair(x, y, min_len):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if len(x) != len(y):
        raise LengthMismatch(f"lengths differ: {len(x)} vs {len(y)}")
    if len(x) < min_len:
        raise LengthMismatch(f"need at least {min_len} values, got {len(x)}")
    return x, y


def mse(pred, truth):
    pred, truth = _pair(pred, truth, 1)
    return float(np.mean((pred - truth) ** 2))


def rankdata(x):
    """1-based ranks; tied values share the mean of the ranks they span."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], len(xs)]
    avg = 0.5 * (starts + ends + 1)  # mean of 1-based ranks starts+1 .. ends
    ranks = np.empty(len(x))
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def _pearson(x, y):
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("correlation is undefined for a constant input")
    r = np.dot(dx, dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def _t_pvalue(r, n):
    if abs(r) >= 1.0:
        return 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    return float(2 * _st.t.sf(abs(t), n - 2))


def _permutation_pvalue(x, y, r, corr):
    hits = total = 0
    for perm in permutations(range(len(y))):
        total += 1
        if abs(corr(x, y[list(perm)])) >= abs(r) - 1e-12:
            hits += 1
    return hits / total


def plcc(x, y, exact=False):
    """Pearson correlation and two-sided p-value.

    The p-value uses Student's t with ``n - 2`` degrees of freedom, or an
    exhaustive permutation test when ``exact`` and ``n <= 10``.
    """
    x, y = _pair(x, y, 3)
    r = _pearson(x, y)
    if exact and len(x) <= EXACT_PVALUE_MAX_N:
        return r, _permutation_pvalue(x, y, r, _pearson)
    return r, _t_pvalue(r, len(x))


def srocc(x, y, exact=False):
    """Spearman rank correlation (Pearson on average ranks) and p-value."""
    x, y = _pair(x, y, 3)
    rx, ry = rankdata(x), rankdata(y)
    r = _pearson(rx, ry)
    if exact and len(x) <= EXACT_PVALUE_MAX_N:
        return r, _permutation_pvalue(rx, ry, r, _pearson)
    return r, _t_pvalue(r, len(x))


@dataclass(frozen=True)
class EvaluationReport:
    mse: float
    plcc: float
    srocc: float
    plcc_p: float
    srocc_p: float
    n: int

    def to_dict(self):
        return {
            "mse": self.mse,
            "plcc": self.plcc,
            "srocc": self.srocc,
            "p_values": {"plcc": self.plcc_p, "srocc": self.srocc_p},
            "n": self.n,
        }


def evaluate(model, test):
    """MSE, PLCC and SROCC between predicted and collected MOS."""
    if len(test) == 0:
        raise InsufficientData("empty test set")
    pred = predict_many(model, test.features)
    r_p, p_p = plcc(pred, test.mos)
    r_s, p_s = srocc(pred, test.mos)
    return EvaluationReport(mse(pred, test.mos), r_p, r_s, p_p, p_s, len(test))


def single_feature_srocc(data):
    """SROCC (and p-value) of each feature alone against MOS."""
    out = {}
    for k, name in enumerate(FEATURE_NAMES):
        try:
            out[name] = srocc(data.features[:, k], data.mos)
        except ZeroVariance:
            out[name] = (float("nan"), float("nan"))
    return out
