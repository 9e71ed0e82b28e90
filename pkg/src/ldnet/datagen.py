"""Seeded generators for the simulation designs and outlier contamination.

All generators are pure functions of their arguments and the seed; the
sampled errors plus the stored noiseless mean reconstruct Y exactly on
uncontaminated rows.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, InputShapeError

ERROR_KINDS = ("std_normal_iid", "t3_iid", "mv_normal", "mv_t3")


@dataclass
class ErrorSpec:
    kind: str = "std_normal_iid"
    df: float = 3.0
    sigma: np.ndarray = None  # q x q covariance; identity when omitted

    def __post_init__(self):
        if self.kind not in ERROR_KINDS:
            raise ConfigurationError(f"unknown error kind {self.kind!r}")
        if not self.df > 0:
            raise ConfigurationError(f"df must be positive, got {self.df}")
        if self.sigma is not None:
            self.sigma = np.asarray(self.sigma, dtype=float)


@dataclass
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    true_mean: np.ndarray = None
    relevant_mask: np.ndarray = None
    outlier_mask: np.ndarray = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise InputShapeError("X and Y must be 2-d arrays")
        if self.X.shape[0] != self.Y.shape[0]:
            raise InputShapeError(
                f"X has {self.X.shape[0]} rows but Y has {self.Y.shape[0]}"
            )
        if self.true_mean is not None:
            self.true_mean = np.asarray(self.true_mean, dtype=float)
            if self.true_mean.shape != self.Y.shape:
                raise InputShapeError("true_mean must match the shape of Y")
        if self.relevant_mask is not None:
            self.relevant_mask = np.asarray(self.relevant_mask, dtype=bool)
            if self.relevant_mask.shape != (self.X.shape[1],):
                raise InputShapeError("relevant_mask must have one entry per predictor")
        if self.outlier_mask is not None:
            self.outlier_mask = np.asarray(self.outlier_mask, dtype=bool)
            if self.outlier_mask.shape != (self.X.shape[0],):
                raise InputShapeError("outlier_mask must have one entry per row")

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_predictors(self):
        return self.X.shape[1]

    @property
    def n_outputs(self):
        return self.Y.shape[1]

    def subset(self, rows):
        rows = np.asarray(rows)
        return Dataset(
            X=self.X[rows],
            Y=self.Y[rows],
            true_mean=None if self.true_mean is None else self.true_mean[rows],
            relevant_mask=self.relevant_mask,
            outlier_mask=None if self.outlier_mask is None else self.outlier_mask[rows],
        )

    def select_responses(self, cols):
        cols = list(cols)
        return Dataset(
            X=self.X,
            Y=self.Y[:, cols],
            true_mean=None if self.true_mean is None else self.true_mean[:, cols],
            relevant_mask=self.relevant_mask,
            outlier_mask=self.outlier_mask,
        )


def _cholesky_or_raise(sigma, q):
    if sigma is None:
        return np.eye(q)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (q, q):
        raise ConfigurationError(f"sigma must be {q}x{q}, got {sigma.shape}")
    if not np.allclose(sigma, sigma.T):
        raise ConfigurationError("sigma must be symmetric")
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise ConfigurationError("sigma must be positive-definite") from exc


def _sample_errors(spec, n, q, rng):
    if spec.kind == "std_normal_iid":
        return rng.standard_normal((n, q))
    if spec.kind == "t3_iid":
        return rng.standard_t(spec.df, size=(n, q))
    L = _cholesky_or_raise(spec.sigma, q)
    Z = rng.standard_normal((n, q)) @ L.T
    if spec.kind == "mv_normal":
        return Z
    # multivariate t via the chi-square scale mixture z / sqrt(u/df)
    u = rng.chisquare(spec.df, size=n)
    return Z / np.sqrt(u / spec.df)[:, np.newaxis]


def sample_errors(spec, n, q, seed):
    """n x q error draws; deterministic given (spec, n, q, seed)."""
    return _sample_errors(spec, n, q, np.random.default_rng(seed))


def example1_mean(case, x1, q):
    """Noiseless response surface of the single-predictor designs."""
    x1 = np.asarray(x1, dtype=float)
    k = np.arange(1, q + 1)
    if case == 1:
        return k / 2.0 + (2.0 * np.sin(x1) + np.exp(-0.1 * x1))[:, np.newaxis]
    if case == 2:
        sign = (-1.0) ** (k + 1)
        return (k + 1) / (sign * x1[:, np.newaxis] + 6.0) + 0.5 * np.sin(
            sign * x1[:, np.newaxis] / 2.0
        )
    raise ConfigurationError(f"case must be 1 or 2, got {case}")


def gen_example1(case, q, n, error, seed):
    """Single predictor x1 ~ U(-5, 5) with q correlated response curves."""
    if q < 1:
        raise ConfigurationError(f"q must be >= 1, got {q}")
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(-5.0, 5.0, size=n)
    mean = example1_mean(case, x1, q)
    eps = _sample_errors(error, n, q, rng)
    return Dataset(
        X=x1[:, np.newaxis],
        Y=mean + eps,
        true_mean=mean,
        relevant_mask=np.array([True]),
    )


def example3_mean(X):
    """Noiseless sparse surface: only the first three of ten predictors matter."""
    X = np.asarray(X, dtype=float)
    k = np.arange(1, 4)
    core = 0.1 * X[:, 0] ** 3 + 0.5 * X[:, 1] ** 2 + X[:, 0] + X[:, 1] + X[:, 2]
    return 0.1 * k + core[:, np.newaxis]


def gen_example3(n, error, seed):
    """Ten i.i.d. U(-3, 3) predictors, three responses driven by x1, x2, x3."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-3.0, 3.0, size=(n, 10))
    mean = example3_mean(X)
    eps = _sample_errors(error, n, 3, rng)
    return Dataset(
        X=X,
        Y=mean + eps,
        true_mean=mean,
        relevant_mask=np.array([True] * 3 + [False] * 7),
    )


def dataset_to_csv(data, path):
    """Write x1..xp, y1..yq, optional m1..mq true-mean columns and outlier flag."""
    p, q = data.n_predictors, data.n_outputs
    header = [f"x{j + 1}" for j in range(p)] + [f"y{k + 1}" for k in range(q)]
    blocks = [data.X, data.Y]
    if data.true_mean is not None:
        header += [f"m{k + 1}" for k in range(q)]
        blocks.append(data.true_mean)
    if data.outlier_mask is not None:
        header.append("outlier")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        body = np.concatenate(blocks, axis=1)
        for i in range(data.n_samples):
            cells = [repr(float(v)) for v in body[i]]
            if data.outlier_mask is not None:
                cells.append("1" if data.outlier_mask[i] else "0")
            fh.write(",".join(cells) + "\n")


def dataset_from_csv(path):
    """Read back a dataset written by `dataset_to_csv`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = {name: idx for idx, name in enumerate(header)}
    p = sum(1 for name in header if name.startswith("x"))
    q = sum(1 for name in header if name.startswith("y"))
    has_mean = any(name.startswith("m") for name in header)
    has_outlier = "outlier" in cols
    values = np.array(
        [[float(c) for c in row[: len(header) - int(has_outlier)]] for row in rows]
    )
    X = values[:, :p]
    Y = values[:, p : p + q]
    mean = values[:, p + q : p + 2 * q] if has_mean else None
    outlier = (
        np.array([row[cols["outlier"]] == "1" for row in rows]) if has_outlier else None
    )
    return Dataset(X=X, Y=Y, true_mean=mean, outlier_mask=outlier)


def contaminate(data, alpha, shift=7.0, seed=0):
    """Shift responses of ceil(alpha*n) random rows: odd-numbered responses get
    +shift, even-numbered -shift.  X and the stored true mean are untouched."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"alpha must lie in [0, 1], got {alpha}")
    n = data.n_samples
    n_out = math.ceil(alpha * n)
    mask = np.zeros(n, dtype=bool)
    if n_out > 0:
        rows = np.random.default_rng(seed).choice(n, size=n_out, replace=False)
        mask[rows] = True
    Y = data.Y.copy()
    Y[mask, 0::2] += shift
    Y[mask, 1::2] -= shift
    return replace(data, Y=Y, outlier_mask=mask)
