"""Variable-selection extraction and evaluation statistics.

A predictor is declared irrelevant when the squared Euclidean norm of its
first-layer weight column falls at or below the selection threshold (the
smoothed penalty cannot shrink a group to exactly zero).
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ConfigurationError, InputShapeError
from .network import predict_batch


@dataclass
class SelectionResult:
    group_sq_norms: np.ndarray  # length p, bias group excluded
    selected: np.ndarray  # boolean, length p
    threshold: float


@dataclass
class MetricsReport:
    mse_model_error: float = None
    mspe: float = None
    nc: int = None
    nic: int = None
    exact_match: bool = None
    frobenius_irrelevant: float = None
    dcor_matrix: np.ndarray = None

    def to_jsonable(self):
        return {
            "mse_model_error": _opt_float(self.mse_model_error),
            "mspe": _opt_float(self.mspe),
            "nc": None if self.nc is None else int(self.nc),
            "nic": None if self.nic is None else int(self.nic),
            "exact_match": None if self.exact_match is None else bool(self.exact_match),
            "frobenius_irrelevant": _opt_float(self.frobenius_irrelevant),
            "dcor_matrix": None
            if self.dcor_matrix is None
            else [[float(v) for v in row] for row in self.dcor_matrix],
        }


def _opt_float(v):
    return None if v is None else float(v)


def select_variables(params, threshold=1e-3):
    """Squared first-layer group norms per predictor, compared to the threshold."""
    W1 = np.asarray(params[0], dtype=float)
    sq = np.sum(W1[:, 1:] ** 2, axis=0)
    return SelectionResult(
        group_sq_norms=sq, selected=sq > threshold, threshold=threshold
    )


def selection_counts(selected, truth):
    """(correctly selected, incorrectly selected, exact recovery) counts."""
    selected = np.asarray(selected, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if selected.shape != truth.shape:
        raise InputShapeError(
            f"mask lengths differ: {selected.shape} vs {truth.shape}"
        )
    nc = int(np.sum(selected & truth))
    nic = int(np.sum(selected & ~truth))
    return nc, nic, bool(np.array_equal(selected, truth))


def frobenius_norm_diff(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise InputShapeError(f"shape mismatch: {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))


def irrelevant_weight_frobenius(params, truth):
    """Frobenius norm of first-layer columns belonging to truly irrelevant predictors."""
    W1 = np.asarray(params[0], dtype=float)
    truth = np.asarray(truth, dtype=bool)
    block = W1[:, 1:][:, ~truth]
    return frobenius_norm_diff(block, np.zeros_like(block))


def model_error_mse(params, X_test, true_mean):
    """Mean squared deviation of predictions from the noiseless regression surface."""
    if true_mean is None:
        raise ConfigurationError("model-error MSE needs the noiseless true mean")
    pred = predict_batch(params, X_test)
    true_mean = np.asarray(true_mean, dtype=float)
    if pred.shape != true_mean.shape:
        raise InputShapeError(f"shape mismatch: {pred.shape} vs {true_mean.shape}")
    return float(np.mean((pred - true_mean) ** 2))


def mspe(params, X_test, Y_test):
    """Mean squared prediction error against observed responses."""
    pred = predict_batch(params, X_test)
    Y_test = np.asarray(Y_test, dtype=float)
    if pred.shape != Y_test.shape:
        raise InputShapeError(f"shape mismatch: {pred.shape} vs {Y_test.shape}")
    return float(np.mean((pred - Y_test) ** 2))


def _centered_distances(M):
    D = squareform(pdist(M))
    return D - D.mean(axis=1)[:, np.newaxis] - D.mean(axis=0)[np.newaxis, :] + D.mean()


def distance_correlation(U, V):
    """Distance correlation in [0, 1] between two samples of paired rows.

    Biased (V-statistic) formulation: double-center the pairwise Euclidean
    distance matrices A and B, then dcor^2 = mean(A*B)/sqrt(mean(A*A)*mean(B*B)),
    with dcor = 0 whenever either distance variance vanishes.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.ndim == 1:
        U = U[:, np.newaxis]
    if V.ndim == 1:
        V = V[:, np.newaxis]
    if U.shape[0] != V.shape[0]:
        raise InputShapeError(
            f"samples must pair up: {U.shape[0]} vs {V.shape[0]} rows"
        )
    if U.shape[0] < 2:
        raise ConfigurationError("distance correlation needs at least 2 samples")
    A = _centered_distances(U)
    B = _centered_distances(V)
    dvar_u = (A * A).mean()
    dvar_v = (B * B).mean()
    if dvar_u == 0.0 or dvar_v == 0.0:
        return 0.0
    dcov2 = (A * B).mean()
    ratio = dcov2 / np.sqrt(dvar_u * dvar_v)
    return float(np.sqrt(max(ratio, 0.0)))


def pairwise_dcor(Y):
    """q x q matrix of pairwise distance correlations between columns of Y."""
    Y = np.asarray(Y, dtype=float)
    q = Y.shape[1]
    out = np.eye(q)
    for i in range(q):
        for j in range(i + 1, q):
            out[i, j] = out[j, i] = distance_correlation(Y[:, i], Y[:, j])
    return out
