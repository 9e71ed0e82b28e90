"""Group-lasso penalties on first-layer weight groups.

A "group" is one column of the first-layer weight matrix: the weights linking
one predictor (or the bias, column 0) to every first-hidden-layer node.  The
penalty applies the same quadratic smoothing as the loss, with its own radius
tau1, so gradient descent stays well-defined at zero-norm groups.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputShapeError

PENALTY_KINDS = ("none", "group_lasso", "adaptive_group_lasso")


@dataclass
class PenaltySpec:
    kind: str = "none"
    lam: float = 0.0
    gamma: float = 1.0
    pilot_norms: np.ndarray = None  # group norms of the pilot fit, length p+1
    tau1: float = 1e-5
    penalize_bias: bool = False
    pilot_floor: float = 1e-6
    gradient_variant: str = "corrected"

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ConfigurationError(f"unknown penalty kind {self.kind!r}")
        if self.lam < 0:
            raise ConfigurationError(f"lambda must be nonnegative, got {self.lam}")
        if not self.tau1 > 0:
            raise ConfigurationError(f"tau1 must be positive, got {self.tau1}")
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}")
        if not self.pilot_floor > 0:
            raise ConfigurationError(
                f"pilot_floor must be positive, got {self.pilot_floor}"
            )
        if self.kind == "adaptive_group_lasso":
            if self.pilot_norms is None:
                raise ConfigurationError(
                    "adaptive group lasso requires pilot_norms from an "
                    "unpenalized pilot fit"
                )
            self.pilot_norms = np.asarray(self.pilot_norms, dtype=float)


def group_norms(W1):
    """Euclidean norm of every column of the first-layer matrix (bias is entry 0)."""
    return np.linalg.norm(np.asarray(W1, dtype=float), axis=0)


def group_lambdas(spec, n_groups):
    """Per-group penalty levels, length p+1; zero for unpenalized groups."""
    if spec.kind == "none" or spec.lam == 0.0:
        return np.zeros(n_groups)
    if spec.kind == "group_lasso":
        lams = np.full(n_groups, float(spec.lam))
    else:
        pilot = np.asarray(spec.pilot_norms, dtype=float)
        if pilot.shape != (n_groups,):
            raise InputShapeError(
                f"pilot_norms has length {pilot.shape}, expected ({n_groups},)"
            )
        lams = spec.lam * np.maximum(pilot, spec.pilot_floor) ** (-spec.gamma)
    if not spec.penalize_bias:
        lams[0] = 0.0
    return lams


def penalty_value(W1, spec):
    """Sum over penalized groups of lambda_j * g(||w_(j)||; tau1)."""
    if spec.kind == "none" or spec.lam == 0.0:
        return 0.0
    norms = group_norms(W1)
    lams = group_lambdas(spec, norms.shape[0])
    smoothed = np.where(
        norms >= spec.tau1,
        norms,
        norms * norms / (2.0 * spec.tau1) + spec.tau1 / 2.0,
    )
    return float(lams @ smoothed)


def penalty_gradient(W1, spec, variant=None):
    """Gradient of the smoothed penalty with respect to the first-layer matrix.

    Column j is lambda_j w_(j)/||w_(j)|| outside the tau1 ball.  Inside,
    `corrected` uses lambda_j w_(j)/tau1; `paper_literal` uses
    (lambda_j/tau1) w_(j) ||w_(j)||.
    """
    W1 = np.asarray(W1, dtype=float)
    if spec.kind == "none" or spec.lam == 0.0:
        return np.zeros_like(W1)
    if variant is None:
        variant = spec.gradient_variant
    if variant not in ("corrected", "paper_literal"):
        raise ConfigurationError(f"unknown gradient variant {variant!r}")
    norms = group_norms(W1)
    lams = group_lambdas(spec, norms.shape[0])
    outer = lams / np.maximum(norms, spec.tau1)
    if variant == "corrected":
        inner = lams / spec.tau1
    else:
        inner = lams * norms / spec.tau1
    scale = np.where(norms >= spec.tau1, outer, inner)
    return W1 * scale[np.newaxis, :]


def adaptive_weights(pilot_params, lam, gamma=1.0, pilot_floor=1e-6):
    """Per-group penalty levels lambda * max(||pilot w_(j)||, floor)^(-gamma)."""
    if lam < 0:
        raise ConfigurationError(f"lambda must be nonnegative, got {lam}")
    norms = group_norms(pilot_params[0])
    return lam * np.maximum(norms, pilot_floor) ** (-gamma)
