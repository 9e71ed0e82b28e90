"""Loss values and output-layer error signals for LS and smoothed least-distance.

The least-distance (LD) loss of a q-variate residual r is its Euclidean norm.
Near the origin the norm is replaced by a quadratic (Huber-style) cap of
radius tau2 so the objective stays differentiable:

    g(r) = ||r||                        if ||r|| >= tau2
         = ||r||^2 / (2 tau2) + tau2/2  otherwise
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .network import predict_batch
from .penalties import penalty_value

LOSS_KINDS = ("ls", "ld")
GRADIENT_VARIANTS = ("corrected", "paper_literal")


@dataclass
class LossSpec:
    kind: str = "ld"
    tau2: float = 1e-3
    gradient_variant: str = "corrected"

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ConfigurationError(f"unknown loss kind {self.kind!r}")
        if self.kind == "ld" and not self.tau2 > 0:
            raise ConfigurationError(f"tau2 must be positive, got {self.tau2}")
        if self.gradient_variant not in GRADIENT_VARIANTS:
            raise ConfigurationError(
                f"unknown gradient variant {self.gradient_variant!r}"
            )


def smoothed_ld(r, tau2):
    """Smoothed Euclidean-norm loss of one residual vector."""
    if not tau2 > 0:
        raise ConfigurationError(f"tau2 must be positive, got {tau2}")
    nrm = float(np.linalg.norm(r))
    if nrm >= tau2:
        return nrm
    return nrm * nrm / (2.0 * tau2) + tau2 / 2.0


def ld_output_delta(y, yhat, tau2, variant="corrected"):
    """Output-layer error signal d loss / d yhat for the smoothed LD loss.

    Outside the tau2 ball this is -r/||r||.  Inside, `corrected` returns
    -r/tau2 (the exact derivative of the quadratic cap) while `paper_literal`
    returns -(||r||/tau2) r.
    """
    if not tau2 > 0:
        raise ConfigurationError(f"tau2 must be positive, got {tau2}")
    if variant not in GRADIENT_VARIANTS:
        raise ConfigurationError(f"unknown gradient variant {variant!r}")
    r = np.asarray(y, dtype=float) - np.asarray(yhat, dtype=float)
    nrm = float(np.linalg.norm(r))
    if nrm >= tau2:
        return -r / nrm
    if variant == "corrected":
        return -r / tau2
    return -(nrm / tau2) * r


def ls_loss(r):
    """Squared Euclidean norm of one residual vector."""
    r = np.asarray(r, dtype=float)
    return float(r @ r)


def ls_output_delta(y, yhat):
    """Output-layer error signal for the squared loss, -2(y - yhat)."""
    return -2.0 * (np.asarray(y, dtype=float) - np.asarray(yhat, dtype=float))


def output_delta(y, yhat, spec):
    if spec.kind == "ls":
        return ls_output_delta(y, yhat)
    return ld_output_delta(y, yhat, spec.tau2, spec.gradient_variant)


def sample_loss(r, spec):
    if spec.kind == "ls":
        return ls_loss(r)
    return smoothed_ld(r, spec.tau2)


def batch_losses(residuals, spec):
    """Vector of per-sample losses for an n x q residual matrix."""
    R = np.asarray(residuals, dtype=float)
    if spec.kind == "ls":
        return np.einsum("ij,ij->i", R, R)
    norms = np.linalg.norm(R, axis=1)
    return np.where(
        norms >= spec.tau2,
        norms,
        norms * norms / (2.0 * spec.tau2) + spec.tau2 / 2.0,
    )


def batch_output_deltas(Y, Yhat, spec):
    """n x q matrix of output-layer error signals."""
    R = np.asarray(Y, dtype=float) - np.asarray(Yhat, dtype=float)
    if spec.kind == "ls":
        return -2.0 * R
    norms = np.linalg.norm(R, axis=1, keepdims=True)
    if spec.gradient_variant == "corrected":
        scale = np.where(norms >= spec.tau2, norms, spec.tau2)
        return -R / scale
    inner = norms / spec.tau2
    scale = np.where(norms >= spec.tau2, 1.0 / np.maximum(norms, spec.tau2), inner)
    return -R * scale


def empirical_objective(weights, dataset, loss, penalty, normalization="mean"):
    """Mean (or summed) per-sample loss plus the first-layer penalty value."""
    if dataset.n_samples == 0:
        raise ConfigurationError("empty dataset")
    if normalization not in ("mean", "sum"):
        raise ConfigurationError(f"unknown normalization {normalization!r}")
    per_sample = batch_losses(dataset.Y - predict_batch(weights, dataset.X), loss)
    base = per_sample.mean() if normalization == "mean" else per_sample.sum()
    return float(base + penalty_value(weights[0], penalty))
