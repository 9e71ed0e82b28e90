"""Fully connected multilayer perceptron: parameters, initialization, forward pass.

Weights for layer l form a matrix of shape K_l x (K_{l-1} + 1); column 0 holds
the bias weights, so the previous layer's activations are consumed with a
constant 1 prepended.  Hidden layers use the sigmoid activation, the output
layer is linear.
"""

from dataclasses import dataclass
import json

import numpy as np

from .errors import ConfigurationError, InputShapeError, NumericError

HIDDEN_ACTIVATIONS = ("sigmoid",)


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.asarray(z)))


def sigmoid_prime_from_activation(h):
    """Derivative of the sigmoid expressed through its output, h*(1-h)."""
    return h * (1.0 - h)


@dataclass(frozen=True)
class NetworkConfig:
    """Layer widths [p, K_1, ..., K_{L-1}, q]; bias nodes are implicit."""

    layer_widths: tuple
    hidden_activation: str = "sigmoid"

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2:
            raise ConfigurationError("need at least an input and an output layer")
        if any(w < 1 for w in widths):
            raise ConfigurationError(f"all layer widths must be >= 1, got {widths}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ConfigurationError(
                f"unknown hidden activation {self.hidden_activation!r}"
            )

    @property
    def n_inputs(self):
        return self.layer_widths[0]

    @property
    def n_outputs(self):
        return self.layer_widths[-1]

    @property
    def n_layers(self):
        """Number of weight matrices L."""
        return len(self.layer_widths) - 1


@dataclass(frozen=True)
class ForwardTrace:
    """Per-layer pre-activations z, activations h, and the final prediction."""

    pre_activations: list
    activations: list
    prediction: np.ndarray


def init_params(config, seed, scale=0.5):
    """Draw every weight i.i.d. uniform on [-scale, scale] from a seeded generator."""
    if scale < 0:
        raise ConfigurationError(f"init scale must be nonnegative, got {scale}")
    rng = np.random.default_rng(seed)
    widths = config.layer_widths
    return [
        rng.uniform(-scale, scale, size=(widths[l + 1], widths[l] + 1))
        for l in range(len(widths) - 1)
    ]


def config_from_params(weights):
    """Recover the NetworkConfig implied by a weight list."""
    widths = [weights[0].shape[1] - 1] + [W.shape[0] for W in weights]
    return NetworkConfig(tuple(widths))


def check_params(weights):
    """Validate the shape chain columns(W^l) = rows(W^{l-1}) + 1 and finiteness."""
    if not weights:
        raise InputShapeError("empty parameter list")
    for l, W in enumerate(weights):
        if W.ndim != 2:
            raise InputShapeError(f"layer {l + 1} weights must be a matrix")
        if l > 0 and W.shape[1] != weights[l - 1].shape[0] + 1:
            raise InputShapeError(
                f"layer {l + 1} expects {weights[l - 1].shape[0] + 1} columns, "
                f"got {W.shape[1]}"
            )
        if not np.all(np.isfinite(W)):
            raise NumericError(f"non-finite weight in layer {l + 1}")


def forward(weights, x):
    """Propagate a single predictor vector and return the full trace.

    z^(l) = W^(l) (1 + h^(l-1)) with h^(0) = x; hidden h = sigmoid(z); the
    prediction is the last pre-activation (identity output).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputShapeError(f"expected a 1-d predictor vector, got ndim={x.ndim}")
    if x.shape[0] != weights[0].shape[1] - 1:
        raise InputShapeError(
            f"predictor length {x.shape[0]} does not match input width "
            f"{weights[0].shape[1] - 1}"
        )
    n_layers = len(weights)
    pre, act = [], []
    h = x
    for l, W in enumerate(weights, start=1):
        z = W[:, 0] + W[:, 1:] @ h
        h = sigmoid(z) if l < n_layers else z
        pre.append(z)
        act.append(h)
    return ForwardTrace(pre, act, act[-1])


def predict_batch(weights, X):
    """Row-wise forward pass; returns the n x q prediction matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InputShapeError(f"expected a 2-d predictor matrix, got ndim={X.ndim}")
    if X.shape[1] != weights[0].shape[1] - 1:
        raise InputShapeError(
            f"predictor matrix has {X.shape[1]} columns, network expects "
            f"{weights[0].shape[1] - 1}"
        )
    n_layers = len(weights)
    H = X
    for l, W in enumerate(weights, start=1):
        Z = H @ W[:, 1:].T + W[:, 0]
        H = sigmoid(Z) if l < n_layers else Z
    return H


def params_to_jsonable(weights):
    return {
        "layer_widths": [weights[0].shape[1] - 1] + [W.shape[0] for W in weights],
        "weights": [W.tolist() for W in weights],
    }


def params_from_jsonable(doc):
    weights = [np.asarray(W, dtype=float) for W in doc["weights"]]
    check_params(weights)
    widths = [weights[0].shape[1] - 1] + [W.shape[0] for W in weights]
    if list(doc["layer_widths"]) != widths:
        raise InputShapeError(
            f"declared layer_widths {doc['layer_widths']} do not match "
            f"weight shapes {widths}"
        )
    return weights


def save_params(weights, path):
    with open(path, "w") as fh:
        json.dump(params_to_jsonable(weights), fh)


def load_params(path):
    with open(path) as fh:
        return params_from_jsonable(json.load(fh))
