"""Hand-derived backpropagation and full-batch gradient-descent training.

Gradients are computed without autodiff.  The output-layer error signal comes
from the loss module; hidden-layer signals propagate backward through

    e^(l) = W^(l+1)[:, 1:]' delta^(l+1),    delta^(l) = e^(l) * phi'(z^(l)),

and the gradient of W^(l) is the outer product delta^(l) (1, h^(l-1)).  The
penalty contributes only to the first-layer columns.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DivergenceError, InputShapeError, NumericError
from .losses import (
    LossSpec,
    batch_losses,
    batch_output_deltas,
    output_delta,
    sample_loss,
)
from .metrics import select_variables
from .network import (
    NetworkConfig,
    forward,
    init_params,
    params_to_jsonable,
    predict_batch,
    sigmoid,
    sigmoid_prime_from_activation,
)
from .penalties import PenaltySpec, penalty_gradient, penalty_value


@dataclass
class TrainConfig:
    network: NetworkConfig
    loss: LossSpec = field(default_factory=LossSpec)
    penalty: PenaltySpec = field(default_factory=PenaltySpec)
    eta: float = 0.1
    max_epochs: int = 5000
    patience: int = 200
    seed: int = 0
    init_scale: float = 0.5
    selection_threshold: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ConfigurationError(f"eta must lie in (0, 1], got {self.eta}")
        if self.max_epochs < 1:
            raise ConfigurationError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ConfigurationError("patience must be >= 1")


@dataclass
class FitReport:
    """Final parameters plus the per-epoch training history."""

    params: list
    train_trace: np.ndarray
    val_trace: np.ndarray
    stopped_epoch: int
    best_epoch: int
    best_val: float
    selected_mask: np.ndarray
    config: TrainConfig
    loss_normalization: str = "mean"

    def to_jsonable(self):
        return {
            "params": params_to_jsonable(self.params),
            "train_trace": [float(v) for v in self.train_trace],
            "val_trace": [float(v) for v in self.val_trace],
            "stopped_epoch": int(self.stopped_epoch),
            "best_epoch": int(self.best_epoch),
            "best_val": float(self.best_val),
            "selected_mask": [bool(b) for b in self.selected_mask],
            "loss_normalization": self.loss_normalization,
            "config": config_to_jsonable(self.config),
        }

    def trace_csv(self):
        lines = ["epoch,train_objective,val_objective"]
        for i, (tr, vl) in enumerate(zip(self.train_trace, self.val_trace), start=1):
            lines.append(f"{i},{float(tr)!r},{float(vl)!r}")
        return "\n".join(lines) + "\n"


def config_to_jsonable(config):
    pen = config.penalty
    return {
        "layer_widths": list(config.network.layer_widths),
        "hidden_activation": config.network.hidden_activation,
        "loss": {
            "kind": config.loss.kind,
            "tau2": config.loss.tau2,
            "gradient_variant": config.loss.gradient_variant,
        },
        "penalty": {
            "kind": pen.kind,
            "lambda": pen.lam,
            "gamma": pen.gamma,
            "tau1": pen.tau1,
            "penalize_bias": pen.penalize_bias,
            "pilot_floor": pen.pilot_floor,
            "pilot_norms": None
            if pen.pilot_norms is None
            else [float(v) for v in pen.pilot_norms],
        },
        "eta": config.eta,
        "max_epochs": config.max_epochs,
        "patience": config.patience,
        "seed": config.seed,
        "init_scale": config.init_scale,
        "selection_threshold": config.selection_threshold,
    }


def backprop(weights, x, y, loss, penalty):
    """Gradient of the single-sample objective loss(y, net(x)) + penalty."""
    trace = forward(weights, x)
    y = np.asarray(y, dtype=float)
    if y.shape != trace.prediction.shape:
        raise InputShapeError(
            f"response length {y.shape} does not match output width "
            f"{trace.prediction.shape}"
        )
    n_layers = len(weights)
    grads = [None] * n_layers
    delta = output_delta(y, trace.prediction, loss)
    for l in range(n_layers, 0, -1):
        if not np.all(np.isfinite(delta)):
            raise NumericError(f"non-finite error signal in layer {l}")
        h_prev = np.asarray(x, dtype=float) if l == 1 else trace.activations[l - 2]
        grads[l - 1] = np.outer(delta, np.concatenate(([1.0], h_prev)))
        if l > 1:
            e = weights[l - 1][:, 1:].T @ delta
            delta = e * sigmoid_prime_from_activation(trace.activations[l - 2])
    grads[0] = grads[0] + penalty_gradient(weights[0], penalty)
    return grads


def finite_diff_gradient(weights, x, y, loss, penalty, step=1e-6):
    """Central-difference gradient of the single-sample objective (test oracle)."""
    if not step > 0:
        raise ConfigurationError(f"step must be positive, got {step}")

    def objective(ws):
        trace = forward(ws, x)
        return sample_loss(np.asarray(y, float) - trace.prediction, loss) + (
            penalty_value(ws[0], penalty)
        )

    grads = []
    for l, W in enumerate(weights):
        G = np.zeros_like(W)
        for idx in np.ndindex(W.shape):
            bumped = [w.copy() for w in weights]
            bumped[l][idx] += step
            hi = objective(bumped)
            bumped[l][idx] -= 2.0 * step
            lo = objective(bumped)
            G[idx] = (hi - lo) / (2.0 * step)
        grads.append(G)
    return grads


def _forward_batch_trace(weights, X):
    """Activations per layer for a whole batch; entry 0 is X itself."""
    n_layers = len(weights)
    acts = [X]
    H = X
    for l, W in enumerate(weights, start=1):
        Z = H @ W[:, 1:].T + W[:, 0]
        if not np.all(np.isfinite(Z)):
            raise NumericError(f"non-finite pre-activation in layer {l}")
        H = sigmoid(Z) if l < n_layers else Z
        acts.append(H)
    return acts


def batch_gradient(weights, X, Y, loss, penalty):
    """Mean single-sample loss gradient over the batch plus one penalty gradient.

    This is the exact gradient of `empirical_objective` with the default mean
    normalization; `fit` applies it once per epoch.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = X.shape[0]
    if n == 0:
        raise ConfigurationError("empty batch")
    acts = _forward_batch_trace(weights, X)
    n_layers = len(weights)
    grads = [None] * n_layers
    D = batch_output_deltas(Y, acts[-1], loss)
    for l in range(n_layers, 0, -1):
        H_prev = acts[l - 1]
        Hb = np.concatenate([np.ones((n, 1)), H_prev], axis=1)
        grads[l - 1] = D.T @ Hb / n
        if l > 1:
            E = D @ weights[l - 1][:, 1:]
            D = E * sigmoid_prime_from_activation(H_prev)
    grads[0] = grads[0] + penalty_gradient(weights[0], penalty)
    return grads


def _unpenalized_mean_loss(weights, X, Y, loss):
    return float(batch_losses(Y - predict_batch(weights, X), loss).mean())


def fit(train, val, config):
    """Full-batch gradient descent with early stopping on the validation loss.

    Every epoch takes one step of size eta along the mean single-sample
    gradient plus the penalty gradient, then records the penalized training
    objective and the unpenalized validation loss.  Training stops at
    max_epochs or after `patience` epochs without validation improvement;
    the returned parameters are those of the best validation epoch.
    """
    if train.n_samples == 0 or val.n_samples == 0:
        raise ConfigurationError("train and validation sets must be nonempty")
    if train.n_outputs != config.network.n_outputs:
        raise InputShapeError(
            f"dataset has {train.n_outputs} responses, network expects "
            f"{config.network.n_outputs}"
        )
    weights = init_params(config.network, config.seed, config.init_scale)
    loss, penalty, eta = config.loss, config.penalty, config.eta

    train_trace, val_trace = [], []
    best_val = np.inf
    best_weights = [W.copy() for W in weights]
    best_epoch = 0
    epochs_without_improvement = 0
    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        try:
            grads = batch_gradient(weights, train.X, train.Y, loss, penalty)
        except NumericError as exc:
            raise DivergenceError(epoch, f"epoch {epoch}: {exc}") from exc
        weights = [W - eta * G for W, G in zip(weights, grads)]

        train_obj = float(
            batch_losses(train.Y - predict_batch(weights, train.X), loss).mean()
            + penalty_value(weights[0], penalty)
        )
        val_obj = _unpenalized_mean_loss(weights, val.X, val.Y, loss)
        if not (np.isfinite(train_obj) and np.isfinite(val_obj)):
            raise DivergenceError(epoch)
        train_trace.append(train_obj)
        val_trace.append(val_obj)

        if val_obj < best_val:
            best_val = val_obj
            best_weights = [W.copy() for W in weights]
            best_epoch = epoch
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
            if epochs_without_improvement >= config.patience:
                break

    mask = select_variables(best_weights, config.selection_threshold).selected
    return FitReport(
        params=best_weights,
        train_trace=np.asarray(train_trace),
        val_trace=np.asarray(val_trace),
        stopped_epoch=epoch,
        best_epoch=best_epoch,
        best_val=best_val,
        selected_mask=mask,
        config=config,
    )


def fit_independent(train, val, config):
    """One single-output LS network per response column, shared hyperparameters."""
    if config.loss.kind != "ls":
        raise ConfigurationError("independent per-response fitting uses the LS loss")
    q = train.n_outputs
    widths = config.network.layer_widths
    reports = []
    for k in range(q):
        sub_net = NetworkConfig(tuple(widths[:-1]) + (1,), config.network.hidden_activation)
        sub_cfg = replace(config, network=sub_net)
        reports.append(fit(train.select_responses([k]), val.select_responses([k]), sub_cfg))
    return reports


def predict_stacked(reports, X):
    """Column-stacked predictions of per-response fits from `fit_independent`."""
    return np.concatenate([predict_batch(rep.params, X) for rep in reports], axis=1)


def tune_lambda(train, val, grid, base_config):
    """Fit once per lambda and pick the best validation loss, ties to larger lambda.

    Returns (best_lambda, [(lambda, FitReport), ...]) over the deduplicated
    ascending grid; the score of a fit is its best recorded unpenalized
    validation loss.
    """
    lams = sorted({float(l) for l in grid})
    if not lams:
        raise ConfigurationError("lambda grid must be nonempty")
    reports = []
    best_lam, best_score = None, np.inf
    for lam in lams:
        cfg = replace(base_config, penalty=replace(base_config.penalty, lam=lam))
        report = fit(train, val, cfg)
        reports.append((lam, report))
        if report.best_val <= best_score:
            best_score = report.best_val
            best_lam = lam
    return best_lam, reports


def tune_lambda_cv(data, grid, base_config, n_folds, seed):
    """k-fold variant: pick lambda by the mean held-out loss over folds.

    Each fold's fit early-stops on the held-out fold and is scored by its best
    validation loss there.  Returns (best_lambda, {lambda: mean_score}).
    """
    if n_folds < 2:
        raise ConfigurationError("cross-validation needs at least 2 folds")
    n = data.n_samples
    if n < n_folds:
        raise ConfigurationError(f"{n} samples cannot form {n_folds} folds")
    order = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(order, n_folds)
    lams = sorted({float(l) for l in grid})
    if not lams:
        raise ConfigurationError("lambda grid must be nonempty")
    scores = {}
    for lam in lams:
        cfg = replace(base_config, penalty=replace(base_config.penalty, lam=lam))
        fold_scores = []
        for held in folds:
            keep = np.setdiff1d(order, held)
            report = fit(data.subset(keep), data.subset(held), cfg)
            fold_scores.append(report.best_val)
        scores[lam] = float(np.mean(fold_scores))
    best_lam = None
    best_score = np.inf
    for lam in lams:
        if scores[lam] <= best_score:
            best_score = scores[lam]
            best_lam = lam
    return best_lam, scores


def gradient_audit(n_trials=200, seed=0, step=1e-5, layer_choices=((1, 3, 2), (2, 10, 10, 3))):
    """Compare backprop to central finite differences over random setups.

    Draws random layer shapes, losses (LS and corrected LD) and penalties
    (none, group, adaptive), avoiding points near the smoothing seams, and
    returns the worst relative error max|g1-g2| / max(max|g1|, max|g2|, 1e-8).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        widths = layer_choices[rng.integers(len(layer_choices))]
        net = NetworkConfig(tuple(widths))
        weights = init_params(net, int(rng.integers(2**31)), 0.5)
        x = rng.uniform(-2, 2, size=net.n_inputs)
        loss_kind = ("ls", "ld")[rng.integers(2)]
        loss = LossSpec(kind=loss_kind, tau2=1e-3, gradient_variant="corrected")
        pen_kind = PENALTY_CHOICES[rng.integers(3)]
        if pen_kind == "none":
            penalty = PenaltySpec()
        elif pen_kind == "group_lasso":
            penalty = PenaltySpec(kind="group_lasso", lam=0.1, tau1=1e-5)
        else:
            pilot = rng.uniform(0.1, 2.0, size=net.n_inputs + 1)
            penalty = PenaltySpec(
                kind="adaptive_group_lasso", lam=0.1, pilot_norms=pilot, tau1=1e-5
            )
        pred = forward(weights, x).prediction
        y = pred + rng.normal(scale=1.0, size=net.n_outputs)
        if loss_kind == "ld":
            # keep the residual norm away from the tau2 seam
            while abs(np.linalg.norm(y - pred) - loss.tau2) < 1e-3 * loss.tau2:
                y = pred + rng.normal(scale=1.0, size=net.n_outputs)
        analytic = backprop(weights, x, y, loss, penalty)
        numeric = finite_diff_gradient(weights, x, y, loss, penalty, step=step)
        err = relative_gradient_error(analytic, numeric)
        worst = max(worst, err)
    return worst


PENALTY_CHOICES = ("none", "group_lasso", "adaptive_group_lasso")


def relative_gradient_error(grads_a, grads_b):
    diff = max(np.max(np.abs(a - b)) for a, b in zip(grads_a, grads_b))
    scale = max(
        max(np.max(np.abs(g)) for g in grads_a),
        max(np.max(np.abs(g)) for g in grads_b),
        1e-8,
    )
    return float(diff / scale)
