"""Scikit-learn style estimators wrapping the functional training core.

`DNNRegressor` covers the four joint estimators (LS / least-distance loss,
optionally with a plain or adaptive group-lasso penalty on the first-layer
weight groups); `IndependentDNNRegressor` trains one single-output LS network
per response column.  Both follow the fit/predict/get_params conventions so
they compose with sklearn model-selection utilities.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils import check_array, check_X_y

from .datagen import Dataset
from .errors import ConfigurationError
from .losses import LossSpec
from .metrics import select_variables
from .network import NetworkConfig, predict_batch
from .penalties import PenaltySpec, group_norms
from .trainer import TrainConfig, fit, fit_independent, predict_stacked


def _as_2d_response(y):
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        return y[:, np.newaxis], True
    return y, False


def _split_validation(X, y, fraction, seed):
    n = X.shape[0]
    n_val = max(1, int(round(fraction * n)))
    if n_val >= n:
        raise ConfigurationError(
            f"validation fraction {fraction} leaves no training rows for n={n}"
        )
    order = np.random.default_rng(seed).permutation(n)
    val_rows, train_rows = order[:n_val], order[n_val:]
    return (X[train_rows], y[train_rows]), (X[val_rows], y[val_rows])


class DNNRegressor(BaseEstimator, RegressorMixin):
    """Multilayer-perceptron regressor with least-distance or squared loss.

    Parameters
    ----------
    hidden_layer_sizes : tuple of int
        Widths of the hidden layers (sigmoid activation).
    loss : {"ld", "ls"}
        "ld" trains on the smoothed Euclidean-norm loss of the whole residual
        vector (robust, couples the responses); "ls" on the squared norm.
    penalty : {"none", "group_lasso", "adaptive_group_lasso"}
        First-layer group penalty for variable selection.  The adaptive kind
        fits an unpenalized pilot first and reweights the groups by the
        inverse pilot norms (unless `pilot_norms` is supplied).
    lam, gamma : float
        Penalty level and adaptive exponent.
    eta : float
        Gradient-descent learning rate in (0, 1].
    tau1, tau2 : float
        Smoothing radii of the penalty and of the LD loss.
    validation_fraction : float
        Share of the training rows held out for early stopping when no
        explicit validation set is passed to `fit`.
    """

    def __init__(
        self,
        hidden_layer_sizes=(10, 10),
        loss="ld",
        penalty="none",
        lam=0.0,
        gamma=1.0,
        pilot_norms=None,
        eta=0.1,
        tau1=1e-5,
        tau2=1e-3,
        max_epochs=5000,
        patience=200,
        init_scale=0.5,
        gradient_variant="corrected",
        penalize_bias=False,
        pilot_floor=1e-6,
        selection_threshold=1e-3,
        validation_fraction=0.2,
        random_state=0,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.loss = loss
        self.penalty = penalty
        self.lam = lam
        self.gamma = gamma
        self.pilot_norms = pilot_norms
        self.eta = eta
        self.tau1 = tau1
        self.tau2 = tau2
        self.max_epochs = max_epochs
        self.patience = patience
        self.init_scale = init_scale
        self.gradient_variant = gradient_variant
        self.penalize_bias = penalize_bias
        self.pilot_floor = pilot_floor
        self.selection_threshold = selection_threshold
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _train_config(self, p, q, penalty_spec):
        net = NetworkConfig((p, *tuple(self.hidden_layer_sizes), q))
        loss = LossSpec(
            kind=self.loss, tau2=self.tau2, gradient_variant=self.gradient_variant
        )
        return TrainConfig(
            network=net,
            loss=loss,
            penalty=penalty_spec,
            eta=self.eta,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.random_state,
            init_scale=self.init_scale,
            selection_threshold=self.selection_threshold,
        )

    def _penalty_spec(self, pilot_norms=None):
        common = dict(
            lam=self.lam,
            gamma=self.gamma,
            tau1=self.tau1,
            penalize_bias=self.penalize_bias,
            pilot_floor=self.pilot_floor,
            gradient_variant=self.gradient_variant,
        )
        if self.penalty == "none":
            return PenaltySpec()
        if self.penalty == "group_lasso":
            return PenaltySpec(kind="group_lasso", **common)
        if self.penalty == "adaptive_group_lasso":
            return PenaltySpec(
                kind="adaptive_group_lasso", pilot_norms=pilot_norms, **common
            )
        raise ConfigurationError(f"unknown penalty {self.penalty!r}")

    def fit(self, X, y, X_val=None, y_val=None):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True, dtype=float)
        y2d, self._y_was_1d = _as_2d_response(y)
        if X_val is not None:
            X_val = check_array(X_val, dtype=float)
            yv2d, _ = _as_2d_response(y_val)
            train, val = (X, y2d), (X_val, yv2d)
        else:
            train, val = _split_validation(
                X, y2d, self.validation_fraction, self.random_state
            )
        train_ds = Dataset(X=train[0], Y=train[1])
        val_ds = Dataset(X=val[0], Y=val[1])
        p, q = X.shape[1], y2d.shape[1]

        pilot_norms = self.pilot_norms
        self.pilot_report_ = None
        if self.penalty == "adaptive_group_lasso" and pilot_norms is None:
            pilot_cfg = self._train_config(p, q, PenaltySpec())
            self.pilot_report_ = fit(train_ds, val_ds, pilot_cfg)
            pilot_norms = group_norms(self.pilot_report_.params[0])

        config = self._train_config(p, q, self._penalty_spec(pilot_norms))
        self.report_ = fit(train_ds, val_ds, config)
        self.weights_ = self.report_.params
        selection = select_variables(self.weights_, self.selection_threshold)
        self.group_sq_norms_ = selection.group_sq_norms
        self.selected_mask_ = selection.selected
        self.n_features_in_ = p
        self.n_outputs_ = q
        return self

    def predict(self, X):
        if not hasattr(self, "weights_"):
            raise NotFittedError("call fit before predict")
        X = check_array(X, dtype=float)
        pred = predict_batch(self.weights_, X)
        return pred[:, 0] if self._y_was_1d else pred


class IndependentDNNRegressor(BaseEstimator, RegressorMixin):
    """q independent single-output LS networks, one per response column."""

    def __init__(
        self,
        hidden_layer_sizes=(10, 10),
        eta=0.1,
        tau2=1e-3,
        max_epochs=5000,
        patience=200,
        init_scale=0.5,
        selection_threshold=1e-3,
        validation_fraction=0.2,
        random_state=0,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.eta = eta
        self.tau2 = tau2
        self.max_epochs = max_epochs
        self.patience = patience
        self.init_scale = init_scale
        self.selection_threshold = selection_threshold
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def fit(self, X, y, X_val=None, y_val=None):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True, dtype=float)
        y2d, self._y_was_1d = _as_2d_response(y)
        if X_val is not None:
            X_val = check_array(X_val, dtype=float)
            yv2d, _ = _as_2d_response(y_val)
            train, val = (X, y2d), (X_val, yv2d)
        else:
            train, val = _split_validation(
                X, y2d, self.validation_fraction, self.random_state
            )
        p, q = X.shape[1], y2d.shape[1]
        net = NetworkConfig((p, *tuple(self.hidden_layer_sizes), q))
        config = TrainConfig(
            network=net,
            loss=LossSpec(kind="ls", tau2=self.tau2),
            penalty=PenaltySpec(),
            eta=self.eta,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.random_state,
            init_scale=self.init_scale,
            selection_threshold=self.selection_threshold,
        )
        self.reports_ = fit_independent(
            Dataset(X=train[0], Y=train[1]), Dataset(X=val[0], Y=val[1]), config
        )
        self.n_features_in_ = p
        self.n_outputs_ = q
        return self

    def predict(self, X):
        if not hasattr(self, "reports_"):
            raise NotFittedError("call fit before predict")
        X = check_array(X, dtype=float)
        pred = predict_stacked(self.reports_, X)
        return pred[:, 0] if self._y_was_1d else pred
