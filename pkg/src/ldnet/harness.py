"""Experiment harness: replication loop, CSV ingestion, report emission.

`run_experiment` is a pure function of its `ExperimentConfig`: replication
seeds derive from the base seed and the replication index only, so repeated
runs produce identical tables (timings are measured but zeroed in reports
unless explicitly requested).
"""

import csv
import math
import time
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np
import pandas as pd

from .datagen import Dataset, ErrorSpec, contaminate, gen_example1, gen_example3
from .errors import ConfigurationError, DivergenceError, NumericError
from .losses import LossSpec
from .metrics import (
    irrelevant_weight_frobenius,
    model_error_mse,
    mspe,
    select_variables,
    selection_counts,
)
from .network import NetworkConfig, predict_batch
from .penalties import PenaltySpec, group_norms
from .trainer import (
    TrainConfig,
    fit,
    fit_independent,
    predict_stacked,
    tune_lambda,
    tune_lambda_cv,
)

ESTIMATORS = ("DNN-LS-IND", "DNN-LS", "DNN-LD", "GDNN-LD", "AGDNN-LD")
EXPERIMENTS = ("example1", "example2", "example3", "real_data", "custom")
ETA_GRID_DEFAULT = (0.01, 0.05, 0.1, 0.3)

REPORT_COLUMNS = (
    "estimator",
    "replication",
    "seed",
    "mse",
    "mspe",
    "nc",
    "nic",
    "exact_match",
    "frobenius",
    "lambda_selected",
    "epochs",
    "wall_ms",
)

# seed offsets within one replication block (stride 1000 between replications)
_SEED_TRAIN, _SEED_VAL, _SEED_TEST = 1, 2, 3
_SEED_CONTAM, _SEED_INIT, _SEED_SPLIT, _SEED_CV = 4, 5, 6, 7


@dataclass
class ExperimentConfig:
    experiment: str = "example1"
    estimators: tuple = ("DNN-LD",)
    replications: int = 1
    case: int = 1
    q: int = 3
    error: str = "std_normal_iid"
    alpha: float = 0.0
    shift: float = 7.0
    n_train: int = 200
    n_val: int = 200
    n_test: int = 10000
    hidden: tuple = (10, 10)
    eta: float = 0.1  # None -> grid search over eta_grid per estimator
    eta_grid: tuple = ETA_GRID_DEFAULT
    tau1: float = 1e-5
    tau2: float = 1e-3
    max_epochs: int = 5000
    patience: int = 200
    init_scale: float = 0.5
    gamma: float = 1.0
    lambda_grid: tuple = (0.0, 0.001, 0.01, 0.1)
    selection_threshold: float = 1e-3
    gradient_variant: str = "corrected"
    base_seed: int = 0
    # real-data / custom options
    data_path: str = None
    predictor_cols: tuple = None
    response_cols: tuple = None
    cv_folds: int = 5
    train_fraction: float = 0.7
    val_fraction: float = 0.15
    standardize: bool = True

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {self.experiment!r}")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ConfigurationError(f"unknown estimators {unknown}")
        if not self.estimators:
            raise ConfigurationError("at least one estimator is required")
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigurationError("train_fraction must lie in (0, 1)")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigurationError("val_fraction must lie in (0, 1)")
        if self.train_fraction + self.val_fraction > 1.0:
            raise ConfigurationError("split fractions must sum to at most 1")
        if self.cv_folds < 2:
            raise ConfigurationError("cv_folds must be >= 2")
        self.estimators = tuple(self.estimators)
        self.hidden = tuple(int(h) for h in self.hidden)
        self.eta_grid = tuple(float(e) for e in self.eta_grid)
        self.lambda_grid = tuple(float(l) for l in self.lambda_grid)

    def to_jsonable(self):
        doc = asdict(self)
        for key, value in doc.items():
            if isinstance(value, tuple):
                doc[key] = list(value)
        return doc


@dataclass
class ReplicationRow:
    estimator: str
    replication: int
    seed: int
    mse: float = None
    mspe: float = None
    nc: int = None
    nic: int = None
    exact_match: bool = None
    frobenius: float = None
    lambda_selected: float = None
    epochs: int = None
    wall_ms: float = None
    error: str = None


@dataclass
class ReplicationTable:
    config: ExperimentConfig
    rows: list

    _NUMERIC = (
        "mse",
        "mspe",
        "nc",
        "nic",
        "exact_match",
        "frobenius",
        "lambda_selected",
        "epochs",
        "wall_ms",
    )

    def ok_rows(self, estimator):
        return [r for r in self.rows if r.estimator == estimator and r.error is None]

    @property
    def n_failed(self):
        return sum(1 for r in self.rows if r.error is not None)

    def aggregates(self, include_timing=True):
        """Mean and standard error (sample SD / sqrt(R)) per estimator."""
        out = []
        for estimator in self.config.estimators:
            rows = self.ok_rows(estimator)
            entry = {
                "estimator": estimator,
                "n": len(rows),
                "n_failed": sum(
                    1 for r in self.rows if r.estimator == estimator and r.error
                ),
                "mean": {},
                "se": {},
            }
            for col in self._NUMERIC:
                vals = [getattr(r, col) for r in rows]
                vals = [float(v) for v in vals if v is not None]
                if col == "wall_ms" and not include_timing:
                    vals = [0.0 for _ in vals]
                if not vals:
                    entry["mean"][col] = None
                    entry["se"][col] = None
                    continue
                arr = np.asarray(vals)
                entry["mean"][col] = float(arr.mean())
                entry["se"][col] = (
                    float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
                )
            out.append(entry)
        return out


def replication_seed(base_seed, index):
    """Distinct per-replication seed block; offsets 1..7 address sub-streams."""
    return int(base_seed) + 1000 * int(index)


def _error_spec(config):
    return ErrorSpec(kind=config.error)


def _make_sim_datasets(config, seed):
    err = _error_spec(config)
    if config.experiment in ("example1", "example2"):
        train = gen_example1(config.case, config.q, config.n_train, err, seed + _SEED_TRAIN)
        val = gen_example1(config.case, config.q, config.n_val, err, seed + _SEED_VAL)
        test = gen_example1(config.case, config.q, config.n_test, err, seed + _SEED_TEST)
        if config.experiment == "example2" and config.alpha > 0:
            train = contaminate(train, config.alpha, config.shift, seed + _SEED_CONTAM)
    else:
        train = gen_example3(config.n_train, err, seed + _SEED_TRAIN)
        val = gen_example3(config.n_val, err, seed + _SEED_VAL)
        test = gen_example3(config.n_test, err, seed + _SEED_TEST)
        if config.alpha > 0:
            train = contaminate(train, config.alpha, config.shift, seed + _SEED_CONTAM)
    return train, val, test


def _train_config(config, p, q, loss_kind, penalty, eta, seed):
    net = NetworkConfig((p, *config.hidden, q))
    return TrainConfig(
        network=net,
        loss=LossSpec(
            kind=loss_kind, tau2=config.tau2, gradient_variant=config.gradient_variant
        ),
        penalty=penalty,
        eta=eta,
        max_epochs=config.max_epochs,
        patience=config.patience,
        seed=seed,
        init_scale=config.init_scale,
        selection_threshold=config.selection_threshold,
    )


def _fit_best_eta(config, train, val, loss_kind, penalty, seed):
    """Fit at the configured eta, or pick the best of eta_grid by validation loss."""
    etas = (config.eta,) if config.eta is not None else config.eta_grid
    best_eta, best_report = None, None
    for eta in etas:
        cfg = _train_config(config, train.n_predictors, train.n_outputs, loss_kind, penalty, eta, seed)
        report = fit(train, val, cfg)
        if best_report is None or report.best_val < best_report.best_val:
            best_eta, best_report = eta, report
    return best_eta, best_report


def _fit_independent_best_eta(config, train, val, seed):
    etas = (config.eta,) if config.eta is not None else config.eta_grid
    best_eta, best_reports, best_score = None, None, np.inf
    for eta in etas:
        cfg = _train_config(
            config, train.n_predictors, train.n_outputs, "ls", PenaltySpec(), eta, seed
        )
        reports = fit_independent(train, val, cfg)
        score = float(np.mean([r.best_val for r in reports]))
        if score < best_score:
            best_eta, best_reports, best_score = eta, reports, score
    return best_eta, best_reports


class _PilotCache:
    """One unpenalized least-distance fit per replication, shared by the
    DNN-LD row, the adaptive penalty weights, and eta selection for the
    penalized estimators."""

    def __init__(self, config, train, val, seed):
        self._args = (config, train, val, seed)
        self._result = None

    def get(self):
        if self._result is None:
            config, train, val, seed = self._args
            self._result = _fit_best_eta(config, train, val, "ld", PenaltySpec(), seed)
        return self._result


def _selection_sq_norms(reports_or_params, independent):
    if independent:
        per_net = [select_variables(rep.params).group_sq_norms for rep in reports_or_params]
        return np.sum(per_net, axis=0)
    return select_variables(reports_or_params).group_sq_norms


def _stacked_irrelevant_frobenius(reports, truth):
    blocks = [rep.params[0][:, 1:][:, ~np.asarray(truth, bool)] for rep in reports]
    return float(np.sqrt(sum(float(np.sum(b**2)) for b in blocks)))


def _metrics_fields(config, data_test, train_mask, predict, sq_norms, frobenius):
    fields = {}
    fields["mspe"] = float(np.mean((predict(data_test.X) - data_test.Y) ** 2))
    if data_test.true_mean is not None:
        fields["mse"] = float(np.mean((predict(data_test.X) - data_test.true_mean) ** 2))
    if train_mask is not None:
        selected = sq_norms > config.selection_threshold
        nc, nic, exact = selection_counts(selected, train_mask)
        fields.update(nc=nc, nic=nic, exact_match=exact, frobenius=frobenius)
    return fields


def _run_estimator(name, config, train, val, test, seed, pilot):
    """Fit one named estimator and compute its metric fields."""
    truth = train.relevant_mask
    if name == "DNN-LD":
        _eta, report = pilot.get()
        predict = lambda X: predict_batch(report.params, X)
        sq = _selection_sq_norms(report.params, independent=False)
        frob = (
            irrelevant_weight_frobenius(report.params, truth) if truth is not None else None
        )
        extra = dict(lambda_selected=0.0, epochs=report.stopped_epoch)
    elif name == "DNN-LS":
        _eta, report = _fit_best_eta(config, train, val, "ls", PenaltySpec(), seed)
        predict = lambda X: predict_batch(report.params, X)
        sq = _selection_sq_norms(report.params, independent=False)
        frob = (
            irrelevant_weight_frobenius(report.params, truth) if truth is not None else None
        )
        extra = dict(lambda_selected=0.0, epochs=report.stopped_epoch)
    elif name == "DNN-LS-IND":
        _eta, reports = _fit_independent_best_eta(config, train, val, seed)
        predict = lambda X: predict_stacked(reports, X)
        sq = _selection_sq_norms(reports, independent=True)
        frob = _stacked_irrelevant_frobenius(reports, truth) if truth is not None else None
        extra = dict(
            lambda_selected=0.0, epochs=max(r.stopped_epoch for r in reports)
        )
    elif name in ("GDNN-LD", "AGDNN-LD"):
        eta_ld, pilot_report = pilot.get()
        if name == "GDNN-LD":
            penalty = PenaltySpec(
                kind="group_lasso",
                lam=1.0,
                gamma=config.gamma,
                tau1=config.tau1,
                gradient_variant=config.gradient_variant,
            )
        else:
            penalty = PenaltySpec(
                kind="adaptive_group_lasso",
                lam=1.0,
                gamma=config.gamma,
                pilot_norms=group_norms(pilot_report.params[0]),
                tau1=config.tau1,
                gradient_variant=config.gradient_variant,
            )
        base = _train_config(
            config, train.n_predictors, train.n_outputs, "ld", penalty, eta_ld, seed
        )
        best_lam, lam_reports = tune_lambda(train, val, config.lambda_grid, base)
        report = dict(lam_reports)[best_lam]
        predict = lambda X: predict_batch(report.params, X)
        sq = _selection_sq_norms(report.params, independent=False)
        frob = (
            irrelevant_weight_frobenius(report.params, truth) if truth is not None else None
        )
        extra = dict(lambda_selected=best_lam, epochs=report.stopped_epoch)
    else:
        raise ConfigurationError(f"unknown estimator {name!r}")

    fields = _metrics_fields(config, test, truth, predict, sq, frob)
    fields.update(extra)
    return fields


def _run_replication(config, index, rows):
    seed = replication_seed(config.base_seed, index)
    train, val, test = _make_sim_datasets(config, seed)
    pilot = _PilotCache(config, train, val, seed + _SEED_INIT)
    for name in config.estimators:
        start = time.perf_counter()
        row = ReplicationRow(estimator=name, replication=index, seed=seed)
        try:
            fields = _run_estimator(
                name, config, train, val, test, seed + _SEED_INIT, pilot
            )
            for key, value in fields.items():
                setattr(row, key, value)
        except (DivergenceError, NumericError) as exc:
            row.error = str(exc)
        row.wall_ms = (time.perf_counter() - start) * 1000.0
        rows.append(row)


def _run_real_data_replication(config, raw, index, rows):
    seed = replication_seed(config.base_seed, index)
    train_full, test = prepare_slump(
        raw,
        seed + _SEED_SPLIT,
        train_fraction=config.train_fraction,
        standardize=config.standardize,
        outlier_alpha=config.alpha,
        outlier_shift=config.shift if config.alpha > 0 else 5.0,
    )
    inner = np.random.default_rng(seed + _SEED_VAL).permutation(train_full.n_samples)
    n_val = max(1, int(round(0.2 * train_full.n_samples)))
    val = train_full.subset(inner[:n_val])
    train = train_full.subset(inner[n_val:])

    for name in config.estimators:
        start = time.perf_counter()
        row = ReplicationRow(estimator=name, replication=index, seed=seed)
        try:
            fields = _run_real_estimator(
                name, config, train_full, train, val, test, seed + _SEED_INIT
            )
            for key, value in fields.items():
                setattr(row, key, value)
        except (DivergenceError, NumericError) as exc:
            row.error = str(exc)
        row.wall_ms = (time.perf_counter() - start) * 1000.0
        rows.append(row)


def _run_real_estimator(name, config, train_full, train, val, test, seed):
    truth = train_full.relevant_mask
    p, q = train.n_predictors, train.n_outputs
    if name in ("DNN-LD", "DNN-LS"):
        kind = "ld" if name == "DNN-LD" else "ls"
        _eta, report = _fit_best_eta(config, train, val, kind, PenaltySpec(), seed)
        params = report.params
        lam_sel, epochs = 0.0, report.stopped_epoch
    elif name == "DNN-LS-IND":
        _eta, reports = _fit_independent_best_eta(config, train, val, seed)
        sq = _selection_sq_norms(reports, independent=True)
        frob = _stacked_irrelevant_frobenius(reports, truth)
        predict = lambda X: predict_stacked(reports, X)
        fields = _metrics_fields(config, test, truth, predict, sq, frob)
        fields.update(
            lambda_selected=0.0, epochs=max(r.stopped_epoch for r in reports)
        )
        return fields
    elif name in ("GDNN-LD", "AGDNN-LD"):
        eta_ld, pilot_report = _fit_best_eta(config, train, val, "ld", PenaltySpec(), seed)
        if name == "GDNN-LD":
            penalty = PenaltySpec(
                kind="group_lasso",
                lam=1.0,
                gamma=config.gamma,
                tau1=config.tau1,
                gradient_variant=config.gradient_variant,
            )
        else:
            penalty = PenaltySpec(
                kind="adaptive_group_lasso",
                lam=1.0,
                gamma=config.gamma,
                pilot_norms=group_norms(pilot_report.params[0]),
                tau1=config.tau1,
                gradient_variant=config.gradient_variant,
            )
        base = _train_config(config, p, q, "ld", penalty, eta_ld, seed)
        best_lam, _scores = tune_lambda_cv(
            train_full, config.lambda_grid, base, config.cv_folds, seed + _SEED_CV
        )
        final_cfg = replace(base, penalty=replace(penalty, lam=best_lam))
        report = fit(train, val, final_cfg)
        params = report.params
        lam_sel, epochs = best_lam, report.stopped_epoch
    else:
        raise ConfigurationError(f"unknown estimator {name!r}")

    predict = lambda X: predict_batch(params, X)
    sq = _selection_sq_norms(params, independent=False)
    frob = irrelevant_weight_frobenius(params, truth)
    fields = _metrics_fields(config, test, truth, predict, sq, frob)
    fields.update(lambda_selected=lam_sel, epochs=epochs)
    return fields


def _make_custom_datasets(config, seed):
    if config.data_path is None:
        raise ConfigurationError("custom experiments need data_path")
    data = load_csv(config.data_path, config.predictor_cols, config.response_cols)
    n = data.n_samples
    order = np.random.default_rng(seed + _SEED_SPLIT).permutation(n)
    n_train = int(config.train_fraction * n)
    n_val = max(1, int(config.val_fraction * n))
    train = data.subset(order[:n_train])
    val = data.subset(order[n_train : n_train + n_val])
    test = data.subset(order[n_train + n_val :])
    if test.n_samples == 0:
        test = val
    return train, val, test


def run_experiment(config):
    """Run every (estimator, replication) cell and return the result table."""
    rows = []
    if config.experiment == "real_data":
        if config.data_path is None:
            raise ConfigurationError("real_data experiments need data_path")
        raw = load_slump_csv(config.data_path)
        for r in range(config.replications):
            _run_real_data_replication(config, raw, r, rows)
    elif config.experiment == "custom":
        for r in range(config.replications):
            seed = replication_seed(config.base_seed, r)
            train, val, test = _make_custom_datasets(config, seed)
            pilot = _PilotCache(config, train, val, seed + _SEED_INIT)
            for name in config.estimators:
                start = time.perf_counter()
                row = ReplicationRow(estimator=name, replication=r, seed=seed)
                try:
                    fields = _run_estimator(
                        name, config, train, val, test, seed + _SEED_INIT, pilot
                    )
                    for key, value in fields.items():
                        setattr(row, key, value)
                except (DivergenceError, NumericError) as exc:
                    row.error = str(exc)
                row.wall_ms = (time.perf_counter() - start) * 1000.0
                rows.append(row)
    else:
        for r in range(config.replications):
            _run_replication(config, r, rows)
    table = ReplicationTable(config=config, rows=rows)
    if table.n_failed:
        warnings.warn(
            f"{table.n_failed} fit(s) aborted and were excluded from aggregates"
        )
    return table


# ---------------------------------------------------------------------------
# report emission


def _fmt_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def report_csv_text(table, include_timing=False):
    lines = [",".join(REPORT_COLUMNS)]
    for row in table.rows:
        cells = [row.estimator, str(row.replication), str(row.seed)]
        for col in REPORT_COLUMNS[3:]:
            value = getattr(row, col)
            if col == "wall_ms" and not include_timing:
                value = 0.0 if row.error is None else None
            cells.append(_fmt_cell(value))
        lines.append(",".join(cells))
    for agg in table.aggregates(include_timing=include_timing):
        for stat in ("mean", "se"):
            cells = [agg["estimator"], stat, ""]
            for col in REPORT_COLUMNS[3:]:
                cells.append(_fmt_cell(agg[stat].get(col)))
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def report_jsonable(table, include_timing=False):
    rows = []
    for row in table.rows:
        doc = {
            "estimator": row.estimator,
            "replication": row.replication,
            "seed": row.seed,
            "error": row.error,
        }
        for col in REPORT_COLUMNS[3:]:
            value = getattr(row, col)
            if col == "wall_ms" and not include_timing:
                value = 0.0 if row.error is None else None
            if isinstance(value, (bool, np.bool_)):
                value = bool(value)
            elif isinstance(value, (int, np.integer)):
                value = int(value)
            elif value is not None:
                value = float(value)
            doc[col] = value
        rows.append(doc)
    return {
        "schema": "v1",
        "config": table.config.to_jsonable(),
        "rows": rows,
        "aggregates": table.aggregates(include_timing=include_timing),
    }


def emit_report(table, fmt, path, include_timing=False):
    """Write the replication table as CSV or JSON."""
    if fmt == "csv":
        text = report_csv_text(table, include_timing=include_timing)
    elif fmt == "json":
        import json

        text = json.dumps(report_jsonable(table, include_timing=include_timing), indent=1)
        text += "\n"
    else:
        raise ConfigurationError(f"unknown report format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)


def read_report_csv(path):
    """Parse a report CSV back into (data_rows, aggregate_rows) dict lists."""
    with open(path) as fh:
        reader = csv.DictReader(fh)
        data, aggregates = [], []
        for rec in reader:
            (aggregates if rec["replication"] in ("mean", "se") else data).append(rec)
    return data, aggregates


# ---------------------------------------------------------------------------
# CSV ingestion


def load_csv(path, predictor_cols, response_cols):
    """Read a dataset from CSV with named predictor and response columns."""
    try:
        df = pd.read_csv(path)
    except FileNotFoundError:
        raise ConfigurationError(f"no such file: {path}")
    predictor_cols = list(predictor_cols)
    response_cols = list(response_cols)
    missing = [c for c in predictor_cols + response_cols if c not in df.columns]
    if missing:
        raise ConfigurationError(f"missing columns in {path}: {missing}")
    for col in predictor_cols + response_cols:
        values = pd.to_numeric(df[col], errors="coerce")
        bad = values.isna() & df[col].notna()
        if bad.any() or df[col].isna().any():
            row = int(np.flatnonzero(values.isna())[0])
            raise ConfigurationError(
                f"non-numeric or missing value at row {row}, column {col!r}"
            )
        df[col] = values
    return Dataset(
        X=df[predictor_cols].to_numpy(dtype=float),
        Y=df[response_cols].to_numpy(dtype=float),
    )


# ---------------------------------------------------------------------------
# concrete-slump protocol

_SLUMP_RESPONSE_MATCHERS = (  # paper order: flow, slump, compressive strength
    ("flow", lambda name: "flow" in name),
    ("slump", lambda name: "slump" in name),
    ("strength", lambda name: "strength" in name or "compressive" in name),
)

_SLUMP_SIGNAL_MATCHERS = (
    lambda name: "cement" in name,
    lambda name: "slag" in name,
    lambda name: "fly" in name,
    lambda name: "water" in name,
    lambda name: name.strip() == "sp" or "plastic" in name,
    lambda name: "coarse" in name,
)


def load_slump_csv(path):
    """Load the concrete slump-test CSV: 3 responses, all remaining numeric
    columns as predictors, signal mask over the six named mixture components."""
    try:
        df = pd.read_csv(path)
    except FileNotFoundError:
        raise ConfigurationError(f"no such file: {path}")
    lower = {c: str(c).strip().lower() for c in df.columns}

    responses = []
    for label, match in _SLUMP_RESPONSE_MATCHERS:
        hits = [c for c in df.columns if match(lower[c]) and c not in responses]
        if not hits:
            raise ConfigurationError(f"slump data is missing a {label} response column")
        responses.append(hits[0])

    predictors = [
        c
        for c in df.columns
        if c not in responses and lower[c] not in ("no", "id", "index")
    ]
    if not predictors:
        raise ConfigurationError("slump data has no predictor columns")
    signal = np.array(
        [any(match(lower[c]) for match in _SLUMP_SIGNAL_MATCHERS) for c in predictors]
    )
    if signal.sum() != 6:
        warnings.warn(
            f"matched {int(signal.sum())} of the 6 named signal predictors among "
            f"{len(predictors)} raw columns"
        )
    data = load_csv(path, predictors, responses)
    return Dataset(
        X=data.X, Y=data.Y, relevant_mask=signal
    )


def prepare_slump(
    data,
    seed,
    n_noise=2,
    train_fraction=0.7,
    standardize=True,
    outlier_alpha=0.0,
    outlier_shift=5.0,
):
    """Append U(-1,1) noise predictors, split 70/30, standardize on train stats.

    The optional outlier variant adds `outlier_shift` to every response of a
    random `outlier_alpha` fraction of the training rows (before the
    standardization statistics are computed).
    """
    rng = np.random.default_rng(seed)
    n = data.n_samples
    noise = rng.uniform(-1.0, 1.0, size=(n, n_noise))
    X = np.concatenate([data.X, noise], axis=1)
    base_mask = (
        data.relevant_mask
        if data.relevant_mask is not None
        else np.ones(data.n_predictors, dtype=bool)
    )
    mask = np.concatenate([base_mask, np.zeros(n_noise, dtype=bool)])

    order = rng.permutation(n)
    n_train = int(train_fraction * n)
    if n_train < 1 or n_train >= n:
        raise ConfigurationError(f"train fraction {train_fraction} is degenerate for n={n}")
    train_rows, test_rows = order[:n_train], order[n_train:]

    X_train, X_test = X[train_rows], X[test_rows]
    Y_train, Y_test = data.Y[train_rows].copy(), data.Y[test_rows]
    outlier_mask = np.zeros(n_train, dtype=bool)
    if outlier_alpha > 0:
        n_out = math.ceil(outlier_alpha * n_train)
        picked = rng.choice(n_train, size=n_out, replace=False)
        outlier_mask[picked] = True
        Y_train[outlier_mask] += outlier_shift

    if standardize:
        x_mu, x_sd = X_train.mean(axis=0), X_train.std(axis=0)
        y_mu, y_sd = Y_train.mean(axis=0), Y_train.std(axis=0)
        x_sd = np.where(x_sd == 0, 1.0, x_sd)
        y_sd = np.where(y_sd == 0, 1.0, y_sd)
        X_train = (X_train - x_mu) / x_sd
        X_test = (X_test - x_mu) / x_sd
        Y_train = (Y_train - y_mu) / y_sd
        Y_test = (Y_test - y_mu) / y_sd

    train = Dataset(X=X_train, Y=Y_train, relevant_mask=mask, outlier_mask=outlier_mask)
    test = Dataset(X=X_test, Y=Y_test, relevant_mask=mask)
    return train, test


# ---------------------------------------------------------------------------
# flat key=value config files


_TUPLE_KEYS = {"estimators", "hidden", "eta_grid", "lambda_grid", "predictor_cols", "response_cols"}
_INT_KEYS = {
    "replications",
    "case",
    "q",
    "n_train",
    "n_val",
    "n_test",
    "max_epochs",
    "patience",
    "base_seed",
    "cv_folds",
}
_FLOAT_KEYS = {
    "alpha",
    "shift",
    "tau1",
    "tau2",
    "init_scale",
    "gamma",
    "selection_threshold",
    "train_fraction",
    "val_fraction",
}
_BOOL_KEYS = {"standardize"}


def parse_config_file(path):
    """Parse a flat `key = value` text file into a string mapping."""
    mapping = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}"
                )
            key, _, value = line.partition("=")
            mapping[key.strip()] = value.strip()
    return mapping


def config_from_mapping(mapping):
    """Build an ExperimentConfig from string key/value pairs (config file or CLI)."""
    kwargs = {}
    valid = set(ExperimentConfig.__dataclass_fields__)
    for key, value in mapping.items():
        if key not in valid:
            raise ConfigurationError(f"unknown config key {key!r}")
        if value is None or (isinstance(value, str) and value.lower() in ("none", "")):
            kwargs[key] = None
            continue
        if not isinstance(value, str):
            kwargs[key] = value
            continue
        if key in _TUPLE_KEYS:
            items = [v.strip() for v in value.split(",") if v.strip()]
            if key in ("hidden",):
                kwargs[key] = tuple(int(v) for v in items)
            elif key in ("eta_grid", "lambda_grid"):
                kwargs[key] = tuple(float(v) for v in items)
            else:
                kwargs[key] = tuple(items)
        elif key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(value)
        elif key in _BOOL_KEYS:
            kwargs[key] = value.lower() in ("1", "true", "yes", "on")
        elif key == "eta":
            kwargs[key] = None if value.lower() in ("grid", "none") else float(value)
        else:
            kwargs[key] = value
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc))
