"""Command-line entry points.

Exit codes: 0 on success, 2 on configuration errors, 3 on numeric aborts.
"""

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd

from .datagen import ERROR_KINDS, ErrorSpec, contaminate, dataset_to_csv, gen_example1, gen_example3
from .errors import ConfigurationError, DivergenceError, InputShapeError, NumericError
from .estimators import DNNRegressor, IndependentDNNRegressor
from .harness import (
    ESTIMATORS,
    config_from_mapping,
    emit_report,
    load_csv,
    parse_config_file,
    run_experiment,
)
from .metrics import distance_correlation, pairwise_dcor
from .network import params_to_jsonable
from .trainer import gradient_audit


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigurationError, InputShapeError) as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(2)
        except (DivergenceError, NumericError) as exc:
            click.echo(f"numeric abort: {exc}", err=True)
            sys.exit(3)

    return wrapper


@click.group()
@click.option("--seed", type=int, default=None, help="Override the base seed.")
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Flat key = value configuration file.",
)
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False),
    default=".",
    help="Directory for output files.",
)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.pass_context
def main(ctx, seed, config_path, out_dir, fmt):
    """Least-distance deep-network regression toolkit."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, config_path=config_path, out_dir=Path(out_dir), fmt=fmt)


def _out_path(ctx, name):
    out = ctx.obj["out_dir"]
    out.mkdir(parents=True, exist_ok=True)
    return out / name


@main.command()
@click.option(
    "--experiment",
    type=click.Choice(["example1", "example2", "example3"]),
    default="example1",
)
@click.option("--case", type=int, default=1, help="Design case for example1/2.")
@click.option("--q", type=int, default=3, help="Number of responses (example1/2).")
@click.option("--n", type=int, default=200, help="Number of rows.")
@click.option("--error", type=click.Choice(ERROR_KINDS), default="std_normal_iid")
@click.option("--alpha", type=float, default=0.0, help="Outlier fraction.")
@click.option("--shift", type=float, default=7.0, help="Outlier shift magnitude.")
@click.option("--name", default="dataset.csv", help="Output file name.")
@click.pass_context
@_guarded
def simulate(ctx, experiment, case, q, n, error, alpha, shift, name):
    """Generate a simulation dataset and write it as CSV."""
    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else 0
    err = ErrorSpec(kind=error)
    if experiment == "example3":
        data = gen_example3(n, err, seed + 1)
    else:
        data = gen_example1(case, q, n, err, seed + 1)
    if experiment == "example2" or alpha > 0:
        data = contaminate(data, alpha, shift, seed + 4)
    path = _out_path(ctx, name)
    dataset_to_csv(data, path)
    click.echo(f"wrote {data.n_samples} rows to {path}")


def _build_estimator(name, hidden, eta, lam, gamma, max_epochs, patience, val_fraction, seed):
    common = dict(
        hidden_layer_sizes=hidden,
        eta=eta,
        max_epochs=max_epochs,
        patience=patience,
        validation_fraction=val_fraction,
        random_state=seed,
    )
    if name == "DNN-LS-IND":
        return IndependentDNNRegressor(**common)
    if name == "DNN-LS":
        return DNNRegressor(loss="ls", **common)
    if name == "DNN-LD":
        return DNNRegressor(loss="ld", **common)
    if name == "GDNN-LD":
        return DNNRegressor(loss="ld", penalty="group_lasso", lam=lam, gamma=gamma, **common)
    if name == "AGDNN-LD":
        return DNNRegressor(
            loss="ld", penalty="adaptive_group_lasso", lam=lam, gamma=gamma, **common
        )
    raise ConfigurationError(f"unknown estimator {name!r}")


def _parse_cols(text):
    return [c.strip() for c in text.split(",") if c.strip()]


@main.command("fit")
@click.option("--data", "data_path", required=True, type=click.Path(dir_okay=False))
@click.option("--predictors", required=True, help="Comma-separated predictor columns.")
@click.option("--responses", required=True, help="Comma-separated response columns.")
@click.option("--estimator", type=click.Choice(ESTIMATORS), default="DNN-LD")
@click.option("--hidden", default="10,10", help="Hidden layer widths, e.g. 10,10.")
@click.option("--eta", type=float, default=0.1)
@click.option("--lam", type=float, default=0.0, help="Penalty level for (A)GDNN-LD.")
@click.option("--gamma", type=float, default=1.0)
@click.option("--max-epochs", type=int, default=5000)
@click.option("--patience", type=int, default=200)
@click.option("--val-fraction", type=float, default=0.2)
@click.pass_context
@_guarded
def fit_cmd(ctx, data_path, predictors, responses, estimator, hidden, eta, lam, gamma,
            max_epochs, patience, val_fraction):
    """Fit a single model on a CSV dataset and save parameters and traces."""
    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else 0
    data = load_csv(data_path, _parse_cols(predictors), _parse_cols(responses))
    hidden_widths = tuple(int(h) for h in _parse_cols(hidden))
    model = _build_estimator(
        estimator, hidden_widths, eta, lam, gamma, max_epochs, patience, val_fraction, seed
    )
    model.fit(data.X, data.Y)

    if isinstance(model, IndependentDNNRegressor):
        reports = model.reports_
        networks = [params_to_jsonable(rep.params) for rep in reports]
        for k, rep in enumerate(reports, start=1):
            (_out_path(ctx, f"fit_trace_y{k}.csv")).write_text(rep.trace_csv())
        summary = {
            "estimator": estimator,
            "stopped_epochs": [rep.stopped_epoch for rep in reports],
            "best_val": [rep.best_val for rep in reports],
        }
    else:
        report = model.report_
        networks = [params_to_jsonable(report.params)]
        (_out_path(ctx, "fit_trace.csv")).write_text(report.trace_csv())
        summary = {
            "estimator": estimator,
            "stopped_epoch": report.stopped_epoch,
            "best_epoch": report.best_epoch,
            "best_val": report.best_val,
            "lambda": lam,
            "selected_mask": [bool(b) for b in model.selected_mask_],
            "group_sq_norms": [float(v) for v in model.group_sq_norms_],
        }
    with open(_out_path(ctx, "fit_params.json"), "w") as fh:
        json.dump({"estimator": estimator, "networks": networks}, fh)
    with open(_out_path(ctx, "fit_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    click.echo(f"fit complete; outputs in {ctx.obj['out_dir']}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(dir_okay=False))
@click.option("--predictors", required=True)
@click.option("--responses", required=True)
@click.option("--estimator", type=click.Choice(("GDNN-LD", "AGDNN-LD")), default="AGDNN-LD")
@click.option("--lambda-grid", "lambda_grid", default="0,0.001,0.01,0.1")
@click.option("--eta-grid", "eta_grid", default="0.1")
@click.option("--hidden", default="10,10")
@click.option("--cv-folds", type=int, default=0, help="0 uses a holdout validation split.")
@click.option("--val-fraction", type=float, default=0.2)
@click.option("--max-epochs", type=int, default=5000)
@click.option("--patience", type=int, default=200)
@click.pass_context
@_guarded
def tune(ctx, data_path, predictors, responses, estimator, lambda_grid, eta_grid,
         hidden, cv_folds, val_fraction, max_epochs, patience):
    """Grid-search the penalty level (and learning rate) on CSV data."""
    from .datagen import Dataset
    from .losses import LossSpec
    from .network import NetworkConfig
    from .penalties import PenaltySpec, group_norms
    from .trainer import TrainConfig, fit, tune_lambda, tune_lambda_cv

    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else 0
    data = load_csv(data_path, _parse_cols(predictors), _parse_cols(responses))
    lams = [float(v) for v in _parse_cols(lambda_grid)]
    etas = [float(v) for v in _parse_cols(eta_grid)]
    hidden_widths = tuple(int(h) for h in _parse_cols(hidden))

    order = np.random.default_rng(seed + 6).permutation(data.n_samples)
    n_val = max(1, int(round(val_fraction * data.n_samples)))
    val = data.subset(order[:n_val])
    train = data.subset(order[n_val:])

    net = NetworkConfig((data.n_predictors, *hidden_widths, data.n_outputs))
    results = []
    best = None
    for eta in etas:
        pilot_cfg = TrainConfig(
            network=net, loss=LossSpec(kind="ld"), penalty=PenaltySpec(),
            eta=eta, max_epochs=max_epochs, patience=patience, seed=seed + 5,
        )
        pilot = fit(train, val, pilot_cfg)
        if estimator == "AGDNN-LD":
            penalty = PenaltySpec(
                kind="adaptive_group_lasso", lam=1.0,
                pilot_norms=group_norms(pilot.params[0]),
            )
        else:
            penalty = PenaltySpec(kind="group_lasso", lam=1.0)
        base = TrainConfig(
            network=net, loss=LossSpec(kind="ld"), penalty=penalty,
            eta=eta, max_epochs=max_epochs, patience=patience, seed=seed + 5,
        )
        if cv_folds >= 2:
            best_lam, scores = tune_lambda_cv(data, lams, base, cv_folds, seed + 7)
            for lam in sorted(scores):
                results.append((eta, lam, scores[lam]))
                if best is None or scores[lam] <= best[2]:
                    best = (eta, lam, scores[lam])
        else:
            best_lam, reports = tune_lambda(train, val, lams, base)
            for lam, rep in reports:
                results.append((eta, lam, rep.best_val))
                if best is None or rep.best_val <= best[2]:
                    best = (eta, lam, rep.best_val)

    path = _out_path(ctx, "tune_results.csv")
    with open(path, "w") as fh:
        fh.write("eta,lambda,score\n")
        for eta, lam, score in results:
            fh.write(f"{eta!r},{lam!r},{score!r}\n")
    click.echo(f"best eta={best[0]} lambda={best[1]} score={best[2]}")
    click.echo(f"wrote {path}")


@main.command()
@click.option("--replications", type=int, default=None, help="Override replications.")
@click.option("--timing/--no-timing", default=False, help="Record wall times (breaks byte determinism).")
@click.pass_context
@_guarded
def bench(ctx, replications, timing):
    """Run a replication experiment described by the --config file."""
    if ctx.obj["config_path"] is None:
        raise ConfigurationError("bench requires --config FILE")
    mapping = parse_config_file(ctx.obj["config_path"])
    if ctx.obj["seed"] is not None:
        mapping["base_seed"] = str(ctx.obj["seed"])
    if replications is not None:
        mapping["replications"] = str(replications)
    config = config_from_mapping(mapping)
    table = run_experiment(config)
    fmt = ctx.obj["fmt"]
    path = _out_path(ctx, f"report.{fmt}")
    emit_report(table, fmt, path, include_timing=timing)
    if table.n_failed:
        click.echo(f"warning: {table.n_failed} fit(s) aborted", err=True)
    for agg in table.aggregates(include_timing=timing):
        mean = agg["mean"]
        parts = [f"{agg['estimator']}: n={agg['n']}"]
        for col in ("mse", "mspe", "nc", "nic", "frobenius"):
            if mean.get(col) is not None:
                parts.append(f"{col}={mean[col]:.4g}")
        click.echo("  ".join(parts))
    click.echo(f"wrote {path}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(dir_okay=False))
@click.option("--cols", default=None, help="Comma-separated columns (default: all numeric).")
@click.pass_context
@_guarded
def dcor(ctx, data_path, cols):
    """Pairwise distance-correlation matrix of CSV columns."""
    try:
        df = pd.read_csv(data_path)
    except FileNotFoundError:
        raise ConfigurationError(f"no such file: {data_path}")
    if cols:
        names = _parse_cols(cols)
        missing = [c for c in names if c not in df.columns]
        if missing:
            raise ConfigurationError(f"missing columns: {missing}")
    else:
        names = [c for c in df.columns if np.issubdtype(df[c].dtype, np.number)]
    if len(names) < 2:
        raise ConfigurationError("need at least two columns")
    M = df[names].to_numpy(dtype=float)
    matrix = pairwise_dcor(M)
    path = _out_path(ctx, "dcor.csv")
    with open(path, "w") as fh:
        fh.write("," + ",".join(names) + "\n")
        for name, row in zip(names, matrix):
            fh.write(name + "," + ",".join(repr(float(v)) for v in row) + "\n")
    for name, row in zip(names, matrix):
        click.echo(name + "  " + "  ".join(f"{v:.3f}" for v in row))
    click.echo(f"wrote {path}")


@main.command()
@click.option("--trials", type=int, default=200)
@click.option("--tol", type=float, default=1e-5)
@click.option("--step", type=float, default=1e-5)
@click.pass_context
@_guarded
def gradcheck(ctx, trials, tol, step):
    """Audit backpropagation against central finite differences."""
    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else 0
    worst = gradient_audit(n_trials=trials, seed=seed, step=step)
    click.echo(f"max relative gradient error over {trials} trials: {worst:.3e}")
    if worst >= tol:
        click.echo(f"exceeds tolerance {tol:g}", err=True)
        sys.exit(3)
    click.echo(f"within tolerance {tol:g}")


if __name__ == "__main__":
    main()
