"""Command-line client for the estimation service.

Commands mirror the service endpoints one-to-one.  By default the app runs
in-process through its ASGI test transport, so no server is needed; pass
``--server`` to talk to a remote instance instead.  Exit codes: 2 for usage
errors, 3 for a malformed config file, 4 for unwritable output, 1 for any
server-reported failure.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import httpx

CONFIG_EXIT = 3
OUTPUT_EXIT = 4


class ConfigError(click.ClickException):
    exit_code = CONFIG_EXIT


class OutputError(click.ClickException):
    exit_code = OUTPUT_EXIT


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return cfg


def _payload(config: dict, **flags) -> dict:
    """Merge config-file values with explicitly passed flags (flags win)."""
    out = dict(config)
    for key, value in flags.items():
        if value is not None:
            out[key] = value
    return out


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _post(server: str | None, endpoint: str, payload: dict) -> dict:
    with _client(server) as client:
        response = client.post(endpoint, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"{endpoint} failed ({response.status_code}): {detail}")
    return response.json()


def _write(path: str, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write output file {path}: {exc}") from exc


server_option = click.option("--server", default=None, help="remote service URL (default: in-process)")
config_option = click.option("--config", "config_path", default=None, type=str, help="JSON file with default parameters")


@click.group()
def main():
    """Estimate density functionals and Bayes-error bounds from samples."""


@main.command()
@click.option("--experiment", type=int, default=None, help="benchmark pair 1-4")
@click.option("--fukunaga", type=int, default=None, help="8-d Gaussian pair 1-2")
@click.option("--n", type=int, default=None, help="total pooled sample size")
@click.option("--d", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--output", required=True, type=str, help="dataset CSV path")
@server_option
@config_option
def generate(experiment, fukunaga, n, d, seed, output, server, config_path):
    """Write a generated dataset as CSV (columns x1..xd, y)."""
    payload = _payload(
        _load_config(config_path), experiment=experiment, fukunaga=fukunaga, n=n, d=d, seed=seed
    )
    data = _post(server, "/generate", payload)
    _write(output, data["csv"])
    click.echo(f"wrote {data['n']} x {data['d']} dataset to {output}")


@main.command()
@click.option("--experiment", type=int, default=None)
@click.option("--fukunaga", type=int, default=None)
@click.option("--data", "data_path", type=str, default=None, help="dataset CSV instead of a generator")
@click.option("--functional", type=str, default=None, help="hellinger | kl01 | kl10 | dp | ber")
@click.option("--method", type=str, default=None, help="bernstein | convex_uniform | convex_density | parametric_plugin | convex_bound")
@click.option("--k", type=int, default=None)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--grid", type=str, default=None, help="auto | standard | kl_clipped")
@click.option("--n", type=int, default=None)
@click.option("--d", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--output", type=str, default=None, help="CSV path (default: stdout)")
@server_option
@config_option
def estimate(experiment, fukunaga, data_path, functional, method, k, lam, grid, n, d, seed, output, server, config_path):
    """One estimate of a functional on one dataset; emits a single CSV row."""
    dataset_csv = None
    if data_path is not None:
        try:
            dataset_csv = Path(data_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read dataset file {data_path}: {exc}") from exc
    payload = _payload(
        _load_config(config_path),
        experiment=experiment,
        fukunaga=fukunaga,
        dataset_csv=dataset_csv,
        functional=functional,
        method=method,
        k=k,
        lam=lam,
        grid=grid,
        n=n,
        d=d,
        seed=seed,
    )
    data = _post(server, "/estimate", payload)
    if output:
        _write(output, data["csv"])
    else:
        click.echo(data["csv"], nl=False)


@main.command()
@click.option("--experiment", type=int, default=None)
@click.option("--fukunaga", type=int, default=None)
@click.option("--functional", type=str, default=None)
@click.option("--methods", type=str, default=None, help="comma-separated method list")
@click.option("--k", type=int, default=None)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--grid", type=str, default=None)
@click.option("--n-values", "n_values", type=str, default=None, help="comma-separated N sweep")
@click.option("--trials", type=int, default=None)
@click.option("--seed-base", type=int, default=None)
@click.option("--d", type=int, default=None)
@click.option("--oracle-draws", type=int, default=None)
@click.option("--oracle-seed", type=int, default=None)
@click.option("--output", required=True, type=str, help="prefix for _raw.csv and _agg.csv")
@server_option
@config_option
def experiment(experiment, fukunaga, functional, methods, k, lam, grid, n_values, trials, seed_base, d, oracle_draws, oracle_seed, output, server, config_path):
    """Monte Carlo sweep of divergence estimators over sample sizes."""
    payload = _payload(
        _load_config(config_path),
        experiment=experiment,
        fukunaga=fukunaga,
        functional=functional,
        methods=[m.strip() for m in methods.split(",")] if methods else None,
        k=k,
        lam=lam,
        grid=grid,
        n_values=[int(v) for v in n_values.split(",")] if n_values else None,
        trials=trials,
        seed_base=seed_base,
        d=d,
        oracle_draws=oracle_draws,
        oracle_seed=oracle_seed,
    )
    data = _post(server, "/experiment", payload)
    _write(f"{output}_raw.csv", data["raw_csv"])
    _write(f"{output}_agg.csv", data["aggregate_csv"])
    click.echo(f"truth = {data['truth']} (se {data['truth_std_error']}); wrote {output}_raw.csv, {output}_agg.csv")


@main.command()
@click.option("--experiment", type=int, default=None)
@click.option("--fukunaga", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--n", type=int, default=None, help="single N (shortcut for --n-values)")
@click.option("--n-values", "n_values", type=str, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--seed-base", type=int, default=None)
@click.option("--d", type=int, default=None)
@click.option("--oracle-draws", type=int, default=None)
@click.option("--oracle-seed", type=int, default=None)
@click.option("--output", required=True, type=str, help="prefix for _raw/_agg/_theory CSVs")
@server_option
@config_option
def bounds(experiment, fukunaga, k, lam, n, n_values, trials, seed_base, d, oracle_draws, oracle_seed, output, server, config_path):
    """Bayes-error bound table: Bhattacharyya, spanning-tree, constrained fit."""
    values = None
    if n_values:
        values = [int(v) for v in n_values.split(",")]
    elif n is not None:
        values = [n]
    payload = _payload(
        _load_config(config_path),
        experiment=experiment,
        fukunaga=fukunaga,
        k=k,
        lam=lam,
        n_values=values,
        trials=trials,
        seed_base=seed_base,
        d=d,
        oracle_draws=oracle_draws,
        oracle_seed=oracle_seed,
    )
    data = _post(server, "/bounds", payload)
    _write(f"{output}_raw.csv", data["raw_csv"])
    _write(f"{output}_agg.csv", data["aggregate_csv"])
    _write(f"{output}_theory.csv", data["theory_csv"])
    click.echo(f"true BER = {data['true_ber']}; wrote {output}_raw.csv, {output}_agg.csv, {output}_theory.csv")


@main.command()
@click.option("--k", type=int, default=None)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--output", required=True, type=str)
@server_option
@config_option
def curves(k, lam, output, server, config_path):
    """Pointwise theoretical bound curves on the standard grid."""
    payload = _payload(_load_config(config_path), k=k, lam=lam)
    data = _post(server, "/curves", payload)
    _write(output, data["csv"])
    click.echo(f"wrote {output}")


@main.command()
@click.option("--experiment", type=int, default=None)
@click.option("--fukunaga", type=int, default=None)
@click.option("--functional", type=str, default=None)
@click.option("--mc", "draws", type=int, default=None, help="Monte Carlo draw count")
@click.option("--seed", type=int, default=None)
@click.option("--d", type=int, default=None)
@click.option("--manifest", required=True, type=str, help="truth manifest CSV (appended, used as cache)")
@server_option
@config_option
def oracle(experiment, fukunaga, functional, draws, seed, d, manifest, server, config_path):
    """Ground-truth functional value by Monte Carlo integration, cached in a
    manifest keyed by (experiment, functional, draws, seed)."""
    from .oracles import parse_truth_manifest, truth_manifest_header

    payload = _payload(
        _load_config(config_path),
        experiment=experiment,
        fukunaga=fukunaga,
        functional=functional,
        draws=draws,
        seed=seed,
        d=d,
    )
    manifest_path = Path(manifest)
    cached = {}
    if manifest_path.exists():
        try:
            cached = parse_truth_manifest(manifest_path.read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot use manifest {manifest}: {exc}") from exc
    label = f"experiment{payload.get('experiment')}" if payload.get("experiment") else f"fukunaga{payload.get('fukunaga')}"
    key = (
        label,
        payload.get("functional", "hellinger"),
        payload.get("draws", 1_000_000),
        payload.get("seed", 0),
    )
    if key in cached:
        gt = cached[key]
        click.echo(f"cached: {label} {key[1]} = {gt.value} (se {gt.std_error})")
        return
    data = _post(server, "/oracle", payload)
    text = manifest_path.read_text() if manifest_path.exists() else truth_manifest_header() + "\n"
    _write(manifest, text + data["manifest_row"] + "\n")
    click.echo(f"{data['experiment']} {data['functional']} = {data['value']} (se {data['std_error']})")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port):
    """Run the estimation service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
