"""Command-line front end: fit return series, run benchmark grids, emit
simulated datasets, and run the sampler correctness harness.

All outputs are deterministic functions of (input bytes, configuration,
seed); wall-clock timing is reported on stderr only, never in artifact
files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    GridSpec,
    export_grid,
    render_grid_table,
    resolve_workers,
    run_grid,
)
from .diagnostics import geweke_test
from .estimator import SVolEstimator
from .model import Parameters, simulate
from .samplers import SCHEMES

__all__ = ["main"]


class CliError(Exception):
    """User-facing failure: printed to stderr, nonzero exit."""


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# ---------------------------------------------------------------------------
# key = value configuration files (TOML-like subset)


def _coerce_scalar(text: str):
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise CliError(f"cannot parse config value {text!r}")


def parse_kv_config(path) -> dict:
    """Parse a flat `key = value` file: numbers, booleans, quoted strings,
    and [bracketed, lists]; '#' starts a comment."""
    out: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise CliError(f"{path}:{lineno}: empty key")
        if value.startswith("[") and value.endswith("]"):
            inner = value[1:-1].strip()
            out[key] = ([_coerce_scalar(v) for v in inner.split(",")]
                        if inner else [])
        else:
            out[key] = _coerce_scalar(value)
    return out


def _merge_config(args: argparse.Namespace, schema: dict) -> dict:
    """Config file values fill in flags the user did not pass; unknown
    config keys are rejected."""
    cfg = {}
    if getattr(args, "config", None):
        cfg = parse_kv_config(args.config)
        unknown = set(cfg) - set(schema)
        if unknown:
            raise CliError(
                f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = {}
    for key, default in schema.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
        elif key in cfg:
            merged[key] = cfg[key]
        else:
            merged[key] = default
    return merged


# ---------------------------------------------------------------------------
# CSV ingestion


def read_series_csv(path, column: str | None,
                    date_column: str | None):
    """Read one numeric column (plus an optional date column) from a CSV.

    Both comma and semicolon delimiters are accepted, but not mixed within
    one file.  The header row is required.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CliError(f"{path}: empty file")

    header = lines[0]
    has_semi = ";" in header
    has_comma = "," in header
    if has_semi and has_comma:
        raise CliError(f"{path}: mixed delimiters in header")
    delim = ";" if has_semi else ","
    other = "," if has_semi else ";"
    for i, ln in enumerate(lines[1:], 2):
        if other in ln:
            raise CliError(f"{path}: line {i}: mixed delimiters "
                           f"(file uses {delim!r})")

    rows = list(csv.reader(lines, delimiter=delim))
    names = [c.strip() for c in rows[0]]
    if column is None:
        numeric_candidates = [n for n in names
                              if n != date_column and n.lower() not in
                              ("date", "time", "period")]
        if len(numeric_candidates) != 1:
            raise CliError(
                f"{path}: specify --column (columns found: {names})")
        column = numeric_candidates[0]
    if column not in names:
        raise CliError(f"{path}: no column {column!r} (have {names})")
    if date_column is not None and date_column not in names:
        raise CliError(f"{path}: no date column {date_column!r}")

    idx = names.index(column)
    didx = names.index(date_column) if date_column else None
    values = []
    dates = [] if date_column else None
    for i, row in enumerate(rows[1:], 2):
        if len(row) <= idx:
            raise CliError(f"{path}: line {i}: missing column {column!r}")
        cell = row[idx].strip()
        try:
            values.append(float(cell))
        except ValueError:
            raise CliError(
                f"{path}: line {i}: non-numeric value {cell!r} "
                f"in column {column!r}")
        if dates is not None:
            dates.append(row[didx].strip())
    return np.array(values), dates


def log_returns(prices: np.ndarray) -> np.ndarray:
    """log p_t - log p_{t-1}; drops exactly the first observation."""
    if np.any(prices <= 0):
        bad = int(np.flatnonzero(prices <= 0)[0])
        raise CliError(f"non-positive price at row {bad + 2} "
                       "(cannot take log returns)")
    return np.diff(np.log(prices))


# ---------------------------------------------------------------------------
# output writers


def _write_summary(out_dir: Path, est: SVolEstimator, fmt: str,
                   meta: dict) -> Path:
    rows = []
    for p in est.summary_.parameters:
        rows.append({
            "parameter": p.name, "mean": p.mean, "sd": p.sd,
            "q05": p.q05, "q50": p.q50, "q95": p.q95,
            "inefficiency": p.inefficiency, "ess": p.ess,
        })
    if fmt == "json":
        path = out_dir / "summary.json"
        with open(path, "w") as fh:
            json.dump({"meta": meta, "parameters": rows}, fh, indent=1)
    else:
        path = out_dir / "summary.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["parameter", "mean", "sd", "q05", "q50",
                             "q95", "inefficiency", "ess"])
            for r in rows:
                writer.writerow([
                    r["parameter"],
                    *(_fmt(r[k]) for k in ("mean", "sd", "q05", "q50",
                                           "q95")),
                    "" if r["inefficiency"] is None else _fmt(r["inefficiency"]),
                    "" if r["ess"] is None else _fmt(r["ess"]),
                ])
    return path


def _write_latent_path(out_dir: Path, est: SVolEstimator,
                       dates: list | None) -> Path:
    path = out_dir / "latent_path.csv"
    band = est.volatility_path_
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["t"] + (["date"] if dates else []) \
            + ["vol_pct_mean", "vol_pct_q05", "vol_pct_q95"]
        writer.writerow(header)
        for t in range(band.shape[0]):
            row = [t + 1]
            if dates:
                row.append(dates[t])
            row.extend(_fmt(v) for v in band[t])
            writer.writerow(row)
    return path


def _write_thinned_draws(out_dir: Path, est: SVolEstimator) -> Path:
    path = out_dir / "draws_thinned.csv"
    thinned = est.thinned_draws(max_rows=1000)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mu", "phi", "sigma"])
        for row in thinned:
            writer.writerow([_fmt(v) for v in row])
    return path


# ---------------------------------------------------------------------------
# subcommands

_FIT_SCHEMA = {
    "input": None, "column": None, "date_column": None,
    "input_kind": "price", "scheme": "gis-c", "draws": 20_000,
    "burnin": 2_000, "thin_latent": 20, "offset": 0.0, "demean": True,
    "b_mu": -10.0, "B_mu": 100.0, "a0": 20.0, "b0": 1.5, "B_sigma": 1.0,
    "gis_blocks": 2, "seed": 0, "out_dir": "svol-fit", "format": "csv",
}


def cmd_fit(args) -> int:
    cfg = _merge_config(args, _FIT_SCHEMA)
    if not cfg["input"]:
        raise CliError("fit: --input is required")
    if cfg["input_kind"] not in ("price", "return"):
        raise CliError("fit: input_kind must be 'price' or 'return'")
    if cfg["format"] not in ("csv", "json"):
        raise CliError("fit: format must be 'csv' or 'json'")

    values, dates = read_series_csv(cfg["input"], cfg["column"],
                                    cfg["date_column"])
    if cfg["input_kind"] == "price":
        returns = log_returns(values)
        if dates:
            dates = dates[1:]
    else:
        returns = values

    # A zero offset is right for real return series, but exact zeros (flat
    # prices) would hit log(0); fall back to the conventional guard value.
    offset = cfg["offset"]
    if offset == 0.0 and returns.size:
        centered = returns - returns.mean() if cfg["demean"] else returns
        if np.any(centered == 0.0):
            offset = 1e-3 if cfg["demean"] else 1e-4
            print(f"[fit] exact zero returns present; using offset {offset}",
                  file=sys.stderr)

    est = SVolEstimator(
        scheme=cfg["scheme"], draws=cfg["draws"], burnin=cfg["burnin"],
        thin_latent=cfg["thin_latent"], b_mu=cfg["b_mu"], B_mu=cfg["B_mu"],
        a0=cfg["a0"], b0=cfg["b0"], B_sigma=cfg["B_sigma"],
        demean=cfg["demean"], offset=offset,
        gis_blocks=cfg["gis_blocks"], random_state=cfg["seed"])
    try:
        est.fit(returns)
    except ValueError as exc:
        raise CliError(f"fit: {exc}")

    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {"n_obs": est.n_obs_, "scheme": cfg["scheme"],
            "draws": cfg["draws"], "burnin": cfg["burnin"],
            "seed": cfg["seed"], "input": str(cfg["input"]),
            "demean": bool(cfg["demean"]), "offset": cfg["offset"],
            "version": __version__}
    paths = [
        _write_summary(out_dir, est, cfg["format"], meta),
        _write_latent_path(out_dir, est, dates),
        _write_thinned_draws(out_dir, est),
    ]
    accept = " ".join(f"{k}={a}/{n}" for k, (a, n) in est.accept_.items())
    print(f"[fit] T={est.n_obs_} scheme={cfg['scheme']} "
          f"draws={cfg['draws']} accept: {accept}", file=sys.stderr)
    for p in paths:
        print(f"[fit] wrote {p}", file=sys.stderr)
    return 0


_BENCH_SCHEMA = {
    "phi_values": None, "sigma_values": None, "mu_true": -10.0, "T": 1000,
    "replications": 20, "schemes": ["c2", "nc2", "gis-c"], "draws": 20_000,
    "burnin": 2_000, "base_seed": 0, "gis_blocks": 2, "workers": None,
    "out_dir": "svol-bench", "format": "csv",
}


def cmd_bench(args) -> int:
    cfg = _merge_config(args, _BENCH_SCHEMA)
    if cfg["phi_values"] is None or cfg["sigma_values"] is None:
        raise CliError("bench: phi_values and sigma_values are required "
                       "(via --config)")
    try:
        spec = GridSpec(
            phi_values=tuple(float(v) for v in cfg["phi_values"]),
            sigma_values=tuple(float(v) for v in cfg["sigma_values"]),
            mu_true=float(cfg["mu_true"]), T=int(cfg["T"]),
            replications=int(cfg["replications"]),
            schemes=tuple(cfg["schemes"]), draws=int(cfg["draws"]),
            burnin=int(cfg["burnin"]), base_seed=int(cfg["base_seed"]),
            gis_blocks=int(cfg["gis_blocks"]))
    except ValueError as exc:
        raise CliError(f"bench: {exc}")

    workers = resolve_workers(cfg["workers"])
    print(f"[bench] {len(spec.cells)} cells x {spec.replications} reps x "
          f"{len(spec.schemes)} schemes, T={spec.T}, workers={workers}",
          file=sys.stderr)
    result = run_grid(spec, workers=workers, progress=True)

    out_dir = Path(cfg["out_dir"])
    formats = ("csv", "json") if cfg["format"] == "csv" else (cfg["format"],)
    written = export_grid(result, out_dir, formats=formats)
    table_path = out_dir / "grid_table.txt"
    table_path.write_text(render_grid_table(result))
    written.append(table_path)
    for p in written:
        print(f"[bench] wrote {p}", file=sys.stderr)
    return 0


_SIMULATE_SCHEMA = {
    "mu": -10.0, "phi": 0.95, "sigma": 0.2, "T": 1000, "seed": 0,
    "out": "simulated.csv",
}


def cmd_simulate(args) -> int:
    cfg = _merge_config(args, _SIMULATE_SCHEMA)
    try:
        params = Parameters(mu=cfg["mu"], phi=cfg["phi"], sigma=cfg["sigma"])
    except ValueError as exc:
        raise CliError(f"simulate: {exc}")
    if cfg["T"] < 1:
        raise CliError("simulate: T must be >= 1")
    rng = np.random.default_rng(cfg["seed"])
    y, path = simulate(params, cfg["T"], rng)
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        fh.write(f"# svol simulate mu={_fmt(cfg['mu'])} "
                 f"phi={_fmt(cfg['phi'])} sigma={_fmt(cfg['sigma'])} "
                 f"T={cfg['T']} seed={cfg['seed']}\n")
        fh.write(f"# h0_true={_fmt(path.states[0])}\n")
        writer = csv.writer(fh)
        writer.writerow(["t", "y", "h_true"])
        for t in range(cfg["T"]):
            writer.writerow([t + 1, _fmt(y[t]), _fmt(path.states[t + 1])])
    print(f"[simulate] wrote {out}", file=sys.stderr)
    return 0


_GEWEKE_SCHEMA = {
    "schemes": ["all"], "T": 50, "n_outer": 200_000, "threshold": 4.0,
    "seed": 0, "drop_h0_factor": False, "gis_blocks": 2,
}


def cmd_geweke(args) -> int:
    cfg = _merge_config(args, _GEWEKE_SCHEMA)
    schemes = cfg["schemes"]
    if schemes == ["all"] or schemes == "all":
        schemes = list(SCHEMES)
    for s in schemes:
        if s not in SCHEMES:
            raise CliError(f"geweke: unknown scheme {s!r}")

    all_ok = True
    for scheme in schemes:
        rng = np.random.default_rng(cfg["seed"])
        res = geweke_test(scheme, T=int(cfg["T"]), priors=None,
                          n_outer=int(cfg["n_outer"]), rng=rng,
                          gis_blocks=int(cfg["gis_blocks"]),
                          include_h0=not cfg["drop_h0_factor"])
        ok = res.passed(threshold=cfg["threshold"])
        all_ok = all_ok and ok
        detail = " ".join(f"{n}={z:+.2f}"
                          for n, z in zip(res.names, res.z_scores))
        print(f"{scheme:7s} {'PASS' if ok else 'FAIL'} "
              f"max|z|={res.max_abs_z:.2f}  {detail}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svol",
        description="Bayesian stochastic volatility estimation by MCMC")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a return or price series")
    fit.add_argument("--input", help="CSV file with a header row")
    fit.add_argument("--column", help="value column name")
    fit.add_argument("--date-column", dest="date_column",
                     help="date column passed through to outputs")
    fit.add_argument("--input-kind", dest="input_kind",
                     choices=("price", "return"),
                     help="interpret the column as prices (default) or returns")
    fit.add_argument("--scheme", choices=SCHEMES)
    fit.add_argument("--draws", type=int)
    fit.add_argument("--burnin", type=int)
    fit.add_argument("--thin-latent", dest="thin_latent", type=int)
    fit.add_argument("--offset", type=float)
    fit.add_argument("--no-demean", dest="demean", action="store_false",
                     default=None)
    fit.add_argument("--b-mu", dest="b_mu", type=float)
    fit.add_argument("--B-mu", dest="B_mu", type=float)
    fit.add_argument("--a0", type=float)
    fit.add_argument("--b0", type=float)
    fit.add_argument("--B-sigma", dest="B_sigma", type=float)
    fit.add_argument("--gis-blocks", dest="gis_blocks", type=int)
    fit.add_argument("--seed", type=int)
    fit.add_argument("--out-dir", dest="out_dir")
    fit.add_argument("--format", choices=("csv", "json"))
    fit.add_argument("--config")
    fit.set_defaults(func=cmd_fit)

    bench = sub.add_parser("bench", help="run a simulation benchmark grid")
    bench.add_argument("--config", help="grid spec (key = value file)")
    bench.add_argument("--workers", type=int)
    bench.add_argument("--out-dir", dest="out_dir")
    bench.add_argument("--format", choices=("csv", "json"))
    bench.add_argument("--base-seed", dest="base_seed", type=int)
    bench.set_defaults(func=cmd_bench)

    sim = sub.add_parser("simulate", help="emit a simulated dataset")
    sim.add_argument("--mu", type=float)
    sim.add_argument("--phi", type=float)
    sim.add_argument("--sigma", type=float)
    sim.add_argument("--T", dest="T", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out")
    sim.add_argument("--config")
    sim.set_defaults(func=cmd_simulate)

    gew = sub.add_parser("geweke", help="joint-distribution sampler check")
    gew.add_argument("--schemes", nargs="+",
                     help="scheme names or 'all'")
    gew.add_argument("--T", dest="T", type=int)
    gew.add_argument("--n-outer", dest="n_outer", type=int)
    gew.add_argument("--threshold", type=float)
    gew.add_argument("--seed", type=int)
    gew.add_argument("--gis-blocks", dest="gis_blocks", type=int)
    gew.add_argument("--drop-h0-factor", dest="drop_h0_factor",
                     action="store_true", default=None,
                     help="mutation hook: omit the initial-state factor "
                          "from every acceptance ratio (must fail)")
    gew.add_argument("--config")
    gew.set_defaults(func=cmd_geweke)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
