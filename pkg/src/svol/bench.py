"""Simulation-study driver: grids of true parameters, replicated data,
every scheme on the same data, medians of inefficiency factors.

Reproducibility contract: the generator for (cell i, replication j,
scheme s) is derived from SeedSequence([base_seed, i, j, k]) where k is 0
for data generation and 1 + the scheme's global index otherwise.  Work
scheduling therefore cannot change any stochastic output; wall-clock
timing columns are the only fields outside the bit-identity guarantee.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticError, inefficiency_factor
from .model import Dataset, Parameters, Priors, linearize, simulate
from .samplers import (
    SCHEMES,
    ChainError,
    ChainState,
    SamplerConfig,
    run_chain,
)

__all__ = [
    "GridSpec",
    "CellRecord",
    "GridResult",
    "child_rng",
    "cell_priors",
    "simulate_cell_dataset",
    "run_grid",
    "export_grid",
    "import_grid_medians",
    "render_grid_table",
    "resolve_workers",
]

QUANTITIES = ("if_mu", "if_phi", "if_sigma", "seconds_per_1000")


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, then the SV_THREADS variable, then the CPU count."""
    if workers is not None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        return workers
    env = os.environ.get("SV_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def child_rng(base_seed: int, *key: int) -> np.random.Generator:
    """Independent generator derived from (base_seed, key...) only."""
    return np.random.default_rng(np.random.SeedSequence([base_seed, *key]))


@dataclass(frozen=True)
class GridSpec:
    """One benchmark run: cells are the product of phi and sigma values."""

    phi_values: tuple[float, ...]
    sigma_values: tuple[float, ...]
    mu_true: float = -10.0
    T: int = 1000
    replications: int = 20
    schemes: tuple[str, ...] = ("c2", "nc2", "gis-c")
    draws: int = 20_000
    burnin: int = 2_000
    base_seed: int = 0
    gis_blocks: int = 2

    def __post_init__(self):
        object.__setattr__(self, "phi_values", tuple(self.phi_values))
        object.__setattr__(self, "sigma_values", tuple(self.sigma_values))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        for phi in self.phi_values:
            if not abs(phi) < 1:
                raise ValueError(f"phi_true {phi} outside (-1, 1)")
        for sig in self.sigma_values:
            if not sig > 0:
                raise ValueError(f"sigma_true {sig} must be > 0")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")
        if self.base_seed < 0:
            raise ValueError("base_seed must be >= 0")

    @property
    def cells(self) -> list[tuple[float, float]]:
        """(phi_true, sigma_true) pairs, phi varying fastest."""
        return [(phi, sig) for sig in self.sigma_values
                for phi in self.phi_values]

    @classmethod
    def full_protocol(cls, base_seed: int = 0) -> "GridSpec":
        """The full-scale simulation protocol (overnight scale, not CI)."""
        return cls(
            phi_values=(0.0, 0.5, 0.8, 0.9, 0.95, 0.96, 0.97, 0.98, 0.99),
            sigma_values=(0.1, 0.2, 0.3, 0.4, 0.5),
            mu_true=-10.0,
            T=5000,
            replications=500,
            schemes=("c1", "c2", "c3", "nc2", "nc3", "gis-c", "gis-nc"),
            draws=100_000,
            burnin=10_000,
            base_seed=base_seed,
        )


def cell_priors(spec: GridSpec, phi_true: float, sigma_true: float) -> Priors:
    """Truth-centered priors used for every grid cell."""
    return Priors(b_mu=spec.mu_true, B_mu=10.0, a0=40.0,
                  b0=80.0 / (1.0 + phi_true) - 40.0,
                  B_sigma=sigma_true ** 2)


def simulate_cell_dataset(spec: GridSpec, cell_index: int,
                          replication: int) -> tuple[Dataset, Parameters]:
    """The dataset every scheme in (cell, replication) shares."""
    phi_true, sigma_true = spec.cells[cell_index]
    truth = Parameters(mu=spec.mu_true, phi=phi_true, sigma=sigma_true)
    rng = child_rng(spec.base_seed, cell_index, replication, 0)
    y, _ = simulate(truth, spec.T, rng)
    return linearize(y, offset_c=0.0), truth


@dataclass(frozen=True)
class CellRecord:
    cell_index: int
    phi_true: float
    sigma_true: float
    replication: int
    scheme: str
    if_mu: float
    if_phi: float
    if_sigma: float
    seconds_per_1000: float
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)


@dataclass
class GridResult:
    spec: GridSpec
    records: list[CellRecord] = field(default_factory=list)

    def median(self, phi_true: float, sigma_true: float, scheme: str,
               quantity: str) -> float:
        """Median over the successful replications of one cell/scheme."""
        vals = [getattr(r, quantity) for r in self.records
                if (r.phi_true == phi_true and r.sigma_true == sigma_true
                    and r.scheme == scheme and not r.failed)]
        if not vals:
            return math.nan
        return float(np.median(vals))

    def counts(self, phi_true: float, sigma_true: float,
               scheme: str) -> tuple[int, int]:
        ok = sum(1 for r in self.records
                 if r.phi_true == phi_true and r.sigma_true == sigma_true
                 and r.scheme == scheme and not r.failed)
        bad = sum(1 for r in self.records
                  if r.phi_true == phi_true and r.sigma_true == sigma_true
                  and r.scheme == scheme and r.failed)
        return ok, bad

    def median_rows(self) -> list[dict]:
        """Stable-ordered rows: cell x scheme x quantity."""
        rows = []
        for ci, (phi, sig) in enumerate(self.spec.cells):
            for scheme in self.spec.schemes:
                ok, bad = self.counts(phi, sig, scheme)
                for q in QUANTITIES:
                    rows.append({
                        "phi_true": phi,
                        "sigma_true": sig,
                        "scheme": scheme,
                        "quantity": q,
                        "median": self.median(phi, sig, scheme, q),
                        "n_ok": ok,
                        "n_failed": bad,
                    })
        return rows


def _run_task(spec: GridSpec, cell_index: int, replication: int,
              scheme: str) -> CellRecord:
    phi_true, sigma_true = spec.cells[cell_index]
    data, truth = simulate_cell_dataset(spec, cell_index, replication)
    priors = cell_priors(spec, phi_true, sigma_true)
    rng = child_rng(spec.base_seed, cell_index, replication,
                    1 + SCHEMES.index(scheme))
    cfg = SamplerConfig(scheme=scheme, draws=spec.draws, burnin=spec.burnin,
                        gis_blocks=spec.gis_blocks)
    base = dict(cell_index=cell_index, phi_true=phi_true,
                sigma_true=sigma_true, replication=replication,
                scheme=scheme)
    try:
        init = ChainState.initial(data, priors, cfg, rng, params=truth)
        out = run_chain(data, priors, cfg, init)
        return CellRecord(
            if_mu=inefficiency_factor(out.column("mu")),
            if_phi=inefficiency_factor(out.column("phi")),
            if_sigma=inefficiency_factor(out.column("sigma")),
            seconds_per_1000=out.seconds_per_1000,
            **base)
    except (ChainError, DiagnosticError, ValueError) as exc:
        return CellRecord(if_mu=math.nan, if_phi=math.nan, if_sigma=math.nan,
                          seconds_per_1000=math.nan, error=str(exc), **base)


def run_grid(spec: GridSpec, workers: int | None = None,
             progress: bool = False) -> GridResult:
    """Run every (cell, replication, scheme) chain and aggregate.

    Chains run concurrently; failed chains are recorded and excluded from
    medians without aborting the grid.
    """
    n_workers = resolve_workers(workers)
    tasks = [(ci, rep, scheme)
             for ci in range(len(spec.cells))
             for rep in range(spec.replications)
             for scheme in spec.schemes]
    records: dict[tuple, CellRecord] = {}
    total = len(tasks)

    def work(task):
        ci, rep, scheme = task
        rec = _run_task(spec, ci, rep, scheme)
        if progress:
            phi, sig = spec.cells[ci]
            status = "FAIL" if rec.failed else "ok"
            print(f"[bench] cell(phi={phi}, sigma={sig}) rep={rep} "
                  f"{scheme}: {status} ({len(records) + 1}/{total})",
                  file=sys.stderr, flush=True)
        return task, rec

    if n_workers == 1:
        for task in tasks:
            key, rec = work(task)
            records[key] = rec
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for key, rec in pool.map(work, tasks):
                records[key] = rec

    ordered = [records[t] for t in tasks]
    return GridResult(spec=spec, records=ordered)


# ---------------------------------------------------------------------------
# export / import


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def export_grid(result: GridResult, out_dir, formats=("csv", "json")) -> list:
    """Write grid_result.csv (median rows) and grid_result.json (medians
    plus raw per-replication records)."""
    import pathlib

    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    rows = result.median_rows()
    if "csv" in formats:
        path = out_dir / "grid_result.csv"
        try:
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["phi_true", "sigma_true", "scheme",
                                 "quantity", "median", "n_ok", "n_failed"])
                for row in rows:
                    writer.writerow([_fmt(row[k]) for k in
                                     ("phi_true", "sigma_true", "scheme",
                                      "quantity", "median", "n_ok",
                                      "n_failed")])
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    if "json" in formats:
        path = out_dir / "grid_result.json"
        payload = {
            "spec": {
                "phi_values": list(result.spec.phi_values),
                "sigma_values": list(result.spec.sigma_values),
                "mu_true": result.spec.mu_true,
                "T": result.spec.T,
                "replications": result.spec.replications,
                "schemes": list(result.spec.schemes),
                "draws": result.spec.draws,
                "burnin": result.spec.burnin,
                "base_seed": result.spec.base_seed,
            },
            "medians": rows,
            "records": [
                {
                    "phi_true": r.phi_true, "sigma_true": r.sigma_true,
                    "replication": r.replication, "scheme": r.scheme,
                    "if_mu": r.if_mu, "if_phi": r.if_phi,
                    "if_sigma": r.if_sigma,
                    "seconds_per_1000": r.seconds_per_1000,
                    "error": r.error,
                }
                for r in result.records
            ],
        }
        try:
            with open(path, "w") as fh:
                json.dump(payload, fh, indent=1)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written


def import_grid_medians(csv_path) -> dict[tuple, float]:
    """Read back an exported CSV as {(phi, sigma, scheme, quantity): median}."""
    out = {}
    with open(csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (float(row["phi_true"]), float(row["sigma_true"]),
                   row["scheme"], row["quantity"])
            out[key] = float(row["median"])
    return out


def render_grid_table(result: GridResult) -> str:
    """Text tables in the benchmark layout: one block per scheme and
    parameter, sigma_true down the rows, phi_true across the columns."""
    spec = result.spec
    buf = io.StringIO()
    for quantity, label in (("if_mu", "IF mu"), ("if_phi", "IF phi"),
                            ("if_sigma", "IF sigma")):
        for scheme in spec.schemes:
            print(f"{label}  [{scheme}]  (medians of "
                  f"{spec.replications} replications, T={spec.T}, "
                  f"M={spec.draws})", file=buf)
            header = "sigma\\phi " + "".join(
                f"{phi:>9g}" for phi in spec.phi_values)
            print(header, file=buf)
            for sig in spec.sigma_values:
                cells = "".join(
                    f"{result.median(phi, sig, scheme, quantity):>9.1f}"
                    for phi in spec.phi_values)
                print(f"{sig:>9g} " + cells, file=buf)
            print("", file=buf)
    return buf.getvalue()
