"""Config-driven Monte-Carlo risk experiments and their CSV output.

A config is a flat TOML document with dotted keys, e.g.::

    n = [32, 64]
    rho = 0.3
    seed = 7
    trials = 200
    graphon.kind = "planted"
    graphon.params = { k = 2, p = 1.0, q = 0.5 }
    latent = "grid"
    missing.kind = "uniform"
    missing.p = [1.0, 0.5]
    fit.k = 2
    fit.bounds = "known"

Each ``(n, p)`` grid cell runs ``trials`` independent replicates whose
seeds derive from ``(seed, cell index, trial index)``; rows come out in
``(cell, trial)`` order whatever the number of worker processes.
"""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import _search, rng
from .adaptive import (
    RHO_CAP, bin_labels, choose_k, estimate_sparsity, fit_adaptive, gamma_tradeoff,
)
from .errors import ConfigError, NetMLEError
from .fit import OBJECTIVES, FitConfig, fit_exact, fit_local_search
from .genmodel import grid_zeta, make_graphon, sample_adjacency, sample_zeta, theta_from_graphon
from .missing import (
    design_to_pi, dyad_design, mask_exo_centered, sample_mask, sample_omega, uniform_design,
)
from .netcore import frob, frob_weighted
from .oracleref import oracle_theta_tilde

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

BOUNDS_MODES = ("known", "adaptive", "tradeoff")
MISSING_KINDS = ("uniform", "dyad", "exo")


@dataclass(frozen=True)
class ExperimentConfig:
    graphon_kind: str
    graphon_params: dict
    rho: float
    n_grid: tuple
    p_grid: tuple = (1.0,)
    latent: str = "uniform"
    missing_kind: str = "uniform"
    missing_P: tuple | None = None
    sampled_nodes: tuple | None = None
    k: int | None = None
    alpha: float | None = None
    bounds: str = "known"
    gamma: float | None = None
    rho_fit: float | None = None
    method: str = "local"
    objective: str = "kl"
    restarts: int = 10
    max_sweeps: int = 100
    oracle: bool = True
    trials: int = 1
    master_seed: int = 0
    output: str | None = None
    timing: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.n_grid:
            raise ConfigError("the n grid is empty")
        if not self.p_grid:
            raise ConfigError("the p grid is empty")
        min_n = 4 if self.bounds == "adaptive" else 2
        for n in self.n_grid:
            if not isinstance(n, int) or n < min_n:
                raise ConfigError(f"every n must be an integer >= {min_n}, got {n!r}")
        for p in self.p_grid:
            if not (0.0 <= p <= 1.0):
                raise ConfigError(f"observation probability {p} outside [0, 1]")
        if not (0.0 < self.rho <= 1.0):
            raise ConfigError(f"rho must lie in (0, 1], got {self.rho}")
        if (self.k is None) == (self.alpha is None):
            raise ConfigError("exactly one of fit.k and fit.alpha must be set")
        if self.k is not None and self.k < 1:
            raise ConfigError(f"fit.k must be >= 1, got {self.k}")
        if self.bounds not in BOUNDS_MODES:
            raise ConfigError(f"fit.bounds must be one of {BOUNDS_MODES}")
        if self.missing_kind not in MISSING_KINDS:
            raise ConfigError(f"missing.kind must be one of {MISSING_KINDS}")
        if self.missing_kind == "dyad" and self.missing_P is None:
            raise ConfigError("missing.kind = 'dyad' needs missing.P")
        if self.missing_kind == "exo" and self.sampled_nodes is None:
            raise ConfigError("missing.kind = 'exo' needs missing.sampled_nodes")
        if self.method not in ("local", "exact"):
            raise ConfigError("fit.method must be 'local' or 'exact'")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"fit.objective must be one of {OBJECTIVES}")
        if self.latent not in ("uniform", "grid"):
            raise ConfigError("latent must be 'uniform' or 'grid'")
        try:
            make_graphon(self.graphon_kind, dict(self.graphon_params))
        except NetMLEError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def cells(self):
        """Grid cells ``(n, p)`` in row order; ``p`` is ``None`` unless the design is uniform."""
        ps = self.p_grid if self.missing_kind == "uniform" else (None,)
        return [(n, p) for n in self.n_grid for p in ps]


def _as_tuple(v):
    if v is None:
        return None
    return tuple(v) if isinstance(v, (list, tuple)) else (v,)


def _flatten(doc, prefix=""):
    out = {}
    for key, val in doc.items():
        name = f"{prefix}{key}"
        # graphon.params stays a table
        if isinstance(val, dict) and name != "graphon.params":
            out.update(_flatten(val, name + "."))
        else:
            out[name] = val
    return out


_KEYS = {
    "graphon.kind": "graphon_kind", "graphon.params": "graphon_params", "rho": "rho",
    "n": "n_grid", "missing.p": "p_grid", "latent": "latent", "missing.kind": "missing_kind",
    "missing.P": "missing_P", "missing.sampled_nodes": "sampled_nodes", "fit.k": "k",
    "fit.alpha": "alpha", "fit.bounds": "bounds", "fit.gamma": "gamma", "fit.rho": "rho_fit",
    "fit.method": "method", "fit.objective": "objective", "fit.restarts": "restarts",
    "fit.max_sweeps": "max_sweeps", "fit.oracle": "oracle", "trials": "trials",
    "seed": "master_seed", "output": "output", "timing": "timing",
}


def config_from_mapping(doc: dict) -> ExperimentConfig:
    flat = _flatten(doc)
    unknown = sorted(set(flat) - set(_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kw = {_KEYS[k]: v for k, v in flat.items()}
    for name in ("graphon_kind", "rho", "n_grid"):
        if name not in kw:
            key = next(k for k, v in _KEYS.items() if v == name)
            raise ConfigError(f"missing required config key {key!r}")
    kw["n_grid"] = _as_tuple(kw["n_grid"])
    kw["p_grid"] = _as_tuple(kw.get("p_grid", 1.0))
    kw["graphon_params"] = dict(kw.get("graphon_params", {}))
    if "missing_P" in kw:
        kw["missing_P"] = tuple(tuple(float(v) for v in row) for row in kw["missing_P"])
    if "sampled_nodes" in kw:
        kw["sampled_nodes"] = tuple(int(v) for v in kw["sampled_nodes"])
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return config_from_mapping(doc)


# -- report ----------------------------------------------------------------

@dataclass
class RiskRow:
    n: int
    p: float | None
    rho: float
    k: int | None
    trial: int
    frob_risk: float | None = None
    frob_risk_weighted: float | None = None
    kl_oracle_gap: float | None = None
    objective: float | None = None
    wall_time: float | None = None
    design: str = ""
    status: str = "ok"


COLUMNS = tuple(f.name for f in fields(RiskRow))
_INT_COLS = {"n", "k", "trial"}
_STR_COLS = {"design", "status"}


@dataclass
class RiskReport:
    rows: list = field(default_factory=list)

    def ok_rows(self):
        return [r for r in self.rows if r.status == "ok"]


def _design_label(cfg):
    if cfg.missing_kind == "exo":
        return "dependent-mask"
    return cfg.missing_kind


def _run_trial(cfg: ExperimentConfig, cell: int, trial: int):
    """One replicate; returns a RiskRow, or an error message."""
    n, p = cfg.cells[cell]
    t0 = time.perf_counter()
    seed = rng.derive_seed(cfg.master_seed, cell, trial)
    row = RiskRow(n=n, p=p, rho=cfg.rho, k=cfg.k, trial=trial, design=_design_label(cfg))
    try:
        w = make_graphon(cfg.graphon_kind, dict(cfg.graphon_params))
        zeta = grid_zeta(n) if cfg.latent == "grid" else sample_zeta(n, seed)
        theta = theta_from_graphon(w, cfg.rho, zeta)
        a = sample_adjacency(theta, seed)
        if cfg.missing_kind == "uniform":
            pi = design_to_pi(uniform_design(p), n)
            x = sample_mask(pi, seed)
        elif cfg.missing_kind == "dyad":
            P = np.array(cfg.missing_P)
            pi = design_to_pi(dyad_design(P, bin_labels(zeta, P.shape[0])), n)
            x = sample_mask(pi, seed)
            row.p = float(P.min())
        else:
            x = mask_exo_centered(n, cfg.sampled_nodes)
            pi = x
            row.p = float(x.upper.mean())

        fit_seed = rng.derive_seed(seed, rng.FIT)
        if cfg.bounds == "adaptive":
            omega = sample_omega(n, seed)
            k = cfg.k
            if k is None:
                rho_hat = min(estimate_sparsity(a, omega, n).rho_hat, RHO_CAP)
                k = choose_k(n, rho_hat, cfg.alpha)
            res = fit_adaptive(a, omega, k, x=x, restarts=cfg.restarts, max_sweeps=cfg.max_sweeps,
                               seed=fit_seed, objective=cfg.objective, exact=cfg.method == "exact")
        else:
            hi = cfg.rho_fit if cfg.rho_fit is not None else float(theta.upper.max())
            k = cfg.k if cfg.k is not None else choose_k(n, hi, cfg.alpha)
            if cfg.bounds == "known":
                lo = cfg.gamma if cfg.gamma is not None else float(theta.upper.min())
            else:
                lo = min(gamma_tradeoff(n, k, hi), hi)
            fcfg = FitConfig(k, lo, hi, restarts=cfg.restarts, max_sweeps=cfg.max_sweeps,
                             seed=fit_seed, objective=cfg.objective)
            res = (fit_exact if cfg.method == "exact" else fit_local_search)(a, x, fcfg)
        row.k = k
        row.frob_risk = frob(theta, res.theta_hat)
        row.frob_risk_weighted = frob_weighted(theta, res.theta_hat, pi)
        row.objective = res.objective_value
        if cfg.oracle and k**n <= _search.ENUMERATION_BUDGET:
            row.kl_oracle_gap = oracle_theta_tilde(theta, pi, k).kl_to_truth
    except NetMLEError as exc:
        return f"{type(exc).__name__}: {exc}"
    if cfg.timing:
        row.wall_time = time.perf_counter() - t0
    return row


def _task(args):
    return _run_trial(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> RiskReport:
    """Run every grid cell and trial; a failing trial aborts the rest of its cell.

    Aborted trials are reported as rows whose ``status`` holds the error.
    """
    tasks = [(cfg, c, t) for c in range(len(cfg.cells)) for t in range(cfg.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        outcomes = [_task(t) for t in tasks]

    rows = []
    for c, (n, p) in enumerate(cfg.cells):
        error = None
        for t in range(cfg.trials):
            out = outcomes[c * cfg.trials + t]
            if error is None and isinstance(out, str):
                error = out
            if error is None:
                rows.append(out)
            else:
                rows.append(RiskRow(n=n, p=p, rho=cfg.rho, k=cfg.k, trial=t,
                                    design=_design_label(cfg), status=f"error: {error}"))
    return RiskReport(rows)


# -- CSV -------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def format_csv(report: RiskReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in report.rows:
        d = asdict(row)
        writer.writerow([_fmt(d[c]) for c in COLUMNS])
    return buf.getvalue()


def emit_csv(report: RiskReport, path) -> None:
    try:
        Path(path).write_text(format_csv(report))
    except OSError as exc:
        raise OSError(f"cannot write risk report to {path}: {exc}") from exc


def _parse(col, text):
    if col in _STR_COLS:
        return text
    if text == "":
        return None
    return int(text) if col in _INT_COLS else float(text)


def parse_csv(text: str) -> RiskReport:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != COLUMNS:
        raise ValueError(f"unexpected risk report header: {header}")
    rows = [RiskRow(**{c: _parse(c, v) for c, v in zip(COLUMNS, rec)}) for rec in reader if rec]
    return RiskReport(rows)


def read_csv(path) -> RiskReport:
    return parse_csv(Path(path).read_text())


# -- rate shape ------------------------------------------------------------

@dataclass(frozen=True)
class RateCheck:
    axis: str
    values: tuple
    mean_risk: tuple
    slope: float
    ratios: tuple


def rate_check(report: RiskReport, axis: str, column: str = "frob_risk") -> RateCheck:
    """Log-log slope of mean risk against ``axis`` and adjacent-cell risk ratios.

    Ratios are ``mean(v_{i+1}) / mean(v_i)`` over axis values sorted
    ascending.
    """
    if axis not in ("n", "p"):
        raise ValueError(f"axis must be 'n' or 'p', got {axis!r}")
    groups = {}
    for r in report.ok_rows():
        v = getattr(r, axis)
        val = getattr(r, column)
        if v is not None and val is not None:
            groups.setdefault(v, []).append(val)
    if len(groups) < 2:
        raise ValueError(f"rate check needs >= 2 distinct values of {axis}, got {len(groups)}")
    values = sorted(groups)
    means = [float(np.mean(groups[v])) for v in values]
    if min(means) <= 0 or min(values) <= 0:
        raise ValueError("rate check needs positive axis values and mean risks")
    slope = float(np.polyfit(np.log(values), np.log(means), 1)[0])
    ratios = tuple(means[i + 1] / means[i] for i in range(len(means) - 1))
    return RateCheck(axis, tuple(values), tuple(means), slope, ratios)


def with_overrides(cfg: ExperimentConfig, seed=None, output=None) -> ExperimentConfig:
    kw = {}
    if seed is not None:
        kw["master_seed"] = seed
    if output is not None:
        kw["output"] = output
    return replace(cfg, **kw) if kw else cfg


__all__ = [
    "ExperimentConfig", "RiskRow", "RiskReport", "RateCheck", "COLUMNS", "load_config",
    "config_from_mapping", "run_experiment", "format_csv", "emit_csv", "parse_csv", "read_csv",
    "rate_check", "with_overrides",
]
