"""Command-line front end.

Exit codes: 0 on success, 2 on configuration or usage errors, 3 on
runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .adaptive import RHO_CAP, choose_k, estimate_sparsity, fit_adaptive
from .errors import ConfigError, NetMLEError
from .experiment import (
    config_from_mapping, emit_csv, format_csv, load_config, rate_check, read_csv, run_experiment,
    with_overrides,
)
from .fit import FitConfig, fit_exact, fit_local_search, format_fit_result
from .genmodel import grid_zeta, make_graphon, sample_adjacency, sample_zeta, theta_from_graphon
from .missing import design_to_pi, mask_exo_centered, sample_mask, sample_omega, uniform_design
from .netcore import SymZeroDiagMatrix, read_symtri, write_symtri
from .oracleref import run_audit

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_x(path, n):
    if path is None:
        return SymZeroDiagMatrix.constant(n, 1.0)
    x = read_symtri(path)
    if x.n != n:
        raise ConfigError(f"mask {path} has n={x.n}, adjacency has n={n}")
    return x


def _write_or_print(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_generate(args):
    if args.config:
        cfg = load_config(args.config)
    else:
        if args.graphon is None:
            raise ConfigError("generate needs --config or --graphon")
        cfg = config_from_mapping({
            "graphon": {"kind": args.graphon, "params": json.loads(args.params or "{}")},
            "rho": args.rho if args.rho is not None else 1.0,
            "n": args.n if args.n is not None else 10,
            "fit": {"k": 1},
        })
    n = args.n if args.n is not None else cfg.n_grid[0]
    seed = args.seed if args.seed is not None else cfg.master_seed
    w = make_graphon(cfg.graphon_kind, dict(cfg.graphon_params))
    zeta = grid_zeta(n) if cfg.latent == "grid" else sample_zeta(n, seed)
    theta = theta_from_graphon(w, cfg.rho, zeta)
    a = sample_adjacency(theta, seed)
    if cfg.missing_kind == "exo":
        x = mask_exo_centered(n, cfg.sampled_nodes)
        pi = x
    else:
        p = args.p if args.p is not None else cfg.p_grid[0]
        pi = design_to_pi(uniform_design(p), n)
        x = sample_mask(pi, seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, m in (("theta", theta), ("a", a), ("x", x), ("pi", pi)):
        write_symtri(m, out / f"{name}.symtri")
    np.savetxt(out / "zeta.txt", zeta.zeta, fmt="%.17g")
    print(f"wrote theta, a, x, pi (n={n}) to {out}")


def cmd_fit(args):
    a = read_symtri(args.input_a)
    x = _load_x(args.input_x, a.n)
    try:
        cfg = FitConfig(args.k, args.gamma, args.rho, restarts=args.restarts,
                        max_sweeps=args.max_sweeps, seed=args.seed, objective=args.objective)
    except NetMLEError as exc:
        raise ConfigError(str(exc)) from None
    res = (fit_exact if args.exact else fit_local_search)(a, x, cfg)
    _write_or_print(format_fit_result(res), args.out)


def cmd_adaptive(args):
    a = read_symtri(args.input_a)
    x = _load_x(args.input_x, a.n)
    omega = sample_omega(a.n, args.omega_seed)
    k = args.k
    if k is None:
        rho_hat = min(estimate_sparsity(a, omega, a.n).rho_hat, RHO_CAP)
        k = choose_k(a.n, rho_hat, args.alpha)
    res = fit_adaptive(a, omega, k, x=x, restarts=args.restarts, max_sweeps=args.max_sweeps,
                       seed=args.seed, objective=args.objective, exact=args.exact)
    est = res.diagnostics["sparsity"]
    text = format_fit_result(res)
    text += f"d_hat {est.d_hat!r}\nrho_hat {est.rho_hat!r}\ngamma_hat {est.gamma_hat!r}\n"
    _write_or_print(text, args.out)


def cmd_audit(args):
    lemmas = ("kl_frobenius", "threshold") if args.lemma == "both" else (args.lemma,)
    rows = run_audit(args.trials, args.n, args.k, args.seed, gamma=args.gamma, lemmas=lemmas)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "lemma", "lhs", "rhs", "holds"])
        for r in rows:
            writer.writerow([r["trial"], r["lemma"], format(r["lhs"], ".12g"),
                             format(r["rhs"], ".12g"), str(r["holds"]).lower()])
    finally:
        if fh is not sys.stdout:
            fh.close()
    failed = sum(not r["holds"] for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} checks hold", file=sys.stderr)
    return 0 if failed == 0 else EXIT_RUNTIME


def cmd_experiment(args):
    cfg = with_overrides(load_config(args.config), seed=args.seed, output=args.out)
    report = run_experiment(cfg, jobs=args.jobs)
    if cfg.output:
        emit_csv(report, cfg.output)
    else:
        sys.stdout.write(format_csv(report))


def cmd_rate_check(args):
    res = rate_check(read_csv(args.input), args.axis, column=args.column)
    print(f"axis {res.axis}")
    for v, m in zip(res.values, res.mean_risk):
        print(f"{v:g}\t{m:.12g}")
    print(f"slope {res.slope:.6f}")
    print("ratios " + " ".join(f"{r:.6f}" for r in res.ratios))


def build_parser():
    p = argparse.ArgumentParser(prog="netmle", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample theta, A, X and Pi to symtri files")
    g.add_argument("--config")
    g.add_argument("--graphon", help="builtin graphon kind when no config is given")
    g.add_argument("--params", help="graphon parameters as JSON")
    g.add_argument("--rho", type=float)
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=float, help="uniform observation probability")
    g.add_argument("--seed", type=int)
    g.add_argument("--out-dir", required=True)
    g.set_defaults(func=cmd_generate)

    def fit_opts(sp):
        sp.add_argument("--input-a", required=True)
        sp.add_argument("--input-x")
        sp.add_argument("--objective", choices=("kl", "ls"), default="kl")
        sp.add_argument("--restarts", type=int, default=10)
        sp.add_argument("--max-sweeps", type=int, default=100)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--exact", action="store_true")
        sp.add_argument("--out")

    f = sub.add_parser("fit", help="restricted maximum likelihood fit")
    fit_opts(f)
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--gamma", type=float, required=True)
    f.add_argument("--rho", type=float, required=True)
    f.set_defaults(func=cmd_fit)

    ad = sub.add_parser("adaptive", help="fit with bounds estimated from a hold-out pair set")
    fit_opts(ad)
    ad.add_argument("--omega-seed", type=int, default=0)
    grp = ad.add_mutually_exclusive_group(required=True)
    grp.add_argument("--k", type=int)
    grp.add_argument("--alpha", type=float)
    ad.set_defaults(func=cmd_adaptive)

    au = sub.add_parser("audit", help="check the technical inequalities on random instances")
    au.add_argument("--trials", type=int, default=100)
    au.add_argument("--n", type=int, default=6)
    au.add_argument("--k", type=int, default=2)
    au.add_argument("--seed", type=int, default=0)
    au.add_argument("--gamma", type=float, default=0.1)
    au.add_argument("--lemma", choices=("kl_frobenius", "threshold", "both"), default="both")
    au.add_argument("--out")
    au.set_defaults(func=cmd_audit)

    ex = sub.add_parser("experiment", help="run a Monte-Carlo risk experiment")
    ex.add_argument("--config", required=True)
    ex.add_argument("--seed", type=int)
    ex.add_argument("--out")
    ex.add_argument("--jobs", type=int, default=1)
    ex.set_defaults(func=cmd_experiment)

    rc = sub.add_parser("rate-check", help="log-log slope of mean risk from a risk CSV")
    rc.add_argument("--input", required=True)
    rc.add_argument("--axis", choices=("n", "p"), required=True)
    rc.add_argument("--column", default="frob_risk")
    rc.set_defaults(func=cmd_rate_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NetMLEError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
