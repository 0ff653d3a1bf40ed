"""Command-line front end.

Subcommands
-----------
ser-sweep   SER versus photon budget (Monte Carlo, exact, asymptotic)
surface     union-bound SER over the (theta, beta) grid at one budget
optimize    closed-form versus numerically optimized design, JSON report
validate    special-function / channel self-checks

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 validation
failure.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import analysis as an
from .config import ConfigError, load_config
from .detector import run_monte_carlo, run_monte_carlo_baseline
from .link import OPTIMAL_THETA, LinkConfig, design_from_split, optimal_split
from .validation import format_table, run_validation

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3

SWEEP_COLUMNS = ("n_photons", "scheme", "beta", "theta_deg", "method", "ser",
                 "ci_half_width", "trials", "seed", "note")
SURFACE_COLUMNS = ("theta_deg", "beta", "method", "ser", "ci_half_width", "trials")

# declared optimizer agreement tolerances
THETA_TOL_DEG = 0.2
BETA_TOL = 0.01


def fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def provenance(cfg):
    """Config as recorded in outputs; the thread count cannot change results."""
    record = cfg.to_dict()
    record.pop("threads")
    return record


def _row_seed(master, index):
    """Per-row seed derived from the master seed and the row's sweep index."""
    state = np.random.SeedSequence(int(master), spawn_key=(int(index),)).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def render(command, cfg_dict, columns, rows, fmt_kind, trailer=None):
    """Serialize rows as CSV (with ``#`` header comments) or JSON."""
    trailer = trailer or {}
    if fmt_kind == "json":
        doc = {"command": command, "config": cfg_dict, "seed": cfg_dict.get("seed"),
               "columns": list(columns), "rows": [dict(zip(columns, r)) for r in rows],
               "metadata": trailer}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# qrd {command}\n")
    buf.write(f"# config: {json.dumps(cfg_dict, sort_keys=True)}\n")
    buf.write(f"# seed: {cfg_dict.get('seed')}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(v) for v in r])
    for key, meta in trailer.items():
        buf.write(f"# {key}: " + ",".join(f"{k}={fmt(v)}" for k, v in meta.items()) + "\n")
    return buf.getvalue()


def emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# ser-sweep
# ---------------------------------------------------------------------------

def sweep_rows(cfg):
    """Rows of the SER sweep plus a flag for numerical failures."""
    channel = cfg.channel
    rows, failed = [], False
    jobs = []
    for n in cfg.n_grid:
        for scheme in cfg.schemes():
            for mode in cfg.squeezing:
                beta = optimal_split(n) if mode == "optimal" else 0.0
                theta = OPTIMAL_THETA if scheme == "qrd" else 0.0
                jobs.append((float(n), scheme, beta, theta))

    for index, (n, scheme, beta, theta) in enumerate(jobs):
        design = design_from_split(n, beta, theta)
        base = (n, scheme, beta, math.degrees(theta))
        if cfg.wants("mc") and cfg.trials > 0:
            link = LinkConfig(cfg.eta, channel, design, seed=_row_seed(cfg.seed, index))
            runner = run_monte_carlo if scheme == "qrd" else run_monte_carlo_baseline
            est = runner(link, cfg.trials, block_size=cfg.block_size, threads=cfg.threads,
                         min_errors=cfg.min_errors or None)
            rows.append(base + ("mc", est.ser, est.ci_half_width, est.trials, cfg.seed, ""))
        if cfg.wants("exact"):
            try:
                if scheme == "qrd":
                    ser = an.ser_union_qrd(design, channel, cfg.eta)
                else:
                    ser = an.ser_baseline(design, channel, cfg.eta)
                note = ""
            except (an.QuadratureError, ArithmeticError, ValueError) as exc:
                ser, note, failed = float("nan"), f"error: {exc}", True
            rows.append(base + ("exact", ser, 0.0, 0, cfg.seed, note))
        if cfg.wants("asymptotic"):
            if design.alpha == 0.0:
                rows.append(base + ("asymptotic", float("nan"), 0.0, 0, cfg.seed,
                                    "undefined at zero displacement"))
                continue
            if scheme == "qrd":
                ser = an.asymptotic_ser_qrd(design, channel, cfg.eta)
            else:
                ser = an.asymptotic_ser_baseline(design, channel, cfg.eta)
            ok = an.asymptotic_reliable(design, channel, cfg.eta, scheme=scheme)
            rows.append(base + ("asymptotic", ser, 0.0, 0, cfg.seed,
                                "" if ok else "outside high-SNR regime"))
    return rows, failed


def cmd_ser_sweep(cfg, args):
    rows, failed = sweep_rows(cfg)
    emit(render("ser-sweep", provenance(cfg), SWEEP_COLUMNS, rows, args.format), args.out)
    return EXIT_NUMERIC if failed else EXIT_OK


# ---------------------------------------------------------------------------
# surface
# ---------------------------------------------------------------------------

def surface_rows(cfg):
    channel = cfg.channel
    n = float(cfg.surface_n)
    thetas = np.array(cfg.theta_grid)
    betas = np.array(cfg.beta_grid, dtype=float)
    grid = an.ser_union_qrd_grid(n, thetas, betas, channel, cfg.eta)
    rows = []
    for i, t in enumerate(cfg.theta_grid_deg):
        for j, b in enumerate(cfg.beta_grid):
            rows.append((float(t), float(b), "exact", float(grid[i, j]), 0.0, 0))

    if cfg.wants("mc") and cfg.trials > 0:
        index = 0
        for t in cfg.theta_grid:
            for b in cfg.beta_grid:
                link = LinkConfig(cfg.eta, channel, design_from_split(n, b, t),
                                  seed=_row_seed(cfg.seed, index))
                est = run_monte_carlo(link, cfg.trials, block_size=cfg.block_size,
                                      threads=cfg.threads, min_errors=cfg.min_errors or None)
                rows.append((math.degrees(t), float(b), "mc", est.ser, est.ci_half_width,
                             est.trials))
                index += 1

    ti, bj = np.unravel_index(np.argmin(grid), grid.shape)
    closed = an.optimal_design(n, channel, cfg.eta, mode="closed_form")
    trailer = {
        "grid_minimum": {"theta_deg": float(cfg.theta_grid_deg[ti]),
                         "beta": float(cfg.beta_grid[bj]), "ser": float(grid[ti, bj])},
        "closed_form_optimum": {"theta_deg": closed.theta_deg, "beta": closed.beta,
                                "ser": closed.ser},
    }
    return rows, trailer


def cmd_surface(cfg, args):
    rows, trailer = surface_rows(cfg)
    emit(render("surface", provenance(cfg), SURFACE_COLUMNS, rows, args.format, trailer),
         args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------

def _design_block(res):
    return {"theta_deg": res.theta_deg, "beta": res.beta, "r": res.r, "alpha": res.alpha,
            "ser_union": res.ser, "objective": res.objective, "converged": res.converged,
            "diagnostic": res.diagnostic}


def optimize_report(n_total, channel, eta):
    closed = an.optimal_design(n_total, channel, eta, mode="closed_form")
    closed_design = design_from_split(n_total, closed.beta, closed.theta)
    pair = an.pep_pair(closed_design, channel, eta)
    closed_block = dict(_design_block(closed), pep1=pair.pep1, pep2=pair.pep2)
    report = {
        "n_total": n_total,
        "channel": {"epsilon": channel.epsilon, "zeta": channel.zeta, "g": channel.g},
        "eta": eta,
        "closed_form": closed_block,
        "tolerances": {"theta_deg": THETA_TOL_DEG, "beta": BETA_TOL},
    }
    for objective in ("union", "minmax"):
        num = an.optimal_design(n_total, channel, eta, mode="numeric", objective=objective)
        d_theta = num.theta_deg - closed.theta_deg
        d_beta = num.beta - closed.beta
        report[f"numeric_{objective}"] = dict(
            _design_block(num),
            delta_theta_deg=d_theta,
            delta_beta=d_beta,
            agrees=abs(d_theta) <= THETA_TOL_DEG and abs(d_beta) <= BETA_TOL,
        )
    report["low_snr"] = (not an.asymptotic_reliable(closed_design, channel, eta)
                         if closed_design.alpha > 0 else True)
    return report


def cmd_optimize(cfg, args):
    n = args.n if args.n is not None else float(cfg.surface_n)
    report = optimize_report(float(n), cfg.channel, cfg.eta)
    emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(cfg, args):
    checks = run_validation(seed=cfg.seed)
    if args.format == "json":
        text = json.dumps([{"name": c.name, "observed": c.observed, "expected": c.expected,
                            "error": c.error, "tol": c.tol, "passed": c.passed}
                           for c in checks], indent=2) + "\n"
    else:
        text = format_table(checks) + "\n"
    emit(text, args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


COMMANDS = {
    "ser-sweep": cmd_ser_sweep,
    "surface": cmd_surface,
    "optimize": cmd_optimize,
    "validate": cmd_validate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="qrd", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON experiment file")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--threads", type=int, help="worker threads for Monte Carlo")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ser-sweep", parents=[common], help="SER versus photon budget")
    sub.add_parser("surface", parents=[common], help="SER over the (theta, beta) grid")
    opt = sub.add_parser("optimize", parents=[common], help="optimal design report")
    opt.add_argument("--n", type=float, help="photon budget (default: config surface_n)")
    opt.add_argument("--epsilon", type=float)
    opt.add_argument("--zeta", type=float)
    opt.add_argument("--eta", type=float)
    sub.add_parser("validate", parents=[common], help="special-function self-checks")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {k: getattr(args, k, None) for k in ("seed", "threads", "epsilon", "zeta", "eta")}
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except (an.QuadratureError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
