"""Command-line entry point: ``levy-smooth symbol|decompose|solve|verify|sweep``.

Exit codes: 0 all checks passed, 1 a check failed, 2 configuration error,
3 numerical failure (CFL violation, blow-up, quadrature non-convergence).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as lsio
from .grid import FrequencyLattice, lp_norm, resample
from .harness import (
    EstimateReport, ScheduleError, check_vanishing_viscosity, write_reports, write_summary,
)
from .kernels import (
    DivergentIntegralError, MalformedSpecError, NonConvergenceError, UnsupportedFormError,
    spec_from_config, symbol_grid, symbol_lower_bound_fit,
)
from .littlewood_paley import (
    LatticeTooSmallError, besov_norm, build_partition, decompose, reconstruction_residual,
)
from .presets import PRESETS, run_preset
from .solver import BlowUpError, CFLError, convergence_from_finals, solve, worker_count
from .svg import line_plot

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
CONFIG_ERRORS = (lsio.ConfigError, MalformedSpecError, UnsupportedFormError, ScheduleError,
                 LatticeTooSmallError)
NUMERIC_ERRORS = (CFLError, BlowUpError, NonConvergenceError, DivergentIntegralError)


def _out_dir(args, exp=None) -> Path:
    out = Path(args.out or (exp.out if exp is not None else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _experiment(args):
    if not args.config:
        raise lsio.ConfigError("--config is required for this subcommand")
    return lsio.experiment_from_config(args.config, args.seed)


def _want_svg(args, exp=None) -> bool:
    return bool(args.svg or (exp is not None and exp.svg))


# --------------------------------------------------------------------------
# symbol


def _symbol_inputs(path):
    """Lattice plus one operator spec per listed ``lambda`` value."""
    cp = lsio.read_config(path)
    if not cp.has_section("operator"):
        raise lsio.ConfigError(f"{path}: missing [operator] section")
    sec = dict(cp["operator"])
    grid = dict(cp["grid"]) if cp.has_section("grid") else {}
    try:
        lat = FrequencyLattice(int(grid.get("d", 1)), int(grid.get("N", 128)), float(grid.get("L", 1.0)))
    except ValueError as exc:
        raise lsio.ConfigError(f"{path}: {exc}") from exc
    lams = sec.get("lambda", "").replace(",", " ").split()
    base = Path(path).parent
    if len(lams) <= 1:
        return lat, [spec_from_config(sec, lat.d, base)]
    return lat, [spec_from_config({**sec, "lambda": lam}, lat.d, base) for lam in lams]


def cmd_symbol(args) -> int:
    if not args.config:
        raise lsio.ConfigError("--config is required for this subcommand")
    lat, specs = _symbol_inputs(args.config)
    out = _out_dir(args)
    reports = []
    for spec in specs:
        sym = symbol_grid(spec, lat)
        sym.check_invariants()
        h = lsio.config_hash((spec, lat.key()))
        tag = f"_lambda{spec.lam:g}" if len(specs) > 1 else ""
        xi = lat.kmag.ravel()
        cols = [c.ravel() for c in lat.k]
        with open(out / f"symbol{tag}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"k{i + 1}" for i in range(lat.d)] + ["abs_xi", "A", "config_hash"])
            for row in zip(*cols, xi, sym.values.ravel()):
                w.writerow([repr(float(v)) for v in row] + [h])
        if xi.max() >= 4:
            fit = symbol_lower_bound_fit(sym, spec.alpha, spec.sigma)
            reports.append(EstimateReport(
                name=f"lower-bound{tag}", anchor="symbol lower bound",
                constants={"C": fit.constant, "exponent": fit.exponent, "worst_xi": fit.worst_xi},
                residual=fit.slack, passed=bool(math.isfinite(fit.constant) and fit.slack >= -1e-12),
                config_hash=h,
            ))
        if args.svg:
            pos = xi > 0
            order = np.argsort(xi[pos])
            line_plot(out / f"symbol{tag}.svg",
                      [(xi[pos][order], sym.values.ravel()[pos][order], "A(xi)"),
                       (xi[pos][order], xi[pos][order] ** spec.alpha, "|xi|^alpha")],
                      title="symbol", xlabel="|xi|", ylabel="A", logx=True, logy=True)
    return _finish(reports, out)


# --------------------------------------------------------------------------
# decompose


def cmd_decompose(args) -> int:
    exp = _experiment(args)
    cfg = exp.solver
    out = _out_dir(args, exp)
    lat = cfg.lattice
    if args.field:
        theta = np.load(args.field)
        if theta.shape != lat.shape:
            raise lsio.ConfigError(f"field shape {theta.shape} does not match grid {lat.shape}")
    else:
        from .solver import initial_data
        theta = initial_data(cfg)
    part = build_partition(lat)
    h = exp.hash()
    rep = besov_norm(theta, args.s, args.p, part)
    rep.to_csv(out / "blocks.csv", h)
    res = reconstruction_residual(theta, part)
    print(f"reconstruction residual {res:.3e}")
    print(f"B^{args.s:g}_{{{args.p:g},inf}} norm {rep.total:.6g} (dominant block {rep.dominant_block()})")
    with open(out / "besov.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "p", "norm", "dominant_block", "reconstruction_residual", "config_hash"])
        w.writerow([repr(args.s), repr(args.p), repr(rep.total), rep.dominant_block(), repr(res), h])
    if _want_svg(args, exp):
        dec = decompose(theta, part)
        x = lat.x[0] if lat.d == 1 else lat.x[0][:, 0]
        series = []
        for j in part.indices:
            b = dec[j]
            series.append((x, b if lat.d == 1 else b[:, 0], f"j={j}"))
        line_plot(out / "blocks.svg", series[:6], title="blocks", xlabel="x", ylabel="Delta_j theta")
    return EXIT_OK if res < 1e-12 else EXIT_FAIL


# --------------------------------------------------------------------------
# solve


def write_run(traj, out: Path, svg: bool = False) -> None:
    """Snapshots, scalar norms and per-block histories of one run."""
    lat = traj.lattice
    snap_dir = out / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for t in sorted(traj.snapshots):
        meta = {"t": t, "grid": lat.key(), "config_hash": traj.config_hash}
        lsio.save_snapshot(snap_dir / f"t{t:.6f}", traj.snapshots[t], meta)
    with open(out / "norms.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        ps = sorted(traj.lp)
        w.writerow(["t", "linf"] + [f"l{p:g}" for p in ps] + ["config_hash"])
        for i, t in enumerate(traj.times):
            w.writerow([repr(float(t)), repr(float(traj.linf[i]))]
                       + [repr(float(traj.lp[p][i])) for p in ps] + [traj.config_hash])
    lsio.write_histories(traj, out / "histories.csv")
    if svg:
        series = [(traj.block_times, traj.block_linf[:, c], f"j={j}")
                  for c, j in enumerate(traj.block_j) if np.any(traj.block_linf[:, c] > 0)]
        line_plot(out / "histories.svg", series[:6], title="block sup norms", xlabel="t",
                  ylabel="||Delta_j theta||_inf", logy=True)


def cmd_solve(args) -> int:
    exp = _experiment(args)
    out = _out_dir(args, exp)
    traj = solve(exp.solver)
    write_run(traj, out, _want_svg(args, exp))
    print(f"t={traj.times[-1]:.4g} sup={traj.linf[-1]:.6g} hash={traj.config_hash}")
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def _split(text):
    return [c for c in (text or "").replace(",", " ").split() if c]


def cmd_verify(args) -> int:
    exp = None
    override = None
    if args.config:
        cp = lsio.read_config(args.config)
        if cp.has_section("operator"):
            exp = lsio.experiment_from_config(args.config, args.seed)
            override = exp.solver
        elif cp.has_section("experiment"):
            ex = cp["experiment"]
            exp = lsio.ExperimentConfig(
                solver=None, seed=int(ex.get("seed", 0)) if args.seed is None else args.seed,
                out=ex.get("out", "out"), checks=tuple(_split(ex.get("checks", ""))),
                preset=ex.get("preset", ""))
    names = _split(args.checks) or (list(exp.checks) if exp else []) or (
        [exp.preset] if exp and exp.preset else [])
    if names == ["all"]:
        names = list(PRESETS)
    if not names:
        raise lsio.ConfigError("no checks selected (use --checks or [experiment] checks)")
    unknown = [n for n in names if n not in PRESETS]
    if unknown:
        raise lsio.ConfigError(f"unknown checks {unknown}; choose from {', '.join(PRESETS)}")
    seed = args.seed if args.seed is not None else (exp.seed if exp else 0)
    out = _out_dir(args, exp)
    reports = []
    for name in names:
        reports.extend(run_preset(name, seed, override, worker_count()))
    return _finish(reports, out)


def _finish(reports, out: Path) -> int:
    for r in reports:
        print(r.line())
        for note in r.notes:
            print(f"       note: {note}")
    write_reports(reports, out / "reports.csv")
    write_summary(reports, out / "summary.txt")
    return EXIT_FAIL if any(r.passed is False for r in reports) else EXIT_OK


# --------------------------------------------------------------------------
# sweep

AXES = {"epsilon": float, "N": int, "dt": float}


def cmd_sweep(args) -> int:
    exp = _experiment(args)
    cfg = exp.solver
    out = _out_dir(args, exp)
    cast = AXES[args.axis]
    values = [cast(v) for v in _split(args.values)]
    if not values:
        raise lsio.ConfigError("--values is empty")
    cfgs = [replace(cfg, **{args.axis: v}) for v in values]
    workers = worker_count()
    if workers > 1 and len(cfgs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(min(workers, len(cfgs))) as ex:
            trajs = list(ex.map(solve, cfgs))
    else:
        trajs = [solve(c) for c in cfgs]
    for v, traj in zip(values, trajs):
        write_run(traj, out / f"{args.axis}={v}")
    reports = []
    if args.axis == "epsilon" and len(values) >= 3:
        if any(b > a for a, b in zip(values, values[1:])):
            raise lsio.ConfigError("epsilon values must be nonincreasing")
        conv = convergence_from_finals(values, [t.final for t in trajs])
        reports.append(check_vanishing_viscosity(conv))
    coarse = trajs[0].lattice
    rows = []
    for (v0, a), (v1, b) in zip(zip(values, trajs), zip(values[1:], trajs[1:])):
        fa = resample(a.final, a.lattice, coarse)
        fb = resample(b.final, b.lattice, coarse)
        diff = lp_norm(fa - fb, np.inf)
        ratio = b.linf.max() / a.linf.max() if a.linf.max() > 0 else math.nan
        rows.append((v0, v1, diff, ratio))
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["axis", "value", "next_value", "final_difference", "sup_ratio", "config_hash"])
        for v0, v1, diff, ratio in rows:
            w.writerow([args.axis, v0, v1, repr(float(diff)), repr(float(ratio)), exp.hash()])
    for v0, v1, diff, ratio in rows:
        print(f"{args.axis} {v0} -> {v1}: final difference {diff:.3e}, sup ratio {ratio:.4f}")
    return _finish(reports, out)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levy-smooth", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the data seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--svg", action="store_true", help="also write SVG plots")
        return p

    common(sub.add_parser("symbol", help="symbol table and lower-bound fit"))
    p = common(sub.add_parser("decompose", help="Littlewood-Paley blocks of a field"))
    p.add_argument("field", nargs="?", help=".npy field on the config grid (default: initial data)")
    p.add_argument("--s", type=float, default=0.5, help="Besov smoothness")
    p.add_argument("--p", type=float, default=math.inf, help="Besov integrability")
    common(sub.add_parser("solve", help="integrate one configuration"))
    p = common(sub.add_parser("verify", help="run named verification presets"))
    p.add_argument("--checks", default="", help=f"comma list of: {', '.join(PRESETS)}, or 'all'")
    p = common(sub.add_parser("sweep", help="parameter sweep"))
    p.add_argument("--axis", choices=sorted(AXES), default="epsilon")
    p.add_argument("--values", default="0.1 0.05 0.025", help="values along the axis")
    return ap


COMMANDS = {"symbol": cmd_symbol, "decompose": cmd_decompose, "solve": cmd_solve,
            "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
