"""Command-line front end: ``degenwave <subcommand> [options]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .asymptotics import leading_order, make_profile, phi_of_xi
from .center_manifold import cm_graph
from .errors import BlowUpError, DegenWaveError
from .model import ModelParams
from .pde_sim import Grid1D, init_wave, measure_front_speed, simulate
from .phase_dynamics import TimeParam, connecting_orbit, direction_grid, integrate
from .special_functions import WBranch, lambert_w
from .validation import (
    ValidationReport,
    report_json,
    run_report,
    validate_step2,
    validate_theorem2,
)


def _common(defaults: bool = True) -> argparse.ArgumentParser:
    """Shared flags; without ``defaults`` unset parameters stay ``None``."""
    d = (2, 1.0, 1, 0.01) if defaults else (None,) * 4
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--p", type=int, default=d[0], help="diffusion exponent (positive even integer)")
    parent.add_argument("--c", type=float, default=d[1], help="wave speed")
    parent.add_argument("--delta", type=int, default=d[2], choices=(0, 1))
    parent.add_argument("--phi0", type=float, default=d[3], help="anchor value phi(0)")
    parent.add_argument("--out", type=Path, default=None, help="output directory (default: stdout)")
    parent.add_argument("--format", choices=("csv", "json"), default="csv")
    return parent


def _params(args) -> ModelParams:
    return ModelParams(p=args.p, c=args.c, delta=args.delta)


def _pair(text: str) -> tuple[float, float]:
    a, b = (float(t) for t in text.split(","))
    return a, b


def _cell(v):
    return v if isinstance(v, str) else repr(float(v))


def _emit(args, name: str, header: Sequence[str], rows: Iterable[Sequence], extra: Sequence[str] = ()):
    """Write a table as CSV or JSON to ``--out/<name>`` or stdout."""
    if args.format == "json":
        doc = {
            "columns": list(header),
            "rows": [[v if isinstance(v, str) else float(v) for v in r] for r in rows],
        }
        text = json.dumps(doc) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([_cell(v) for v in r] for r in rows)
        for line in extra:
            buf.write(line + "\n")
        text = buf.getvalue()
    if args.out is None:
        sys.stdout.write(text)
        return None
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"{name}.{args.format}"
    path.write_text(text)
    print(path)
    return path


def cmd_lambertw(args) -> int:
    branch = WBranch.parse(args.branch)
    results = []
    for x in args.x:
        w = lambert_w(branch, x)
        resid = abs(w * math.exp(w) - x) / max(1.0, abs(x))
        results.append((x, w, resid))
    if args.format == "json":
        print(json.dumps([{"x": x, "w": w, "residual": r} for x, w, r in results]))
    else:
        for _, w, r in results:
            print(f"{w:.17g} {r:.3e}")
    return 0


def cmd_orbit(args) -> int:
    params = _params(args)
    if args.start is None:
        orbit = connecting_orbit(params, args.phi0, tol=args.tol)
    else:
        which = TimeParam(args.param)
        orbit = integrate(params, which, _pair(args.start), (0.0, args.t_end), args.tol)
    header = ["param", "t", "phi", "psi"]
    cols = [orbit.t, orbit.phi, orbit.psi]
    if orbit.xi is not None:
        header.append("xi")
        cols.append(orbit.xi)
    tag = orbit.param.value
    _emit(args, "orbit", header, ([tag, *r] for r in np.column_stack(cols)))
    return 0


def cmd_portrait(args) -> int:
    params = _params(args)
    grid = direction_grid(params, _pair(args.phi_range), _pair(args.psi_range), args.n, args.n)
    _emit(args, "portrait", ["phi", "psi", "dphi", "dpsi"], grid)
    if args.manifold:
        lo, hi = _pair(args.phi_range)
        phi = np.linspace(lo, hi, args.n)
        _emit(args, "manifold", ["phi", "psi_manifold"], np.column_stack([phi, cm_graph(params, phi, warn=False)]))
    return 0


def cmd_asymptotics(args) -> int:
    params = _params(args)
    prof = make_profile(params, args.phi0)
    xi = np.linspace(args.xi_min, args.xi_max, args.n)
    rows = np.column_stack([xi, phi_of_xi(prof, xi), leading_order(prof, xi)])
    _emit(args, "asymptotics", ["xi", "phi_formula", "phi_leading"], rows)
    return 0


def _emit_report(args, report: ValidationReport, name: str) -> int:
    if args.format == "json":
        text = report_json(report)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "target", "measured", "tolerance", "pass"])
        for ch in report.checks:
            w.writerow([ch.name, repr(ch.target), repr(ch.measured), repr(ch.tolerance), str(ch.passed).lower()])
        text = buf.getvalue()
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / f"{name}.{args.format}"
        path.write_text(text)
        print(path)
    return 0 if report.passed else 1


def cmd_validate(args) -> int:
    params = _params(args)
    report = ValidationReport(params, args.phi0)
    if args.which in ("theorem2", "all"):
        pts = [float(t) for t in args.checkpoints.split(",")]
        report.extend(validate_theorem2(params, args.phi0, pts))
    if args.which in ("step2", "all"):
        report.extend(validate_step2(params, args.step2_phi0 or args.phi0))
    return _emit_report(args, report, f"validate_{args.which}")


def cmd_pde(args) -> int:
    params = _params(args)
    grid = Grid1D(args.xmin, args.xmax, args.nx)
    prof = make_profile(params, args.phi0)
    field = init_wave(params, prof, connecting_orbit(params, args.phi0), grid)
    try:
        sim = simulate(params, grid, field, args.t_end, args.safety, snapshot_interval=args.snapshot_interval)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return 2
    est = measure_front_speed(sim.snapshots, grid, args.level)
    x = grid.x
    rows = [(snap.time, xv, uv) for snap in sim.snapshots for xv, uv in zip(x, snap.values)]
    summary = f"speed,{est.speed!r},residual,{est.fit_residual!r}"
    if args.format == "json":
        _emit(args, "pde", ["time", "x", "u"], rows)
        print(summary)
    else:
        _emit(args, "pde", ["time", "x", "u"], rows, extra=[summary])
    return 0


def cmd_report(args) -> int:
    overrides = {k: getattr(args, k) for k in ("p", "c", "delta", "phi0")}
    report = run_report(args.config, out_dir=args.out, overrides=overrides)
    print(report.out_dir / "report.json")
    for ch in report.checks:
        print(f"{'PASS' if ch.passed else 'FAIL'} {ch.name} measured={ch.measured:.6g} target={ch.target:.6g}")
    for err in report.errors:
        print(f"ERROR {err}")
    print(f"status: {report.status}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="degenwave", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("lambertw", parents=[common], help="evaluate a real Lambert W branch")
    sp.add_argument("branch", help="0 / -1 / principal / lower")
    sp.add_argument("x", type=float, nargs="+")
    sp.set_defaults(func=cmd_lambertw)

    sp = sub.add_parser("orbit", parents=[common], help="connecting orbit or a single trajectory")
    sp.add_argument("--start", default=None, help="'phi,psi' initial state; omit for the connecting orbit")
    sp.add_argument("--param", choices=("xi", "s"), default="s")
    sp.add_argument("--t-end", type=float, default=50.0)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("portrait", parents=[common], help="normalized direction field")
    sp.add_argument("--phi-range", default="-1.5,1.5")
    sp.add_argument("--psi-range", default="-1.5,1.5")
    sp.add_argument("--n", type=int, default=21)
    sp.add_argument("--manifold", action="store_true", help="also emit the center-manifold graph")
    sp.set_defaults(func=cmd_portrait)

    sp = sub.add_parser("asymptotics", parents=[common], help="closed-form tail profile")
    sp.add_argument("--xi-min", type=float, default=-15.0)
    sp.add_argument("--xi-max", type=float, default=0.0)
    sp.add_argument("--n", type=int, default=151)
    sp.set_defaults(func=cmd_asymptotics)

    sp = sub.add_parser("validate", parents=[common], help="asymptotic validations")
    sp.add_argument("--which", choices=("theorem2", "step2", "all"), default="all")
    sp.add_argument("--checkpoints", default="-2,-4,-6,-8,-10,-12")
    sp.add_argument("--step2-phi0", type=float, default=None)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("pde", parents=[common], help="simulate the PDE from the wave profile")
    sp.add_argument("--xmin", type=float, default=-30.0)
    sp.add_argument("--xmax", type=float, default=30.0)
    sp.add_argument("--nx", type=int, default=1201)
    sp.add_argument("--t-end", type=float, default=3.0)
    sp.add_argument("--safety", type=float, default=0.4)
    sp.add_argument("--level", type=float, default=0.5)
    sp.add_argument("--snapshot-interval", type=float, default=0.25)
    sp.set_defaults(func=cmd_pde)

    # report flags override the config file only when given explicitly
    sp = sub.add_parser("report", parents=[_common(defaults=False)], help="run the configured validation report")
    sp.add_argument("--config", default=None, help="INI config (defaults built in)")
    sp.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DegenWaveError, ValueError, ArithmeticError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1


if __name__ == "__main__":
    sys.exit(main())
