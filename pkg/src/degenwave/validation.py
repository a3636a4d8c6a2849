"""Validation pipelines and the machine-readable report.

Each ``validate_*`` function returns a :class:`ValidationReport` holding a
flat list of :class:`Check` records.  :func:`run_report` reads an INI
config, runs the selected suites, captures their failures as failed checks
and writes a byte-stable JSON report plus CSV artifacts.
"""
from __future__ import annotations

import configparser
import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .asymptotics import (
    make_profile,
    make_w_transform,
    phi_of_xi,
    verify_xi_divergence,
)
from .center_manifold import cm_residual, reduced_flow
from .errors import DegenWaveError, IntegrationError, PreconditionError
from .integrators import dopri54
from .model import ModelParams
from .pde_sim import (
    FieldState,
    Grid1D,
    init_wave,
    measure_front_speed,
    simulate,
)
from .phase_dynamics import Classification, TimeParam, connecting_orbit, equilibria
from .special_functions import WBranch, lambert_w

__all__ = [
    "Check",
    "ValidationReport",
    "DEFAULT_CONFIG",
    "SUITES",
    "validate_theorem2",
    "validate_step2",
    "validate_reduced_flow",
    "validate_equilibria",
    "validate_orbit_limits",
    "validate_cm_residual",
    "validate_lambertw",
    "validate_pde",
    "load_config",
    "run_report",
    "report_json",
]

# number formatting used in the JSON report
_SIG = 12


@dataclass(frozen=True)
class Check:
    """One named comparison.

    For ordinary checks ``passed`` is ``|measured - target| <= tolerance``.
    Trend and bound checks use their own documented predicate and state it
    in ``rule``.
    """

    name: str
    target: float
    measured: float
    tolerance: float
    passed: bool
    rule: str = "abs"

    @classmethod
    def within(cls, name: str, target: float, measured: float, tolerance: float) -> "Check":
        ok = bool(math.isfinite(measured) and abs(measured - target) <= tolerance)
        return cls(name, float(target), float(measured), float(tolerance), ok)

    @classmethod
    def at_most(cls, name: str, bound: float, measured: float) -> "Check":
        """Passes when ``measured <= bound``; ``target`` holds the bound."""
        ok = bool(math.isfinite(measured) and measured <= bound)
        return cls(name, float(bound), float(measured), 0.0, ok, "max")

    @classmethod
    def below(cls, name: str, bound: float, measured: float) -> "Check":
        ok = bool(math.isfinite(measured) and measured < bound)
        return cls(name, float(bound), float(measured), 0.0, ok, "lt")

    @classmethod
    def failed(cls, name: str) -> "Check":
        return cls(name, 0.0, math.nan, 0.0, False, "error")


@dataclass
class ValidationReport:
    params: ModelParams
    phi0: float
    checks: list[Check] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    tables: dict = field(default_factory=dict, repr=False)
    out_dir: Optional[Path] = None

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks) and not self.errors

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def extend(self, other: "ValidationReport"):
        self.checks.extend(other.checks)
        self.artifacts.extend(other.artifacts)
        self.errors.extend(other.errors)
        self.tables.update(other.tables)

    def check(self, name: str) -> Check:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)


def _strict_decrease(values: Sequence[float]) -> int:
    """Number of adjacent pairs that fail to decrease strictly."""
    v = np.asarray(values, dtype=float)
    return int(np.count_nonzero(~(np.diff(v) < 0)))


def _trend_check(name: str, values: Sequence[float]) -> Check:
    """Target 0 violations of strict decrease."""
    bad = _strict_decrease(values)
    return Check(name, 0.0, float(bad), 0.0, bad == 0, "decreasing")


# --------------------------------------------------------------------------
# closed form against the reduced flow
# --------------------------------------------------------------------------

def reduced_flow_orbit(params: ModelParams, phi0: float, xi_min: float, tol: float = 1e-12):
    """Integrate ``{dphi/ds = phi^p h(phi), dxi/ds = phi^p}`` backward from ``(phi0, 0)``.

    Returns ``(xi, phi)`` arrays ordered by increasing ``xi`` and covering
    ``[xi_min, 0]``.
    """
    p = params.p

    def f(_s, y):
        phi = y[0]
        return np.array([reduced_flow(params, phi), phi**p])

    def stop(_s, y):
        return "xi_min" if y[1] < xi_min else None

    res = dopri54(f, 0.0, [phi0, 0.0], -1e300, rtol=tol, atol=[1e-300, tol], stop=stop)
    if res.status != "xi_min":
        raise IntegrationError(f"reduced flow did not reach xi={xi_min}: {res.status}")
    return res.y[::-1, 1], res.y[::-1, 0]


def validate_reduced_flow(
    params: ModelParams, phi0: float, xi_min: float = -15.0, tolerance: float = 1e-6
) -> ValidationReport:
    """Sup relative error of ``phi_of_xi`` against the integrated reduced flow."""
    prof = make_profile(params, phi0)
    xi, phi = reduced_flow_orbit(params, phi0, xi_min)
    keep = xi >= xi_min
    rel = np.abs(phi_of_xi(prof, xi[keep]) / phi[keep] - 1.0)
    tag = f"p={params.p},c={params.c:g},phi0={phi0:g}"
    rep = ValidationReport(params, phi0)
    rep.checks.append(Check.at_most(f"reduced_flow_oracle[{tag}]", tolerance, float(rel.max())))
    return rep


# --------------------------------------------------------------------------
# asymptotic equivalence along the full system
# --------------------------------------------------------------------------

def _ratio_at(params: ModelParams, phi0: float, xi_checkpoints: Sequence[float]):
    prof = make_profile(params, phi0)
    xi_lo = min(xi_checkpoints)
    # reach comfortably past the deepest checkpoint (phi ~ phi0 e^{xi/c})
    phi_min = phi0 * math.exp((xi_lo - 1.0) / params.c) * 0.5
    orbit = connecting_orbit(params, phi0, phi_min=phi_min)
    k = orbit.meta["anchor_index"]
    xi_b = np.asarray(orbit.xi[: k + 1])
    phi_b = np.asarray(orbit.phi[: k + 1])
    if xi_b[0] > xi_lo:
        raise PreconditionError(f"orbit reaches only xi={xi_b[0]:.3f}, above {xi_lo}")
    spline = CubicSpline(xi_b, np.log(phi_b))
    xs = np.asarray(xi_checkpoints, dtype=float)
    phi_orbit = np.exp(spline(xs))
    phi_formula = phi_of_xi(prof, xs)
    return orbit, spline, prof, phi_orbit, phi_formula


def validate_theorem2(
    params: ModelParams,
    phi0: float,
    xi_checkpoints: Sequence[float],
    *,
    ratio_tolerance: float = 0.05,
    oracle_tolerance: float = 1e-6,
    slope_window: tuple[float, float] = (-12.0, -8.0),
    slope_tolerance: float = 0.01,
) -> ValidationReport:
    """Compare the full-system orbit with the closed-form tail.

    Checks: (a) ``phi_of_xi`` against the integrated reduced flow,
    (b) ``|r - 1|`` at the deepest checkpoint and its strict decrease in
    ``|xi|``, where ``r = phi_orbit / phi_of_xi``, (c) the slope of
    ``log phi`` over ``slope_window`` for the formula and for the orbit,
    both against ``1/c`` (relative tolerance).
    """
    if params.delta != 1:
        raise PreconditionError("validate_theorem2 needs delta = 1")
    xs = [float(x) for x in xi_checkpoints]
    if not xs or any(x >= 0 for x in xs) or _strict_decrease(xs):
        raise PreconditionError("checkpoints must be negative and strictly decreasing")

    rep = validate_reduced_flow(params, phi0, min(-15.0, xs[-1]), oracle_tolerance)
    orbit, spline, prof, phi_orbit, phi_formula = _ratio_at(params, phi0, xs)
    dev = np.abs(phi_orbit / phi_formula - 1.0)
    rep.checks.append(Check.at_most(f"ratio_deviation[xi={xs[-1]:g}]", ratio_tolerance, float(dev[-1])))
    rep.checks.append(_trend_check("ratio_deviation_decreasing", dev))

    a, b = slope_window
    c_inv = 1.0 / params.c
    slope_formula = (math.log(phi_of_xi(prof, b)) - math.log(phi_of_xi(prof, a))) / (b - a)
    slope_orbit = float((spline(b) - spline(a)) / (b - a))
    rep.checks.append(Check.within("decay_slope_formula", c_inv, slope_formula, slope_tolerance * c_inv))
    rep.checks.append(Check.within("decay_slope_orbit", c_inv, slope_orbit, slope_tolerance * c_inv))
    rep.tables["theorem2"] = (
        ["xi", "phi_orbit", "phi_formula", "ratio_deviation"],
        [list(r) for r in zip(xs, phi_orbit, phi_formula, dev)],
    )
    return rep


# --------------------------------------------------------------------------
# divergence of xi(s)
# --------------------------------------------------------------------------

def validate_step2(
    params: ModelParams,
    phi0: float,
    *,
    exponents: Sequence[int] = (1, 2, 3, 4, 5, 6),
    ratio_tolerance: float = 0.05,
) -> ValidationReport:
    """``xi(s)`` at ``s = -10^k``: normalization, strict decrease, log rate.

    The rate check compares ``xi(s)/log|s|`` at the deepest target with
    ``-c/p`` using a relative tolerance.
    """
    wt = make_w_transform(params, phi0)
    targets = [0.0] + [-(10.0**k) for k in exponents]
    vals = verify_xi_divergence(wt, params, targets)
    xi = [v for _, v in vals]
    rep = ValidationReport(params, phi0)
    rep.checks.append(Check.within("step2_xi_at_zero", 0.0, xi[0], 1e-14))
    rep.checks.append(_trend_check("step2_xi_decreasing", xi))
    s_last = targets[-1]
    rate = xi[-1] / math.log(-s_last)
    expect = -params.c / params.p
    rep.checks.append(
        Check.within(f"step2_log_rate[s={s_last:g}]", expect, rate, ratio_tolerance * abs(expect))
    )
    rep.tables["step2"] = (
        ["s", "xi", "xi_over_log_abs_s"],
        [[s, x, x / math.log(-s) if s < -1 else math.nan] for s, x in vals],
    )
    return rep


# --------------------------------------------------------------------------
# phase plane
# --------------------------------------------------------------------------

def validate_equilibria(params: ModelParams, phi0: float = math.nan) -> ValidationReport:
    """Sink classification at ``E_delta`` against the sign of ``D = c^2 - 4p``.

    ``measured`` is ``D`` recomputed from the eigenvalues as
    ``(lambda1 - lambda2)^2``; the check also requires the classification
    to match the sign of ``D``.
    """
    rep = ValidationReport(params, phi0)
    for eq in equilibria(params):
        # -E_delta mirrors +E_delta since p is even
        if eq.system is not TimeParam.XI or eq.location.phi <= 0:
            continue
        l1, l2 = eq.eigenvalues
        d_eig = float(((l1 - l2) ** 2).real)
        d = params.discriminant
        expect = Classification.SPIRAL_SINK if d < 0 else Classification.NODE_SINK
        sink = all(complex(l).real < 0 for l in eq.eigenvalues)
        tol = 1e-9 * max(1.0, abs(d))
        ok = sink and eq.classification is expect and abs(d_eig - d) <= tol
        name = f"equilibrium_class[p={params.p},c={params.c:g}]:{eq.classification.value}"
        rep.checks.append(Check(name, d, d_eig, tol, ok, "class"))
    return rep


def validate_orbit_limits(params: ModelParams, phi0: float, tolerance: float = 1e-6) -> ValidationReport:
    orbit = connecting_orbit(params, phi0)
    end = orbit.end
    dist = max(abs(end.phi - 1.0), abs(end.psi))
    rep = ValidationReport(params, phi0)
    rep.checks.append(Check.at_most("orbit_reaches_E_delta", tolerance, dist))
    rep.checks.append(
        Check("orbit_phi_positive", 0.0, float(np.min(orbit.phi)), 0.0, bool(np.min(orbit.phi) > 0), "gt")
    )
    return rep


def validate_cm_residual(
    params: ModelParams,
    phi_range: tuple[float, float] = (1e-3, 1e-1),
    spread_bound: float = 50.0,
) -> ValidationReport:
    """Spread of ``|psi - h(phi)| / phi^(p+2)`` along the backward orbit.

    The orbit is anchored at the top of ``phi_range`` so the whole range
    lies on its center-manifold branch.
    """
    lo, hi = phi_range
    orbit = connecting_orbit(params, hi, phi_min=0.5 * lo)
    k = orbit.meta["anchor_index"]
    back = type(orbit)(TimeParam.S, orbit.t[: k + 1], orbit.phi[: k + 1], orbit.psi[: k + 1])
    res = cm_residual(params, back)
    phi, r = res[:, 0], res[:, 1]
    keep = (phi >= lo) & (phi <= hi)
    stat = r[keep] / phi[keep] ** (params.p + 2)
    spread = float(stat.max() / stat.min()) if stat.min() > 0 else math.inf
    rep = ValidationReport(params, hi)
    rep.checks.append(Check.below("cm_residual_spread", spread_bound, spread))
    return rep


# --------------------------------------------------------------------------
# Lambert W
# --------------------------------------------------------------------------

def lambertw_samples(n: int = 10_000, seed: int = 0) -> dict[WBranch, np.ndarray]:
    """Deterministic sample sets covering each real branch's domain."""
    rng = np.random.default_rng(seed)
    x_min = -math.exp(-1.0)
    near = x_min + np.logspace(-15, -1, n // 4)
    w0 = np.concatenate([
        near,
        rng.uniform(x_min, 0.0, n // 4),
        rng.uniform(0.0, 10.0, n // 4),
        np.logspace(1, 300, n - 3 * (n // 4)),
    ])
    wm1 = np.concatenate([
        near,
        rng.uniform(x_min, 0.0, n // 2),
        -np.logspace(-300, -1, n - n // 4 - n // 2),
    ])
    return {WBranch.PRINCIPAL: w0, WBranch.LOWER: wm1}


def validate_lambertw(n: int = 10_000, tolerance: float = 1e-13, seed: int = 0) -> ValidationReport:
    """Identity residual per branch plus the positivity and ``W0(x) < log x`` bounds."""
    rep = ValidationReport(None, math.nan)
    samples = lambertw_samples(n, seed)
    for branch, xs in samples.items():
        w = lambert_w(branch, xs)
        resid = np.abs(w * np.exp(w) - xs) / np.maximum(1.0, np.abs(xs))
        rep.checks.append(Check.at_most(f"lambertw_identity[{branch.value}]", tolerance, float(resid.max())))
    x0 = samples[WBranch.PRINCIPAL]
    w0 = lambert_w(WBranch.PRINCIPAL, x0)
    bad = int(np.count_nonzero((x0 > 0) & ~(w0 > 0)))
    bad += int(np.count_nonzero((x0 > math.e) & ~(w0 < np.log(np.where(x0 > 0, x0, 1.0)))))
    rep.checks.append(Check("lambertw_bounds_violations", 0.0, float(bad), 0.0, bad == 0))
    return rep


# --------------------------------------------------------------------------
# PDE
# --------------------------------------------------------------------------

def validate_pde(
    params: ModelParams,
    phi0: float,
    *,
    x_min: float = -30.0,
    x_max: float = 30.0,
    dx: float = 0.05,
    t_end: float = 3.0,
    safety: float = 0.4,
    level: float = 0.5,
    snapshot_interval: float = 0.25,
    speed_tolerance: float = 0.05,
    calibration_tolerance: float = 1e-3,
) -> ValidationReport:
    """Front speed of the simulated wave, preceded by an exact-translation calibration."""
    grid = Grid1D.from_spacing(x_min, x_max, dx)
    prof = make_profile(params, phi0)
    c = params.c
    rep = ValidationReport(params, phi0)

    times = np.arange(0.0, t_end + 0.5 * snapshot_interval, snapshot_interval)
    synthetic = [FieldState(t, phi_of_xi(prof, grid.x - c * t)) for t in times]
    cal = measure_front_speed(synthetic, grid, level)
    rep.checks.append(Check.within("pde_calibration_speed", c, cal.speed, calibration_tolerance * c))

    orbit = connecting_orbit(params, phi0)
    field0 = init_wave(params, prof, orbit, grid)
    sim = simulate(params, grid, field0, t_end, safety, snapshot_interval=snapshot_interval)
    est = measure_front_speed(sim.snapshots, grid, level)
    rep.checks.append(Check.within("pde_front_speed", c, est.speed, speed_tolerance * c))
    rep.checks.append(Check.within("pde_positivity_clamps", 0.0, float(sim.clamp_count), 0.0))
    rep.tables["pde_front"] = (["time", "x_front"], [list(s) for s in est.samples])
    return rep


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

DEFAULT_CONFIG = """\
[params]
p = 2
c = 1
delta = 1
phi0 = 0.01

[checks]
enabled = lambertw, equilibria, reduced_flow, theorem2, orbit, step2, cm_residual, pde

[equilibria]
# extra (p, c) pairs classified alongside [params]
extra = 2:5

[reduced_flow]
# (p, c, phi0) triples checked against the integrated reduced flow
cases = 2:1:0.1, 2:3:0.1, 4:1:0.1

[theorem2]
checkpoints = -2, -4, -6, -8, -10, -12

[pde]
x_min = -30
x_max = 30
dx = 0.05
t_end = 3
safety = 0.4
level = 0.5
snapshot_interval = 0.25

[output]
dir = report
"""


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _suite_lambertw(cfg, params, phi0):
    return validate_lambertw()


def _tuples(text: str) -> list[list[str]]:
    return [item.strip().split(":") for item in text.split(",") if item.strip()]


def _suite_equilibria(cfg, params, phi0):
    rep = validate_equilibria(params, phi0)
    for p, c in _tuples(cfg.get("equilibria", "extra", fallback="")):
        rep.extend(validate_equilibria(ModelParams(int(p), float(c), params.delta)))
    return rep


def _suite_reduced_flow(cfg, params, phi0):
    cases = _tuples(cfg.get("reduced_flow", "cases", fallback=""))
    if not cases:
        return validate_reduced_flow(params, phi0)
    rep = ValidationReport(params, phi0)
    for p, c, ph in cases:
        rep.extend(validate_reduced_flow(ModelParams(int(p), float(c)), float(ph)))
    return rep


def _suite_theorem2(cfg, params, phi0):
    pts = _floats(cfg.get("theorem2", "checkpoints", fallback="-2 -4 -6 -8 -10 -12"))
    return validate_theorem2(params, phi0, pts)


def _suite_orbit(cfg, params, phi0):
    return validate_orbit_limits(params, phi0)


def _suite_step2(cfg, params, phi0):
    return validate_step2(params, cfg.getfloat("step2", "phi0", fallback=phi0))


def _suite_cm_residual(cfg, params, phi0):
    return validate_cm_residual(params)


def _suite_pde(cfg, params, phi0):
    sec = cfg["pde"] if cfg.has_section("pde") else {}
    kw = {k: float(v) for k, v in sec.items()}
    return validate_pde(params, phi0, **kw)


SUITES: dict[str, Callable] = {
    "lambertw": _suite_lambertw,
    "equilibria": _suite_equilibria,
    "reduced_flow": _suite_reduced_flow,
    "theorem2": _suite_theorem2,
    "orbit": _suite_orbit,
    "step2": _suite_step2,
    "cm_residual": _suite_cm_residual,
    "pde": _suite_pde,
}


def load_config(
    path: Optional[str | os.PathLike] = None, overrides: Optional[Mapping[str, object]] = None
) -> configparser.ConfigParser:
    """Default config, then the file at ``path``, then ``[params]`` overrides."""
    cfg = configparser.ConfigParser()
    cfg.read_string(DEFAULT_CONFIG)
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        try:
            cfg.read(path)
        except configparser.Error as exc:
            raise PreconditionError(f"config parse error in {path}: {exc}") from exc
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg.set("params", key, str(value))
    return cfg


def _fmt(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{_SIG}g}")


def report_json(report: ValidationReport) -> str:
    """Serialize with a fixed key order and ``_SIG`` significant digits."""
    params = report.params.as_dict() if report.params is not None else {}
    doc = {
        "params": {**{k: _fmt(v) for k, v in params.items()}, "phi0": _fmt(report.phi0)},
        "checks": [
            {
                "name": ch.name,
                "target": _fmt(ch.target),
                "measured": _fmt(ch.measured),
                "tolerance": _fmt(ch.tolerance),
                "pass": bool(ch.passed),
            }
            for ch in report.checks
        ],
        "artifacts": list(report.artifacts),
        "status": report.status,
        "errors": list(report.errors),
    }
    return json.dumps(doc, indent=2) + "\n"


def _write_table(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(_fmt(v)) if v is not None else "" for v in row])


def run_report(
    config_path: Optional[str | os.PathLike] = None,
    *,
    out_dir: Optional[str | os.PathLike] = None,
    overrides: Optional[Mapping[str, object]] = None,
) -> ValidationReport:
    """Run the suites listed in ``[checks] enabled`` and write ``report.json``.

    A suite that raises contributes a failed ``<suite>:error`` check and a
    message in ``errors``.  Artifact paths are relative to the output
    directory.
    """
    cfg = load_config(config_path, overrides)
    try:
        params = ModelParams(
            p=cfg.getint("params", "p"),
            c=cfg.getfloat("params", "c"),
            delta=cfg.getint("params", "delta"),
        )
        phi0 = cfg.getfloat("params", "phi0")
    except ValueError as exc:
        raise PreconditionError(f"bad [params] section: {exc}") from exc

    names = [n.strip() for n in cfg.get("checks", "enabled", fallback="").replace(",", " ").split()]
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise PreconditionError(f"unknown check suites: {', '.join(unknown)}")

    report = ValidationReport(params, phi0)
    for name in names:
        try:
            report.extend(SUITES[name](cfg, params, phi0))
        except (DegenWaveError, ValueError, ArithmeticError) as exc:
            report.checks.append(Check.failed(f"{name}:error"))
            report.errors.append(f"{name}: {type(exc).__name__}: {exc}")

    out = Path(out_dir if out_dir is not None else cfg.get("output", "dir", fallback="report"))
    out.mkdir(parents=True, exist_ok=True)
    for key in sorted(report.tables):
        fname = f"{key}.csv"
        _write_table(out / fname, *report.tables[key])
        report.artifacts.append(fname)
    report.artifacts.append("report.json")
    (out / "report.json").write_text(report_json(report))
    report.out_dir = out
    return report
