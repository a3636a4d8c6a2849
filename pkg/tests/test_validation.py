import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from degenwave.errors import PreconditionError
from degenwave.model import ModelParams
from degenwave.validation import (
    Check,
    ValidationReport,
    _fmt,
    load_config,
    report_json,
    run_report,
    validate_equilibria,
    validate_lambertw,
    validate_reduced_flow,
    validate_step2,
)

P = ModelParams(2, 1.0, 1)
finite = st.floats(-1e6, 1e6)


def write_cfg(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


# --- Check semantics ----------------------------------------------------

@given(finite, finite, st.floats(0, 1e6))
def test_within_is_abs_rule(t, m, tol):
    ch = Check.within("x", t, m, tol)
    assert ch.passed == (abs(m - t) <= tol)
    assert ch.rule == "abs"


@given(finite, finite)
def test_bound_rules(bound, m):
    assert Check.at_most("x", bound, m).passed == (m <= bound)
    assert Check.below("x", bound, m).passed == (m < bound)


def test_nonfinite_measurements_fail():
    assert not Check.within("x", 0.0, math.nan, 1.0).passed
    assert not Check.at_most("x", 1.0, math.nan).passed
    assert not Check.below("x", 1.0, math.inf).passed
    assert not Check.failed("x").passed


def test_status_is_conjunction():
    rep = ValidationReport(P, 0.01)
    assert rep.passed and rep.status == "pass"
    rep.checks.append(Check.within("a", 0, 0, 0))
    assert rep.passed
    rep.checks.append(Check.within("b", 0, 1, 0))
    assert rep.status == "fail"
    ok = ValidationReport(P, 0.01, [Check.within("a", 0, 0, 0)], errors=["boom"])
    assert not ok.passed
    with pytest.raises(KeyError):
        rep.check("missing")
    assert rep.check("b").measured == 1.0


def test_fmt():
    assert _fmt(2) == 2 and isinstance(_fmt(2), int)
    assert _fmt(True) is True
    assert _fmt(math.nan) is None and _fmt(math.inf) is None
    assert _fmt(1 / 3) == 0.333333333333
    assert _fmt(np.float64(-2.5e-300)) == -2.5e-300


# --- validators ---------------------------------------------------------

def test_equilibria_table():
    for (p, c), (d, kind) in {
        (2, 1.0): (-7, "SpiralSink"),
        (2, 5.0): (17, "NodeSink"),
        (4, 1.0): (-15, "SpiralSink"),
        (4, 5.0): (9, "NodeSink"),
    }.items():
        rep = validate_equilibria(ModelParams(p, c))
        (ch,) = rep.checks
        assert ch.passed and ch.name.endswith(kind)
        assert ch.target == d and ch.measured == pytest.approx(d, abs=1e-9)


def test_reduced_flow_oracle_passes():
    for p, c, phi0 in [(2, 1.0, 0.1), (2, 3.0, 0.1), (4, 1.0, 0.1)]:
        (ch,) = validate_reduced_flow(ModelParams(p, c), phi0).checks
        assert ch.passed and ch.measured < 1e-8


def test_lambertw_validation():
    rep = validate_lambertw(n=2000)
    assert rep.passed
    assert {c.name for c in rep.checks} == {
        "lambertw_identity[0]",
        "lambertw_identity[-1]",
        "lambertw_bounds_violations",
    }


def test_step2_report():
    rep = validate_step2(P, 0.1)
    assert rep.check("step2_xi_at_zero").passed
    assert rep.check("step2_xi_decreasing").passed
    rate = rep.check("step2_log_rate[s=-1e+06]")
    # the log rate converges only logarithmically: -0.359 at s = -1e6
    assert rate.measured == pytest.approx(-0.359, abs=2e-3)
    assert not rate.passed
    s, xi, ratio = zip(*rep.tables["step2"][1])
    assert s[0] == 0.0 and math.isnan(ratio[0])


# --- config and report --------------------------------------------------

def test_load_config_layers(tmp_path):
    cfg = load_config()
    assert cfg.getint("params", "p") == 2 and cfg.getfloat("params", "phi0") == 0.01
    path = write_cfg(tmp_path, "[params]\nc = 3\n")
    cfg = load_config(path, {"p": 4, "phi0": None})
    assert cfg.getfloat("params", "c") == 3.0
    assert cfg.getint("params", "p") == 4
    assert cfg.getfloat("params", "phi0") == 0.01


def test_config_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "nope.ini")
    with pytest.raises(PreconditionError):
        load_config(write_cfg(tmp_path, "not an ini file"))
    with pytest.raises(PreconditionError):
        run_report(write_cfg(tmp_path, "[checks]\nenabled = bogus\n", "b.ini"), out_dir=tmp_path)
    with pytest.raises(PreconditionError):
        run_report(write_cfg(tmp_path, "[params]\np = two\n", "c.ini"), out_dir=tmp_path)


def test_empty_report(tmp_path):
    rep = run_report(write_cfg(tmp_path, "[checks]\nenabled =\n"), out_dir=tmp_path / "out")
    assert rep.checks == [] and rep.passed
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    assert doc["checks"] == [] and doc["status"] == "pass"
    assert doc["artifacts"] == ["report.json"]


def test_c5_node_sink(tmp_path):
    cfg = write_cfg(tmp_path, "[params]\nc = 5\n[checks]\nenabled = equilibria\n[equilibria]\nextra =\n")
    rep = run_report(cfg, out_dir=tmp_path / "out")
    (ch,) = rep.checks
    assert ch.name == "equilibrium_class[p=2,c=5]:NodeSink"
    assert ch.target == 17 and ch.passed


def test_suite_errors_are_captured(tmp_path):
    cfg = write_cfg(tmp_path, "[params]\nphi0 = 0.8\n[checks]\nenabled = equilibria, theorem2\n")
    rep = run_report(cfg, out_dir=tmp_path / "out")
    assert rep.check("theorem2:error").rule == "error"
    assert not rep.passed and len(rep.errors) == 1
    assert rep.errors[0].startswith("theorem2: PreconditionError")
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    assert doc["status"] == "fail"
    assert doc["checks"][-1]["measured"] is None


def test_report_schema_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path, "[params]\nphi0 = 0.1\n[checks]\nenabled = lambertw, equilibria, step2\n")
    a = run_report(cfg, out_dir=tmp_path / "a")
    b = run_report(cfg, out_dir=tmp_path / "b")
    ja = (tmp_path / "a" / "report.json").read_bytes()
    assert ja == (tmp_path / "b" / "report.json").read_bytes()
    assert (tmp_path / "a" / "step2.csv").read_bytes() == (tmp_path / "b" / "step2.csv").read_bytes()
    doc = json.loads(ja)
    assert list(doc)[:4] == ["params", "checks", "artifacts", "status"]
    assert doc["params"] == {"p": 2, "c": 1.0, "delta": 1, "phi0": 0.1}
    for ch in doc["checks"]:
        assert list(ch) == ["name", "target", "measured", "tolerance", "pass"]
    assert doc["artifacts"] == ["step2.csv", "report.json"]
    assert report_json(a) == report_json(b)
