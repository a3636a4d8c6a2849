import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from degenwave.asymptotics import make_profile, phi_of_xi
from degenwave.errors import BlowUpError, PreconditionError
from degenwave.model import ModelParams
from degenwave.pde_sim import (
    BOUNDARY_MARGIN,
    FieldState,
    Grid1D,
    init_wave,
    measure_front_speed,
    rhs,
    simulate,
)

P = ModelParams(2, 1.0, 1)
P0 = ModelParams(2, 1.0, 0)


@pytest.fixture(scope="module")
def wave(orbit_01):
    grid = Grid1D.from_spacing(-30.0, 30.0, 0.05)
    prof = make_profile(P, 0.1)
    return grid, prof, init_wave(P, prof, orbit_01, grid)


@pytest.fixture(scope="module")
def sim(wave):
    grid, _, field = wave
    return simulate(P, grid, field, 3.0, 0.4, snapshot_interval=0.25)


# --- types --------------------------------------------------------------

def test_grid_and_field_validation():
    g = Grid1D(-1.0, 1.0, 5)
    assert g.dx == 0.5 and g.x.tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert Grid1D.from_spacing(-30, 30, 0.05).nx == 1201
    with pytest.raises(PreconditionError):
        Grid1D(1.0, 1.0, 5)
    with pytest.raises(PreconditionError):
        Grid1D(0.0, 1.0, 2)
    with pytest.raises(PreconditionError):
        FieldState(0.0, np.array([0.0, -1e-3]))
    with pytest.raises(Exception):
        FieldState(0.0, np.array([0.0, np.nan]))
    f = FieldState(0.0, np.zeros(3))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


# --- rhs ----------------------------------------------------------------

def test_rhs_examples():
    g = Grid1D(0.0, 1.0, 11)
    assert np.all(rhs(P, g, np.ones(11)) == 0.0)
    assert np.all(rhs(P, g, np.zeros(11)) == 0.0)
    assert np.allclose(rhs(P0, g, np.full(11, 0.5))[1:-1], 0.125, rtol=0, atol=1e-15)


@given(st.integers(3, 60), st.floats(0.01, 2.0), st.sampled_from([2, 4, 6]))
def test_rhs_uniform_equilibria_exact(nx, dx, p):
    g = Grid1D(0.0, dx * (nx - 1), nx)
    params = ModelParams(p, 1.0, 1)
    assert np.all(rhs(params, g, np.ones(nx)) == 0.0)
    assert np.all(rhs(params, g, np.zeros(nx)) == 0.0)


@given(st.lists(st.floats(0.0, 1.5), min_size=3, max_size=40))
def test_rhs_boundary_pinned_and_stencil(vals):
    u = np.array(vals)
    g = Grid1D(0.0, 1.0, u.size)
    r = rhs(P, g, u)
    assert r[0] == 0.0 and r[-1] == 0.0
    i = u.size // 2
    if 0 < i < u.size - 1:
        lap = (u[i - 1] - 2 * u[i] + u[i + 1]) / g.dx**2
        assert r[i] == pytest.approx(u[i] ** 2 * (lap + u[i]) - u[i], rel=1e-12, abs=1e-12)


def test_rhs_partition_independent():
    rng = np.random.default_rng(1)
    u = rng.uniform(0, 1, 101)
    g = Grid1D(0.0, 1.0, 101)
    full = rhs(P, g, u)
    left = rhs(P, Grid1D(0.0, 0.5, 51), u[:51])
    assert np.array_equal(full[1:50], left[1:50])


# --- init_wave ----------------------------------------------------------

def test_init_wave_nodes(wave, orbit_01):
    grid, prof, field = wave
    x, u = grid.x, field.values
    assert u[0] == pytest.approx(phi_of_xi(prof, -30.0), rel=1e-12)
    assert u[0] == pytest.approx(9.4526e-15, rel=1e-4)
    # x = 30 is still inside the orbit's range, where the spiral tail has not fully settled
    assert u[-1] == pytest.approx(1.0, abs=1e-6)
    i0 = int(np.argmin(np.abs(x)))
    assert x[i0] == 0.0 and u[i0] == pytest.approx(0.1, rel=1e-9)
    # spiral approach to the plateau (D < 0) overshoots 1
    assert np.all(u >= 0)
    assert np.max(u) == pytest.approx(np.max(orbit_01.phi), rel=1e-4)


def test_init_wave_seams_continuous(wave, orbit_01):
    grid, prof, field = wave
    x, u = grid.x, field.values
    xi = np.asarray(orbit_01.xi)
    lo, hi = xi[0], xi[-1]
    for seam in (lo, hi):
        i = int(np.searchsorted(x, seam))
        if 0 < i < grid.nx:
            near = (x > seam - 3 * grid.dx) & (x < seam + 3 * grid.dx)
            assert np.max(np.abs(np.diff(u[near]))) < 1e-3
    # left seam against the closed form
    assert abs(orbit_01.phi[0] - phi_of_xi(prof, lo)) < 1e-6


def test_init_wave_requires_coverage(orbit_01):
    prof = make_profile(P, 0.1)
    with pytest.raises(PreconditionError):
        init_wave(P, prof, orbit_01, Grid1D(-2.0, 2.0, 81))


def test_init_wave_anchor_mismatch(orbit_01):
    with pytest.raises(PreconditionError):
        init_wave(P, make_profile(P, 0.05), orbit_01, Grid1D.from_spacing(-30, 30, 0.1))


# --- simulate -----------------------------------------------------------

def test_uniform_one_stays():
    g = Grid1D(0.0, 5.0, 51)
    res = simulate(P, g, FieldState(0.0, np.ones(51)), 0.5, 0.4, snapshot_interval=0.1)
    assert len(res.snapshots) == 6
    for snap in res.snapshots:
        assert np.max(np.abs(snap.values - 1.0)) <= 1e-12
    assert [round(s.time, 12) for s in res.snapshots] == [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]


def test_blowup_guard_fires():
    g = Grid1D(0.0, 5.0, 51)
    with pytest.raises(BlowUpError) as info:
        simulate(P, g, FieldState(0.0, np.full(51, 1.05)), 50.0, 0.4)
    assert 0 < info.value.time < 50.0


def test_simulate_preconditions():
    g = Grid1D(0.0, 1.0, 11)
    f = FieldState(0.0, np.zeros(11))
    for kw in ({"t_end": 0.0}, {"t_end": 1.0, "safety": 0.6}, {"t_end": 1.0, "safety": 0.0}):
        with pytest.raises(PreconditionError):
            simulate(P, g, f, **kw)


def test_traveling_wave_moves_right_without_clamps(sim):
    assert sim.clamp_count == 0
    assert sim.snapshots[-1].time == pytest.approx(3.0, abs=1e-12)
    assert len(sim.snapshots) == 13
    assert all(np.max(s.values) <= 2.0 for s in sim.snapshots)


def test_shape_preserved(wave, sim):
    grid, _, field = wave
    x, T = grid.x, sim.snapshots[-1].time
    u0, uT = field.values, sim.snapshots[-1].values
    window = (x > -10) & (x < 5)
    shifted = np.interp(x[window] + P.c * T, x, uT)
    assert np.max(np.abs(shifted - u0[window])) <= 0.02


# --- front speed --------------------------------------------------------

def test_synthetic_translation_speed():
    grid = Grid1D.from_spacing(-30, 30, 0.05)
    prof = make_profile(P, 0.1)
    snaps = [FieldState(t, phi_of_xi(prof, grid.x - t)) for t in np.linspace(0, 3, 13)]
    est = measure_front_speed(snaps, grid, 0.5)
    assert est.speed == pytest.approx(1.0, abs=1e-3)
    assert len(est.samples) == 13 and est.fit_residual >= 0


def test_identical_snapshots_speed_zero():
    grid = Grid1D.from_spacing(-30, 30, 0.05)
    u = phi_of_xi(make_profile(P, 0.1), grid.x)
    snaps = [FieldState(t, u) for t in (0.0, 1.0, 2.0)]
    est = measure_front_speed(snaps, grid, 0.5)
    assert est.speed == 0.0 and est.fit_residual == 0.0


def _at_times(field, n=3):
    return [FieldState(float(k), field.values) for k in range(n)]


def test_front_speed_errors():
    grid = Grid1D(0.0, 10.0, 101)
    x = grid.x
    flat = FieldState(0.0, np.full(101, 0.2))
    with pytest.raises(PreconditionError):
        measure_front_speed(_at_times(flat), grid, 0.5)
    bump = FieldState(0.0, np.exp(-((x - 5) ** 2)))
    with pytest.raises(PreconditionError):
        measure_front_speed(_at_times(bump), grid, 0.5)
    step = FieldState(0.0, (x > 5).astype(float))
    with pytest.raises(PreconditionError):
        measure_front_speed(_at_times(step, 2), grid, 0.5)
    edge = FieldState(0.0, (x > 0.05).astype(float))
    with pytest.raises(PreconditionError):
        measure_front_speed(_at_times(edge), grid, 0.5)
    # an exact node hit counts once
    hit = FieldState(0.0, np.clip((x - 4.0) / 2.0, 0, 1))
    assert measure_front_speed(_at_times(hit), grid, 0.5).samples[0][1] == pytest.approx(5.0)


def test_front_speed_window():
    grid = Grid1D(0.0, 20.0, 201)
    x = grid.x
    two = FieldState(0.0, ((x > 5) & (x < 15)).astype(float))
    with pytest.raises(PreconditionError):
        measure_front_speed(_at_times(two), grid, 0.5)
    est = measure_front_speed(_at_times(two), grid, 0.5, window=(0.0, 10.0))
    assert est.samples[0][1] == pytest.approx(5.0, abs=grid.dx)
    with pytest.raises(PreconditionError):
        measure_front_speed([two] * 3, grid, 0.5, window=(0.0, 10.0))
    assert BOUNDARY_MARGIN == 10


def test_simulated_front_speed(wave, sim):
    grid = wave[0]
    est = measure_front_speed(sim.snapshots, grid, 0.5)
    assert est.speed == pytest.approx(1.0, rel=0.05)


def test_speed_converges_under_refinement(orbit_01):
    prof = make_profile(P, 0.1)
    speeds = []
    for dx in (0.2, 0.1, 0.05):
        grid = Grid1D.from_spacing(-30, 30, dx)
        res = simulate(P, grid, init_wave(P, prof, orbit_01, grid), 3.0, 0.4, snapshot_interval=0.5)
        speeds.append(measure_front_speed(res.snapshots, grid, 0.5).speed)
    d1, d2 = abs(speeds[1] - speeds[0]), abs(speeds[2] - speeds[1])
    assert d2 < d1
    assert d2 < 0.05
