import math

import pytest
from hypothesis import given, strategies as st

from degenwave.errors import PreconditionError
from degenwave.model import ModelParams, PhaseState


@pytest.mark.parametrize("p", [0, 1, 3, -2, 2.5, True])
def test_rejects_bad_exponent(p):
    with pytest.raises(PreconditionError):
        ModelParams(p, 1.0)


@pytest.mark.parametrize("c", [0.0, -1.0, math.inf, math.nan])
def test_rejects_bad_speed(c):
    with pytest.raises(PreconditionError):
        ModelParams(2, c)


def test_rejects_bad_delta():
    with pytest.raises(PreconditionError):
        ModelParams(2, 1.0, 2)


def test_derived_constants():
    m = ModelParams(2, 1.0)
    assert m.discriminant == -7
    assert m.plateau_phi == pytest.approx(2**-0.5)
    assert m.anchor_bound == pytest.approx(3**-0.5)
    assert m.as_dict() == {"p": 2, "c": 1.0, "delta": 1}


@given(st.integers(1, 6), st.floats(0.05, 20))
def test_anchor_bound_below_plateau(k, c):
    m = ModelParams(2 * k, c)
    assert 0 < m.anchor_bound < m.plateau_phi < 1


def test_phase_state():
    s = PhaseState(0.5, -1.0)
    phi, psi = s
    assert (phi, psi) == s.as_tuple() == (0.5, -1.0)
    with pytest.raises(ValueError):
        PhaseState(math.nan, 0.0)
