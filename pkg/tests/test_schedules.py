import math

import numpy as np
import pytest

from gle_anneal.schedules import (
    check_assumption,
    constant_schedule,
    simulation_schedule,
    temperature,
    theoretical_schedule,
)


def test_simulation_start_value():
    s = simulation_schedule(5.0)
    assert temperature(s, 0, 0.1) == pytest.approx(5.0)


def test_simulation_late_value():
    # high-precision evaluation of (0.2 + ln(10001)/5)^-1
    s = simulation_schedule(5.0)
    want = 1.0 / (0.2 + math.log(10001.0) / 5.0)
    assert temperature(s, 10 ** 5, 0.1) == pytest.approx(want, rel=1e-14)


def test_constant_schedule():
    s = constant_schedule(0.5)
    for k in (0, 17, 10 ** 6):
        assert temperature(s, k, 0.02) == 0.5


def test_theoretical_identity():
    s = theoretical_schedule(5.0)
    for k in (0, 10, 1000, 10 ** 6):
        t = k * 0.1
        assert temperature(s, k, 0.1) * math.log(math.e + t) == pytest.approx(5.0)


def test_monotone_and_bounded():
    s = simulation_schedule(5.0)
    ks = np.unique(np.round(np.logspace(0, 7, 300)))
    temps = temperature(s, ks, 0.1)
    assert np.all(np.diff(temps) <= 0)
    assert np.all(temps > 0)
    assert np.all(temps <= 5.0)


def test_check_assumption_margin():
    assert check_assumption(simulation_schedule(5.0), gap=2.0).valid
    rep = check_assumption(simulation_schedule(1.0), gap=2.0)
    assert not rep.valid
    assert any("E <=" in r for r in rep.reasons)


def test_check_assumption_constant_invalid():
    rep = check_assumption(constant_schedule(1.0), gap=0.5)
    assert not rep.valid


def test_check_assumption_fits_t_tilde():
    rep = check_assumption(theoretical_schedule(5.0), gap=1.0)
    assert rep.valid
    assert rep.derivative_ok
    assert rep.t_tilde > 0


def test_validation():
    with pytest.raises(ValueError):
        simulation_schedule(-1.0)
    with pytest.raises(ValueError):
        constant_schedule(-0.5)
    with pytest.raises(ValueError):
        temperature(simulation_schedule(5.0), 3, dt=0.0)
    # the zero-temperature (noiseless) constant schedule is allowed
    assert temperature(constant_schedule(0.0), 5, 0.1) == 0.0
