import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wideband_spdc.jointamplitude import (
    beta,
    joint_amplitude,
    joint_amplitude_from_mismatch,
    on_axis_amplitude,
    sinc,
)
from wideband_spdc.phasematch import CrystalConfig, EmissionGeometry, PumpConfig, degenerate_poling_period


def test_sinc_values():
    assert sinc(0.0) == 1.0
    assert sinc(np.pi) == pytest.approx(0.0, abs=1e-16)
    x = np.array([1e-5, 0.5, -2.0])
    np.testing.assert_allclose(sinc(x), np.sinc(x / np.pi), rtol=1e-15)


def test_beta_rejects_negative_transverse():
    with pytest.raises(ValueError):
        beta(-1.0, 0.0, 1e7)


def test_on_axis_peak_at_phase_matching(model):
    pump = PumpConfig(942.5)
    crystal = CrystalConfig(0.01, degenerate_poling_period(pump, model), 20.0, model)
    assert on_axis_amplitude(pump.degenerate_omega, pump, crystal) == pytest.approx(1.0, abs=1e-12)


def test_joint_amplitude_on_axis_matches_collinear(pump, crystal):
    ws = np.linspace(0.6, 1.4, 9) * pump.degenerate_omega
    np.testing.assert_allclose(joint_amplitude(EmissionGeometry(), ws, pump, crystal),
                               on_axis_amplitude(ws, pump, crystal), rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e12), st.floats(-1e6, 1e6), st.floats(1e-6, 1e-3), st.floats(1e-4, 0.1))
def test_amplitude_bounded(kp2, dk, w0, L):
    g = joint_amplitude_from_mismatch(kp2, dk, 1.4e7, w0, L)
    assert abs(g) <= 1.0


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 0.05), st.floats(0, 2 * np.pi), st.floats(0, 0.05), st.floats(0, 2 * np.pi), st.floats(0.6, 1.4))
def test_amplitude_bounded_physical(ts, ps, ti, pi_, frac):
    pump = PumpConfig(942.5)
    crystal = CrystalConfig(0.01, 27.4, 20.0)
    g = joint_amplitude(EmissionGeometry(ts, ps, ti, pi_), frac * pump.degenerate_omega, pump, crystal)
    assert abs(g) <= 1.0


def test_gaussian_factor_suppresses_transverse_mismatch():
    w0 = 110e-6
    kp = 4 / w0
    assert joint_amplitude_from_mismatch(kp**2, 0.0, 1.4e7, w0, 1e-9) == pytest.approx(np.exp(-4.0), rel=1e-6)
