import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.constants import c

from wideband_spdc.dispersion import find_zero_gvd, wavenumber
from wideband_spdc.errors import NoQPMSolutionError
from wideband_spdc.phasematch import (
    CrystalConfig,
    EmissionGeometry,
    PumpConfig,
    collinear_mismatch,
    degenerate_poling_period,
    mismatch_from_wavenumbers,
    poling_wavevector,
    taylor_mismatch_coefficients,
    transverse_mismatch,
)


def test_poling_wavevector():
    assert poling_wavevector(27.4) == pytest.approx(2 * np.pi / 27.4e-6)
    with pytest.raises(ValueError):
        poling_wavevector(0.0)


def test_degenerate_period_phase_matches(model, pump):
    period = degenerate_poling_period(pump, model, 20.0)
    crystal = CrystalConfig(0.01, period, 20.0, model)
    dk = collinear_mismatch(pump.degenerate_omega, pump, crystal)
    assert abs(dk) < 1e-9 * crystal.k_g


def test_degenerate_period_by_hand(model):
    # k(w_p) - 2 k(w_p / 2) written out from refractive indices
    pump = PumpConfig(942.5)
    wp = 2 * np.pi * c / 942.5e-9
    dk = wavenumber(model, wp) - 2 * wavenumber(model, wp / 2)
    assert degenerate_poling_period(pump, model) == pytest.approx(2 * np.pi / dk * 1e6, rel=1e-14)
    assert degenerate_poling_period(pump, model) == pytest.approx(27.40, abs=0.01)


def test_no_qpm_solution(model):
    from wideband_spdc.dispersion import SellmeierModel
    flat = SellmeierModel.from_dict({"name": "flat", "form": "constant", "coefficients": {"n": 2.0},
                                     "wavelength_validity_um": [0.4, 5.0], "temperature_validity_c": [0, 300]})
    with pytest.raises(NoQPMSolutionError):
        degenerate_poling_period(PumpConfig(942.5), flat)


def test_signal_outside_pump_band_rejected(pump, crystal):
    with pytest.raises(ValueError):
        collinear_mismatch(pump.omega * 1.01, pump, crystal)
    with pytest.raises(ValueError):
        collinear_mismatch(0.0, pump, crystal)


def test_invalid_configs():
    with pytest.raises(ValueError):
        PumpConfig(-1.0)
    with pytest.raises(ValueError):
        PumpConfig(942.5, 0.0)
    with pytest.raises(ValueError):
        CrystalConfig(length_m=0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.6, 1.4))
def test_collinear_mismatch_symmetric_in_signal_idler(frac):
    pump = PumpConfig(942.5)
    crystal = CrystalConfig(0.01, 27.4, 20.0)
    ws = frac * pump.degenerate_omega
    a = collinear_mismatch(ws, pump, crystal)
    b = collinear_mismatch(pump.omega - ws, pump, crystal)
    # the mismatch is a small difference of ~1e7 rad/m wavenumbers
    assert a == pytest.approx(b, abs=1e-13 * crystal.k(pump.omega))


def test_odd_coefficients_vanish(model, pump, crystal):
    exp = taylor_mismatch_coefficients(pump.degenerate_omega, crystal, order=6)
    for n in (1, 3, 5):
        assert exp.coefficient(n) == 0.0
    assert exp.coefficient(2) != 0.0


def test_taylor_series_reproduces_direct_mismatch(model):
    # at the zero-GVD point the series starts at fourth order; compare with the exact mismatch
    wd = find_zero_gvd(model, 20.0)
    pump = PumpConfig(np.pi * c / wd * 1e9)
    crystal = CrystalConfig(0.01, degenerate_poling_period(pump, model), 20.0, model)
    exp = taylor_mismatch_coefficients(wd, crystal, order=6)
    for frac in (0.02, 0.05, 0.1):
        d = frac * wd
        direct = collinear_mismatch(wd + d, pump, crystal) - exp.offset
        series = exp.evaluate(d)
        assert series == pytest.approx(direct, rel=2e-2 * (frac / 0.1) ** 2 + 1e-4)
    # fourth order dominates the second at modest detuning
    d = 0.05 * wd
    assert abs(exp.coefficient(4) * d**4) > 100 * abs(exp.coefficient(2) * d**2)


def test_evaluate_partial_sums(crystal, pump):
    exp = taylor_mismatch_coefficients(pump.degenerate_omega, crystal, order=4)
    d = 1e13
    assert exp.evaluate(d, order=2) == pytest.approx(exp.coefficient(2) * d**2 + exp.coefficient(1) * d)
    assert exp.evaluate(np.array([d, -d])).shape == (2,)


def test_transverse_mismatch_cancels_for_opposite_emission(pump, crystal):
    ws = 1.1 * pump.degenerate_omega
    k_s, k_i = crystal.k(ws), crystal.k(pump.omega - ws)
    theta_s = 0.01
    theta_i = np.arcsin(k_s * np.sin(theta_s) / k_i)
    kp2, _ = transverse_mismatch(EmissionGeometry(theta_s, 0.3, theta_i, 0.3 + np.pi), ws, pump, crystal)
    assert kp2 < 1e-12 * (k_s * theta_s) ** 2


def test_collinear_geometry_recovers_collinear_mismatch(pump, crystal):
    ws = 0.9 * pump.degenerate_omega
    kp2, dk = transverse_mismatch(EmissionGeometry(), ws, pump, crystal)
    assert kp2 == 0.0
    assert dk == pytest.approx(collinear_mismatch(ws, pump, crystal), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.1), st.floats(0, 2 * np.pi), st.floats(0, 0.1), st.floats(0, 2 * np.pi))
def test_mismatch_swap_symmetry(ts, ps, ti, pi_):
    g = EmissionGeometry(ts, ps, ti, pi_)
    a = mismatch_from_wavenumbers(7e6, 6e6, 1.4e7, 2e5, g)
    b = mismatch_from_wavenumbers(6e6, 7e6, 1.4e7, 2e5, g.swapped())
    assert a[0] == pytest.approx(b[0], rel=1e-9, abs=1e-6)
    assert a[1] == pytest.approx(b[1], rel=1e-12)
    assert a[0] >= 0
