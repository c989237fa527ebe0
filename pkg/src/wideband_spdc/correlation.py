"""Signal/idler correlation time from the on-axis joint spectral amplitude.

The correlation time is the FWHM of |G(tau)|^2, where
G(tau) = int g(w_d + d) exp(-i d tau) dd is the Fourier transform of the
real on-axis amplitude over the signal detuning d; tau is the signal-idler
arrival-time difference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .dispersion import wavelength_to_omega
from .errors import ShapeError, WindowingError
from .jointamplitude import on_axis_amplitude
from .phasematch import CrystalConfig, PumpConfig

MEASURE = "FWHM of |G(tau)|^2; G = Fourier transform of the real on-axis amplitude over signal detuning"
DEFAULT_WINDOW_FRACTION = 0.6
DEFAULT_SAMPLES = 2**14
DEFAULT_PADDING = 8
EDGE_TOLERANCE = 0.01


@dataclass
class TemporalCorrelation:
    tau: np.ndarray
    magnitude_squared: np.ndarray
    correlation_time_fwhm: float
    window_half_width: float
    n_samples: int
    padding: int
    measure: str = MEASURE


def _direct_transform(delta, amplitude, step):
    def G(tau):
        return step * np.sum(amplitude * np.exp(-1j * delta * tau))
    return G


def correlation_from_amplitude(delta, amplitude, padding=DEFAULT_PADDING,
                               edge_tolerance=EDGE_TOLERANCE) -> TemporalCorrelation:
    """|G(tau)|^2 and its FWHM for an amplitude sampled on a uniform detuning grid.

    The padded FFT locates the peak and the half-maximum crossings; each is
    then polished on the exact trigonometric interpolant, so the width does
    not depend on the padding factor.
    """
    delta = np.asarray(delta, dtype=float)
    amplitude = np.asarray(amplitude, dtype=float)
    if delta.shape != amplitude.shape or delta.ndim != 1:
        raise ValueError("detuning and amplitude must be 1-D arrays of equal length")
    step = delta[1] - delta[0]
    if not np.allclose(np.diff(delta), step, rtol=1e-9, atol=0):
        raise ValueError("detuning grid must be uniform")
    if padding < 1:
        raise ValueError("padding factor must be >= 1")
    edge = max(abs(amplitude[0]), abs(amplitude[-1])) / np.max(np.abs(amplitude))
    if edge > edge_tolerance:
        raise WindowingError(
            f"amplitude at the window edge is {edge:.3g} of its peak (> {edge_tolerance}); widen the spectral window"
        )

    n_fft = padding * delta.size
    spectrum = np.fft.fftshift(np.fft.fft(amplitude, n=n_fft)) * step
    tau = np.fft.fftshift(np.fft.fftfreq(n_fft, d=step)) * 2 * np.pi
    power = np.abs(spectrum) ** 2

    G = _direct_transform(delta, amplitude, step)
    k = int(np.argmax(power))
    lo, hi = tau[max(k - 1, 0)], tau[min(k + 1, tau.size - 1)]
    peak = minimize_scalar(lambda t: -abs(G(t)) ** 2, bounds=(lo, hi), method="bounded",
                           options={"xatol": 1e-6 * (hi - lo)})
    tau_peak, peak_power = peak.x, -peak.fun
    magnitude_squared = power / peak_power

    above = magnitude_squared >= 0.5
    crossings = np.nonzero(above[1:] != above[:-1])[0]
    left = crossings[crossings < k]
    right = crossings[crossings >= k]
    if left.size == 0 or right.size == 0:
        raise ShapeError("|G|^2 does not fall to half maximum on both sides of the peak",
                         crossings=int(crossings.size))

    def half(t):
        return abs(G(t)) ** 2 / peak_power - 0.5

    i, j = left[-1], right[0]
    t_left = brentq(half, tau[i], min(tau[i + 1], tau_peak), xtol=1e-24)
    t_right = brentq(half, max(tau[j], tau_peak), tau[j + 1], xtol=1e-24)
    return TemporalCorrelation(
        tau=tau,
        magnitude_squared=magnitude_squared,
        correlation_time_fwhm=float(t_right - t_left),
        window_half_width=float(delta[-1] - delta[0]) / 2,
        n_samples=int(delta.size),
        padding=int(padding),
    )


def max_window(pump: PumpConfig, crystal: CrystalConfig) -> float:
    """Largest symmetric detuning half-width keeping signal and idler inside the model's validity."""
    lo_um, hi_um = crystal.model.wavelength_validity
    w_d = pump.degenerate_omega
    w_min = float(wavelength_to_omega(hi_um * 1e-6))
    w_max = float(wavelength_to_omega(lo_um * 1e-6))
    return min(w_d - w_min, w_max - w_d, w_d)


def correlation_function(pump: PumpConfig, crystal: CrystalConfig, spectral_window=None,
                         n_samples=DEFAULT_SAMPLES, padding=DEFAULT_PADDING) -> TemporalCorrelation:
    """On-axis correlation trace; ``spectral_window`` is the detuning half-width in rad/s.

    By default the window is 0.6 w_d, shrunk if needed to stay inside the
    dispersion model's validity range.
    """
    if n_samples < 2**12 or n_samples & (n_samples - 1):
        raise ValueError("n_samples must be a power of two, at least 4096")
    w_d = pump.degenerate_omega
    if spectral_window is None:
        spectral_window = min(DEFAULT_WINDOW_FRACTION * w_d, 0.999 * max_window(pump, crystal))
    if not 0 < spectral_window < w_d:
        raise ValueError("spectral window half-width must lie in (0, w_d)")
    delta = np.linspace(-spectral_window, spectral_window, n_samples)
    amplitude = on_axis_amplitude(w_d + delta, pump, crystal)
    return correlation_from_amplitude(delta, amplitude, padding)
