"""Joint signal/idler amplitude for a weakly focused Gaussian pump."""

from __future__ import annotations

import numpy as np

from .phasematch import (
    CrystalConfig,
    EmissionGeometry,
    PumpConfig,
    collinear_mismatch,
    transverse_mismatch,
)

__all__ = ["PumpConfig", "beta", "sinc", "joint_amplitude", "joint_amplitude_from_mismatch",
           "on_axis_amplitude"]

_SINC_SWITCH = 1e-4


def sinc(x):
    """sin(x)/x, unnormalised, with the two-term series below |x| = 1e-4."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SINC_SWITCH
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def beta(k_perp_sq, delta_k_long, k_p):
    """k_perp^2 / (4 k_p) - Delta k / 2, rad/m."""
    if np.any(np.asarray(k_perp_sq) < 0):
        raise ValueError("k_perp^2 must be non-negative")
    if not np.all(np.asarray(k_p) > 0):
        raise ValueError("pump wavenumber must be positive")
    return k_perp_sq / (4.0 * k_p) - 0.5 * delta_k_long


def joint_amplitude_from_mismatch(k_perp_sq, delta_k_long, k_p, waist_m, length_m):
    return np.exp(-k_perp_sq * (0.5 * waist_m) ** 2) * sinc(beta(k_perp_sq, delta_k_long, k_p) * length_m)


def joint_amplitude(geometry: EmissionGeometry, omega_s, pump: PumpConfig, crystal: CrystalConfig):
    """exp[-(k_perp w0 / 2)^2] * sinc(beta L); real, signed, |g| <= 1."""
    k_perp_sq, dk = transverse_mismatch(geometry, omega_s, pump, crystal)
    g = joint_amplitude_from_mismatch(k_perp_sq, dk, crystal.k(pump.omega), pump.waist_m, crystal.length_m)
    return float(g) if np.ndim(g) == 0 else g


def on_axis_amplitude(omega_s, pump: PumpConfig, crystal: CrystalConfig):
    """Collinear amplitude sinc(Delta k L / 2); the Gaussian factor is 1 on axis."""
    return sinc(0.5 * collinear_mismatch(omega_s, pump, crystal) * crystal.length_m)
