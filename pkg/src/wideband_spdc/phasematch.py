"""Wave-vector mismatch for first-order quasi-phase-matched type-1 downconversion.

The idler frequency is never an independent input: it is always
``pump.omega - omega_s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import dispersion
from .dispersion import DEFAULT_TEMPERATURE, SellmeierModel, wavenumber, wavenumber_derivative
from .errors import NoQPMSolutionError


@dataclass(frozen=True)
class PumpConfig:
    """Monochromatic Gaussian pump: vacuum wavelength in nm, waist (at crystal midpoint) in um."""

    wavelength_nm: float
    waist_um: float = 110.0

    def __post_init__(self):
        if not self.wavelength_nm > 0:
            raise ValueError(f"pump wavelength must be positive, got {self.wavelength_nm}")
        if not self.waist_um > 0:
            raise ValueError(f"pump waist must be positive, got {self.waist_um}")

    @property
    def omega(self) -> float:
        return float(dispersion.wavelength_to_omega(self.wavelength_nm * 1e-9))

    @property
    def degenerate_omega(self) -> float:
        return 0.5 * self.omega

    @property
    def waist_m(self) -> float:
        return self.waist_um * 1e-6


@dataclass(frozen=True)
class CrystalConfig:
    """Periodically poled crystal; length in metres, poling period in um, temperature in C."""

    length_m: float = 0.01
    poling_period_um: float = 27.4
    temperature: float = DEFAULT_TEMPERATURE
    model: SellmeierModel = field(default_factory=dispersion.load_model)

    def __post_init__(self):
        if not self.length_m > 0:
            raise ValueError(f"crystal length must be positive, got {self.length_m}")
        if not self.poling_period_um > 0:
            raise ValueError(f"poling period must be positive, got {self.poling_period_um}")

    @property
    def k_g(self) -> float:
        return poling_wavevector(self.poling_period_um)

    def k(self, omega):
        return wavenumber(self.model, omega, self.temperature)


@dataclass(frozen=True)
class EmissionGeometry:
    """Internal polar/azimuthal angles (radians) of signal and idler; arrays broadcast."""

    theta_s: object = 0.0
    phi_s: object = 0.0
    theta_i: object = 0.0
    phi_i: object = 0.0

    def swapped(self) -> "EmissionGeometry":
        return EmissionGeometry(self.theta_i, self.phi_i, self.theta_s, self.phi_s)


def poling_wavevector(period_um) -> float:
    """k_g = 2 pi / period; an infinite period (unpoled crystal) gives 0."""
    if not period_um > 0:
        raise ValueError(f"poling period must be positive, got {period_um}")
    return 2 * np.pi / (period_um * 1e-6)


def _check_signal(omega_s, omega_p):
    omega_s = np.asarray(omega_s, dtype=float)
    if np.any(omega_s <= 0) or np.any(omega_s >= omega_p):
        raise ValueError("signal frequency must lie strictly between 0 and the pump frequency")
    return omega_s


def collinear_mismatch(omega_s, pump: PumpConfig, crystal: CrystalConfig):
    """k(w_p) - k(w_s) - k(w_p - w_s) - k_g, rad/m."""
    omega_p = pump.omega
    omega_s = _check_signal(omega_s, omega_p)
    k_p = crystal.k(omega_p)
    dk = k_p - crystal.k(omega_s) - crystal.k(omega_p - omega_s) - crystal.k_g
    return float(dk) if np.ndim(dk) == 0 else dk


def degenerate_poling_period(pump: PumpConfig, model: SellmeierModel,
                             temperature=DEFAULT_TEMPERATURE) -> float:
    """Poling period (um) that phase-matches collinear degenerate emission."""
    omega_p = pump.omega
    dk = wavenumber(model, omega_p, temperature) - 2 * wavenumber(model, 0.5 * omega_p, temperature)
    if dk <= 0:
        raise NoQPMSolutionError(
            f"k(w_p) - 2k(w_p/2) = {dk:.6g} rad/m is not positive; backward poling is not modelled"
        )
    return 2 * np.pi / dk * 1e6


@dataclass(frozen=True)
class MismatchExpansion:
    """Delta k ~ sum_n coefficients[n-1] * delta_omega_s**n about the degenerate point."""

    degenerate_frequency: float
    coefficients: tuple[float, ...]
    offset: float = 0.0

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def coefficient(self, n: int) -> float:
        return self.coefficients[n - 1]

    def evaluate(self, delta_omega, order=None):
        """Partial sum through ``order`` (default all), excluding the constant ``offset``."""
        delta_omega = np.asarray(delta_omega, dtype=float)
        top = self.order if order is None else order
        total = np.zeros_like(delta_omega)
        for n in range(top, 0, -1):
            total = (total + self.coefficients[n - 1]) * delta_omega
        return float(total) if total.ndim == 0 else total


def taylor_mismatch_coefficients(omega_d, crystal: CrystalConfig, order=6) -> MismatchExpansion:
    """Power-series coefficients of the collinear mismatch in the signal detuning.

    With omega_i = omega_p - omega_s the idler detuning is the negated signal
    detuning, so c_n = [(-1)^(n+1) k_i^(n) - k_s^(n)] / n!; signal and idler
    share one dispersion relation here, so odd orders cancel identically.
    """
    if not 1 <= order <= dispersion.MAX_DERIVATIVE_ORDER:
        raise ValueError(f"expansion order must be in 1..{dispersion.MAX_DERIVATIVE_ORDER}")
    coefficients = []
    for n in range(1, order + 1):
        k_s_n = wavenumber_derivative(crystal.model, omega_d, crystal.temperature, n)
        k_i_n = k_s_n
        coefficients.append(((-1) ** (n + 1) * k_i_n - k_s_n) / factorial(n))
    k_d = crystal.k(omega_d)
    offset = crystal.k(2 * omega_d) - 2 * k_d - crystal.k_g
    return MismatchExpansion(float(omega_d), tuple(float(x) for x in coefficients), float(offset))


def mismatch_from_wavenumbers(k_s, k_i, k_p, k_g, geometry: EmissionGeometry):
    """(k_perp^2, longitudinal Delta k) for given wavenumber magnitudes.

    Magnitudes are taken as angle independent.
    """
    sin_s = np.sin(geometry.theta_s)
    sin_i = np.sin(geometry.theta_i)
    a = k_s * sin_s
    b = k_i * sin_i
    k_perp_sq = a * a + b * b + 2 * a * b * np.cos(np.subtract(geometry.phi_s, geometry.phi_i))
    # rounding can push an exactly cancelling pair a hair below zero
    k_perp_sq = np.maximum(k_perp_sq, 0.0)
    dk_long = k_p - k_s * np.cos(geometry.theta_s) - k_i * np.cos(geometry.theta_i) - k_g
    return k_perp_sq, dk_long


def transverse_mismatch(geometry: EmissionGeometry, omega_s, pump: PumpConfig, crystal: CrystalConfig):
    """Squared transverse mismatch (rad^2/m^2) and longitudinal mismatch (rad/m)."""
    omega_p = pump.omega
    omega_s = _check_signal(omega_s, omega_p)
    k_s = crystal.k(omega_s)
    k_i = crystal.k(omega_p - omega_s)
    return mismatch_from_wavenumbers(k_s, k_i, crystal.k(omega_p), crystal.k_g, geometry)
