"""Temperature-dependent refractive index, wavenumbers and their frequency derivatives.

Frequencies are angular (rad/s), wavenumbers in rad/m, vacuum wavelengths in
micrometres at the Sellmeier interface, temperatures in degrees Celsius.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import factorial
from pathlib import Path

import numpy as np
from scipy.constants import c
from scipy.optimize import brentq

from .errors import ConfigError, RangeError, RootNotFoundError

DEFAULT_TEMPERATURE = 20.0
MAX_DERIVATIVE_ORDER = 6

# initial Richardson step as a fraction of omega; high orders need wide
# stencils or roundoff swamps the difference quotient
_STEP_FRACTION = {1: 1e-2, 2: 3e-2, 3: 6e-2, 4: 8e-2, 5: 1e-1, 6: 1.2e-1}
_RICHARDSON_LEVELS = 5
_RICHARDSON_RTOL = 1e-8


def _jundt_index_squared(coef, wavelength_um, temperature):
    f = (temperature - coef["t_ref"]) * (temperature + coef["t_offset"])
    l2 = wavelength_um**2
    return (
        coef["a1"]
        + coef["b1"] * f
        + (coef["a2"] + coef["b2"] * f) / (l2 - (coef["a3"] + coef["b3"] * f) ** 2)
        + (coef["a4"] + coef["b4"] * f) / (l2 - coef["a5"] ** 2)
        - coef["a6"] * l2
    )


def _constant_index_squared(coef, wavelength_um, temperature):
    return np.full_like(wavelength_um, coef["n"] ** 2)


_FORMS = {
    "jundt": (
        _jundt_index_squared,
        ("a1", "a2", "a3", "a4", "a5", "a6", "b1", "b2", "b3", "b4", "t_ref", "t_offset"),
    ),
    "constant": (_constant_index_squared, ("n",)),
}


@dataclass(frozen=True)
class SellmeierModel:
    """A dispersion formula with named coefficients and validity intervals.

    ``wavelength_validity`` is in micrometres, ``temperature_validity`` in
    degrees Celsius, both closed. Evaluation outside raises ``RangeError``
    unless ``allow_extrapolation`` is set.
    """

    name: str
    form: str
    coefficients: tuple[tuple[str, float], ...]
    wavelength_validity: tuple[float, float]
    temperature_validity: tuple[float, float]
    citation: str = ""
    allow_extrapolation: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.form not in _FORMS:
            raise ConfigError(f"unknown dispersion form {self.form!r}; known: {sorted(_FORMS)}")
        missing = [k for k in _FORMS[self.form][1] if k not in self.coef]
        if missing:
            raise ConfigError(f"coefficients: missing field(s) {missing} for form {self.form!r}")
        for label, (lo, hi) in (
            ("wavelength_validity_um", self.wavelength_validity),
            ("temperature_validity_c", self.temperature_validity),
        ):
            if not lo < hi:
                raise ConfigError(f"{label}: interval [{lo}, {hi}] is empty")

    @property
    def coef(self) -> dict[str, float]:
        return dict(self.coefficients)

    @classmethod
    def from_dict(cls, data: dict) -> "SellmeierModel":
        def need(key):
            if key not in data:
                raise ConfigError(f"crystal file: missing field {key!r}")
            return data[key]

        coefficients = need("coefficients")
        if not isinstance(coefficients, dict):
            raise ConfigError("crystal file: field 'coefficients' must be an object")
        try:
            coefs = tuple(sorted((str(k), float(v)) for k, v in coefficients.items()))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"crystal file: field 'coefficients' has a non-numeric entry ({exc})")

        def interval(key):
            value = need(key)
            try:
                lo, hi = (float(v) for v in value)
            except (TypeError, ValueError):
                raise ConfigError(f"crystal file: field {key!r} must be a [low, high] pair")
            return lo, hi

        return cls(
            name=str(data.get("name", "unnamed")),
            form=str(need("form")),
            coefficients=coefs,
            wavelength_validity=interval("wavelength_validity_um"),
            temperature_validity=interval("temperature_validity_c"),
            citation=str(data.get("citation", "")),
        )

    @classmethod
    def from_json(cls, path) -> "SellmeierModel":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"crystal file {path}: invalid JSON ({exc})")
        except OSError as exc:
            raise ConfigError(f"crystal file {path}: {exc}")
        if not isinstance(data, dict):
            raise ConfigError(f"crystal file {path}: top level must be an object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "citation": self.citation,
            "form": self.form,
            "coefficients": self.coef,
            "wavelength_validity_um": list(self.wavelength_validity),
            "temperature_validity_c": list(self.temperature_validity),
        }

    def extrapolating(self) -> "SellmeierModel":
        """Copy of this model with the range checks disabled."""
        return replace(self, allow_extrapolation=True)

    def check(self, wavelength_um, temperature):
        if self.allow_extrapolation:
            return
        lam = np.asarray(wavelength_um, dtype=float)
        lo, hi = self.wavelength_validity
        if lam.size and (np.nanmin(lam) < lo or np.nanmax(lam) > hi):
            bad = np.nanmin(lam) if np.nanmin(lam) < lo else np.nanmax(lam)
            raise RangeError(
                f"wavelength {bad:.6g} um outside validity interval [{lo}, {hi}] um of {self.name}"
            )
        tlo, thi = self.temperature_validity
        if not tlo <= temperature <= thi:
            raise RangeError(
                f"temperature {temperature:.6g} C outside validity interval [{tlo}, {thi}] C of {self.name}"
            )

    def index_squared(self, wavelength_um, temperature):
        func = _FORMS[self.form][0]
        return func(self.coef, np.asarray(wavelength_um, dtype=float), float(temperature))


DEFAULT_MODEL_FILE = "congruent_ln_extraordinary.json"


@lru_cache(maxsize=None)
def _bundled(name: str) -> SellmeierModel:
    text = resources.files("wideband_spdc.data").joinpath(name).read_text()
    return SellmeierModel.from_dict(json.loads(text))


def load_model(path=None) -> SellmeierModel:
    """Load a crystal dispersion file; ``None`` gives the bundled lithium niobate model."""
    if path is None:
        return _bundled(DEFAULT_MODEL_FILE)
    return SellmeierModel.from_json(path)


def omega_to_wavelength_um(omega):
    return 2 * np.pi * c / np.asarray(omega, dtype=float) * 1e6


def wavelength_to_omega(wavelength_m):
    return 2 * np.pi * c / np.asarray(wavelength_m, dtype=float)


def refractive_index(model: SellmeierModel, wavelength, temperature=DEFAULT_TEMPERATURE):
    """Refractive index at vacuum ``wavelength`` (um)."""
    model.check(wavelength, temperature)
    n2 = model.index_squared(wavelength, temperature)
    out = np.sqrt(n2)
    return float(out) if np.ndim(out) == 0 else out


def wavenumber(model: SellmeierModel, omega, temperature=DEFAULT_TEMPERATURE):
    """k = n(2 pi c / omega) omega / c inside the crystal, rad/m."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("optical frequency must be positive")
    k = refractive_index(model, omega_to_wavelength_um(omega), temperature) * omega / c
    return float(k) if np.ndim(k) == 0 else k


@lru_cache(maxsize=None)
def central_weights(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of the minimal central stencil for the ``order``-th derivative."""
    p = (order + 1) // 2
    offsets = list(range(-p, p + 1))
    size = len(offsets)
    # exact Vandermonde solve: sum_j w_j j^m = order! delta_{m, order}
    rows = [[Fraction(j) ** m for j in offsets] + [Fraction(factorial(order) if m == order else 0)]
            for m in range(size)]
    for i in range(size):
        piv = next(r for r in range(i, size) if rows[r][i] != 0)
        rows[i], rows[piv] = rows[piv], rows[i]
        for r in range(size):
            if r != i and rows[r][i] != 0:
                fac = rows[r][i] / rows[i][i]
                rows[r] = [a - fac * b for a, b in zip(rows[r], rows[i])]
    weights = [float(rows[i][-1] / rows[i][i]) for i in range(size)]
    return np.array(offsets, dtype=float), np.array(weights)


def wavenumber_derivative(model: SellmeierModel, omega, temperature=DEFAULT_TEMPERATURE, order=1):
    """d^n k / d omega^n (units s^n/m) by Richardson-extrapolated central differences.

    The step starts at an order-dependent fraction of omega and is halved
    until two successive extrapolants agree to 1e-8 relative; if roundoff
    sets in first, the pair with the smallest disagreement wins.
    """
    if not 1 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order must be in 1..{MAX_DERIVATIVE_ORDER}, got {order}")
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega)
    offsets, weights = central_weights(order)
    h0 = _STEP_FRACTION[order] * w

    try:
        wavenumber(model, w[:, None] + offsets[None, :] * h0[:, None], temperature)
    except RangeError as exc:
        raise RangeError(f"finite-difference stencil exits validity range: {exc}") from None

    table = []
    diagonal = []
    for i in range(_RICHARDSON_LEVELS + 1):
        h = h0 / 2**i
        k = wavenumber(model, w[:, None] + offsets[None, :] * h[:, None], temperature)
        row = [(k * weights).sum(axis=1) / h**order]
        for m in range(1, i + 1):
            row.append(row[m - 1] + (row[m - 1] - table[i - 1][m - 1]) / (4**m - 1))
        table.append(row)
        diagonal.append(row[-1])

    diagonal = np.array(diagonal)
    diffs = np.abs(np.diff(diagonal, axis=0))
    scale = wavenumber(model, w, temperature) / w**order
    tol = _RICHARDSON_RTOL * np.abs(diagonal[1:]) + 1e-14 * scale
    result = np.empty_like(w)
    for j in range(w.size):
        ok = np.nonzero(diffs[:, j] <= tol[:, j])[0]
        level = ok[0] if ok.size else int(np.argmin(diffs[:, j]))
        result[j] = diagonal[level + 1, j]
    return float(result[0]) if scalar else result.reshape(omega.shape)


def group_velocity_dispersion(model, omega, temperature=DEFAULT_TEMPERATURE):
    return wavenumber_derivative(model, omega, temperature, order=2)


DEFAULT_GVD_BRACKET_UM = (1.5, 2.5)


def find_zero_gvd(model: SellmeierModel, temperature=DEFAULT_TEMPERATURE, bracket=None,
                  rtol=1e-9, gvd_tol=1e-30):
    """Frequency where d^2k/domega^2 vanishes inside ``bracket`` (rad/s pair).

    Bisection narrows the bracket to 1e-3 relative width (or stops early once
    |k''| < ``gvd_tol``), then Brent's method polishes to ``rtol``.
    """
    if bracket is None:
        lo_um, hi_um = DEFAULT_GVD_BRACKET_UM
        bracket = (float(wavelength_to_omega(hi_um * 1e-6)), float(wavelength_to_omega(lo_um * 1e-6)))
    lo, hi = sorted(float(b) for b in bracket)

    def gvd(w):
        return wavenumber_derivative(model, w, temperature, order=2)

    f_lo, f_hi = gvd(lo), gvd(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise RootNotFoundError(
            f"group velocity dispersion does not change sign over [{lo:.6e}, {hi:.6e}] rad/s "
            f"(k'' = {f_lo:.3e}, {f_hi:.3e} s^2/m)"
        )
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        f_mid = gvd(mid)
        if abs(f_mid) < gvd_tol:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return brentq(gvd, lo, hi, xtol=rtol * lo, rtol=4 * np.finfo(float).eps)
