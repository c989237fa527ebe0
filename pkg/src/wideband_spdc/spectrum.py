"""Photon-number spectral density of the downconverted signal behind a circular aperture.

For each signal frequency the frequency delta is collapsed analytically
(the idler frequency is fixed at w_p - w_s), leaving

    R(w_s) ~ P(w_s) * 2 pi * I(w_s),
    I = int_0^theta_int dtheta_s sin(theta_s) int_0^pi dtheta_i sin(theta_i)
        int_0^2pi dphi |g|^2,

with P = w_s k_s^2 k_s' / n_s^2 * w_i k_i^2 k_i' / n_i^2 and phi the
signal/idler azimuth difference. Only the signal passes the aperture.

The Gaussian pump factor confines the idler to a narrow band of transverse
wavenumber around the signal's mirror image. The quadrature integrates only
where exp(-w0^2 k_perp^2 / 2) > exp(-M) and checks a rigorous bound on the
discarded remainder, raising M until the bound is below 1e-6 of the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c
from scipy.integrate import trapezoid

from .dispersion import omega_to_wavelength_um, refractive_index, wavenumber_derivative
from .errors import ConvergenceError, RangeError, ShapeError
from .jointamplitude import joint_amplitude_from_mismatch
from .phasematch import CrystalConfig, EmissionGeometry, PumpConfig, mismatch_from_wavenumbers

NORMALIZATION_NOTE = "relative units: proportional to photons per unit signal frequency per unit pump power"

DEFAULT_GRID_POINTS = 400
DEFAULT_GRID_SPAN = (0.55, 1.45)

QUAD_RTOL = 1e-4
TAIL_RTOL = 1e-6
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_MAX_DOUBLINGS = 4
# gaussian window cut: exp(-M) is where the pump factor is dropped
_INITIAL_CUT = 40.0
_CHUNK_POINTS = 1_500_000


@dataclass(frozen=True)
class CollectionAperture:
    """Circular limiting aperture centred on the pump axis.

    ``half_angle_deg`` is measured outside the crystal. Zero is accepted as
    a closed aperture and collects nothing.
    """

    half_angle_deg: float

    def __post_init__(self):
        if not 0 <= self.half_angle_deg <= 90:
            raise ValueError(f"aperture half-angle must be in [0, 90] degrees, got {self.half_angle_deg}")


def internal_aperture(external_deg, n_s):
    """Internal half-angle (degrees) after refraction at an exit face normal to the axis."""
    external_deg = np.asarray(external_deg, dtype=float)
    if np.any(external_deg < 0) or np.any(external_deg >= 90):
        raise ValueError("external half-angle must be in [0, 90) degrees")
    out = np.degrees(np.arcsin(np.sin(np.radians(external_deg)) / n_s))
    return float(out) if out.ndim == 0 else out


def default_grid(pump: PumpConfig, n_points=DEFAULT_GRID_POINTS, span=DEFAULT_GRID_SPAN):
    """Uniform signal-frequency grid over ``span`` times the degenerate frequency."""
    lo, hi = span
    return np.linspace(lo, hi, n_points) * pump.degenerate_omega


def check_grid(omega, pump: PumpConfig, crystal: CrystalConfig):
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or omega.size < 2:
        raise ValueError("spectral grid must be a 1-D array of at least two frequencies")
    if np.any(np.diff(omega) <= 0):
        raise ValueError("spectral grid must be strictly increasing")
    if omega[0] <= 0 or omega[-1] >= pump.omega:
        raise ValueError("spectral grid must lie inside (0, pump frequency)")
    for w in (omega, pump.omega - omega, np.array([pump.omega])):
        crystal.model.check(omega_to_wavelength_um(w), crystal.temperature)
    return omega


@dataclass
class _Point:
    """Per-frequency constants of the angular integrand."""

    omega_s: float
    omega_i: float
    k_s: float
    k_i: float
    k_p: float
    k_g: float
    n_s: float
    n_i: float
    waist: float
    length: float

    @classmethod
    def build(cls, omega_s, pump: PumpConfig, crystal: CrystalConfig):
        omega_p = pump.omega
        omega_i = omega_p - omega_s
        if not 0 < omega_s < omega_p:
            raise ValueError("signal frequency must lie strictly between 0 and the pump frequency")
        lam = omega_to_wavelength_um(np.array([omega_s, omega_i]))
        n_s, n_i = refractive_index(crystal.model, lam, crystal.temperature)
        return cls(
            omega_s=float(omega_s),
            omega_i=float(omega_i),
            k_s=float(crystal.k(omega_s)),
            k_i=float(crystal.k(omega_i)),
            k_p=float(crystal.k(omega_p)),
            k_g=crystal.k_g,
            n_s=float(n_s),
            n_i=float(n_i),
            waist=pump.waist_m,
            length=crystal.length_m,
        )

    def prefactor(self, crystal: CrystalConfig) -> float:
        k1_s, k1_i = wavenumber_derivative(
            crystal.model, np.array([self.omega_s, self.omega_i]), crystal.temperature, 1
        )
        signal = self.omega_s * self.k_s**2 * k1_s / self.n_s**2
        idler = self.omega_i * self.k_i**2 * k1_i / self.n_i**2
        return float(signal * idler)

    def g_squared(self, theta_s, theta_i, dphi):
        geometry = EmissionGeometry(theta_s, dphi, theta_i, 0.0)
        k_perp_sq, dk = mismatch_from_wavenumbers(self.k_s, self.k_i, self.k_p, self.k_g, geometry)
        g = joint_amplitude_from_mismatch(k_perp_sq, dk, self.k_p, self.waist, self.length)
        return g * g

    def internal_half_angle(self, aperture_deg) -> float:
        if aperture_deg == 0:
            return 0.0
        return math.radians(internal_aperture(aperture_deg, self.n_s))


def _panel_nodes(lo, hi, panels):
    """Composite 8-point Gauss-Legendre nodes/weights on [lo, hi] (broadcast over leading axes)."""
    edges = np.linspace(0.0, 1.0, panels + 1)
    width = edges[1] - edges[0]
    t = (edges[:-1, None] + 0.5 * (_GL_NODES[None, :] + 1.0) * width).ravel()
    w = np.tile(0.5 * _GL_WEIGHTS * width, panels)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    return lo + (hi - lo) * t, (hi - lo) * w


class _AngularQuadrature:
    """Nested windowed quadrature over (theta_s, theta_i, phi) for one signal frequency.

    ``theta_bounds`` are increasing internal half-angles; integrals for all of
    them come out of a single pass.
    """

    def __init__(self, point: _Point, theta_bounds, rtol=QUAD_RTOL, tail_rtol=TAIL_RTOL):
        self.p = point
        self.bounds = np.asarray(theta_bounds, dtype=float)
        self.rtol = rtol
        self.tail_rtol = tail_rtol

    def _half_window(self, M):
        return math.sqrt(2.0 * M) / self.p.waist

    def initial_panels(self, M):
        """Panel counts giving at least one 8-node panel per sinc lobe."""
        p = self.p
        theta_max = self.bounds[-1]
        hw = self._half_window(M)
        sin_i_max = min(1.0, (p.k_s * math.sin(theta_max) + hw) / p.k_i)
        theta_i_max = math.asin(sin_i_max)
        # total swing of beta*L across each dimension, in units of pi
        swing_s = 0.5 * p.length * (p.k_s * (1 - math.cos(theta_max)) + p.k_i * (1 - math.cos(theta_i_max)))
        window_i = math.asin(min(1.0, (p.k_s * math.sin(theta_max) + hw) / p.k_i)) - math.asin(
            max(0.0, min(1.0, (p.k_s * math.sin(theta_max) - hw) / p.k_i))
        )
        swing_i = 0.5 * p.length * p.k_i * math.sin(theta_i_max) * window_i + p.length * hw**2 / (4 * p.k_p)
        a = p.k_s * math.sin(theta_max)
        swing_phi = p.length * (min(2 * M / p.waist**2, 4 * a * p.k_i * sin_i_max)) / (4 * p.k_p)
        return [
            max(4, math.ceil(swing_s / math.pi)),
            max(4, math.ceil(swing_i / math.pi)),
            max(2, math.ceil(swing_phi / math.pi)),
        ]

    def _theta_s_nodes(self, panels_total):
        edges = np.concatenate([[0.0], self.bounds])
        span = edges[-1]
        nodes, weights, segment = [], [], []
        for j in range(len(self.bounds)):
            lo, hi = edges[j], edges[j + 1]
            if hi <= lo:
                continue
            count = max(1, math.ceil(panels_total * (hi - lo) / span))
            x, w = _panel_nodes(lo, hi, count)
            nodes.append(x)
            weights.append(w)
            segment.append(np.full(x.shape, j))
        return np.concatenate(nodes), np.concatenate(weights), np.concatenate(segment)

    def evaluate(self, panels, M, backward=False):
        """Cumulative integrals (g^2 and Gaussian-only) at every bound."""
        p = self.p
        n_bounds = len(self.bounds)
        if self.bounds[-1] <= 0:
            return np.zeros(n_bounds), np.zeros(n_bounds)
        ps, pi_, pphi = panels
        ts, wts, seg = self._theta_s_nodes(ps)
        hw = self._half_window(M)
        per_node = 8 * pi_ * 8 * pphi
        chunk = max(1, _CHUNK_POINTS // per_node)
        seg_g2 = np.zeros(n_bounds)
        seg_gauss = np.zeros(n_bounds)
        w0_sq = p.waist**2
        for start in range(0, ts.size, chunk):
            t_s = ts[start:start + chunk]
            a = p.k_s * np.sin(t_s)
            lo = np.arcsin(np.clip((a - hw) / p.k_i, 0.0, 1.0))
            hi = np.arcsin(np.clip((a + hw) / p.k_i, 0.0, 1.0))
            t_i, w_i = _panel_nodes(lo, hi, pi_)
            b = p.k_i * np.sin(t_i)
            ab = a[:, None] * b
            with np.errstate(divide="ignore", invalid="ignore"):
                cos_cut = np.where(ab > 0, M / (w0_sq * ab) - 1.0, -1.0)
            phi_lo = np.arccos(np.clip(cos_cut, -1.0, 1.0))
            phi, w_phi = _panel_nodes(phi_lo, np.pi, pphi)
            hemispheres = (t_i, np.pi - t_i) if backward else (t_i,)
            acc_g2 = np.zeros(t_s.size)
            acc_gauss = np.zeros(t_s.size)
            for theta_i in hemispheres:
                g2 = p.g_squared(t_s[:, None, None], theta_i[..., None], phi)
                # integrand is even in phi about pi; [phi_lo, pi] is half the window
                inner = 2.0 * (g2 * w_phi).sum(axis=-1)
                acc_g2 += (inner * np.sin(t_i) * w_i).sum(axis=-1)
                if theta_i is t_i:
                    k_perp_sq = a[:, None, None] ** 2 + (b * b)[..., None] + 2 * ab[..., None] * np.cos(phi)
                    gauss = np.exp(-0.5 * w0_sq * np.maximum(k_perp_sq, 0.0))
                    inner_g = 2.0 * (gauss * w_phi).sum(axis=-1)
                    acc_gauss += (inner_g * np.sin(t_i) * w_i).sum(axis=-1)
            weight = np.sin(t_s) * wts[start:start + chunk]
            np.add.at(seg_g2, seg[start:start + chunk], acc_g2 * weight)
            np.add.at(seg_gauss, seg[start:start + chunk], acc_gauss * weight)
        return np.cumsum(seg_g2), np.cumsum(seg_gauss)

    def _tail_bounds(self, M, gauss_only):
        """Upper bounds on what the windows leave out: (gaussian tails, backward idler)."""
        p = self.p
        # excluded theta_i band plus excluded phi band, both with gaussian <= e^-M
        gaussian = 8 * math.pi * math.exp(-M) * (1.0 - np.cos(self.bounds))
        # backward hemisphere: same gaussian window, but |beta| is huge there
        k_perp_max = p.k_s * math.sin(self.bounds[-1]) + p.k_i
        beta_min = 0.5 * (p.k_p - p.k_s - p.k_g) - k_perp_max**2 / (4 * p.k_p)
        sinc_sq = min(1.0, 1.0 / (beta_min * p.length) ** 2) if beta_min > 0 else 1.0
        return gaussian, sinc_sq * gauss_only

    def _converged(self, new, old):
        return np.all(np.abs(new - old) <= self.rtol * np.abs(new))

    def _refine(self, M, backward):
        panels = self.initial_panels(M)
        est, gauss = self.evaluate(panels, M, backward)
        for dim in range(3):
            for _ in range(_MAX_DOUBLINGS):
                trial = list(panels)
                trial[dim] *= 2
                new, new_gauss = self.evaluate(trial, M, backward)
                if self._converged(new, est):
                    break
                panels, est, gauss = trial, new, new_gauss
            else:
                raise ConvergenceError(
                    f"angular quadrature did not reach rtol={self.rtol} in "
                    f"{('theta_s', 'theta_i', 'phi')[dim]} at omega_s={self.p.omega_s:.6e}",
                    estimates=(float(est[-1]), float(new[-1])),
                )
        return est, gauss

    def integrate(self):
        """Integrals for every bound; raises ConvergenceError with the last two estimates."""
        M = _INITIAL_CUT
        backward = False
        for _ in range(8):
            est, gauss = self._refine(M, backward)
            gaussian_tail, backward_tail = self._tail_bounds(M, gauss)
            total = gaussian_tail + (0.0 if backward else backward_tail)
            excess = (total > self.tail_rtol * est) & (est > 0)
            if not np.any(excess):
                return est
            if not backward and np.any(backward_tail[excess] > gaussian_tail[excess]):
                backward = True
                continue
            M += math.log(np.max(total[excess] / est[excess]) / self.tail_rtol) + 2.0
        raise ConvergenceError(
            f"tail bound could not be brought below {self.tail_rtol} at omega_s={self.p.omega_s:.6e}",
            estimates=(float(est[-1]), float(total[-1])),
        )


def spectral_densities(omega_s, pump: PumpConfig, crystal: CrystalConfig, apertures, rtol=QUAD_RTOL):
    """Relative spectral density at one signal frequency for several apertures at once."""
    point = _Point.build(omega_s, pump, crystal)
    degrees = [a.half_angle_deg if isinstance(a, CollectionAperture) else float(a) for a in apertures]
    order = np.argsort(degrees)
    bounds = np.array([point.internal_half_angle(degrees[j]) for j in order])
    out = np.zeros(len(degrees))
    if bounds[-1] > 0:
        integrals = _AngularQuadrature(point, bounds, rtol=rtol).integrate()
        out[order] = point.prefactor(crystal) * 2 * math.pi * integrals
    return out


def spectral_density(omega_s, pump: PumpConfig, crystal: CrystalConfig, aperture: CollectionAperture,
                     rtol=QUAD_RTOL) -> float:
    """Relative photon-number spectral density at signal frequency ``omega_s`` (rad/s)."""
    return float(spectral_densities(omega_s, pump, crystal, [aperture], rtol)[0])


def mc_oracle_density(omega_s, pump: PumpConfig, crystal: CrystalConfig, aperture: CollectionAperture,
                      n_samples=1_000_000, seed=0, theta_i_max=math.pi):
    """Plain Monte Carlo estimate of ``spectral_density`` and its standard error.

    Samples uniformly over theta_s in the internal aperture, theta_i in
    [0, theta_i_max] and the azimuth difference in [0, 2 pi). Shares only the
    joint amplitude with the quadrature, none of its windowing.
    """
    if n_samples < 10_000:
        raise ValueError("the Monte Carlo oracle needs at least 1e4 samples")
    point = _Point.build(omega_s, pump, crystal)
    theta_max = point.internal_half_angle(aperture.half_angle_deg)
    if theta_max == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    volume = theta_max * theta_i_max * 2 * math.pi
    total = 0.0
    total_sq = 0.0
    remaining = int(n_samples)
    while remaining:
        n = min(remaining, 1 << 18)
        t_s = rng.uniform(0.0, theta_max, n)
        t_i = rng.uniform(0.0, theta_i_max, n)
        dphi = rng.uniform(0.0, 2 * math.pi, n)
        f = np.sin(t_s) * np.sin(t_i) * point.g_squared(t_s, t_i, dphi)
        total += f.sum()
        total_sq += (f * f).sum()
        remaining -= n
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    scale = point.prefactor(crystal) * 2 * math.pi * volume
    return float(scale * mean), float(scale * math.sqrt(var / n_samples))


@dataclass
class SpectrumResult:
    """Spectrum on a signal-frequency grid. ``omega`` in rad/s."""

    omega: np.ndarray
    density_raw: np.ndarray
    density_convolved: np.ndarray
    aperture_deg: float
    slit_nm: float | None = None
    normalization_note: str = NORMALIZATION_NOTE
    peak_frequency: float | None = None
    fwhm_frequency: float | None = None
    fractional_bandwidth: float | None = None
    fwhm_wavelength_nm: float | None = None
    mean_frequency: float | None = None
    shape_note: str = ""
    failures: dict = field(default_factory=dict)

    @property
    def wavelength_nm(self):
        return omega_to_wavelength_um(self.omega) * 1e3

    def with_metrics(self) -> "SpectrumResult":
        """Copy with peak/FWHM fields filled from the convolved density."""
        out = replace(self)
        d = out.density_convolved
        if np.any(~np.isfinite(d)) or not np.any(d > 0):
            out.shape_note = "no metrics: non-finite or all-zero density"
            return out
        out.peak_frequency = float(out.omega[int(np.argmax(d))])
        try:
            width, fractional, dlam = fwhm(out)
        except ShapeError as exc:
            out.fwhm_frequency = out.fractional_bandwidth = out.fwhm_wavelength_nm = None
            out.shape_note = str(exc)
            return out
        out.fwhm_frequency, out.fractional_bandwidth, out.fwhm_wavelength_nm = width, fractional, dlam
        out.mean_frequency = mean_frequency(out.omega, d)
        out.shape_note = "single-lobed"
        return out

    def scaled(self, factor) -> "SpectrumResult":
        return replace(self, density_raw=self.density_raw * factor,
                       density_convolved=self.density_convolved * factor)


def full_spectra(grid, pump: PumpConfig, crystal: CrystalConfig, apertures, slit_nm=None,
                 workers=1, rtol=QUAD_RTOL):
    """Spectra for several apertures from one pass over the grid.

    Per-sample convergence failures are collected; if any occur a
    ``ConvergenceError`` is raised whose ``partial`` holds the results (NaN
    at failed samples) and ``failures`` maps sample index to message.
    """
    omega = check_grid(grid, pump, crystal)
    apertures = [a if isinstance(a, CollectionAperture) else CollectionAperture(float(a)) for a in apertures]
    if not apertures:
        raise ValueError("at least one aperture is required")

    def one(j):
        try:
            return j, spectral_densities(omega[j], pump, crystal, apertures, rtol), None
        except (ConvergenceError, RangeError) as exc:
            return j, np.full(len(apertures), np.nan), str(exc)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(omega.size)))
    else:
        rows = [one(j) for j in range(omega.size)]

    table = np.empty((omega.size, len(apertures)))
    failures = {}
    for j, values, err in rows:
        table[j] = values
        if err is not None:
            failures[j] = err

    results = []
    for col, aperture in enumerate(apertures):
        raw = table[:, col].copy()
        res = SpectrumResult(omega=omega.copy(), density_raw=raw, density_convolved=raw.copy(),
                             aperture_deg=aperture.half_angle_deg, failures=dict(failures))
        if slit_nm is not None and not failures:
            res = convolve_slit(res, slit_nm)
        results.append(res.with_metrics())
    if failures:
        raise ConvergenceError(
            f"{len(failures)} of {omega.size} spectral samples failed to converge "
            f"(indices {sorted(failures)[:10]}{'...' if len(failures) > 10 else ''})",
            failures=failures,
            partial=results,
        )
    return results


def full_spectrum(grid, pump: PumpConfig, crystal: CrystalConfig, aperture: CollectionAperture,
                  slit_nm=None, workers=1, rtol=QUAD_RTOL) -> SpectrumResult:
    return full_spectra(grid, pump, crystal, [aperture], slit_nm, workers, rtol)[0]


def normalize_to_reference(results, reference: SpectrumResult):
    """Scale every result so the reference spectrum's raw maximum is 1."""
    peak = np.nanmax(reference.density_raw)
    if not peak > 0:
        raise ValueError("reference spectrum has no positive density")
    return [r.scaled(1.0 / peak) for r in results]


def _dual_cell_edges(omega):
    mid = 0.5 * (omega[1:] + omega[:-1])
    return np.concatenate([[omega[0]], mid, [omega[-1]]])


def convolve_slit(result: SpectrumResult, slit_nm) -> SpectrumResult:
    """Smooth with a top-hat of fixed wavelength width ``slit_nm``.

    In frequency the kernel width at w is w^2 * dlambda / (2 pi c). Each
    sample's trapezoid-weighted content is spread uniformly over its kernel
    (clipped to the grid) and re-binned onto the dual cells of the grid, so
    the trapezoid integral is conserved exactly up to rounding.
    """
    if not slit_nm > 0:
        raise ValueError("slit width must be positive")
    omega = result.omega
    d = result.density_raw
    widths = omega**2 * (slit_nm * 1e-9) / (2 * np.pi * c)
    if np.any(widths > omega[-1] - omega[0]):
        raise ValueError(
            f"slit kernel ({widths.max():.3e} rad/s) is wider than the grid span ({omega[-1] - omega[0]:.3e} rad/s)"
        )
    edges = _dual_cell_edges(omega)
    cell = np.diff(edges)
    lo = np.maximum(omega - 0.5 * widths, omega[0])
    hi = np.minimum(omega + 0.5 * widths, omega[-1])
    length = hi - lo
    overlap = np.clip(
        np.minimum(hi[None, :], edges[1:, None]) - np.maximum(lo[None, :], edges[:-1, None]), 0.0, None
    )
    mass = d * cell
    with np.errstate(invalid="ignore", divide="ignore"):
        share = np.where(length[None, :] > 0, overlap / length[None, :], np.eye(omega.size))
    convolved = share @ mass / cell
    return replace(result, density_convolved=convolved, slit_nm=float(slit_nm)).with_metrics()


def mean_frequency(omega, density) -> float:
    return float(trapezoid(density * omega, omega) / trapezoid(density, omega))


def half_max_crossings(x, y):
    """Linearly interpolated positions where ``y`` crosses half its maximum."""
    half = 0.5 * np.max(y)
    above = y >= half
    idx = np.nonzero(above[1:] != above[:-1])[0]
    out = []
    for i in idx:
        y0, y1 = y[i] - half, y[i + 1] - half
        out.append(x[i] + (x[i + 1] - x[i]) * y0 / (y0 - y1))
    return np.array(out)


def fwhm(result: SpectrumResult):
    """(FWHM in rad/s, FWHM over density-weighted mean frequency, FWHM in nm)."""
    d = result.density_convolved
    omega = result.omega
    crossings = half_max_crossings(omega, d)
    if crossings.size != 2:
        raise ShapeError(
            f"half maximum crossed {crossings.size} times (expected 2)", crossings=int(crossings.size)
        )
    lo, hi = crossings
    width = hi - lo
    lam = omega_to_wavelength_um(np.array([lo, hi])) * 1e3
    return float(width), float(width / mean_frequency(omega, d)), float(lam[0] - lam[1])


def relative_pair_rate(result: SpectrumResult) -> float:
    """Trapezoidal integral of the raw density over the grid (relative units)."""
    return float(trapezoid(result.density_raw, result.omega))


__all__ = [
    "CollectionAperture",
    "SpectrumResult",
    "check_grid",
    "convolve_slit",
    "default_grid",
    "full_spectra",
    "full_spectrum",
    "fwhm",
    "internal_aperture",
    "mc_oracle_density",
    "normalize_to_reference",
    "relative_pair_rate",
    "spectral_densities",
    "spectral_density",
]
