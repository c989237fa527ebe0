"""Command-line front end.

Configuration is resolved as built-in defaults < ``--config`` file < flags.
A ``--config`` file may be JSON or any CSV this tool wrote (its echo header
is read back).
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import correlation_from_amplitude, correlation_function
from .dispersion import find_zero_gvd, load_model, omega_to_wavelength_um
from .errors import ConfigError, ConvergenceError, SPDCError
from .phasematch import CrystalConfig, PumpConfig, degenerate_poling_period
from .records import load_config_file, write_csv, write_json
from .spectrum import (
    SpectrumResult,
    full_spectra,
    normalize_to_reference,
    relative_pair_rate,
)

log = logging.getLogger("wideband_spdc")

USAGE_EXIT = 2
SCAN_PARAMETERS = ("pump_wavelength", "poling_period", "aperture")


class UsageError(SPDCError):
    exit_code = USAGE_EXIT


@dataclass
class RunConfig:
    crystal_file: str | None = None
    pump_wavelength_nm: float = 942.5
    waist_um: float = 110.0
    length_cm: float = 1.0
    poling_period_um: float = 27.4
    temperature_c: float = 20.0
    apertures_deg: list = field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 2.5])
    grid_points: int = 400
    grid_span: list = field(default_factory=lambda: [0.55, 1.45])
    slit_nm: float | None = None
    reference_aperture_deg: float | None = None
    window_fraction: float | None = None
    correlation_samples: int = 2**14
    padding: int = 8
    synthetic_rectangle: float | None = None
    scan_parameter: str | None = None
    scan_range: list | None = None
    scan_steps: int | None = None
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"config: unknown field(s) {unknown}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        for name in ("pump_wavelength_nm", "waist_um", "length_cm", "poling_period_um"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(f"config: field {name!r} must be a positive number, got {value!r}")
        if not isinstance(self.apertures_deg, list) or not all(
            isinstance(a, (int, float)) and 0 < a < 90 for a in self.apertures_deg
        ):
            raise ConfigError("config: field 'apertures_deg' must be a list of angles in (0, 90)")
        if not isinstance(self.grid_points, int) or self.grid_points < 3:
            raise ConfigError("config: field 'grid_points' must be an integer >= 3")
        if not (isinstance(self.grid_span, list) and len(self.grid_span) == 2
                and 0 < self.grid_span[0] < self.grid_span[1] < 2):
            raise ConfigError("config: field 'grid_span' must be [low, high] with 0 < low < high < 2")
        if self.slit_nm is not None and not self.slit_nm > 0:
            raise ConfigError("config: field 'slit_nm' must be positive")

    def model(self):
        return load_model(self.crystal_file)

    def pump(self) -> PumpConfig:
        return PumpConfig(self.pump_wavelength_nm, self.waist_um)

    def crystal(self, model=None) -> CrystalConfig:
        return CrystalConfig(self.length_cm * 1e-2, self.poling_period_um, self.temperature_c,
                             model or self.model())

    def grid(self, pump: PumpConfig):
        lo, hi = self.grid_span
        return np.linspace(lo, hi, self.grid_points) * pump.degenerate_omega


_FLAG_FIELDS = {
    "crystal_file": "crystal_file",
    "pump_wavelength": "pump_wavelength_nm",
    "waist": "waist_um",
    "length": "length_cm",
    "poling_period": "poling_period_um",
    "temperature": "temperature_c",
    "apertures": "apertures_deg",
    "grid_points": "grid_points",
    "grid_span": "grid_span",
    "slit": "slit_nm",
    "reference_aperture": "reference_aperture_deg",
    "window_fraction": "window_fraction",
    "samples": "correlation_samples",
    "padding": "padding",
    "synthetic_rectangle": "synthetic_rectangle",
    "scan": "scan_parameter",
    "range": "scan_range",
    "steps": "scan_steps",
    "seed": "seed",
}


def resolve_config(args) -> RunConfig:
    data = asdict(RunConfig())
    if args.config:
        data.update(load_config_file(args.config))
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[name] = list(value) if isinstance(value, (list, tuple)) else value
    return RunConfig.from_dict(data)


def _fmt(x, digits=6):
    return "n/a" if x is None else f"{x:.{digits}g}"


def cmd_zero_gvd(cfg: RunConfig, out: Path):
    model = cfg.model()
    omega_d = find_zero_gvd(model, cfg.temperature_c)
    lambda_d_nm = float(omega_to_wavelength_um(omega_d)) * 1e3
    design_pump = PumpConfig(lambda_d_nm / 2, cfg.waist_um)
    period = degenerate_poling_period(design_pump, model, cfg.temperature_c)
    report = {
        "temperature_c": cfg.temperature_c,
        "degenerate_omega_rad_s": omega_d,
        "degenerate_wavelength_nm": lambda_d_nm,
        "pump_wavelength_nm": lambda_d_nm / 2,
        "poling_period_um": period,
        "crystal_model": model.name,
    }
    print(f"zero-GVD degenerate frequency  {omega_d:.9e} rad/s")
    print(f"degenerate wavelength          {lambda_d_nm:.3f} nm")
    print(f"design pump wavelength         {lambda_d_nm / 2:.3f} nm")
    print(f"degenerate poling period       {period:.4f} um")
    write_json(out / "zero_gvd.json", {"config": asdict(cfg), "version": __version__, "report": report})
    return 0


def cmd_poling_period(cfg: RunConfig, out: Path):
    pump = cfg.pump()
    period = degenerate_poling_period(pump, cfg.model(), cfg.temperature_c)
    print(f"pump {pump.wavelength_nm:.3f} nm at {cfg.temperature_c:g} C -> degenerate poling period {period:.4f} um")
    write_json(out / "poling_period.json",
               {"config": asdict(cfg), "version": __version__,
                "report": {"pump_wavelength_nm": pump.wavelength_nm, "poling_period_um": period}})
    return 0


def _spectrum_columns(res: SpectrumResult):
    return {
        "omega_rad_s": res.omega,
        "wavelength_nm": res.wavelength_nm,
        "density_raw": res.density_raw,
        "density_convolved": res.density_convolved,
    }


def _summary_row(res: SpectrumResult):
    return {
        "aperture_deg": res.aperture_deg,
        "peak_frequency_rad_s": res.peak_frequency,
        "fwhm_frequency_rad_s": res.fwhm_frequency,
        "fractional_bandwidth": res.fractional_bandwidth,
        "fwhm_wavelength_nm": res.fwhm_wavelength_nm,
        "mean_frequency_rad_s": res.mean_frequency,
        "relative_rate": relative_pair_rate(res) if not res.failures else None,
        "shape": res.shape_note,
        "failed_samples": sorted(res.failures),
    }


def _aperture_tag(deg):
    return f"{deg:g}".replace(".", "p")


def cmd_spectrum(cfg: RunConfig, out: Path, threads=1):
    if not cfg.apertures_deg:
        raise UsageError("spectrum needs at least one aperture")
    pump = cfg.pump()
    crystal = cfg.crystal()
    apertures = list(cfg.apertures_deg)
    reference = cfg.reference_aperture_deg
    if reference is not None and reference not in apertures:
        apertures.append(reference)
    status = 0
    try:
        results = full_spectra(cfg.grid(pump), pump, crystal, apertures, cfg.slit_nm, workers=threads)
    except ConvergenceError as exc:
        log.error("%s", exc)
        results = exc.partial
        status = exc.exit_code
    if reference is not None:
        ref = results[apertures.index(reference)]
        if not ref.failures:
            results = normalize_to_reference(results, ref)
    results = results[: len(cfg.apertures_deg)]

    note = results[0].normalization_note
    if reference is not None:
        note += f"; scaled so the {reference:g} deg spectrum peaks at 1"
    rows = []
    for res in results:
        extra = {"aperture_deg": res.aperture_deg, "normalization": note,
                 "fwhm_fraction": res.fractional_bandwidth, "partial": bool(res.failures)}
        write_csv(out / f"spectrum_aperture_{_aperture_tag(res.aperture_deg)}.csv", asdict(cfg),
                  _spectrum_columns(res), extra)
        rows.append(_summary_row(res))
        print(f"aperture {res.aperture_deg:g} deg: fractional FWHM {_fmt(res.fractional_bandwidth, 4)}, "
              f"FWHM {_fmt(res.fwhm_wavelength_nm, 5)} nm, {res.shape_note}")
    write_json(out / "summary.json", {"config": asdict(cfg), "version": __version__, "normalization": note,
                                      "complete": status == 0, "apertures": rows})
    return status


def _scan_row(cfg: RunConfig, parameter: str, value: float, model):
    pump = cfg.pump()
    crystal = cfg.crystal(model)
    aperture = cfg.apertures_deg[-1]
    if parameter == "pump_wavelength":
        pump = PumpConfig(value, cfg.waist_um)
    elif parameter == "poling_period":
        crystal = CrystalConfig(crystal.length_m, value, crystal.temperature, model)
    else:
        aperture = value
    grid = cfg.grid(pump)
    row = {"value": value, "aperture_deg": aperture, "fwhm_frequency_rad_s": None,
           "fractional_bandwidth": None, "fwhm_wavelength_nm": None, "relative_rate": None,
           "shape": "", "error": ""}
    try:
        res = full_spectra(grid, pump, crystal, [aperture], cfg.slit_nm)[0]
    except SPDCError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row.update(fwhm_frequency_rad_s=res.fwhm_frequency, fractional_bandwidth=res.fractional_bandwidth,
               fwhm_wavelength_nm=res.fwhm_wavelength_nm, relative_rate=relative_pair_rate(res))
    if res.fwhm_frequency is None:
        row["shape"] = "bimodal: " + res.shape_note if "crossed" in res.shape_note else res.shape_note
    else:
        row["shape"] = res.shape_note
    return row


def scan_values(cfg: RunConfig):
    if cfg.scan_parameter not in SCAN_PARAMETERS:
        raise UsageError(f"scan parameter must be one of {SCAN_PARAMETERS}, got {cfg.scan_parameter!r}")
    if cfg.scan_range is None or len(cfg.scan_range) != 2:
        raise UsageError("scan needs --range START STOP")
    if cfg.scan_steps is None or cfg.scan_steps < 2:
        raise UsageError("scan needs --steps >= 2")
    start, stop = cfg.scan_range
    if start == stop:
        raise UsageError("scan range endpoints must differ")
    return np.linspace(start, stop, cfg.scan_steps)


def cmd_scan(cfg: RunConfig, out: Path, threads=1):
    values = scan_values(cfg)
    model = cfg.model()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(lambda v: _scan_row(cfg, cfg.scan_parameter, float(v), model), values))
    widths = [r["fractional_bandwidth"] if r["fractional_bandwidth"] is not None else -np.inf for r in rows]
    best = int(np.argmax(widths)) if np.isfinite(max(widths)) else None
    for j, r in enumerate(rows):
        r["best"] = j == best
        print(f"{cfg.scan_parameter} = {r['value']:.6g}: fractional FWHM {_fmt(r['fractional_bandwidth'], 4)}"
              f"{'  <- widest' if r['best'] else ''}  {r['shape'] or r['error']}")
    nan = float("nan")
    columns = {
        "value": [r["value"] for r in rows],
        "aperture_deg": [r["aperture_deg"] for r in rows],
        "fwhm_frequency_rad_s": [nan if r["fwhm_frequency_rad_s"] is None else r["fwhm_frequency_rad_s"] for r in rows],
        "fractional_bandwidth": [nan if r["fractional_bandwidth"] is None else r["fractional_bandwidth"] for r in rows],
        "fwhm_wavelength_nm": [nan if r["fwhm_wavelength_nm"] is None else r["fwhm_wavelength_nm"] for r in rows],
        "relative_rate": [nan if r["relative_rate"] is None else r["relative_rate"] for r in rows],
        "widest": ["yes" if r["best"] else "no" for r in rows],
        "shape": [r["shape"] or r["error"] for r in rows],
    }
    write_csv(out / f"scan_{cfg.scan_parameter}.csv", asdict(cfg), columns)
    return 0


def cmd_correlation(cfg: RunConfig, out: Path):
    synthetic_rectangle = cfg.synthetic_rectangle
    pump = cfg.pump()
    crystal = cfg.crystal()
    window = None if cfg.window_fraction is None else cfg.window_fraction * pump.degenerate_omega
    extra = {}
    if synthetic_rectangle is not None:
        width = synthetic_rectangle * pump.degenerate_omega
        half = window or 2 * width
        delta = np.linspace(-half, half, cfg.correlation_samples)
        amplitude = (np.abs(delta) <= width / 2).astype(float)
        res = correlation_from_amplitude(delta, amplitude, cfg.padding)
        analytic = 5.566229611 / width
        extra = {"synthetic_rectangle_width_rad_s": width, "analytic_fwhm_s": analytic}
        print(f"synthetic rectangle: analytic FWHM {analytic * 1e15:.4f} fs")
    else:
        res = correlation_function(pump, crystal, window, cfg.correlation_samples, cfg.padding)
    print(f"correlation time ({res.measure}): {res.correlation_time_fwhm * 1e15:.4f} fs")
    keep = np.abs(res.tau) <= 20 * res.correlation_time_fwhm
    extra.update({"correlation_time_fwhm_s": res.correlation_time_fwhm, "measure": res.measure,
                  "window_half_width_rad_s": res.window_half_width})
    write_csv(out / "correlation.csv", asdict(cfg),
              {"tau_fs": res.tau[keep] * 1e15, "magnitude_squared": res.magnitude_squared[keep]}, extra)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config, or a CSV previously written by this tool")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="seed recorded with the run")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--crystal-file", dest="crystal_file", help="dispersion JSON (default: bundled LiNbO3)")
    common.add_argument("--pump-wavelength", dest="pump_wavelength", type=float, help="nm")
    common.add_argument("--waist", type=float, help="pump waist, um")
    common.add_argument("--length", type=float, help="crystal length, cm")
    common.add_argument("--poling-period", dest="poling_period", type=float, help="um")
    common.add_argument("--temperature", type=float, help="C")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wideband-spdc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("zero-gvd", parents=[common], help="zero-GVD degenerate point and matching poling period")
    sub.add_parser("poling-period", parents=[common], help="degenerate poling period for the configured pump")

    spectrum_cmd = sub.add_parser("spectrum", parents=[common], help="signal spectra for one or more apertures")
    spectrum_cmd.add_argument("--apertures", type=float, nargs="*", help="external half-angles, degrees")
    spectrum_cmd.add_argument("--grid-points", dest="grid_points", type=int)
    spectrum_cmd.add_argument("--grid-span", dest="grid_span", type=float, nargs=2, help="fractions of w_d")
    spectrum_cmd.add_argument("--slit", type=float, help="spectrometer slit width, nm")
    spectrum_cmd.add_argument("--reference-aperture", dest="reference_aperture", type=float,
                      help="scale all spectra so this aperture's spectrum peaks at 1")

    scan = sub.add_parser("scan", parents=[common], help="bandwidth versus one parameter")
    scan.add_argument("--scan", required=True, choices=SCAN_PARAMETERS)
    scan.add_argument("--range", type=float, nargs=2, required=True, metavar=("START", "STOP"))
    scan.add_argument("--steps", type=int, required=True)
    scan.add_argument("--apertures", type=float, nargs="*", help="the last one is used for the scan")
    scan.add_argument("--grid-points", dest="grid_points", type=int)
    scan.add_argument("--grid-span", dest="grid_span", type=float, nargs=2)
    scan.add_argument("--slit", type=float)

    corr = sub.add_parser("correlation", parents=[common], help="on-axis correlation time")
    corr.add_argument("--window-fraction", dest="window_fraction", type=float,
                      help="detuning half-width as a fraction of w_d (default 0.6)")
    corr.add_argument("--samples", type=int, help="power of two >= 4096")
    corr.add_argument("--padding", type=int)
    corr.add_argument("--synthetic-rectangle", dest="synthetic_rectangle", type=float,
                      help="replace the crystal amplitude by a rectangle this wide (fraction of w_d)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        cfg = resolve_config(args)
        if args.command == "zero-gvd":
            return cmd_zero_gvd(cfg, out)
        if args.command == "poling-period":
            return cmd_poling_period(cfg, out)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out, args.threads)
        if args.command == "scan":
            return cmd_scan(cfg, out, args.threads)
        return cmd_correlation(cfg, out)
    except SPDCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, ConvergenceError) and exc.estimates:
            print(f"last estimates: {exc.estimates}", file=sys.stderr)
        return exc.exit_code
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
