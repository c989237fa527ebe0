import json

import numpy as np
import pytest

from wideband_spdc.cli import RunConfig, main
from wideband_spdc.records import read_csv

FAST_SPECTRUM = ["--grid-points", "9", "--apertures", "0.5", "1.5"]


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_zero_gvd_report(tmp_path, capsys):
    assert run(tmp_path, "zero-gvd") == 0
    report = json.loads((tmp_path / "zero_gvd.json").read_text())["report"]
    assert report["pump_wavelength_nm"] == pytest.approx(958.7, abs=0.5)
    assert report["poling_period_um"] == pytest.approx(28.1, abs=0.1)
    assert "958.70" in capsys.readouterr().out


def test_zero_gvd_deterministic(tmp_path):
    run(tmp_path / "a", "zero-gvd")
    run(tmp_path / "b", "zero-gvd")
    assert (tmp_path / "a" / "zero_gvd.json").read_bytes() == (tmp_path / "b" / "zero_gvd.json").read_bytes()


def test_malformed_crystal_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "form": "jundt", "coefficients": {"a1": 1.0},
                               "wavelength_validity_um": [0.4, 5], "temperature_validity_c": [20, 250]}))
    assert run(tmp_path, "zero-gvd", "--crystal-file", str(bad)) == 3
    assert "a2" in capsys.readouterr().err


def test_unparseable_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert run(tmp_path, "poling-period", "--config", str(cfg)) == 3
    cfg.write_text(json.dumps({"pump_wavelength": 900}))
    assert run(tmp_path, "poling-period", "--config", str(cfg)) == 3


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"pump_wavelength_nm": 950.0, "temperature_c": 40.0}))
    assert run(tmp_path, "poling-period", "--config", str(cfg), "--pump-wavelength", "942.5") == 0
    echoed = json.loads((tmp_path / "poling_period.json").read_text())["config"]
    assert echoed["pump_wavelength_nm"] == 942.5
    assert echoed["temperature_c"] == 40.0


def test_range_error_exit(tmp_path):
    assert run(tmp_path, "poling-period", "--pump-wavelength", "300") == 4


def test_nonpositive_parameter(tmp_path):
    assert run(tmp_path, "poling-period", "--waist", "-5") == 3


def test_spectrum_outputs(tmp_path):
    assert run(tmp_path, "spectrum", *FAST_SPECTRUM) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["complete"]
    rates = [row["relative_rate"] for row in summary["apertures"]]
    assert rates == sorted(rates)
    header, cols = read_csv(tmp_path / "spectrum_aperture_1p5.csv")
    assert header["config"]["apertures_deg"] == [0.5, 1.5]
    assert np.all(cols["density_raw"] >= 0)
    assert cols["omega_rad_s"].size == 9


def test_spectrum_rerun_from_header_is_identical(tmp_path):
    run(tmp_path / "a", "spectrum", *FAST_SPECTRUM, "--slit", "20", "--reference-aperture", "1.5")
    first = tmp_path / "a" / "spectrum_aperture_0p5.csv"
    run(tmp_path / "b", "spectrum", "--config", str(first))
    assert first.read_bytes() == (tmp_path / "b" / "spectrum_aperture_0p5.csv").read_bytes()


def test_spectrum_reference_normalization(tmp_path):
    run(tmp_path, "spectrum", *FAST_SPECTRUM, "--reference-aperture", "1.5")
    _, cols = read_csv(tmp_path / "spectrum_aperture_1p5.csv")
    assert cols["density_raw"].max() == pytest.approx(1.0)


def test_spectrum_empty_apertures(tmp_path):
    assert run(tmp_path, "spectrum", "--apertures") == 2


def test_scan_usage_errors(tmp_path):
    assert run(tmp_path, "scan", "--scan", "aperture", "--range", "1", "1", "--steps", "3") == 2
    assert run(tmp_path, "scan", "--scan", "aperture", "--range", "1", "2", "--steps", "1") == 2
    with pytest.raises(SystemExit) as info:
        run(tmp_path, "scan", "--scan", "length", "--range", "1", "2", "--steps", "3")
    assert info.value.code == 2


def test_scan_rows(tmp_path):
    assert run(tmp_path, "scan", "--scan", "aperture", "--range", "0.5", "2.0", "--steps", "3",
               "--grid-points", "9") == 0
    _, cols = read_csv(tmp_path / "scan_aperture.csv")
    assert cols["value"].size == 3
    assert cols["widest"].count("yes") == 1
    assert np.all(np.diff(cols["relative_rate"]) > 0)


def test_scan_row_failure_recorded(tmp_path):
    # 300 nm lies outside the dispersion data; the row fails but the scan carries on
    assert run(tmp_path, "scan", "--scan", "pump_wavelength", "--range", "300", "942.5", "--steps", "2",
               "--grid-points", "9", "--apertures", "1.0") == 0
    _, cols = read_csv(tmp_path / "scan_pump_wavelength.csv")
    assert "RangeError" in cols["shape"][0]
    assert cols["widest"] == ["no", "yes"]


@pytest.mark.slow
def test_pump_scan_flags_center_sag(tmp_path):
    assert run(tmp_path, "scan", "--scan", "pump_wavelength", "--range", "942.5", "952.5", "--steps", "3",
               "--grid-points", "41") == 0
    _, cols = read_csv(tmp_path / "scan_pump_wavelength.csv")
    assert cols["shape"][0] == "single-lobed"
    assert cols["shape"][-1].startswith("bimodal")


def test_correlation_defaults_echoed(tmp_path):
    assert run(tmp_path, "correlation") == 0
    header, cols = read_csv(tmp_path / "correlation.csv")
    assert header["window_half_width_rad_s"] > 0
    assert "FWHM" in header["measure"]
    assert cols["magnitude_squared"].max() == pytest.approx(1.0, rel=1e-3)


def test_correlation_synthetic_rectangle(tmp_path):
    assert run(tmp_path, "correlation", "--synthetic-rectangle", "0.2") == 0
    header, _ = read_csv(tmp_path / "correlation.csv")
    assert header["correlation_time_fwhm_s"] == pytest.approx(header["analytic_fwhm_s"], rel=0.01)


def test_correlation_window_error(tmp_path, capsys):
    assert run(tmp_path, "correlation", "--window-fraction", "0.02") == 8
    assert "widen" in capsys.readouterr().err


def test_run_config_rejects_unknown():
    with pytest.raises(Exception, match="bogus"):
        RunConfig.from_dict({"bogus": 1})
