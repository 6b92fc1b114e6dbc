import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringsource.config import (
    EnergyConservationWarning,
    config_from_dict,
    config_to_dict,
    load_device_config,
    paper_device_path,
    save_device_config,
)
from ringsource.errors import ConfigError, ValidationError
from ringsource.estimation import fit_lorentzian_dip
from ringsource.resonator import ResonatorParams, transmission_dip
from ringsource.tables import read_table_csv, read_xy_csv, write_table_csv


def bundled_dict():
    return json.loads(paper_device_path().read_text())


def test_bundled_config_loads(device):
    assert device.geometry.radius == 19e-6
    assert device.resonator.q_loaded == 160000
    assert device.chain.window == 1152e-12
    assert device.chain.detector_qe == 0.65
    assert device.gamma == pytest.approx(5.488496719647318, rel=1e-12)
    assert device.resonator.extinction == pytest.approx(10 ** -2.3, rel=1e-12)


def test_bundled_config_warns_on_wavelength_plan():
    # 777.5 / 785 / 792.5 nm miss energy conservation by ~9e-5
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        load_device_config(paper_device_path())
    assert any(issubclass(w.category, EnergyConservationWarning) for w in caught)


def test_energy_conservation_hard_limit():
    d = bundled_dict()
    d["nonlinear"]["idler_wavelength_nm"] = 800.0
    with pytest.raises(ConfigError, match="nonlinear"):
        config_from_dict(d)


def test_degenerate_plan_is_valid():
    d = bundled_dict()
    for k in ("signal_wavelength_nm", "idler_wavelength_nm"):
        d["nonlinear"][k] = 785.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cfg = config_from_dict(d)
    assert cfg.nonlinear.energy_mismatch() == 0.0


@pytest.mark.parametrize("section,key,value", [
    ("resonator", "q_intrinsic", -5.0),
    ("geometry", "radius_um", 0.0),
    ("chain", "eta_s_db", -1.0),
    ("chain", "detector_qe", 1.2),
    ("noise", "dark_count_idler_per_s", -3.0),
    ("geometry", "group_index", 0.9),
    ("nonlinear", "pump_wavelength_nm", "785"),
])
def test_invalid_fields_are_named(section, key, value):
    d = bundled_dict()
    d[section][key] = value
    with pytest.raises(ConfigError) as err:
        config_from_dict(d)
    assert err.value.field == f"{section}.{key}"


def test_missing_field_is_named():
    d = bundled_dict()
    del d["chain"]["window_ps"]
    with pytest.raises(ConfigError) as err:
        config_from_dict(d)
    assert err.value.field == "chain.window_ps"
    with pytest.raises(ConfigError):
        config_from_dict({"geometry": {}})


def test_round_trip(tmp_path, device):
    path = tmp_path / "cfg.json"
    save_device_config(device, path)
    again = load_device_config(path)
    assert again == device
    assert again.metadata == device.metadata


@settings(max_examples=50, deadline=None)
@given(radius=st.floats(1, 500), ng=st.floats(1.01, 5), area=st.floats(0.01, 10),
       qi=st.floats(1e3, 1e7), qc=st.floats(1e3, 1e7), eta=st.floats(0, 60),
       window=st.floats(1, 1e5), kr=st.floats(0, 1e12))
def test_round_trip_random(tmp_path_factory, radius, ng, area, qi, qc, eta, window, kr):
    d = bundled_dict()
    d["geometry"].update(radius_um=radius, group_index=ng, effective_area_um2=area)
    d["resonator"] = {"q_intrinsic": qi, "q_coupling": qc}
    d["chain"].update(eta_s_db=eta, window_ps=window)
    d["noise"]["raman_coefficient_per_s_per_w"] = kr
    cfg = config_from_dict(d)
    path = tmp_path_factory.mktemp("rt") / "c.json"
    save_device_config(cfg, path)
    assert load_device_config(path) == cfg


def test_infinite_coupling_q_round_trips(tmp_path, device):
    cfg = device.replace(resonator__q_coupling=math.inf)
    save_device_config(cfg, tmp_path / "c.json")
    assert load_device_config(tmp_path / "c.json") == cfg


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_device_config(p)


# -- CSV -----------------------------------------------------------------

def test_table_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    rows = (rng.standard_normal((1000, 3)) * 10.0 ** rng.integers(-20, 20, (1000, 3))).tolist()
    write_table_csv(tmp_path / "t.csv", ["a", "b", "c"], rows)
    header, back = read_table_csv(tmp_path / "t.csv")
    assert header == ["a", "b", "c"]
    assert back == rows


def test_empty_file(tmp_path):
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(ValidationError, match="empty"):
        read_xy_csv(tmp_path / "e.csv")
    (tmp_path / "h.csv").write_text("freq_hz,transmission\n")
    with pytest.raises(ValidationError, match="no data"):
        read_xy_csv(tmp_path / "h.csv")


def test_malformed_row_reports_line(tmp_path):
    (tmp_path / "m.csv").write_text("x,y\n1,2\n3,abc\n")
    with pytest.raises(ValidationError, match=":3:"):
        read_xy_csv(tmp_path / "m.csv")
    (tmp_path / "n.csv").write_text("x,y\n1,2\n3\n")
    with pytest.raises(ValidationError, match=":3:"):
        read_xy_csv(tmp_path / "n.csv")


def test_spectrum_csv_feeds_fit(tmp_path):
    p = ResonatorParams(3.819e14, 320000, 320000, 0.005)
    nu = p.resonance_frequency + np.linspace(-5, 5, 2001) * p.linewidth
    y = transmission_dip(nu - p.resonance_frequency, p)
    write_table_csv(tmp_path / "s.csv", ["freq_hz", "transmission"], list(zip(nu.tolist(), y.tolist())))
    rep = fit_lorentzian_dip(read_xy_csv(tmp_path / "s.csv"))
    assert rep.params["q_loaded"] == pytest.approx(160000, rel=1e-6)
