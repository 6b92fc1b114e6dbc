"""
Device configuration: one validated record holding every model input.

On disk the configuration is JSON with the unit in each key name::

    {
      "metadata": {"description": "..."},
      "geometry":  {"radius_um": 19.0, "group_index": 2.0, "effective_area_um2": 0.35},
      "resonator": {"q_intrinsic": 320000, "q_coupling": 320000, "extinction_db": 23.0},
      "nonlinear": {"n_nl_m2_per_w": 2.4e-19, "pump_wavelength_nm": 785.0,
                    "signal_wavelength_nm": 777.5, "idler_wavelength_nm": 792.5},
      "noise":     {"raman_coefficient_per_s_per_w": 3.0e9, "temperature_k": 295.0,
                    "dark_count_signal_per_s": 250.0, "dark_count_idler_per_s": 250.0},
      "chain":     {"eta_s_db": 16.4, "eta_i_db": 24.1, "window_ps": 1152.0,
                    "detector_jitter_fwhm_ps": 350.0, "detector_qe": 0.65, "deadtime_ps": 0.0}
    }

``q_coupling`` may be the string ``"inf"``. The on-resonance transmittance is
given either as ``extinction_db`` or directly as ``extinction`` (the form
written back by :func:`save_device_config`); without either it defaults to the
ideal all-pass value for the given Q pair. ``temperature_k``,
``detector_jitter_fwhm_ps``, ``detector_qe`` and ``deadtime_ps`` are optional.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import re
import tempfile
import warnings
from dataclasses import dataclass, field
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import ConfigError, ValidationError
from .noisemodel import DetectionChain, NoiseParams
from .pairgen import NonlinearParams, nonlinear_parameter
from .quantities import (
    db_loss_to_transmittance,
    wavelength_to_angular_frequency,
    wavelength_to_frequency,
)
from .resonator import ResonatorParams, RingGeometry, ideal_extinction

# relative violation of 2/lp = 1/ls + 1/li
ENERGY_TOLERANCE = 1e-6
ENERGY_TOLERANCE_HARD = 1e-4


class EnergyConservationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DeviceConfig:
    geometry: RingGeometry
    resonator: ResonatorParams
    nonlinear: NonlinearParams
    noise: NoiseParams
    chain: DetectionChain
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        mismatch = self.nonlinear.energy_mismatch()
        if mismatch > ENERGY_TOLERANCE_HARD:
            raise ConfigError("nonlinear", f"energy conservation violated by {mismatch:.3g} (relative)")

    @property
    def gamma(self) -> float:
        return nonlinear_parameter(self.nonlinear.n_nl, self.nonlinear.pump_wavelength,
                                   self.geometry.effective_area)

    @property
    def pump_omega(self) -> float:
        return wavelength_to_angular_frequency(self.nonlinear.pump_wavelength)

    @property
    def raman_detuning(self) -> float:
        """Half the signal-idler splitting [Hz], the Raman shift used for both channels."""
        nu_s = wavelength_to_frequency(self.nonlinear.signal_wavelength)
        nu_i = wavelength_to_frequency(self.nonlinear.idler_wavelength)
        # 0 for a degenerate plan; the phonon weighting is then undefined
        return abs(nu_s - nu_i) / 2.0

    def replace(self, **sections: Any) -> "DeviceConfig":
        """Copy with whole sections or dotted ``section__field`` values replaced."""
        direct = {k: v for k, v in sections.items() if "__" not in k}
        nested: dict[str, dict[str, Any]] = {}
        for k, v in sections.items():
            if "__" in k:
                sec, name = k.split("__", 1)
                nested.setdefault(sec, {})[name] = v
        for sec, changes in nested.items():
            direct[sec] = dataclasses.replace(direct.get(sec, getattr(self, sec)), **changes)
        return dataclasses.replace(self, **direct)


def _to_decimal(v: Any) -> Decimal:
    # floats go through repr so the shortest round-tripping digits are used
    return v if isinstance(v, Decimal) else Decimal(repr(float(v))) if isinstance(v, float) else Decimal(v)


def _unit_value(si: float, exp10: int) -> Decimal | float:
    """SI value -> exact decimal in file units; reloading the digits gives ``si`` back."""
    if not math.isfinite(si):
        return si
    return _to_decimal(si).scaleb(exp10)


def _check_number(path: str, key: str, raw: Any) -> None:
    if isinstance(raw, bool) or not isinstance(raw, (int, float, Decimal)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {raw!r}")


def _get(section: dict, path: str, key: str, *, default: Any = dataclasses.MISSING,
         exp10: int = 0) -> float:
    """Numeric field converted to SI by ``10**exp10``.

    The scaling is done on the decimal digits from the file, so a value written
    by :func:`config_to_dict` reloads to the identical double.
    """
    if key not in section:
        if default is dataclasses.MISSING:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    raw = section[key]
    if isinstance(raw, str) and raw.lower() in ("inf", "infinity"):
        return math.inf
    _check_number(path, key, raw)
    if isinstance(raw, float) and not math.isfinite(raw):
        return raw
    d = _to_decimal(raw)
    if not d.is_finite():
        return float(d)
    return float(d.scaleb(exp10)) if exp10 else float(d)


def _section(data: dict, name: str) -> dict:
    sec = data.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(name, "missing or not an object")
    return sec


def _positive(path: str, v: float) -> float:
    if not (v > 0) or math.isnan(v):
        raise ConfigError(path, f"must be > 0, got {v!r}")
    return v


def _nonneg(path: str, v: float) -> float:
    if not (v >= 0 and math.isfinite(v)):
        raise ConfigError(path, f"must be finite and >= 0, got {v!r}")
    return v


def config_from_dict(data: dict) -> DeviceConfig:
    """Validate a parsed JSON document into a :class:`DeviceConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")

    g = _section(data, "geometry")
    radius = _positive("geometry.radius_um", _get(g, "geometry", "radius_um", exp10=-6))
    n_g = _get(g, "geometry", "group_index")
    if not n_g > 1:
        raise ConfigError("geometry.group_index", f"must be > 1, got {n_g!r}")
    a_eff = _positive("geometry.effective_area_um2", _get(g, "geometry", "effective_area_um2", exp10=-12))

    nl = _section(data, "nonlinear")
    n_nl = _positive("nonlinear.n_nl_m2_per_w", _get(nl, "nonlinear", "n_nl_m2_per_w"))
    lam = {}
    for k in ("pump", "signal", "idler"):
        key = f"{k}_wavelength_nm"
        lam[k] = _positive(f"nonlinear.{key}", _get(nl, "nonlinear", key, exp10=-9))

    r = _section(data, "resonator")
    qi = _positive("resonator.q_intrinsic", _get(r, "resonator", "q_intrinsic"))
    qc = _positive("resonator.q_coupling", _get(r, "resonator", "q_coupling"))
    if "extinction_db" in r and "extinction" in r:
        raise ConfigError("resonator.extinction", "give extinction_db or extinction, not both")
    if "extinction_db" in r:
        ext_db = _get(r, "resonator", "extinction_db")
        if ext_db == math.inf:
            ext = 0.0
        else:
            ext = db_loss_to_transmittance(_nonneg("resonator.extinction_db", ext_db))
    elif "extinction" in r:
        ext = _get(r, "resonator", "extinction")
        if not 0 <= ext <= 1:
            raise ConfigError("resonator.extinction", f"must lie in [0, 1], got {ext!r}")
    else:
        ext = ideal_extinction(qi, qc)

    n = _section(data, "noise")
    noise_kw = dict(
        raman_coefficient=_nonneg("noise.raman_coefficient_per_s_per_w",
                                  _get(n, "noise", "raman_coefficient_per_s_per_w")),
        dark_count_signal=_nonneg("noise.dark_count_signal_per_s",
                                  _get(n, "noise", "dark_count_signal_per_s")),
        dark_count_idler=_nonneg("noise.dark_count_idler_per_s",
                                 _get(n, "noise", "dark_count_idler_per_s")),
        temperature=_positive("noise.temperature_k", _get(n, "noise", "temperature_k", default=295.0)),
    )

    c = _section(data, "chain")
    qe = _get(c, "chain", "detector_qe", default=1.0)
    if not 0 < qe <= 1:
        raise ConfigError("chain.detector_qe", f"must lie in (0, 1], got {qe!r}")
    chain_kw = dict(
        eta_s_db=_nonneg("chain.eta_s_db", _get(c, "chain", "eta_s_db")),
        eta_i_db=_nonneg("chain.eta_i_db", _get(c, "chain", "eta_i_db")),
        window=_positive("chain.window_ps", _get(c, "chain", "window_ps", exp10=-12)),
        jitter_fwhm=_nonneg("chain.detector_jitter_fwhm_ps",
                            _get(c, "chain", "detector_jitter_fwhm_ps", default=0.0, exp10=-12)),
        detector_qe=qe,
        deadtime=_nonneg("chain.deadtime_ps", _get(c, "chain", "deadtime_ps", default=0.0, exp10=-12)),
    )

    metadata = data.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ConfigError("metadata", "must be an object")

    try:
        cfg = DeviceConfig(
            geometry=RingGeometry(radius, n_g, a_eff),
            resonator=ResonatorParams(wavelength_to_frequency(lam["pump"]), qi, qc, ext),
            nonlinear=NonlinearParams(n_nl, lam["pump"], lam["signal"], lam["idler"]),
            noise=NoiseParams(**noise_kw),
            chain=DetectionChain(**chain_kw),
            metadata=metadata,
        )
    except ConfigError:
        raise
    except ValidationError as exc:
        raise ConfigError("<config>", str(exc)) from exc
    mismatch = cfg.nonlinear.energy_mismatch()
    if mismatch > ENERGY_TOLERANCE:
        warnings.warn(f"wavelength plan violates energy conservation by {mismatch:.3g} "
                      f"(relative); accepted below {ENERGY_TOLERANCE_HARD:g}",
                      EnergyConservationWarning, stacklevel=2)
    return cfg


def config_to_dict(cfg: DeviceConfig) -> dict:
    """Inverse of :func:`config_from_dict` (SI back to the unit-suffixed keys)."""
    qc = cfg.resonator.q_coupling
    return {
        "metadata": dict(cfg.metadata),
        "geometry": {
            "radius_um": _unit_value(cfg.geometry.radius, 6),
            "group_index": cfg.geometry.group_index,
            "effective_area_um2": _unit_value(cfg.geometry.effective_area, 12),
        },
        "resonator": {
            "q_intrinsic": cfg.resonator.q_intrinsic,
            "q_coupling": "inf" if math.isinf(qc) else qc,
            "extinction": cfg.resonator.extinction,
        },
        "nonlinear": {
            "n_nl_m2_per_w": cfg.nonlinear.n_nl,
            "pump_wavelength_nm": _unit_value(cfg.nonlinear.pump_wavelength, 9),
            "signal_wavelength_nm": _unit_value(cfg.nonlinear.signal_wavelength, 9),
            "idler_wavelength_nm": _unit_value(cfg.nonlinear.idler_wavelength, 9),
        },
        "noise": {
            "raman_coefficient_per_s_per_w": cfg.noise.raman_coefficient,
            "temperature_k": cfg.noise.temperature,
            "dark_count_signal_per_s": cfg.noise.dark_count_signal,
            "dark_count_idler_per_s": cfg.noise.dark_count_idler,
        },
        "chain": {
            "eta_s_db": cfg.chain.eta_s_db,
            "eta_i_db": cfg.chain.eta_i_db,
            "window_ps": _unit_value(cfg.chain.window, 12),
            "detector_jitter_fwhm_ps": _unit_value(cfg.chain.jitter_fwhm, 12),
            "detector_qe": cfg.chain.detector_qe,
            "deadtime_ps": _unit_value(cfg.chain.deadtime, 12),
        },
    }


def load_device_config(path: str | os.PathLike) -> DeviceConfig:
    """Read and validate a JSON device configuration."""
    text = Path(path).read_text()
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    return config_from_dict(data)


_RAW = "\x00raw:"


def _dumps(doc: dict, **kw: Any) -> str:
    """json.dumps that writes Decimal values as bare numbers with their exact digits."""
    def enc(o: Any) -> str:
        if isinstance(o, Decimal):
            return _RAW + (format(o, "f") if -7 <= o.adjusted() <= 15 else str(o))
        raise TypeError(f"not JSON serializable: {type(o).__name__}")
    text = json.dumps(doc, default=enc, **kw)
    return re.sub(r'"\\u0000raw:([^"]*)"', r"\1", text)


def save_device_config(cfg: DeviceConfig, path: str | os.PathLike) -> None:
    atomic_write_text(path, _dumps(config_to_dict(cfg), indent=2) + "\n")


def paper_device_path() -> Path:
    """Path of the bundled configuration modelled on the published device."""
    return Path(str(resources.files("ringsource") / "data" / "paper_device.json"))


def paper_device() -> DeviceConfig:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EnergyConservationWarning)
        return load_device_config(paper_device_path())


def config_hash(cfg: DeviceConfig) -> str:
    """SHA-256 of the canonical JSON form (metadata excluded)."""
    d = config_to_dict(cfg)
    d.pop("metadata", None)
    blob = _dumps(d, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the target directory and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
