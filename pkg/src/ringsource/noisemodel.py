"""
Analytic singles, coincidences, accidentals and CAR versus pump power.

    CC  = G * eta_s * eta_i
    AC  = R_s * R_i * dt
    R_s = (n_s + G) * eta_s + dc_s
    R_i = (n_i + G) * eta_i + dc_i
    CAR = CC / AC

Collection efficiencies are transmittances here (converted from dB). The
linear noise n_s, n_i is spontaneous Raman scattering: one coefficient k_R
per watt of bus pump power, weighted by the thermal phonon occupancy n_th on
the anti-Stokes (signal) side and by n_th + 1 on the Stokes (idler) side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .pairgen import pair_generation_rate, sfwm_power
from .quantities import H, K_B, db_loss_to_transmittance

if TYPE_CHECKING:
    from .config import DeviceConfig


@dataclass(frozen=True)
class NoiseParams:
    """
    Uncorrelated-noise sources.

    Parameters
    ----------
    raman_coefficient : float
        k_R, Raman photons/s per W of pump per channel before phonon weighting.
    dark_count_signal, dark_count_idler : float
        Detector dark-count rates [1/s].
    temperature : float
        Lattice temperature [K].
    """

    raman_coefficient: float
    dark_count_signal: float
    dark_count_idler: float
    temperature: float = 295.0

    def __post_init__(self) -> None:
        for name in ("raman_coefficient", "dark_count_signal", "dark_count_idler"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be >= 0, got {v!r}")
        if not self.temperature > 0:
            raise ValidationError(f"temperature must be > 0, got {self.temperature!r}")


@dataclass(frozen=True)
class DetectionChain:
    """
    Collection and timing chain.

    ``eta_s_db``/``eta_i_db`` are total losses including detector efficiency;
    ``detector_qe`` is kept only for reporting a loss breakdown.
    ``jitter_fwhm`` is per detector, so the delay histogram of a pair peak is
    wider by sqrt(2).
    """

    eta_s_db: float
    eta_i_db: float
    window: float
    jitter_fwhm: float = 0.0
    detector_qe: float = 1.0
    deadtime: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eta_s_db", "eta_i_db"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be a finite loss >= 0 dB, got {v!r}")
        if not self.window > 0:
            raise ValidationError(f"window must be > 0, got {self.window!r}")
        if not self.jitter_fwhm >= 0:
            raise ValidationError(f"jitter_fwhm must be >= 0, got {self.jitter_fwhm!r}")
        if not 0 < self.detector_qe <= 1:
            raise ValidationError(f"detector_qe must lie in (0, 1], got {self.detector_qe!r}")
        if not self.deadtime >= 0:
            raise ValidationError(f"deadtime must be >= 0, got {self.deadtime!r}")

    @property
    def eta_s(self) -> float:
        return db_loss_to_transmittance(self.eta_s_db)

    @property
    def eta_i(self) -> float:
        return db_loss_to_transmittance(self.eta_i_db)


@dataclass(frozen=True)
class CarPoint:
    pump_power: float
    pair_rate: float
    sfwm_power: float
    r_s: float
    r_i: float
    cc: float
    ac: float
    car: float


def thermal_occupancy(detuning_hz: float, temperature: float) -> float:
    """Bose-Einstein phonon occupancy 1/(exp(h nu / k_B T) - 1)."""
    if not detuning_hz > 0:
        raise DomainError(f"detuning must be > 0, got {detuning_hz!r}")
    if not temperature > 0:
        raise DomainError(f"temperature must be > 0, got {temperature!r}")
    x = H * detuning_hz / (K_B * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def raman_noise_rates(raman_coefficient: float, pump_power, detuning_hz: float,
                      temperature: float):
    """Anti-Stokes (signal) and Stokes (idler) Raman photon rates at the ring.

    Returns ``(n_s, n_i)``; arrays if ``pump_power`` is an array.
    """
    if not raman_coefficient >= 0:
        raise DomainError(f"raman_coefficient must be >= 0, got {raman_coefficient!r}")
    p = np.asarray(pump_power, dtype=float)
    if np.any(np.isnan(p)) or np.any(p < 0):
        raise DomainError(f"pump power must be >= 0, got {pump_power!r}")
    n_th = thermal_occupancy(detuning_hz, temperature)
    base = raman_coefficient * p
    n_s, n_i = base * n_th, base * (n_th + 1.0)
    if p.ndim == 0:
        return float(n_s), float(n_i)
    return n_s, n_i


def _nonneg(name, *values):
    for v in values:
        a = np.asarray(v, dtype=float)
        if np.any(np.isnan(a)) or np.any(a < 0):
            raise ValidationError(f"{name} must be >= 0, got {v!r}")


def singles_rates(pair_rate, n_s, n_i, noise: NoiseParams, chain: DetectionChain):
    """Detected singles (R_s, R_i) [1/s]."""
    _nonneg("rates", pair_rate, n_s, n_i)
    r_s = (np.asarray(n_s, dtype=float) + pair_rate) * chain.eta_s + noise.dark_count_signal
    r_i = (np.asarray(n_i, dtype=float) + pair_rate) * chain.eta_i + noise.dark_count_idler
    if r_s.ndim == 0:
        return float(r_s), float(r_i)
    return r_s, r_i


def coincidence_rates(pair_rate, r_s, r_i, chain: DetectionChain):
    """True-pair coincidences CC and accidentals AC [1/s]."""
    _nonneg("rates", pair_rate, r_s, r_i)
    cc = np.asarray(pair_rate, dtype=float) * chain.eta_s * chain.eta_i
    ac = np.asarray(r_s, dtype=float) * np.asarray(r_i, dtype=float) * chain.window
    if cc.ndim == 0 and ac.ndim == 0:
        return float(cc), float(ac)
    return cc, ac


def car(cc, ac):
    """CC/AC with sentinels instead of division errors.

    ``inf`` when AC == 0 < CC, ``nan`` when both are zero.
    """
    cc_a = np.asarray(cc, dtype=float)
    ac_a = np.asarray(ac, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ac_a > 0, cc_a / np.where(ac_a > 0, ac_a, 1.0),
                       np.where(cc_a > 0, np.inf, np.nan))
    return float(out) if out.ndim == 0 else out


def car_curve(device: "DeviceConfig", powers: Sequence[float]) -> list[CarPoint]:
    """Evaluate the full analytic chain at each bus pump power [W]."""
    p = np.asarray(powers, dtype=float)
    if p.size == 0:
        return []
    if np.any(np.isnan(p)) or np.any(p < 0):
        raise ValidationError("pump powers must be >= 0")
    if np.any(np.diff(p) < 0):
        raise ValidationError("pump powers must be sorted ascending")
    g = np.asarray(pair_generation_rate(device, p))
    psfwm = np.asarray(sfwm_power(device, p))
    n_s, n_i = raman_noise_rates(device.noise.raman_coefficient, p, device.raman_detuning,
                                 device.noise.temperature)
    r_s, r_i = singles_rates(g, n_s, n_i, device.noise, device.chain)
    cc, ac = coincidence_rates(g, r_s, r_i, device.chain)
    ratio = car(cc, ac)
    return [
        CarPoint(float(p[k]), float(g[k]), float(psfwm[k]), float(r_s[k]), float(r_i[k]),
                 float(cc[k]), float(ac[k]), float(ratio[k]))
        for k in range(p.size)
    ]
