"""
All-pass ring resonator: line shape, Q bookkeeping and derived quantities.

The transmission model is the symmetric Lorentzian dip

    T(dnu) = 1 - (1 - T_min) / (1 + (2 dnu / FWHM)^2),   FWHM = nu0 / Q_l

which is what gets fitted to measured spectra. The full complex all-pass
transfer function is deliberately not used; it needs parameters (self-coupling,
round-trip amplitude) that are never measured here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError, ValidationError
from .quantities import C, wavelength_to_angular_frequency

Branch = Literal["critical", "under", "over"]

# power attenuation exponent -> dB
_DB_PER_NEPER_POWER = 10.0 * math.log10(math.e)


def _require_positive(**values: float) -> None:
    for name, v in values.items():
        if not (v > 0):
            raise DomainError(f"{name} must be > 0, got {v!r}")


@dataclass(frozen=True)
class RingGeometry:
    """
    Ring geometry and modal properties.

    Parameters
    ----------
    radius : float
        Ring radius [m].
    group_index : float
        Group index of the guided mode.
    effective_area : float
        Nonlinear effective mode area [m^2].
    """

    radius: float
    group_index: float
    effective_area: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValidationError(f"radius must be > 0, got {self.radius}")
        if not self.group_index > 1:
            raise ValidationError(f"group_index must be > 1, got {self.group_index}")
        if not self.effective_area > 0:
            raise ValidationError(f"effective_area must be > 0, got {self.effective_area}")

    @property
    def circumference(self) -> float:
        """L = 2*pi*R [m]."""
        return 2.0 * math.pi * self.radius

    @property
    def group_velocity(self) -> float:
        """v = c / n_g [m/s]."""
        return C / self.group_index

    @property
    def fsr_hz(self) -> float:
        """Free spectral range v/L [Hz]."""
        return self.group_velocity / self.circumference


def loaded_q(q_intrinsic: float, q_coupling: float) -> float:
    """Combine intrinsic and coupling Q: 1/Q_l = 1/Q_i + 1/Q_c.

    ``q_coupling=math.inf`` stands for an uncoupled ring.
    """
    _require_positive(q_intrinsic=q_intrinsic, q_coupling=q_coupling)
    if q_intrinsic == q_coupling:
        return q_intrinsic / 2.0
    if math.isinf(q_coupling):
        return float(q_intrinsic)
    if math.isinf(q_intrinsic):
        return float(q_coupling)
    return q_intrinsic * q_coupling / (q_intrinsic + q_coupling)


def ideal_extinction(q_intrinsic: float, q_coupling: float) -> float:
    """On-resonance transmittance of a lossless-coupler all-pass ring."""
    _require_positive(q_intrinsic=q_intrinsic, q_coupling=q_coupling)
    a, b = 1.0 / q_intrinsic, 1.0 / q_coupling
    return ((a - b) / (a + b)) ** 2


@dataclass(frozen=True)
class ResonatorParams:
    """
    Resonance description.

    ``q_loaded`` is derived from ``q_intrinsic`` and ``q_coupling``;
    ``extinction`` is the measured on-resonance transmittance, kept separate
    from the ideal value because real dips are rarely zero.
    """

    resonance_frequency: float
    q_intrinsic: float
    q_coupling: float
    extinction: float

    def __post_init__(self) -> None:
        if not self.resonance_frequency > 0:
            raise ValidationError(f"resonance_frequency must be > 0, got {self.resonance_frequency}")
        if not self.q_intrinsic > 0:
            raise ValidationError(f"q_intrinsic must be > 0, got {self.q_intrinsic}")
        if not self.q_coupling > 0:
            raise ValidationError(f"q_coupling must be > 0, got {self.q_coupling}")
        if not 0.0 <= self.extinction <= 1.0:
            raise ValidationError(f"extinction must lie in [0, 1], got {self.extinction}")

    @property
    def q_loaded(self) -> float:
        return loaded_q(self.q_intrinsic, self.q_coupling)

    @property
    def linewidth(self) -> float:
        """Loaded FWHM [Hz]."""
        return self.resonance_frequency / self.q_loaded

    @classmethod
    def from_loaded(cls, resonance_frequency: float, q_loaded: float, extinction: float,
                    branch: Branch = "critical") -> "ResonatorParams":
        """Build from a fitted (nu0, Q_l, T_min) using the chosen coupling branch."""
        qi = intrinsic_q_from_fit(q_loaded, extinction, branch)
        qc = math.inf if math.isclose(qi, q_loaded, rel_tol=1e-15) else 1.0 / (1.0 / q_loaded - 1.0 / qi)
        return cls(resonance_frequency, qi, qc, extinction)


def transmission_dip(detuning_hz, params: ResonatorParams):
    """Lorentzian dip transmittance at ``detuning_hz`` from resonance.

    Accepts scalars or arrays; infinite detuning gives exactly 1.
    """
    d = np.asarray(detuning_hz, dtype=float)
    fwhm = params.linewidth
    depth = 1.0 - params.extinction
    with np.errstate(over="ignore"):
        x = 2.0 * d / fwhm
        out = 1.0 - depth / (1.0 + x * x)
    return float(out) if out.ndim == 0 else out


def intrinsic_q_from_fit(q_loaded: float, extinction: float, branch: Branch = "critical") -> float:
    """
    Intrinsic Q from a fitted loaded Q and on-resonance transmittance.

    A power spectrum cannot tell under- from over-coupling, so the branch is
    the caller's call. ``"critical"`` ignores the residual extinction and
    returns 2*Q_l.
    """
    _require_positive(q_loaded=q_loaded)
    if not 0.0 <= extinction <= 1.0:
        raise ValidationError(f"extinction must lie in [0, 1], got {extinction}")
    root = math.sqrt(extinction)
    if branch == "critical":
        return 2.0 * q_loaded
    if branch == "under":
        return 2.0 * q_loaded / (1.0 + root)
    if branch == "over":
        if root >= 1.0:
            raise DomainError("over-coupled branch undefined for extinction of 1")
        return 2.0 * q_loaded / (1.0 - root)
    raise ValidationError(f"unknown coupling branch {branch!r}")


def intrinsic_loss_db_per_cm(q_intrinsic: float, wavelength_m: float, group_index: float) -> float:
    """Propagation loss implied by an intrinsic Q, in dB/cm.

    alpha = 2*pi*n_g / (lambda * Q_i) is a power attenuation coefficient.
    """
    _require_positive(q_intrinsic=q_intrinsic, wavelength_m=wavelength_m, group_index=group_index)
    alpha_per_m = 2.0 * math.pi * group_index / (wavelength_m * q_intrinsic)
    return alpha_per_m * _DB_PER_NEPER_POWER / 100.0


def linewidth_hz(q_loaded: float, wavelength_m: float) -> float:
    """Loaded linewidth (c/lambda)/Q_l [Hz]; also the photon bandwidth."""
    _require_positive(q_loaded=q_loaded, wavelength_m=wavelength_m)
    return (C / wavelength_m) / q_loaded


def photon_lifetime(q_loaded: float, wavelength_m: float) -> float:
    """Cavity energy decay time Q_l/omega [s]."""
    _require_positive(q_loaded=q_loaded, wavelength_m=wavelength_m)
    return q_loaded / wavelength_to_angular_frequency(wavelength_m)


def field_buildup(q_loaded: float, wavelength_m: float, geometry: RingGeometry) -> float:
    """Resonant enhancement Q_l * v / (omega * L / 2).

    Numerically equal to finesse/pi.
    """
    _require_positive(q_loaded=q_loaded, wavelength_m=wavelength_m)
    omega = wavelength_to_angular_frequency(wavelength_m)
    return q_loaded * geometry.group_velocity / (omega * geometry.circumference / 2.0)
