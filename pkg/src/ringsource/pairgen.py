"""
Pair generation by spontaneous four-wave mixing in a ring.

Generated power (undepleted CW pump, on-resonance triplet)::

    P = (gamma L)^2 * (Q_l v / (omega_p L / 2))^3 * hbar omega_p v / (2 L) * P_p^2

and the pair rate is P / (2 hbar omega_p). ``P_p`` is the pump power in the bus
waveguide at the coupler; the cubed bracket already carries the resonant
build-up, so feeding intracavity power would count it twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError, ValidationError
from .quantities import HBAR, db_loss_to_transmittance

if TYPE_CHECKING:
    from .config import DeviceConfig


@dataclass(frozen=True)
class NonlinearParams:
    """
    Nonlinear-material and wavelength plan.

    Parameters
    ----------
    n_nl : float
        Nonlinear (Kerr) index [m^2/W].
    pump_wavelength, signal_wavelength, idler_wavelength : float
        Vacuum wavelengths [m]. Signal is the blue photon.
    """

    n_nl: float
    pump_wavelength: float
    signal_wavelength: float
    idler_wavelength: float

    def __post_init__(self) -> None:
        for name in ("n_nl", "pump_wavelength", "signal_wavelength", "idler_wavelength"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}")

    def energy_mismatch(self) -> float:
        """Relative violation of 2/lambda_p = 1/lambda_s + 1/lambda_i."""
        two_p = 2.0 / self.pump_wavelength
        return abs(two_p - (1.0 / self.signal_wavelength + 1.0 / self.idler_wavelength)) / two_p


def nonlinear_parameter(n_nl: float, pump_wavelength: float, effective_area: float) -> float:
    """gamma = 2*pi*n_nl / (lambda_p * A_eff) [1/(W m)]."""
    for name, v in (("n_nl", n_nl), ("pump_wavelength", pump_wavelength),
                    ("effective_area", effective_area)):
        if not v > 0:
            raise DomainError(f"{name} must be > 0, got {v!r}")
    return 2.0 * math.pi * n_nl / (pump_wavelength * effective_area)


def _check_power(pump_power):
    p = np.asarray(pump_power, dtype=float)
    if np.any(np.isnan(p)) or np.any(p < 0):
        raise DomainError(f"pump power must be >= 0, got {pump_power!r}")
    return p


def sfwm_power_from_params(gamma: float, circumference: float, q_loaded: float,
                           group_velocity: float, omega_p: float, pump_power):
    """Generated SFWM power [W] from explicit model parameters.

    ``pump_power`` may be a scalar or an array [W].
    """
    p = _check_power(pump_power)
    L = circumference
    buildup = q_loaded * group_velocity / (omega_p * L / 2.0)
    out = (gamma * L) ** 2 * buildup**3 * (HBAR * omega_p * group_velocity / (2.0 * L)) * p**2
    return float(out) if out.ndim == 0 else out


def sfwm_power(device: "DeviceConfig", pump_power):
    """Generated SFWM power [W] for a device at bus pump power ``pump_power`` [W]."""
    return sfwm_power_from_params(
        device.gamma,
        device.geometry.circumference,
        device.resonator.q_loaded,
        device.geometry.group_velocity,
        device.pump_omega,
        pump_power,
    )


def pair_generation_rate(device: "DeviceConfig", pump_power):
    """Pairs per second at the ring-waveguide coupling point."""
    return sfwm_power(device, pump_power) / (2.0 * HBAR * device.pump_omega)


def infer_generation_rate(cc_rate, eta_s_db: float, eta_i_db: float):
    """Back out the generated pair rate from a measured coincidence rate.

    Divides by the combined signal and idler collection transmittance.
    """
    cc = np.asarray(cc_rate, dtype=float)
    if np.any(np.isnan(cc)) or np.any(cc < 0):
        raise ValidationError(f"coincidence rate must be >= 0, got {cc_rate!r}")
    if eta_s_db < 0 or eta_i_db < 0:
        raise ValidationError("collection losses must be >= 0 dB")
    out = cc / db_loss_to_transmittance(eta_s_db + eta_i_db)
    return float(out) if out.ndim == 0 else out
