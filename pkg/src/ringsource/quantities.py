"""
Physical constants and the handful of unit conversions the model needs.

Everything inside the package is SI (W, s, Hz, m, rad/s). Decibels only show
up at the configuration and reporting boundaries.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ValidationError

C = 299_792_458.0  # m/s, exact
HBAR = 1.054571817e-34  # J s
H = 2.0 * math.pi * HBAR  # J s
K_B = 1.380649e-23  # J/K


def db_loss_to_transmittance(loss_db):
    """Convert attenuation in dB to a power fraction, ``10**(-loss/10)``.

    Works on scalars and arrays. Negative values (gain) are allowed here;
    physical loss channels are checked where they are configured.
    """
    arr = np.asarray(loss_db, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"dB loss must be finite, got {loss_db!r}")
    out = np.power(10.0, -arr / 10.0)
    return float(out) if out.ndim == 0 else out


def transmittance_to_db_loss(t):
    """Inverse of :func:`db_loss_to_transmittance` for ``0 < t <= 1``."""
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValidationError("transmittance is NaN")
    if np.any(arr <= 0):
        raise DomainError(f"transmittance must be > 0, got {t!r}")
    if np.any(arr > 1):
        raise ValidationError(f"transmittance must be <= 1, got {t!r}")
    out = -10.0 * np.log10(arr)
    # -0.0 for t == 1 reads badly in reports
    out = out + 0.0
    return float(out) if out.ndim == 0 else out


def wavelength_to_angular_frequency(wavelength_m: float) -> float:
    """Vacuum wavelength [m] to angular frequency 2*pi*c/lambda [rad/s]."""
    if not wavelength_m > 0 or not math.isfinite(wavelength_m):
        raise DomainError(f"wavelength must be positive and finite, got {wavelength_m!r}")
    return 2.0 * math.pi * C / wavelength_m


def wavelength_to_frequency(wavelength_m: float) -> float:
    """Vacuum wavelength [m] to optical frequency c/lambda [Hz]."""
    if not wavelength_m > 0 or not math.isfinite(wavelength_m):
        raise DomainError(f"wavelength must be positive and finite, got {wavelength_m!r}")
    return C / wavelength_m
