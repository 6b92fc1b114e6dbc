"""Microring SFWM photon-pair source: analytic model, time-tag Monte Carlo and fitting."""

__version__ = "0.1.0"

from .config import DeviceConfig, load_device_config, paper_device, save_device_config
from .errors import ConfigError, DomainError, FitError, ValidationError
from .estimation import FitReport, XYSeries, fit_linear, fit_lorentzian_dip, fit_power_law
from .montecarlo import (
    CoincidenceResult,
    TagStreams,
    count_coincidences,
    estimate_car_mc,
    simulate_timetags,
)
from .noisemodel import car, car_curve
from .pairgen import infer_generation_rate, pair_generation_rate, sfwm_power

__all__ = [
    "CoincidenceResult", "ConfigError", "DeviceConfig", "DomainError", "FitError", "FitReport",
    "TagStreams", "ValidationError", "XYSeries", "car", "car_curve", "count_coincidences",
    "estimate_car_mc", "fit_linear", "fit_lorentzian_dip", "fit_power_law",
    "infer_generation_rate", "load_device_config", "pair_generation_rate", "paper_device",
    "save_device_config", "sfwm_power", "simulate_timetags",
]
