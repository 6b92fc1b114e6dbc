"""
Least-squares estimators for spectra and power sweeps.

* :func:`fit_linear` - closed-form weighted straight line.
* :func:`fit_power_law` - straight line in log-log space.
* :func:`fit_lorentzian_dip` - resonance dip with a free baseline, refined by
  damped Gauss-Newton (step halved until the objective stops increasing).

Parameter uncertainties come from the Jacobian covariance scaled by the
reduced chi-square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, ValidationError
from .resonator import intrinsic_q_from_fit


@dataclass(frozen=True)
class XYSeries:
    """Samples sorted by ``x``; ``sigma`` holds optional 1-sigma errors on ``y``."""

    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValidationError("x and y lengths differ")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("x and y must be finite")
        order = np.argsort(x, kind="stable")
        x, y = x[order], y[order]
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise ValidationError("x values must be distinct")
        sigma = self.sigma
        if sigma is not None:
            sigma = np.asarray(sigma, dtype=float).ravel()
            if sigma.shape != x.shape:
                raise ValidationError("sigma length differs from x")
            sigma = sigma[order]
            if not np.all(sigma > 0):
                raise ValidationError("uncertainties must be > 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "sigma", sigma)

    def __len__(self) -> int:
        return self.x.size

    @property
    def weights(self) -> np.ndarray:
        return np.ones_like(self.x) if self.sigma is None else 1.0 / self.sigma**2


@dataclass(frozen=True)
class FitReport:
    params: dict[str, float]
    errors: dict[str, float]
    reduced_chi2: float
    residuals: np.ndarray
    converged: bool = True
    iterations: int = 0
    derived: dict[str, float] = field(default_factory=dict)
    objective_trace: tuple[float, ...] = ()

    def to_json(self) -> dict:
        def clean(d):
            return {k: (v if math.isfinite(v) else None) for k, v in d.items()}

        return {
            "params": clean(self.params),
            "errors": clean(self.errors),
            "derived": clean(self.derived),
            "reduced_chi2": self.reduced_chi2 if math.isfinite(self.reduced_chi2) else None,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def _chi2_scale(chi2: float, dof: int, have_sigma: bool) -> tuple[float, float]:
    """Reduced chi-square and the factor applied to the raw covariance."""
    if dof <= 0:
        return math.nan, (1.0 if have_sigma else math.nan)
    red = chi2 / dof
    return red, red


def fit_linear(data: XYSeries, *, scale_by_chi2: bool = True) -> FitReport:
    """Weighted least-squares line ``y = slope * x + intercept``."""
    if len(data) < 2:
        raise FitError("need at least 2 points for a line")
    x, y, w = data.x, data.y, data.weights
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    dx = x - xm
    sxx = (w * dx * dx).sum()
    if not sxx > 0 or sxx <= 1e-300:
        raise FitError("x values are degenerate")
    slope = (w * dx * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    chi2 = float((w * resid**2).sum())
    red, factor = _chi2_scale(chi2, x.size - 2, data.sigma is not None)
    if not scale_by_chi2 and data.sigma is not None:
        factor = 1.0
    var_slope = factor / sxx
    var_int = factor * (1.0 / sw + xm * xm / sxx)
    return FitReport(
        params={"slope": float(slope), "intercept": float(intercept)},
        errors={"slope": math.sqrt(var_slope) if var_slope >= 0 else math.nan,
                "intercept": math.sqrt(var_int) if var_int >= 0 else math.nan},
        reduced_chi2=red,
        residuals=resid,
        derived={"cov_slope_intercept": float(-factor * xm / sxx)},
    )


def fit_power_law(data: XYSeries) -> FitReport:
    """Fit ``y = amplitude * x**exponent`` by a line through (log x, log y)."""
    if np.any(data.x <= 0) or np.any(data.y <= 0):
        raise DomainError("power-law fit needs strictly positive x and y")
    sigma = None if data.sigma is None else data.sigma / data.y
    line = fit_linear(XYSeries(np.log(data.x), np.log(data.y), sigma))
    amp = math.exp(line.params["intercept"])
    expo = line.params["slope"]
    resid = data.y - amp * data.x**expo
    return FitReport(
        params={"amplitude": amp, "exponent": expo},
        errors={"amplitude": amp * line.errors["intercept"], "exponent": line.errors["slope"]},
        reduced_chi2=line.reduced_chi2,
        residuals=resid,
    )


# -- Lorentzian dip --------------------------------------------------------

def _dip_model(x, theta):
    """theta = (baseline, t_min, center, fwhm) in scaled frequency units."""
    b, tm, u, w = theta
    z = 2.0 * (x - u) / w
    d = 1.0 + z * z
    lor = 1.0 / d
    f = b * (1.0 - (1.0 - tm) * lor)
    depth = b * (1.0 - tm)
    jac = np.empty((x.size, 4))
    jac[:, 0] = 1.0 - (1.0 - tm) * lor
    jac[:, 1] = b * lor
    jac[:, 2] = -depth * 4.0 * z / (w * d * d)
    jac[:, 3] = -depth * 2.0 * z * z / (w * d * d)
    return f, jac


def _half_depth_width(x: np.ndarray, y: np.ndarray, k0: int, level: float) -> float | None:
    """Width of the dip at ``level`` with linear interpolation between samples."""
    left = k0
    while left > 0 and y[left] < level:
        left -= 1
    right = k0
    while right < y.size - 1 and y[right] < level:
        right += 1
    if y[left] < level or y[right] < level:
        return None

    def cross(a: int, b: int) -> float:
        ya, yb = y[a], y[b]
        if yb == ya:
            return x[a]
        return x[a] + (level - ya) * (x[b] - x[a]) / (yb - ya)

    return cross(right - 1, right) - cross(left, left + 1) if right > left else None


def _noise_estimate(y: np.ndarray) -> float:
    d = np.diff(y)
    return 1.4826 * float(np.median(np.abs(d - np.median(d)))) / math.sqrt(2.0)


def _gradient_cosine(jw: np.ndarray, rw: np.ndarray) -> float:
    """Largest |cos| between the weighted residual and a Jacobian column; 0 at a minimum."""
    rn = np.linalg.norm(rw)
    if rn == 0:
        return 0.0
    cn = np.linalg.norm(jw, axis=0)
    cn[cn == 0] = 1.0
    return float(np.max(np.abs(jw.T @ rw) / (cn * rn)))


def fit_lorentzian_dip(spectrum: XYSeries, *, max_iter: int = 200, rtol: float = 1e-10) -> FitReport:
    """
    Fit ``baseline * T(nu)`` with T the resonator Lorentzian dip.

    Returns parameters ``nu0`` [Hz], ``q_loaded``, ``t_min`` and ``baseline``;
    ``derived`` adds ``fwhm_hz`` and intrinsic Q on each coupling branch.

    Raises
    ------
    FitError
        If no dip stands out of the noise or there are too few samples.
    """
    if len(spectrum) < 5:
        raise FitError("need at least 5 samples to fit a 4-parameter dip")
    nu, y = spectrum.x, spectrum.y
    w8 = spectrum.weights

    noise = _noise_estimate(y)
    k = min(9, y.size)
    smooth = np.convolve(y, np.ones(k) / k, mode="valid")
    depth_seen = float(np.median(y) - smooth.min())
    if not depth_seen > 3.0 * noise or depth_seen <= 0:
        raise FitError("no dip found")

    k0 = int(np.argmin(y))
    top = y[y >= np.percentile(y, 75)]
    b0 = float(np.median(top))
    ymin = float(y[k0])
    width = _half_depth_width(nu, y, k0, 0.5 * (b0 + ymin))
    if width is None or not width > 0:
        width = (nu[-1] - nu[0]) / 10.0
    center0 = float(nu[k0])
    x = (nu - center0) / width

    theta = np.array([b0, ymin / b0, 0.0, 1.0])
    f, jac = _dip_model(x, theta)
    r = y - f
    obj = float((w8 * r * r).sum())
    sw = np.sqrt(w8)
    trace = [obj]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        step, *_ = np.linalg.lstsq(jac * sw[:, None], r * sw, rcond=None)
        lam = 1.0
        accepted = False
        for _ in range(60):
            trial = theta + lam * step
            if trial[3] > 0:
                f_t, jac_t = _dip_model(x, trial)
                r_t = y - f_t
                obj_t = float((w8 * r_t * r_t).sum())
                if obj_t <= obj:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            # no descent direction left: stationary to machine precision
            converged = _gradient_cosine(jac * sw[:, None], r * sw) < 1e-6
            break
        delta = trial - theta
        theta, f, jac, r, obj = trial, f_t, jac_t, r_t, obj_t
        trace.append(obj)
        if np.linalg.norm(delta) <= rtol * (np.linalg.norm(theta) + rtol):
            converged = True
            break

    dof = y.size - 4
    red, factor = _chi2_scale(obj, dof, spectrum.sigma is not None)
    jw = jac * sw[:, None]
    try:
        cov = np.linalg.inv(jw.T @ jw) * factor
    except np.linalg.LinAlgError:
        cov = np.full((4, 4), math.nan)

    b, tm, u, wd = theta
    nu0 = center0 + u * width
    fwhm = wd * width
    q_l = float(nu0 / fwhm)
    # gradient of q_l w.r.t. (u, w) in scaled units
    gq = np.array([0.0, 0.0, width / fwhm, -nu0 * width / fwhm**2])
    var_q = float(gq @ cov @ gq)

    tm_phys = min(max(float(tm), 0.0), 1.0)
    derived = {"fwhm_hz": float(fwhm), "gradient_cosine": _gradient_cosine(jw, r * sw)}
    for branch in ("critical", "under", "over"):
        try:
            derived[f"q_intrinsic_{branch}"] = intrinsic_q_from_fit(q_l, tm_phys, branch)
        except (DomainError, ValidationError):
            derived[f"q_intrinsic_{branch}"] = math.nan

    def sd(v: float) -> float:
        return math.sqrt(v) if v >= 0 else math.nan

    return FitReport(
        params={"nu0": float(nu0), "q_loaded": float(q_l), "t_min": float(tm), "baseline": float(b)},
        errors={"nu0": sd(cov[2, 2]) * width, "q_loaded": sd(var_q),
                "t_min": sd(cov[1, 1]), "baseline": sd(cov[0, 0])},
        reduced_chi2=red,
        residuals=r,
        converged=converged,
        iterations=it,
        derived=derived,
        objective_trace=tuple(trace),
    )
