"""
Time-tag Monte Carlo of the pair source and a coincidence counter.

The simulator draws, for a run of fixed duration,

* pair emissions as a homogeneous Poisson process at the analytic pair rate,
  each photon independently kept with its channel transmittance and delayed by
  an exponential cavity-decay time (mean = photon lifetime);
* uncorrelated Raman photons and dark counts as independent Poisson streams;
* Gaussian jitter on every detection, then 1 ps quantisation.

Thinning is done by splitting the pair count multinomially into
(both detected, signal only, idler only, neither), which is equivalent in
distribution to thinning each photon and avoids materialising pairs that are
never seen.

Times are integer picoseconds (uint64). Randomness comes from numpy's PCG64
seeded through ``SeedSequence(seed)``; replicates use ``SeedSequence.spawn``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ValidationError
from .estimation import XYSeries, fit_linear
from .noisemodel import raman_noise_rates
from .pairgen import pair_generation_rate
from .resonator import photon_lifetime

if TYPE_CHECKING:
    from .config import DeviceConfig

RNG_ALGORITHM = "numpy.random.PCG64 seeded via numpy.random.SeedSequence"

SIGNAL, IDLER = 0, 1
PS = 1e-12
_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class TagStreams:
    """Detected tags per channel, ascending integer picoseconds."""

    signal: np.ndarray
    idler: np.ndarray
    duration: float  # s

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TagStreams):
            return NotImplemented
        return (self.duration == other.duration
                and np.array_equal(self.signal, other.signal)
                and np.array_equal(self.idler, other.idler))


@dataclass(frozen=True)
class CoincidenceResult:
    """
    Counts from one analysis.

    ``car`` is the net ratio (cc - ac_mean) / ac_mean, where ac_mean is the
    accidental count per offset window. Subtracting ac_mean leaves only
    true-pair coincidences, which is the numerator of the analytic CAR.
    ``car_raw`` is the plain cc / ac_mean.
    """

    cc_count: int
    ac_count: int
    ac_windows: int
    car: float
    car_stderr: float
    car_raw: float
    window_ps: float
    offset_ps: float
    duration: float
    bin_edges: np.ndarray
    histogram: np.ndarray

    @property
    def ac_mean(self) -> float:
        return self.ac_count / self.ac_windows

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def to_json(self) -> dict:
        return {
            "cc": self.cc_count,
            "ac": self.ac_count,
            "ac_windows": self.ac_windows,
            "ac_per_window": self.ac_mean,
            "car": _json_float(self.car),
            "car_stderr": _json_float(self.car_stderr),
            "car_raw": _json_float(self.car_raw),
            "window_ps": self.window_ps,
            "offset_ps": self.offset_ps,
            "duration_s": self.duration,
            "histogram": [{"tau_ps": float(t), "count": int(c)}
                          for t, c in zip(self.bin_centers, self.histogram)],
        }


def _json_float(x: float):
    # JSON has no inf/nan
    return x if math.isfinite(x) else None


def _rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.PCG64(ss))


def _deadtime_filter(times: np.ndarray, deadtime_ps: float) -> np.ndarray:
    """Non-paralyzable deadtime on a sorted stream."""
    if deadtime_ps <= 0 or times.size == 0:
        return times
    keep = []
    k = 0
    n = times.size
    while k < n:
        keep.append(k)
        k = int(np.searchsorted(times, times[k] + deadtime_ps, side="left"))
    return times[np.asarray(keep, dtype=np.intp)]


def simulate_timetags(device: "DeviceConfig", pump_power: float, duration: float,
                      seed: int) -> TagStreams:
    """Synthesize detected signal/idler tag streams for ``duration`` seconds."""
    if not duration > 0:
        raise ValidationError(f"duration must be > 0, got {duration!r}")
    if not pump_power >= 0:
        raise ValidationError(f"pump power must be >= 0, got {pump_power!r}")
    rng = _rng(seed)
    chain, noise = device.chain, device.noise
    t_ps = int(round(duration / PS))
    eta_s, eta_i = chain.eta_s, chain.eta_i

    g = float(pair_generation_rate(device, pump_power))
    if noise.raman_coefficient > 0 and pump_power > 0:
        n_s, n_i = raman_noise_rates(noise.raman_coefficient, pump_power,
                                     device.raman_detuning, noise.temperature)
    else:
        n_s = n_i = 0.0
    tau_ps = photon_lifetime(device.resonator.q_loaded, device.nonlinear.pump_wavelength) / PS
    sigma_ps = chain.jitter_fwhm / PS * _FWHM_TO_SIGMA

    n_pairs = rng.poisson(g * duration)
    p_both = eta_s * eta_i
    p_s = eta_s * (1.0 - eta_i)
    p_i = (1.0 - eta_s) * eta_i
    both, s_only, i_only, _ = rng.multinomial(n_pairs, [p_both, p_s, p_i, max(0.0, 1.0 - p_both - p_s - p_i)])

    def uniform(count: int) -> np.ndarray:
        return rng.integers(0, t_ps, size=count).astype(np.float64)

    emit = uniform(both)
    sig_parts = [emit + rng.exponential(tau_ps, both)]
    idl_parts = [emit + rng.exponential(tau_ps, both)]
    sig_parts.append(uniform(s_only) + rng.exponential(tau_ps, s_only))
    idl_parts.append(uniform(i_only) + rng.exponential(tau_ps, i_only))
    sig_parts.append(uniform(rng.poisson(n_s * eta_s * duration)))
    idl_parts.append(uniform(rng.poisson(n_i * eta_i * duration)))
    sig_parts.append(uniform(rng.poisson(noise.dark_count_signal * duration)))
    idl_parts.append(uniform(rng.poisson(noise.dark_count_idler * duration)))

    streams = []
    deadtime_ps = chain.deadtime / PS
    for parts in (sig_parts, idl_parts):
        t = np.concatenate(parts)
        if sigma_ps > 0:
            t = t + rng.normal(0.0, sigma_ps, t.size)
        t = np.rint(t)
        t = t[(t >= 0) & (t < t_ps)].astype(np.int64)
        t.sort()
        t = _deadtime_filter(t, deadtime_ps)
        streams.append(t.astype(np.uint64))
    return TagStreams(streams[0], streams[1], duration)


def _as_sorted_int(name: str, tags) -> np.ndarray:
    a = np.asarray(tags)
    if a.ndim != 1:
        raise ValidationError(f"{name} tags must be one-dimensional")
    if a.size and np.any(a < 0):
        raise ValidationError(f"{name} tags must be non-negative")
    a = a.astype(np.int64)
    if a.size > 1 and np.any(np.diff(a) < 0):
        raise ValidationError(f"{name} tags are not sorted ascending")
    return a


def _pairs_in_range(s: np.ndarray, i: np.ndarray, lo_off: int, hi_off: int):
    """Index bounds of idler tags within [s + lo_off, s + hi_off] for every signal tag."""
    lo = np.searchsorted(i, s + lo_off, side="left")
    hi = np.searchsorted(i, s + hi_off, side="right")
    return lo, hi


def count_coincidences(signal, idler, window_ps: float, accidental_offset_ps: float,
                       bin_width_ps: float, *, offset_windows: int = 1,
                       hist_range_ps: float | None = None,
                       duration: float | None = None) -> CoincidenceResult:
    """
    Count coincidences between two sorted tag streams.

    A coincidence is a (signal, idler) pair with |t_idler - t_signal| <= window/2.
    Accidentals use the same window centred at k * accidental_offset for
    k = 1..offset_windows. For each signal tag the matching idler range comes
    from a binary search on the sorted idler stream, which is the vectorised
    equivalent of a two-pointer sweep.

    The delay histogram covers [-hist_range, +hist_range] (default: one
    window each side, rounded up to whole bins).
    """
    if not window_ps > 0:
        raise ValidationError(f"window must be > 0, got {window_ps!r}")
    if not accidental_offset_ps > window_ps:
        raise ValidationError("accidental offset must exceed the coincidence window")
    if not bin_width_ps > 0:
        raise ValidationError(f"bin width must be > 0, got {bin_width_ps!r}")
    if offset_windows < 1:
        raise ValidationError("need at least one accidental window")
    s = _as_sorted_int("signal", signal)
    i = _as_sorted_int("idler", idler)

    half = int(math.floor(window_ps / 2.0))

    def count(shift: int) -> int:
        lo, hi = _pairs_in_range(s, i, shift - half, shift + half)
        return int((hi - lo).sum())

    cc = count(0)
    ac = sum(count(int(round(k * accidental_offset_ps))) for k in range(1, offset_windows + 1))

    if hist_range_ps is None:
        hist_range_ps = window_ps
    nbins_side = max(1, int(math.ceil(hist_range_ps / bin_width_ps)))
    edges = np.arange(-nbins_side, nbins_side + 1, dtype=np.float64) * bin_width_ps
    hist = _delay_histogram(s, i, edges)

    if duration is None:
        both = [a for a in (s, i) if a.size]
        if both:
            span = max(a[-1] for a in both) - min(a[0] for a in both)
            duration = float(span) * PS
        else:
            duration = 0.0

    ac_mean = ac / offset_windows
    if ac_mean > 0:
        car_raw = cc / ac_mean
        car_net = (cc - ac_mean) / ac_mean
        # delta method, Poisson counts
        var = cc / ac_mean**2 + (cc / ac_mean**2) ** 2 * (ac / offset_windows**2)
        stderr = math.sqrt(var)
    else:
        car_raw = car_net = math.inf if cc > 0 else math.nan
        stderr = math.nan
    return CoincidenceResult(cc, int(ac), offset_windows, car_net, stderr, car_raw,
                             float(window_ps), float(accidental_offset_ps), float(duration),
                             edges, hist)


def _delay_histogram(s: np.ndarray, i: np.ndarray, edges: np.ndarray,
                     block: int = 200_000) -> np.ndarray:
    lo_off = int(math.floor(edges[0]))
    hi_off = int(math.ceil(edges[-1]))
    hist = np.zeros(edges.size - 1, dtype=np.int64)
    for start in range(0, s.size, block):
        sb = s[start:start + block]
        lo, hi = _pairs_in_range(sb, i, lo_off, hi_off)
        n = hi - lo
        total = int(n.sum())
        if total == 0:
            continue
        owner = np.repeat(np.arange(sb.size), n)
        # position within each signal's idler run
        offs = np.arange(total) - np.repeat(np.cumsum(n) - n, n)
        tau = i[lo[owner] + offs] - sb[owner]
        h, _ = np.histogram(tau, bins=edges)
        hist += h
    return hist


def derive_seeds(seed: int, count: int) -> list[int]:
    """Independent 64-bit child seeds for replicates or sweep points."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def default_offset_ps(device: "DeviceConfig") -> float:
    return 10.0 * device.chain.window / PS


def estimate_car_mc(device: "DeviceConfig", pump_power: float, duration: float, seed: int,
                    replicates: int, *, offset_windows: int = 20,
                    accidental_offset_ps: float | None = None) -> tuple[float, float]:
    """Replicated simulate-then-count CAR: (sample mean, standard error of the mean)."""
    if replicates < 2:
        raise ValidationError("need at least 2 replicates")
    window_ps = device.chain.window / PS
    offset = accidental_offset_ps if accidental_offset_ps is not None else default_offset_ps(device)
    values = []
    for child in derive_seeds(seed, replicates):
        tags = simulate_timetags(device, pump_power, duration, child)
        res = count_coincidences(tags.signal, tags.idler, window_ps, offset, window_ps,
                                 offset_windows=offset_windows, duration=duration)
        values.append(res.car)
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def fit_delay_decay(result: CoincidenceResult, min_count: int = 20) -> tuple[float, float]:
    """
    Decay constant of a two-sided exponential delay peak.

    Folds the histogram about tau = 0 (negative and positive bins at the same
    |tau| are summed) and fits log(counts) against |tau| over folded bins with
    at least ``min_count`` events. Returns (tau, 1-sigma) in seconds.
    """
    h = result.histogram
    half = h.size // 2
    # edges are symmetric with 0 as the middle edge, see count_coincidences
    folded = h[half:] + h[:half][::-1]
    centers = result.bin_centers[half:]
    ok = folded >= min_count
    if ok.sum() < 3:
        raise ValidationError("too few populated bins to fit a decay")
    x = centers[ok]
    y = np.log(folded[ok].astype(float))
    sig = 1.0 / np.sqrt(folded[ok].astype(float))
    rep = fit_linear(XYSeries(x, y, sig))
    slope, dslope = rep.params["slope"], rep.errors["slope"]
    if not slope < 0:
        raise ValidationError("delay histogram does not decay")
    return -PS / slope, PS * dslope / slope**2


def write_tags_csv(path, tags: TagStreams) -> None:
    """Merged ``channel,time_ps`` CSV, ascending in time (signal first on ties)."""
    from .config import atomic_write_text

    ch = np.concatenate([np.full(tags.signal.size, SIGNAL, np.int64),
                         np.full(tags.idler.size, IDLER, np.int64)])
    t = np.concatenate([tags.signal, tags.idler]).astype(np.uint64)
    order = np.lexsort((ch, t))
    lines = ["channel,time_ps"]
    lines.extend(f"{c},{v}" for c, v in zip(ch[order].tolist(), t[order].tolist()))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_tags_csv(path, duration: float | None = None) -> TagStreams:
    """Read a ``channel,time_ps`` file; each channel must already be ascending."""
    chans: list[int] = []
    times: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["channel", "time_ps"]:
            raise ValidationError(f"{path}: expected header 'channel,time_ps'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                c, t = int(row[0]), int(row[1])
                if len(row) != 2:
                    raise ValueError
            except (ValueError, IndexError):
                raise ValidationError(f"{path}:{lineno}: malformed row {row!r}") from None
            if c not in (SIGNAL, IDLER):
                raise ValidationError(f"{path}:{lineno}: channel must be 0 or 1, got {c}")
            if t < 0 or t >= 2**64:
                raise ValidationError(f"{path}:{lineno}: time out of range")
            chans.append(c)
            times.append(t)
    ch = np.asarray(chans, dtype=np.int64)
    t = np.asarray(times, dtype=np.uint64)
    sig, idl = t[ch == SIGNAL], t[ch == IDLER]
    for name, a in (("signal", sig), ("idler", idl)):
        if a.size > 1 and np.any(a[1:] < a[:-1]):
            raise ValidationError(f"{path}: {name} times are not ascending")
    if duration is None:
        duration = float(t.max() - t.min()) * PS if t.size else 0.0
    return TagStreams(sig, idl, duration)
