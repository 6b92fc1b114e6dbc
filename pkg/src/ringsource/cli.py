"""
Command-line entry point.

    ringsource fit-transmission --input spectrum.csv --out fit.json
    ringsource predict  --config dev.json --power-mw-min 0.05 --power-mw-max 2 --steps 40 --out curve.csv
    ringsource simulate --config dev.json --power-mw 1 --duration-s 10 --seed 42 --out tags.csv
    ringsource analyze  --input tags.csv --window-ps 1152 --out result.json

Every command also writes ``<out>.manifest.json`` (arguments, config hash,
seed, library versions). Exit codes: 0 ok, 2 usage/validation, 3 model or fit
failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import atomic_write_text, config_hash, load_device_config, paper_device_path
from .errors import FitError, ValidationError
from .estimation import fit_lorentzian_dip
from .montecarlo import (
    RNG_ALGORITHM,
    count_coincidences,
    read_tags_csv,
    simulate_timetags,
    write_tags_csv,
)
from .noisemodel import car_curve
from .quantities import C
from .resonator import intrinsic_loss_db_per_cm
from .tables import read_xy_csv, write_table_csv

log = logging.getLogger("ringsource")

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_IO = 0, 2, 3, 4


class _InputMissing(Exception):
    pass


def _manifest(out: Path, command: str, args: argparse.Namespace, **extra) -> None:
    doc = {
        "command": command,
        "arguments": {k: v for k, v in vars(args).items() if k != "func"},
        "versions": {
            "ringsource": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "outputs": [str(out)],
    }
    doc.update(extra)
    atomic_write_text(f"{out}.manifest.json", json.dumps(doc, indent=2, default=str) + "\n")


def _require_input(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise _InputMissing(f"input file not found: {path}")
    return p


def cmd_fit_transmission(args: argparse.Namespace) -> int:
    spectrum = read_xy_csv(_require_input(args.input))
    rep = fit_lorentzian_dip(spectrum)
    q_l = rep.params["q_loaded"]
    q_i = rep.derived[f"q_intrinsic_{args.branch}"]
    doc = rep.to_json()
    doc["branch"] = args.branch
    doc["q_loaded"] = q_l
    doc["q_intrinsic"] = q_i
    doc["linewidth_hz"] = rep.derived["fwhm_hz"]
    doc["wavelength_nm"] = C / rep.params["nu0"] * 1e9
    if args.group_index is not None and math.isfinite(q_i):
        doc["group_index"] = args.group_index
        doc["loss_db_per_cm"] = intrinsic_loss_db_per_cm(q_i, C / rep.params["nu0"], args.group_index)
    if not rep.converged:
        log.warning("fit did not converge after %d iterations", rep.iterations)
    out = Path(args.out)
    atomic_write_text(out, json.dumps(doc, indent=2) + "\n")
    _manifest(out, "fit-transmission", args)
    return EXIT_OK if rep.converged else EXIT_MODEL


def cmd_predict(args: argparse.Namespace) -> int:
    if not args.power_mw_max > 0:
        raise ValidationError("--power-mw-max must be > 0")
    if args.power_mw_min < 0 or args.power_mw_min > args.power_mw_max:
        raise ValidationError("need 0 <= --power-mw-min <= --power-mw-max")
    if args.steps < 1:
        raise ValidationError("--steps must be >= 1")
    cfg = load_device_config(_require_input(args.config))
    powers_mw = np.linspace(args.power_mw_min, args.power_mw_max, args.steps)
    points = car_curve(cfg, powers_mw * 1e-3)
    header = ["power_mw", "g_pairs_per_s", "p_sfwm_w", "r_s", "r_i", "cc", "ac", "car"]
    rows = [[float(pm), p.pair_rate, p.sfwm_power, p.r_s, p.r_i, p.cc, p.ac, p.car]
            for pm, p in zip(powers_mw, points)]
    out = Path(args.out)
    write_table_csv(out, header, rows)
    _manifest(out, "predict", args, config_hash=config_hash(cfg))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise ValidationError("--seed is required; simulations are never unseeded")
    if not args.duration_s > 0:
        raise ValidationError("--duration-s must be > 0")
    if args.power_mw < 0:
        raise ValidationError("--power-mw must be >= 0")
    cfg = load_device_config(_require_input(args.config))
    tags = simulate_timetags(cfg, args.power_mw * 1e-3, args.duration_s, args.seed)
    out = Path(args.out)
    write_tags_csv(out, tags)
    _manifest(out, "simulate", args, config_hash=config_hash(cfg), seed=args.seed,
              rng=RNG_ALGORITHM, counts={"signal": int(tags.signal.size), "idler": int(tags.idler.size)})
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    tags = read_tags_csv(_require_input(args.input), duration=args.duration_s)
    offset = args.offset_ps if args.offset_ps is not None else 10.0 * args.window_ps
    res = count_coincidences(tags.signal, tags.idler, args.window_ps, offset, args.bin_ps,
                             offset_windows=args.offset_windows, hist_range_ps=args.range_ps,
                             duration=tags.duration)
    out = Path(args.out)
    atomic_write_text(out, json.dumps(res.to_json(), indent=2) + "\n")
    _manifest(out, "analyze", args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ringsource",
                                 description="Microring SFWM pair-source model and analysis tools")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-transmission", help="fit a Lorentzian dip to a transmission spectrum")
    p.add_argument("--input", required=True, help="CSV with freq_hz,transmission columns")
    p.add_argument("--out", required=True, help="output JSON")
    p.add_argument("--branch", choices=["critical", "under", "over"], default="critical")
    p.add_argument("--group-index", type=float, default=None,
                   help="report the propagation loss implied by Q_i")
    p.set_defaults(func=cmd_fit_transmission)

    p = sub.add_parser("predict", help="analytic pair rate, singles, CC, AC and CAR vs power")
    p.add_argument("--config", default=str(paper_device_path()))
    p.add_argument("--power-mw-min", type=float, default=0.05)
    p.add_argument("--power-mw-max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="Monte Carlo time tags at one pump power")
    p.add_argument("--config", default=str(paper_device_path()))
    p.add_argument("--power-mw", type=float, required=True)
    p.add_argument("--duration-s", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output tag CSV (channel,time_ps)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="coincidence analysis of a tag CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--window-ps", type=float, default=1152.0)
    p.add_argument("--offset-ps", type=float, default=None,
                   help="accidental window spacing (default 10 windows)")
    p.add_argument("--offset-windows", type=int, default=1)
    p.add_argument("--bin-ps", type=float, default=16.0)
    p.add_argument("--range-ps", type=float, default=None, help="histogram half range")
    p.add_argument("--duration-s", type=float, default=None,
                   help="acquisition time (default: span of the tags)")
    p.add_argument("--out", required=True, help="output JSON")
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    logging.captureWarnings(True)
    try:
        return args.func(args)
    except _InputMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # ValidationError, DomainError and ConfigError are all ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
