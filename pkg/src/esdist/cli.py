"""Command-line front end.

    esdist --curve1 a.dat --curve2 b.dat [--fft] [--both-directions] ...

Prints one JSON document with the distance, starting point, rotation and
diffeomorphism.  ``--plots`` additionally writes ``<prefix>.curve1.dat``,
``<prefix>.curve2.dat`` and ``<prefix>.gamma.dat``.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from typing import Optional, Sequence

import numpy as np

from .curve_model import load_curve_file
from .dp_registration import DpConfig
from .errors import EsdError, InputError, NumericalError
from .pipeline import PipelineConfig, RegistrationResult, compute_esd

log = logging.getLogger("esdist")


def _yes_no(text: str) -> bool:
    v = text.strip().lower()
    if v in ("yes", "y", "true", "1"):
        return True
    if v in ("no", "n", "false", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected yes or no, got {text!r}")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="esdist", description="Elastic shape distance between two curves.")
    p.add_argument("--curve1", required=True, metavar="PATH")
    p.add_argument("--curve2", required=True, metavar="PATH")
    p.add_argument("--closed1", type=_yes_no, default=None, metavar="yes|no")
    p.add_argument("--closed2", type=_yes_no, default=None, metavar="yes|no")
    p.add_argument("--fft", action="store_true", help="FFT rotation sweep (closed curves only)")
    p.add_argument("--both-directions", action="store_true", help="also try the second curve reversed")
    p.add_argument("--itop", type=_positive, default=1)
    p.add_argument("--layrs", type=_positive, default=5)
    p.add_argument("--lstrp", type=_positive, default=30)
    p.add_argument("--stride", type=_positive, default=1, help="starting-point subsampling")
    p.add_argument("--out", default=None, metavar="PREFIX", help="prefix for plot data files")
    p.add_argument("--plots", action="store_true", help="write plot data files")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _fmt(obj) -> str:
    """JSON text with floats at 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_fmt(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    raise TypeError(f"cannot format {type(obj).__name__}")


def result_document(res: RegistrationResult, wall_time_ms: float) -> dict:
    return {
        "distance": res.distance,
        "energy": res.energy,
        "t0": res.t0,
        "rotation": np.asarray(res.rotation).tolist(),
        "gamma": res.gamma.gamma.tolist(),
        "direction_reversed": res.direction_reversed,
        "iterations": res.iterations,
        "wall_time_ms": wall_time_ms,
    }


def write_plot_files(prefix: str, res: RegistrationResult) -> None:
    if res.registered_curve1 is not None:
        np.savetxt(f"{prefix}.curve1.dat", res.registered_curve1, fmt="%.17g")
    if res.registered_curve2 is not None:
        np.savetxt(f"{prefix}.curve2.dat", res.registered_curve2, fmt="%.17g")
    np.savetxt(f"{prefix}.gamma.dat", np.column_stack([res.gamma.t, res.gamma.gamma]), fmt="%.17g")


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        c1 = load_curve_file(args.curve1, args.closed1)
    except OSError as exc:
        print(f"esdist: cannot read {args.curve1}: {exc.strerror}", file=sys.stderr)
        return 2
    except EsdError as exc:
        print(f"esdist: {args.curve1}: {exc}", file=sys.stderr)
        return 2
    try:
        c2 = load_curve_file(args.curve2, args.closed2)
    except OSError as exc:
        print(f"esdist: cannot read {args.curve2}: {exc.strerror}", file=sys.stderr)
        return 2
    except EsdError as exc:
        print(f"esdist: {args.curve2}: {exc}", file=sys.stderr)
        return 2
    if args.fft and not (c1.closed and c2.closed):
        which = args.curve1 if not c1.closed else args.curve2
        print(f"esdist: --fft needs two closed curves; {which} is open", file=sys.stderr)
        return 2

    cfg = PipelineConfig(
        itop=args.itop,
        dp=DpConfig(layrs=args.layrs, lstrp=args.lstrp),
        use_fft=args.fft,
        try_both_directions=args.both_directions,
        stride=args.stride,
    )
    start = time.perf_counter()
    try:
        res = compute_esd(c1, c2, cfg)
    except InputError as exc:
        print(f"esdist: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, EsdError, np.linalg.LinAlgError) as exc:
        print(f"esdist: numerical failure: {exc}", file=sys.stderr)
        return 3
    elapsed = (time.perf_counter() - start) * 1e3

    print(_fmt(result_document(res, elapsed)))
    if args.plots:
        write_plot_files(args.out or "esd", res)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)
