"""Command line front-end.

Every subcommand accepts ``--grid N``, ``--seed S`` and ``--out DIR``. With
``--out`` the primary result is written into DIR together with a
``manifest.json``; without it the result goes to stdout and nothing is
written. Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 invalid
input document.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .approximation import FitConfig, fit, probe_neighborhood
from .composition import CompositionDag, DagError
from .counting import CSV_HEADER, DISCLAIMER, EXACT, LITERAL, count_table
from .diagonal import DiagonalSchedule, build, cauchy_check
from .pairing import PairingCodec, PairingDomainError, represent, verify_identity
from .polynomial import DEFAULT_GRID_N, GridSpec, TriPoly


class InputDocumentError(Exception):
    """An input file is not valid JSON or not a valid document."""


def parse_range(text: str) -> list[int]:
    """``"3"``, ``"1..10"`` (inclusive) or ``"1,4,9"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}; use a..b, a,b,c or a single integer") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from None


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputDocumentError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputDocumentError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_tripoly(path: str) -> TriPoly:
    doc = load_json(path)
    try:
        return TriPoly.from_json(doc)
    except (ValueError, TypeError) as exc:
        raise InputDocumentError(f"{path}: {exc}") from None


def load_dag(path: str) -> CompositionDag:
    doc = load_json(path)
    try:
        return CompositionDag.from_json(doc)
    except (DagError, ValueError, TypeError, KeyError) as exc:
        raise InputDocumentError(f"{path}: {exc}") from None


# subcommands; each returns {filename: text} for the primary outputs


def _codec(args) -> PairingCodec:
    return PairingCodec(args.base, args.digits)


def _clamp_one(codec: PairingCodec, text: str) -> str:
    if text.strip() in ("1", "1.0", "1."):
        clamped = codec.format_index(codec.scale - 1, codec.digits)
        print(f"warning: clamping 1 to {clamped} (largest grid point)", file=sys.stderr)
        return clamped
    return text


def cmd_pair(args) -> dict:
    codec = _codec(args)
    x2, x3 = _clamp_one(codec, args.x2), _clamp_one(codec, args.x3)
    for name, value in (("x2", x2), ("x3", x3)):
        if not codec.quantize(value).exact:
            print(f"warning: {name}={value} truncated to {args.digits} base-{args.base} digits", file=sys.stderr)
    return {"pair.txt": codec.pair_str(x2, x3) + "\n"}


def cmd_unpair(args) -> dict:
    codec = _codec(args)
    x2, x3 = codec.unpair_str(args.y)
    return {"unpair.txt": f"{x2} {x3}\n"}


_ORACLES = {
    "sum": lambda a, b, c: a + b + c,
    "product": lambda a, b, c: a * b * c,
}


def cmd_represent(args) -> dict:
    codec = _codec(args)
    if args.target:
        poly = load_tripoly(args.target)
        f = poly.__call__
        label = args.target
    else:
        f, label = _ORACLES[args.function], args.function
    rng = np.random.default_rng(args.seed)
    if args.on_grid:
        idx = rng.integers(0, codec.scale, size=(args.samples, 2))
        x1 = rng.uniform(0.0, 1.0, size=args.samples)
        samples = [(float(a), float(Fraction(int(m2), codec.scale)), float(Fraction(int(m3), codec.scale)))
                   for a, (m2, m3) in zip(x1, idx)]
    else:
        pts = rng.uniform(0.0, 1.0, size=(args.samples, 3))
        samples = [tuple(float(v) for v in p) for p in pts]
    report = verify_identity(f, represent(f, codec), samples, codec)
    doc = {"function": label, "base": args.base, "digits": args.digits, "on_grid": args.on_grid, **report.to_json()}
    return {"represent.json": dumps(doc)}


def cmd_count(args) -> dict:
    modes = (LITERAL, EXACT) if args.mode == "both" else (args.mode,)
    print(f"note: {DISCLAIMER}", file=sys.stderr)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for cert in count_table(args.k, args.r, modes):
        row = list(cert.row())
        row[-1] = "true" if row[-1] else "false"
        w.writerow(row)
    return {"count.csv": buf.getvalue()}


def _fit_config(args) -> FitConfig:
    return FitConfig(r=args.r, restarts=args.restarts, max_iter=args.max_iter, seed=args.seed,
                     grid=GridSpec(args.grid))


def _topology(args):
    if args.dag:
        return load_dag(args.dag), args.dag
    return args.preset, args.preset


def cmd_fit(args) -> dict:
    target = load_tripoly(args.target)
    topo, label = _topology(args)
    report = fit(topo, target, _fit_config(args), name=label)
    return {"fit_report.json": dumps(report.to_json())}


def cmd_probe(args) -> dict:
    f = load_tripoly(args.f)
    g = load_tripoly(args.g) if args.g else TriPoly.zero(0)
    topo, label = _topology(args)
    report = probe_neighborhood(g, f, args.t, topo, _fit_config(args))
    doc = {"topology": label, "r": args.r, **report.to_json()}
    return {"probe.csv": report.to_csv(), "probe.json": dumps(doc)}


def cmd_diagonal(args) -> dict:
    schedule = DiagonalSchedule.geometric(args.m, args.eps1, args.ratio, args.seed)
    grid = GridSpec(args.grid)
    seq = build(schedule, grid)
    check = cauchy_check(seq, grid)
    return {"diagonal.json": dumps(seq.to_json()), "cauchy.json": dumps(check.to_json())}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=DEFAULT_GRID_N, help="grid points per axis")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output directory (default: print to stdout)")

    codec = argparse.ArgumentParser(add_help=False)
    codec.add_argument("--base", type=int, default=10)
    codec.add_argument("--digits", type=int, default=2)

    fitting = argparse.ArgumentParser(add_help=False)
    topo = fitting.add_mutually_exclusive_group()
    topo.add_argument("--preset", default="chain2", help="chain2, chain<k> or hilbert-3leaf")
    topo.add_argument("--dag", help="topology as a DAG JSON file")
    fitting.add_argument("--r", type=int, default=2, help="node order")
    fitting.add_argument("--restarts", type=int, default=20)
    fitting.add_argument("--max-iter", type=int, default=FitConfig.max_iter)

    parser = argparse.ArgumentParser(prog="hilbert13", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pair", parents=[common, codec], help="interleave the digits of x2 and x3")
    p.add_argument("x2")
    p.add_argument("x3")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("unpair", parents=[common, codec], help="split y into (x2, x3)")
    p.add_argument("y")
    p.set_defaults(func=cmd_unpair)

    p = sub.add_parser("represent", parents=[common, codec], help="check f(x1,x2,x3) = F(x1, pair(x2,x3))")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--function", choices=sorted(_ORACLES), default="sum")
    src.add_argument("--target", help="TriPoly JSON file")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--on-grid", action="store_true", help="sample x2, x3 on the codec grid")
    p.set_defaults(func=cmd_represent, base=2, digits=20)

    p = sub.add_parser("count", parents=[common], help="coefficient-count certificates as CSV")
    p.add_argument("--k", type=parse_range, default=parse_range("1..10"))
    p.add_argument("--r", type=parse_range, default=parse_range("1..10"))
    p.add_argument("--mode", choices=(LITERAL, EXACT, "both"), default=LITERAL)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("fit", parents=[common, fitting], help="fit a composition DAG to a target")
    p.add_argument("--target", required=True, help="TriPoly JSON file")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("probe", parents=[common, fitting], help="fit g + t f over a list of t")
    p.add_argument("--g", help="TriPoly JSON file (default: zero)")
    p.add_argument("--f", required=True, help="TriPoly JSON file")
    p.add_argument("--t", type=parse_floats, default=parse_floats("0,0.001,0.01"))
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("diagonal", parents=[common], help="build a diagonal sequence and check it")
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--eps1", type=float, default=0.5)
    p.add_argument("--ratio", type=float, default=0.5)
    p.set_defaults(func=cmd_diagonal)
    return parser


def _config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        outputs = args.func(args)
    except InputDocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (PairingDomainError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out is None:
        for text in outputs.values():
            sys.stdout.write(text)
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        (out / name).write_text(text, encoding="utf-8")
    manifest = {
        "subcommand": args.command,
        "config": _config_of(args),
        "seed": args.seed,
        "version": __version__,
        "inputs": [getattr(args, k) for k in ("target", "dag", "f", "g") if getattr(args, k, None)],
        "outputs": sorted(outputs),
        "wall_clock_seconds": time.perf_counter() - started,
    }
    (out / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
