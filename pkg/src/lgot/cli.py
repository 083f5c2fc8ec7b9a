"""Command line: ``lgot run`` and ``lgot scan``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import InputError, ScanError
from .pipeline import EXIT_INPUT, EXIT_OK, run, scan
from .scenarios import resolve


def _value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_params(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise InputError(f"--param expects key=value, got {item!r}")
        out[key.strip()] = _value(val.strip())
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lgot", description="Planar least gradient solver and verifier.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the pipeline on a scenario")
    r.add_argument("scenario", help="scenario file or builtin:NAME")
    r.add_argument("--param", action="append", metavar="K=V", help="scenario parameter")
    r.add_argument("--check-only", action="store_true", help="stop after the admissibility checks")
    r.add_argument("--oracle", action="store_true", help="add the discrete assignment solve")
    r.add_argument("--grid", type=int, help="raster resolution per side")
    r.add_argument("--atoms", type=int, help="plan atoms")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", type=Path, help="output directory")
    r.add_argument("--emit", default="csv,svg", help="comma list of csv, svg")
    r.add_argument("--json", action="store_true", help="print the report as JSON")

    s = sub.add_parser("scan", help="bisect a built-in family's admissibility frontier")
    s.add_argument("family", help="delta_square, circ_cshape or rect_cshape")
    s.add_argument("--param-range", nargs=2, type=float, required=True, metavar=("LO", "HI"))
    s.add_argument("--condition", help="condition id (defaults per family)")
    s.add_argument("--param", action="append", metavar="K=V", help="fixed family parameter")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    return ap


def _cmd_run(args) -> int:
    sc = resolve(args.scenario, parse_params(args.param))
    kinds = tuple(k for k in args.emit.split(",") if k)
    rep = run(sc, check_only=args.check_only, oracle=args.oracle, grid=args.grid,
              atoms=args.atoms, seed=args.seed, out=args.out, emit=kinds)
    if args.json:
        from .emit import _round
        print(json.dumps(_round(rep.to_dict()), indent=2, sort_keys=True))
    else:
        print(rep.summary())
    return rep.exit_code


def _cmd_scan(args) -> int:
    from .emit import fmt, write_scan
    from .scenarios import SCAN_FAMILIES

    lo, hi = args.param_range
    res = scan(args.family, lo, hi, args.condition, args.tol, parse_params(args.param))
    param = SCAN_FAMILIES[args.family][0]
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        write_scan(res, args.out, param)
    else:
        print(f"{param},verdict,margin")
        for x, verdict, margin in res.history:
            print(f"{fmt(x)},{verdict},{fmt(margin)}")
    side = "below" if res.satisfied_below else "above"
    print(f"critical {param} = {fmt(res.critical)} (satisfied {side}; bracket "
          f"[{fmt(res.lo)}, {fmt(res.hi)}])", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _cmd_run(args) if args.command == "run" else _cmd_scan(args)
    except (InputError, ScanError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
