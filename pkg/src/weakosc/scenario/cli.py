"""Command-line front end: run, sweep, validate, list-scenarios."""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import NumericalFailure, ValidationFailure
from .config import SCHEMAS, Kind, ParseError, ValidationError, load, sweepable_axes
from .presets import PRESETS
from .runner import output_stem, run, sweep, write_record

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _parse_values(text: str) -> list[float]:
    parts = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return [float(t) for t in parts]
    except ValueError as exc:
        raise ValidationError([("values", f"not a number list: {text!r}")]) from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weakosc", description="Weak values of oscillating versus mixed sources.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--workers", type=int, default=1, help="concurrent sweep points (default 1)")
    common.add_argument("--out", help="output path stem; .csv and .json are written next to it")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="execute one scenario")
    p.add_argument("config")
    p = sub.add_parser("sweep", parents=[common], help="execute a scenario over a list of values of one parameter")
    p.add_argument("config")
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated numbers")
    p = sub.add_parser("validate", help="check a config and report every problem")
    p.add_argument("config")
    sub.add_parser("list-scenarios", help="show scenario kinds, parameters and source presets")
    return ap


def _list_scenarios() -> None:
    for kind in Kind:
        print(kind.value)
        for name, f in SCHEMAS[kind].items():
            need = "required" if f.required else f"default {f.default!r}"
            print(f"  {name:<13} {f.type:<5} {need}")
        print(f"  sweepable: {', '.join(sweepable_axes(kind))}")
    print(f"source presets (illustrative): {', '.join(PRESETS)}")


def _load(args):
    cfg = load(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _finish(rec, args, cfg) -> int:
    csv_path, json_path = write_record(rec, output_stem(cfg, args.out))
    print(rec.csv_text(), end="")
    print(f"verdict: {rec.verdict}")
    print(f"wrote {csv_path} and {json_path}")
    if rec.errors:
        for e in rec.errors:
            print(f"error: {e['type']}: {e['message']}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-scenarios":
            _list_scenarios()
            return EXIT_OK
        cfg = _load(args)
        if args.command == "validate":
            print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
            print("valid")
            return EXIT_OK
        if args.workers < 1:
            raise ValidationError([("--workers", "must be >= 1")])
        if args.command == "run":
            return _finish(run(cfg, workers=args.workers), args, cfg)
        return _finish(sweep(cfg, args.axis, _parse_values(args.values), workers=args.workers), args, cfg)
    except ValidationError as exc:
        for path, msg in exc.problems:
            print(f"invalid: {path}: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ParseError, ValidationFailure) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
