"""Command-line entry point: run presets or config files, sweep parameters,
re-analyze manifests, and export experiment data.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .field import NumericalFailure, ValidationError
from .runner import PRESET_NAMES, analyze, export, run_preset, sweep


def _cmd_run(args) -> int:
    man = run_preset(args.target, out_root=args.out)
    print(f"wrote {man.directory / 'manifest.json'}")
    if args.verbose:
        print(man.to_json())
    return 0


def _cmd_sweep(args) -> int:
    base = json.loads(args.base) if args.base.strip().startswith("{") \
        else json.loads(open(args.base).read())
    values = [float(v) for v in args.values.split(",")]
    result = sweep(base, args.param, values, parallelism=args.parallelism,
                   out_root=args.out)
    for man in result.manifests:
        print(f"wrote {man.directory / 'manifest.json'}")
    for f in result.failures:
        print(f"FAILED value={f['value']}: {f['error']}", file=sys.stderr)
    return 3 if result.failures else 0


def _cmd_analyze(args) -> int:
    print(json.dumps(analyze(args.manifest), indent=1, sort_keys=True))
    return 0


def _cmd_export(args) -> int:
    copied = export(args.manifest, args.dest)
    print(f"copied {len(copied)} files to {args.dest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nlscollapse",
        description="Damped-NLS collapse/arrest experiment runner")
    ap.add_argument("--out", default=None,
                    help="output root (default: $NLSCOLLAPSE_OUT or ./out)")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a preset or a JSON config file")
    p_run.add_argument("target",
                       help=f"one of {', '.join(PRESET_NAMES)} or a file path")
    p_run.add_argument("--verbose", action="store_true")
    p_run.set_defaults(fn=_cmd_run)

    p_sw = sub.add_parser("sweep", help="sweep one solver parameter")
    p_sw.add_argument("base", help="base solver config: JSON string or file")
    p_sw.add_argument("--param", required=True)
    p_sw.add_argument("--values", required=True,
                      help="comma-separated numbers")
    p_sw.add_argument("--parallelism", type=int, default=1)
    p_sw.set_defaults(fn=_cmd_sweep)

    p_an = sub.add_parser("analyze",
                          help="verify hashes and recompute diagnostics")
    p_an.add_argument("manifest")
    p_an.set_defaults(fn=_cmd_analyze)

    p_ex = sub.add_parser("export", help="copy experiment outputs")
    p_ex.add_argument("manifest")
    p_ex.add_argument("--dest", required=True)
    p_ex.set_defaults(fn=_cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 2
    except (NumericalFailure, RuntimeError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
