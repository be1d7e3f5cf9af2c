"""Command line entry point: ``run``, ``invariance`` and ``converge``."""

from __future__ import annotations

import argparse
import sys

from .config import PRESETS, SCHEMES, ConfigError, describe_keys, load_config
from .runner import DIGITS_ENV, RunFailure, convergence_study, invariance_suite, run

EPILOG = f"""\
Config files are flat 'key = value' text ('#' starts a comment; 'preset = fig2'
loads a preset before applying the remaining keys). Keys and defaults:
{describe_keys()}

Schemes: {', '.join(SCHEMES)}
Presets: {', '.join(PRESETS)}
Output precision: set {DIGITS_ENV} (significant digits, default 17).
"""


def _config(args):
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = PRESETS[args.preset]
    if getattr(args, "scheme", None):
        cfg = cfg.with_values(scheme=args.scheme)
    return cfg


def cmd_run(args) -> int:
    cfg = _config(args)
    result = run(cfg, args.out)
    print(f"completed t={result.t:g} ({cfg.n_steps} steps) with scheme {cfg.scheme}")
    last = result.changes[-1] if result.changes else {}
    for k, v in last.items():
        print(f"  {k} = {v:.3e}")
    if args.plot:
        from .plotting import render_run

        for p in render_run(result, args.out):
            print(f"  wrote {p}")
    for name, p in result.files.items():
        print(f"  wrote {p}")
    return 0


def cmd_invariance(args) -> int:
    cfg = _config(args)
    schemes = [args.scheme] if args.scheme else None
    rows = invariance_suite(cfg, schemes=schemes, steps=tuple(args.steps))
    print("scheme,generator,steps,discrepancy,tolerance,status")
    for r in rows:
        print(f"{r.scheme},{r.generator},{r.n_steps},{r.discrepancy:.3e},{r.tolerance:.1e},"
              f"{'pass' if r.passed else 'FAIL'}")
    return 0 if all(r.passed for r in rows) else 1


def cmd_converge(args) -> int:
    cfg = _config(args)
    table = convergence_study(cfg, args.levels, args.kind)
    label = "tau" if table.kind == "temporal" else "N"
    print(f"{label},difference,order")
    orders = [float("nan")] + table.orders + [float("nan")]
    for p, d, o in zip(table.parameters, table.differences, orders):
        print(f"{p:g},{d:.3e},{o:.3f}")
    if not table.monotone:
        print("warning: differences are not monotonically decreasing", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invariant-swe", description="Invariant shallow-water schemes on moving meshes.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p, preset_required=False):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--preset", choices=sorted(PRESETS))
        g.add_argument("--config", metavar="PATH")
        p.add_argument("--scheme", choices=list(SCHEMES), help="override the configured scheme")

    p = sub.add_parser("run", help="integrate a preset or config and write CSV output")
    source(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--plot", action="store_true", help="also render PNG figures into DIR")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("invariance", help="two-path equivariance checks for all generators")
    source(p)
    p.add_argument("--steps", type=int, nargs="+", default=[1, 10])
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("converge", help="Richardson self-convergence orders")
    source(p)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--kind", choices=["temporal", "spatial"], default="temporal")
    p.set_defaults(func=cmd_converge)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except RunFailure as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
