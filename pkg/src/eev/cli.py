"""Command-line interface: eev run | sweep | verify | report."""

import argparse
import sys

from .config import default_config, dump_config, load_config
from .errors import BlowUpError, ConfigurationError, SchemaError


def _add_common(sub):
    sub.add_argument("-c", "--config", metavar="cfg.toml",
                     help="TOML configuration file (defaults embedded)")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the perturbation seed")
    sub.add_argument("--out", default=None, help="override the output directory")
    sub.add_argument("--print-config", action="store_true",
                     help="dump the effective configuration as TOML and exit")


def _load(args):
    cfg = load_config(args.config) if args.config else default_config()
    if args.out:
        import dataclasses

        cfg = dataclasses.replace(cfg, output_dir=args.out)
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(
        prog="eev",
        description="Ensemble eddy-viscosity solver with dissipation-bound diagnostics",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="execute a single configured run")
    _add_common(p_run)

    p_sweep = subs.add_parser("sweep", help="run a Reynolds-number sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--re", required=True,
                         help="comma-separated Reynolds numbers, e.g. 1e2,1e3,1e4")

    p_verify = subs.add_parser("verify", help="run the self-check suites")
    _add_common(p_verify)

    p_report = subs.add_parser("report", help="render figures from run output")
    p_report.add_argument("--in", dest="in_dir", required=True,
                          help="run or sweep output directory")
    p_report.add_argument("--out", default=None, help="report output directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigurationError, SchemaError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except BlowUpError as err:
        print(f"blow-up: {err}", file=sys.stderr)
        return 3


def _dispatch(args):
    if args.command == "report":
        from .report import report

        for path in report(args.in_dir, args.out):
            print(path)
        return 0

    cfg = _load(args)
    if args.print_config:
        print(dump_config(cfg), end="")
        return 0

    if args.command == "run":
        from .harness import run

        summary = run(cfg, seed=args.seed)
        print(f"run complete: {summary.out_dir}")
        if summary.verdict is not None:
            print(f"bound verdict: {summary.verdict} (margin {summary.margin:.3f})")
        for w in summary.warnings:
            print(f"warning: {w}")
        return 0

    if args.command == "sweep":
        from .harness import sweep

        re_values = [float(tok) for tok in args.re.split(",") if tok]
        rows, _ = sweep(cfg, re_values, seed=args.seed)
        print(f"{'Re':>10} {'eps_norm':>12} {'bound':>10} {'margin':>8} "
              f"{'I':>8} {'tau/T*':>8}  status")
        for r in rows:
            print(f"{r['Re']:>10.3g} {r['eps_norm']:>12.5g} {r['bound_coeff']:>10.5g} "
                  f"{r['margin']:>8.3f} {r['I']:>8.4f} {r['tau_over_Tstar']:>8.4f}  "
                  f"{r['status']}")
        return 0 if all(r["status"] != "failed" for r in rows) else 3

    if args.command == "verify":
        from .verification import verify

        report_rows = verify(cfg)
        width = max(len(name) for name, _, _ in report_rows)
        failed = False
        for name, status, detail in report_rows:
            print(f"{name:<{width}}  {status:<4}  {detail}")
            failed |= status == "FAIL"
        return 1 if failed else 0

    raise ConfigurationError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
