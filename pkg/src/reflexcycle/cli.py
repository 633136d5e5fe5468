"""Command-line entry point: ``reflexcycle {simulate,sweep,leontief,report}``.

Exit codes: 0 success, 2 configuration/usage error, 3 engine error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import params as P
from .dynamics import SimulationError, read_trajectory_csv, run
from .equilibrium import EquilibriumError, leontief_regime, solve_leontief
from .indicators import crisis_report
from .sweep import load_plan, run_sweep, stderr_progress

EXIT_CONFIG = 2
EXIT_ENGINE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _params(args) -> P.ModelParams:
    p = P.load(Path(args.config).read_text()) if args.config else P.defaults()
    overrides = {}
    for item in args.override or []:
        if "=" not in item:
            raise P.ParseError(item, "override must look like key=value")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value
    if args.seed is not None:
        overrides["engine.seed"] = str(args.seed)
    return P.with_overrides(p, overrides)


def _add_common(sp):
    sp.add_argument("--config", help="key = value parameter file (defaults if omitted)")
    sp.add_argument("--override", action="append", metavar="KEY=VALUE",
                    help="override a config key (repeatable, last one wins)")
    sp.add_argument("--seed", type=int, help="master seed (same as --override engine.seed=N)")


def cmd_simulate(args) -> int:
    p = _params(args)
    traj = run(p)
    report = crisis_report(traj)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out / "trajectory.csv")
    (out / "summary.json").write_text(report.to_json())
    if args.histograms:
        for name, h in (("c", report.hist_c), ("n", report.hist_n), ("S", report.hist_S)):
            (out / f"hist_{name}.csv").write_text(h.to_csv())
    print(json.dumps(report.summary(), sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    p = _params(args)
    plan = load_plan(Path(args.plan).read_text(), p)
    result = run_sweep(plan, workers=args.workers, out_dir=args.out,
                       progress=None if args.quiet else stderr_progress)
    return 0 if result is not None else EXIT_ENGINE


def leontief_table(k_values, g_values, p: P.ModelParams) -> str:
    lines = ["k,G,c_tilde,n,w_tilde,q_star_tilde,regime"]
    for G in g_values:
        for k in k_values:
            eq = solve_leontief(k, G, p)
            reg = leontief_regime(k, G, p).regime.value
            lines.append(",".join(repr(float(v)) for v in (k, G, eq.c_tilde, eq.n, eq.w_tilde, eq.q_star_tilde))
                         + f",{reg}")
    return "\n".join(lines) + "\n"


def cmd_leontief(args) -> int:
    p = _params(args)
    if args.k_num < 0 or args.k_min <= 0 or args.k_max < args.k_min:
        raise P.RangeError("k-range", "need 0 < k_min <= k_max and k_num >= 0")
    if any(not 0 < g <= 1 for g in args.g):
        raise P.RangeError("G", "consumption rates must lie in (0, 1]")
    ks = np.linspace(args.k_min, args.k_max, args.k_num) if args.k_num else []
    text = leontief_table(ks, args.g, p)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    p = _params(args)
    cols = read_trajectory_csv(args.trajectory)
    report = crisis_report(cols, p)
    text = report.to_json()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(text)
        if args.histograms:
            for name, h in (("c", report.hist_c), ("n", report.hist_n), ("S", report.hist_S)):
                (out / f"hist_{name}.csv").write_text(h.to_csv())
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reflexcycle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("simulate", help="run one trajectory, write trajectory.csv and summary.json")
    _add_common(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--histograms", action="store_true", help="also write hist_{c,n,S}.csv")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="run a parameter grid, write grid.csv and manifest.json")
    _add_common(sp)
    sp.add_argument("--plan", required=True, help="plan file (axis1, axis1_values|axis1_range, ...)")
    sp.add_argument("--out", required=True, help="output directory (resumable)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("leontief", help="tabulate the rho -> inf closed forms")
    _add_common(sp)
    sp.add_argument("--k-min", type=float, default=0.05)
    sp.add_argument("--k-max", type=float, default=1.5)
    sp.add_argument("--k-num", type=int, default=60)
    sp.add_argument("--g", type=float, action="append", help="consumption rate (repeatable)")
    sp.add_argument("--out", help="CSV path (stdout if omitted)")
    sp.set_defaults(func=cmd_leontief)

    sp = sub.add_parser("report", help="indicators for an existing trajectory CSV")
    _add_common(sp)
    sp.add_argument("--trajectory", required=True)
    sp.add_argument("--out", help="output directory (stdout if omitted)")
    sp.add_argument("--histograms", action="store_true")
    sp.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "g", None) is None and args.command == "leontief":
        args.g = [0.95]
    try:
        return args.func(args)
    except (P.ConfigError, ValueError, OSError) as exc:
        print(f"reflexcycle: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, EquilibriumError) as exc:
        print(f"reflexcycle: engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
