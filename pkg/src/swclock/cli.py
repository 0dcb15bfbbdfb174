"""Command-line interface.

Usage:
    swclock derive --tau 1e-8 --T 8.64e4
    swclock check --tau 1e-7 --n 1e7 --strict
    swclock invert --target T --n 8.64e12 --M 1e-16
    swclock sweep --axis1 n:10:1e6:6 --axis2 M:1e-27:1e-16:12 --output svg --out map.svg
    swclock simulate --tau 1e-7 --n 1e7 --samples 100000 --seed 1
    swclock reproduce --case 'nucleon-*'

Exit status: 0 on success, 1 when ``--strict`` is set and a requirement
fails (or any reproduction row fails), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .design import GENERAL_DIAL, MAXIMAL_DIAL, SOLVABLE, DesignError
from .feasibility import (
    DEFAULT_REL_THRESHOLD,
    DEFAULT_STRONG_FACTOR,
    Axis,
    check,
    close_with_density,
    material_note,
    sweep,
)
from .quantities import ConfigurationError, load_constants
from . import reports
from .wavepacket import (
    GaussianPacketState,
    analytic_arrival_spread,
    arrival_time_spread,
    propagate_grid,
    suggest_grid,
    verify_spreading_condition,
    write_density_csv,
)

MODE_ALIASES = {"general": GENERAL_DIAL, "maximal": MAXIMAL_DIAL,
                GENERAL_DIAL: GENERAL_DIAL, MAXIMAL_DIAL: MAXIMAL_DIAL}
DENSITY_WORDS = ("terrestrial", "nuclear", "auto")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _density(text: str):
    if text in DENSITY_WORDS:
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a number or one of {', '.join(DENSITY_WORDS)}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("density must be positive")
    return v


def _key_value(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--constants", type=Path, metavar="PATH",
                        help="constants override file (key = value lines); "
                             "defaults to $SWCLOCK_CONSTANTS")
    common.add_argument("--const", type=_key_value, action="append", default=[],
                        metavar="KEY=VALUE", help="override one constant; beats --constants")
    common.add_argument("--output", choices=("table", "json", "csv", "svg"), default="table")
    common.add_argument("--out", type=Path, metavar="PATH", help="write here instead of stdout")
    common.add_argument("--human", action="store_true",
                        help="add metric conversions to table output")

    design = _Parser(add_help=False)
    design.add_argument("--mode", choices=sorted(MODE_ALIASES), default="maximal")
    design.add_argument("--rho", type=_density, default="terrestrial",
                        help="density in g/cm^3 or terrestrial|nuclear|auto")
    for name in SOLVABLE:
        design.add_argument(f"--{name}", type=float, dest=f"k_{name}", metavar="VALUE")

    checks = _Parser(add_help=False)
    checks.add_argument("--strong-factor", type=float, default=DEFAULT_STRONG_FACTOR)
    checks.add_argument("--rel-threshold", type=float, default=DEFAULT_REL_THRESHOLD)
    checks.add_argument("--strict", action="store_true",
                        help="exit 1 when a requirement fails")

    mc = _Parser(add_help=False)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--samples", type=int, default=100_000)
    mc.add_argument("--workers", type=int, default=1)

    parser = _Parser(prog="swclock", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"swclock {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("derive", parents=[common, design], help="close a design")
    p = sub.add_parser("invert", parents=[common, design], help="solve for one field")
    p.add_argument("--target", required=True, choices=SOLVABLE)
    sub.add_parser("check", parents=[common, design, checks],
                   help="close a design and evaluate the requirements")

    p = sub.add_parser("sweep", parents=[common, checks, mc], help="classify a design grid")
    p.add_argument("--mode", choices=sorted(MODE_ALIASES), default="maximal")
    p.add_argument("--axis1", type=Axis.parse, default=Axis("n", 10, 1e6, 6),
                   metavar="FIELD:LO:HI:POINTS")
    p.add_argument("--axis2", type=Axis.parse, default=Axis("M", 1e-27, 1e-16, 12),
                   metavar="FIELD:LO:HI:POINTS")
    p.add_argument("--fix", type=_key_value, action="append", default=[],
                   metavar="FIELD=VALUE", help="extra known held fixed over the grid")
    p.add_argument("--rho", type=_density, default="nuclear")

    p = sub.add_parser("simulate", parents=[common, design, checks, mc],
                       help="spreading check and arrival-time Monte Carlo")
    p.add_argument("--no-velocity-spread", action="store_true")
    p.add_argument("--detector-jitter", action="store_true")
    p.add_argument("--dump-density", type=Path, metavar="PATH",
                   help="write co-moving |psi|^2 snapshots at t = 0, T/2, T to CSV")

    p = sub.add_parser("reproduce", parents=[common], help="rerun the built-in examples")
    p.add_argument("--case", metavar="GLOB", help="only cases whose name matches")
    return parser


def _constants(args):
    return load_constants(dict(args.const), path=args.constants, use_env=True)


def _knowns(args) -> dict:
    return {name: getattr(args, f"k_{name}") for name in SOLVABLE
            if getattr(args, f"k_{name}") is not None}


def _design(args, constants):
    return close_with_density(_knowns(args), MODE_ALIASES[args.mode], args.rho, constants)


def _no_svg(args):
    if args.output == "svg":
        raise UsageError(f"--output svg is only available for sweep, not {args.command}")


def _emit(args, text: str, stdout):
    if args.out is not None:
        args.out.write_text(text)
    else:
        stdout.write(text)


def cmd_derive(args, constants, stdout) -> int:
    _no_svg(args)
    d = _design(args, constants)
    if args.output == "json":
        text = reports.to_json(reports.envelope("derive", constants, design=d.as_dict()))
    elif args.output == "csv":
        text = reports.to_csv([d.as_dict()], reports.DESIGN_COLUMNS)
    else:
        text = "\n".join([f"design ({d.mode})"] + reports.design_table(d, args.human)) + "\n"
    _emit(args, text, stdout)
    return 0


def cmd_invert(args, constants, stdout) -> int:
    _no_svg(args)
    d = _design(args, constants)
    q = d.quantity(args.target)
    if args.output == "json":
        text = reports.to_json(reports.envelope(
            "invert", constants, design=d.as_dict(), target=args.target,
            value=q.value, dimension=q.dim.name))
    elif args.output == "csv":
        text = reports.to_csv([{"target": args.target, "value": q.value,
                                "dimension": q.dim.name}],
                              ("target", "value", "dimension"))
    else:
        unit = reports.UNITS[args.target]
        text = f"{args.target} = {reports.fmt(q.value)} {unit}".rstrip() + "\n"
    _emit(args, text, stdout)
    return 0


def cmd_check(args, constants, stdout) -> int:
    _no_svg(args)
    d = _design(args, constants)
    rep = check(d, args.strong_factor, args.rel_threshold, constants)
    mat = material_note(d, constants)
    if args.output == "json":
        text = reports.to_json(reports.envelope(
            "check", constants, design=d.as_dict(), feasibility=rep.as_dict(), material=mat))
    elif args.output == "csv":
        text = reports.to_csv([reports.design_record(d, rep, mat)],
                              reports.DESIGN_COLUMNS + reports.REPORT_COLUMNS)
    else:
        lines = [f"design ({d.mode})"] + reports.design_table(d, args.human)
        lines += ["requirements"] + reports.report_table(rep, mat)
        text = "\n".join(lines) + "\n"
    _emit(args, text, stdout)
    return 1 if args.strict and not rep.all_passed else 0


def cmd_sweep(args, constants, stdout) -> int:
    extra = {k: float(v) for k, v in args.fix}
    res = sweep(args.axis1, args.axis2, MODE_ALIASES[args.mode], args.strong_factor,
                args.rho, constants, args.rel_threshold, extra, args.workers)
    if args.output == "json":
        text = reports.to_json(reports.envelope("sweep", constants, **reports.sweep_json(res)))
    elif args.output == "csv":
        text = reports.to_csv(reports.sweep_rows(res), reports.sweep_columns(res))
    elif args.output == "svg":
        text = reports.sweep_svg(res, f"{args.axis1.field} x {args.axis2.field} "
                                      f"({MODE_ALIASES[args.mode]}, rho={args.rho})")
    else:
        counts = res.summary["class_counts"]
        lines = [f"sweep {args.axis1.field} x {args.axis2.field}, "
                 f"{args.axis1.points}x{args.axis2.points} cells"]
        lines += [f"  {k:<40} {v}" for k, v in counts.items()]
        for k in ("invalid_cells", "feasible_cells", "realizable_cells", "max_feasible_n",
                  "max_feasible_n_ignoring_material"):
            lines.append(f"  {k:<40} {reports.fmt(res.summary[k])}")
        text = "\n".join(lines) + "\n"
    _emit(args, text, stdout)
    return 0


def cmd_simulate(args, constants, stdout) -> int:
    _no_svg(args)
    d = _design(args, constants)
    spr = verify_spreading_condition(d, constants)
    vs = not args.no_velocity_spread
    mc = arrival_time_spread(d, args.samples, args.seed, velocity_spread=vs,
                             detector_jitter=args.detector_jitter, workers=args.workers)
    analytic = analytic_arrival_spread(d, vs, args.detector_jitter)
    if args.dump_density is not None:
        # co-moving frame: the shape of |psi|^2 is independent of the velocity
        st = GaussianPacketState(0.0, 0.0, d.dx, d.M, convention="paper_hbar")
        grid = suggest_grid(st, d.T, constants.hbar)
        write_density_csv([propagate_grid(st, grid, t, constants)
                           for t in (0.0, d.T / 2, d.T)], args.dump_density)
    arrival = {"mean": mc.mean, "spread": mc.spread, "discarded": mc.discarded,
               "samples": mc.samples, "seed": args.seed, "analytic_spread": analytic}
    if args.output == "json":
        text = reports.to_json(reports.envelope(
            "simulate", constants, design=d.as_dict(), spreading=spr._asdict(),
            arrival=arrival))
    elif args.output == "csv":
        rec = d.as_dict()
        rec.update(growth_paper=spr.growth_paper, growth_standard=spr.growth_standard,
                   dt_end_paper=spr.dt_end_paper, dt_end_standard=spr.dt_end_standard,
                   spreading_satisfied=spr.satisfied, mc_mean=mc.mean, mc_spread=mc.spread,
                   mc_discarded=mc.discarded, mc_samples=mc.samples,
                   analytic_spread=analytic)
        text = reports.to_csv([rec], reports.csv_header_contract()["simulate"])
    else:
        lines = [f"design ({d.mode})"] + reports.design_table(d, args.human)
        lines += [
            "spreading over one run",
            f"  growth (dx*dp = hbar)    {reports.fmt(spr.growth_paper)}",
            f"  growth (sigma, hbar/2)   {reports.fmt(spr.growth_standard)}",
            f"  dt at end / tau          {reports.fmt(spr.ratio_to_tau_paper)}"
            f" / {reports.fmt(spr.ratio_to_tau_standard)}",
            f"  within (1, 2.5]          {spr.satisfied}",
            f"arrival time, {mc.samples} samples, seed {args.seed}",
            f"  mean                     {reports.fmt(mc.mean)} s",
            f"  spread                   {reports.fmt(mc.spread)} s",
            f"  spread / tau             {reports.fmt(mc.spread / d.tau)}",
            f"  analytic spread          {reports.fmt(analytic)} s",
            f"  discarded                {mc.discarded}",
        ]
        text = "\n".join(lines) + "\n"
    _emit(args, text, stdout)
    return 1 if args.strict and not spr.satisfied else 0


def cmd_reproduce(args, constants, stdout) -> int:
    _no_svg(args)
    rows = reports.reproduce(constants, args.case)
    if not rows:
        raise UsageError(f"no reproduction case matches {args.case!r}")
    passed = all(r["pass"] for r in rows)
    if args.output == "json":
        text = reports.to_json(reports.envelope("reproduce", constants, rows=rows,
                                                passed=passed))
    elif args.output == "csv":
        text = reports.to_csv(rows, reports.REPRO_COLUMNS)
    else:
        text = reports.table(rows, reports.REPRO_COLUMNS)
        text += f"{sum(r['pass'] for r in rows)}/{len(rows)} checks pass\n"
    _emit(args, text, stdout)
    return 0 if passed else 1


COMMANDS = {
    "derive": cmd_derive, "invert": cmd_invert, "check": cmd_check,
    "sweep": cmd_sweep, "simulate": cmd_simulate, "reproduce": cmd_reproduce,
}


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        constants = _constants(args)
        return COMMANDS[args.command](args, constants, stdout)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    except (DesignError, ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
