"""Command-line entry point ``aeronet-ctr``.

Exit status: 0 on success, 2 when the requirement cannot be met even at the
largest range (or the network is disconnected for ``check``), 1 on bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from fractions import Fraction

from .dtn import ctrd_search, delay_violations, topology_sequence
from .errors import DomainError, InfeasibleError, PackingError, ScenarioError, UnsupportedError
from .experiment import load_plan, result_to_json, run_experiment, summary_csv, trials_csv
from .fault import ctrf_search
from .kinematics import AngularVelocity
from .scenario import Area, generate_random_scenario, load_scenario, serialize_scenario
from .timeline import build_link_timeline, dump_timeline_json, intervals, timeline_to_csv
from .topology import ctr_search, find_disconnected_interval

log = logging.getLogger("aeronet_ctr")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2

_RATE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*(\*?\s*pi)?\s*$")


def parse_rate(text: str) -> AngularVelocity:
    """``20``, ``3/2``, ``1/4pi`` or ``1/4*pi`` are exact; anything else is read as a float."""
    m = _RATE.match(text)
    if m:
        den = int(m.group(2) or 1)
        if den == 0:
            raise argparse.ArgumentTypeError("zero denominator")
        return AngularVelocity.exact(int(m.group(1)), den, bool(m.group(3)))
    try:
        return AngularVelocity.inexact(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angular velocity: {text!r}") from None


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _nonneg(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _emit(doc, out=None):
    text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _infeasible(exc: InfeasibleError, what: str):
    w = exc.witness
    _emit({what: None, "infeasible": True, "reason": str(exc),
           "witness": w.as_dict() if hasattr(w, "as_dict") else w})
    return EXIT_INFEASIBLE


def cmd_check(args):
    sc = load_scenario(args.scenario)
    bad = find_disconnected_interval(sc, args.tr)
    _emit({"tr": args.tr, "connected": bad is None,
           "disconnected": bad.as_dict() if bad else None})
    return EXIT_OK if bad is None else EXIT_INFEASIBLE


def cmd_ctr(args):
    sc = load_scenario(args.scenario)
    try:
        res = ctr_search(sc, args.err)
    except InfeasibleError as exc:
        return _infeasible(exc, "ctr")
    _emit({"ctr": res.value, "err": args.err, "lower": res.lower, "steps": res.steps,
           "binding": res.witness.as_dict() if res.witness else None})
    return EXIT_OK


def cmd_ctrf(args):
    sc = load_scenario(args.scenario)
    try:
        res = ctrf_search(sc, args.region_radius, args.err, args.method)
    except InfeasibleError as exc:
        return _infeasible(exc, "ctr_f")
    _emit({"ctr_f": res.value, "region_radius": args.region_radius, "err": args.err,
           "lower": res.lower, "steps": res.steps,
           "binding": res.witness.as_dict() if res.witness else None})
    return EXIT_OK


def cmd_ctrd(args):
    sc = load_scenario(args.scenario)
    D = args.delay * (sc.period if args.delay_unit == "period" else 1.0)
    try:
        res = ctrd_search(sc, D, args.err, args.all_starts)
    except InfeasibleError as exc:
        return _infeasible(exc, "ctr_d")
    ts = topology_sequence(sc, res.value)
    failing = {v.start_index for v in delay_violations(ts, D, True, stop_at_first=False)}
    starts = [{"start_index": k, "start_time": sc.horizon.t_start + off, "feasible": k not in failing}
              for k, off in enumerate(ts.start_offsets())]
    _emit({"ctr_d": res.value, "delay_hours": D, "all_starts": args.all_starts,
           "err": args.err, "lower": res.lower, "steps": res.steps,
           "topologies": ts.l, "starts": starts,
           "binding": res.witness.as_dict() if res.witness else None})
    return EXIT_OK


def cmd_timeline(args):
    sc = load_scenario(args.scenario)
    tl = build_link_timeline(sc, args.tr)
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        if args.out == "csv":
            timeline_to_csv(tl, fh)
        else:
            dump_timeline_json(tl, fh)
            fh.write("\n")
    finally:
        if args.output:
            fh.close()
    if args.plot:
        from .plotting import plot_link_timeline

        plot_link_timeline(tl, args.plot, sc.labels)
        log.info("wrote %s (%d intervals)", args.plot, len(intervals(tl)))
    return EXIT_OK


def cmd_gen(args):
    area = Area(*args.area)
    sc = generate_random_scenario(args.n, args.orbit_radius, args.omega, area, args.seed)
    text = serialize_scenario(sc)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_experiment(args):
    plan = load_plan(args.plan)
    res = run_experiment(plan, jobs=args.jobs)
    with open(args.out, "w", newline="") as fh:
        fh.write(summary_csv(res))
    if args.trials_out:
        with open(args.trials_out, "w", newline="") as fh:
            fh.write(trials_csv(res))
    if args.json:
        _emit(result_to_json(res), args.json)
    if args.figure:
        from .plotting import plot_experiment

        plot_experiment(res, args.figure)
    log.info("wrote %s (%d rows)", args.out, len(res.rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aeronet-ctr",
                                description="Transmission-range analysis for airborne backbone networks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", help="is the network connected at all times for range TR")
    s.add_argument("--scenario", required=True)
    s.add_argument("--tr", type=_nonneg, required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("ctr", help="critical transmission range")
    s.add_argument("--scenario", required=True)
    s.add_argument("--err", type=_positive, default=0.01)
    s.set_defaults(func=cmd_ctr)

    s = sub.add_parser("ctrf", help="critical range under single region faults")
    s.add_argument("--scenario", required=True)
    s.add_argument("--region-radius", type=_positive, required=True)
    s.add_argument("--err", type=_positive, default=0.01)
    s.add_argument("--method", choices=("fast", "maxflow"), default="fast")
    s.set_defaults(func=cmd_ctrf)

    s = sub.add_parser("ctrd", help="critical range under a delay bound")
    s.add_argument("--scenario", required=True)
    s.add_argument("--delay", type=_nonneg, required=True)
    s.add_argument("--delay-unit", choices=("hour", "period"), default="hour")
    s.add_argument("--all-starts", action="store_true",
                   help="require the bound for messages released in every topology")
    s.add_argument("--err", type=_positive, default=0.01)
    s.set_defaults(func=cmd_ctrd)

    s = sub.add_parser("timeline", help="export link up/down events")
    s.add_argument("--scenario", required=True)
    s.add_argument("--tr", type=_nonneg, required=True)
    s.add_argument("--out", choices=("csv", "json"), default="csv")
    s.add_argument("--output", "-o", help="file to write instead of stdout")
    s.add_argument("--plot", help="also render a link activity chart to this image file")
    s.set_defaults(func=cmd_timeline)

    s = sub.add_parser("gen", help="random non-overlapping circular fleet")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--orbit-radius", type=_positive, default=10.0)
    s.add_argument("--omega", type=parse_rate, default=AngularVelocity(Fraction(20)))
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--area", type=_positive, nargs=2, default=(1000.0, 1000.0),
                   metavar=("W", "H"))
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("experiment", help="run a seeded parameter sweep")
    s.add_argument("--plan", required=True)
    s.add_argument("--out", required=True, help="summary CSV")
    s.add_argument("--trials-out", help="per-trial CSV")
    s.add_argument("--json", help="full result as JSON")
    s.add_argument("--figure", help="render the trend plot to this image file")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, DomainError, UnsupportedError, PackingError, ValueError, OSError) as exc:
        print(f"aeronet-ctr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
