"""Command-line entry point: run, replay and validate subcommands.

Exit codes: 0 success, 2 scenario/argument validation failure, 3 runtime
fault during simulation.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .harness import (MissionLoop, RuntimeFault, export_csv, extract_series,
                      read_log, verify_log)
from .scenario import ScenarioError, demo_mission, load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Deterministic digital-twin simulator for a "
                    "fin-and-jet underwater intervention robot.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    run = sub.add_parser("run", help="run a scenario to completion")
    run.add_argument("scenario",
                     help="scenario YAML path, or 'demo' for the built-in "
                          "reference mission")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario RNG seed")
    run.add_argument("--duration", type=float, default=None,
                     help="override the scenario duration [s]")
    run.add_argument("--log", type=Path, default=None,
                     help="write the mission log (JSONL) here")
    run.add_argument("--serve", metavar="HOST:PORT", default=None,
                     help="serve the operator gateway instead of running "
                          "headless")
    run.add_argument("--rate", type=float, default=1.0,
                     help="pacing factor for --serve (1.0 = real time)")

    replay = sub.add_parser("replay", help="query a recorded mission log")
    replay.add_argument("log", type=Path, help="mission log (JSONL)")
    replay.add_argument("--query", default="t,telemetry.vehicle.x,"
                                           "telemetry.vehicle.y",
                        help="comma-separated dotted fields to extract")
    replay.add_argument("--csv", type=Path, default=None,
                        help="write the extracted series to CSV")
    replay.add_argument("--verify", action="store_true",
                        help="recompute and check the log digest")

    validate = sub.add_parser("validate",
                              help="check a scenario file and report every "
                                   "violated field")
    validate.add_argument("scenario", help="scenario YAML path")
    return parser


def _load(name: str):
    if name == "demo":
        return demo_mission()
    return load_scenario(name)


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = _load(args.scenario)
    except FileNotFoundError:
        print(f"error: no such scenario file: {args.scenario}",
              file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioError as err:
        for item in err.errors:
            print(f"invalid: {item}", file=sys.stderr)
        return EXIT_VALIDATION

    loop = MissionLoop(scenario, seed=args.seed, log_path=args.log)
    if args.serve is not None:
        from .server import serve

        host, _, port = args.serve.rpartition(":")
        try:
            port_num = int(port)
        except ValueError:
            print(f"error: bad --serve address: {args.serve}",
                  file=sys.stderr)
            return EXIT_VALIDATION
        serve(loop, host=host or "127.0.0.1", port=port_num, rate=args.rate)
        return EXIT_OK

    try:
        summary = loop.run(duration=args.duration)
    except RuntimeFault as err:
        print(f"runtime fault: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"scenario   : {scenario.name} (seed {loop.seed})")
    print(f"sim time   : {summary.t_final:.2f} s in {summary.ticks} ticks")
    print(f"mode       : {summary.mode}")
    print(f"waypoints  : {summary.waypoints_completed} completed, "
          f"plan_done={summary.plan_done}")
    print(f"commands   : {summary.delivered_commands} delivered, "
          f"{summary.dropped_frames} telemetry frames dropped")
    print(f"faults     : {', '.join(summary.faults) if summary.faults else 'none'}")
    if summary.digest:
        print(f"log digest : {summary.digest}")
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    if not args.log.exists():
        print(f"error: no such log: {args.log}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.verify:
            digest = verify_log(args.log)
            print(f"digest ok  : {digest}")
        queries = [q.strip() for q in args.query.split(",") if q.strip()]
        if args.csv is not None:
            rows = export_csv(args.log, args.csv, queries)
            print(f"wrote {rows} rows x {len(queries)} columns to {args.csv}")
        else:
            _, frames, _ = read_log(args.log)
            series = [extract_series(frames, q) for q in queries]
            print("\t".join(queries))
            for row in zip(*series):
                print("\t".join(str(v) for v in row))
    except (KeyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        scenario = _load(args.scenario)
    except FileNotFoundError:
        print(f"error: no such scenario file: {args.scenario}",
              file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioError as err:
        for item in err.errors:
            print(f"invalid: {item}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"ok: scenario {scenario.name!r} is valid "
          f"({scenario.duration:.0f} s at dt={scenario.dt})")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "replay": _cmd_replay,
               "validate": _cmd_validate}[args.subcommand]
    try:
        return handler(args)
    except BrokenPipeError:
        # The reader closed the pipe (e.g. `sim replay … | head`); point
        # stdout at devnull so the interpreter's exit-time flush stays quiet.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
