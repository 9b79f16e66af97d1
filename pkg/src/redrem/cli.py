"""Command-line front end: reduce / verify / stats / gen."""

from __future__ import annotations

import argparse
import sys

from .bench_io import parse_bench, write_bench, BenchError
from .netlist import NetlistError
from .oracle import equivalent, random_circuit, OracleError
from .remover import RemovalConfig, ConfigError, remove_redundancy


def _build_parser():
    p = argparse.ArgumentParser(prog="redrem",
                                description="redundancy removal for .bench netlists")
    sub = p.add_subparsers(dest="command", required=True)

    def add_mode_args(sp):
        sp.add_argument("--mode", choices=("presented", "fire"),
                        default="presented")
        sp.add_argument("--no-improvement", type=int, choices=(1, 2, 3, 4),
                        action="append", default=[], metavar="N",
                        help="disable one numbered improvement (presented mode)")
        sp.add_argument("--passes", type=int, default=1)
        sp.add_argument("--verify-with-oracle", action="store_true",
                        help="confirm every removal with the exhaustive fault oracle")
        sp.add_argument("--oracle-bound", type=int, default=16)

    sp = sub.add_parser("reduce", help="remove redundancy from a netlist")
    add_mode_args(sp)
    sp.add_argument("input")
    sp.add_argument("-o", "--output", help="write the reduced .bench here")
    sp.add_argument("--report", choices=("text", "lines"), default="text")

    sp = sub.add_parser("verify", help="exhaustively compare two netlists")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--bound", type=int, default=16)

    sp = sub.add_parser("stats", help="run the remover, print counters only")
    add_mode_args(sp)
    sp.add_argument("input")

    sp = sub.add_parser("gen", help="emit a seeded random circuit")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--inputs", type=int, required=True)
    sp.add_argument("--gates", type=int, required=True)
    sp.add_argument("-o", "--output")
    return p


def _config_from_args(parser, args) -> RemovalConfig:
    if args.mode == "fire" and args.no_improvement:
        parser.error("--no-improvement applies to presented mode only "
                     "(fire already disables all improvements)")
    try:
        if args.mode == "fire":
            return RemovalConfig.fire_baseline(
                passes=args.passes, verify_with_oracle=args.verify_with_oracle,
                oracle_bound=args.oracle_bound)
        return RemovalConfig.presented(
            disabled=args.no_improvement, passes=args.passes,
            verify_with_oracle=args.verify_with_oracle,
            oracle_bound=args.oracle_bound)
    except ConfigError as e:
        parser.error(str(e))


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_bench(f.read())
    except OSError as e:
        raise BenchError(f"cannot read {path}: {e}")


def _cmd_reduce(parser, args) -> int:
    circuit = _load(args.input)
    config = _config_from_args(parser, args)
    _, report = remove_redundancy(circuit, config)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(write_bench(circuit, header="reduced by redrem"))
    if args.report == "lines":
        for line in report.machine_lines():
            print(line)
    else:
        print(report.text_summary(args.input))
        for kind, rec in report.events:
            if kind == "removed":
                print(f"  removed edge {rec.line} stuck-at-{rec.stuck} "
                      f"(base {rec.v_base}, run {rec.run})")
            elif kind == "const":
                print(f"  constant {rec[0]} = {rec[1]}")
            else:
                print(f"  merged {rec[1]} into {rec[0]} ({rec[2]})")
        for key, val in report.counters.items():
            print(f"  {key} = {val}")
        for note in report.notes:
            print(f"  note: {note}")
    return 0


def _cmd_verify(args) -> int:
    left = _load(args.left)
    right = _load(args.right)
    try:
        same, cex = equivalent(left, right, bound=args.bound)
    except OracleError as e:
        print(f"not equivalent: {e}", file=sys.stderr)
        return 1
    if same:
        print("equivalent")
        return 0
    assign = " ".join(f"{k}={v}" for k, v in cex.items())
    print(f"NOT equivalent; counterexample: {assign}", file=sys.stderr)
    return 1


def _cmd_stats(parser, args) -> int:
    circuit = _load(args.input)
    config = _config_from_args(parser, args)
    _, report = remove_redundancy(circuit, config)
    for key, val in report.counters.items():
        print(f"counter {key}={val}")
    return 0


def _cmd_gen(args) -> int:
    circuit = random_circuit(args.seed, args.inputs, args.gates)
    text = write_bench(circuit, header=f"seed={args.seed}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reduce":
            return _cmd_reduce(parser, args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "stats":
            return _cmd_stats(parser, args)
        return _cmd_gen(args)
    except (BenchError, NetlistError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OracleError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
