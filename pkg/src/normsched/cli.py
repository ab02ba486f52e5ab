"""Command-line surface: generation, reduction, solving, evaluation,
extraction, auditing.

All numeric flags accept rational text ("3", "-7/2"); nothing is parsed
as floating point. Identical invocations produce byte-identical outputs
(seeded generation, sorted JSON keys, no timestamps). Exit codes:
0 success / all checks pass, 1 check failure, 2 usage, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction

from .audit import check_taylor_bounds, roundtrip, run_audit
from .exactnum import (
    NormExponent,
    PrecisionExhausted,
    parse_rational,
)
from .model import (
    Partition,
    TooManyJobs,
    find_partition,
    generate_no,
    generate_yes,
    instance_from_json,
    instance_to_json,
    load_json,
    partition_to_json,
    three_partition_from_json,
    three_partition_to_json,
)
from .objectives import FLOW, STRETCH, ObjectiveKind, knorm
from .reduction import (
    NonRepresentable,
    NotPartitionLike,
    NotTightenable,
    Variant,
    build_instance,
    extract_partition,
    normalize_3partition,
    params_from_json,
    params_to_json,
    reduction_params,
    threshold_f,
    tighten_for_stretch,
)
from .scheduling import schedule_from_json, schedule_to_json, validate_schedule
from .solvers import TooLarge, brute_force_optimal, minimize_max, srpt

VARIANT_CHOICES = ("flow2", "flow-k", "flow-frac", "stretch2", "stretch-k", "stretch-frac")


def _write_json(path: str, data: dict) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _variant_from(args) -> Variant:
    return Variant.make(args.variant, args.k)


def _toy_overrides(pairs) -> dict:
    overrides = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ValueError(f"--toy expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = parse_rational(value)
    return overrides


def _prepare_input(tp, variant):
    prepared = normalize_3partition(tp)
    if prepared is not tp:
        print(f"normalized: target {tp.target} -> {prepared.target}")
    if variant.is_stretch:
        tightened = tighten_for_stretch(prepared, variant)
        if tightened is not prepared:
            print("tightened elements into the stretch band around B/3")
        prepared = tightened
    return prepared


def cmd_gen3p(args) -> int:
    if args.B.denominator != 1:
        raise ValueError("--B must be an integer")
    target = int(args.B)
    if args.no:
        tp = generate_no(args.m, target, args.seed)
        tp = normalize_3partition(tp)
    else:
        tp, _hidden = generate_yes(args.m, target, args.seed)
    if args.tighten:
        variant = Variant.make(args.tighten, args.k)
        if not variant.is_stretch:
            raise ValueError("--tighten takes a stretch variant")
        tp = tighten_for_stretch(tp, variant)
    _write_json(args.out, three_partition_to_json(tp))
    kind = "NO" if args.no else "YES"
    print(f"wrote {kind} instance m={tp.m} B={tp.target} to {args.out}")
    return 0


def cmd_reduce(args) -> int:
    variant = _variant_from(args)
    tp = three_partition_from_json(load_json(args.infile))
    overrides = _toy_overrides(args.toy)
    if not overrides:
        tp = _prepare_input(tp, variant)
    params = reduction_params(tp, variant, overrides or None)
    inst = build_instance(tp, params)
    partition = find_partition(tp) if tp.m <= 4 else None
    threshold = threshold_f(tp, params, partition)
    _write_json(f"{args.out_prefix}.instance.json", instance_to_json(inst))
    _write_json(f"{args.out_prefix}.params.json", params_to_json(params))
    _write_json(f"{args.out_prefix}.threshold.json", threshold.to_json())
    if params.toy:
        print("toy parameters: soundness not guaranteed; audit will name "
              "any failed inequalities")
    print(f"wrote {args.out_prefix}.instance.json, .params.json, .threshold.json")
    return 0


def _objective_kind(args) -> ObjectiveKind:
    return ObjectiveKind(args.objective, NormExponent.parse(args.k_norm))


def cmd_solve(args) -> int:
    inst = instance_from_json(load_json(args.infile))
    kind = _objective_kind(args)
    if args.algo == "srpt":
        result = srpt(inst)
        value = knorm(inst, result.schedule, kind)
        optimal = kind.measure == FLOW and kind.exponent == NormExponent.integer(1)
    elif args.algo == "minmax":
        if not kind.exponent.is_infinite:
            raise ValueError("--algo minmax solves the infinity norm; pass --k inf")
        result = minimize_max(inst, kind.measure)
        value, optimal = result.value, True
    else:
        result = brute_force_optimal(inst, kind, bound=args.bound)
        value, optimal = result.value, True
    if args.out:
        _write_json(args.out, schedule_to_json(result.schedule))
    print(json.dumps({"algorithm": args.algo, "objective": str(kind),
                      "optimal": optimal, "value": value.to_json()},
                     sort_keys=True))
    return 0


def cmd_eval(args) -> int:
    inst = instance_from_json(load_json(args.infile))
    sched = schedule_from_json(load_json(args.schedule))
    bad = validate_schedule(inst, sched)
    if bad:
        for violation in bad:
            print(f"violation: {violation}", file=sys.stderr)
        return 1
    kind = _objective_kind(args)
    print(json.dumps({"objective": str(kind),
                      "value": knorm(inst, sched, kind).to_json()}, sort_keys=True))
    return 0


def cmd_extract(args) -> int:
    inst = instance_from_json(load_json(args.infile))
    params = params_from_json(load_json(args.params))
    sched = schedule_from_json(load_json(args.schedule))
    got = extract_partition(inst, params, sched)
    if isinstance(got, NotPartitionLike):
        print(json.dumps({"not_partition_like": {
            "window": got.window, "count": got.count, "detail": got.detail}},
            sort_keys=True))
        return 1
    blob = partition_to_json(got)
    if args.out:
        _write_json(args.out, blob)
    print(json.dumps(blob, sort_keys=True))
    return 0


def cmd_audit(args) -> int:
    overrides = _toy_overrides(args.toy)
    if args.grid == "taylor":
        report = check_taylor_bounds()
    else:
        variant = _variant_from(args)
        tp = three_partition_from_json(load_json(args.infile))
        report = run_audit(tp, variant, overrides or None,
                           include_taylor=(args.grid == "both"))
    if args.out:
        _write_json(args.out, report.to_json())
    print(report.summary_text())
    return 0 if report.passed else 1


def cmd_roundtrip(args) -> int:
    variant = _variant_from(args)
    tp = three_partition_from_json(load_json(args.infile))
    overrides = _toy_overrides(args.toy)
    if not overrides:
        tp = _prepare_input(tp, variant)
    params = reduction_params(tp, variant, overrides or None)
    partition = find_partition(tp)
    if partition is None:
        print("no valid partition exists; nothing to round-trip", file=sys.stderr)
        return 1
    report = roundtrip(tp, partition, params, use_oracle=args.oracle,
                       oracle_bound=args.bound)
    if args.out:
        _write_json(args.out, report.to_json())
    print(report.summary_text())
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normsched",
        description="Exact toolkit for preemptive single-machine scheduling "
                    "under k-norms of flow time and stretch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen3p", help="generate a triple-partition instance")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--B", type=parse_rational, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--yes", action="store_true", default=True)
    group.add_argument("--no", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tighten", choices=("stretch2", "stretch-k", "stretch-frac"))
    p.add_argument("--k", default=None,
                   help="exponent for --tighten stretch-k / stretch-frac")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_gen3p)

    p = sub.add_parser("reduce", help="build the scheduling instance, "
                                      "parameters, and threshold files")
    p.add_argument("--variant", choices=VARIANT_CHOICES, required=True)
    p.add_argument("--k", default=None)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--toy", action="append", metavar="KEY=VALUE",
                   help="override a parameter (repeatable); marks the run toy")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="run a solver on an instance file")
    p.add_argument("--algo", choices=("srpt", "minmax", "brute"), required=True)
    p.add_argument("--objective", choices=(FLOW, STRETCH), default=FLOW)
    p.add_argument("--k", dest="k_norm", default="1",
                   help="norm exponent: integer, fraction in (0,1), or inf")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", help="write the schedule here")
    p.add_argument("--bound", type=int, default=8,
                   help="brute-force job bound")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="evaluate an objective on a schedule file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--objective", choices=(FLOW, STRETCH), default=FLOW)
    p.add_argument("--k", dest="k_norm", default="1")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("extract", help="read a partition off a schedule")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("audit", help="verify the construction's inequalities")
    p.add_argument("--variant", choices=VARIANT_CHOICES)
    p.add_argument("--k", default=None)
    p.add_argument("--in", dest="infile")
    p.add_argument("--toy", action="append", metavar="KEY=VALUE")
    p.add_argument("--grid", choices=("construction", "taylor", "both"),
                   default="construction")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("roundtrip", help="forward cost, partition recovery, "
                                         "and optionally the brute-force oracle")
    p.add_argument("--variant", choices=VARIANT_CHOICES, required=True)
    p.add_argument("--k", default=None)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--toy", action="append", metavar="KEY=VALUE")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--bound", type=int, default=8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_roundtrip)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "audit" and args.grid != "taylor":
        if not (args.variant and args.infile):
            parser.error("audit needs --variant and --in (or --grid taylor)")
    try:
        return args.func(args)
    except (TooManyJobs, TooLarge) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (NonRepresentable, NotTightenable, PrecisionExhausted,
            ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
