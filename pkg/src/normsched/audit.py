"""Verification harness for the constructions' proof obligations.

Every inequality the hardness arguments lean on is evaluated exactly
(integer exponents) or as a certified enclosure comparison with
automatic precision escalation (fractional exponents). Pass/fail always
gates on the recomputed threshold; printed-formula discrepancies are
reported as structured errata notes, never as failures of the
mathematics itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .exactnum import (
    DEFAULT_PRECISION,
    RealEnclosure,
    Verdict,
    certified_relation,
    format_rational,
    parse_rational,
    pow_int,
    pow_rat,
    rv_pow,
    sci_str,
)
from .model import (
    Instance,
    Partition,
    ThreePartitionInstance,
    find_partition,
    is_partition_valid,
    tight_bounds,
)
from .objectives import knorm
from .reduction import (
    ErrataNote,
    NotPartitionLike,
    ReductionFormulas,
    ReductionParams,
    Variant,
    build_instance,
    build_partition_schedule,
    extract_partition,
    normalize_3partition,
    params_to_json,
    reduction_params,
    threshold_f,
    tighten_for_stretch,
)
from .solvers import brute_force_optimal


class DomainViolation(ValueError):
    """A sample violates the bound's domain requirement."""


@dataclass(frozen=True)
class CheckRecord:
    name: str
    claim: str
    left: str
    right: str
    relation: str
    verdict: str
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS.value

    def to_json(self) -> dict:
        return {
            "name": self.name, "claim": self.claim, "left": self.left,
            "right": self.right, "relation": self.relation,
            "verdict": self.verdict, "notes": list(self.notes),
        }


@dataclass
class AuditReport:
    variant: str
    params: dict
    checks: list[CheckRecord] = field(default_factory=list)
    errata: list[ErrataNote] = field(default_factory=list)

    @property
    def failures(self) -> list[CheckRecord]:
        return [c for c in self.checks if c.verdict == Verdict.FAIL.value]

    @property
    def inconclusive(self) -> list[CheckRecord]:
        return [c for c in self.checks if c.verdict == Verdict.INCONCLUSIVE.value]

    @property
    def passed(self) -> bool:
        return not self.failures

    def extend(self, other: "AuditReport") -> None:
        self.checks.extend(other.checks)
        for note in other.errata:
            if note not in self.errata:
                self.errata.append(note)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "params": self.params,
            "checks": [c.to_json() for c in self.checks],
            "errata": [e.to_json() for e in self.errata],
            "passed": self.passed,
        }

    def summary_text(self) -> str:
        lines = [f"audit {self.variant}: {len(self.checks)} checks, "
                 f"{len(self.failures)} failed, {len(self.inconclusive)} inconclusive"]
        for c in self.checks:
            lines.append(f"  [{c.verdict:<12}] {c.name}: {c.claim}")
        for e in self.errata:
            lines.append(f"  [errata      ] {e.kind}: {e.detail}")
        return "\n".join(lines)


def _fmt(value) -> str:
    if isinstance(value, RealEnclosure):
        return f"[{_short(value.lower)}, {_short(value.upper)}]"
    if abs(value) > 10 ** 40:
        return sci_str(value)
    return format_rational(value)


def _short(q: Fraction) -> str:
    if q != 0 and (abs(q) >= 10 ** 18 or abs(q) < Fraction(1, 10 ** 6)):
        return sci_str(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{float(q):.12g}"


def _check(name, claim, lhs, rhs, relation, precision, notes=()) -> CheckRecord:
    verdict, lv, rv = certified_relation(lhs, rhs, relation,
                                         start_precision=precision)
    return CheckRecord(name, claim, _fmt(lv), _fmt(rv), relation,
                       verdict.value, tuple(notes))


def _prepare(tp: ThreePartitionInstance, variant: Variant) -> ThreePartitionInstance:
    """Normalize to the tight element range, tightening further for stretch."""
    tp = normalize_3partition(tp)
    if variant.is_stretch:
        tp = tighten_for_stretch(tp, variant)
    return tp


def check_parameter_dominance(tp: ThreePartitionInstance, params: ReductionParams,
                              precision: int = DEFAULT_PRECISION) -> AuditReport:
    """The inequalities that make the reverse direction work: blackout
    and backlog costs exceed the threshold, and the slack terms of the
    counting arguments exceed the threshold's allowance."""
    variant = params.variant
    report = AuditReport(variant.name, params_to_json(params))
    m, B, k = params.m, params.target, variant.k

    def F(p):
        return ReductionFormulas(tp, params, p)

    fam = variant.family
    if fam == "quad" and not variant.is_stretch:
        literal = 1 / (16 * m * m * params.rho)
        foreshadow = 1 / (4 * m * params.rho)
        f_now = ReductionFormulas(tp, params, precision).recomputed_total
        report.checks.append(_check(
            "stream_backlog_cost",
            "surcharge of 1/(4m rho) displaced stream jobs waiting 1/(4m) "
            "> f - f23",
            lambda p: F(p).backlog_surcharge(),
            lambda p: F(p).nonstream_total(),
            ">", precision,
            notes=(f"printed 1/(16 m^2 rho) = {_fmt(literal)} vs whole "
                   f"threshold {_fmt(f_now)}: "
                   f"{'holds' if literal > f_now else 'fails'}",
                   f"foreshadowed 1/(4 m rho) = {_fmt(foreshadow)}")))
        report.errata.append(ErrataNote(
            "blackout-cost-constant",
            "the overview promises 1/(4 m rho) > f while the backlog argument "
            "derives 1/(16 m^2 rho); the audit gates on the displaced jobs' "
            "net surcharge against f - f23, which both constants restate"))
    else:
        report.checks.append(_check(
            "type1_blackout_cost",
            "surcharge of 1/(2m rho) stream jobs displaced by element work "
            "waiting 1/(2m) > f - f23",
            lambda p: F(p).blackout_surcharge(),
            lambda p: F(p).nonstream_total(),
            ">", precision))
        report.checks.append(_check(
            "stream_backlog_cost",
            "surcharge of 1/(4 rho) unserved stream jobs waiting 1/4 "
            "> f - f23",
            lambda p: F(p).backlog_surcharge(),
            lambda p: F(p).nonstream_total(),
            ">", precision))
        report.errata.append(ErrataNote(
            "blackout-cost-constant",
            "printed backlog cost constants drift across variants and are "
            "compared against the whole threshold although the displaced "
            "jobs' baseline is itself part of f23 (for exponents below one "
            "f23 dominates f and the printed comparison cannot hold); the "
            "audit gates on the net surcharge against f - f23"))

    if fam in ("quad", "intk"):
        fudge_claim = "> f - f23 - time-zero backlog - per-interval lower bounds"
        printed_fo_note = tuple(
            f"printed {name} = {_fmt(val)}"
            for name, val in F(precision).printed_components.items()
            if name.startswith("fo")
        )
        for j in range(1, m):
            report.checks.append(_check(
                f"slack_too_few_completed({j})",
                f"slack when fewer than 3*{j} element jobs finish by the end of "
                f"reserved interval {j} {fudge_claim}",
                lambda p, j=j: F(p).slack_too_few(j),
                lambda p: F(p).fudge,
                ">", precision, notes=printed_fo_note))
            report.checks.append(_check(
                f"slack_too_much_volume({j})",
                f"slack when more than B(m-{j}) element volume survives reserved "
                f"interval {j} {fudge_claim}",
                lambda p, j=j: F(p).slack_too_much(j),
                lambda p: F(p).fudge,
                ">", precision, notes=printed_fo_note))

    smallest_bounds = [("tight-range floor", tight_bounds(m, B)[0])]
    if variant.is_stretch:
        smallest_bounds.append(("band floor", params.delta_s))
    for i in range(1, m):
        for label, small in smallest_bounds:
            completable = math.floor((i * B + Fraction(1, 2)) / small)
            report.checks.append(CheckRecord(
                f"completed_count_bound({i},{label.split()[0]})",
                f"floor((iB + 1/2) / smallest element) <= 3i with the {label}",
                str(completable), str(3 * i), "<=",
                (Verdict.PASS if completable <= 3 * i else Verdict.FAIL).value))

    if fam == "intk":
        ki = int(k)
        b_max = max(tp.elements)
        report.checks.append(_check(
            "alpha_below_lambda_beta", "alpha < lambda*beta",
            params.alpha, params.lam * params.beta, "<", precision))
        report.checks.append(_check(
            "element_weight_below_lambda", "beta*b < lambda*beta for every element",
            params.beta * b_max, params.lam * params.beta, "<", precision))
        report.checks.append(_check(
            "target_below_beta", "B < beta", B, params.beta, "<", precision))
        binom_sum = sum(math.comb(ki, x) for x in range(2, ki + 1))
        report.checks.append(CheckRecord(
            "binomial_sum_bound", "sum_{x=2..k} C(k,x) < 2^k",
            str(binom_sum), str(2 ** ki), "<",
            (Verdict.PASS if binom_sum < 2 ** ki else Verdict.FAIL).value))
        lhs = (params.beta * b_max) ** 2 * params.alpha
        rhs = (params.lam * params.beta) ** 2
        printed_lhs = params.beta ** 2 * B ** 2 * params.alpha
        report.checks.append(_check(
            "tail_scale_bound", "(beta*b_max)^2 * alpha < (lambda*beta)^2",
            lhs, rhs, "<", precision,
            notes=(f"printed literal uses B in place of the largest element and "
                   f"is an exact equality under lambda = B*sqrt(alpha): "
                   f"{_fmt(printed_lhs)} vs {_fmt(rhs)}",)))
        report.errata.append(ErrataNote(
            "tail-side-condition-equality",
            "the bracketed side condition beta^2 B^2 alpha < (lambda beta)^2 "
            "holds with equality under the exact parameter choice; the step "
            "it supports only needs it for elements, which are below B"))

    if fam == "frac":
        bk2 = lambda p: rv_pow(params.beta, k / 2, p)
        report.checks.append(_check(
            "fact9_applicability",
            "2*(beta^(k/2) + alpha) <= beta - beta^(k/2)",
            lambda p: 2 * (bk2(p) + params.alpha),
            lambda p: params.beta - bk2(p),
            "<=", precision))
        report.checks.append(_check(
            "lambda_release_bound", "lambda*B < beta (all element jobs arrive "
            "before time zero)",
            params.lam * B, params.beta, "<", precision))
        report.checks.append(_check(
            "open_window_taylor_domain", "2B <= beta",
            2 * B, params.beta, "<=", precision))

    return report


def default_taylor_grid() -> list[tuple[Fraction, Fraction, Fraction]]:
    """(x, y, k) samples with 2x < y; 216 of them."""
    grid = []
    for k in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        for x in range(1, 9):
            for j in range(1, 10):
                y = 2 * x + j
                grid.append((Fraction(x), Fraction(y), k))
    return grid


def check_taylor_bounds(samples: Optional[Sequence[tuple]] = None,
                        precision: int = DEFAULT_PRECISION) -> AuditReport:
    """First-order upper and second-order lower expansion bounds for
    (x+y)^k, certified per sample on the domain 2x < y."""
    report = AuditReport("taylor", {})
    for x, y, k in (default_taylor_grid() if samples is None else samples):
        x, y, k = Fraction(x), Fraction(y), Fraction(k)
        if not (0 < k < 1):
            raise DomainViolation(f"exponent {k} outside (0,1)")
        if not 2 * x < y:
            raise DomainViolation(f"sample x={x}, y={y} violates 2x < y")
        tag = f"x={x},y={y},k={k}"
        if x == 0:
            report.checks.append(CheckRecord(
                f"taylor_upper_bound({tag})", "(x+y)^k <= y^k + k*x/y^(1-k)",
                "equal", "equal", "<=", Verdict.PASS.value,
                ("x = 0 collapses both sides",)))
            report.checks.append(CheckRecord(
                f"taylor_lower_bound({tag})",
                "(x+y)^k >= y^k + k*x/y^(1-k) - k(1-k)x^2/(2y^(2-k))",
                "equal", "equal", ">=", Verdict.PASS.value,
                ("x = 0 collapses both sides",)))
            continue
        lhs = lambda p, x=x, y=y, k=k: rv_pow(x + y, k, p)
        first = lambda p, x=x, y=y, k=k: rv_pow(y, k, p) + k * x / rv_pow(y, 1 - k, p)
        second = lambda p, x=x, y=y, k=k: (
            rv_pow(y, k, p) + k * x / rv_pow(y, 1 - k, p)
            - k * (1 - k) * x * x / (2 * rv_pow(y, 2 - k, p)))
        report.checks.append(_check(
            f"taylor_upper_bound({tag})", "(x+y)^k <= y^k + k*x/y^(1-k)",
            lhs, first, "<=", precision))
        report.checks.append(_check(
            f"taylor_lower_bound({tag})",
            "(x+y)^k >= y^k + k*x/y^(1-k) - k(1-k)x^2/(2y^(2-k))",
            lhs, second, ">=", precision))
    return report


def check_closed_interval_lower_bounds(tp: ThreePartitionInstance,
                                       params: ReductionParams, i: int,
                                       hypothesis: str,
                                       precision: int = DEFAULT_PRECISION) -> CheckRecord:
    """The per-interval contradiction chains: instantiating the counting
    hypothesis at its boundary recovers the per-interval lower bound plus
    the claimed slack."""
    if not 1 <= i <= params.m - 1:
        raise ValueError(f"interval index {i} outside 1..{params.m - 1}")
    if params.variant.is_fractional:
        # the fractional chain is affine in both aggregates, so the chain
        # equals the lower bound plus the slack identically; an enclosure
        # comparison of equal quantities can never certify
        raise ValueError("the fractional chains are affine identities in the "
                         "aggregates; there is no inequality to certify")
    if hypothesis == "TooFewCompleted":
        chain = lambda p: ReductionFormulas(tp, params, p).chain_too_few(i)
        slack = lambda p: ReductionFormulas(tp, params, p).slack_too_few(i)
        claim = (f"bound with |U_{i}| = 3(m-{i})+1 >= per-interval bound + "
                 "too-few slack")
    elif hypothesis == "TooMuchVolume":
        chain = lambda p: ReductionFormulas(tp, params, p).chain_too_much(i)
        slack = lambda p: ReductionFormulas(tp, params, p).slack_too_much(i)
        claim = (f"bound with unfinished volume B(m-{i})+1 >= per-interval "
                 "bound + too-much slack")
    else:
        raise ValueError(f"unknown hypothesis {hypothesis!r}")
    rhs = lambda p: ReductionFormulas(tp, params, p).f1_lower[i] + slack(p)
    return _check(f"closed_interval_chain({i},{hypothesis})", claim,
                  chain, rhs, ">=", precision)


def check_forward_cost(tp: ThreePartitionInstance, partition: Partition,
                       params: ReductionParams,
                       precision: int = DEFAULT_PRECISION) -> CheckRecord:
    """Canonical partition schedule costs at most the recomputed
    threshold; printed readings are evaluated into the notes."""
    inst = build_instance(tp, params)
    sched = build_partition_schedule(tp, partition, params)
    kind = params.variant.objective
    cost = lambda p: knorm(inst, sched, kind, p).rval
    notes = []
    formulas = ReductionFormulas(tp, params, precision)
    for name, printed in formulas.printed_totals.items():
        verdict, cv, pv = certified_relation(cost, printed, "<=",
                                             start_precision=precision)
        notes.append(f"vs {name} = {_fmt(pv)}: {verdict.value}")
    return _check(
        "forward_cost_within_threshold",
        "cost of the canonical partition schedule <= recomputed f",
        cost,
        lambda p: ReductionFormulas(tp, params, p).recomputed_total,
        "<=", precision, notes=notes)


def check_binomial_tail(tp: ThreePartitionInstance, params: ReductionParams,
                        i: int, precision: int = DEFAULT_PRECISION) -> CheckRecord:
    """Integer-exponent tail: the binomial terms of order two and higher
    stay below the threshold's per-interval tail allowance."""
    variant = params.variant
    if variant.family != "intk":
        raise ValueError("binomial tail applies to integer exponents k >= 3 only")
    ki = int(variant.k)
    m = params.m
    if not 1 <= i <= m - 1:
        raise ValueError(f"interval index {i} outside 1..{m - 1}")
    b_cap = params.delta_b if variant.is_stretch else params.target
    s_i = params.interval_start(i)
    base = s_i + params.lam * params.beta
    tail = Fraction(0)
    for x in range(2, ki + 1):
        w = pow_int(base + params.alpha, ki - x) - pow_int(base, ki - x)
        tail += math.comb(ki, x) * pow_int(params.beta * b_cap, x) * w
    allowance = m * pow_int(Fraction(2), 2 * ki) * pow_int(base, ki - 1)
    return _check(
        f"binomial_tail({i})",
        "sum_{x=2..k} C(k,x)(beta*b)^x ((s_i+lambda*beta+alpha)^(k-x) - "
        "(s_i+lambda*beta)^(k-x)) <= m 2^(2k) (s_i+lambda*beta)^(k-1) at the "
        f"largest admissible element ({_short(b_cap)})",
        tail, allowance, "<=", precision)


def roundtrip(tp: ThreePartitionInstance, partition: Partition,
              params: ReductionParams, use_oracle: bool = False,
              oracle_bound: int = 8,
              precision: int = DEFAULT_PRECISION) -> AuditReport:
    """Forward cost check plus partition recovery; optionally drives the
    brute-force oracle over a materializable toy instance and demands
    that a within-threshold optimum encodes a partition."""
    report = AuditReport(params.variant.name, params_to_json(params))
    report.checks.append(check_forward_cost(tp, partition, params, precision))
    inst = build_instance(tp, params)
    sched = build_partition_schedule(tp, partition, params)
    got = extract_partition(inst, params, sched)
    ok = isinstance(got, Partition) and got.canonical() == partition.canonical()
    report.checks.append(CheckRecord(
        "round_trip_identity",
        "extracting the canonical schedule recovers the partition",
        str(getattr(got, "groups", got)), str(partition.canonical().groups),
        "==", (Verdict.PASS if ok else Verdict.FAIL).value))
    if not use_oracle:
        return report

    kind = params.variant.objective
    result = brute_force_optimal(inst, kind, bound=oracle_bound,
                                 precision_bits=precision)
    verdict, cost_v, f_v = certified_relation(
        result.value.rval,
        lambda p: ReductionFormulas(tp, params, p).recomputed_total,
        "<=", start_precision=precision)
    if verdict is Verdict.PASS:
        extracted = extract_partition(inst, params, result.schedule)
        good = isinstance(extracted, Partition) and is_partition_valid(tp, extracted)
        report.checks.append(CheckRecord(
            "oracle_optimum_encodes_partition",
            "a brute-force optimum costing at most f yields a valid partition",
            _fmt(cost_v), _fmt(f_v), "<=",
            (Verdict.PASS if good else Verdict.FAIL).value,
            (f"extracted: {extracted}",)))
    else:
        report.checks.append(CheckRecord(
            "oracle_optimum_encodes_partition",
            "a brute-force optimum costing at most f yields a valid partition",
            _fmt(cost_v), _fmt(f_v), "<=", Verdict.PASS.value,
            ("vacuous: the oracle optimum costs more than the threshold",)))
    return report


def run_audit(tp: ThreePartitionInstance, variant: Variant,
              overrides: Optional[dict] = None,
              include_taylor: bool = False,
              precision: int = DEFAULT_PRECISION) -> AuditReport:
    """Full per-instance audit: dominance, chains, tails, threshold
    errata, and (when a partition exists and is findable) the forward
    and round-trip checks."""
    prepared = _prepare(tp, variant)
    params = reduction_params(prepared, variant, overrides)
    report = check_parameter_dominance(prepared, params, precision)

    if not variant.is_fractional:
        for i in range(1, params.m):
            for hypothesis in ("TooFewCompleted", "TooMuchVolume"):
                report.checks.append(check_closed_interval_lower_bounds(
                    prepared, params, i, hypothesis, precision))
    if variant.family == "intk":
        for i in range(1, params.m):
            report.checks.append(check_binomial_tail(prepared, params, i, precision))
    if variant.is_fractional and include_taylor:
        report.extend(check_taylor_bounds(precision=precision))

    partition = find_partition(prepared) if prepared.m <= 4 else None
    if partition is not None:
        report.extend(roundtrip(prepared, partition, params, use_oracle=False,
                                precision=precision))
    th = threshold_f(prepared, params, partition, precision)
    for note in th.errata:
        if note not in report.errata:
            report.errata.append(note)
    return report
