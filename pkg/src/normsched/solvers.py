"""Optimal algorithms for the tractable objectives plus a brute-force oracle.

SRPT solves the 1-norm of flow. EDF plus binary search over a finite
breakpoint set solves the infinity norm of flow and of stretch exactly:
the optimum is attained where some completion meets its deadline, which
pins it to a value of the form r_a + sum(p over a busy set) - r_b
(divided by p_b for stretch), so bisection runs over candidates and
never needs numeric tolerance.

The brute-force oracle enumerates priority orders. By the dominance
property of priority schedules (see scheduling module) some order is
optimal, so the enumeration is exhaustive. Prefix costs are exact and
only grow, which gives admissible pruning.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .exactnum import (
    DEFAULT_PRECISION,
    NormExponent,
    RealEnclosure,
    Verdict,
    as_enclosure,
    certified_relation,
    pow_rat,
)
from .model import Instance, Job, materialize_instance
from .objectives import FLOW, STRETCH, ObjectiveKind, ObjectiveValue, knorm
from .scheduling import (
    MATERIALIZED,
    Schedule,
    Slice,
    build_priority_schedule,
    completion_times,
    simulate_keyed,
)


class TooLarge(RuntimeError):
    """Instance exceeds the solver's enumeration bound."""


@dataclass(frozen=True)
class SolveResult:
    schedule: Schedule
    value: ObjectiveValue
    optimal: bool
    algorithm: str


@dataclass(frozen=True)
class Infeasible:
    """Witness of an over-demanded interval: jobs released at or after
    ``start`` with deadlines at most ``end`` carry more work than the
    interval holds."""

    start: Fraction
    end: Fraction
    demand: Fraction

    @property
    def capacity(self) -> Fraction:
        return self.end - self.start


def _materialized(inst: Instance, limit: int) -> tuple[Instance, dict[str, str]]:
    if not inst.streams:
        return inst, {}
    flat = materialize_instance(inst, limit)
    return flat, {s.id: MATERIALIZED for s in inst.streams}


def srpt(inst: Instance, limit: int = 100_000) -> SolveResult:
    """Shortest Remaining Processing Time; optimal for the 1-norm of flow."""
    flat, policy = _materialized(inst, limit)
    sched = simulate_keyed(flat, lambda jid, rem: (rem[jid], jid))
    sched = Schedule(sched.slices, policy)
    kind = ObjectiveKind(FLOW, NormExponent.integer(1))
    return SolveResult(sched, knorm(inst, sched, kind), True, "srpt")


def edf_feasible(inst: Instance, deadlines: Mapping[str, Fraction],
                 limit: int = 100_000) -> Union[Schedule, Infeasible]:
    """Preemptive Earliest Deadline First.

    Returns a schedule meeting every deadline if one exists (EDF is
    exact for feasibility), otherwise an Infeasible witness interval.
    """
    flat, policy = _materialized(inst, limit)
    missing = [j.id for j in flat.jobs if j.id not in deadlines]
    if missing:
        raise KeyError(f"no deadline for jobs {missing}")
    sched = simulate_keyed(flat, lambda jid, rem: (deadlines[jid], jid))
    cts = completion_times(flat, sched)
    missed = sorted(
        (deadlines[jid], jid) for jid, c in cts.items() if c > deadlines[jid]
    )
    if not missed:
        return Schedule(sched.slices, policy)
    d_star = missed[0][0]
    releases = {j.id: j.release for j in flat.jobs}
    start = d_star
    for sl in reversed(sched.slices):
        if sl.start >= start:
            continue
        if sl.end < start:
            break  # idle gap before the window
        if deadlines[sl.job] > d_star:
            break
        start = sl.start
    demand = sum(
        (j.proc for j in flat.jobs
         if releases[j.id] >= start and deadlines[j.id] <= d_star),
        Fraction(0),
    )
    assert demand > d_star - start, "EDF miss must come with an over-demanded interval"
    return Infeasible(start, d_star, demand)


MINMAX_JOB_CAP = 12


def _minmax_candidates(jobs: Sequence[Job], measure: str) -> list[Fraction]:
    values = set()
    index = range(len(jobs))
    for mask_size in range(1, len(jobs) + 1):
        for subset in itertools.combinations(index, mask_size):
            total = sum(jobs[i].proc for i in subset)
            for a in subset:
                for b in subset:
                    f = jobs[a].release + total - jobs[b].release
                    if measure == STRETCH:
                        f = f / jobs[b].proc
                    if f > 0:
                        values.add(f)
    return sorted(values)


def minimize_max(inst: Instance, measure: str = FLOW,
                 limit: int = 100_000) -> SolveResult:
    """Exact minimum of the maximum flow (or stretch) via EDF bisection.

    Deadlines are r_i + F for flow and r_i + F*p_i for stretch;
    feasibility is monotone in F, and the optimum lies in the finite
    breakpoint set enumerated from job subsets.
    """
    if measure not in (FLOW, STRETCH):
        raise ValueError(f"unknown measure {measure!r}")
    flat, policy = _materialized(inst, limit)
    kind = ObjectiveKind(measure, NormExponent.infinity())
    if not flat.jobs:
        sched = Schedule((), policy)
        return SolveResult(sched, ObjectiveValue(exact=Fraction(0)), True, "edf-binary-search")
    if len(flat.jobs) > MINMAX_JOB_CAP:
        raise TooLarge(
            f"exact breakpoint search enumerates subsets; {len(flat.jobs)} jobs "
            f"exceeds the cap of {MINMAX_JOB_CAP}")

    def deadlines(f):
        if measure == FLOW:
            return {j.id: j.release + f for j in flat.jobs}
        return {j.id: j.release + f * j.proc for j in flat.jobs}

    candidates = _minmax_candidates(flat.jobs, measure)
    lo, hi = 0, len(candidates) - 1
    assert not isinstance(edf_feasible(flat, deadlines(candidates[hi])), Infeasible), \
        "largest breakpoint must be feasible"
    while lo < hi:
        mid = (lo + hi) // 2
        if isinstance(edf_feasible(flat, deadlines(candidates[mid])), Infeasible):
            lo = mid + 1
        else:
            hi = mid
    best = candidates[lo]
    sched = edf_feasible(flat, deadlines(best))
    assert isinstance(sched, Schedule)
    sched = Schedule(sched.slices, policy)
    value = knorm(inst, sched, kind)
    assert value.exact <= best
    return SolveResult(sched, value, True, "edf-binary-search")


def _merge_busy(busy, placed):
    merged = []
    for seg in sorted(busy + tuple(placed)):
        if merged and merged[-1][1] >= seg[0]:
            if seg[1] > merged[-1][1]:
                merged[-1] = (merged[-1][0], seg[1])
        else:
            merged.append(list(seg))
    return tuple((s, e) for s, e in merged)


def _place(busy, release, proc):
    """Completion time and updated busy profile when a job fills the
    earliest machine gaps at or after its release.

    Priority schedules decompose this way: each job's slices are exactly
    the earliest gaps left by the higher-priority jobs, so one placement
    per DFS level replaces re-simulating the whole prefix.
    """
    t = release
    remaining = proc
    placed = []
    for s, e in busy:
        if e <= t:
            continue
        if s <= t:
            t = e
            continue
        run = min(remaining, s - t)
        placed.append((t, t + run))
        remaining -= run
        t += run
        if remaining == 0:
            break
        t = e
    if remaining > 0:
        placed.append((t, t + remaining))
        t += remaining
    return t, _merge_busy(busy, placed)


def brute_force_optimal(inst: Instance, kind: ObjectiveKind, bound: int = 8,
                        precision_bits: int = DEFAULT_PRECISION) -> SolveResult:
    """Exact minimum over all priority orders of explicit (and stream) jobs.

    Streams are materialized so the search ranges over genuinely all
    schedules. Permutations that only swap identical jobs are skipped;
    a prefix whose cost already reaches the incumbent is pruned (prefix
    completions are final under priority scheduling). Fractional
    exponents accumulate enclosures and break near-ties by certified
    comparison with precision escalation.
    """
    flat, policy = _materialized(inst, bound)
    jobs = sorted(flat.jobs, key=lambda j: j.id)
    n = len(jobs)
    if n > bound:
        raise TooLarge(f"{n} jobs exceeds brute-force bound {bound}")
    if n == 0:
        sched = Schedule((), policy)
        return SolveResult(sched, knorm(inst, sched, kind), True, "brute-force")
    by_id = {j.id: j for j in jobs}
    exponent = kind.exponent
    fractional = exponent.is_fractional

    def term(job, completion, precision):
        base = completion - job.release
        if kind.measure == STRETCH:
            base /= job.proc
        if exponent.is_infinite or exponent.value == 1:
            return base
        if fractional:
            return as_enclosure(pow_rat(base, exponent.value, precision), precision)
        return base ** int(exponent.value)

    def order_cost(order, precision):
        busy = ()
        total = Fraction(0)
        for jid in order:
            job = by_id[jid]
            completion, busy = _place(busy, job.release, job.proc)
            t = term(job, completion, precision)
            total = max(total, t) if exponent.is_infinite else total + t
        return total

    best_order: Optional[tuple[str, ...]] = None
    best_cost = None  # at precision_bits, same repr as the dfs accumulator

    def certainly_ge(cost, incumbent):
        lo = cost.lower if isinstance(cost, RealEnclosure) else cost
        hi = incumbent.upper if isinstance(incumbent, RealEnclosure) else incumbent
        return lo >= hi

    def better(candidate_order, candidate_cost):
        if best_order is None:
            return True
        if fractional:
            verdict, _, _ = certified_relation(
                lambda p: order_cost(candidate_order, p),
                lambda p: order_cost(best_order, p),
                "<", start_precision=precision_bits)
            # unknown after escalation: values coincide for every practical
            # purpose; keep the incumbent (lexicographically earlier)
            return verdict is Verdict.PASS
        return candidate_cost < best_cost

    def dfs(order, remaining, busy, cost):
        nonlocal best_order, best_cost
        if best_order is not None and certainly_ge(cost, best_cost):
            return
        if not remaining:
            if better(order, cost):
                best_order, best_cost = order, cost
            return
        seen = set()
        for jid in sorted(remaining):
            job = by_id[jid]
            key = (job.release, job.proc)
            if key in seen:
                continue  # identical job already tried at this position
            seen.add(key)
            completion, new_busy = _place(busy, job.release, job.proc)
            t = term(job, completion, precision_bits)
            new_cost = max(cost, t) if exponent.is_infinite else cost + t
            dfs(order + (jid,), remaining - {jid}, new_busy, new_cost)

    dfs((), frozenset(by_id), (), Fraction(0))
    assert best_order is not None
    sched = build_priority_schedule(flat, list(best_order))
    sched = Schedule(sched.slices, policy)
    return SolveResult(sched, knorm(inst, sched, kind, precision_bits), True, "brute-force")
