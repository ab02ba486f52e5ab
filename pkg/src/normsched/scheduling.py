"""Preemptive schedules: representation, validation, simulation.

A schedule is a sorted sequence of disjoint timed slices over explicit
job ids plus a per-stream policy. ``FifoAsReleased`` streams keep their
whole interval for themselves (the machine is reserved; no slice may
overlap), which is how the astronomically long job streams of the
reductions are handled without enumeration. ``Materialized`` streams
have been expanded to explicit jobs named ``<stream>#<index>`` and their
slices appear like any other job's.

Priority simulation is the oracle backbone: the k-norm objective is
nondecreasing in every completion time, so by a standard exchange
argument some priority (total order) schedule is optimal, and brute
force over orders is exhaustive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

from .exactnum import format_rational, parse_rational
from .model import Instance, Job, materialize_stream, validate_instance

FIFO_AS_RELEASED = "FifoAsReleased"
MATERIALIZED = "Materialized"


class IncompleteJob(RuntimeError):
    """A job's slices do not add up to its processing time."""


@dataclass(frozen=True)
class Slice:
    job: str
    start: Fraction
    end: Fraction


@dataclass(frozen=True)
class Schedule:
    slices: tuple[Slice, ...]
    stream_policy: Mapping[str, str] = None

    def __post_init__(self):
        if self.stream_policy is None:
            object.__setattr__(self, "stream_policy", {})

    def policy(self, stream_id: str) -> str:
        return self.stream_policy.get(stream_id, FIFO_AS_RELEASED)


def scheduled_jobs(inst: Instance, schedule: Schedule,
                    limit: int = 100_000) -> dict[str, Job]:
    """Explicit jobs plus expanded jobs of Materialized streams."""
    jobs = {j.id: j for j in inst.jobs}
    for s in inst.streams:
        if schedule.policy(s.id) == MATERIALIZED:
            for j in materialize_stream(s, limit):
                jobs[j.id] = j
    return jobs


def validate_schedule(inst: Instance, schedule: Schedule) -> list[str]:
    """Disjointness, release feasibility, full processing, stream exclusivity."""
    out = list(validate_instance(inst))
    known_streams = {s.id for s in inst.streams}
    for sid, pol in schedule.stream_policy.items():
        if sid not in known_streams:
            out.append(f"policy for unknown stream {sid!r}")
        if pol not in (FIFO_AS_RELEASED, MATERIALIZED):
            out.append(f"stream {sid}: unknown policy {pol!r}")
    if out:
        return out

    jobs = scheduled_jobs(inst, schedule)
    processed: dict[str, Fraction] = {jid: Fraction(0) for jid in jobs}
    ordered = sorted(schedule.slices, key=lambda sl: (sl.start, sl.end))
    for sl in ordered:
        if sl.start >= sl.end:
            out.append(f"slice for {sl.job}: from < to violated")
        if sl.job not in jobs:
            out.append(f"slice for unknown job {sl.job!r}")
            continue
        if sl.start < jobs[sl.job].release:
            out.append(f"slice for {sl.job} starts at {sl.start} before release "
                       f"{jobs[sl.job].release}")
        processed[sl.job] += sl.end - sl.start
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            out.append(f"slices for {a.job} and {b.job} overlap at {b.start}")
    for s in inst.streams:
        if schedule.policy(s.id) != FIFO_AS_RELEASED:
            continue
        for sl in ordered:
            if sl.start < s.end and s.start < sl.end:
                out.append(f"slice for {sl.job} overlaps reserved stream "
                           f"interval of {s.id}")
    for jid, job in jobs.items():
        if processed[jid] < job.proc:
            out.append(f"job {jid} incomplete: processed {processed[jid]} of {job.proc}")
        elif processed[jid] > job.proc:
            out.append(f"job {jid} over-processed: {processed[jid]} > {job.proc}")
    return out


def completion_times(inst: Instance, schedule: Schedule) -> dict[str, Fraction]:
    """C_i = end of the slice where job i's cumulative processing reaches p_i.

    Covers explicit jobs and Materialized stream jobs. FifoAsReleased
    stream jobs complete period after release by construction; they stay
    symbolic here and are costed in closed form by the objectives.
    """
    jobs = scheduled_jobs(inst, schedule)
    by_job: dict[str, list[Slice]] = {jid: [] for jid in jobs}
    for sl in schedule.slices:
        if sl.job not in by_job:
            raise KeyError(f"slice for unknown job {sl.job!r}")
        by_job[sl.job].append(sl)
    result = {}
    for jid, job in jobs.items():
        cum = Fraction(0)
        done: Optional[Fraction] = None
        for sl in sorted(by_job[jid], key=lambda sl: sl.start):
            cum += sl.end - sl.start
            if cum >= job.proc:
                if cum > job.proc:
                    raise ValueError(f"job {jid} over-processed")
                done = sl.end
                break
        if done is None:
            raise IncompleteJob(f"job {jid} processed {cum} of {job.proc}")
        result[jid] = done
    return result


def _blackouts(inst: Instance) -> list[tuple[Fraction, Fraction]]:
    return sorted((s.start, s.end) for s in inst.streams)


def _simulate(jobs: Sequence[Job], blackouts: Sequence[tuple[Fraction, Fraction]],
              choose: Callable[[list[str], dict[str, Fraction]], str],
              ) -> tuple[list[Slice], dict[str, Fraction]]:
    """Run released jobs chosen by ``choose`` between decision events.

    Decision points are exactly releases, completions, and blackout
    boundaries; ``choose`` sees the released unfinished ids and the
    remaining-time map. Completions take effect before releases at the
    same instant because the loop re-decides at every event time.
    """
    remaining = {j.id: j.proc for j in jobs}
    release = {j.id: j.release for j in jobs}
    releases = sorted(set(release.values()))
    slices: list[Slice] = []
    completions: dict[str, Fraction] = {}
    unfinished = set(remaining)
    if not unfinished:
        return [], {}
    t = min(releases)

    def next_release_after(t):
        for r in releases:
            if r > t:
                return r
        return None

    def blackout_at(t):
        for b0, b1 in blackouts:
            if b0 <= t < b1:
                return b0, b1
            if b0 > t:
                break
        return None

    def next_blackout_start_after(t):
        for b0, _ in blackouts:
            if b0 > t:
                return b0
        return None

    while unfinished:
        hit = blackout_at(t)
        if hit is not None:
            t = hit[1]
            continue
        ready = [jid for jid in unfinished if release[jid] <= t]
        if not ready:
            nxt = next_release_after(t)
            assert nxt is not None, "unfinished jobs but no future release"
            t = nxt
            continue
        jid = choose(ready, remaining)
        horizon = t + remaining[jid]
        nr = next_release_after(t)
        if nr is not None and nr < horizon:
            horizon = nr
        nb = next_blackout_start_after(t)
        if nb is not None and nb < horizon:
            horizon = nb
        if slices and slices[-1].job == jid and slices[-1].end == t:
            slices[-1] = Slice(jid, slices[-1].start, horizon)
        else:
            slices.append(Slice(jid, t, horizon))
        remaining[jid] -= horizon - t
        if remaining[jid] == 0:
            completions[jid] = horizon
            unfinished.discard(jid)
        t = horizon
    return slices, completions


def build_priority_schedule(inst: Instance, order: Sequence[str]) -> Schedule:
    """Always run the released unfinished job earliest in ``order``.

    Streams are honored as FifoAsReleased blackouts. The order must
    cover exactly the explicit jobs.
    """
    ids = [j.id for j in inst.jobs]
    if sorted(order) != sorted(ids):
        raise ValueError("order must cover exactly the explicit jobs")
    rank = {jid: i for i, jid in enumerate(order)}
    slices, _ = _simulate(inst.jobs, _blackouts(inst),
                          lambda ready, rem: min(ready, key=rank.__getitem__))
    return Schedule(tuple(slices), {s.id: FIFO_AS_RELEASED for s in inst.streams})


def simulate_keyed(inst: Instance, key: Callable[[str, dict[str, Fraction]], object]) -> Schedule:
    """Event-driven simulation picking argmin of ``key`` among released jobs."""
    slices, _ = _simulate(inst.jobs, _blackouts(inst),
                          lambda ready, rem: min(ready, key=lambda j: key(j, rem)))
    return Schedule(tuple(slices), {s.id: FIFO_AS_RELEASED for s in inst.streams})


def schedule_to_json(schedule: Schedule) -> dict:
    return {
        "slices": [
            {"job": sl.job, "from": format_rational(sl.start), "to": format_rational(sl.end)}
            for sl in schedule.slices
        ],
        "streams": dict(sorted(schedule.stream_policy.items())),
    }


def schedule_from_json(data: dict) -> Schedule:
    slices = tuple(
        Slice(str(sl["job"]), parse_rational(sl["from"]), parse_rational(sl["to"]))
        for sl in data.get("slices", [])
    )
    return Schedule(slices, dict(data.get("streams", {})))
