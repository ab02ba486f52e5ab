"""Scheduling-input data model.

Explicit jobs, symbolic job streams (a stream stands for a long run of
identical small jobs released back to back, far too many to enumerate at
sound reduction parameters), whole instances, and the combinatorial
side: triple-partition instances and partitions.

Construction is permissive; ``validate_instance`` and the ``violations``
methods report every broken invariant instead of raising, so malformed
inputs can be diagnosed in one pass.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .exactnum import format_rational, parse_rational


class TooManyJobs(RuntimeError):
    """Materializing a stream would exceed the requested job limit."""


MATERIALIZE_LIMIT = 100_000


@dataclass(frozen=True)
class Job:
    id: str
    release: Fraction
    proc: Fraction


@dataclass(frozen=True)
class StreamDescriptor:
    """Jobs of size ``period`` released every ``period`` over [start, end).

    Job size always equals the period: each release lands exactly when
    the previous job would finish under immediate service, so the stream
    occupies its interval wall to wall.
    """

    id: str
    start: Fraction
    end: Fraction
    period: Fraction

    @property
    def size(self) -> Fraction:
        return self.period

    @property
    def count(self) -> Fraction:
        return (self.end - self.start) / self.period

    def violations(self) -> list[str]:
        out = []
        if self.period <= 0:
            out.append(f"stream {self.id}: period > 0 violated")
            return out
        if not self.start < self.end:
            out.append(f"stream {self.id}: start < end violated")
        c = self.count
        if c.denominator != 1 or c <= 0:
            out.append(f"stream {self.id}: (end - start)/period must be a positive integer, got {c}")
        return out


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]
    streams: tuple[StreamDescriptor, ...] = ()

    def job(self, job_id: str) -> Job:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)

    def stream(self, stream_id: str) -> StreamDescriptor:
        for s in self.streams:
            if s.id == stream_id:
                return s
        raise KeyError(stream_id)


def validate_instance(inst: Instance) -> list[str]:
    """Empty list iff every type invariant holds."""
    out = []
    seen = set()
    for j in inst.jobs:
        if j.id in seen:
            out.append(f"duplicate id {j.id!r}")
        seen.add(j.id)
        if j.proc <= 0:
            out.append(f"job {j.id}: proc > 0 violated")
    for s in inst.streams:
        if s.id in seen:
            out.append(f"duplicate id {s.id!r}")
        seen.add(s.id)
        out.extend(s.violations())
    streams = sorted(inst.streams, key=lambda s: s.start)
    for a, b in zip(streams, streams[1:]):
        if b.start < a.end:
            out.append(f"streams {a.id} and {b.id}: disjoint stream intervals violated")
    return out


def materialize_stream(stream: StreamDescriptor, limit: int = MATERIALIZE_LIMIT) -> list[Job]:
    """Expand a stream into explicit jobs, id'ed ``<stream>#<index>``.

    Raises TooManyJobs when the count exceeds ``limit``; sound reduction
    parameters produce counts around 1e29, which must never be expanded.
    """
    if limit <= 0:
        raise ValueError("limit must be positive")
    bad = stream.violations()
    if bad:
        raise ValueError("; ".join(bad))
    count = stream.count
    if count > limit:
        raise TooManyJobs(f"stream {stream.id}: {count} jobs exceeds limit {limit}")
    return [
        Job(f"{stream.id}#{j}", stream.start + j * stream.period, stream.size)
        for j in range(int(count))
    ]


def materialize_instance(inst: Instance, limit: int = MATERIALIZE_LIMIT) -> Instance:
    """Instance with every stream expanded into explicit jobs."""
    jobs = list(inst.jobs)
    total = len(jobs)
    for s in inst.streams:
        expanded = materialize_stream(s, limit)
        total += len(expanded)
        if total > limit:
            raise TooManyJobs(f"materialized instance exceeds {limit} jobs")
        jobs.extend(expanded)
    return Instance(tuple(jobs), ())


@dataclass(frozen=True)
class ThreePartitionInstance:
    """3m positive values summing to m*target, each at most target/2."""

    elements: tuple[Fraction, ...]
    target: Fraction
    m: int

    def violations(self) -> list[str]:
        out = []
        if self.m < 1:
            out.append("m must be >= 1")
            return out
        if len(self.elements) != 3 * self.m:
            out.append(f"expected {3 * self.m} elements, got {len(self.elements)}")
        if any(b <= 0 for b in self.elements):
            out.append("elements must be positive")
        if sum(self.elements) != self.m * self.target:
            out.append(f"element sum {sum(self.elements)} != m*B = {self.m * self.target}")
        if any(b > self.target / 2 for b in self.elements):
            out.append("some element exceeds B/2")
        return out

    def require_valid(self):
        bad = self.violations()
        if bad:
            raise ValueError("; ".join(bad))

    @property
    def is_integral(self) -> bool:
        return self.target.denominator == 1 and all(b.denominator == 1 for b in self.elements)


@dataclass(frozen=True)
class Partition:
    """m disjoint index triples covering range(3m). Indices are 0-based."""

    groups: tuple[tuple[int, int, int], ...]

    def violations(self, m: int) -> list[str]:
        out = []
        if len(self.groups) != m:
            out.append(f"expected {m} groups, got {len(self.groups)}")
        flat = [i for g in self.groups for i in g]
        if any(len(g) != 3 for g in self.groups):
            out.append("every group must have exactly 3 indices")
        if len(set(flat)) != len(flat):
            out.append("groups must be disjoint")
        if set(flat) != set(range(3 * m)):
            out.append("groups must cover all indices")
        return out

    def canonical(self) -> "Partition":
        groups = tuple(sorted(tuple(sorted(g)) for g in self.groups))
        return Partition(groups)


def is_partition_valid(tp: ThreePartitionInstance, p: Partition) -> bool:
    """True iff every triple sums exactly to the target."""
    if p.violations(tp.m):
        return False
    return all(sum(tp.elements[i] for i in g) == tp.target for g in p.groups)


def iter_triple_partitions(m: int) -> Iterator[Partition]:
    """All ways to split range(3m) into unordered triples.

    Canonical enumeration: the smallest unused index anchors each triple,
    so each partition appears exactly once. 280 results for m=3, 15400
    for m=4.
    """

    def rec(remaining):
        if not remaining:
            yield ()
            return
        first = remaining[0]
        rest = remaining[1:]
        for pair in itertools.combinations(rest, 2):
            triple = (first,) + pair
            left = tuple(i for i in rest if i not in pair)
            for tail in rec(left):
                yield (triple,) + tail

    for groups in rec(tuple(range(3 * m))):
        yield Partition(groups)


def find_partition(tp: ThreePartitionInstance, limit_m: int = 4) -> Optional[Partition]:
    """Exhaustive search for a valid partition; None if there is none."""
    if tp.m > limit_m:
        raise ValueError(f"exhaustive search capped at m <= {limit_m}")
    for p in iter_triple_partitions(tp.m):
        if is_partition_valid(tp, p):
            return p
    return None


def tight_bounds(m: int, target: Fraction) -> tuple[Fraction, Fraction]:
    """Element range [m/(3m+1/2)*B, B/2] used by the reductions."""
    lo = Fraction(2 * m, 6 * m + 1) * target
    return lo, target / 2


def tight_triples(m: int, target: int) -> list[tuple[int, int, int]]:
    """All nondecreasing integer triples in the tight range summing to target."""
    lo_f, hi_f = tight_bounds(m, Fraction(target))
    lo = int(-(-lo_f.numerator // lo_f.denominator))
    hi = int(hi_f.numerator // hi_f.denominator)
    out = []
    for a in range(lo, hi + 1):
        for b in range(a, hi + 1):
            c = target - a - b
            if c < b or c > hi:
                continue
            out.append((a, b, c))
    return out


def all_yes_instances(m: int, target: int, cap: int = 512) -> list[tuple[ThreePartitionInstance, Partition]]:
    """Every tight-range YES instance for (m, target), up to element order.

    A multiset admits a partition iff it splits into m tight triples, so
    enumerating multisets of triple types is exhaustive. The tight range
    is narrow for small targets, so counts stay tiny; ``cap`` guards the
    combinatorial blowup for large ones.
    """
    types = tight_triples(m, target)
    out = []
    for combo in itertools.combinations_with_replacement(types, m):
        elements = tuple(Fraction(v) for t in combo for v in t)
        groups = tuple(tuple(range(3 * g, 3 * g + 3)) for g in range(m))
        tp = ThreePartitionInstance(elements, Fraction(target), m)
        tp.require_valid()
        out.append((tp, Partition(groups)))
        if len(out) > cap:
            raise ValueError(f"more than {cap} YES instances for m={m}, B={target}")
    return out


def generate_yes(m: int, target: int, seed: int) -> tuple[ThreePartitionInstance, Partition]:
    """Instance with a hidden valid partition; elements in the tight range."""
    triples = tight_triples(m, target)
    if not triples:
        raise ValueError(f"no tight-range integer triples exist for m={m}, B={target}")
    rng = random.Random(seed)
    chosen = [rng.choice(triples) for _ in range(m)]
    elements = [Fraction(v) for t in chosen for v in t]
    order = list(range(3 * m))
    rng.shuffle(order)
    shuffled = [elements[i] for i in order]
    position = {orig: new for new, orig in enumerate(order)}
    groups = tuple(
        tuple(sorted(position[3 * g + j] for j in range(3)))
        for g in range(m)
    )
    tp = ThreePartitionInstance(tuple(shuffled), Fraction(target), m)
    tp.require_valid()
    hidden = Partition(groups).canonical()
    assert is_partition_valid(tp, hidden)
    return tp, hidden


def generate_no(m: int, target: int, seed: int, verify_limit: int = 4,
                attempts: int = 400) -> ThreePartitionInstance:
    """Instance with no valid partition, certified by exhaustive search.

    Starts from classical-range elements and perturbs pairs (+1/-1,
    preserving the sum) until the exhaustive oracle confirms no partition
    exists. Verification requires m <= verify_limit.
    """
    if m > verify_limit:
        raise ValueError(f"NO generation is oracle-verified only for m <= {verify_limit}")
    lo = target // 4 + 1
    hi = (target - 1) // 2
    if lo > hi:
        raise ValueError(f"classical range empty for B={target}")
    rng = random.Random(seed)
    for _ in range(attempts):
        base, _ = _classical_yes(m, target, rng, lo, hi)
        elements = list(base)
        for _ in range(rng.randint(1, 3 * m)):
            i, j = rng.sample(range(3 * m), 2)
            if elements[i] + 1 <= hi and elements[j] - 1 >= lo:
                elements[i] += 1
                elements[j] -= 1
        tp = ThreePartitionInstance(tuple(Fraction(v) for v in elements),
                                    Fraction(target), m)
        if tp.violations():
            continue
        if find_partition(tp, verify_limit) is None:
            return tp
    raise RuntimeError(f"could not find a NO instance for m={m}, B={target} "
                       f"in {attempts} attempts")


def _classical_yes(m, target, rng, lo, hi):
    triples = []
    for a in range(lo, hi + 1):
        for b in range(a, hi + 1):
            c = target - a - b
            if b <= c <= hi:
                triples.append((a, b, c))
    if not triples:
        raise ValueError(f"no classical-range integer triples for B={target}")
    chosen = [rng.choice(triples) for _ in range(m)]
    return [v for t in chosen for v in t], chosen


# --- file formats ----------------------------------------------------------

def instance_to_json(inst: Instance) -> dict:
    return {
        "jobs": [
            {"id": j.id, "release": format_rational(j.release), "proc": format_rational(j.proc)}
            for j in inst.jobs
        ],
        "streams": [
            {"id": s.id, "start": format_rational(s.start), "end": format_rational(s.end),
             "period": format_rational(s.period)}
            for s in inst.streams
        ],
    }


def instance_from_json(data: dict) -> Instance:
    jobs = tuple(
        Job(str(j["id"]), parse_rational(j["release"]), parse_rational(j["proc"]))
        for j in data.get("jobs", [])
    )
    streams = tuple(
        StreamDescriptor(str(s["id"]), parse_rational(s["start"]),
                         parse_rational(s["end"]), parse_rational(s["period"]))
        for s in data.get("streams", [])
    )
    return Instance(jobs, streams)


def three_partition_to_json(tp: ThreePartitionInstance) -> dict:
    return {
        "m": tp.m,
        "B": format_rational(tp.target),
        "elements": [format_rational(b) for b in tp.elements],
    }


def three_partition_from_json(data: dict) -> ThreePartitionInstance:
    return ThreePartitionInstance(
        tuple(parse_rational(b) for b in data["elements"]),
        parse_rational(data["B"]),
        int(data["m"]),
    )


def partition_to_json(p: Partition) -> dict:
    return {"groups": [list(g) for g in p.groups]}


def partition_from_json(data: dict) -> Partition:
    return Partition(tuple(tuple(int(i) for i in g) for g in data["groups"]))


def dump_json(data: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
