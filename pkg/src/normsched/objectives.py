"""k-norm objectives over flow time and stretch.

The objective is the plain sum of per-job terms (flow or stretch raised
to the exponent), which has the same optimal schedules as the k-th root
form. Integer exponents yield exact rationals; fractional exponents in
(0,1) yield certified enclosures; the infinity exponent takes the
maximum instead of the sum.

Symbolic FifoAsReleased streams are costed in closed form: every stream
job waits exactly one period, so under flow it contributes period^k and
under stretch it contributes 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactnum import (
    DEFAULT_PRECISION,
    NormExponent,
    RealEnclosure,
    RVal,
    as_enclosure,
    enclosure_to_json,
    format_rational,
    pow_int,
    pow_rat,
)
from .model import Instance, StreamDescriptor
from .scheduling import FIFO_AS_RELEASED, Schedule, completion_times, scheduled_jobs

FLOW = "flow"
STRETCH = "stretch"


@dataclass(frozen=True)
class ObjectiveKind:
    measure: str
    exponent: NormExponent

    def __post_init__(self):
        if self.measure not in (FLOW, STRETCH):
            raise ValueError(f"unknown measure {self.measure!r}")

    def __str__(self):
        return f"{self.measure}^{self.exponent}"


@dataclass(frozen=True)
class ObjectiveValue:
    """Exactly one of ``exact`` (integer / infinity exponents) or
    ``enclosure`` (fractional exponents) is present."""

    exact: Optional[Fraction] = None
    enclosure: Optional[RealEnclosure] = None

    def __post_init__(self):
        if (self.exact is None) == (self.enclosure is None):
            raise ValueError("exactly one representation must be present")

    @classmethod
    def of(cls, value: RVal, exponent: NormExponent) -> "ObjectiveValue":
        if exponent.is_fractional:
            return cls(enclosure=as_enclosure(value))
        if isinstance(value, RealEnclosure):
            raise ValueError("integer-exponent objective must be exact")
        return cls(exact=Fraction(value))

    @property
    def rval(self) -> RVal:
        return self.exact if self.exact is not None else self.enclosure

    def to_json(self) -> dict:
        if self.exact is not None:
            return {"exact": format_rational(self.exact)}
        return {"enclosure": enclosure_to_json(self.enclosure)}


def _power(base: Fraction, exponent: NormExponent, precision_bits: int) -> RVal:
    if base < 0:
        raise ValueError(f"objective terms need non-negative bases, got {base}")
    if exponent.is_integer:
        return pow_int(base, int(exponent.value))
    if exponent.is_fractional:
        return as_enclosure(pow_rat(base, exponent.value, precision_bits), precision_bits)
    raise ValueError("infinite exponent has no per-term power")


def increase_over_interval(job, begin: Fraction, end: Fraction, kind: ObjectiveKind,
                           precision_bits: int = DEFAULT_PRECISION) -> ObjectiveValue:
    """Objective growth of an unfinished job over [begin, end].

    Flow: (end - r)^k - (begin - min(begin, r))^k; the second term
    vanishes when the interval starts before the release. Stretch
    divides the ages by the job's size before exponentiating. An
    interval ending at or before the release contributes zero, so
    telescoping over arbitrary partitions of [begin, C] is exact.
    """
    if begin > end:
        raise ValueError("interval must satisfy begin <= end")
    if kind.exponent.is_infinite:
        raise ValueError("interval increase is defined for finite exponents only")
    if job.release >= end:
        return ObjectiveValue.of(Fraction(0), kind.exponent)
    age_end = end - job.release
    age_begin = begin - min(begin, job.release)
    if kind.measure == STRETCH:
        age_end /= job.proc
        age_begin /= job.proc
    hi = _power(age_end, kind.exponent, precision_bits)
    lo = _power(age_begin, kind.exponent, precision_bits)
    diff = hi - lo
    return ObjectiveValue.of(diff, kind.exponent)


def stream_cost_fifo(stream: StreamDescriptor, kind: ObjectiveKind,
                     precision_bits: int = DEFAULT_PRECISION) -> ObjectiveValue:
    """Total objective of a stream served as released (its minimum cost)."""
    count = stream.count
    if kind.exponent.is_infinite:
        per_job = stream.period if kind.measure == FLOW else Fraction(1)
        return ObjectiveValue(exact=per_job)
    if kind.measure == STRETCH:
        return ObjectiveValue.of(count, kind.exponent)
    per_job = _power(stream.period, kind.exponent, precision_bits)
    return ObjectiveValue.of(count * per_job, kind.exponent)


def knorm(inst: Instance, schedule: Schedule, kind: ObjectiveKind,
          precision_bits: int = DEFAULT_PRECISION) -> ObjectiveValue:
    """Objective of a valid complete schedule.

    Sums explicit-job terms (in job-id order, for determinism) plus the
    closed-form cost of each FifoAsReleased stream; the infinity
    exponent returns the maximum per-job value instead.
    """
    cts = completion_times(inst, schedule)
    jobs = scheduled_jobs(inst, schedule)
    bases = {}
    for jid, c in cts.items():
        job = jobs[jid]
        base = c - job.release
        if kind.measure == STRETCH:
            base /= job.proc
        bases[jid] = base

    fifo_streams = [s for s in inst.streams
                    if schedule.policy(s.id) == FIFO_AS_RELEASED]

    if kind.exponent.is_infinite:
        best = max((bases[j] for j in sorted(bases)), default=Fraction(0))
        for s in fifo_streams:
            per_job = s.period if kind.measure == FLOW else Fraction(1)
            best = max(best, per_job)
        return ObjectiveValue(exact=best)

    total: RVal = Fraction(0)
    for jid in sorted(bases):
        total = total + _power(bases[jid], kind.exponent, precision_bits)
    for s in fifo_streams:
        total = total + stream_cost_fifo(s, kind, precision_bits).rval
    return ObjectiveValue.of(total, kind.exponent)
