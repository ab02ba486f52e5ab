"""Shared generators for randomized small-instance tests.

All randomness is seeded at the call site so every test is reproducible.
"""

import random
from fractions import Fraction

from normsched.model import Instance, Job
from normsched.scheduling import Schedule, Slice


def random_instance(rng: random.Random, n: int, max_num: int = 12,
                    max_den: int = 4) -> Instance:
    """n jobs with small random rational releases and sizes."""
    jobs = []
    for i in range(n):
        release = Fraction(rng.randint(0, max_num), rng.randint(1, max_den))
        proc = Fraction(rng.randint(1, max_num), rng.randint(1, max_den))
        jobs.append(Job(f"j{i}", release, proc))
    return Instance(tuple(jobs))


def random_valid_schedule(inst: Instance, rng: random.Random) -> Schedule:
    """A complete valid preemptive schedule, not necessarily work conserving."""
    remaining = {j.id: j.proc for j in inst.jobs}
    release = {j.id: j.release for j in inst.jobs}
    unfinished = set(remaining)
    slices = []
    t = min(release.values())
    while unfinished:
        ready = [j for j in unfinished if release[j] <= t]
        future = sorted(release[j] for j in unfinished if release[j] > t)
        if not ready:
            t = future[0]
            continue
        if future and rng.random() < 0.2:
            # idle until the next release to exercise non-work-conserving schedules
            t = future[0]
            continue
        jid = rng.choice(sorted(ready))
        quantum = remaining[jid] * Fraction(rng.randint(1, 4), 4)
        end = t + quantum
        if future and rng.random() < 0.5 and future[0] > t:
            end = min(end, future[0])
        if end == t:
            end = t + remaining[jid]
        run = end - t
        if run >= remaining[jid]:
            end = t + remaining[jid]
            run = remaining[jid]
        slices.append(Slice(jid, t, end))
        remaining[jid] -= run
        if remaining[jid] == 0:
            unfinished.discard(jid)
        t = end
    return Schedule(tuple(slices), {})
