import random
from fractions import Fraction

import pytest

from conftest import random_instance, random_valid_schedule
from normsched.model import Instance, Job, StreamDescriptor
from normsched.scheduling import (
    FIFO_AS_RELEASED,
    MATERIALIZED,
    IncompleteJob,
    Schedule,
    Slice,
    build_priority_schedule,
    completion_times,
    schedule_from_json,
    schedule_to_json,
    validate_schedule,
)

F = Fraction


def test_validate_single_job_ok():
    inst = Instance((Job("a", F(0), F(2)),))
    s = Schedule((Slice("a", F(0), F(2)),), {})
    assert validate_schedule(inst, s) == []


def test_validate_slice_before_release():
    inst = Instance((Job("a", F(1), F(2)),))
    s = Schedule((Slice("a", F(0), F(3)),), {})
    bad = validate_schedule(inst, s)
    assert any("before release" in v for v in bad)


def test_validate_overlapping_slices():
    inst = Instance((Job("a", F(0), F(2)), Job("b", F(0), F(2))))
    s = Schedule((Slice("a", F(0), F(2)), Slice("b", F(1), F(3))), {})
    assert any("overlap" in v for v in validate_schedule(inst, s))


def test_validate_incomplete_and_stream_exclusivity():
    inst = Instance((Job("a", F(0), F(2)),),
                    (StreamDescriptor("s", F(0), F(1), F(1, 2)),))
    partial = Schedule((Slice("a", F(1), F(2)),), {"s": FIFO_AS_RELEASED})
    assert any("incomplete" in v for v in validate_schedule(inst, partial))
    trespass = Schedule((Slice("a", F(1, 2), F(5, 2)),), {"s": FIFO_AS_RELEASED})
    assert any("reserved stream interval" in v for v in validate_schedule(inst, trespass))


def test_completion_times_split_slices():
    inst = Instance((Job("a", F(0), F(2)),))
    s = Schedule((Slice("a", F(0), F(1)), Slice("a", F(3), F(4))), {})
    assert completion_times(inst, s) == {"a": F(4)}


def test_completion_times_round_robin():
    inst = Instance((Job("a", F(0), F(2)), Job("b", F(0), F(2))))
    s = Schedule((Slice("a", F(0), F(1)), Slice("b", F(1), F(2)),
                  Slice("a", F(2), F(3)), Slice("b", F(3), F(4))), {})
    assert completion_times(inst, s) == {"a": F(3), "b": F(4)}


def test_completion_times_incomplete_raises():
    inst = Instance((Job("a", F(0), F(2)),))
    s = Schedule((Slice("a", F(0), F(1)),), {})
    with pytest.raises(IncompleteJob):
        completion_times(inst, s)


def test_materialized_stream_jobs_complete():
    inst = Instance((), (StreamDescriptor("s", F(0), F(1), F(1, 2)),))
    s = Schedule((Slice("s#0", F(0), F(1, 2)), Slice("s#1", F(1, 2), F(1))),
                 {"s": MATERIALIZED})
    assert validate_schedule(inst, s) == []
    cts = completion_times(inst, s)
    # FIFO service: each stream job completes one period after release
    assert cts == {"s#0": F(1, 2), "s#1": F(1)}


def test_priority_schedule_short_first():
    inst = Instance((Job("long", F(0), F(4)), Job("short", F(1), F(1))))
    s = build_priority_schedule(inst, ["short", "long"])
    assert validate_schedule(inst, s) == []
    assert completion_times(inst, s) == {"short": F(2), "long": F(5)}


def test_priority_schedule_sequential():
    inst = Instance((Job("a", F(0), F(2)), Job("b", F(0), F(2))))
    s = build_priority_schedule(inst, ["a", "b"])
    assert completion_times(inst, s) == {"a": F(2), "b": F(4)}


def test_priority_schedule_single_job():
    inst = Instance((Job("a", F(3, 2), F(5, 3)),))
    s = build_priority_schedule(inst, ["a"])
    assert completion_times(inst, s)["a"] == F(3, 2) + F(5, 3)


def test_priority_schedule_respects_blackouts():
    inst = Instance((Job("a", F(0), F(1)),),
                    (StreamDescriptor("s", F(0), F(1), F(1, 4)),))
    s = build_priority_schedule(inst, ["a"])
    assert validate_schedule(inst, s) == []
    assert completion_times(inst, s)["a"] == F(2)


def test_priority_schedule_preempts_for_blackout():
    # job spans a later reserved interval and resumes after it
    inst = Instance((Job("a", F(0), F(3)),),
                    (StreamDescriptor("s", F(1), F(2), F(1, 2)),))
    s = build_priority_schedule(inst, ["a"])
    assert s.slices == (Slice("a", F(0), F(1)), Slice("a", F(2), F(4)))


def test_priority_schedule_always_valid_and_complete():
    rng = random.Random(5)
    for _ in range(60):
        inst = random_instance(rng, rng.randint(1, 6))
        ids = [j.id for j in inst.jobs]
        rng.shuffle(ids)
        s = build_priority_schedule(inst, ids)
        assert validate_schedule(inst, s) == []
        completion_times(inst, s)


def test_priority_schedule_work_conservation():
    # between consecutive events the machine never idles while work is released
    rng = random.Random(9)
    for _ in range(40):
        inst = random_instance(rng, rng.randint(1, 5))
        ids = sorted(j.id for j in inst.jobs)
        s = build_priority_schedule(inst, ids)
        cts = completion_times(inst, s)
        busy = sorted((sl.start, sl.end) for sl in s.slices)
        for (a0, a1), (b0, b1) in zip(busy, busy[1:]):
            if a1 < b0:
                # gap: no job may be released and unfinished inside it
                for j in inst.jobs:
                    assert not (j.release < b0 and cts[j.id] > a1 and j.release <= a1)


def test_priority_dominance_against_random_schedules():
    # for any valid schedule S, prioritizing jobs by completion order in S
    # completes every job no later than S does
    rng = random.Random(17)
    for _ in range(120):
        inst = random_instance(rng, rng.randint(2, 6))
        s = random_valid_schedule(inst, rng)
        assert validate_schedule(inst, s) == []
        cts = completion_times(inst, s)
        order = sorted(cts, key=lambda j: (cts[j], j))
        dom = build_priority_schedule(inst, order)
        dom_cts = completion_times(inst, dom)
        for jid, c in cts.items():
            assert dom_cts[jid] <= c


def test_schedule_json_round_trip():
    s = Schedule((Slice("a", F(-1, 2), F(2)),), {"s": FIFO_AS_RELEASED})
    blob = schedule_to_json(s)
    assert blob["slices"][0]["from"] == "-1/2"
    assert schedule_from_json(blob) == s
