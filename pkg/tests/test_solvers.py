import itertools
import random
from fractions import Fraction

import pytest

from conftest import random_instance
from normsched.exactnum import NormExponent
from normsched.model import Instance, Job, StreamDescriptor
from normsched.objectives import FLOW, STRETCH, ObjectiveKind, knorm
from normsched.scheduling import build_priority_schedule, validate_schedule
from normsched.solvers import (
    Infeasible,
    TooLarge,
    brute_force_optimal,
    edf_feasible,
    minimize_max,
    srpt,
)

F = Fraction
FLOW1 = ObjectiveKind(FLOW, NormExponent.integer(1))
FLOW2 = ObjectiveKind(FLOW, NormExponent.integer(2))


def order_enumeration_min(inst, kind):
    """Independent oracle: exact minimum over every priority order."""
    ids = sorted(j.id for j in inst.jobs)
    best = None
    for order in itertools.permutations(ids):
        s = build_priority_schedule(inst, list(order))
        v = knorm(inst, s, kind).exact
        if best is None or v < best:
            best = v
    return best


def test_srpt_two_jobs():
    inst = Instance((Job("long", F(0), F(4)), Job("short", F(1), F(1))))
    res = srpt(inst)
    assert res.value.exact == 6
    assert res.algorithm == "srpt"
    assert order_enumeration_min(inst, FLOW1) == 6


def test_srpt_single_job():
    inst = Instance((Job("a", F(2), F(3)),))
    assert srpt(inst).value.exact == 3


def test_srpt_equal_release_is_spt():
    inst = Instance((Job("a", F(0), F(1)), Job("b", F(0), F(2)), Job("c", F(0), F(3))))
    assert srpt(inst).value.exact == 10
    assert order_enumeration_min(inst, FLOW1) == 10


def test_srpt_matches_brute_force_randomized():
    rng = random.Random(101)
    for _ in range(40):
        inst = random_instance(rng, rng.randint(1, 5))
        assert srpt(inst).value.exact == order_enumeration_min(inst, FLOW1)


def test_srpt_materializes_streams():
    inst = Instance((Job("a", F(0), F(1)),),
                    (StreamDescriptor("s", F(0), F(1), F(1, 2)),))
    res = srpt(inst)
    assert validate_schedule(inst, res.schedule) == []
    # stream jobs are as short as the explicit job is long: SRPT serves them first
    assert res.value.exact == F(1, 2) + F(1, 2) + 2


def test_edf_single_job_feasible():
    inst = Instance((Job("a", F(0), F(2)),))
    sched = edf_feasible(inst, {"a": F(2)})
    assert not isinstance(sched, Infeasible)


def test_edf_infeasible_witness():
    inst = Instance((Job("a", F(0), F(2)), Job("b", F(0), F(2))))
    out = edf_feasible(inst, {"a": F(2), "b": F(2)})
    assert isinstance(out, Infeasible)
    assert (out.start, out.end, out.demand) == (F(0), F(2), F(4))
    assert out.demand > out.capacity


def test_edf_staggered_deadlines_feasible():
    inst = Instance((Job("a", F(0), F(2)), Job("b", F(0), F(2))))
    sched = edf_feasible(inst, {"a": F(2), "b": F(4)})
    assert not isinstance(sched, Infeasible)


def test_edf_feasibility_monotone_in_deadline_slack():
    rng = random.Random(7)
    for _ in range(40):
        inst = random_instance(rng, rng.randint(1, 5))
        slacks = sorted(F(rng.randint(1, 30), rng.randint(1, 3)) for _ in range(3))
        outcomes = []
        for f in slacks:
            out = edf_feasible(inst, {j.id: j.release + f for j in inst.jobs})
            outcomes.append(not isinstance(out, Infeasible))
        # once feasible, stays feasible for larger slack
        for earlier, later in zip(outcomes, outcomes[1:]):
            assert later or not earlier


def test_minimize_max_flow_two_equal_jobs():
    inst = Instance((Job("a", F(0), F(2)), Job("b", F(0), F(2))))
    res = minimize_max(inst, FLOW)
    assert res.value.exact == 4


def test_minimize_max_single_job():
    inst = Instance((Job("a", F(3), F(7, 2)),))
    assert minimize_max(inst, FLOW).value.exact == F(7, 2)
    assert minimize_max(inst, STRETCH).value.exact == 1


def test_minimize_max_stretch_two_jobs():
    inst = Instance((Job("a", F(0), F(1)), Job("b", F(0), F(3))))
    # orders: a-first gives stretches (1, 4/3); b-first gives (4, 1)
    res = minimize_max(inst, STRETCH)
    assert res.value.exact == F(4, 3)


def minmax_order_oracle(inst, measure):
    kind = ObjectiveKind(measure, NormExponent.infinity())
    ids = sorted(j.id for j in inst.jobs)
    best = None
    for order in itertools.permutations(ids):
        s = build_priority_schedule(inst, list(order))
        v = knorm(inst, s, kind).exact
        if best is None or v < best:
            best = v
    return best


def test_minimize_max_matches_order_oracle_randomized():
    rng = random.Random(202)
    for _ in range(25):
        inst = random_instance(rng, rng.randint(1, 5))
        for measure in (FLOW, STRETCH):
            assert minimize_max(inst, measure).value.exact == minmax_order_oracle(inst, measure)


def test_minimize_max_too_large():
    inst = Instance(tuple(Job(f"j{i}", F(0), F(1)) for i in range(13)))
    with pytest.raises(TooLarge):
        minimize_max(inst, FLOW)


def test_brute_force_single_job():
    inst = Instance((Job("a", F(1), F(2)),))
    res = brute_force_optimal(inst, FLOW2)
    assert res.value.exact == 4


def test_brute_force_two_jobs_flow1_and_flow2():
    inst = Instance((Job("long", F(0), F(4)), Job("short", F(1), F(1))))
    assert brute_force_optimal(inst, FLOW1).value.exact == 6
    assert brute_force_optimal(inst, FLOW2).value.exact == 26


def test_brute_force_permutation_invariant():
    jobs = (Job("a", F(0), F(3)), Job("b", F(1), F(1)), Job("c", F(2), F(2)))
    values = set()
    for perm in itertools.permutations(jobs):
        res = brute_force_optimal(Instance(perm), FLOW2)
        values.add(res.value.exact)
    assert len(values) == 1


def test_brute_force_matches_full_enumeration():
    rng = random.Random(303)
    for _ in range(20):
        inst = random_instance(rng, rng.randint(1, 5))
        res = brute_force_optimal(inst, FLOW2)
        assert res.value.exact == order_enumeration_min(inst, FLOW2)
        assert validate_schedule(inst, res.schedule) == []


def test_brute_force_fractional_exponent():
    inst = Instance((Job("a", F(0), F(1)), Job("b", F(0), F(2))))
    kind = ObjectiveKind(FLOW, NormExponent.fractional(F(1, 2)))
    res = brute_force_optimal(inst, kind)
    # short job first: flows 1 and 3, objective 1 + sqrt(3)
    enc = res.value.enclosure
    assert enc is not None
    assert (enc.lower - 1) ** 2 < 3 < (enc.upper - 1) ** 2


def test_brute_force_bound():
    inst = Instance(tuple(Job(f"j{i}", F(0), F(1)) for i in range(9)))
    with pytest.raises(TooLarge):
        brute_force_optimal(inst, FLOW2)
    # identical jobs collapse to a single canonical order, so raising the
    # bound leaves the search tiny
    res = brute_force_optimal(inst, FLOW2, bound=9)
    assert res.value.exact == sum(F(i) ** 2 for i in range(1, 10))
