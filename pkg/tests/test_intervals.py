import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trackmoves import oracle
from trackmoves.intervals import (
    BudgetExceeded,
    IntervalError,
    OrbitCountingProblem,
    Pairing,
    StructuralError,
    aht_complexity,
    apply_pairing,
    cleanup,
    count_orbits,
    euclid_problem,
    make_pairing,
    shifted_cycle,
    transmit_and_truncate,
)


def ocp(n, *pairings):
    return OrbitCountingProblem(n=n, pairings=tuple(pairings))


# ---------------------------------------------------------------------------
# Pairings


def test_apply_preserving():
    p = Pairing(0, 1, 4, 7, 10)
    assert apply_pairing(p, 2) == 8
    assert apply_pairing(p, 8) == 2


def test_apply_reversing_endpoints():
    p = Pairing(0, 1, 4, 7, 10, "reversing")
    assert apply_pairing(p, 1) == 10
    assert apply_pairing(p, 4) == 7
    assert apply_pairing(p, 10) == 1


def test_apply_euclid_pairing():
    # f: [1,b] -> [a+1,a+b] with (a,b)=(4,6) sends 3 to 7
    f = Pairing(0, 1, 6, 5, 10)
    assert apply_pairing(f, 3) == 7


def test_apply_out_of_domain():
    p = Pairing(0, 1, 4, 7, 10)
    with pytest.raises(IntervalError):
        apply_pairing(p, 5)


def test_pairing_validation():
    with pytest.raises(IntervalError):
        Pairing(0, 1, 4, 7, 11)  # widths differ
    with pytest.raises(IntervalError):
        Pairing(0, 7, 10, 1, 4)  # domain right of range
    with pytest.raises(IntervalError):
        Pairing(0, 0, 3, 4, 7)  # endpoint below 1
    q = make_pairing(0, 7, 10, 1, 4)  # normalised by the helper
    assert q.domain_lo == 1


def test_json_round_trip():
    problem = euclid_problem(4, 6)
    blob = problem.dumps()
    back = OrbitCountingProblem.from_json(json.loads(blob))
    assert back.dumps() == blob


# ---------------------------------------------------------------------------
# Cleanup


def test_cleanup_identity_then_contraction():
    # A single identity pairing on [1,5]: delete it, contract everything.
    p = Pairing(0, 1, 5, 1, 5)
    new, trace = cleanup(ocp(5, p))
    assert new.pairings == ()
    assert new.n == 0
    assert new.orbit_counter == 5
    assert trace.kinds() == ["delete_identity", "contraction"]


def test_cleanup_euclid_is_noop():
    problem = euclid_problem(4, 6)
    new, trace = cleanup(problem)
    assert new.pairings == problem.pairings
    assert trace.records == []


def test_cleanup_merger_two_periodic():
    # Periods 2 and 3 on overlapping periodic intervals, overlap width >= 5:
    # merged into one periodic pairing of period 1, hence a single orbit.
    g1 = Pairing(0, 1, 10, 3, 12)  # period 2, periodic interval [1,12]
    g2 = Pairing(1, 1, 9, 4, 12)  # period 3, periodic interval [1,12]
    problem = ocp(12, g1, g2)
    new, trace = cleanup(problem)
    assert "merger" in trace.kinds()
    assert len(new.pairings) == 1
    assert new.pairings[0].translation == 1
    assert oracle.brute_orbits(problem) == 1
    count, _ = count_orbits(problem)
    assert count == 1


def test_trimming_matches_oracle():
    # Reversing pairing with overlapping domain and range.
    p = Pairing(0, 2, 9, 5, 12, "reversing")
    problem = ocp(12, p)
    new, trace = cleanup(problem)
    assert "trimming" in trace.kinds()
    for q in new.pairings:
        assert not (q.orientation == "reversing" and q.overlaps())
    count, _ = count_orbits(problem)
    assert count == oracle.brute_orbits(problem)


# ---------------------------------------------------------------------------
# Transmission and truncation


def test_transmit_truncate_euclid_one_division_step():
    # One transmit+truncate turns the (4,6) problem into the (2,4) problem.
    problem = euclid_problem(4, 6)
    new, trace = transmit_and_truncate(problem)
    assert sorted(p.width for p in new.pairings) == [2, 4]
    assert new.n == 6
    kinds = trace.kinds()
    assert "transmission" in kinds and "truncation" in kinds


def test_transmit_truncate_single_pairing():
    # [1,3]->[4,6] on [1,6]: the whole range is a removable tail.
    problem = ocp(6, Pairing(0, 1, 3, 4, 6))
    assert oracle.brute_orbits(problem) == 3
    count, _ = count_orbits(problem)
    assert count == 3


def test_transmit_truncate_degenerate_width():
    # Width-0 identity pairing at the very end: truncation removes one point.
    problem = ocp(6, Pairing(0, 1, 5, 2, 6), Pairing(1, 6, 6, 6, 6))
    new, _ = transmit_and_truncate(ocp(6, Pairing(1, 6, 6, 6, 6)))
    assert new.n == 5
    assert new.pairings == ()


def test_no_maximal_pairing_error():
    with pytest.raises(StructuralError):
        transmit_and_truncate(ocp(10, Pairing(0, 1, 2, 4, 5)))


# ---------------------------------------------------------------------------
# Shifted cycles


def test_first_shifted_cycle_is_cleanup_only():
    problem = euclid_problem(4, 6)
    assert problem.fresh
    new, trace = shifted_cycle(problem)
    assert not new.fresh
    assert new.pairings == problem.pairings
    assert trace.records == []


def test_second_shifted_cycle_division_step():
    problem, _ = shifted_cycle(euclid_problem(4, 6))
    new, _ = shifted_cycle(problem)
    assert sorted(p.width for p in new.pairings) == [2, 4]


def test_shifted_cycle_terminal():
    problem = OrbitCountingProblem(n=7, pairings=(), fresh=True)
    count, _ = count_orbits(problem)
    assert count == 7


# ---------------------------------------------------------------------------
# Orbit counting vs gcd and vs the union-find oracle


@pytest.mark.parametrize("a,b", [(4, 6), (1, 1), (5, 5), (12, 18), (7, 11), (1, 100)])
def test_euclid_gcd(a, b):
    count, _ = count_orbits(euclid_problem(a, b))
    assert count == math.gcd(a, b)


def test_euclid_huge():
    a = 10**30
    b = 10**30 + 1
    count, traces = count_orbits(euclid_problem(a, b))
    assert count == 1
    assert len(traces) < 500


def test_division_step_structure_4_6():
    # The width multisets along the run follow Euclid: (4,6) -> (2,4) -> done.
    problem = euclid_problem(4, 6)
    seen = [sorted(p.width for p in problem.pairings)]
    while problem.pairings:
        problem, _ = shifted_cycle(problem)
        seen.append(sorted(p.width for p in problem.pairings))
    assert seen == [[4, 6], [4, 6], [2, 4], []]


def random_problem(rng, max_n=200, max_pairings=6):
    n = rng.randint(1, max_n)
    ps = []
    for i in range(rng.randint(0, max_pairings)):
        w = rng.randint(1, n)
        a = rng.randint(1, n - w + 1)
        c = rng.randint(1, n - w + 1)
        if a > c:
            a, c = c, a
        orientation = rng.choice(["preserving", "reversing"])
        ps.append(Pairing(i, a, a + w - 1, c, c + w - 1, orientation))
    return ocp(n, *ps)


def test_random_problems_match_oracle():
    rng = random.Random(1729)
    for _ in range(400):
        problem = random_problem(rng)
        count, _ = count_orbits(problem)
        assert count == oracle.brute_orbits(problem), problem.dumps()


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_orbit_count_matches_oracle_property(data):
    n = data.draw(st.integers(1, 120))
    k = data.draw(st.integers(0, 5))
    ps = []
    for i in range(k):
        w = data.draw(st.integers(1, n))
        a = data.draw(st.integers(1, n - w + 1))
        c = data.draw(st.integers(1, n - w + 1))
        if a > c:
            a, c = c, a
        orientation = data.draw(st.sampled_from(["preserving", "reversing"]))
        ps.append(Pairing(i, a, a + w - 1, c, c + w - 1, orientation))
    problem = ocp(n, *ps)
    count, _ = count_orbits(problem)
    assert count == oracle.brute_orbits(problem)


def test_step_orbit_preservation():
    # Each shifted cycle preserves (orbit count of problem) + counter.
    rng = random.Random(99)
    for _ in range(120):
        problem = random_problem(rng, max_n=120)
        expected = oracle.brute_orbits(problem)
        while problem.pairings:
            problem, _ = shifted_cycle(problem)
            assert oracle.brute_orbits(problem) == expected
        problem, _ = cleanup(problem)
        assert problem.orbit_counter == expected


def test_determinism():
    rng = random.Random(5)
    problem = random_problem(rng, max_n=500)
    count1, traces1 = count_orbits(problem)
    count2, traces2 = count_orbits(problem)
    assert count1 == count2
    assert [t.dumps() for t in traces1] == [t.dumps() for t in traces2]


# ---------------------------------------------------------------------------
# AHT-complexity


def test_complexity_euclid_value():
    rep = aht_complexity(euclid_problem(4, 6))
    assert rep.r == 2
    assert sorted(rep.z_list) == [4, 6]
    assert rep.z_tilde == 4
    assert abs(rep.value - (2 + 2 + math.log2(6) - 1)) < 1e-12


def test_complexity_single_width_one():
    problem = ocp(2, Pairing(0, 1, 1, 2, 2))
    rep = aht_complexity(problem)
    assert rep.value == 1.0


def test_complexity_undefined_without_pairings():
    with pytest.raises(StructuralError):
        aht_complexity(ocp(5))


def test_complexity_decrement_euclid():
    problem = euclid_problem(123456789, 987654321)
    problem, _ = shifted_cycle(problem)  # first cycle: cleanup only
    prev = aht_complexity(problem)
    while True:
        problem, _ = shifted_cycle(problem)
        if not problem.pairings:
            break
        cur = aht_complexity(problem)
        assert prev.decreased_by_at_least_one(cur)
        prev = cur


def test_budget_guard_configurable():
    with pytest.raises(BudgetExceeded):
        count_orbits(euclid_problem(10**9, 10**9 + 1), max_cycles=1)
