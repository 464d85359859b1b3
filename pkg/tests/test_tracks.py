import math
import random

import pytest

from trackmoves import oracle
from trackmoves.intervals import count_orbits, shifted_cycle
from trackmoves.tracks import (
    BasedWeightedTrainTrack,
    BaseVertex,
    Branch,
    NotTwirlable,
    Switch,
    build_ocp,
    carried_complex,
    cusps_of_branch,
    fresh_cleanup,
    maximal_branch,
    split,
    track_shifted_cycle,
    twirl,
    unwind,
    unwind_length_bound,
)


def torus_track(a, b):
    """Two switches v=0, w=1 and three branches f (weight a), g (b),
    h (a+b): the track on the torus whose carried multicurve has gcd(a, b)
    components.  Pairings reproduce f(x)=x+a+2b, g(x)=x+b, h(x)=x+a+b."""
    f = Branch(0, a, {"f": 1})
    g = Branch(1, b, {"g": 1})
    h = Branch(2, a + b, {"h": 1})
    v = Switch(0, ([(2, 0)], [(0, 0), (1, 0)]))
    w = Switch(1, ([(1, 1), (0, 1)], [(2, 1)]))
    return BasedWeightedTrainTrack([f, g, h], [v, w])


def two_branch_track(a, b):
    """One switch carrying the division pair (a, b): branch 0 has weight a,
    branch 1 weight b; the weight-b branch's blocks overlap when a < b."""
    f = Branch(0, a, {"f": 1})
    g = Branch(1, b, {"g": 1})
    v = Switch(0, ([(0, 0), (1, 1)], [(1, 0), (0, 1)]))
    return BasedWeightedTrainTrack([f, g], [v])


def base_loop_track(w):
    """A single branch of weight w with both ends on one base vertex."""
    e = Branch(0, w, {"loop": 1})
    v = BaseVertex(0, [(0, 0), (0, 1)])
    return BasedWeightedTrainTrack([e], [], [v])


def signature(ocp):
    return tuple(sorted(
        (p.domain_lo, p.domain_hi, p.range_lo, p.range_hi, p.orientation)
        for p in ocp.pairings)) + (ocp.n,)


# ---------------------------------------------------------------------------
# Structure and validation


def test_torus_track_valid():
    assert torus_track(2, 3).validate() == []


def test_switch_condition_violation():
    t = torus_track(2, 3)
    t.branches[2].weight = 4
    assert any("switch condition" in p for p in t.validate())


def test_empty_track_valid():
    assert BasedWeightedTrainTrack().validate() == []


def test_json_round_trip():
    t = torus_track(4, 6)
    blob = t.dumps()
    back = BasedWeightedTrainTrack.from_json(__import__("json").loads(blob))
    assert back.dumps() == blob


# ---------------------------------------------------------------------------
# Orbit counting problems of tracks


def test_torus_ocp_matches_paper_pairings():
    a, b = 4, 6
    ocp, lay = build_ocp(torus_track(a, b))
    assert ocp.n == 2 * a + 2 * b
    by_id = {p.id: p for p in ocp.pairings}
    f, g, h = by_id[0], by_id[1], by_id[2]
    assert (f.domain_lo, f.domain_hi, f.range_lo, f.range_hi) == (1, a, a + 2 * b + 1, 2 * a + 2 * b)
    assert (g.domain_lo, g.domain_hi, g.range_lo, g.range_hi) == (a + 1, a + b, a + b + 1, a + 2 * b)
    assert (h.domain_lo, h.domain_hi, h.range_lo, h.range_hi) == (1, a + b, a + b + 1, 2 * a + 2 * b)
    assert all(p.orientation == "preserving" for p in (f, g, h))


@pytest.mark.parametrize("a,b", [(2, 4), (4, 6), (5, 7), (9, 12), (1, 1), (6, 6)])
def test_torus_orbit_count_is_gcd(a, b):
    ocp, _ = build_ocp(torus_track(a, b))
    count, _ = count_orbits(ocp)
    assert count == math.gcd(a, b)


def test_base_loop_ocp():
    w = 5
    ocp, _ = build_ocp(base_loop_track(w))
    assert ocp.n == 2 * w
    (p,) = ocp.pairings
    assert (p.domain_lo, p.domain_hi, p.range_lo, p.range_hi) == (1, w, w + 1, 2 * w)
    count, _ = count_orbits(ocp)
    assert count == w


def test_every_point_in_at_most_two_blocks():
    for track in (torus_track(3, 5), two_branch_track(2, 5), base_loop_track(4)):
        ocp, _ = build_ocp(track)
        cover = {}
        for p in ocp.pairings:
            for lo, hi in p.intervals():
                for x in range(lo, hi + 1):
                    cover[x] = cover.get(x, 0) + 1
        assert max(cover.values()) <= 2


# ---------------------------------------------------------------------------
# Carried complex and the expansion oracle


def test_carried_components_gcd():
    cc = carried_complex(torus_track(2, 4))
    assert cc.component_count == 2
    assert cc.edge_count() == 2  # two circles, no vertices


def test_carried_all_weights_one_is_underlying_complex():
    t = torus_track(1, 1)
    t.branches[2].weight = 2
    cc = carried_complex(t)
    # underlying complex: gcd(1,1)=1 closed curve through both switches
    assert cc.component_count == 1


def test_carried_base_loop_components():
    cc = carried_complex(base_loop_track(3))
    assert cc.edge_count() == 3
    assert len(cc.vertices) == 1
    assert cc.component_count == 1
    order = cc.vertex_cyclic[0]
    assert len(order) == 6  # 3 loops, 6 edge-ends around the vertex


def test_oracle_matches_engine_on_examples():
    for track in (torus_track(2, 4), torus_track(3, 5), two_branch_track(2, 5),
                  base_loop_track(4)):
        cc = carried_complex(track)
        comp, edges, vectors = oracle.expand_carried(track)
        assert comp == cc.component_count
        assert edges == cc.edge_count()
        assert vectors == cc.component_label_multiset()


# ---------------------------------------------------------------------------
# Splitting


def test_split_torus_track_2_3_5():
    t = torus_track(2, 3)
    # the weight-5 branch (id 2) has cusps at both switches
    cusps = cusps_of_branch(t, 2)
    assert len(cusps) == 2
    t2, move = split(t, 2, 0)
    assert move.kind == "split"
    assert sorted(b.weight for b in t2.branches.values()) == [2, 3]
    assert t2.validate() == []
    assert len(t2.switches) == 1


def test_split_preserves_carried_complex():
    rng = random.Random(7)
    stack = [torus_track(2, 3), torus_track(4, 6), two_branch_track(3, 7)]
    for _ in range(60):
        t = stack[rng.randrange(len(stack))]
        choices = [(bid, i) for bid in t.branches
                   for i in range(len(cusps_of_branch(t, bid)))]
        if not choices:
            continue
        bid, cusp = choices[rng.randrange(len(choices))]
        before = oracle.expand_carried(t)
        t2, _ = split(t, bid, cusp)
        assert t2.validate() == []
        after = oracle.expand_carried(t2)
        assert before == after
        assert len(t2.branches) <= len(t.branches)
        if t2.switches:
            stack.append(t2)


def test_split_branch_count_never_increases():
    t = torus_track(5, 8)
    for bid in list(t.branches):
        for cusp in range(len(cusps_of_branch(t, bid))):
            t2, _ = split(t, bid, cusp)
            assert len(t2.branches) <= len(t.branches)


# ---------------------------------------------------------------------------
# Twirling


def test_twirl_euclid_2_5():
    t = two_branch_track(2, 5)
    before = oracle.expand_carried(t)
    t2, move = twirl(t, 1)  # the weight-5 branch: overlapping loop
    assert move.kind == "twirl"
    assert move.twist_power == 2
    assert sorted(b.weight for b in t2.branches.values()) == [1, 2]
    assert t2.validate() == []
    assert oracle.expand_carried(t2) == before


def test_twirl_terminates_3_6():
    t = two_branch_track(3, 6)
    before = oracle.expand_carried(t)
    t2, move = twirl(t, 1)
    assert move.twist_power == 2
    assert not t2.switches
    assert sum(c.weight for c in t2.stationary) == 3
    assert oracle.expand_carried(t2) == before


def test_twirl_rejects_disjoint_branch():
    t = two_branch_track(2, 5)
    with pytest.raises(NotTwirlable):
        twirl(t, 0)  # weight-2 branch has disjoint end blocks


def test_twirl_rejects_non_loop():
    t = torus_track(2, 3)
    with pytest.raises(NotTwirlable):
        twirl(t, 2)


# ---------------------------------------------------------------------------
# Unwinding


def test_unwind_torus_4_6():
    t = torus_track(4, 6)
    moves, snapshots, final = unwind(t)
    assert final is not None
    assert final.component_count == 2  # gcd(4, 6)
    E, mu = 3, 20
    assert len(moves) <= unwind_length_bound(E, mu)
    # carried complex preserved at every move
    states = [oracle.expand_carried(s) for s in snapshots]
    assert all(s == states[0] for s in states)
    # branch count never increases
    counts = [len(s.branches) for s in snapshots]
    assert all(c2 <= c1 for c1, c2 in zip(counts, counts[1:]))


def test_unwind_kernel_lockstep():
    # The track-level cycles reproduce the kernel's problems interval for
    # interval, at every step.
    t = torus_track(4, 6)
    ocp, _ = build_ocp(t)
    cur = fresh_cleanup(t)
    kocp, _ = shifted_cycle(ocp)
    assert signature(build_ocp(cur)[0]) == signature(kocp)
    while cur.switches:
        cur, _ = track_shifted_cycle(cur)
        kocp, _ = shifted_cycle(kocp)
        assert signature(build_ocp(cur)[0]) == signature(kocp)


@pytest.mark.parametrize("a,b", [(2, 5), (3, 6), (12, 18), (37, 61), (13, 8)])
def test_unwind_two_branch_lockstep(a, b):
    t = two_branch_track(a, b)
    cur = fresh_cleanup(t)
    kocp, _ = shifted_cycle(build_ocp(t)[0])
    assert signature(build_ocp(cur)[0]) == signature(kocp)
    n = 0
    while cur.switches:
        cur, _ = track_shifted_cycle(cur)
        kocp, _ = shifted_cycle(kocp)
        assert signature(build_ocp(cur)[0]) == signature(kocp)
        n += 1
    assert sum(c.weight for c in cur.stationary) == math.gcd(a, b)


def test_unwind_huge_weights():
    a, b = 10**18, 10**18 + 3**7
    t = torus_track(a, b)
    moves, snapshots, final = unwind(t, expansion_cap=10**6)
    assert len(moves) <= unwind_length_bound(3, a + b + a + b)
    last = snapshots[-1]
    assert not last.switches
    total = last.total_weight() + sum(c.weight for c in last.stationary)
    assert total == math.gcd(a, b)


def test_unwind_complexity_decrement():
    from trackmoves.intervals import aht_complexity

    t = torus_track(123, 456)
    cur = fresh_cleanup(t)
    prev = aht_complexity(build_ocp(cur)[0])
    while cur.switches:
        cur, _ = track_shifted_cycle(cur)
        if not cur.branches and not cur.switches:
            break
        ocp = build_ocp(cur)[0]
        if not ocp.pairings:
            break
        rep = aht_complexity(ocp)
        assert prev.decreased_by_at_least_one(rep)
        prev = rep


def test_unwind_labels_give_final_coordinates():
    # Each component of the final complex carries the label totals of the
    # branches it traversed; totals over all components match the start.
    t = torus_track(4, 6)
    before = carried_complex(t).label_totals()
    _, snapshots, final = unwind(t)
    assert final.label_totals() == before
