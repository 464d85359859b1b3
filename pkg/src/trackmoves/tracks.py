"""Based integrally weighted train tracks.

A track is a 1-complex with two kinds of vertices.  At a *switch* there is a
tangent line; the branch ends approach from two sides, and each side carries
a top-to-bottom order.  A *base vertex* has no tangency: its branch ends sit
in a counterclockwise cyclic order around a small polygon.  Branches carry
positive integer weights satisfying the switch condition, plus a label
multiset recording the cells of an ambient decomposition the branch runs
through (used to read coordinates of the carried complex back off).

Conventions, fixed once and used everywhere:

  * every switch is drawn with side 0 to the west, side 1 to the east, and
    its tie interval vertical with the top to the north;
  * side lists are stored top to bottom;
  * base-vertex slots are stored counterclockwise, and the "top" of a slot's
    tie interval is the extreme adjacent to the *next* slot counterclockwise;
  * the surface is oriented, so a branch identifies the two sub-blocks of
    tie intervals at its ends either top-to-top ("straight") or
    top-to-bottom ("flipped"), and orientability forces
    flipped == (effective sides of the two ends are equal), where a base end
    counts as side 1.

The orbit counting problem of a track lays the base-slot tie intervals out
first along [1, M], then the switch tie intervals, each identified top to
low integer; one pairing per branch, with the branch's id.  The layout order
is carried with the track so that successive shifted cycles of the kernel
act on the evolved layout; that is what makes the complexity decrement hold
cycle by cycle.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

from .intervals import (
    OrbitCountingProblem,
    Pairing,
    make_pairing,
)

PRESERVING = "preserving"
REVERSING = "reversing"


class TrackError(ValueError):
    pass


class NotTwirlable(TrackError):
    """The branch does not satisfy the twirl preconditions."""

    def __init__(self, condition):
        super().__init__(condition)
        self.condition = condition


class ExpansionCapExceeded(ValueError):
    pass


class UnwindError(RuntimeError):
    pass


def add_labels(target: dict, source: dict, multiplier: int = 1):
    for k, v in source.items():
        new = target.get(k, 0) + v * multiplier
        if new:
            target[k] = new
        else:
            target.pop(k, None)


@dataclass
class Branch:
    id: int
    weight: int
    labels: dict = field(default_factory=dict)


@dataclass
class Switch:
    id: int
    sides: tuple  # (list of ends, list of ends), each top-to-bottom


@dataclass
class BaseVertex:
    id: int
    slots: list  # ends, counterclockwise


@dataclass
class StationaryCurve:
    """A family of `weight` parallel closed curves with no switches on them."""

    weight: int
    labels: dict = field(default_factory=dict)


@dataclass
class TrackMove:
    kind: str  # "split" | "twirl"
    branch: int
    count: int = 1  # number of elementary splits in a split move
    twist_power: int = 0  # m - 1 for a twirl
    meta: dict = field(default_factory=dict)

    def to_json(self):
        return {"kind": self.kind, "branch": self.branch, "count": self.count,
                "twist_power": str(self.twist_power),
                "meta": {k: str(v) for k, v in sorted(self.meta.items())}}


class BasedWeightedTrainTrack:
    def __init__(self, branches=(), switches=(), base_vertices=(),
                 stationary=(), switch_order=None, base_order=None):
        self.branches = {b.id: b for b in branches}
        self.switches = {s.id: s for s in switches}
        self.base_vertices = {v.id: v for v in base_vertices}
        self.stationary = list(stationary)
        self.switch_order = list(switch_order) if switch_order is not None \
            else sorted(self.switches)
        self.base_order = list(base_order) if base_order is not None \
            else sorted(self.base_vertices)
        self._next_branch = max(self.branches, default=-1) + 1
        self._next_switch = max(self.switches, default=-1) + 1

    # -- structure ---------------------------------------------------------

    def copy(self) -> "BasedWeightedTrainTrack":
        return copy.deepcopy(self)

    def new_branch_id(self) -> int:
        self._next_branch += 1
        return self._next_branch - 1

    def new_switch_id(self) -> int:
        self._next_switch += 1
        return self._next_switch - 1

    def site_of(self):
        """Map end -> ("switch", id, side, index) or ("base", id, slot_index)."""
        sites = {}
        for s in self.switches.values():
            for side in (0, 1):
                for i, end in enumerate(s.sides[side]):
                    sites[end] = ("switch", s.id, side, i)
        for v in self.base_vertices.values():
            for i, end in enumerate(v.slots):
                sites[end] = ("base", v.id, i)
        return sites

    def mu(self, switch_id: int) -> int:
        return sum(self.branches[b].weight for b, _ in self.switches[switch_id].sides[0])

    def total_weight(self) -> int:
        return sum(b.weight for b in self.branches.values())

    def effective_side(self, site) -> int:
        return site[2] if site[0] == "switch" else 1

    def flipped(self, branch_id: int, sites=None) -> bool:
        """True when the branch identifies its end blocks top-to-bottom."""
        sites = sites or self.site_of()
        s0 = sites[(branch_id, 0)]
        s1 = sites[(branch_id, 1)]
        return self.effective_side(s0) == self.effective_side(s1)

    def validate(self) -> list:
        problems = []
        sites = {}
        for s in self.switches.values():
            for side in (0, 1):
                if not s.sides[side]:
                    problems.append(f"switch {s.id}: side {side} is empty")
                for end in s.sides[side]:
                    if end in sites:
                        problems.append(f"end {end} attached twice")
                    sites[end] = s.id
            w0 = sum(self.branches[b].weight for b, _ in s.sides[0] if b in self.branches)
            w1 = sum(self.branches[b].weight for b, _ in s.sides[1] if b in self.branches)
            if w0 != w1:
                problems.append(f"switch {s.id}: switch condition fails ({w0} != {w1})")
        for v in self.base_vertices.values():
            for end in v.slots:
                if end in sites:
                    problems.append(f"end {end} attached twice")
                sites[end] = ("base", v.id)
        for b in self.branches.values():
            if b.weight < 1:
                problems.append(f"branch {b.id}: weight {b.weight} < 1")
            for which in (0, 1):
                if (b.id, which) not in sites:
                    problems.append(f"branch {b.id}: end {which} unattached")
        for end in sites:
            if end[0] not in self.branches:
                problems.append(f"end {end} references a missing branch")
        if sorted(self.switch_order) != sorted(self.switches):
            problems.append("switch_order is not a permutation of the switches")
        if sorted(self.base_order) != sorted(self.base_vertices):
            problems.append("base_order is not a permutation of the base vertices")
        for c in self.stationary:
            if c.weight < 1:
                problems.append("stationary curve with weight < 1")
        return problems

    # -- serialisation -----------------------------------------------------

    def to_json(self) -> dict:
        def labels_json(labels):
            return {str(k): str(v) for k, v in sorted(labels.items(), key=lambda kv: str(kv[0]))}

        return {
            "branches": [
                {"id": b.id, "weight": str(b.weight), "labels": labels_json(b.labels)}
                for b in sorted(self.branches.values(), key=lambda b: b.id)
            ],
            "switches": [
                {"id": s.id, "sides": [[list(e) for e in s.sides[0]],
                                       [list(e) for e in s.sides[1]]]}
                for s in sorted(self.switches.values(), key=lambda s: s.id)
            ],
            "base_vertices": [
                {"id": v.id, "slots": [list(e) for e in v.slots]}
                for v in sorted(self.base_vertices.values(), key=lambda v: v.id)
            ],
            "stationary": [
                {"weight": str(c.weight), "labels": labels_json(c.labels)}
                for c in self.stationary
            ],
            "switch_order": list(self.switch_order),
            "base_order": list(self.base_order),
        }

    @staticmethod
    def from_json(obj: dict) -> "BasedWeightedTrainTrack":
        branches = [Branch(b["id"], int(b["weight"]),
                           {k: int(v) for k, v in b.get("labels", {}).items()})
                    for b in obj["branches"]]
        switches = [Switch(s["id"], (
            [tuple(e) for e in s["sides"][0]], [tuple(e) for e in s["sides"][1]]))
            for s in obj["switches"]]
        bases = [BaseVertex(v["id"], [tuple(e) for e in v["slots"]])
                 for v in obj.get("base_vertices", [])]
        stationary = [StationaryCurve(int(c["weight"]),
                                      {k: int(v) for k, v in c.get("labels", {}).items()})
                      for c in obj.get("stationary", [])]
        return BasedWeightedTrainTrack(
            branches, switches, bases, stationary,
            switch_order=obj.get("switch_order"), base_order=obj.get("base_order"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# Layout: tie intervals and end blocks in [1, n]


@dataclass
class Layout:
    ties: list  # (kind, key, lo, hi) inclusive; key = ("base", v, slot) or ("switch", w)
    blocks: dict  # end -> (tie_key, lo, hi) inclusive
    n: int
    base_count: int  # base ties form the prefix [1, M]


def layout(track: BasedWeightedTrainTrack) -> Layout:
    ties = []
    blocks = {}
    pos = 1
    for vid in track.base_order:
        v = track.base_vertices[vid]
        for i, end in enumerate(v.slots):
            w = track.branches[end[0]].weight
            key = ("base", vid, i)
            ties.append(("base", key, pos, pos + w - 1))
            blocks[end] = (key, pos, pos + w - 1)
            pos += w
    base_count = len(ties)
    for wid in track.switch_order:
        s = track.switches[wid]
        muw = track.mu(wid)
        key = ("switch", wid)
        ties.append(("switch", key, pos, pos + muw - 1))
        for side in (0, 1):
            off = pos
            for end in s.sides[side]:
                w = track.branches[end[0]].weight
                blocks[end] = (key, off, off + w - 1)
                off += w
        pos += muw
    return Layout(ties, blocks, pos - 1, base_count)


def branch_pairing(track, lay: Layout, branch_id: int, sites=None) -> Pairing:
    b0, b1 = lay.blocks[(branch_id, 0)], lay.blocks[(branch_id, 1)]
    orientation = REVERSING if track.flipped(branch_id, sites) else PRESERVING
    return make_pairing(branch_id, b0[1], b0[2], b1[1], b1[2], orientation)


def build_ocp(track: BasedWeightedTrainTrack):
    """The orbit counting problem of the track plus its interval layout.

    Base-slot ties occupy the prefix [1, M]; every tie is identified top to
    low integer.  One pairing per branch.
    """
    lay = layout(track)
    sites = track.site_of()
    pairings = tuple(
        branch_pairing(track, lay, bid, sites) for bid in sorted(track.branches)
    )
    return OrbitCountingProblem(n=lay.n, pairings=pairings), lay


# ---------------------------------------------------------------------------
# Carried complex


@dataclass
class ComplexEdge:
    endpoints: tuple  # ((vertex, slot, pos), (vertex, slot, pos)) or (None, None)
    labels: dict
    weight: int = 1  # parallel multiplicity, for circle families


@dataclass
class ExplicitComplex:
    """The 1-complex carried by a track: vertices are the base vertices,
    edges are maximal strand chains, circles are vertex-free components."""

    vertices: list
    edges: list  # base-to-base chains
    circles: list  # ComplexEdge with endpoints (None, None)
    vertex_cyclic: dict  # vertex -> [(edge index, end 0|1)] counterclockwise

    @property
    def component_count(self) -> int:
        n = sum(c.weight for c in self.circles)
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for v in self.vertices:
            parent[("v", v)] = ("v", v)
        for i in range(len(self.edges)):
            parent[("e", i)] = ("e", i)
        for i, e in enumerate(self.edges):
            for endpoint in e.endpoints:
                a, b = find(("e", i)), find(("v", endpoint[0]))
                if a != b:
                    parent[a] = b
        roots = {find(k) for k in parent}
        return n + len(roots)

    def edge_count(self) -> int:
        return len(self.edges) + sum(c.weight for c in self.circles)

    def label_totals(self) -> dict:
        out = {}
        for e in self.edges:
            add_labels(out, e.labels)
        for c in self.circles:
            add_labels(out, c.labels, c.weight)
        return out

    def component_label_multiset(self):
        """Sorted tuple of per-component label vectors, circles counted with
        multiplicity.  Used for carried-complex comparisons across moves."""
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for v in self.vertices:
            parent[("v", v)] = ("v", v)
        for i in range(len(self.edges)):
            parent[("e", i)] = ("e", i)
        for i, e in enumerate(self.edges):
            for endpoint in e.endpoints:
                a, b = find(("e", i)), find(("v", endpoint[0]))
                if a != b:
                    parent[a] = b
        groups = {}
        for i, e in enumerate(self.edges):
            groups.setdefault(find(("e", i)), {})
            add_labels(groups[find(("e", i))], e.labels)
        out = [tuple(sorted((str(k), v) for k, v in g.items())) for g in groups.values()]
        for c in self.circles:
            vec = tuple(sorted((str(k), v) for k, v in c.labels.items()))
            out.extend([vec] * c.weight)
        return tuple(sorted(out))


class _StrandWorld:
    """Positions of individual strands: the scaffolding for expansion."""

    def __init__(self, track):
        self.track = track
        self.sites = track.site_of()
        self.strand_at = {}  # (switch, side, pos) -> (branch, strand, which)
        for s in track.switches.values():
            for side in (0, 1):
                off = 0
                for end in s.sides[side]:
                    bid, which = end
                    w = track.branches[bid].weight
                    for i in range(w):
                        strand = self.strand_from_top(bid, i, which)
                        self.strand_at[(s.id, side, off + i)] = (bid, strand, which)
                    off += w

    def strand_from_top(self, bid, pos_from_top, which):
        """Strand index (counted from the top at end 0) sitting at the given
        position from the top of the block at end `which`."""
        if which == 0 or not self.track.flipped(bid, self.sites):
            return pos_from_top
        return self.track.branches[bid].weight - 1 - pos_from_top

    def position_from_top(self, bid, strand, which):
        return self.strand_from_top(bid, strand, which)  # involution

    def step(self, bid, strand, which):
        """Exit strand (bid, strand) through end `which`.  Returns
        ("base", vertex, slot, pos) or ("strand", bid', strand', which')
        where which' is the end we entered the next strand through."""
        site = self.sites[(bid, which)]
        pos = self.position_from_top(bid, strand, which)
        if site[0] == "base":
            return ("base", site[1], site[2], pos)
        _, wid, side, idx = site
        s = self.track.switches[wid]
        off = sum(self.track.branches[e[0]].weight for e in s.sides[side][:idx])
        return ("strand",) + self.strand_at[(wid, 1 - side, off + pos)]


def carried_complex(track: BasedWeightedTrainTrack, cap: int = 10**5) -> ExplicitComplex:
    """Replace every branch by weight-many parallel strands, glue them in an
    order-preserving way at switches, and attach ends at base vertices."""
    total = track.total_weight() + sum(c.weight for c in track.stationary)
    if total > cap:
        raise ExpansionCapExceeded(f"total weight {total} exceeds cap {cap}")
    world = _StrandWorld(track)
    visited = set()  # (branch, strand)
    edges, circles = [], []

    def walk(bid, strand, which):
        """Traverse the chain leaving through (bid, strand, which).  Returns
        ("base", endpoint, labels) or ("circle", labels)."""
        labels = {}
        start = (bid, strand, which)
        while True:
            assert (bid, strand) not in visited
            visited.add((bid, strand))
            add_labels(labels, track.branches[bid].labels)
            nxt = world.step(bid, strand, which)
            if nxt[0] == "base":
                return ("base", (nxt[1], nxt[2], nxt[3]), labels)
            _, nbid, nstrand, nwhich = nxt
            if (nbid, nstrand, 1 - nwhich) == start:
                return ("circle", labels)
            bid, strand, which = nbid, nstrand, 1 - nwhich

    endpoint_edge = {}  # (vertex, slot, pos) -> (edge index, end)
    for vid in track.base_order:
        v = track.base_vertices[vid]
        for slot_idx, end in enumerate(v.slots):
            bid, which = end
            for pos in range(track.branches[bid].weight):
                strand = world.strand_from_top(bid, pos, which)
                if (bid, strand) in visited:
                    continue
                res = walk(bid, strand, 1 - which)
                assert res[0] == "base"
                _, far, labels = res
                idx = len(edges)
                near = (vid, slot_idx, pos)
                edges.append(ComplexEdge((near, far), labels))
                endpoint_edge[near] = (idx, 0)
                endpoint_edge[far] = (idx, 1)
    for bid in sorted(track.branches):
        for strand in range(track.branches[bid].weight):
            if (bid, strand) not in visited:
                res = walk(bid, strand, 1)
                assert res[0] == "circle"
                circles.append(ComplexEdge((None, None), res[1], 1))
    for c in track.stationary:
        circles.append(ComplexEdge((None, None), dict(c.labels), c.weight))

    vertex_cyclic = {}
    for vid in track.base_order:
        v = track.base_vertices[vid]
        order = []
        for slot_idx, end in enumerate(v.slots):
            w = track.branches[end[0]].weight
            # Counterclockwise within a slot runs bottom-to-top of its tie,
            # since the top faces the next slot counterclockwise.
            for pos in range(w - 1, -1, -1):
                order.append(endpoint_edge[(vid, slot_idx, pos)])
        vertex_cyclic[vid] = order
    return ExplicitComplex(list(track.base_vertices), edges, circles, vertex_cyclic)


# ---------------------------------------------------------------------------
# Elementary split


def _side_offsets(track, switch, side):
    """[(end, lo, hi)] with 0-based, hi-exclusive offsets within the tie."""
    out = []
    off = 0
    for end in switch.sides[side]:
        w = track.branches[end[0]].weight
        out.append((end, off, off + w))
        off += w
    return out


def cusps_of_branch(track: BasedWeightedTrainTrack, branch_id: int):
    """Cusps whose splitting leaf runs through this branch's rectangle:
    boundaries of the opposite side strictly inside one of its end blocks.
    Ordered end 0 first, then top to bottom within each end."""
    sites = track.site_of()
    out = []
    for which in (0, 1):
        site = sites[(branch_id, which)]
        if site[0] != "switch":
            continue
        _, wid, side, idx = site
        s = track.switches[wid]
        lo = sum(track.branches[e[0]].weight for e in s.sides[side][:idx])
        hi = lo + track.branches[branch_id].weight
        off = 0
        for i, end in enumerate(s.sides[1 - side][:-1]):
            off += track.branches[end[0]].weight
            if lo < off < hi:
                out.append((which, wid, 1 - side, i))
    return out


def split(track: BasedWeightedTrainTrack, branch_id: int, cusp: int):
    """Split along `branch_id` at its `cusp`-th cusp (see cusps_of_branch).

    Returns (new track, TrackMove).  Trivial switches created by the split
    are welded away, so the branch count never increases.
    """
    if branch_id not in track.branches:
        raise TrackError(f"no branch {branch_id}")
    cusps = cusps_of_branch(track, branch_id)
    if not 0 <= cusp < len(cusps):
        raise TrackError(f"branch {branch_id} has {len(cusps)} cusps; index {cusp} requested")
    _, wid, cusp_side, cusp_idx = cusps[cusp]
    new = track.copy()
    _split_at(new, wid, cusp_side, cusp_idx, weld="both")
    _absorb_closed_components(new)
    return new, TrackMove("split", branch_id, count=1)


def split_at_cusp(track, switch_id, side, cusp_idx):
    """Split at the cusp between slots cusp_idx and cusp_idx+1 of `side`.
    Degenerate (double-sided) cusps sever the switch in two."""
    new = track.copy()
    _split_at(new, switch_id, side, cusp_idx, weld="both")
    _absorb_closed_components(new)
    return new


def _split_at(track, switch_id, side, cusp_idx, weld):
    """In-place elementary split; `weld` is "both", "lower" or "none" and
    says which trivial switch pieces created by the severing get welded."""
    s = track.switches[switch_id]
    if not 0 <= cusp_idx < len(s.sides[side]) - 1:
        raise TrackError("cusp index out of range")
    h = sum(track.branches[e[0]].weight for e in s.sides[side][: cusp_idx + 1])

    covering = None
    degenerate = False
    for end, lo, hi in _side_offsets(track, s, 1 - side):
        if lo == h:
            degenerate = True
            break
        if lo < h < hi:
            covering = (end, lo, hi)
            break
    if not degenerate:
        assert covering is not None, "cusp not covered; switch condition broken"
        c_end, c_lo, c_hi = covering
        _cut_branch(track, c_end[0], c_end[1], h - c_lo)
    _sever_switch(track, switch_id, h, weld)


def _cut_branch(track, c_bid, near_which, rho):
    """Cut branch c_bid lengthwise: a top piece of rho strands (measured at
    the end `near_which`) and a bottom piece.  The top piece keeps the id.
    Returns (top_id, bottom_id)."""
    br = track.branches[c_bid]
    assert 0 < rho < br.weight
    flipped = track.flipped(c_bid)
    sites = track.site_of()
    far_site = sites[(c_bid, 1 - near_which)]

    top_id = c_bid
    bot_id = track.new_branch_id()
    top = Branch(top_id, rho, dict(br.labels))
    bot = Branch(bot_id, br.weight - rho, dict(br.labels))

    def replace(site, pieces):
        if site[0] == "switch":
            _, wid, sd, idx = site
            track.switches[wid].sides[sd][idx: idx + 1] = pieces
        else:
            _, vid, slot = site
            track.base_vertices[vid].slots[slot: slot + 1] = pieces

    # Far end first: the piece holding the far tie's top part is `top`
    # exactly when the branch is straight.
    if far_site[0] == "switch":
        far_pieces = [(top_id, 1 - near_which), (bot_id, 1 - near_which)]
        if flipped:
            far_pieces.reverse()
    else:
        # ccw slot lists place the slot nearest its tie's top later
        far_pieces = [(bot_id, 1 - near_which), (top_id, 1 - near_which)]
        if flipped:
            far_pieces.reverse()
    replace(far_site, far_pieces)

    near_site = track.site_of()[(c_bid, near_which)]
    track.branches[top_id] = top
    track.branches[bot_id] = bot
    replace(near_site, [(top_id, near_which), (bot_id, near_which)])
    return top_id, bot_id


def _sever_switch(track, switch_id, h, weld):
    """Cut the tie of `switch_id` at offset h.  Both sides must have a block
    boundary exactly at h.  The upper part keeps the switch id and its place
    in the layout order."""
    s = track.switches[switch_id]
    upper_sides, lower_sides = [], []
    for side in (0, 1):
        upper, lower = [], []
        for end, lo, hi in _side_offsets(track, s, side):
            if hi <= h:
                upper.append(end)
            else:
                assert lo >= h, "sever height cuts through a block"
                lower.append(end)
        upper_sides.append(upper)
        lower_sides.append(lower)
    assert all(upper_sides) and all(lower_sides), "sever leaves an empty part"
    s.sides = (upper_sides[0], upper_sides[1])
    lower_id = track.new_switch_id()
    track.switches[lower_id] = Switch(lower_id, (lower_sides[0], lower_sides[1]))
    track.switch_order.insert(track.switch_order.index(switch_id) + 1, lower_id)
    if weld in ("both", "lower"):
        _weld_if_trivial(track, lower_id)
    if weld == "both":
        _weld_if_trivial(track, switch_id)


def _weld_if_trivial(track, switch_id):
    """Remove a switch with a single end on each side, concatenating the two
    branches, or closing a loop into a stationary curve family."""
    s = track.switches.get(switch_id)
    if s is None or len(s.sides[0]) != 1 or len(s.sides[1]) != 1:
        return False
    (a_bid, a_which), (b_bid, b_which) = s.sides[0][0], s.sides[1][0]
    del track.switches[switch_id]
    track.switch_order.remove(switch_id)
    if a_bid == b_bid:
        br = track.branches.pop(a_bid)
        track.stationary.append(StationaryCurve(br.weight, dict(br.labels)))
        return True
    sites = track.site_of()
    x, y = track.branches.pop(a_bid), track.branches.pop(b_bid)
    assert x.weight == y.weight
    new_id = track.new_branch_id()
    labels = dict(x.labels)
    add_labels(labels, y.labels)
    track.branches[new_id] = Branch(new_id, x.weight, labels)

    def repoint(old_end, new_end):
        site = sites[old_end]
        if site[0] == "switch":
            _, wid, sd, idx = site
            track.switches[wid].sides[sd][idx] = new_end
        else:
            _, vid, slot = site
            track.base_vertices[vid].slots[slot] = new_end

    repoint((a_bid, 1 - a_which), (new_id, 0))
    repoint((b_bid, 1 - b_which), (new_id, 1))
    return True


def _absorb_closed_components(track):
    """Kernel cleanup on the track: branches whose two end blocks coincide
    positionally (straight) are families of closed curves crossing one tie;
    move them to the stationary part and drop emptied switches."""
    changed = True
    while changed:
        changed = False
        lay = layout(track)
        for bid in list(track.branches):
            b0, b1 = lay.blocks[(bid, 0)], lay.blocks[(bid, 1)]
            if b0 == b1 and not track.flipped(bid):
                br = track.branches.pop(bid)
                track.stationary.append(StationaryCurve(br.weight, dict(br.labels)))
                for s in track.switches.values():
                    for side in (0, 1):
                        s.sides[side][:] = [e for e in s.sides[side] if e[0] != bid]
                for wid in list(track.switches):
                    s = track.switches[wid]
                    if not s.sides[0] and not s.sides[1]:
                        del track.switches[wid]
                        track.switch_order.remove(wid)
                changed = True
                break


# ---------------------------------------------------------------------------
# Twirl


def twirl(track: BasedWeightedTrainTrack, branch_id: int):
    """Twirl along a branch joining a switch to itself whose two end blocks
    overlap.  Requires the lower block to reach the bottom of its tie, which
    is how every twirl arises from the orbit-counting kernel.

    Returns (new track, TrackMove) with twist_power = m - 1: the carried
    complex equals the one of the track twisted by that power of the Dehn
    twist along the branch's closure, then split along the branch.
    """
    if branch_id not in track.branches:
        raise NotTwirlable(f"no branch {branch_id}")
    new = track.copy()
    move = _twirl_inplace(new, branch_id)
    _absorb_closed_components(new)
    return new, move


def _twirl_inplace(track, branch_id):
    sites = track.site_of()
    s0, s1 = sites[(branch_id, 0)], sites[(branch_id, 1)]
    if s0[0] != "switch" or s1[0] != "switch" or s0[1] != s1[1]:
        raise NotTwirlable("branch is not a loop at a single non-base vertex")
    wid = s0[1]
    if s0[2] == s1[2]:
        raise NotTwirlable("branch returns to the same side of the tie interval")
    s = track.switches[wid]
    offs = {side: _side_offsets(track, s, side) for side in (0, 1)}
    block = {}
    for side in (0, 1):
        for end, lo, hi in offs[side]:
            if end[0] == branch_id:
                block[end[1]] = (side, lo, hi)
    mu = track.mu(wid)
    d_which = 0 if block[0][1] <= block[1][1] else 1
    d_side, a, b_excl = block[d_which]
    r_side, c, d_excl = block[1 - d_which]
    if d_excl != mu:
        raise NotTwirlable("lower end block does not reach the bottom of the tie")
    if c >= b_excl:
        raise NotTwirlable("end blocks are disjoint: use split")
    t = c - a
    if t == 0:
        raise NotTwirlable("end blocks coincide: a closed identity family, not a twirl")

    e_labels = dict(track.branches[branch_id].labels)
    transmitted = []  # (end, new_lo, new_hi_excl, r)
    for end, lo, hi in offs[d_side]:
        if end == (branch_id, d_which):
            continue
        if lo >= b_excl:
            r = (lo - c) // t + 1
            transmitted.append((end, lo - r * t, hi - r * t, r))
    assert transmitted, "twirl with nothing to transmit"
    assert sum(hi - lo for _, lo, hi, _ in transmitted) == t
    c_star = max([c] + [hi for _, _, hi, _ in transmitted])
    twist = min(r for _, _, _, r in transmitted)
    new_width = c_star - c

    for end, _, _, r in transmitted:
        add_labels(track.branches[end[0]].labels, e_labels, r)

    new_d_side = [end for end, lo, hi in offs[d_side] if hi <= a]
    if new_width > 0:
        new_d_side.append((branch_id, d_which))
    ordered = sorted(transmitted, key=lambda x: x[1])
    pos = a + new_width
    for end, lo, hi, _ in ordered:
        assert lo == pos, "transmitted blocks do not tile the domain block"
        pos = hi
    assert pos == c_star
    new_d_side.extend(end for end, _, _, _ in ordered)
    new_r_side = [end for end, lo, hi in offs[r_side] if hi <= c]
    if new_width > 0:
        new_r_side.append((branch_id, 1 - d_which))
        track.branches[branch_id].weight = new_width
    else:
        del track.branches[branch_id]
    sides = [None, None]
    sides[d_side] = new_d_side
    sides[r_side] = new_r_side
    s.sides = (sides[0], sides[1])
    meta = {"k": len(transmitted), "m": twist + 1,
            "extra_splits": sum(1 for _, _, _, r in transmitted if r > twist),
            "domain_at_top": int(a == 0)}
    return TrackMove("twirl", branch_id, count=0, twist_power=twist, meta=meta)


# ---------------------------------------------------------------------------
# Shifted cycles as track surgery, and the unwinding loop


def _bottom_blocks(track):
    """(switch id, (end, lo, hi) ending the tie on side 0, same on side 1)."""
    wid = track.switch_order[-1]
    s = track.switches[wid]
    return wid, _side_offsets(track, s, 0)[-1], _side_offsets(track, s, 1)[-1]


def maximal_branch(track):
    """Branch whose pairing is maximal in the current layout, and its switch."""
    wid, (e0, lo0, hi0), (e1, lo1, hi1) = _bottom_blocks(track)
    if e0[0] == e1[0]:
        return e0[0], wid
    w0, w1 = hi0 - lo0, hi1 - lo1
    if w0 != w1:
        return (e0[0] if w0 > w1 else e1[0]), wid
    return min(e0[0], e1[0]), wid


def track_shifted_cycle(track):
    """One non-fresh shifted cycle applied as track surgery.

    Returns (new track, TrackMove).  The move is a twirl when the maximal
    branch's end blocks overlap, otherwise a bundle of elementary splits
    along the maximal branch (the per-cycle transmissions, realised bottom-up
    as split-and-weld, with a final degenerate weld when the lowest remaining
    opposite block lines up with the maximal block's top).
    """
    if not track.switches:
        raise UnwindError("no switches: the active part is fully unwound")
    bid, wid = maximal_branch(track)
    lay = layout(track)
    pairing = branch_pairing(track, lay, bid)
    if pairing.orientation == PRESERVING and pairing.overlaps():
        return twirl(track, bid)

    new = track.copy()
    wid, b0, b1 = _bottom_blocks(new)
    # e's range block is the bottom block belonging to the maximal branch;
    # exactly one, since both belonging to it would make the blocks overlap.
    if b0[0][0] == bid:
        e_side, c_off = 0, b0[1]
    else:
        assert b1[0][0] == bid
        e_side, c_off = 1, b1[1]
    opp = 1 - e_side
    todo = sum(1 for _, lo, hi in _side_offsets(new, new.switches[wid], opp)
               if lo >= c_off)
    assert todo >= 1
    count = 0
    for _ in range(todo):
        wid2 = new.switch_order[-1]
        s2 = new.switches[wid2]
        blocks_opp = _side_offsets(new, s2, opp)
        end_b, lo_b, hi_b = blocks_opp[-1]
        if lo_b > c_off:
            idx = len(blocks_opp) - 1
            _split_at(new, wid2, opp, idx - 1, weld="lower")
            count += 1
        else:
            assert lo_b == c_off, "transmission count and block structure disagree"
            if len(blocks_opp) == 1:
                welded = _weld_if_trivial(new, wid2)
                assert welded, "expected a trivial switch at the end of the cycle"
            else:
                _sever_switch(new, wid2, c_off, weld="lower")
            count += 1
    _absorb_closed_components(new)
    return new, TrackMove("split", bid, count=count)


def fresh_cleanup(track):
    """The first shifted cycle: cleanup only (closed identity families are
    moved to the stationary part)."""
    new = track.copy()
    _absorb_closed_components(new)
    return new


def unwind_length_bound(E: int, total_weight: int) -> float:
    return 1 + E + E * math.log2(total_weight) if total_weight > 1 else 1 + E


def unwind(track: BasedWeightedTrainTrack, max_cycles=None, expansion_cap: int = 10**5):
    """Iterate shifted cycles until no switches remain.

    Returns (moves, snapshots, final): snapshots[i] is the track before
    moves[i], snapshots[-1] the fully unwound state; final is its carried
    complex when the expansion cap permits, else None.
    """
    E = len(track.branches)
    mu = max(1, track.total_weight())
    if max_cycles is None:
        max_cycles = 8 + 2 * int(unwind_length_bound(E, mu)) + 2 * E
    cur = fresh_cleanup(track)
    snapshots = [cur]
    moves = []
    while cur.switches:
        if len(moves) >= max_cycles:
            raise UnwindError("cycle budget exceeded; this should be impossible")
        cur, move = track_shifted_cycle(cur)
        bad = cur.validate()
        if bad:
            raise UnwindError(f"invalid track after {move}: {bad}")
        moves.append(move)
        snapshots.append(cur)
    final = None
    if cur.total_weight() + sum(c.weight for c in cur.stationary) <= expansion_cap:
        final = carried_complex(cur, cap=expansion_cap)
    return moves, snapshots, final


def final_edge_count(track: BasedWeightedTrainTrack) -> int:
    """Weighted edge count of a fully unwound track: what the orbit counter
    of the original problem adds up to."""
    if track.switches:
        raise UnwindError("track still has switches")
    return track.total_weight() + sum(c.weight for c in track.stationary)
