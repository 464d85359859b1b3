"""Normal coordinates of multicurves on triangulations, and their calculus.

A multicurve meets each triangle in arcs of three types; type (t, c) cuts
off corner c of triangle t and crosses the two sides adjacent to that
corner.  Coordinates are the per-type counts, stored as a dict
{(triangle, corner): count}; the global index of a type is 3*triangle +
corner.  Side s of a triangle is crossed by the types of its two endpoint
corners, and the counts on the two sides of an edge must agree.

Positions along a side are counted from its corner (s+1) end; arcs cutting
a corner cluster next to it, innermost first.  A gluing reverses positions
(the surface is oriented).

The module also squeezes coordinates into a based weighted train track
(labels are the arc types, so unwinding reads coordinates back off), and
computes the coordinate transforms under flips and Dehn twist powers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .surfaces import MoveIllegal, SurfaceError, Triangulation
from .tracks import BasedWeightedTrainTrack, Branch, Switch


class CoordinateError(ValueError):
    pass


def clean(coords: dict) -> dict:
    return {k: v for k, v in coords.items() if v}


def side_count(coords, tri, s):
    """Crossings of side s of triangle `tri`."""
    return coords.get((tri, (s + 1) % 3), 0) + coords.get((tri, (s + 2) % 3), 0)


def edge_counts(T: Triangulation, coords) -> dict:
    """Crossings per edge (keyed by the sorted slot pair)."""
    out = {}
    for a, b in T.edges():
        out[(a, b)] = side_count(coords, *a)
    return out


def validate_normal(coords, T: Triangulation) -> list:
    problems = []
    for (t, c), v in coords.items():
        if not (0 <= c < 3 and 0 <= t < T.t):
            problems.append(f"unknown arc type {(t, c)}")
        if v < 0:
            problems.append(f"negative count at {(t, c)}")
    for a, b in T.edges():
        if side_count(coords, *a) != side_count(coords, *b):
            problems.append(f"edge {a}~{b}: side counts disagree")
    return problems


@dataclass(frozen=True)
class ComplexityMeasures:
    l1: int
    bits: int


def dig(a: int) -> int:
    """Binary digits of a, the minus sign counting as an extra digit."""
    if a == 0:
        return 1
    return a.bit_length() + (1 if a < 0 else 0)


def measures(vec) -> ComplexityMeasures:
    vals = list(vec.values()) if isinstance(vec, dict) else list(vec)
    return ComplexityMeasures(
        l1=sum(abs(v) for v in vals), bits=sum(dig(v) for v in vals))


# ---------------------------------------------------------------------------
# Flip transform


def flip_update(coords, T: Triangulation, slot):
    """Normal coordinates of the same multicurve after flipping the edge in
    `slot`.  Exact for arbitrary (big integer) counts.

    Inside the square around the edge there are six families of arcs: four
    corner families (a1 at the apex of t1, a2 at the apex of t2, d1 and d2
    at the diagonal's endpoints) and two families of traversals (V and H),
    of which at most one is non-empty.  Re-reading the families against the
    other diagonal gives the flipped counts.
    """
    t1, s1 = slot
    t2, s2 = T.gluing[slot]
    if t1 == t2:
        raise MoveIllegal("edge is not interior to a square")
    A = coords.get((t1, (s1 + 1) % 3), 0)
    B = coords.get((t1, (s1 + 2) % 3), 0)
    C = coords.get((t2, (s2 + 1) % 3), 0)
    D = coords.get((t2, (s2 + 2) % 3), 0)
    a1 = coords.get((t1, s1), 0)
    a2 = coords.get((t2, s2), 0)
    if A + B != C + D:
        raise CoordinateError("coordinates are not edge-compatible at the flip")
    if A >= D:
        V, H = A - D, 0
        d1, d2 = D, B
    else:
        V, H = 0, D - A
        d1, d2 = A, C
    new = dict(coords)
    new[(t1, s1)] = d1
    new[(t1, (s1 + 1) % 3)] = a2 + H
    new[(t1, (s1 + 2) % 3)] = a1 + V
    new[(t2, s2)] = d2
    new[(t2, (s2 + 1) % 3)] = a1 + H
    new[(t2, (s2 + 2) % 3)] = a2 + V
    return clean(new)


# ---------------------------------------------------------------------------
# Squeezing coordinates into a based weighted train track


def arc_type_label(t, c):
    return 3 * t + c


def squeeze_triangulation(T: Triangulation, coords):
    """The weighted train track obtained by squeezing each family of
    parallel normal arcs to one branch, with one switch per crossed edge.

    Branch labels are the global arc-type indices, so the carried complex's
    per-component label vectors are its normal coordinates.
    """
    bad = validate_normal(coords, T)
    if bad:
        raise CoordinateError("; ".join(bad))
    coords = clean(coords)
    edges = T.edges()
    switch_of_slot = {}
    for i, (a, b) in enumerate(edges):
        switch_of_slot[a] = i
        switch_of_slot[b] = i
    branches = []
    branch_id = {}
    for (t, c), w in sorted(coords.items()):
        bid = len(branches)
        branch_id[(t, c)] = bid
        branches.append(Branch(bid, w, {arc_type_label(t, c): 1}))

    # Side 0 of the switch on an edge belongs to the smaller slot; positions
    # along the edge run from that slot's corner (s+1), and the gluing
    # reverses them, so the other slot's list is reversed.
    switches = []
    for i, (slot_a, slot_b) in enumerate(edges):
        sides = []
        for which, (t, s) in enumerate((slot_a, slot_b)):
            lst = []
            near = (t, (s + 1) % 3)  # arcs cutting corner s+1: positions first
            far = (t, (s + 2) % 3)
            if coords.get(near):
                lst.append((branch_id[near], 1))
            if coords.get(far):
                lst.append((branch_id[far], 0))
            if which == 1:
                lst.reverse()
            sides.append(lst)
        if sides[0] or sides[1]:
            switches.append(Switch(i, (sides[0], sides[1])))
    track = BasedWeightedTrainTrack(branches, switches)
    bad = track.validate()
    if bad:
        raise CoordinateError(f"squeeze produced an invalid track: {bad}")
    return track


def coordinates_from_labels(label_vector: dict) -> dict:
    """Inverse of the labelling: label counts back to arc-type coordinates."""
    out = {}
    for label, v in label_vector.items():
        label = int(label)
        out[(label // 3, label % 3)] = v
    return clean(out)


def component_count(T: Triangulation, coords) -> int:
    """Number of components of the multicurve, by orbit counting on the
    squeezed track (logarithmic in the weights)."""
    from .intervals import count_orbits
    from .tracks import build_ocp

    coords = clean(coords)
    if not coords:
        return 0
    ocp, _ = build_ocp(squeeze_triangulation(T, coords))
    n, _ = count_orbits(ocp)
    return n


def unwound_components(T: Triangulation, coords):
    """Per-component normal coordinates, by unwinding the squeezed track.

    Returns a list of (multiplicity, coords) pairs; parallel components are
    grouped.  Cost is polynomial in the number of arc types and log of the
    weights.
    """
    from .tracks import unwind

    coords = clean(coords)
    if not coords:
        return []
    track = squeeze_triangulation(T, coords)
    moves, snapshots, _ = unwind(track, expansion_cap=0)
    last = snapshots[-1]
    out = []
    for c in last.stationary:
        out.append((c.weight, coordinates_from_labels(c.labels)))
    for b in last.branches.values():
        out.append((b.weight, coordinates_from_labels(b.labels)))
    return out


# ---------------------------------------------------------------------------
# Dehn twists


def twist_update(coords_gamma, coords_alpha, k, T: Triangulation,
                 trace_cap: int = 10**4):
    """Normal coordinates of the k-th Dehn twist of gamma about the simple
    closed curve alpha.

    For |k| <= 2 the twist is computed verbatim by the tracing oracle's
    explicit twist construction at desk scale; larger powers use the exact
    affine stabilisation coords(T^k) = coords(T^(2 sgn k)) +
    (|k| - 2) * increment, whose validity is verified on the instance by
    checking the increment at powers 2, 3 and 4.
    """
    from . import oracle

    coords_gamma = clean(coords_gamma)
    coords_alpha = clean(coords_alpha)
    if k == 0 or not coords_alpha or not coords_gamma:
        return dict(coords_gamma)
    if component_count(T, coords_alpha) != 1:
        raise CoordinateError("twisting curve is not connected")

    def explicit(power):
        return oracle.twist_by_tracing(T, coords_gamma, coords_alpha, power,
                                       cap=trace_cap)

    sign = 1 if k > 0 else -1
    if abs(k) <= 4:
        return explicit(k)
    c2 = explicit(2 * sign)
    c3 = explicit(3 * sign)
    c4 = explicit(4 * sign)
    inc = {key: c3.get(key, 0) - c2.get(key, 0) for key in set(c2) | set(c3)}
    inc2 = {key: c4.get(key, 0) - c3.get(key, 0) for key in set(c3) | set(c4)}
    if clean(inc) != clean(inc2):
        raise CoordinateError("twist increments did not stabilise by power 4")
    out = dict(c4)
    for key, v in inc.items():
        out[key] = out.get(key, 0) + v * (abs(k) - 4)
    return clean(out)


# ---------------------------------------------------------------------------
# Curve words: explicit multicurves as cyclic sequences of triangle passages


def passage_type(t, s_in, s_out):
    """Arc type of a passage entering side s_in and leaving side s_out."""
    if s_in == s_out:
        raise CoordinateError("bouncing passage has no arc type")
    return (t, 3 - s_in - s_out)


def word_coordinates(words) -> dict:
    out = {}
    for word in words:
        for (t, s_in, s_out) in word:
            key = passage_type(t, s_in, s_out)
            out[key] = out.get(key, 0) + 1
    return out


def validate_word(T: Triangulation, word):
    for i, (t, s_in, s_out) in enumerate(word):
        nxt = word[(i + 1) % len(word)]
        if T.gluing[(t, s_out)] != (nxt[0], nxt[1]):
            raise CoordinateError(f"word not glued at position {i}")


def _merge_touches(word):
    """Merge consecutive passages lying in one triangle and meeting at a
    common side without crossing it (as twist insertions create); such a
    pair ..., (t, u, x), (t, x, w), ... is isotopic to the single chord
    (t, u, w).  Returns None when the whole word collapses."""
    changed = True
    while changed:
        changed = False
        n = len(word)
        if n == 0:
            return None
        for i in range(n):
            t, s_in, s_out = word[i]
            k = (i + 1) % n
            tn, nin, nout = word[k]
            if tn == t and nin == s_out:
                if k == i:
                    return None
                merged = (t, s_in, nout)
                new = [merged]
                idx = (k + 1) % n
                while idx != i:
                    new.append(word[idx])
                    idx = (idx + 1) % n
                word = new
                changed = True
                break
    return word


def tighten_word(T: Triangulation, word):
    """Normalise a closed passage word: merge same-triangle touches, then
    pull bouncing passages (entering and leaving through one side) across
    the adjacent edge, until every passage is a normal arc.  Returns the
    tightened word, empty for a curve that collapses (a contractible circle
    or one shrinking onto the vertex)."""
    word = _merge_touches(list(word))
    while word:
        n = len(word)
        bounce = next((i for i in range(n) if word[i][1] == word[i][2]), None)
        if bounce is None:
            return word
        if n == 1:
            return []
        i = bounce
        t, s, _ = word[i]
        j, k = (i - 1) % n, (i + 1) % n
        if j == k:
            return []
        tp, pin, pout = word[j]
        tn, nin, nout = word[k]
        assert (tp, pout) == T.gluing[(t, s)], "bounce neighbour not glued"
        assert (tn, nin) == T.gluing[(t, s)], "bounce neighbour not glued"
        assert tp == tn
        new = [(tp, pin, nout)]
        idx = (k + 1) % n
        while idx != j:
            new.append(word[idx])
            idx = (idx + 1) % n
        word = _merge_touches(new)
    return word or []
