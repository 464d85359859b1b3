"""Brute-force reference implementations.

Everything here is deliberately simple and slow: explicit point-by-point or
segment-by-segment computation with caps on the input size.  The main engine
is certified against these at desk scale.  Nothing in this module calls into
the fast paths it is used to check.
"""

from __future__ import annotations


class CapExceeded(ValueError):
    """Input too large for a brute-force oracle."""


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        self.count -= 1
        return True


def brute_orbits(ocp, cap: int = 10**7) -> int:
    """Count orbits by uniting x with g(x) for every pairing and point."""
    if ocp.n > cap:
        raise CapExceeded(f"n={ocp.n} exceeds cap {cap}")
    uf = UnionFind(ocp.n + 1)  # index 0 unused
    for p in ocp.pairings:
        for x in range(p.domain_lo, p.domain_hi + 1):
            uf.union(x, p.apply(x))
        if p.orientation == "reversing":
            # The overlap region maps forward only; also unite the backward
            # images so partial periodic structures are fully joined.
            for x in range(p.range_lo, p.range_hi + 1):
                uf.union(x, p.reflection_sum - x)
    roots = {uf.find(x) for x in range(1, ocp.n + 1)}
    return len(roots) + ocp.orbit_counter


def expand_carried(track, cap: int = 10**5):
    """Literal expansion of the carried 1-complex, done point by point on the
    track's orbit counting problem rather than by the engine's strand-chain
    walk.  Returns (component_count, edge_count, component_label_multiset),
    each comparable with the engine's carried_complex output.

    Orbits of the interval problem are the carried complex's edges cut at
    base vertices; gluing the base-tie points to vertex tokens regroups them
    into components.  Every strand of a branch contributes that branch's
    labels once to its component.
    """
    from . import tracks as _t

    total = sum(b.weight for b in track.branches.values())
    total += sum(c.weight for c in track.stationary)
    if total > cap:
        raise CapExceeded(f"total weight {total} exceeds cap {cap}")
    ocp, lay = _t.build_ocp(track)
    n = ocp.n

    base_vertex_of = {}
    for kind, key, lo, hi in lay.ties:
        if kind == "base":
            for x in range(lo, hi + 1):
                base_vertex_of[x] = key[1]

    # Orbits without base gluing: the edges of the carried complex.
    edge_uf = UnionFind(n + 1)
    for p in ocp.pairings:
        for x in range(p.domain_lo, p.domain_hi + 1):
            edge_uf.union(x, p.apply(x))
    edge_roots = {edge_uf.find(x) for x in range(1, n + 1)}
    edge_count = len(edge_roots) + sum(c.weight for c in track.stationary)

    # Components: glue base-tie points to their vertex.
    tokens = {v: n + 1 + i for i, v in enumerate(sorted(track.base_vertices))}
    comp_uf = UnionFind(n + 1 + len(tokens))
    for p in ocp.pairings:
        for x in range(p.domain_lo, p.domain_hi + 1):
            comp_uf.union(x, p.apply(x))
    for x, v in base_vertex_of.items():
        comp_uf.union(x, tokens[v])
    comp_roots = {comp_uf.find(x) for x in range(1, n + 1)}
    comp_roots |= {comp_uf.find(t) for t in tokens.values()}
    component_count = len(comp_roots) + sum(c.weight for c in track.stationary)

    # Label vector per component: one branch-label contribution per strand.
    vectors = {root: {} for root in comp_roots}
    for p in ocp.pairings:
        labels = track.branches[p.id].labels
        for x in range(p.domain_lo, p.domain_hi + 1):
            vec = vectors[comp_uf.find(x)]
            for k, v in labels.items():
                vec[k] = vec.get(k, 0) + v
    out = [tuple(sorted((str(k), v) for k, v in vec.items()))
           for vec in vectors.values()]
    for c in track.stationary:
        vec = tuple(sorted((str(k), v) for k, v in c.labels.items()))
        out.extend([vec] * c.weight)
    return component_count, edge_count, tuple(sorted(out))


def bfs_distance(catalog: dict, a, b) -> int:
    """Exact distance in a precomputed move graph {state: [neighbours]}."""
    if a not in catalog or b not in catalog:
        raise KeyError("state not in catalog")
    if a == b:
        return 0
    from collections import deque

    seen = {a: 0}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        for y in catalog[x]:
            if y not in seen:
                seen[y] = seen[x] + 1
                if y == b:
                    return seen[y]
                queue.append(y)
    raise KeyError("states are in different components")


def build_move_catalog(start, neighbours, cap: int = 10**6) -> dict:
    """Breadth-first closure of a state under a move generator."""
    from collections import deque

    catalog = {}
    queue = deque([start])
    catalog[start] = None
    while queue:
        if len(catalog) > cap:
            raise CapExceeded("catalog cap exceeded")
        x = queue.popleft()
        ns = tuple(neighbours(x))
        catalog[x] = ns
        for y in ns:
            if y not in catalog:
                catalog[y] = None
                queue.append(y)
    return catalog


# ---------------------------------------------------------------------------
# Explicit curve tracing on triangulations


def trace_curve(T, coords, cap: int = 10**5):
    """Trace the multicurve with the given normal coordinates arc by arc.

    Returns (words, events): one passage word [(triangle, side_in, side_out)]
    per component, and per component the crossing events
    [(edge, exit_slot, position)] where events[i] is the crossing after
    passage i, `edge` is the sorted slot pair, and `position` counts from
    the exit side's corner (s+1).
    """
    from .coords import validate_normal, side_count

    bad = validate_normal(coords, T)
    if bad:
        raise ValueError("; ".join(bad))
    total = sum(coords.values())
    if total > cap:
        raise CapExceeded(f"l1 {total} exceeds cap {cap}")

    def passage_from(t, s, p):
        """Entering triangle t via side s at position p: the arc's type,
        exit side and exit position."""
        near = coords.get((t, (s + 1) % 3), 0)
        m = side_count(coords, t, s)
        assert 0 <= p < m
        if p < near:
            c = (s + 1) % 3
            depth = p
        else:
            c = (s + 2) % 3
            depth = m - 1 - p
        s_out = next(x for x in range(3) if x != c and x != s)
        m_out = side_count(coords, t, s_out)
        if c == (s_out + 1) % 3:
            p_out = depth
        else:
            p_out = m_out - 1 - depth
        return c, s_out, p_out

    visited = set()
    words, events = [], []
    starts = []
    for t in range(T.t):
        for s in range(3):
            for p in range(side_count(coords, t, s)):
                starts.append((t, s, p))
    def reverse_state(t, s, p):
        t2, s2 = T.gluing[(t, s)]
        m = side_count(coords, t, s)
        return (t2, s2, m - 1 - p)

    for start in starts:
        if start in visited:
            continue
        word, evs = [], []
        state = start
        while state not in visited:
            visited.add(state)
            visited.add(reverse_state(*state))
            t, s, p = state
            c, s_out, p_out = passage_from(t, s, p)
            word.append((t, s, s_out))
            t2, s2 = T.gluing[(t, s_out)]
            m = side_count(coords, t, s_out)
            edge = tuple(sorted(((t, s_out), (t2, s2))))
            evs.append((edge, (t, s_out), p_out))
            state = (t2, s2, m - 1 - p_out)
        words.append(word)
        events.append(evs)
    return words, events


def torus_winding(T, words, geometric_edges):
    """Total deck translation per component for a geometric torus model:
    geometric_edges maps a slot to a translation vector applied when the
    curve exits through that slot."""
    out = []
    for word in words:
        dx = dy = 0
        for (t, s_in, s_out) in word:
            v = geometric_edges.get((t, s_out))
            if v:
                dx += v[0]
                dy += v[1]
        out.append((dx, dy))
    return out


def _merged_heights(T, coords_g, coords_a, events_g, events_a):
    """Positions of every crossing event of the two curve systems in the two
    frames of its edge: gamma strands sit innermost within each type band.

    Returns height[("g"|"a", comp, idx)] = (edge, M1, M2).
    """
    from .coords import side_count

    def band_widths(slot):
        t, s = slot
        g1 = coords_g.get((t, (s + 1) % 3), 0)
        a1 = coords_a.get((t, (s + 1) % 3), 0)
        g2 = coords_g.get((t, (s + 2) % 3), 0)
        a2 = coords_a.get((t, (s + 2) % 3), 0)
        return g1, a1, g2, a2

    def merged(slot_frame, exit_slot, p, who):
        """Merged height in the frame of slot_frame for an event exiting
        `exit_slot` at per-curve position p."""
        coords_own = coords_g if who == "g" else coords_a
        t, s = exit_slot
        m_own = side_count(coords_own, t, s)
        # position in the frame slot's view
        if exit_slot == slot_frame:
            pos = p
        else:
            pos = m_own - 1 - p
            t, s = slot_frame
            m_own = side_count(coords_own, t, s)
        # band and depth in the frame slot's view
        near_own = coords_own.get((t, (s + 1) % 3), 0)
        g1, a1, g2, a2 = band_widths((t, s))
        if pos < near_own:
            depth = pos
            if who == "g":
                return depth
            return g1 + depth
        depth = m_own - 1 - pos
        base = g1 + a1
        if who == "a":
            return base + (a2 - 1 - depth)
        return base + a2 + (g2 - 1 - depth)

    heights = {}
    for who, events in (("g", events_g), ("a", events_a)):
        for ci, evs in enumerate(events):
            for i, (edge, exit_slot, p) in enumerate(evs):
                slot_a, slot_b = edge
                M1 = merged(slot_a, exit_slot, p, who)
                M2 = merged(slot_b, exit_slot, p, who)
                heights[(who, ci, i)] = (edge, M1, M2)
    return heights


def transverse_crossings(T, coords_g, coords_a):
    """Crossing pattern of the two multicurves in the standard transverse
    position (gamma innermost in every band; crossings happen in lenses
    around the edges where the two side orders conflict).

    Returns (words_g, words_a, crossings) with crossings a dict
    (gamma component, gap index) -> ordered list of alpha word indices,
    ordered along the gamma strand.
    """
    from .coords import side_count

    words_g, events_g = trace_curve(T, coords_g)
    words_a, events_a = trace_curve(T, coords_a)
    if len(words_a) != 1:
        raise ValueError("twisting curve must be connected")
    heights = _merged_heights(T, coords_g, coords_a, events_g, events_a)
    by_edge = {}
    for key, (edge, M1, M2) in heights.items():
        by_edge.setdefault(edge, []).append((key, M1, M2))
    crossings = {}
    for edge, items in by_edge.items():
        # Total strand count over the edge; the second frame measures from
        # the opposite end, so position x there is mtot-1-x in frame one.
        slot = edge[0]
        t, s = slot
        mtot = side_count(coords_g, t, s) + side_count(coords_a, t, s)
        gs = [(k, M1, M2) for (k, M1, M2) in items if k[0] == "g"]
        as_ = [(k, M1, M2) for (k, M1, M2) in items if k[0] == "a"]
        for (gk, gM1, gM2) in gs:
            hit = []
            for (ak, aM1, aM2) in as_:
                if (gM1 < aM1) == (gM2 < aM2):
                    hit.append((aM1, ak))
            if hit:
                hit.sort()
                if gM1 > mtot - 1 - gM2:
                    hit.reverse()
                crossings.setdefault((gk[1], gk[2]), []).extend(
                    ak[2] for _, ak in hit)
    return words_g, words_a, crossings


def twist_by_tracing(T, coords_g, coords_a, k, cap: int = 10**4):
    """T_alpha^k applied to gamma, computed verbatim: insert k copies of the
    alpha word at every transverse crossing, then tighten.  Desk scale."""
    from .coords import clean, tighten_word, word_coordinates

    coords_g = clean(coords_g)
    coords_a = clean(coords_a)
    if k == 0 or not coords_a or not coords_g:
        return dict(coords_g)
    words_g, words_a, crossings = transverse_crossings(T, coords_g, coords_a)
    alpha = words_a[0]
    n_cross = sum(len(v) for v in crossings.values())
    size = sum(len(w) for w in words_g) + abs(k) * n_cross * len(alpha)
    if size > 50 * cap:
        raise CapExceeded(f"twisted word of size {size} exceeds budget")

    def insert_block(j):
        """k copies of alpha based just after its crossing j (forward for
        k > 0, reversed for k < 0)."""
        rot = alpha[j + 1:] + alpha[: j + 1]
        if k > 0:
            return rot * k
        rev = [(t, so, si) for (t, si, so) in reversed(rot)]
        return rev * (-k)

    out_words = []
    for ci, word in enumerate(words_g):
        new = []
        for i, passage in enumerate(word):
            new.append(passage)
            for j in crossings.get((ci, i), []):
                new.extend(insert_block(j))
        out_words.append(new)
    result = {}
    for w in out_words:
        tight = tighten_word(T, w)
        for key, v in word_coordinates([tight]).items():
            result[key] = result.get(key, 0) + v
    return clean(result)
