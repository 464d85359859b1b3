"""Combinatorial surfaces: triangulations, polygonal decompositions, spines.

Everything lives on an oriented surface and is stored as a fat graph: a set
of half-edges with an involution pairing them into edges, and a
counterclockwise cyclic order of half-edges around each vertex.  Faces are
the orbits of the face permutation; the embedding is determined by the data.

A decomposition additionally tags each face with the topology of the
complementary region it bounds: its Euler characteristic and the surface
boundary components it contains.  Discs have chi 1, boundary collars and
free annuli chi 0, pairs of pants chi -1.  The moves (contraction,
expansion, adding or deleting a diagonal, edge swaps, Whitehead moves,
flips) update the tags locally.

Triangulations are stored separately as glued triangles, the form the flip
and normal-coordinate machinery wants; `dual_spine` converts to the fat
graph world and `spine_to_triangulation` back.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field


class SurfaceError(ValueError):
    pass


class MoveIllegal(SurfaceError):
    pass


# ---------------------------------------------------------------------------
# Fat graphs


@dataclass
class Region:
    chi: int
    boundary: tuple = ()  # indices of surface boundary circles inside


class FatGraph:
    """Half-edge fat graph.  Half-edges are integers; `opp` pairs them into
    edges; `cycles` lists them counterclockwise around each vertex."""

    def __init__(self, cycles, opp, regions=None, region_of=None):
        self.cycles = {v: list(hs) for v, hs in cycles.items()}
        self.opp = dict(opp)
        self.regions = dict(regions) if regions else {}
        self.region_of = dict(region_of) if region_of else {}
        self._check_basic()

    def _check_basic(self):
        seen = {}
        for v, hs in self.cycles.items():
            for h in hs:
                if h in seen:
                    raise SurfaceError(f"half-edge {h} at two vertices")
                seen[h] = v
        for h, k in self.opp.items():
            if h not in seen or k not in seen:
                raise SurfaceError("opp references an unattached half-edge")
            if self.opp.get(k) != h or h == k:
                raise SurfaceError("opp is not a fixed-point-free involution")
        if set(self.opp) != set(seen):
            raise SurfaceError("opp domain mismatch")
        self.vertex_of = seen

    def copy(self):
        return copy.deepcopy(self)

    def half_edges(self):
        return list(self.opp)

    def edges(self):
        return sorted({tuple(sorted((h, self.opp[h]))) for h in self.opp})

    def num_vertices(self):
        return len(self.cycles)

    def num_edges(self):
        return len(self.opp) // 2

    def euler_characteristic_graph(self):
        return self.num_vertices() - self.num_edges()

    def degree(self, v):
        return len(self.cycles[v])

    def next_at_vertex(self, h):
        cyc = self.cycles[self.vertex_of[h]]
        return cyc[(cyc.index(h) + 1) % len(cyc)]

    def prev_at_vertex(self, h):
        cyc = self.cycles[self.vertex_of[h]]
        return cyc[(cyc.index(h) - 1) % len(cyc)]

    def face_next(self, h):
        """The next directed half-edge of the face to the left of h (h points
        away from its vertex)."""
        return self.next_at_vertex(self.opp[h])

    def face_walks(self):
        """All face orbits as lists of half-edges."""
        seen = set()
        walks = []
        for h in sorted(self.opp):
            if h in seen:
                continue
            walk = []
            x = h
            while x not in seen:
                seen.add(x)
                walk.append(x)
                x = self.face_next(x)
            walks.append(walk)
        return walks

    def walk_of(self, h):
        walk = [h]
        x = self.face_next(h)
        while x != h:
            walk.append(x)
            x = self.face_next(x)
        return walk

    def surface_euler_characteristic(self):
        if not self.regions:
            raise SurfaceError("no region data")
        return self.euler_characteristic_graph() + sum(r.chi for r in self.regions.values())

    def set_disc_regions(self):
        """Tag every face as a disc (valid for one-vertex triangulations of
        closed surfaces and for spines of closed surfaces)."""
        self.regions = {}
        self.region_of = {}
        for i, walk in enumerate(self.face_walks()):
            self.regions[i] = Region(chi=1)
            for h in walk:
                self.region_of[h] = i
        return self

    def check_regions(self):
        problems = []
        walks = self.face_walks()
        for walk in walks:
            rs = {self.region_of.get(h) for h in walk}
            if len(rs) != 1 or None in rs:
                problems.append(f"face {walk} not covered by a single region")
        used = {self.region_of[h] for h in self.opp if h in self.region_of}
        if used != set(self.regions):
            problems.append("regions and region_of disagree")
        return problems

    # -- canonical form ----------------------------------------------------

    def canonical_code(self):
        """Lexicographically minimal traversal encoding; equal codes mean
        isomorphic fat graphs (same embedded 1-complex up to relabelling)."""
        best = None
        for root in sorted(self.opp):
            code = self._code_from(root)
            if best is None or code < best:
                best = code
        return best

    def _code_from(self, root):
        index = {root: 0}
        order = [root]
        code = []
        i = 0
        while i < len(order):
            h = order[i]
            i += 1
            # record the vertex cycle of h's vertex, rotated to start at h
            cyc = self.cycles[self.vertex_of[h]]
            k = cyc.index(h)
            rotated = cyc[k:] + cyc[:k]
            entry = []
            for x in rotated:
                o = self.opp[x]
                for y in (x, o):
                    if y not in index:
                        index[y] = len(order)
                        order.append(y)
                entry.append((index[x], index[self.opp[x]]))
            code.append(tuple(entry))
        return tuple(code)

    def canonical_hash(self):
        import hashlib

        blob = json.dumps(self.canonical_code()).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    # -- elementary surgery (regions updated locally) -----------------------

    def _new_half_edges(self, k):
        start = max(self.opp, default=-1) + 1
        return list(range(start, start + k))

    def _new_vertex(self):
        return max(self.cycles, default=-1) + 1

    def _new_region(self):
        return max(self.regions, default=-1) + 1

    def subdivide_edge(self, h):
        """Insert a degree-2 vertex in the edge of h.  Returns the new vertex."""
        o = self.opp[h]
        a, b = self._new_half_edges(2)
        v = self._new_vertex()
        # h keeps its vertex; its new partner is a; b partners o.
        self.cycles[v] = [a, b]
        self.opp[h] = a
        self.opp[a] = h
        self.opp[o] = b
        self.opp[b] = o
        self.vertex_of[a] = v
        self.vertex_of[b] = v
        if self.region_of:
            # region left of h gains nothing; new half-edges inherit
            self.region_of[a] = self.region_of[o]
            self.region_of[b] = self.region_of[h]
        return v

    def dissolve_vertex(self, v):
        """Remove a degree-2 vertex, merging its two edges."""
        if self.degree(v) != 2:
            raise MoveIllegal("dissolve needs a degree-2 vertex")
        a, b = self.cycles[v]
        ha, hb = self.opp[a], self.opp[b]
        if ha == b:
            raise MoveIllegal("cannot dissolve a vertex on a free loop")
        self.opp[ha] = hb
        self.opp[hb] = ha
        for h in (a, b):
            del self.opp[h]
            del self.vertex_of[h]
            self.region_of.pop(h, None)
        del self.cycles[v]

    def contract_edge(self, h):
        """Contract a non-loop edge, merging its endpoints."""
        o = self.opp[h]
        u, v = self.vertex_of[h], self.vertex_of[o]
        if u == v:
            raise MoveIllegal("cannot contract a loop")
        cu, cv = self.cycles[u], self.cycles[v]
        iu, iv = cu.index(h), cv.index(o)
        merged = cu[iu + 1:] + cu[:iu] + cv[iv + 1:] + cv[:iv]
        del self.cycles[v]
        self.cycles[u] = merged
        for x in merged:
            self.vertex_of[x] = u
        for x in (h, o):
            del self.opp[x]
            del self.vertex_of[x]
            self.region_of.pop(x, None)
        if not merged:
            del self.cycles[u]

    def expand_vertex(self, v, part):
        """Split vertex v: the half-edges in `part` (a contiguous arc of the
        cyclic order) move to a new vertex joined to v by a new edge.
        Returns the new edge's half-edge at v."""
        cyc = self.cycles[v]
        n = len(cyc)
        if not part:
            raise MoveIllegal("expansion part must be non-empty")
        start = cyc.index(part[0])
        if [cyc[(start + i) % n] for i in range(len(part))] != list(part):
            raise MoveIllegal("expansion part is not a contiguous arc")
        rest = [cyc[(start + len(part) + i) % n] for i in range(n - len(part))]
        if len(part) == n:
            raise MoveIllegal("expansion must leave something at the old vertex")
        a, b = self._new_half_edges(2)
        w = self._new_vertex()
        self.cycles[v] = [a] + rest
        self.cycles[w] = [b] + list(part)
        self.opp[a] = b
        self.opp[b] = a
        self.vertex_of[a] = v
        self.vertex_of[b] = w
        for x in part:
            self.vertex_of[x] = w
        if self.region_of:
            # the walk through a continues into part[0]; through b into rest[0]
            self.region_of[a] = self.region_of[part[0]]
            self.region_of[b] = self.region_of[rest[0]]
        return a

    def add_edge_same_walk(self, h1, h2, chi_split=None, boundary_split=None):
        """Add an edge inside the region left of h1 (= left of h2), attached
        at the corners just after h1 and just after h2 along the face walk.

        The region splits in two when both corners lie on the same boundary
        walk.  For a disc both pieces are discs; otherwise the caller says
        how chi and contained boundary circles distribute via chi_split
        = (chi_first, chi_second) and boundary_split.  Returns the new
        half-edge on the walk section starting after h1.
        """
        r = self.region_of[h1]
        if self.region_of.get(h2) != r:
            raise MoveIllegal("corners lie in different regions")
        walk = self.walk_of(h1)
        if h2 not in walk:
            return self._add_edge_joining_walks(h1, h2)
        if h1 == h2:
            raise MoveIllegal("degenerate corner pair")
        a, b = self._new_half_edges(2)
        # attach a at the corner after h1: between opp(h1)... the corner after
        # h1 in the face walk sits at vertex_of(face_next(h1)), between
        # opp(h1) and face_next(h1) in the vertex cycle.
        self._insert_corner(h1, a)
        self._insert_corner(h2, b)
        self.opp[a] = b
        self.opp[b] = a
        # new walks: a side goes with the section after h2; b side after h1
        region = self.regions[r]
        walk_a = self.walk_of(a)
        walk_b = self.walk_of(b)
        if region.chi == 1 and not region.boundary:
            ra, rb = Region(1), Region(1)
        else:
            if chi_split is None:
                raise MoveIllegal("need chi_split for a non-disc region")
            ra = Region(chi_split[0], tuple((boundary_split or ((), ()))[0]))
            rb = Region(chi_split[1], tuple((boundary_split or ((), ()))[1]))
            if ra.chi + rb.chi != region.chi + 1:
                raise MoveIllegal("chi_split does not add up")
        new_a, new_b = self._new_region(), None
        self.regions[new_a] = ra
        for x in walk_a:
            self.region_of[x] = new_a
        new_b = self._new_region()
        self.regions[new_b] = rb
        for x in walk_b:
            self.region_of[x] = new_b
        del self.regions[r]
        return a

    def _add_edge_joining_walks(self, h1, h2):
        """Add an edge between corners on two different boundary walks of the
        same region: the walks merge and the region's chi rises by one."""
        r = self.region_of[h1]
        a, b = self._new_half_edges(2)
        self._insert_corner(h1, a)
        self._insert_corner(h2, b)
        self.opp[a] = b
        self.opp[b] = a
        self.regions[r] = Region(self.regions[r].chi + 1, self.regions[r].boundary)
        for x in self.walk_of(a):
            self.region_of[x] = r
        return a

    def _insert_corner(self, h, new_h):
        """Attach new_h at the corner the face walk turns through after h:
        at vertex_of(face_next(h)), counterclockwise between opp(h) and
        face_next(h)."""
        o = self.opp[h]
        v = self.vertex_of[o]
        cyc = self.cycles[v]
        self.cycles[v] = cyc[: cyc.index(o) + 1] + [new_h] + cyc[cyc.index(o) + 1:]
        self.vertex_of[new_h] = v

    def delete_edge(self, h, merged_region=None):
        """Delete the edge of h, merging the regions on its two sides.
        merged_region optionally prescribes the new Region; by default the
        two old regions' chis add minus one (minus one from the old chi for
        a self-merge) and boundaries union."""
        o = self.opp[h]
        r1, r2 = self.region_of[h], self.region_of[o]
        u, v = self.vertex_of[h], self.vertex_of[o]
        for x, vv in ((h, u), (o, v)):
            self.cycles[vv].remove(x)
            del self.opp[x]
            del self.vertex_of[x]
            del self.region_of[x]
        for vv in {u, v}:
            if vv in self.cycles and not self.cycles[vv]:
                del self.cycles[vv]
        if merged_region is None:
            if r1 == r2:
                merged_region = Region(self.regions[r1].chi - 1, self.regions[r1].boundary)
            else:
                merged_region = Region(
                    self.regions[r1].chi + self.regions[r2].chi - 1,
                    tuple(sorted(set(self.regions[r1].boundary) | set(self.regions[r2].boundary))))
        rid = self._new_region()
        for r in {r1, r2}:
            del self.regions[r]
        self.regions[rid] = merged_region
        for walk in self.face_walks():
            tags = {self.region_of.get(x) for x in walk} - {None}
            if not tags or tags & {r1, r2}:
                for x in walk:
                    self.region_of[x] = rid
            elif len(tags) > 1:
                raise SurfaceError("deletion confused unrelated regions")
        return rid


# ---------------------------------------------------------------------------
# Triangulations as glued triangles


ONE_VERTEX = "one_vertex_closed"
IDEAL = "ideal"


class Triangulation:
    """Glued oriented triangles.

    Triangle i has corners 0, 1, 2 counterclockwise and side k opposite
    corner k, joining corners k+1 and k+2.  `gluing` matches the slots
    (triangle, side) in pairs; on an oriented surface a gluing identifies
    side endpoints reversingly: corner s+1 of one slot meets corner s'+2 of
    the other.
    """

    def __init__(self, num_triangles, gluing, kind=ONE_VERTEX):
        self.t = num_triangles
        self.gluing = dict(gluing)
        for a, b in list(self.gluing.items()):
            self.gluing[b] = a
        self.kind = kind
        self._check()

    def _check(self):
        slots = {(i, s) for i in range(self.t) for s in range(3)}
        if set(self.gluing) != slots:
            raise SurfaceError("gluing must cover every (triangle, side) slot")
        for a, b in self.gluing.items():
            if a == b:
                raise SurfaceError(f"slot {a} glued to itself")
            if self.gluing[b] != a:
                raise SurfaceError("gluing is not an involution")
        if self.kind == ONE_VERTEX and len(self.vertex_classes()) != 1:
            raise SurfaceError("not a one-vertex triangulation")

    def copy(self):
        return Triangulation(self.t, dict(self.gluing), self.kind)

    def edges(self):
        return sorted({tuple(sorted((a, self.gluing[a]))) for a in self.gluing})

    def edge_of_slot(self):
        index = {}
        for i, e in enumerate(self.edges()):
            index[e[0]] = i
            index[e[1]] = i
        return index

    def num_edges(self):
        return 3 * self.t // 2

    def corner_next(self, tri, corner):
        """Next corner counterclockwise around the vertex at this corner."""
        s = (corner + 1) % 3
        t2, s2 = self.gluing[(tri, s)]
        return (t2, (s2 + 1) % 3)

    def vertex_classes(self):
        corners = {(i, c) for i in range(self.t) for c in range(3)}
        classes = []
        seen = set()
        for start in sorted(corners):
            if start in seen:
                continue
            cls = []
            x = start
            while x not in seen:
                seen.add(x)
                cls.append(x)
                x = self.corner_next(*x)
            classes.append(cls)
        return classes

    def euler_characteristic(self):
        if self.kind == ONE_VERTEX:
            return len(self.vertex_classes()) - self.num_edges() + self.t
        return self.t - self.num_edges()  # ideal vertices are not counted

    def genus(self):
        chi = self.euler_characteristic()
        if self.kind == ONE_VERTEX:
            return (2 - chi) // 2
        b = len(self.vertex_classes())
        return (2 - b - chi) // 2

    def is_flippable(self, slot):
        t2, _ = self.gluing[slot]
        return slot[0] != t2

    def flip(self, slot):
        """Flip the edge through `slot`.  Returns a new triangulation; the
        diagonal stays in the same pair of slots.

        The square around the edge, counterclockwise from the apex of the
        slot's triangle:

                 apex1
                /  |  \\
          s1+1 /   |   \\ s1+2
              /    |e   \\
             Q'    |     P'
              \\   |    /
          s2+2 \\  |   / s2+1
                \\ |  /
                 apex2
        """
        t1, s1 = slot
        t2, s2 = self.gluing[slot]
        if t1 == t2:
            raise MoveIllegal("edge is not interior to a simplicial square")
        g = dict(self.gluing)
        relabel = {
            (t1, (s1 + 2) % 3): (t1, (s1 + 1) % 3),
            (t2, (s2 + 1) % 3): (t1, (s1 + 2) % 3),
            (t2, (s2 + 2) % 3): (t2, (s2 + 1) % 3),
            (t1, (s1 + 1) % 3): (t2, (s2 + 2) % 3),
        }
        new = {}
        for a, b in g.items():
            na = relabel.get(a, a)
            nb = relabel.get(b, b)
            new[na] = nb
            new[nb] = na
        new[(t1, s1)] = (t2, s2)
        new[(t2, s2)] = (t1, s1)
        return Triangulation(self.t, new, self.kind)

    def to_json(self):
        pairs = []
        for a, b in self.edges():
            pairs.append([list(a), list(b)])
        return {"kind": self.kind, "triangles": self.t, "gluings": pairs}

    @staticmethod
    def from_json(obj):
        gluing = {}
        for a, b in obj["gluings"]:
            gluing[tuple(a)] = tuple(b)
        return Triangulation(obj["triangles"], gluing, obj.get("kind", ONE_VERTEX))

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    # -- duality -----------------------------------------------------------

    def dual_spine(self):
        """The trivalent spine dual to the triangulation: one vertex per
        triangle, one edge per gluing pair, cyclic order from orientation."""
        cycles = {}
        opp = {}
        hid = {}
        for i in range(self.t):
            cycles[i] = []
            for s in range(3):
                hid[(i, s)] = 3 * i + s
                cycles[i].append(3 * i + s)
        for a, b in self.gluing.items():
            opp[hid[a]] = hid[b]
        fg = FatGraph(cycles, opp)
        fg.set_disc_regions()
        return fg


def spine_to_triangulation(spine: FatGraph, kind=ONE_VERTEX):
    """Inverse of dual_spine for trivalent spines: triangle per vertex."""
    verts = sorted(spine.cycles)
    if any(spine.degree(v) != 3 for v in verts):
        raise SurfaceError("spine is not trivalent")
    index = {v: i for i, v in enumerate(verts)}
    slot = {}
    for v in verts:
        for k, h in enumerate(spine.cycles[v]):
            slot[h] = (index[v], k)
    gluing = {}
    for h, o in spine.opp.items():
        gluing[slot[h]] = slot[o]
    return Triangulation(len(verts), gluing, kind)


def euler_characteristic(x):
    if isinstance(x, Triangulation):
        return x.euler_characteristic()
    if isinstance(x, FatGraph):
        return x.surface_euler_characteristic()
    raise SurfaceError(f"no Euler characteristic for {type(x)}")


# ---------------------------------------------------------------------------
# Spines and their moves


def is_spine(fg: FatGraph, closed=True):
    """A spine of a closed surface has a single complementary disc; with
    boundary, every region is a boundary collar."""
    if fg.check_regions():
        return False
    if closed:
        return len(fg.regions) == 1 and all(
            r.chi == 1 and not r.boundary for r in fg.regions.values())
    return all(r.chi == 0 and len(r.boundary) == 1 for r in fg.regions.values())


def whitehead_move(spine: FatGraph, h):
    """Whitehead move on the edge of half-edge h: contract it and re-expand
    the other way.  Needs trivalent endpoints and distinct ends.

        a   d            a   d
         \\ /              \\ |
          |        ->       |
         / \\              | \\
        b   c            b   c
    """
    o = spine.opp[h]
    u, v = spine.vertex_of[h], spine.vertex_of[o]
    if u == v:
        raise MoveIllegal("edge ends at a single vertex")
    if spine.degree(u) != 3 or spine.degree(v) != 3:
        raise MoveIllegal("whitehead move needs trivalent endpoints")
    new = spine.copy()
    cu = new.cycles[u]
    cv = new.cycles[v]
    iu, iv = cu.index(h), cv.index(o)
    a, b = cu[(iu + 1) % 3], cu[(iu + 2) % 3]
    c, d = cv[(iv + 1) % 3], cv[(iv + 2) % 3]
    new.cycles[u] = [h, b, c]
    new.cycles[v] = [o, d, a]
    new.vertex_of[c] = u
    new.vertex_of[a] = v
    if new.region_of:
        retag_after_homeomorphic_move(new, spine.region_of, {h, o})
    return new


def retag_after_homeomorphic_move(fg, old_region_of, moved):
    """Recompute region_of after a move that deformed walks only near the
    half-edges in `moved` without changing the regions themselves.  Every
    new walk is identified by the old tags of its unmoved half-edges;
    walks consisting only of moved half-edges are matched by elimination.
    """
    walks = fg.face_walks()
    if len(walks) != len(fg.regions):
        raise SurfaceError("move changed the number of regions")
    assigned = {}
    unknown = []
    for i, walk in enumerate(walks):
        tags = {old_region_of[x] for x in walk if x in old_region_of and x not in moved}
        if len(tags) > 1:
            raise SurfaceError("move merged regions; cannot retag")
        if tags:
            assigned[i] = tags.pop()
        else:
            unknown.append(i)
    leftover = sorted(set(fg.regions) - set(assigned.values()))
    if len(unknown) != len(leftover) or len(set(assigned.values())) != len(assigned):
        raise SurfaceError("ambiguous region retagging")
    for i, rid in zip(unknown, leftover):
        assigned[i] = rid
    fg.region_of = {}
    for i, walk in enumerate(walks):
        for x in walk:
            fg.region_of[x] = assigned[i]


def add_arc_in_disc(fg: FatGraph, corner1, corner2, modes=("edge", "edge")):
    """Insert a new edge inside the disc region left of both corners.

    A corner is a directed half-edge of the region's walk; the arc attaches
    just after it: on the interior of the next walk edge (mode "edge",
    creating a subdivision vertex) or at the corner's vertex itself (mode
    "vertex").  The disc splits into two discs.  Returns (graph, new
    half-edge after corner1).
    """
    new = fg.copy()
    r = new.region_of.get(corner1)
    if new.region_of.get(corner2) != r:
        raise MoveIllegal("corners lie in different regions")
    if new.regions[r].chi != 1:
        raise MoveIllegal("arc insertion implemented for disc regions only")
    if corner1 == corner2 and modes[0] == modes[1] == "vertex":
        raise MoveIllegal("need two distinct attachment corners")
    attach = []
    for c, mode in zip((corner1, corner2), modes):
        if mode == "edge":
            host = new.face_next(c)
            v = new.subdivide_edge(host)
            attach.append((v, new.opp[host]))
        else:
            nxt = new.face_next(c)
            attach.append((new.vertex_of[nxt], new.opp[c]))
    a, b = new._new_half_edges(2)
    for (v, p), nh in zip(attach, (a, b)):
        cyc = new.cycles[v]
        i = cyc.index(p)
        new.cycles[v] = cyc[: i + 1] + [nh] + cyc[i + 1:]
        new.vertex_of[nh] = v
    new.opp[a] = b
    new.opp[b] = a
    ra = new._new_region()
    new.regions[ra] = Region(1)
    for x in new.walk_of(a):
        new.region_of[x] = ra
    rb = new._new_region()
    new.regions[rb] = Region(1)
    for x in new.walk_of(b):
        new.region_of[x] = rb
    del new.regions[r]
    return new, a


def edge_swap(spine: FatGraph, h, corner1, corner2, modes=("edge", "edge"),
              smooth_result=False):
    """Replace the edge of h by an arc in the complementary disc, attached at
    the corners just after corner1 and corner2 on the disc's walk.

    Implemented for spines of closed surfaces (single disc region).  The
    legality condition of an edge swap is checked after inserting the arc:
    the two sides of h must lie in distinct regions.  Subdivision points stay
    as vertices of the new 1-complex unless smooth_result is set.
    """
    new, _ = add_arc_in_disc(spine, corner1, corner2, modes)
    if h not in new.opp:
        raise MoveIllegal("the removed edge was subdivided away")
    o = new.opp[h]
    if new.region_of[h] == new.region_of[o]:
        raise MoveIllegal("swapped edge has the same region on both sides")
    u, v = new.vertex_of[h], new.vertex_of[o]
    new.delete_edge(h)
    if smooth_result:
        for vv in {u, v}:
            if vv in new.cycles and new.degree(vv) == 2:
                x, y = new.cycles[vv]
                if new.opp[x] != y:
                    new.dissolve_vertex(vv)
    if len(new.face_walks()) != 1:
        raise MoveIllegal("result is not a spine: complement is not one disc")
    return new


def smooth(fg: FatGraph):
    """Dissolve every degree-2 vertex (isotopy-level representative)."""
    new = fg.copy()
    changed = True
    while changed:
        changed = False
        for v in list(new.cycles):
            if new.degree(v) == 2:
                x, y = new.cycles[v]
                if new.opp[x] != y:
                    new.dissolve_vertex(v)
                    changed = True
    return new


# ---------------------------------------------------------------------------
# Flip paths in a polygon (diagonal subdivisions)


def polygon_subdivision_neighbours(n, diagonals):
    """Flip neighbours of a diagonal subdivision of an n-gon.  A subdivision
    is a frozenset of chords (i, j), i < j, non-crossing, maximal (n - 3)."""
    diags = set(diagonals)
    out = []
    for d in diagonals:
        rest = diags - {d}
        # the two triangles adjacent to d form a quadrilateral; find its
        # four corners: the unique points x, y visible across d
        i, j = d
        def is_edge(a, b):
            a, b = min(a, b), max(a, b)
            if (a, b) in rest:
                return True
            return b - a == 1 or (a == 0 and b == n - 1)
        x = next(k for k in range(n) if k not in (i, j) and is_edge(i, k) and is_edge(j, k)
                 and _inside(n, i, j, k, True))
        y = next(k for k in range(n) if k not in (i, j) and is_edge(i, k) and is_edge(j, k)
                 and _inside(n, i, j, k, False))
        new = frozenset(rest | {(min(x, y), max(x, y))})
        out.append(new)
    return out


def _inside(n, i, j, k, upper):
    between = (i < k < j)
    return between if upper else not between


def fan_triangulation(n, apex):
    return frozenset(
        (min(apex, k), max(apex, k))
        for k in range(n)
        if k not in (apex, (apex - 1) % n, (apex + 1) % n))


def diagonal_flip_path(n, start, goal):
    """A flip sequence between two diagonal subdivisions of an n-gon through
    the fan at the lowest vertex; length at most 2n - 6.

    Returns the list of intermediate subdivisions (start exclusive, goal
    inclusive, empty when start == goal).
    """
    if n < 3:
        raise SurfaceError("need n >= 3")
    start, goal = frozenset(start), frozenset(goal)
    if start == goal:
        return []
    apex = 0
    fan = fan_triangulation(n, apex)

    def to_fan(sub):
        path = []
        cur = sub
        while cur != fan:
            # flip any diagonal not at the apex whose flip raises the apex degree
            progressed = False
            for d in sorted(cur):
                if apex in d:
                    continue
                for nb in polygon_subdivision_neighbours(n, cur):
                    if d not in nb:
                        gained = next(iter(nb - cur))
                        if apex in gained:
                            cur = nb
                            path.append(cur)
                            progressed = True
                            break
                if progressed:
                    break
            assert progressed, "no progress towards the fan"
        return path

    p1 = to_fan(start)
    p2 = to_fan(goal)
    return p1 + list(reversed([goal] + p2[:-1])) if p2 else p1
