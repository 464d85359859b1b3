"""Orbit counting for pseudogroups of interval isometries.

The state is a discrete interval [1, n] together with a finite set of
isometric pairings between subintervals.  Each pairing identifies points of
its domain with points of its range, and the orbit counting problem asks for
the number of equivalence classes under the pseudogroup these pairings
generate.  The kernel simplifies a problem by six kinds of elementary steps
(identity deletion, contraction, trimming, periodic merger, transmission,
truncation), organised into shifted cycles.  The total work is polynomial in
the number of pairings and log(n), so all arithmetic is exact big-integer
arithmetic.

Every operation is pure: it returns a new problem plus a trace of the steps
performed.  Traces are replayable, which is what the certificate verifier
uses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

PRESERVING = "preserving"
REVERSING = "reversing"


class IntervalError(ValueError):
    """Malformed pairing or orbit counting problem."""


class StructuralError(RuntimeError):
    """The problem violates a structural precondition of a kernel step."""


class BudgetExceeded(RuntimeError):
    """Safety cap on shifted cycles hit; should never fire on valid input."""


@dataclass(frozen=True)
class Pairing:
    """An isometry between two subintervals of [1, n].

    The interval with the smaller left endpoint is always stored as the
    domain.  A preserving pairing is x -> x + t with t = range_lo - domain_lo;
    a reversing pairing is x -> K - x with K = domain_lo + range_hi.
    """

    id: int
    domain_lo: int
    domain_hi: int
    range_lo: int
    range_hi: int
    orientation: str = PRESERVING

    def __post_init__(self):
        if self.domain_hi - self.domain_lo != self.range_hi - self.range_lo:
            raise IntervalError(f"pairing {self.id}: domain and range widths differ")
        if self.domain_hi < self.domain_lo:
            raise IntervalError(f"pairing {self.id}: empty interval")
        if self.domain_lo > self.range_lo:
            raise IntervalError(f"pairing {self.id}: domain must be the left interval")
        if self.domain_lo < 1:
            raise IntervalError(f"pairing {self.id}: endpoints must be >= 1")
        if self.orientation not in (PRESERVING, REVERSING):
            raise IntervalError(f"pairing {self.id}: bad orientation {self.orientation!r}")

    @property
    def width(self) -> int:
        return self.domain_hi - self.domain_lo + 1

    @property
    def translation(self) -> int:
        return self.range_lo - self.domain_lo

    @property
    def reflection_sum(self) -> int:
        # x in the domain maps to reflection_sum - x.
        return self.domain_lo + self.range_hi

    def is_identity(self) -> bool:
        if self.orientation == PRESERVING:
            return self.translation == 0
        # A reversing pairing restricts to the identity only on a single
        # self-reflected point.
        return self.width == 1 and self.domain_lo == self.range_lo

    def is_periodic(self) -> bool:
        """Preserving, with no gap between domain and range."""
        return (
            self.orientation == PRESERVING
            and self.translation > 0
            and self.range_lo <= self.domain_hi + 1
        )

    def overlaps(self) -> bool:
        return self.range_lo <= self.domain_hi

    def apply(self, x: int) -> int:
        """Map x forward if it lies in the domain, backward if in the range.

        Points of the overlap (if any) are mapped forward.
        """
        if self.domain_lo <= x <= self.domain_hi:
            if self.orientation == PRESERVING:
                return x + self.translation
            return self.reflection_sum - x
        if self.range_lo <= x <= self.range_hi:
            if self.orientation == PRESERVING:
                return x - self.translation
            return self.reflection_sum - x
        raise IntervalError(f"{x} is outside both intervals of pairing {self.id}")

    def intervals(self):
        return (self.domain_lo, self.domain_hi), (self.range_lo, self.range_hi)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "domain": [str(self.domain_lo), str(self.domain_hi)],
            "range": [str(self.range_lo), str(self.range_hi)],
            "orientation": self.orientation,
        }

    @staticmethod
    def from_json(obj: dict) -> "Pairing":
        return Pairing(
            id=int(obj["id"]),
            domain_lo=int(obj["domain"][0]),
            domain_hi=int(obj["domain"][1]),
            range_lo=int(obj["range"][0]),
            range_hi=int(obj["range"][1]),
            orientation=obj.get("orientation", PRESERVING),
        )


def make_pairing(id, a, b, c, d, orientation=PRESERVING) -> Pairing:
    """Build a pairing from the two intervals [a,b] and [c,d] in either order."""
    if a > c:
        a, b, c, d = c, d, a, b
    return Pairing(id, a, b, c, d, orientation)


@dataclass(frozen=True)
class OrbitCountingProblem:
    n: int
    pairings: tuple = ()
    orbit_counter: int = 0
    fresh: bool = True

    def __post_init__(self):
        if self.n < 0:
            raise IntervalError("n must be >= 0")
        if self.orbit_counter < 0:
            raise IntervalError("orbit_counter must be >= 0")
        seen = set()
        for p in self.pairings:
            if p.id in seen:
                raise IntervalError(f"duplicate pairing id {p.id}")
            seen.add(p.id)
            if p.range_hi > self.n:
                raise IntervalError(f"pairing {p.id} exceeds [1, {self.n}]")

    def pairing(self, pid: int) -> Pairing:
        for p in self.pairings:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def to_json(self) -> dict:
        return {
            "n": str(self.n),
            "orbit_counter": str(self.orbit_counter),
            "pairings": [p.to_json() for p in self.pairings],
        }

    @staticmethod
    def from_json(obj: dict) -> "OrbitCountingProblem":
        return OrbitCountingProblem(
            n=int(obj["n"]),
            pairings=tuple(Pairing.from_json(p) for p in obj["pairings"]),
            orbit_counter=int(obj.get("orbit_counter", 0)),
            fresh=bool(obj.get("fresh", True)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def euclid_problem(a: int, b: int) -> OrbitCountingProblem:
    """The gcd problem: [1, a+b] with f: [1,b] -> [a+1,a+b] and
    g: [1,a] -> [b+1,a+b].  The orbit count is gcd(a, b)."""
    if a < 1 or b < 1:
        raise IntervalError("need a, b >= 1")
    f = Pairing(0, 1, b, a + 1, a + b)
    g = Pairing(1, 1, a, b + 1, a + b)
    return OrbitCountingProblem(n=a + b, pairings=(f, g))


def apply_pairing(p: Pairing, x: int) -> int:
    return p.apply(x)


# ---------------------------------------------------------------------------
# Step traces


@dataclass(frozen=True)
class StepRecord:
    kind: str  # delete_identity | contraction | trimming | merger | transmission | truncation
    data: tuple  # kind-specific payload, hashable and JSON-serialisable

    def to_json(self):
        return {"kind": self.kind, "data": _jsonify(self.data)}


def _jsonify(x):
    if isinstance(x, tuple):
        return [_jsonify(v) for v in x]
    if isinstance(x, int):
        return str(x)
    return x


@dataclass
class StepTrace:
    records: list = field(default_factory=list)

    def add(self, kind, *data):
        self.records.append(StepRecord(kind, data))

    def extend(self, other: "StepTrace"):
        self.records.extend(other.records)

    def kinds(self):
        return [r.kind for r in self.records]

    def to_json(self):
        return [r.to_json() for r in self.records]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# Cleanup: steps (1)-(4), iterated to a fixed point


def _delete_identities(ocp, trace):
    keep, changed = [], False
    for p in ocp.pairings:
        if p.is_identity():
            trace.add("delete_identity", p.id)
            changed = True
        else:
            keep.append(p)
    if not changed:
        return ocp, False
    return replace(ocp, pairings=tuple(keep)), True


def _covered_intervals(pairings):
    """Disjoint sorted maximal intervals covered by some domain or range."""
    spans = []
    for p in pairings:
        spans.append((p.domain_lo, p.domain_hi))
        spans.append((p.range_lo, p.range_hi))
    spans.sort()
    merged = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return merged


def _contract(ocp, trace):
    covered = _covered_intervals(ocp.pairings)
    static = []
    prev_hi = 0
    for lo, hi in covered:
        if lo > prev_hi + 1:
            static.append((prev_hi + 1, lo - 1))
        prev_hi = hi
    if prev_hi < ocp.n:
        static.append((prev_hi + 1, ocp.n))
    if not static:
        return ocp, False

    removed = sum(hi - lo + 1 for lo, hi in static)

    def shift(x):
        s = 0
        for lo, hi in static:
            if x > hi:
                s += hi - lo + 1
        return x - s

    new_pairings = tuple(
        replace(
            p,
            domain_lo=shift(p.domain_lo),
            domain_hi=shift(p.domain_hi),
            range_lo=shift(p.range_lo),
            range_hi=shift(p.range_hi),
        )
        for p in ocp.pairings
    )
    trace.add("contraction", tuple(tuple(iv) for iv in static), removed)
    new = replace(
        ocp,
        n=ocp.n - removed,
        pairings=new_pairings,
        orbit_counter=ocp.orbit_counter + removed,
    )
    return new, True


def _trim_one(p: Pairing) -> Pairing | None:
    """Trim a reversing pairing with overlapping domain and range.

    The relation x ~ K - x on [a, b] is generated by its restriction to the
    points left of the reflection centre; the restricted pairing has disjoint
    domain and range.  Returns None if nothing is left (single fixed point).
    """
    K = p.reflection_sum
    m = (K - 1) // 2  # largest x with x < K - x
    if m < p.domain_lo:
        return None
    new_hi = min(p.domain_hi, m)
    return Pairing(p.id, p.domain_lo, new_hi, K - new_hi, p.range_hi, REVERSING)


def _trim(ocp, trace):
    keep, changed = [], False
    for p in ocp.pairings:
        if p.orientation == REVERSING and p.overlaps():
            q = _trim_one(p)
            trace.add("trimming", p.id)
            changed = True
            if q is not None:
                keep.append(q)
        else:
            keep.append(p)
    if not changed:
        return ocp, False
    return replace(ocp, pairings=tuple(keep)), True


def _merge(ocp, trace):
    """Perform one periodic merger if possible."""
    ps = ocp.pairings
    for i in range(len(ps)):
        if not ps[i].is_periodic():
            continue
        for j in range(i + 1, len(ps)):
            if not ps[j].is_periodic():
                continue
            a1, d1 = ps[i].domain_lo, ps[i].range_hi
            a2, d2 = ps[j].domain_lo, ps[j].range_hi
            lo, hi = max(a1, a2), min(d1, d2)
            t1, t2 = ps[i].translation, ps[j].translation
            if hi - lo + 1 >= t1 + t2:
                g = math.gcd(t1, t2)
                A, D = min(a1, a2), max(d1, d2)
                merged = Pairing(ps[i].id, A, D - g, A + g, D)
                trace.add("merger", ps[i].id, ps[j].id, g)
                rest = tuple(p for k, p in enumerate(ps) if k not in (i, j))
                return replace(ocp, pairings=rest + (merged,)), True
    return ocp, False


def cleanup(ocp: OrbitCountingProblem):
    """Steps (1)-(4) applied in order, repeated until nothing changes."""
    trace = StepTrace()
    while True:
        changed = False
        for step in (_delete_identities, _contract, _trim, _merge):
            ocp, c = step(ocp, trace)
            changed = changed or c
        if not changed:
            return ocp, trace


# ---------------------------------------------------------------------------
# Transmission and truncation: steps (5)-(6)


def find_maximal(ocp: OrbitCountingProblem) -> Pairing:
    """The pairing whose range contains n and contains every other range
    containing n.  Ranges containing n all end at n, so they are nested and a
    maximal one always exists; ties broken by lowest id."""
    at_n = [p for p in ocp.pairings if p.range_lo <= ocp.n <= p.range_hi]
    if not at_n:
        raise StructuralError("no pairing's range contains n; run cleanup first")
    best = max(at_n, key=lambda p: (p.width, -p.id))
    for p in at_n:
        if not (best.range_lo <= p.range_lo and p.range_hi <= best.range_hi):
            raise StructuralError("ranges at n are not nested")
    return best


def _power_shift_count(block_lo: int, g: Pairing) -> int:
    """Largest r >= 1 such that g^-(r-1) keeps [block_lo, ...] inside range(g).

    Only used for preserving g with positive translation; the block is assumed
    to start inside range(g).
    """
    t = g.translation
    return (block_lo - g.range_lo) // t + 1


def _transmit_one(gj: Pairing, gi: Pairing, trace):
    """Transmit gj by gi.  Assumes range(gj) is contained in range(gi) and gi
    is preserving (reversing gi is handled by the caller via reflection)."""
    t = gi.translation
    if t == 0:
        return gj  # gi restricts the identity; nothing to do
    r = _power_shift_count(gj.range_lo, gi)
    new_range = (gj.range_lo - r * t, gj.range_hi - r * t)
    if gi.range_lo <= gj.domain_lo and gj.domain_hi <= gi.range_hi:
        s = _power_shift_count(gj.domain_lo, gi)
        new_domain = (gj.domain_lo - s * t, gj.domain_hi - s * t)
    else:
        s = 0
        new_domain = (gj.domain_lo, gj.domain_hi)
    trace.add("transmission", gj.id, gi.id, r, s)
    return make_pairing(gj.id, new_domain[0], new_domain[1], new_range[0], new_range[1], gj.orientation)


def _transmit_one_reversing(gj: Pairing, gi: Pairing, trace):
    """Transmit gj by a reversing gi (with disjoint domain and range): r = 1,
    and s = 1 when domain(gj) also lies in range(gi)."""
    K = gi.reflection_sum
    rlo, rhi = K - gj.range_hi, K - gj.range_lo
    flip = 1
    if gi.range_lo <= gj.domain_lo and gj.domain_hi <= gi.range_hi:
        dlo, dhi = K - gj.domain_hi, K - gj.domain_lo
        s = 1
        flip = 2
    else:
        dlo, dhi = gj.domain_lo, gj.domain_hi
        s = 0
    orientation = gj.orientation
    if flip % 2 == 1:
        orientation = REVERSING if orientation == PRESERVING else PRESERVING
    trace.add("transmission", gj.id, gi.id, 1, s)
    return make_pairing(gj.id, dlo, dhi, rlo, rhi, orientation)


def transmit_and_truncate(ocp: OrbitCountingProblem):
    """Steps (5)-(6): transmit everything in the maximal range, then truncate.

    Returns the new problem and the trace.  The orbit counter is unchanged;
    truncation removes points without deleting orbits.
    """
    if not ocp.pairings:
        raise StructuralError("no pairings to transmit")
    trace = StepTrace()
    gi = find_maximal(ocp)
    if gi.orientation == REVERSING and gi.overlaps():
        trimmed = _trim_one(gi)
        trace.add("trimming", gi.id)
        pairings = tuple(p for p in ocp.pairings if p.id != gi.id)
        if trimmed is not None:
            pairings += (trimmed,)
        ocp = replace(ocp, pairings=pairings)
        gi = find_maximal(ocp)

    new_pairings = []
    for p in ocp.pairings:
        if p.id != gi.id and gi.range_lo <= p.range_lo and p.range_hi <= gi.range_hi:
            if gi.orientation == PRESERVING:
                new_pairings.append(_transmit_one(p, gi, trace))
            else:
                new_pairings.append(_transmit_one_reversing(p, gi, trace))
        else:
            new_pairings.append(p)

    # Truncation: remove the largest tail [c, n] meeting no other pairing's
    # intervals, entirely inside range(gi).
    c = gi.range_lo
    for p in new_pairings:
        if p.id == gi.id:
            continue
        c = max(c, p.range_hi + 1, p.domain_hi + 1)
    if c > ocp.n:
        return replace(ocp, pairings=tuple(new_pairings), fresh=False), trace

    removed = ocp.n - c + 1
    result = []
    for p in new_pairings:
        if p.id != gi.id:
            result.append(p)
            continue
        new_width = p.width - removed
        if new_width <= 0:
            trace.add("truncation", p.id, c, removed, 0)
            continue
        if p.orientation == PRESERVING:
            q = Pairing(p.id, p.domain_lo, p.domain_lo + new_width - 1,
                        p.range_lo, p.range_lo + new_width - 1)
        else:
            q = Pairing(p.id, p.reflection_sum - (c - 1), p.domain_hi,
                        p.range_lo, c - 1, REVERSING)
        trace.add("truncation", p.id, c, removed, new_width)
        result.append(q)
    new = replace(ocp, n=ocp.n - removed, pairings=tuple(result), fresh=False)
    return new, trace


# ---------------------------------------------------------------------------
# Shifted cycles and full orbit counting


def shifted_cycle(ocp: OrbitCountingProblem):
    """One shifted cycle.  The first cycle on a fresh problem runs only the
    cleanup steps; afterwards each cycle is transmit+truncate then cleanup."""
    trace = StepTrace()
    if ocp.fresh:
        ocp, t = cleanup(ocp)
        trace.extend(t)
        return replace(ocp, fresh=False), trace
    ocp, t = transmit_and_truncate(ocp)
    trace.extend(t)
    ocp, t = cleanup(ocp)
    trace.extend(t)
    return ocp, trace


def default_cycle_cap(ocp: OrbitCountingProblem) -> int:
    k = len(ocp.pairings)
    return 1000 + 30 * (k + 2) * (ocp.n.bit_length() + 2)


def count_orbits(ocp: OrbitCountingProblem, max_cycles: int | None = None):
    """Run shifted cycles until no pairings remain.

    Returns (count, traces) where traces is the list of per-cycle traces.
    """
    if max_cycles is None:
        max_cycles = default_cycle_cap(ocp)
    traces = []
    cycles = 0
    while True:
        if not ocp.pairings:
            # All surviving points are static singleton orbits.
            if ocp.n:
                ocp, t = cleanup(ocp)
                traces.append(t)
            return ocp.orbit_counter, traces
        if cycles >= max_cycles:
            raise BudgetExceeded(f"exceeded {max_cycles} shifted cycles")
        ocp, t = shifted_cycle(ocp)
        traces.append(t)
        cycles += 1


# ---------------------------------------------------------------------------
# AHT-complexity


@dataclass(frozen=True)
class ComplexityReport:
    """r + sum(log2 z_i) - log2(z_tilde)/2, kept in exact form.

    `value` is a float approximation; exact comparisons go through
    `quadrupled_exponential`, which is the integer-valued fraction
    2^(2*value) = 4^r * prod(z_i^2) / z_tilde.
    """

    r: int
    z_list: tuple
    z_tilde: int

    @property
    def value(self) -> float:
        return self.r + sum(math.log2(z) for z in self.z_list) - math.log2(self.z_tilde) / 2

    def quadrupled_exponential(self) -> Fraction:
        num = 4 ** self.r
        for z in self.z_list:
            num *= z * z
        return Fraction(num, self.z_tilde)

    def decreased_by_at_least_one(self, newer: "ComplexityReport") -> bool:
        """Exact check that newer <= self - 1, i.e. 4 * 2^(2 new) <= 2^(2 old)."""
        return 4 * newer.quadrupled_exponential() <= self.quadrupled_exponential()


def aht_complexity(ocp: OrbitCountingProblem) -> ComplexityReport:
    if not ocp.pairings:
        raise StructuralError("AHT-complexity is undefined without pairings")
    z_list = tuple(sorted(p.width for p in ocp.pairings))
    top = 0
    for p in ocp.pairings:
        top = max(top, p.domain_hi, p.range_hi)
    widths_at_top = [
        p.width
        for p in ocp.pairings
        if p.domain_lo <= top <= p.domain_hi or p.range_lo <= top <= p.range_hi
    ]
    return ComplexityReport(r=len(ocp.pairings), z_list=z_list, z_tilde=min(widths_at_top))


# ---------------------------------------------------------------------------
# Trace replay (used by the certificate verifier)


def replay(ocp: OrbitCountingProblem, traces) -> OrbitCountingProblem:
    """Re-run the recorded cycles and check each reproduces its trace."""
    for t in traces:
        ocp2, t2 = shifted_cycle(ocp) if ocp.pairings or ocp.fresh else (ocp, StepTrace())
        if t2.dumps() != (t.dumps() if isinstance(t, StepTrace) else json.dumps(t, sort_keys=True)):
            raise StructuralError("trace mismatch during replay")
        ocp = ocp2
    return ocp
