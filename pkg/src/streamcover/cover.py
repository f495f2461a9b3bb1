"""One-pass covering state: per-vertex effectiveness and edge assignment.

Each arriving edge is scanned for the largest-benefit subset whose
benefit-to-cost level strictly beats the current effectiveness of every
member; that subset's vertices are restamped with the edge's id and the
subset's level.  Effectiveness never decreases.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .rational import ceil_lg
from .stream import EdgeId, StreamEdge, VertexId


class _Bottom:
    """Sentinel below every integer: the unset effectiveness."""

    _instance: "_Bottom | None" = None

    def __new__(cls) -> "_Bottom":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOTTOM"


BOTTOM = _Bottom()

Effectiveness = int | _Bottom


def eff_lt(a: Effectiveness, b: Effectiveness) -> bool:
    """a < b over int + BOTTOM, with BOTTOM below every integer."""
    if a is BOTTOM:
        return b is not BOTTOM
    if b is BOTTOM:
        return False
    return a < b


def eff_le(a: Effectiveness, b: Effectiveness) -> bool:
    return a is b or a == b or eff_lt(a, b)


@dataclass
class CompareCount:
    """Mutable comparison tally for the per-edge work measurement."""

    n: int = 0

    def tick(self, k: int = 1) -> None:
        self.n += k


class _CountedKey:
    """Sort key wrapper that tallies every ordering comparison."""

    __slots__ = ("key", "counter")

    def __init__(self, key: tuple, counter: CompareCount):
        self.key = key
        self.counter = counter

    def __lt__(self, other: "_CountedKey") -> bool:
        self.counter.tick()
        return self.key < other.key


def level(total_benefit: Fraction, cost: Fraction, counter: CompareCount | None = None) -> int:
    """ceil(lg(total_benefit / cost)).

    The unique integer k with 2**(k-1) * cost < total_benefit <= 2**k * cost,
    computed by exact integer comparisons.
    """
    if total_benefit <= 0 or cost <= 0:
        raise ValueError("level() requires positive weights")
    ratio = total_benefit / cost
    tick = counter.tick if counter is not None else None
    return ceil_lg(ratio.numerator, ratio.denominator, tick)


@dataclass(frozen=True)
class EdgeUpdate:
    """What one edge changed: the restamped vertices and their new level."""

    edge_id: EdgeId
    chosen: tuple[VertexId, ...]
    level: int | None
    comparisons: int = 0

    @property
    def empty(self) -> bool:
        return not self.chosen


class CoverState:
    """Per-vertex (eid, eff, benefit) tables driven by one pass over the edges.

    `unit_benefits` selects the uniform-benefit variant: listed benefits are
    ignored and every vertex weighs 1.  A vertex is absent from the tables
    exactly while its effectiveness is BOTTOM; any edge containing it makes
    it finite, so after an edge is processed all its members are assigned.
    """

    def __init__(self, *, unit_benefits: bool = False, instrument: bool = False):
        self.unit_benefits = unit_benefits
        self.eid: dict[VertexId, EdgeId] = {}
        self.eff: dict[VertexId, int] = {}
        self.benefit: dict[VertexId, Fraction] = {}
        self.instrument = instrument
        self.edge_comparisons: list[tuple[EdgeId, int, int]] = []  # (edge id, |e|, count)

    def eff_of(self, v: VertexId) -> Effectiveness:
        return self.eff.get(v, BOTTOM)

    def eid_of(self, v: VertexId) -> EdgeId | None:
        return self.eid.get(v)

    def _benefit_view(self, listed: Fraction) -> Fraction:
        return Fraction(1) if self.unit_benefits else listed


def max_effective_subset(
    state: CoverState, edge: StreamEdge, counter: CompareCount | None = None
) -> tuple[tuple[VertexId, ...], int] | None:
    """Largest-benefit subset whose level beats every member's effectiveness.

    Members are sorted by (effectiveness, vertex id) with BOTTOM first; the
    longest qualifying prefix is the answer.  Adding a vertex of no-larger
    effectiveness keeps a subset qualifying, so every maximum-benefit
    qualifying subset is closed downward in this order, and with positive
    benefits the longest qualifying prefix attains the maximum benefit.
    Returns None when only the empty subset qualifies.
    """
    entries = [(v, state._benefit_view(b)) for v, b in edge.members]
    if not entries:
        return None
    if counter is None:
        entries.sort(key=lambda item: _eff_sort_key(state, item[0]))
    else:
        entries.sort(key=lambda item: _CountedKey(_eff_sort_key(state, item[0]), counter))
    prefix_benefit: list[Fraction] = []
    acc = Fraction(0)
    for _, b in entries:
        acc += b
        prefix_benefit.append(acc)
    for k in range(len(entries), 0, -1):
        v_k, _ = entries[k - 1]
        lv = level(prefix_benefit[k - 1], edge.cost, counter)
        if counter is not None:
            counter.tick()
        if eff_lt(state.eff_of(v_k), lv):
            return tuple(v for v, _ in entries[:k]), lv
    return None


def _eff_sort_key(state: CoverState, v: VertexId) -> tuple:
    e = state.eff.get(v)
    if e is None:
        return (0, v)
    return (1, e, v)


def process_edge(state: CoverState, edge: StreamEdge) -> EdgeUpdate:
    """Apply one edge: restamp the chosen subset, leave everything else.

    Work is O(|e| log |e|) comparisons (sort plus one level check per
    prefix).  The per-edge count is recorded when the state is instrumented.
    """
    counter = CompareCount() if state.instrument else None
    for v, b in edge.members:
        view = state._benefit_view(b)
        prior = state.benefit.get(v)
        if prior is None:
            state.benefit[v] = view
        elif prior != view:
            raise ValueError(f"vertex {v} carries conflicting benefits {prior} and {view}")
    picked = max_effective_subset(state, edge, counter)
    if counter is not None:
        state.edge_comparisons.append((edge.id, len(edge.members), counter.n))
    if picked is None:
        return EdgeUpdate(edge.id, (), None, counter.n if counter else 0)
    chosen, lv = picked
    for v in chosen:
        assert eff_lt(state.eff_of(v), lv)  # effectiveness strictly increases
        state.eid[v] = edge.id
        state.eff[v] = lv
    return EdgeUpdate(edge.id, chosen, lv, counter.n if counter else 0)


class FrozenCover:
    """Immutable end-of-stream view grouping vertices by final effectiveness.

    Supports the interval queries I(<=r), I(>r), S(r), S(>r) and prefix
    sums of benefit/count over the distinct effectiveness values present.
    """

    def __init__(self, state: CoverState):
        self._eff = dict(state.eff)
        self._eid = dict(state.eid)
        self._benefit = dict(state.benefit)
        by_level: dict[int, list[VertexId]] = {}
        for v, r in self._eff.items():
            by_level.setdefault(r, []).append(v)
        self.levels: tuple[int, ...] = tuple(sorted(by_level))
        self._vertices_at = {r: tuple(sorted(vs)) for r, vs in by_level.items()}
        self._cum_benefit: list[Fraction] = []
        self._cum_count: list[int] = []
        acc_b, acc_c = Fraction(0), 0
        for r in self.levels:
            for v in self._vertices_at[r]:
                acc_b += self._benefit[v]
            acc_c += len(self._vertices_at[r])
            self._cum_benefit.append(acc_b)
            self._cum_count.append(acc_c)
        self.total_benefit = acc_b
        self.vertex_count = acc_c

    def eff_of(self, v: VertexId) -> Effectiveness:
        return self._eff.get(v, BOTTOM)

    def eid_of(self, v: VertexId) -> EdgeId | None:
        return self._eid.get(v)

    def vertices(self) -> tuple[VertexId, ...]:
        return tuple(sorted(self._eff))

    def _upper_index(self, r: int) -> int:
        """Number of distinct levels <= r."""
        return bisect.bisect_right(self.levels, r)

    def benefit_le(self, r: int) -> Fraction:
        i = self._upper_index(r)
        return self._cum_benefit[i - 1] if i else Fraction(0)

    def count_le(self, r: int) -> int:
        i = self._upper_index(r)
        return self._cum_count[i - 1] if i else 0

    def vertices_le(self, r: int) -> frozenset[VertexId]:
        i = self._upper_index(r)
        out: set[VertexId] = set()
        for lvl in self.levels[:i]:
            out.update(self._vertices_at[lvl])
        return frozenset(out)

    def vertices_gt(self, r: int) -> frozenset[VertexId]:
        i = self._upper_index(r)
        out: set[VertexId] = set()
        for lvl in self.levels[i:]:
            out.update(self._vertices_at[lvl])
        return frozenset(out)

    def vertices_eq(self, r: int) -> frozenset[VertexId]:
        return frozenset(self._vertices_at.get(r, ()))

    def edges_eq(self, r: int) -> frozenset[EdgeId]:
        """S(r): ids recorded by vertices of final effectiveness exactly r."""
        return frozenset(self._eid[v] for v in self._vertices_at.get(r, ()))

    def edges_gt(self, r: int) -> frozenset[EdgeId]:
        """S(>r): ids recorded by vertices of final effectiveness above r."""
        return frozenset(self._eid[v] for v in self.vertices_gt(r))


def finalize(state: CoverState) -> FrozenCover:
    """Freeze the tables once the stream is exhausted."""
    return FrozenCover(state)


def run_cover(edges: Iterable[StreamEdge], *, unit_benefits: bool = False) -> CoverState:
    """Convenience driver: one pass of the covering procedure."""
    state = CoverState(unit_benefits=unit_benefits)
    for edge in edges:
        process_edge(state, edge)
    return state
