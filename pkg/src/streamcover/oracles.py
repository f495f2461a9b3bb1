"""Ground-truth machinery: exact minimum-cost covers, a greedy baseline,
and coverage evaluators over materialized (non-streaming) instances.

The exact solver is a depth-first branch-and-bound over coverage bitmasks
with an admissible fractional bound; `enumerate_opt` is the independent
all-subsets route used to cross-check it on small instances.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .stream import EdgeId, StreamEdge, VertexId


class OfflineInstance:
    """A fully materialized instance: edges, memberships, weights, masks."""

    def __init__(self, edges: Iterable[StreamEdge], *, declared_n: int | None = None):
        self.edges: tuple[StreamEdge, ...] = tuple(edges)
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate edge ids")
        self.benefits: dict[VertexId, Fraction] = {}
        seen: set[VertexId] = set()
        for edge in self.edges:
            for v, b in edge.members:
                prior = self.benefits.get(v)
                if prior is None:
                    self.benefits[v] = b
                elif prior != b:
                    raise ValueError(f"vertex {v} carries conflicting benefits")
                seen.add(v)
        if declared_n is not None:
            universe = set(range(declared_n)) | seen
        else:
            universe = seen
        self.vertices: tuple[VertexId, ...] = tuple(sorted(universe))
        self._pos = {v: i for i, v in enumerate(self.vertices)}
        self.masks: list[int] = []
        for edge in self.edges:
            mask = 0
            for v, _ in edge.members:
                mask |= 1 << self._pos[v]
            self.masks.append(mask)
        self.full_mask = (1 << len(self.vertices)) - 1
        self.covering: list[list[int]] = [[] for _ in self.vertices]
        for ei, mask in enumerate(self.masks):
            m = mask
            while m:
                low = m & -m
                self.covering[low.bit_length() - 1].append(ei)
                m ^= low
        self.total_benefit = sum(self.benefits.values(), Fraction(0))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def isolated_vertices(self) -> tuple[VertexId, ...]:
        return tuple(self.vertices[i] for i, es in enumerate(self.covering) if not es)

    def edge_by_id(self, eid: EdgeId) -> StreamEdge:
        for edge in self.edges:
            if edge.id == eid:
                return edge
        raise ValueError(f"unknown edge id {eid}")


@dataclass(frozen=True)
class OptCover:
    """A minimum-cost full cover (proven, or best found within budget)."""

    edge_ids: frozenset[EdgeId]
    cost: Fraction
    proven_optimal: bool
    nodes: int = 0


def greedy_cover(instance: OfflineInstance) -> frozenset[EdgeId]:
    """Benefit-per-cost greedy full cover; ties go to the smaller edge id."""
    if instance.isolated_vertices():
        raise ValueError(f"isolated vertices: {instance.isolated_vertices()}")
    covered = 0
    chosen: list[int] = []
    benefit_bits = [instance.benefits[v] for v in instance.vertices]
    while covered != instance.full_mask:
        best_i = -1
        best_ratio: Fraction | None = None
        for ei, mask in enumerate(instance.masks):
            new = mask & ~covered
            if not new:
                continue
            gain = Fraction(0)
            m = new
            while m:
                low = m & -m
                gain += benefit_bits[low.bit_length() - 1]
                m ^= low
            ratio = gain / instance.edges[ei].cost
            if best_ratio is None or ratio > best_ratio or (
                ratio == best_ratio and instance.edges[ei].id < instance.edges[best_i].id
            ):
                best_ratio = ratio
                best_i = ei
        covered |= instance.masks[best_i]
        chosen.append(best_i)
    return frozenset(instance.edges[i].id for i in chosen)


def enumerate_opt(instance: OfflineInstance) -> OptCover:
    """Exhaustive minimum over all edge subsets.  Exponential; the
    independent cross-check route for the branch-and-bound solver."""
    if instance.m > 24:
        raise ValueError("enumeration capped at 24 edges")
    if instance.isolated_vertices():
        raise ValueError(f"isolated vertices: {instance.isolated_vertices()}")
    best_cost: Fraction | None = None
    best_ids: frozenset[EdgeId] = frozenset()
    costs = [e.cost for e in instance.edges]
    for subset in range(1 << instance.m):
        covered = 0
        cost = Fraction(0)
        s = subset
        while s:
            low = s & -s
            i = low.bit_length() - 1
            covered |= instance.masks[i]
            cost += costs[i]
            s ^= low
        if covered == instance.full_mask and (best_cost is None or cost < best_cost):
            best_cost = cost
            best_ids = frozenset(instance.edges[i].id for i in range(instance.m) if subset >> i & 1)
    if best_cost is None:
        # full_mask == 0 only on an empty universe; the empty set covers it
        return OptCover(frozenset(), Fraction(0), True, 1 << instance.m)
    return OptCover(best_ids, best_cost, True, 1 << instance.m)


def brute_force_opt(instance: OfflineInstance, node_budget: int = 200_000) -> OptCover:
    """Minimum-cost full cover by branch-and-bound over coverage masks.

    Bound: each uncovered vertex pays its cheapest covering edge's cost
    split across that edge's uncovered vertices.  Branching picks the
    uncovered vertex with fewest covering edges and tries those edges by
    descending fresh coverage (edge id breaks ties), so the first descent
    behaves greedily.  If the node budget runs out the best cover found so
    far is returned with proven_optimal=False.
    """
    if instance.n == 0:
        return OptCover(frozenset(), Fraction(0), True, 0)
    if instance.isolated_vertices():
        raise ValueError(f"isolated vertices: {instance.isolated_vertices()}")
    full = instance.full_mask
    masks = instance.masks
    costs = [e.cost for e in instance.edges]
    edge_ids = [e.id for e in instance.edges]
    covering = instance.covering

    incumbent_ids = greedy_cover(instance)
    by_id = {e.id: i for i, e in enumerate(instance.edges)}
    best = [frozenset(incumbent_ids), sum((costs[by_id[eid]] for eid in incumbent_ids), Fraction(0))]
    nodes = 0
    exhausted = False
    memo: dict[int, Fraction] = {}

    def lower_bound(covered: int) -> Fraction:
        total = Fraction(0)
        rem = full & ~covered
        m = rem
        while m:
            low = m & -m
            vi = low.bit_length() - 1
            best_ratio: Fraction | None = None
            for ei in covering[vi]:
                cnt = (masks[ei] & rem).bit_count()
                ratio = costs[ei] / cnt
                if best_ratio is None or ratio < best_ratio:
                    best_ratio = ratio
            total += best_ratio  # covering[vi] is non-empty: no isolated vertices
            m ^= low
        return total

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * instance.m + 100))

    def dfs(covered: int, cost: Fraction, chosen: list[int]) -> None:
        nonlocal nodes, exhausted
        if covered == full:
            if cost < best[1]:
                best[0] = frozenset(edge_ids[i] for i in chosen)
                best[1] = cost
            return
        if nodes >= node_budget:
            exhausted = True
            return
        nodes += 1
        prior = memo.get(covered)
        if prior is not None and prior <= cost:
            return
        memo[covered] = cost
        if cost + lower_bound(covered) >= best[1]:
            return
        rem = full & ~covered
        pick = -1
        pick_count = None
        m = rem
        while m:
            low = m & -m
            vi = low.bit_length() - 1
            cnt = sum(1 for ei in covering[vi] if masks[ei] & rem)
            if pick_count is None or cnt < pick_count:
                pick, pick_count = vi, cnt
            m ^= low
        candidates = sorted(
            (ei for ei in covering[pick] if masks[ei] & rem),
            key=lambda ei: (-(masks[ei] & rem).bit_count(), edge_ids[ei]),
        )
        for ei in candidates:
            chosen.append(ei)
            dfs(covered | masks[ei], cost + costs[ei], chosen)
            chosen.pop()
            if exhausted:
                return

    dfs(0, Fraction(0), [])
    return OptCover(best[0], best[1], proven_optimal=not exhausted, nodes=nodes)


def coverage_of(
    edge_ids: Iterable[EdgeId], instance: OfflineInstance
) -> tuple[Fraction, Fraction]:
    """Exact benefit of the union of the selected edges, and its fraction
    of the total benefit."""
    by_id = {e.id: i for i, e in enumerate(instance.edges)}
    covered = 0
    for eid in set(edge_ids):
        if eid not in by_id:
            raise ValueError(f"unknown edge id {eid}")
        covered |= instance.masks[by_id[eid]]
    benefit = Fraction(0)
    m = covered
    while m:
        low = m & -m
        benefit += instance.benefits[instance.vertices[low.bit_length() - 1]]
        m ^= low
    if instance.total_benefit == 0:
        return benefit, Fraction(1)
    return benefit, benefit / instance.total_benefit
