"""Adversarial edge-stream generators over the affine plane, with ground truth.

Both constructions split every line of the plane into random parts,
present the parts in a seed-determined order, and finish with one large
edge that contains every point except those of r secretly chosen parallel
lines.  The hidden choice plus an explicit small cover witness are
returned alongside the stream.

All randomness is drawn from a single documented bit source per seed, in
a fixed order, so equal parameters and seed reproduce identical streams.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, TextIO

from .affine import AffinePlane, build_affine_plane
from .stream import EdgeId, StreamEdge, StreamHeader, VertexId

_ONE = Fraction(1)


class SeededBits:
    """Deterministic draws on top of Random.getrandbits (a stable core API).

    Oversampling plus rejection keeps every helper's draw sequence fully
    determined by this class, independent of library internals.
    """

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def bits(self, k: int) -> int:
        if k == 0:
            return 0
        return self._rng.getrandbits(k)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        k = (n - 1).bit_length()
        while True:
            x = self.bits(k)
            if x < n:
                return x

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_sorted(self, n: int, k: int) -> tuple[int, ...]:
        """k distinct values from [0, n), ascending."""
        if k > n:
            raise ValueError("cannot sample more values than the range holds")
        chosen: set[int] = set()
        while len(chosen) < k:
            chosen.add(self.below(n))
        return tuple(sorted(chosen))


@dataclass(frozen=True)
class InstanceTruth:
    """The generator's hidden choices and its explicit cover witness."""

    kind: str  # "certified" | "uncertified"
    q: int
    r: int
    seed: int
    angle: int
    line_indices: tuple[int, ...]  # chosen lines, as indices within the angle
    opt_witness: tuple[EdgeId, ...]


@dataclass(frozen=True)
class LowerBoundInstance:
    edges: tuple[StreamEdge, ...]
    header: StreamHeader
    truth: InstanceTruth
    partitions: Mapping[int, tuple[tuple[VertexId, ...], ...]]  # line index -> parts
    dummy_count: int = 0
    part_size_range: tuple[int, int] | None = None
    id_bits: int | None = None  # identifier width of the padded-id construction


def _ceil_lg_int(m: int) -> int:
    return (m - 1).bit_length()


def _unit_edge(eid: EdgeId, points: Iterable[VertexId]) -> StreamEdge:
    return StreamEdge(id=eid, cost=_ONE, members=tuple((p, _ONE) for p in sorted(points)))


def _split_line(
    bits: SeededBits, line_points: tuple[VertexId, ...], parts: int
) -> tuple[tuple[VertexId, ...], ...]:
    """Assign each point to one of `parts` buckets uniformly; redraw the whole
    line until every bucket is non-empty (empty real edges are not emitted)."""
    while True:
        buckets: list[list[VertexId]] = [[] for _ in range(parts)]
        for p in line_points:
            buckets[bits.below(parts)].append(p)
        if all(buckets):
            return tuple(tuple(b) for b in buckets)


def _certified_range(q: int) -> tuple[Fraction, Fraction]:
    return Fraction(1, 3 * q), Fraction(1, 66) - Fraction(1, 3 * q)


def gen_certified(
    q: int,
    epsilon: Fraction,
    seed: int,
    *,
    relax_range: bool = False,
) -> LowerBoundInstance:
    """Bipartition construction: every line splits into two random edges.

    The final edge omits r = ceil(3*eps*q) parallel lines of a random
    angle; the witness (final edge plus both parts of each omitted line)
    has size 2r + 1.  Unit benefits and costs, arrival-time ids.
    """
    epsilon = Fraction(epsilon)
    lo, hi = _certified_range(q)
    if not relax_range and not (lo <= epsilon <= hi):
        raise ValueError(
            f"epsilon {epsilon} outside [{lo}, {hi}] for q={q} (pass relax_range to override)"
        )
    r = math.ceil(3 * epsilon * q)
    if not 0 <= r <= q:
        raise ValueError(f"r={r} out of range [0, {q}]")
    plane = build_affine_plane(q)
    bits = SeededBits(seed)
    partitions: dict[int, tuple[tuple[VertexId, ...], ...]] = {}
    for idx, line in enumerate(plane.lines):
        partitions[idx] = _split_line(bits, tuple(sorted(line)), 2)
    angle = bits.below(q + 1)
    js = bits.sample_sorted(q, r)
    chosen_lines = [plane.line_index(angle, j) for j in js]
    omitted: set[VertexId] = set()
    for li in chosen_lines:
        omitted.update(plane.lines[li])
    star_points = [p for p in plane.points() if p not in omitted]

    order = [(idx, part) for idx in range(len(plane.lines)) for part in range(2)]
    bits.shuffle(order)
    edges: list[StreamEdge] = []
    id_of: dict[tuple[int, int], EdgeId] = {}
    for eid, (idx, part) in enumerate(order):
        id_of[(idx, part)] = eid
        edges.append(_unit_edge(eid, partitions[idx][part]))
    star_id = len(order)
    edges.append(_unit_edge(star_id, star_points))

    witness = [star_id]
    for li in chosen_lines:
        witness.extend(id_of[(li, part)] for part in range(2))
    sizes = [len(part) for parts in partitions.values() for part in parts]
    truth = InstanceTruth(
        kind="certified",
        q=q,
        r=r,
        seed=seed,
        angle=angle,
        line_indices=js,
        opt_witness=tuple(sorted(witness)),
    )
    return LowerBoundInstance(
        edges=tuple(edges),
        header=StreamHeader(n=q * q, mode="default"),
        truth=truth,
        partitions=partitions,
        part_size_range=(min(sizes), max(sizes)) if sizes else None,
    )


def uncertified_id_widths(q: int, r: int) -> tuple[int, int, int, int, int]:
    """Bit widths (flag, angle, line, part, random tail) of the padded ids."""
    if q < 2 or q & (q - 1):
        raise ValueError(f"q must be a power of two, got {q}")
    lg_q = q.bit_length() - 1
    return 1, _ceil_lg_int(q + 1), lg_q, _ceil_lg_int(max(r, 1)), 3 * lg_q


def decode_uncertified_id(value: int, q: int, r: int) -> tuple[int, int, int]:
    """Recover (angle, line, part) from a real edge's identifier."""
    _, wi, wj, wk, wx = uncertified_id_widths(q, r)
    iota = 1 + wi + wj + wk + wx
    if value >= 1 << (iota - 1):
        raise ValueError(f"id {value} has its leading flag bit set")
    value >>= wx
    k = value & ((1 << wk) - 1)
    value >>= wk
    j = value & ((1 << wj) - 1)
    value >>= wj
    i = value
    if i > q or j >= q or k >= r:
        raise ValueError(f"id decodes out of range: ({i}, {j}, {k})")
    return i, j, k


def gen_uncertified(
    q: int,
    alpha: Fraction,
    epsilon: Fraction,
    seed: int,
    *,
    materialize_dummies: bool = False,
    relax_range: bool = False,
) -> LowerBoundInstance:
    """r-way partition construction with structured identifiers.

    Every line splits into r = ceil(3*eps*q) random edges; each real edge's
    id packs (angle, line, part) after a leading 0 bit and ends with a
    random tail, the final edge's id is the lone value with the flag bit
    set, and the unused id space belongs to empty dummy edges (emitted
    only when materialized).  The witness has size r^2 + 1.
    """
    epsilon = Fraction(epsilon)
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if q < 2 or q & (q - 1):
        raise ValueError(f"q must be a power of two, got {q}")
    e = 1 - alpha  # lower bound is q**(-e); compare exactly via eps**v * q**u >= 1
    u, v = e.numerator, e.denominator
    lower_ok = epsilon > 0 and epsilon**v * Fraction(q) ** u >= 1
    hi = Fraction(1, 66) - Fraction(1, 3 * q)
    if not relax_range and not (lower_ok and epsilon <= hi):
        raise ValueError(
            f"epsilon {epsilon} outside [q^-(1-alpha), {hi}] for q={q}, alpha={alpha}"
        )
    r = math.ceil(3 * epsilon * q)
    if not 1 <= r <= q:
        raise ValueError(f"r={r} out of range [1, {q}]")
    plane = build_affine_plane(q)
    _, wi, wj, wk, wx = uncertified_id_widths(q, r)
    iota = 1 + wi + wj + wk + wx
    star_id = 1 << (iota - 1)

    bits = SeededBits(seed)
    partitions: dict[int, tuple[tuple[VertexId, ...], ...]] = {}
    for idx, line in enumerate(plane.lines):
        partitions[idx] = _split_line(bits, tuple(sorted(line)), r)
    id_of: dict[tuple[int, int], EdgeId] = {}
    for angle_i in range(q + 1):
        for j in range(q):
            idx = plane.line_index(angle_i, j)
            for k in range(r):
                tail = bits.bits(wx)
                eid = ((((angle_i << wj) | j) << wk | k) << wx) | tail
                assert eid < star_id
                id_of[(idx, k)] = eid
    if len(set(id_of.values())) != len(id_of):
        raise RuntimeError("identifier collision among real edges")
    angle = bits.below(q + 1)
    js = bits.sample_sorted(q, r)
    chosen_lines = [plane.line_index(angle, j) for j in js]
    omitted: set[VertexId] = set()
    for li in chosen_lines:
        omitted.update(plane.lines[li])
    star_points = [p for p in plane.points() if p not in omitted]

    real: list[StreamEdge] = [
        _unit_edge(eid, partitions[idx][k]) for (idx, k), eid in id_of.items()
    ]
    real.sort(key=lambda edge: edge.id)
    dummy_count = star_id - len(real)
    edges: list[StreamEdge] = []
    if materialize_dummies:
        real_ids = {edge.id for edge in real}
        by_id = {edge.id: edge for edge in real}
        for eid in range(star_id):
            if eid in real_ids:
                edges.append(by_id[eid])
            else:
                edges.append(StreamEdge(id=eid, cost=_ONE, members=()))
    else:
        edges.extend(real)
    edges.append(_unit_edge(star_id, star_points))

    witness = [star_id]
    for li in chosen_lines:
        witness.extend(id_of[(li, k)] for k in range(r))
    sizes = [len(part) for parts in partitions.values() for part in parts]
    truth = InstanceTruth(
        kind="uncertified",
        q=q,
        r=r,
        seed=seed,
        angle=angle,
        line_indices=js,
        opt_witness=tuple(sorted(witness)),
    )
    return LowerBoundInstance(
        edges=tuple(edges),
        header=StreamHeader(n=q * q, mode="explicit-id"),
        truth=truth,
        partitions=partitions,
        dummy_count=dummy_count,
        part_size_range=(min(sizes), max(sizes)) if sizes else None,
        id_bits=iota,
    )


def gen_random(
    n: int,
    m: int,
    seed: int,
    *,
    max_num: int = 16,
    max_den: int = 16,
    unit_weights: bool = False,
) -> tuple[tuple[StreamEdge, ...], StreamHeader]:
    """Random instance with no isolated vertices and bounded rational weights.

    Benefits are drawn once per vertex; any vertex left uncovered after the
    m membership draws is inserted into a random edge.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    bits = SeededBits(seed)

    def weight() -> Fraction:
        if unit_weights:
            return _ONE
        return Fraction(1 + bits.below(max_num), 1 + bits.below(max_den))

    benefits = {v: weight() for v in range(n)}
    member_sets: list[set[VertexId]] = []
    for _ in range(m):
        size = 1 + bits.below(n)
        member_sets.append(set(bits.sample_sorted(n, size)))
    costs = [weight() for _ in range(m)]
    covered = set().union(*member_sets)
    for v in range(n):
        if v not in covered:
            member_sets[bits.below(m)].add(v)
    edges = tuple(
        StreamEdge(
            id=i,
            cost=costs[i],
            members=tuple((v, benefits[v]) for v in sorted(member_sets[i])),
        )
        for i in range(m)
    )
    return edges, StreamHeader(n=n, mode="default")


def write_truth(truth: InstanceTruth, out: TextIO) -> None:
    """Sidecar recording the hidden choices and the witness ids."""
    out.write(f"t kind {truth.kind}\n")
    out.write(f"t q {truth.q}\n")
    out.write(f"t r {truth.r}\n")
    out.write(f"t seed {truth.seed}\n")
    out.write(f"t angle {truth.angle}\n")
    out.write("t lines" + "".join(f" {j}" for j in truth.line_indices) + "\n")
    out.write("t opt" + "".join(f" {e}" for e in truth.opt_witness) + "\n")


def parse_truth(source: Iterable[str]) -> InstanceTruth:
    fields: dict[str, list[str]] = {}
    for raw in source:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "t" or len(parts) < 2:
            raise ValueError(f"bad truth record: {line!r}")
        fields[parts[1]] = parts[2:]
    try:
        return InstanceTruth(
            kind=fields["kind"][0],
            q=int(fields["q"][0]),
            r=int(fields["r"][0]),
            seed=int(fields["seed"][0]),
            angle=int(fields["angle"][0]),
            line_indices=tuple(int(x) for x in fields.get("lines", [])),
            opt_witness=tuple(int(x) for x in fields.get("opt", [])),
        )
    except (KeyError, IndexError) as exc:
        raise ValueError(f"incomplete truth sidecar: missing {exc}") from exc
