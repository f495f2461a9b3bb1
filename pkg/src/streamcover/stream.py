"""Hypergraph edge-stream data model and its on-disk text format.

Edges arrive one at a time, each listing its cost and its member vertices
with their benefits.  All weights are exact positive rationals.

Format, one record per line (`#` starts a comment):

    h n=<int> mode=<default|explicit-id>     optional, must precede edges
    e <id|-> <cost> <v>:<benefit> [<v>:<benefit> ...]

`-` assigns the next arrival-time id (previous id + 1, starting at 0);
an explicit id must be strictly greater than the previous edge's id.
Costs and benefits are written `<int>` or `<int>/<int>`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, TextIO

from .rational import format_ratio, parse_ratio

VertexId = int
EdgeId = int


class StreamFormatError(ValueError):
    """Malformed stream text; carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class StreamDomainError(StreamFormatError):
    """Well-formed record with an out-of-domain value (e.g. weight <= 0)."""


@dataclass(frozen=True)
class StreamEdge:
    """One arriving hyperedge: identifier, exact cost, members with benefits.

    Vertex ids are distinct within the edge; a dummy edge (empty members)
    is only legal where explicitly admitted.
    """

    id: EdgeId
    cost: Fraction
    members: tuple[tuple[VertexId, Fraction], ...]

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError(f"edge id must be non-negative: {self.id}")
        if self.cost <= 0:
            raise ValueError(f"edge {self.id}: cost must be positive")
        seen: set[VertexId] = set()
        for v, b in self.members:
            if v < 0:
                raise ValueError(f"edge {self.id}: vertex id must be non-negative")
            if v in seen:
                raise ValueError(f"edge {self.id}: duplicate vertex {v}")
            if b <= 0:
                raise ValueError(f"edge {self.id}: benefit of vertex {v} must be positive")
            seen.add(v)

    def vertex_ids(self) -> tuple[VertexId, ...]:
        return tuple(v for v, _ in self.members)

    def benefit_total(self) -> Fraction:
        return sum((b for _, b in self.members), Fraction(0))

    def is_empty(self) -> bool:
        return not self.members


@dataclass(frozen=True)
class StreamHeader:
    n: int | None = None
    mode: str = "default"


@dataclass
class StreamStats:
    """Counts accumulated over one pass; benefits are per-vertex, counted once."""

    n_seen: int = 0
    m_seen: int = 0
    total_benefit: Fraction = field(default_factory=lambda: Fraction(0))


MODES = ("default", "explicit-id")


class StreamReader:
    """Single-pass lazy reader.  Iterating yields edges in file order.

    The optional header is parsed eagerly so `header.n` is available
    before the first edge; everything else stays lazy.
    """

    def __init__(self, source: Iterable[str], *, allow_empty_edges: bool = False):
        self._lines = iter(enumerate(source, start=1))
        self.allow_empty_edges = allow_empty_edges
        self.header = StreamHeader()
        self._pending: tuple[int, str] | None = None
        self._scan_header()

    def _next_record(self) -> tuple[int, str] | None:
        if self._pending is not None:
            rec, self._pending = self._pending, None
            return rec
        for line_no, raw in self._lines:
            line = raw.split("#", 1)[0].strip()
            if line:
                return line_no, line
        return None

    def _scan_header(self) -> None:
        rec = self._next_record()
        if rec is None:
            return
        line_no, line = rec
        if not line.startswith("h"):
            self._pending = rec
            return
        fields = line.split()
        if fields[0] != "h":
            raise StreamFormatError(f"unknown record {fields[0]!r}", line_no)
        n: int | None = None
        mode = "default"
        for item in fields[1:]:
            key, _, value = item.partition("=")
            if key == "n":
                try:
                    n = int(value)
                except ValueError as exc:
                    raise StreamFormatError(f"bad header n={value!r}", line_no) from exc
                if n < 0:
                    raise StreamFormatError("header n must be non-negative", line_no)
            elif key == "mode":
                if value not in MODES:
                    raise StreamFormatError(f"unknown mode {value!r}", line_no)
                mode = value
            else:
                raise StreamFormatError(f"unknown header field {key!r}", line_no)
        self.header = StreamHeader(n=n, mode=mode)

    def __iter__(self) -> Iterator[StreamEdge]:
        last_id: EdgeId | None = None
        while True:
            rec = self._next_record()
            if rec is None:
                return
            line_no, line = rec
            fields = line.split()
            if fields[0] == "h":
                raise StreamFormatError("header after first edge record", line_no)
            if fields[0] != "e":
                raise StreamFormatError(f"unknown record {fields[0]!r}", line_no)
            if len(fields) < 3:
                raise StreamFormatError("edge record needs at least id and cost", line_no)
            id_field, cost_field = fields[1], fields[2]
            if id_field == "-":
                eid = 0 if last_id is None else last_id + 1
            else:
                try:
                    eid = int(id_field)
                except ValueError as exc:
                    raise StreamFormatError(f"bad edge id {id_field!r}", line_no) from exc
                if eid < 0:
                    raise StreamFormatError("edge id must be non-negative", line_no)
                if last_id is not None and eid <= last_id:
                    raise StreamFormatError(
                        f"edge id {eid} does not increase (previous {last_id})", line_no
                    )
            try:
                cost = parse_ratio(cost_field)
            except ValueError as exc:
                raise StreamFormatError(f"bad cost {cost_field!r}", line_no) from exc
            if cost <= 0:
                raise StreamDomainError(f"cost must be positive: {cost_field}", line_no)
            members: list[tuple[VertexId, Fraction]] = []
            seen: set[VertexId] = set()
            for token in fields[3:]:
                v_s, sep, b_s = token.partition(":")
                if not sep:
                    raise StreamFormatError(f"bad member token {token!r}", line_no)
                try:
                    v = int(v_s)
                except ValueError as exc:
                    raise StreamFormatError(f"bad vertex id {v_s!r}", line_no) from exc
                if v < 0:
                    raise StreamFormatError("vertex id must be non-negative", line_no)
                if v in seen:
                    raise StreamFormatError(f"duplicate vertex {v} within edge", line_no)
                seen.add(v)
                try:
                    b = parse_ratio(b_s)
                except ValueError as exc:
                    raise StreamFormatError(f"bad benefit {b_s!r}", line_no) from exc
                if b <= 0:
                    raise StreamDomainError(f"benefit must be positive: {b_s}", line_no)
                if self.header.n is not None and v >= self.header.n:
                    raise StreamFormatError(
                        f"vertex {v} outside declared n={self.header.n}", line_no
                    )
                members.append((v, b))
            if not members and not self.allow_empty_edges:
                raise StreamFormatError(
                    "empty edge (pass allow_empty_edges to admit dummy edges)", line_no
                )
            last_id = eid
            yield StreamEdge(id=eid, cost=cost, members=tuple(members))


def parse_stream(source: Iterable[str], *, allow_empty_edges: bool = False) -> StreamReader:
    """Lazy edge sequence over text lines (a file object works directly)."""
    return StreamReader(source, allow_empty_edges=allow_empty_edges)


def read_edges(path: str, *, allow_empty_edges: bool = False) -> tuple[StreamHeader, list[StreamEdge]]:
    """Eagerly read a whole stream file."""
    with open(path, "r", encoding="utf-8") as fh:
        reader = parse_stream(fh, allow_empty_edges=allow_empty_edges)
        return reader.header, list(reader)


def serialize_stream(
    edges: Iterable[StreamEdge],
    out: TextIO,
    *,
    header: StreamHeader | None = None,
) -> None:
    """Write the canonical text form.

    In default mode consecutive-from-previous ids are written back as `-`;
    explicit-id mode always writes the id.  Weights come out reduced.
    """
    explicit = header is not None and header.mode == "explicit-id"
    if header is not None and (header.n is not None or header.mode != "default"):
        fields = ["h"]
        if header.n is not None:
            fields.append(f"n={header.n}")
        fields.append(f"mode={header.mode}")
        out.write(" ".join(fields) + "\n")
    last_id: EdgeId | None = None
    for edge in edges:
        auto = edge.id == (0 if last_id is None else last_id + 1)
        id_field = "-" if (auto and not explicit) else str(edge.id)
        parts = ["e", id_field, format_ratio(edge.cost)]
        parts.extend(f"{v}:{format_ratio(b)}" for v, b in edge.members)
        out.write(" ".join(parts) + "\n")
        last_id = edge.id


def stream_text(edges: Iterable[StreamEdge], *, header: StreamHeader | None = None) -> str:
    import io

    buf = io.StringIO()
    serialize_stream(edges, buf, header=header)
    return buf.getvalue()


def check_benefit_consistency(edges: Iterable[StreamEdge]) -> VertexId | None:
    """Return the first vertex carrying two different benefit values, or None."""
    table: dict[VertexId, Fraction] = {}
    for edge in edges:
        for v, b in edge.members:
            prior = table.get(v)
            if prior is None:
                table[v] = b
            elif prior != b:
                return v
    return None


def stream_stats(edges: Iterable[StreamEdge]) -> StreamStats:
    """One-pass stats: distinct vertices, edge count, total benefit."""
    stats = StreamStats()
    seen: set[VertexId] = set()
    for edge in edges:
        stats.m_seen += 1
        for v, b in edge.members:
            if v not in seen:
                seen.add(v)
                stats.total_benefit += b
    stats.n_seen = len(seen)
    return stats
