"""Single-pass engine state and coverage-certificate extraction.

One pass maintains, independently of any coverage target:

  * a covering run over the true benefits,
  * a covering run over unit benefits,
  * per vertex, the cheapest edge seen covering it,
  * per vertex, its benefit.

After the pass, a certificate for any target coverage 1 - eps (0 <= eps < 1)
is extracted from this structure alone.  The two regimes split exactly at
eps^2 * n >= 1: above it the true-benefit tables are thresholded; below it
the unit-benefit tables are thresholded and the leftover vertices fall back
to their cheapest covering edge, yielding a total mapping.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, TextIO

from .cover import BOTTOM, CoverState, FrozenCover, finalize, process_edge
from .rational import format_ratio, parse_ratio, pow2_floor
from .stream import EdgeId, StreamEdge, StreamStats, VertexId

REGIME_ABOVE = "above"
REGIME_BELOW = "below"

SNAPSHOT_VERSION = 1


class DataStructureD:
    """Everything the pass retains; oblivious to the extraction parameter."""

    def __init__(
        self,
        p1: CoverState,
        p2: CoverState,
        emin: dict[VertexId, tuple[EdgeId, Fraction]],
        benefits: dict[VertexId, Fraction],
        stats: StreamStats,
        declared_n: int | None = None,
        edge_visits: int = 0,
    ):
        self.p1 = p1
        self.p2 = p2
        self.emin = emin
        self.benefits = benefits
        self.stats = stats
        self.declared_n = declared_n
        self.edge_visits = edge_visits

    @property
    def n(self) -> int:
        """Vertex count used by the extraction thresholds."""
        return self.declared_n if self.declared_n is not None else self.stats.n_seen

    @cached_property
    def p1_frozen(self) -> FrozenCover:
        return finalize(self.p1)

    @cached_property
    def p2_frozen(self) -> FrozenCover:
        return finalize(self.p2)


def run_stream(
    edges: Iterable[StreamEdge],
    *,
    declared_n: int | None = None,
    instrument: bool = False,
) -> DataStructureD:
    """Drive all four per-edge procedures over one pass.

    Benefit consistency is enforced as edges arrive.  `instrument` turns on
    the comparison tally of the true-benefit covering run.
    """
    if declared_n is None:
        header = getattr(edges, "header", None)
        if header is not None:
            declared_n = header.n
    p1 = CoverState(instrument=instrument)
    p2 = CoverState(unit_benefits=True)
    emin: dict[VertexId, tuple[EdgeId, Fraction]] = {}
    benefits: dict[VertexId, Fraction] = {}
    stats = StreamStats()
    visits = 0
    for edge in edges:
        visits += 1
        stats.m_seen += 1
        for v, b in edge.members:
            prior = benefits.get(v)
            if prior is None:
                benefits[v] = b
                stats.total_benefit += b
            elif prior != b:
                raise ValueError(f"vertex {v} carries conflicting benefits {prior} and {b}")
            cur = emin.get(v)
            if cur is None or edge.cost < cur[1]:
                emin[v] = (edge.id, edge.cost)
        process_edge(p1, edge)
        process_edge(p2, edge)
    stats.n_seen = len(benefits)
    return DataStructureD(p1, p2, emin, benefits, stats, declared_n, visits)


@dataclass(frozen=True)
class Certificate:
    """Partial vertex -> edge-id mapping proving coverage."""

    assignment: Mapping[VertexId, EdgeId]

    def dom(self) -> frozenset[VertexId]:
        return frozenset(self.assignment)

    def im(self) -> frozenset[EdgeId]:
        return frozenset(self.assignment.values())

    def __len__(self) -> int:
        return len(self.assignment)


@dataclass(frozen=True)
class ExtractionReport:
    epsilon: Fraction
    regime: str
    r_star: int | None  # None when no finite effectiveness exists
    dom_benefit: Fraction
    im_size: int
    im_cost: Fraction | None = None  # known only to validators that see costs


def _largest_threshold(frozen: FrozenCover, qualifies) -> int | None:
    """Largest integer r for which the cumulative value at r qualifies.

    `qualifies(i)` examines the cumulative tables at the i-th distinct
    level (1-based; 0 is the empty prefix, which always qualifies).  The
    answer is one below the first disqualifying level; when every level
    qualifies it is the top level itself (nothing sits above it); when no
    levels exist it is None.
    """
    k = len(frozen.levels)
    if k == 0:
        return None
    i_star = 0
    for i in range(1, k + 1):
        if qualifies(i):
            i_star = i
        else:
            break
    if i_star == k:
        return frozen.levels[-1]
    return frozen.levels[i_star] - 1


def extract_above(d: DataStructureD, epsilon: Fraction) -> tuple[Certificate, ExtractionReport]:
    """Threshold the true-benefit run: keep vertices whose final effectiveness
    clears the largest r* with benefit(I(<=r*)) <= eps * b(V)."""
    epsilon = Fraction(epsilon)
    if not (0 <= epsilon < 1):
        raise ValueError(f"epsilon out of [0, 1): {epsilon}")
    if epsilon * epsilon * d.n < 1:
        raise ValueError(f"epsilon {epsilon} is below the regime split for n={d.n}")
    frozen = d.p1_frozen
    cap = epsilon * frozen.total_benefit
    r_star = _largest_threshold(frozen, lambda i: frozen._cum_benefit[i - 1] <= cap)
    if r_star is None:
        dom: frozenset[VertexId] = frozenset()
    else:
        dom = frozen.vertices_gt(r_star)
    assignment = {v: frozen.eid_of(v) for v in sorted(dom)}
    cert = Certificate(assignment)
    dom_benefit = sum((d.benefits[v] for v in dom), Fraction(0))
    report = ExtractionReport(
        epsilon=epsilon,
        regime=REGIME_ABOVE,
        r_star=r_star,
        dom_benefit=dom_benefit,
        im_size=len(cert.im()),
    )
    return cert, report


def extract_below(d: DataStructureD, epsilon: Fraction) -> tuple[Certificate, ExtractionReport]:
    """Threshold the unit-benefit run at the largest r* with |I1(<=r*)|^2 <= n,
    then map every leftover vertex to its cheapest covering edge."""
    epsilon = Fraction(epsilon)
    if not (0 <= epsilon < 1):
        raise ValueError(f"epsilon out of [0, 1): {epsilon}")
    if epsilon * epsilon * d.n >= 1:
        raise ValueError(f"epsilon {epsilon} is above the regime split for n={d.n}")
    frozen = d.p2_frozen
    n = d.n
    r_star = _largest_threshold(frozen, lambda i: frozen._cum_count[i - 1] ** 2 <= n)
    assignment: dict[VertexId, EdgeId] = {}
    if r_star is not None:
        for v in frozen.vertices_gt(r_star):
            assignment[v] = frozen.eid_of(v)
        leftover = frozen.vertices_le(r_star)
    else:
        leftover = frozenset()
    for v in leftover:
        entry = d.emin.get(v)
        if entry is not None:
            assignment[v] = entry[0]
    cert = Certificate(dict(sorted(assignment.items())))
    dom_benefit = sum((d.benefits[v] for v in assignment), Fraction(0))
    report = ExtractionReport(
        epsilon=epsilon,
        regime=REGIME_BELOW,
        r_star=r_star,
        dom_benefit=dom_benefit,
        im_size=len(cert.im()),
    )
    return cert, report


def extract(d: DataStructureD, epsilon: Fraction) -> tuple[Certificate, ExtractionReport]:
    """Dispatch on the exact regime test eps^2 * n >= 1.

    Many targets can be served from one structure; extraction never
    mutates it.
    """
    epsilon = Fraction(epsilon)
    if not (0 <= epsilon < 1):
        raise ValueError(f"epsilon out of [0, 1): {epsilon}")
    if epsilon * epsilon * d.n >= 1:
        return extract_above(d, epsilon)
    return extract_below(d, epsilon)


def round_weights_pow2(edges: Iterable[StreamEdge]) -> Iterator[StreamEdge]:
    """Replace every weight by the largest power of two not exceeding it.

    Ids and memberships are untouched; each weight is distorted by a factor
    in [1, 2), and the map is idempotent.
    """
    for edge in edges:
        yield StreamEdge(
            id=edge.id,
            cost=pow2_floor(edge.cost),
            members=tuple((v, pow2_floor(b)) for v, b in edge.members),
        )


class MembershipLog:
    """Harness-side record of every edge's members and cost.

    The engine itself never stores memberships; validators and tests use
    this log to check certificates against the actual stream.
    """

    def __init__(self) -> None:
        self._members: dict[EdgeId, frozenset[VertexId]] = {}
        self._costs: dict[EdgeId, Fraction] = {}

    def record(self, edge: StreamEdge) -> None:
        if edge.id in self._members:
            raise ValueError(f"duplicate edge id {edge.id}")
        self._members[edge.id] = frozenset(edge.vertex_ids())
        self._costs[edge.id] = edge.cost

    def record_all(self, edges: Iterable[StreamEdge]) -> None:
        for edge in edges:
            self.record(edge)

    def __contains__(self, eid: EdgeId) -> bool:
        return eid in self._members

    def members(self, eid: EdgeId) -> frozenset[VertexId]:
        return self._members[eid]

    def cost(self, eid: EdgeId) -> Fraction:
        return self._costs[eid]

    def cost_of(self, eids: Iterable[EdgeId]) -> Fraction:
        return sum((self._costs[e] for e in set(eids)), Fraction(0))


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    failure: str | None  # "membership" | "coverage"
    vertex: VertexId | None
    deficit: Fraction | None
    dom_benefit: Fraction
    required_benefit: Fraction
    im_cost: Fraction
    im_size: int


def validate_certificate(
    cert: Certificate,
    log: MembershipLog,
    benefits: Mapping[VertexId, Fraction],
    epsilon: Fraction,
) -> ValidationResult:
    """Exact check of both certificate conditions.

    Membership: every mapped vertex lies in the edge it is mapped to.
    Coverage: the mapped vertices carry at least (1 - eps) of the total
    benefit (non-strict).  The image cost is reported either way.
    """
    epsilon = Fraction(epsilon)
    im = cert.im()
    im_cost = sum((log.cost(e) for e in im if e in log), Fraction(0))
    dom_benefit = Fraction(0)
    total = sum(benefits.values(), Fraction(0))
    required = (1 - epsilon) * total
    for v, eid in cert.assignment.items():
        if eid not in log or v not in log.members(eid):
            return ValidationResult(
                ok=False,
                failure="membership",
                vertex=v,
                deficit=None,
                dom_benefit=dom_benefit,
                required_benefit=required,
                im_cost=im_cost,
                im_size=len(im),
            )
        if v not in benefits:
            raise ValueError(f"vertex {v} has no recorded benefit")
        dom_benefit += benefits[v]
    if dom_benefit < required:
        return ValidationResult(
            ok=False,
            failure="coverage",
            vertex=None,
            deficit=required - dom_benefit,
            dom_benefit=dom_benefit,
            required_benefit=required,
            im_cost=im_cost,
            im_size=len(im),
        )
    return ValidationResult(
        ok=True,
        failure=None,
        vertex=None,
        deficit=None,
        dom_benefit=dom_benefit,
        required_benefit=required,
        im_cost=im_cost,
        im_size=len(im),
    )


def _fmt_eff(value) -> str:
    return "_" if value is BOTTOM else str(value)


def _fmt_opt(value) -> str:
    return "_" if value is None else str(value)


def write_snapshot(d: DataStructureD, out: TextIO) -> None:
    """Versioned text dump, one row per seen vertex, byte-stable.

    Row: `v <id> <eff1> <eid1> <eff2> <eid2> <emin_id> <emin_cost> <benefit>`
    with `_` for unset fields.
    """
    out.write(
        f"d {SNAPSHOT_VERSION} n={d.n} m={d.stats.m_seen} "
        f"total_benefit={format_ratio(d.stats.total_benefit)}\n"
    )
    for v in sorted(d.benefits):
        emin_entry = d.emin.get(v)
        fields = [
            "v",
            str(v),
            _fmt_eff(d.p1.eff_of(v)),
            _fmt_opt(d.p1.eid_of(v)),
            _fmt_eff(d.p2.eff_of(v)),
            _fmt_opt(d.p2.eid_of(v)),
            _fmt_opt(emin_entry[0] if emin_entry else None),
            format_ratio(emin_entry[1]) if emin_entry else "_",
            format_ratio(d.benefits[v]),
        ]
        out.write(" ".join(fields) + "\n")


def snapshot_text(d: DataStructureD) -> str:
    buf = io.StringIO()
    write_snapshot(d, buf)
    return buf.getvalue()


def write_certificate(cert: Certificate, report: ExtractionReport, out: TextIO) -> None:
    """Summary line followed by one `c <vertex> <edge-id>` row per mapping."""
    out.write(
        "s"
        f" epsilon={format_ratio(report.epsilon)}"
        f" regime={report.regime}"
        f" r_star={_fmt_opt(report.r_star)}"
        f" dom_benefit={format_ratio(report.dom_benefit)}"
        f" im_size={report.im_size}"
        f" im_cost={format_ratio(report.im_cost) if report.im_cost is not None else '_'}"
        "\n"
    )
    for v in sorted(cert.assignment):
        out.write(f"c {v} {cert.assignment[v]}\n")


def certificate_text(cert: Certificate, report: ExtractionReport) -> str:
    buf = io.StringIO()
    write_certificate(cert, report, buf)
    return buf.getvalue()


def parse_certificate(source: Iterable[str]) -> tuple[Certificate, dict]:
    """Read back a certificate file; returns the mapping and the summary fields."""
    summary: dict = {}
    assignment: dict[VertexId, EdgeId] = {}
    for line_no, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "s":
            for item in fields[1:]:
                key, _, value = item.partition("=")
                summary[key] = value
        elif fields[0] == "c":
            if len(fields) != 3:
                raise ValueError(f"line {line_no}: bad certificate row")
            v, eid = int(fields[1]), int(fields[2])
            if v in assignment:
                raise ValueError(f"line {line_no}: vertex {v} mapped twice")
            assignment[v] = eid
        else:
            raise ValueError(f"line {line_no}: unknown record {fields[0]!r}")
    if "epsilon" in summary:
        summary["epsilon"] = parse_ratio(summary["epsilon"])
    return Certificate(assignment), summary
