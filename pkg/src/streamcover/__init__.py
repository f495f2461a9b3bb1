"""One-pass set-cover engine over hypergraph edge streams.

Exact rational arithmetic end to end.  A single pass retains a compact
per-vertex structure from which coverage certificates for any target
fraction can be extracted afterwards; the package also ships affine-plane
adversarial instance generators with known cover witnesses and exact
brute-force oracles for testing at desk scale.
"""

from .cover import (
    BOTTOM,
    CoverState,
    FrozenCover,
    finalize,
    level,
    max_effective_subset,
    process_edge,
)
from .sssc import (
    Certificate,
    DataStructureD,
    ExtractionReport,
    MembershipLog,
    extract,
    extract_above,
    extract_below,
    round_weights_pow2,
    run_stream,
    validate_certificate,
)
from .stream import (
    StreamEdge,
    StreamFormatError,
    StreamHeader,
    StreamStats,
    check_benefit_consistency,
    parse_stream,
    read_edges,
    serialize_stream,
    stream_stats,
)

__all__ = [
    "BOTTOM",
    "Certificate",
    "CoverState",
    "DataStructureD",
    "ExtractionReport",
    "FrozenCover",
    "MembershipLog",
    "StreamEdge",
    "StreamFormatError",
    "StreamHeader",
    "StreamStats",
    "check_benefit_consistency",
    "extract",
    "extract_above",
    "extract_below",
    "finalize",
    "level",
    "max_effective_subset",
    "parse_stream",
    "process_edge",
    "read_edges",
    "round_weights_pow2",
    "run_stream",
    "serialize_stream",
    "stream_stats",
    "validate_certificate",
]
