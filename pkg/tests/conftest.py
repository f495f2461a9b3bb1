"""Shared fixtures: the seeded random-instance corpus and small oracles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import pytest

from streamcover.advgen import SeededBits, gen_random
from streamcover.cover import BOTTOM, eff_lt, level
from streamcover.oracles import OfflineInstance, OptCover, brute_force_opt
from streamcover.sssc import DataStructureD, MembershipLog, run_stream
from streamcover.stream import StreamEdge, StreamHeader

CORPUS_SIZE = 1000
EPS_SWEEP = (Fraction(0), Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
OPT_NODE_BUDGET = 50_000


def corpus_params(seed: int) -> tuple[int, int]:
    """Instance shape for one corpus seed: n in [1, 20], m in [1, 30]."""
    bits = SeededBits(10_000 + seed)
    return 1 + bits.below(20), 1 + bits.below(30)


def corpus_instance(seed: int) -> tuple[tuple[StreamEdge, ...], StreamHeader]:
    n, m = corpus_params(seed)
    return gen_random(n, m, seed=seed)


@dataclass
class CorpusEntry:
    seed: int
    edges: tuple[StreamEdge, ...]
    header: StreamHeader
    d: DataStructureD
    log: MembershipLog
    instance: OfflineInstance


@pytest.fixture(scope="session")
def corpus() -> list[CorpusEntry]:
    entries = []
    for seed in range(CORPUS_SIZE):
        edges, header = corpus_instance(seed)
        d = run_stream(edges, declared_n=header.n, instrument=True)
        log = MembershipLog()
        log.record_all(edges)
        entries.append(CorpusEntry(seed, edges, header, d, log, OfflineInstance(edges)))
    return entries


@pytest.fixture(scope="session")
def corpus_opt(corpus) -> dict[int, OptCover]:
    return {
        entry.seed: brute_force_opt(entry.instance, node_budget=OPT_NODE_BUDGET)
        for entry in corpus
    }


def enumerate_effective_max(
    members: tuple[tuple[int, Fraction], ...],
    effs: dict[int, object],
    cost: Fraction,
) -> tuple[Fraction, list[frozenset[int]]]:
    """All-subsets oracle: the maximum benefit over qualifying subsets and
    every subset attaining it.  A subset qualifies when its level strictly
    beats each member's current effectiveness; the empty set qualifies
    vacuously with benefit 0."""
    best = Fraction(0)
    witnesses: list[frozenset[int]] = [frozenset()]
    k = len(members)
    for mask in range(1, 1 << k):
        subset = [members[i] for i in range(k) if mask >> i & 1]
        benefit = sum((b for _, b in subset), Fraction(0))
        lv = level(benefit, cost)
        if all(eff_lt(effs.get(v, BOTTOM), lv) for v, _ in subset):
            if benefit > best:
                best = benefit
                witnesses = [frozenset(v for v, _ in subset)]
            elif benefit == best:
                witnesses.append(frozenset(v for v, _ in subset))
    return best, witnesses
