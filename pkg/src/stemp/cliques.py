"""Maximal-clique enumeration and prediction ranking.

Every maximal clique of the stem graph is a candidate folding. Cliques are
scored by their total number of matched base pairs (the "energy") and ranked
with Standard Competition Ranking (1224) and Dense Ranking (1223). Ties are
ordered lexicographically on the sorted vertex tuples so output is fully
deterministic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable

from .errors import BudgetExceeded
from .stems import Pair, StemGraph


def maximal_cliques(graph: StemGraph, max_cliques: int | None = None,
                    max_seconds: float | None = None) -> list[tuple[int, ...]]:
    """All maximal cliques, each once, as sorted vertex-index tuples.

    Bron-Kerbosch with pivoting: the pivot is the vertex of P | X with the
    most neighbours in P, ties broken by lowest index. Isolated vertices come
    out as singleton cliques. Worst case is exponential, so callers may set a
    clique-count or wall-time budget; exceeding it raises BudgetExceeded and
    no partial result is returned.
    """
    n = len(graph.vertices)
    if n == 0:
        return []
    masks = graph.neighbor_masks
    deadline = time.monotonic() + max_seconds if max_seconds is not None else None
    out: list[tuple[int, ...]] = []

    def expand(r: list[int], p: int, x: int):
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(f"clique search passed {max_seconds} s")
        if p == 0 and x == 0:
            out.append(tuple(sorted(r)))
            if max_cliques is not None and len(out) > max_cliques:
                raise BudgetExceeded(f"more than {max_cliques} maximal cliques")
            return
        pux = p | x
        pivot, best = -1, -1
        m = pux
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            cnt = (p & masks[u]).bit_count()
            if cnt > best:
                pivot, best = u, cnt
        cand = p & ~masks[pivot]
        while cand:
            v = (cand & -cand).bit_length() - 1
            bit = 1 << v
            cand &= cand - 1
            r.append(v)
            expand(r, p & masks[v], x & masks[v])
            r.pop()
            p &= ~bit
            x |= bit

    expand([], (1 << n) - 1, 0)
    return sorted(out)


@dataclass(frozen=True)
class FoldPrediction:
    """One maximal clique read as a folding candidate."""

    vertices: tuple[int, ...]
    energy: int
    pairs: tuple[Pair, ...]
    scr: int
    dr: int
    multiplicity: int


@dataclass(frozen=True)
class PredictionReport:
    """All candidate foldings of one sequence, best energy first."""

    sequence_id: str
    profile: str
    predictions: tuple[FoldPrediction, ...]
    timing: float | None = None

    def top_ranked(self) -> tuple[FoldPrediction, ...]:
        return tuple(p for p in self.predictions if p.scr == 1)


def clique_pairs(graph: StemGraph, clique: Iterable[int]) -> tuple[Pair, ...]:
    """Union of the member stems' base pairs, sorted by first index."""
    pairs: list[Pair] = []
    for v in clique:
        pairs.extend(graph.vertices[v].pairs)
    pairs.sort()
    return tuple(pairs)


def prediction_pairs(prediction: FoldPrediction, graph: StemGraph) -> tuple[Pair, ...]:
    """Recompute a prediction's pair set from the graph it came from."""
    return clique_pairs(graph, prediction.vertices)


def rank_predictions(graph: StemGraph, cliques: Iterable[tuple[int, ...]],
                     sequence_id: str = "", profile: str = "",
                     timing: float | None = None) -> PredictionReport:
    """Score cliques by total matched pairs and assign SCR and DR ranks."""
    entries = []
    for clique in cliques:
        vs = tuple(sorted(clique))
        energy = sum(graph.vertices[v].length for v in vs)
        pairs = clique_pairs(graph, vs)
        indices = {x for pq in pairs for x in pq}
        if len(pairs) != energy or len(indices) != 2 * energy:
            raise ValueError(f"clique {vs} reuses base indices; not a valid structure")
        entries.append((vs, energy, pairs))
    entries.sort(key=lambda e: (-e[1], e[0]))

    by_energy: dict[int, int] = {}
    for _, energy, _ in entries:
        by_energy[energy] = by_energy.get(energy, 0) + 1

    predictions = []
    better = 0
    dense = 0
    prev_energy = None
    for vs, energy, pairs in entries:
        if energy != prev_energy:
            scr = better + 1
            dense += 1
            prev_energy = energy
        predictions.append(FoldPrediction(
            vertices=vs, energy=energy, pairs=pairs,
            scr=scr, dr=dense, multiplicity=by_energy[energy]))
        better += 1
    return PredictionReport(sequence_id=sequence_id, profile=profile,
                            predictions=tuple(predictions), timing=timing)
