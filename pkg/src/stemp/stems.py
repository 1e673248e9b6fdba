"""Stem enumeration and stem-graph construction.

A stem is a run of base pairs (i, j), (i+1, j-1), ... read inward from an
outermost pair. Every candidate stem becomes a vertex; edges connect stems
that can occur together in one structure (their base indices are disjoint),
which covers nesting, side-by-side placement, and clean pseudoknot crossings
alike. Each maximal clique of the resulting graph is a candidate folding.

Stems may carry gaps: a gap pattern such as ``2[0/1]6`` pairs two bases,
skips 0 bases on the 5' side and 1 on the 3' side, then pairs six more. The
effective stem length is the number of pairs, gaps excluded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence as SequenceABC

from .errors import FormatError
from .seq import PairingRule, Sequence

# Shortest allowed hairpin: the outermost pair spans at least 3 positions and
# no pair closes on adjacent bases (q - p >= 2), so strands never touch.
MIN_SPAN = 3
MIN_PAIR_GAP = 2

Pair = tuple[int, int]


@dataclass(frozen=True)
class GapPattern:
    """Segment lengths and the unpaired skips between them.

    ``segments`` holds the consecutive-pair counts; ``gaps[k]`` is the
    (5' skip, 3' skip) applied between segment k and segment k+1.
    Rendered notation round-trips: ``2[0/1]6`` means segments (2, 6) with
    one skipped base on the 3' side.
    """

    segments: tuple[int, ...]
    gaps: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.segments or any(s < 1 for s in self.segments):
            raise FormatError(f"segment lengths must be >= 1: {self.segments}")
        if len(self.gaps) != len(self.segments) - 1:
            raise FormatError(
                f"expected {len(self.segments) - 1} gaps for "
                f"{len(self.segments)} segments, got {len(self.gaps)}")
        if any(a < 0 or b < 0 for a, b in self.gaps):
            raise FormatError(f"gap sizes must be >= 0: {self.gaps}")

    @property
    def total_length(self) -> int:
        return sum(self.segments)

    def render(self) -> str:
        out = [str(self.segments[0])]
        for (a, b), seg in zip(self.gaps, self.segments[1:]):
            out.append(f"[{a}/{b}]{seg}")
        return "".join(out)

    @classmethod
    def parse(cls, text: str) -> "GapPattern":
        """Parse ``l1[n1/n2]l2...`` notation (a bare integer is one segment)."""
        tokens = re.findall(r"(\d+)|\[(\d+)/(\d+)\]|(.)", text)
        segments: list[int] = []
        gaps: list[tuple[int, int]] = []
        expect_segment = True
        for num, g1, g2, bad in tokens:
            if bad:
                raise FormatError(f"bad gap pattern {text!r}: unexpected {bad!r}")
            if num:
                if not expect_segment:
                    raise FormatError(f"bad gap pattern {text!r}")
                segments.append(int(num))
                expect_segment = False
            else:
                if expect_segment:
                    raise FormatError(f"bad gap pattern {text!r}")
                gaps.append((int(g1), int(g2)))
                expect_segment = True
        if expect_segment or not segments:
            raise FormatError(f"bad gap pattern {text!r}")
        return cls(tuple(segments), tuple(gaps))

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class Stem:
    """One candidate stem: the atomic unit of structure prediction.

    ``pairs`` lists the base pairs outermost-first; they always form a
    strictly nested chain. For a contiguous stem pairs are consecutive, for
    gapped or partial stems the chain skips unpaired bases. ``i``/``j`` are
    the outermost pair, ``length`` the number of pairs, ``span`` = j - i.
    """

    i: int
    j: int
    pairs: tuple[Pair, ...]
    pattern: GapPattern | None = None
    helix: str | None = None

    def __post_init__(self):
        if not self.pairs or self.pairs[0] != (self.i, self.j):
            raise ValueError(f"pairs must start at the outer pair ({self.i},{self.j})")
        prev_p, prev_q = 0, self.j + 1
        for p, q in self.pairs:
            if not (prev_p < p < q < prev_q):
                raise ValueError(f"pairs are not a nested chain: {self.pairs}")
            prev_p, prev_q = p, q

    @property
    def length(self) -> int:
        return len(self.pairs)

    @property
    def span(self) -> int:
        return self.j - self.i

    @property
    def sl(self) -> Fraction:
        """Stem-Loop score: span over stem length, kept exact."""
        return Fraction(self.span, self.length)

    @property
    def contiguous(self) -> bool:
        return all(
            (p, q) == (self.i + t, self.j - t) for t, (p, q) in enumerate(self.pairs)
        )

    @property
    def base_indices(self) -> frozenset[int]:
        return frozenset(x for pq in self.pairs for x in pq)

    def describe(self) -> str:
        pat = f" {self.pattern.render()}" if self.pattern else ""
        return f"({self.i},{self.j},{self.length},{self.span}){pat}"


def stem_loop_score(stem: Stem) -> Fraction:
    """Span-to-length ratio of a stem, as an exact rational."""
    return stem.sl


def contiguous_stem(i: int, j: int, length: int, helix: str | None = None) -> Stem:
    pairs = tuple((i + t, j - t) for t in range(length))
    return Stem(i=i, j=j, pairs=pairs, helix=helix)


def pattern_of_pairs(pairs: SequenceABC[Pair]) -> GapPattern | None:
    """Recover the gap notation of a nested pair chain; None if contiguous."""
    segments = [1]
    gaps: list[tuple[int, int]] = []
    for (p0, q0), (p1, q1) in zip(pairs, pairs[1:]):
        if (p1, q1) == (p0 + 1, q0 - 1):
            segments[-1] += 1
        else:
            gaps.append((p1 - p0 - 1, q0 - q1 - 1))
            segments.append(1)
    if not gaps:
        return None
    return GapPattern(tuple(segments), tuple(gaps))


def _sort_key(stem: Stem):
    return (stem.i, stem.j, stem.length, stem.pattern.render() if stem.pattern else "",
            stem.helix or "")


def canonical_order(stems: Iterable[Stem]) -> list[Stem]:
    """Stable vertex numbering: sorted by (i, j, l), then pattern text."""
    return sorted(stems, key=_sort_key)


def _check_sl_bounds(sl_bounds) -> None:
    if sl_bounds is None:
        return
    lo, hi = sl_bounds
    if not 0 < lo <= hi:
        raise ValueError(f"need 0 < sl_min <= sl_max, got [{lo}, {hi}]")


def _sl_ok(span: int, length: int, sl_bounds) -> bool:
    if sl_bounds is None:
        return True
    lo, hi = sl_bounds
    score = Fraction(span, length)
    return lo <= score <= hi


def enumerate_stems(seq: Sequence, rule: PairingRule, min_length: int,
                    sl_bounds: tuple | None = None) -> list[Stem]:
    """All maximal contiguous stems of at least ``min_length`` pairs.

    For every start pair (i, j) with j >= i+3 the run is extended inward
    while bases keep pairing and the strands stay apart; the maximal run is
    emitted when it meets the length and (optional, inclusive) Stem-Loop
    bounds. Runs starting inside a longer stem are their own vertices.
    """
    if min_length < 2:
        raise ValueError("minimum stem length must be >= 2")
    _check_sl_bounds(sl_bounds)
    r = seq.residues
    n = len(r)
    out: list[Stem] = []
    for i in range(1, n + 1):
        for j in range(i + MIN_SPAN, n + 1):
            if not rule.allows(r[i - 1], r[j - 1]):
                continue
            length = 1
            while True:
                p, q = i + length, j - length
                if q - p < MIN_PAIR_GAP or not rule.allows(r[p - 1], r[q - 1]):
                    break
                length += 1
            if length >= min_length and _sl_ok(j - i, length, sl_bounds):
                out.append(contiguous_stem(i, j, length))
    return canonical_order(out)


def enumerate_gapped_stems(seq: Sequence, rule: PairingRule, pattern: GapPattern,
                           sl_bounds: tuple | None = None) -> list[Stem]:
    """All stems matching a gap pattern exactly.

    From every start pair the prescribed segments are consumed inward with
    the pattern's skips between them. Candidates whose skips cross the
    strands are silently discarded, as are candidates where one more pair
    would extend the innermost segment (so a zero-gap pattern reduces to
    contiguous stems of exactly the pattern's total length).
    """
    _check_sl_bounds(sl_bounds)
    r = seq.residues
    n = len(r)
    out: list[Stem] = []
    for i in range(1, n + 1):
        for j in range(i + MIN_SPAN, n + 1):
            pairs: list[Pair] = []
            p, q = i, j
            ok = True
            for seg_idx, seg_len in enumerate(pattern.segments):
                for _ in range(seg_len):
                    if q - p < MIN_PAIR_GAP or not rule.allows(r[p - 1], r[q - 1]):
                        ok = False
                        break
                    pairs.append((p, q))
                    p += 1
                    q -= 1
                if not ok:
                    break
                if seg_idx < len(pattern.gaps):
                    p += pattern.gaps[seg_idx][0]
                    q -= pattern.gaps[seg_idx][1]
                    if q - p < MIN_PAIR_GAP:
                        ok = False  # skip ran the strands into each other
                        break
            if not ok:
                continue
            if q - p >= MIN_PAIR_GAP and rule.allows(r[p - 1], r[q - 1]):
                continue  # innermost segment would keep going
            if _sl_ok(j - i, pattern.total_length, sl_bounds):
                out.append(Stem(i=i, j=j, pairs=tuple(pairs), pattern=pattern))
    return canonical_order(out)


def enumerate_partial_stems(stems: Iterable[Stem], min_length: int) -> list[Stem]:
    """Close a contiguous stem set under end trims and single interior gaps.

    Returns the input plus every sub-stem of at least ``min_length`` pairs
    obtained by dropping pairs from the outer and/or inner end, plus, for
    each stem long enough, the variants that omit exactly one interior pair
    (their gap pattern is recorded). Duplicated pair sets are emitted once.
    """
    seen: dict[tuple[Pair, ...], Stem] = {}

    def add(stem: Stem):
        seen.setdefault(stem.pairs, stem)

    stems = list(stems)
    for s in stems:
        add(s)
    for s in stems:
        l = s.length
        for a in range(l):
            for b in range(l - a):
                if a == 0 and b == 0:
                    continue
                kept = s.pairs[a:l - b]
                if len(kept) < min_length:
                    continue
                add(Stem(i=kept[0][0], j=kept[0][1], pairs=kept))
        if l >= min_length + 1:
            for t in range(1, l - 1):
                kept = s.pairs[:t] + s.pairs[t + 1:]
                add(Stem(i=s.i, j=s.j, pairs=kept, pattern=pattern_of_pairs(kept)))
    return canonical_order(seen.values())


def can_coexist(a: Stem, b: Stem) -> bool:
    """True iff the two stems can appear in one structure.

    Contiguous stems use the interval tests: one precedes the other, one
    nests inside the other's loop, or they cross cleanly as a pseudoknot.
    Gapped and partial stems fall back to the equivalent pair-set test
    (no base index may serve two stems).
    """
    if a.contiguous and b.contiguous:
        m, n = (a, b) if (a.i, a.j) <= (b.i, b.j) else (b, a)
        if m.j < n.i:  # m entirely precedes n
            return True
        if n.j < m.i:  # n entirely precedes m
            return True
        inner_ok = m.i + m.length - 1 < n.i
        if inner_ok and n.j < m.j - m.length + 1:  # n inside m's loop
            return True
        if (inner_ok and n.i + n.length - 1 < m.j - m.length + 1
                and m.j < n.j - n.length + 1):  # pseudoknot crossing
            return True
        return False
    return not (a.base_indices & b.base_indices)


@dataclass(frozen=True)
class StemGraph:
    """Vertices plus a symmetric co-existence relation, immutable once built."""

    vertices: tuple[Stem, ...]
    neighbor_masks: tuple[int, ...] = field(repr=False)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        out = []
        for u, mask in enumerate(self.neighbor_masks):
            m = mask >> (u + 1) << (u + 1)
            while m:
                v = (m & -m).bit_length() - 1
                m &= m - 1
                out.append((u, v))
        return tuple(sorted(out))

    @property
    def edge_count(self) -> int:
        return sum(m.bit_count() for m in self.neighbor_masks) // 2

    def is_adjacent(self, u: int, v: int) -> bool:
        return bool(self.neighbor_masks[u] >> v & 1)


def build_stem_graph(vertices: Iterable[Stem]) -> StemGraph:
    """Connect every co-existable pair of vertices. Vertex order is kept."""
    vs = tuple(vertices)
    index_sets = [v.base_indices for v in vs]
    masks = [0] * len(vs)
    for u in range(len(vs)):
        for v in range(u + 1, len(vs)):
            if index_sets[u] & index_sets[v]:
                continue
            if can_coexist(vs[u], vs[v]):
                masks[u] |= 1 << v
                masks[v] |= 1 << u
    return StemGraph(vertices=vs, neighbor_masks=tuple(masks))


def render_graph_text(graph: StemGraph) -> str:
    """Line dump: one vertex per line, then one edge per line."""
    lines = []
    for k, s in enumerate(graph.vertices, start=1):
        pat = f" {s.pattern.render()}" if s.pattern else ""
        lines.append(f"v{k} {s.i} {s.j} {s.length} {s.span} {s.sl}{pat}")
    for u, v in graph.edges:
        lines.append(f"e {u + 1} {v + 1}")
    return "\n".join(lines) + "\n"
