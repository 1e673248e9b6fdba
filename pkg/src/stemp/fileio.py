"""File formats: FASTA, connectivity tables, dot-bracket, and JSON documents.

All parsers are pure and reentrant. JSON documents (reports, graph dumps,
profiles) round-trip: parsing a serialized document reproduces the original
object. Schemas are documented under docs/.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .cliques import FoldPrediction, PredictionReport
from .errors import (AsymmetricPair, FormatError, IndexOutOfRange,
                     InvalidCharacter, TooManyLayers)
from .metrics import ReferenceStructure
from .seq import Sequence, parse_sequence
from .stems import GapPattern, Pair, Stem, StemGraph, contiguous_stem

BRACKET_TIERS = ("()", "[]", "{}", "<>")
_OPEN = {pair[0]: tier for tier, pair in enumerate(BRACKET_TIERS)}
_CLOSE = {pair[1]: tier for tier, pair in enumerate(BRACKET_TIERS)}


# ---------------------------------------------------------------- FASTA

def read_fasta(path: str | Path) -> list[Sequence]:
    """All records of a FASTA file, in file order.

    A record id is the header text up to the first whitespace. Residues are
    normalized by parse_sequence; offending characters are reported with the
    record id and the line they sit on.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    records: list[tuple[str, list[tuple[int, str]]]] = []
    for line_no, line in enumerate(lines, start=1):
        if line.startswith(">"):
            header = line[1:].strip()
            rec_id = header.split()[0] if header else ""
            records.append((rec_id, []))
        elif line.strip():
            if not records:
                raise FormatError(f"{path}: line {line_no}: sequence data before a '>' header")
            records[-1][1].append((line_no, line))
    out = []
    for rec_id, body in records:
        text = "".join(chunk for _, chunk in body)
        try:
            out.append(parse_sequence(text, id=rec_id))
        except InvalidCharacter as exc:
            raise InvalidCharacter(exc.position, exc.char, record=rec_id,
                                   line=_line_of(body, exc.position)) from None
    return out


def _line_of(body: list[tuple[int, str]], position: int) -> int | None:
    seen = 0
    for line_no, chunk in body:
        kept = sum(1 for ch in chunk if not (ch.isspace() or ch.isdigit()))
        if seen + kept >= position:
            return line_no
        seen += kept
    return body[-1][0] if body else None


# ---------------------------------------------------------------- CT

def parse_ct(text: str, id_hint: str = "") -> ReferenceStructure:
    """Parse one connectivity table.

    Header: length plus optional title. Body: one line per residue with
    columns "index base prev next pair_index orig_index"; pair_index 0 means
    unpaired. Mutual pairing is enforced (AsymmetricPair otherwise).
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FormatError("empty CT file")
    head = lines[0].split(None, 1)
    try:
        length = int(head[0])
    except ValueError:
        raise FormatError(f"CT header must start with the length: {lines[0]!r}") from None
    title = head[1].strip() if len(head) > 1 else ""
    body = lines[1:]
    if len(body) != length:
        raise FormatError(f"CT header says {length} residues, body has {len(body)} lines")
    partners = [0] * (length + 1)
    bases = []
    for expect, line in enumerate(body, start=1):
        cols = line.split()
        if len(cols) < 5:
            raise FormatError(f"CT line {expect} has {len(cols)} columns, need at least 5")
        idx = int(cols[0])
        if idx != expect:
            raise FormatError(f"CT line {expect} is numbered {idx}")
        partner = int(cols[4])
        if partner < 0 or partner > length:
            raise IndexOutOfRange(partner, length)
        if partner == idx:
            raise FormatError(f"CT line {idx} pairs with itself")
        partners[idx] = partner
        base = cols[1].upper().replace("T", "U")
        bases.append(base if len(base) == 1 else "N")
    pairs = set()
    for i in range(1, length + 1):
        j = partners[i]
        if j == 0:
            continue
        if partners[j] != i:
            raise AsymmetricPair(i, j)
        if i < j:
            pairs.add((i, j))
    return ReferenceStructure(id=title or id_hint, length=length,
                              pairs=frozenset(pairs), source="ct",
                              bases="".join(bases))


def read_ct(path: str | Path) -> ReferenceStructure:
    path = Path(path)
    return parse_ct(path.read_text(encoding="utf-8"), id_hint=path.stem)


def write_ct(seq: Sequence, pairs: Iterable[Pair], title: str | None = None) -> str:
    """Render a connectivity table for a sequence and its pair set."""
    n = seq.length
    partner = [0] * (n + 1)
    for p, q in pairs:
        for x in (p, q):
            if not 1 <= x <= n:
                raise IndexOutOfRange(x, n)
        if partner[p] or partner[q]:
            raise ValueError(f"index reused by pair ({p},{q})")
        partner[p] = q
        partner[q] = p
    lines = [f"{n} {title if title is not None else seq.id}".rstrip()]
    for k in range(1, n + 1):
        nxt = k + 1 if k < n else 0
        lines.append(f"{k} {seq.base(k)} {k - 1} {nxt} {partner[k]} {k}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- dot-bracket

def write_dot_bracket(seq: Sequence | int, pairs: Iterable[Pair]) -> str:
    """Render pairs as dot-bracket text, pseudoknots on higher tiers.

    Greedy layering: pairs sorted by first index go to the lowest tier of
    ( ) [ ] { } < > whose pairs they do not cross. More than four mutually
    crossing layers raises TooManyLayers.
    """
    n = seq if isinstance(seq, int) else seq.length
    ordered = sorted(pairs)
    chars = ["."] * n
    tiers: list[list[Pair]] = []
    used = set()
    for p, q in ordered:
        if not (1 <= p < q <= n):
            raise IndexOutOfRange(q if q > n else p, n)
        if p in used or q in used:
            raise ValueError(f"index reused by pair ({p},{q})")
        used.update((p, q))
        placed = False
        for tier, members in enumerate(tiers):
            if not any(a < p < b < q or p < a < q < b for a, b in members):
                members.append((p, q))
                chars[p - 1], chars[q - 1] = BRACKET_TIERS[tier]
                placed = True
                break
        if not placed:
            if len(tiers) >= len(BRACKET_TIERS):
                raise TooManyLayers(f"pair ({p},{q}) needs a fifth bracket tier")
            tiers.append([(p, q)])
            chars[p - 1], chars[q - 1] = BRACKET_TIERS[len(tiers) - 1]
    return "".join(chars)


def parse_dot_bracket(text: str) -> frozenset[Pair]:
    """Pairs (1-based) encoded by a dot-bracket string with up to 4 tiers."""
    stacks: list[list[int]] = [[] for _ in BRACKET_TIERS]
    pairs = set()
    for pos, ch in enumerate(text.strip(), start=1):
        if ch in "._-,:":
            continue
        if ch in _OPEN:
            stacks[_OPEN[ch]].append(pos)
        elif ch in _CLOSE:
            stack = stacks[_CLOSE[ch]]
            if not stack:
                raise FormatError(f"unmatched {ch!r} at position {pos}")
            pairs.add((stack.pop(), pos))
        else:
            raise FormatError(f"unexpected character {ch!r} at position {pos}")
    for tier, stack in zip(BRACKET_TIERS, stacks):
        if stack:
            raise FormatError(f"unmatched {tier[0]!r} at position {stack[-1]}")
    return frozenset(pairs)


def read_dot_bracket(path: str | Path) -> ReferenceStructure:
    """Reference from a .dbn-style file: optional '>' header, optional
    sequence line, then the structure line."""
    path = Path(path)
    name = path.stem
    bases = None
    structure = None
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            header = line[1:].strip()
            name = header.split()[0] if header else name
        elif set(line) <= set("._-,:()[]{}<>"):
            structure = line
        else:
            bases = line.upper().replace("T", "U")
    if structure is None:
        raise FormatError(f"{path}: no dot-bracket line found")
    if bases is not None and len(bases) != len(structure):
        raise FormatError(f"{path}: sequence and structure lengths differ")
    return ReferenceStructure(id=name, length=len(structure),
                              pairs=parse_dot_bracket(structure),
                              source="dotbracket", bases=bases)


def read_reference(path: str | Path) -> ReferenceStructure:
    """Dispatch on extension: .ct is a connectivity table, otherwise .dbn."""
    path = Path(path)
    if path.suffix.lower() == ".ct":
        return read_ct(path)
    return read_dot_bracket(path)


# ---------------------------------------------------------------- reports

REPORT_SCHEMA = "stemp-report/1"
GRAPH_SCHEMA = "stemp-graph/1"


def report_to_dict(report: PredictionReport, seq: Sequence | None = None,
                   include_timing: bool = False) -> dict:
    """JSON-ready form of a report; timing only on request so that repeated
    runs serialize byte-identically."""
    doc = {
        "schema": REPORT_SCHEMA,
        "sequence_id": report.sequence_id,
        "profile": report.profile,
        "predictions": [
            {
                "rank_scr": p.scr,
                "rank_dr": p.dr,
                "multiplicity": p.multiplicity,
                "energy": p.energy,
                "vertices": [v + 1 for v in p.vertices],
                "pairs": [list(pq) for pq in p.pairs],
                "dot_bracket": write_dot_bracket(seq, p.pairs) if seq is not None else None,
            }
            for p in report.predictions
        ],
    }
    if include_timing:
        doc["timing_seconds"] = report.timing
    return doc


def report_from_dict(doc: dict) -> PredictionReport:
    if doc.get("schema") != REPORT_SCHEMA:
        raise FormatError(f"not a report document: schema={doc.get('schema')!r}")
    preds = tuple(
        FoldPrediction(
            vertices=tuple(v - 1 for v in entry["vertices"]),
            energy=entry["energy"],
            pairs=tuple((p, q) for p, q in entry["pairs"]),
            scr=entry["rank_scr"],
            dr=entry["rank_dr"],
            multiplicity=entry["multiplicity"],
        )
        for entry in doc["predictions"]
    )
    return PredictionReport(sequence_id=doc["sequence_id"], profile=doc["profile"],
                            predictions=preds, timing=doc.get("timing_seconds"))


def write_report(report: PredictionReport, path: str | Path,
                 seq: Sequence | None = None, include_timing: bool = False) -> None:
    doc = report_to_dict(report, seq=seq, include_timing=include_timing)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_report(path: str | Path) -> PredictionReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------- graph dumps

def _stem_to_dict(stem: Stem) -> dict:
    return {
        "i": stem.i,
        "j": stem.j,
        "length": stem.length,
        "span": stem.span,
        "sl": str(stem.sl),
        "pattern": stem.pattern.render() if stem.pattern else None,
        "helix": stem.helix,
    }


def _stem_from_dict(entry: dict) -> Stem:
    i, j, length = entry["i"], entry["j"], entry["length"]
    if entry.get("pattern"):
        pattern = GapPattern.parse(entry["pattern"])
        stem = Stem(i=i, j=j, pairs=pattern_pairs(i, j, pattern), pattern=pattern,
                    helix=entry.get("helix"))
    else:
        stem = contiguous_stem(i, j, length, helix=entry.get("helix"))
    if stem.length != length or str(stem.sl) != entry["sl"] or stem.span != entry["span"]:
        raise FormatError(f"inconsistent stem entry: {entry}")
    return stem


def pattern_pairs(i: int, j: int, pattern: GapPattern) -> tuple[Pair, ...]:
    """Expand a gap pattern anchored at outer pair (i, j) into its pairs."""
    pairs = []
    p, q = i, j
    for seg_idx, seg_len in enumerate(pattern.segments):
        for _ in range(seg_len):
            pairs.append((p, q))
            p += 1
            q -= 1
        if seg_idx < len(pattern.gaps):
            p += pattern.gaps[seg_idx][0]
            q -= pattern.gaps[seg_idx][1]
    return tuple(pairs)


def graph_to_dict(graph: StemGraph) -> dict:
    return {
        "schema": GRAPH_SCHEMA,
        "vertices": [_stem_to_dict(s) for s in graph.vertices],
        "edges": [[u + 1, v + 1] for u, v in graph.edges],
    }


def graph_from_dict(doc: dict) -> StemGraph:
    if doc.get("schema") != GRAPH_SCHEMA:
        raise FormatError(f"not a graph document: schema={doc.get('schema')!r}")
    vertices = tuple(_stem_from_dict(e) for e in doc["vertices"])
    masks = [0] * len(vertices)
    for u1, v1 in doc["edges"]:
        u, v = u1 - 1, v1 - 1
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return StemGraph(vertices=vertices, neighbor_masks=tuple(masks))


def parse_graph_text(text: str) -> StemGraph:
    """Inverse of stems.render_graph_text."""
    vertices: list[Stem] = []
    edges: list[tuple[int, int]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        cols = line.split()
        if cols[0].startswith("v"):
            i, j, length, span = (int(x) for x in cols[1:5])
            pattern = GapPattern.parse(cols[6]) if len(cols) > 6 else None
            if pattern:
                stem = Stem(i=i, j=j, pairs=pattern_pairs(i, j, pattern), pattern=pattern)
            else:
                stem = contiguous_stem(i, j, length)
            if stem.length != length or stem.span != span or str(stem.sl) != cols[5]:
                raise FormatError(f"inconsistent vertex line: {line!r}")
            vertices.append(stem)
        elif cols[0] == "e":
            edges.append((int(cols[1]) - 1, int(cols[2]) - 1))
        else:
            raise FormatError(f"unrecognized graph line: {line!r}")
    masks = [0] * len(vertices)
    for u, v in edges:
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return StemGraph(vertices=tuple(vertices), neighbor_masks=tuple(masks))
