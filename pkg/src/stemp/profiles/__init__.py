"""Family profiles: per-family vertex generation, filtering, and assembly.

A profile bundles everything that differs between sequence families: the
pairing rule, the minimum stem length, Stem-Loop and span bounds, whether
partial stems are generated, the acceptor-stem rule (tRNA), and per-helix
gap patterns with domain scores (5S rRNA). Profiles ship as JSON documents
and can be overridden with user files.

All score comparisons are exact: bounds are rationals and a bound like
"3 < SL <= 4.7" can never flip on float rounding.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable

from ..errors import NotAcceptorCandidate, ProfileError
from ..seq import PairingRule, Sequence
from ..stems import (GapPattern, Stem, StemGraph, build_stem_graph, can_coexist,
                    canonical_order, enumerate_gapped_stems, enumerate_partial_stems,
                    enumerate_stems, pattern_of_pairs)

PROFILE_SCHEMA = "stemp-profile/1"
PROFILE_DIR_ENV = "STEMP_PROFILE_DIR"

BUILTIN_PROFILES = (
    "protein",
    "trna",
    "rrna5s-archaeal",
    "rrna5s-archaeal-general",
    "rrna5s-bacterial",
    "rrna5s-eukaryotic",
)


def as_fraction(value) -> Fraction:
    """Exact rational from an int, a decimal string, or a p/q string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value))


def render_fraction(value: Fraction) -> str:
    """Decimal text when the denominator allows it, else p/q."""
    if value.denominator == 1:
        return str(value.numerator)
    scaled = value
    for exp in range(1, 13):
        scaled *= 10
        if scaled.denominator == 1:
            digits = str(abs(scaled.numerator)).rjust(exp + 1, "0")
            sign = "-" if value < 0 else ""
            return f"{sign}{digits[:-exp]}.{digits[-exp:]}"
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Interval:
    """A rational interval with independently open or closed ends."""

    lo: Fraction | None = None
    hi: Fraction | None = None
    lo_strict: bool = False
    hi_strict: bool = False

    def __post_init__(self):
        if self.lo is not None and self.hi is not None:
            if self.lo > self.hi or (self.lo == self.hi and (self.lo_strict or self.hi_strict)):
                raise ProfileError(f"empty interval: {self}")

    def above_lower(self, x) -> bool:
        if self.lo is None:
            return True
        return x > self.lo if self.lo_strict else x >= self.lo

    def below_upper(self, x) -> bool:
        if self.hi is None:
            return True
        return x < self.hi if self.hi_strict else x <= self.hi

    def contains(self, x) -> bool:
        return self.above_lower(x) and self.below_upper(x)

    def __str__(self) -> str:
        lo = "" if self.lo is None else render_fraction(self.lo)
        hi = "" if self.hi is None else render_fraction(self.hi)
        return f"{lo}{'<' if self.lo_strict else '<='}x{'<' if self.hi_strict else '<='}{hi}"


def _interval_to_dict(iv: Interval | None) -> dict | None:
    if iv is None:
        return None
    doc = {}
    if iv.lo is not None:
        doc["min"] = render_fraction(iv.lo)
    if iv.hi is not None:
        doc["max"] = render_fraction(iv.hi)
    if iv.lo_strict:
        doc["min_exclusive"] = True
    if iv.hi_strict:
        doc["max_exclusive"] = True
    return doc


def _interval_from_dict(doc: dict | None) -> Interval | None:
    if doc is None:
        return None
    return Interval(
        lo=as_fraction(doc["min"]) if "min" in doc else None,
        hi=as_fraction(doc["max"]) if "max" in doc else None,
        lo_strict=bool(doc.get("min_exclusive", False)),
        hi_strict=bool(doc.get("max_exclusive", False)),
    )


@dataclass(frozen=True)
class AcceptorSpec:
    """Rule for stems closing the sequence's open ends (tRNA acceptor)."""

    max_score: Fraction


@dataclass(frozen=True)
class HelixSpec:
    """Allowed shapes and Stem-Loop bounds for one named helix."""

    name: str
    patterns: tuple[GapPattern, ...]
    sl: Interval | None = None

    def __post_init__(self):
        if not self.patterns:
            raise ProfileError(f"helix {self.name}: needs at least one pattern")


@dataclass(frozen=True)
class DomainSpec:
    """An outer helix enclosing an inner one, filtered by the combined score."""

    name: str
    outer: str
    inner: str
    gsl: Interval

    def __post_init__(self):
        if self.outer == self.inner:
            raise ProfileError(f"domain {self.name}: outer and inner helix must differ")


@dataclass(frozen=True)
class ProfileConfig:
    """Every per-family tunable in one place."""

    name: str
    family: str
    pairing: PairingRule
    min_stem_length: int
    sl: Interval | None = None
    span: Interval | None = None
    acceptor: AcceptorSpec | None = None
    partial_stems: bool = False
    use_gsl: bool = True
    helices: tuple[HelixSpec, ...] = ()
    domains: tuple[DomainSpec, ...] = ()
    notes: str = ""

    def __post_init__(self):
        if self.family not in ("protein", "trna", "rrna5s"):
            raise ProfileError(f"unknown family {self.family!r}")
        if self.min_stem_length < 2:
            raise ProfileError("minimum stem length must be >= 2")
        if self.family != "rrna5s" and (self.helices or self.domains):
            raise ProfileError("helix/domain specs are only valid for the rrna5s family")
        if self.family != "trna" and self.acceptor is not None:
            raise ProfileError("acceptor rule is only valid for the trna family")
        names = {h.name for h in self.helices}
        if len(names) != len(self.helices):
            raise ProfileError("duplicate helix names")
        for dom in self.domains:
            for ref in (dom.outer, dom.inner):
                if ref not in names:
                    raise ProfileError(f"domain {dom.name} references unknown helix {ref!r}")


# ---------------------------------------------------------------- scores

def acceptor_sl(stem: Stem, total_length: int) -> Fraction:
    """Score of a stem read in the closing direction: the loop it stabilizes
    is the open-ended remainder of the sequence, not the enclosed span.

    Only defined when the stem spans more than half the sequence.
    """
    if 2 * stem.span <= total_length:
        raise NotAcceptorCandidate(
            f"span {stem.span} does not reach past half of {total_length}")
    return Fraction(total_length - stem.span + 2 * stem.length - 2, stem.length)


# ---------------------------------------------------------------- tRNA

def _trim_innermost(stem: Stem) -> Stem:
    kept = stem.pairs[:-1]
    return Stem(i=stem.i, j=stem.j, pairs=kept, pattern=pattern_of_pairs(kept),
                helix=stem.helix)


def trna_vertices(seq: Sequence, cfg: ProfileConfig) -> list[Stem]:
    """Acceptor candidates plus body candidates per the tRNA pipeline.

    Stems spanning more than half the sequence are kept iff their acceptor
    score passes. All other stems (partial stems included when enabled) are
    trimmed from the inner end while the Stem-Loop score sits at or below
    the lower bound, then must land inside the score and span windows.
    """
    n = seq.length
    raw = enumerate_stems(seq, cfg.pairing, cfg.min_stem_length)
    out: dict[tuple, Stem] = {}

    if cfg.acceptor is not None:
        for s in raw:
            if 2 * s.span > n and acceptor_sl(s, n) <= cfg.acceptor.max_score:
                out.setdefault(s.pairs, s)

    pool = enumerate_partial_stems(raw, cfg.min_stem_length) if cfg.partial_stems else raw
    for s in pool:
        if 2 * s.span > n:
            continue  # acceptor side already handled
        t = s
        if cfg.sl is not None:
            while not cfg.sl.above_lower(t.sl):
                if t.length - 1 < cfg.min_stem_length:
                    t = None
                    break
                t = _trim_innermost(t)
        if t is None:
            continue
        if cfg.sl is not None and not cfg.sl.contains(t.sl):
            continue
        if cfg.span is not None and not cfg.span.contains(t.span):
            continue
        out.setdefault(t.pairs, t)
    return canonical_order(out.values())


# ---------------------------------------------------------------- 5S rRNA

def rrna5s_helix_candidates(seq: Sequence, spec: HelixSpec,
                            rule: PairingRule) -> list[Stem]:
    """Stems matching any of the helix's shapes, inside its score bounds,
    tagged with the helix name."""
    out: dict[tuple, Stem] = {}
    for pattern in spec.patterns:
        for s in enumerate_gapped_stems(seq, rule, pattern):
            if spec.sl is not None and not spec.sl.contains(s.sl):
                continue
            s = replace(s, pattern=pattern_of_pairs(s.pairs), helix=spec.name)
            out.setdefault(s.pairs, s)
    return canonical_order(out.values())


@dataclass(frozen=True)
class DomainCandidate:
    """An enclosing stem paired with a nested one, scored as a unit."""

    outer: Stem
    inner: Stem
    gsl: Fraction
    domain: str

    def as_stem(self) -> Stem:
        pairs = tuple(sorted(self.outer.pairs + self.inner.pairs))
        return Stem(i=pairs[0][0], j=pairs[0][1], pairs=pairs,
                    pattern=pattern_of_pairs(pairs), helix=self.domain)


def assemble_domains(outer: Iterable[Stem], inner: Iterable[Stem],
                     spec: DomainSpec) -> list[DomainCandidate]:
    """All co-existable (outer, inner) pairs where the outer stem encloses
    the inner one and the combined score lands inside the domain bounds.

    A domain is one stalk running to a single hairpin loop, so the inner
    stem must sit inside the outer's innermost pair; an inner stem lodged
    in a side gap of a gapped outer would open a second hairpin and is not
    a domain. The combined score divides the outer span by the summed stem
    lengths, so each candidate's composite vertex exposes it as its own
    span/length ratio and downstream energy stays the plain pair count.
    """
    found = []
    for vm in outer:
        hole_p, hole_q = vm.pairs[-1]
        for vn in inner:
            if not (hole_p < vn.i and vn.j < hole_q):
                continue
            if not can_coexist(vm, vn):
                continue
            gsl = Fraction(vm.span, vm.length + vn.length)
            if spec.gsl.contains(gsl):
                found.append(DomainCandidate(outer=vm, inner=vn, gsl=gsl,
                                             domain=spec.name))
    found.sort(key=lambda c: (c.outer.i, c.outer.j, c.inner.i, c.inner.j,
                              c.outer.length, c.inner.length))
    return found


def rrna5s_vertices(seq: Sequence, cfg: ProfileConfig,
                    use_gsl: bool | None = None) -> list[Stem]:
    """Vertex set for the 5S pipeline.

    With domain scoring on, helices claimed by a domain appear only inside
    composite vertices; unclaimed helices (Helix I) enter directly. With it
    off, every helix candidate is its own vertex.
    """
    if use_gsl is None:
        use_gsl = cfg.use_gsl
    candidates = {h.name: rrna5s_helix_candidates(seq, h, cfg.pairing)
                  for h in cfg.helices}
    out: dict[tuple, Stem] = {}
    if use_gsl and cfg.domains:
        claimed = {name for d in cfg.domains for name in (d.outer, d.inner)}
        for h in cfg.helices:
            if h.name not in claimed:
                for s in candidates[h.name]:
                    out.setdefault(s.pairs, s)
        for dom in cfg.domains:
            for cand in assemble_domains(candidates[dom.outer], candidates[dom.inner], dom):
                s = cand.as_stem()
                out.setdefault(s.pairs, s)
    else:
        for h in cfg.helices:
            for s in candidates[h.name]:
                out.setdefault(s.pairs, s)
    return canonical_order(out.values())


# ---------------------------------------------------------------- dispatch

def protein_vertices(seq: Sequence, cfg: ProfileConfig) -> list[Stem]:
    raw = enumerate_stems(seq, cfg.pairing, cfg.min_stem_length)
    pool = enumerate_partial_stems(raw, cfg.min_stem_length) if cfg.partial_stems else raw
    out = []
    for s in pool:
        if cfg.sl is not None and not cfg.sl.contains(s.sl):
            continue
        if cfg.span is not None and not cfg.span.contains(s.span):
            continue
        out.append(s)
    return canonical_order(out)


def profile_vertices(seq: Sequence, cfg: ProfileConfig,
                     use_gsl: bool | None = None) -> list[Stem]:
    if cfg.family == "protein":
        return protein_vertices(seq, cfg)
    if cfg.family == "trna":
        return trna_vertices(seq, cfg)
    return rrna5s_vertices(seq, cfg, use_gsl=use_gsl)


def build_profile_graph(seq: Sequence, cfg: ProfileConfig,
                        use_gsl: bool | None = None) -> StemGraph:
    """Family-specific vertices wired into the co-existence graph."""
    return build_stem_graph(profile_vertices(seq, cfg, use_gsl=use_gsl))


# ---------------------------------------------------------------- documents

def profile_to_dict(cfg: ProfileConfig) -> dict:
    doc: dict = {
        "schema": PROFILE_SCHEMA,
        "name": cfg.name,
        "family": cfg.family,
        "pairing": {"wobble": cfg.pairing.wobble, "uu": cfg.pairing.uu},
        "min_stem_length": cfg.min_stem_length,
        "stem_loop": _interval_to_dict(cfg.sl),
        "span": _interval_to_dict(cfg.span),
        "partial_stems": cfg.partial_stems,
        "use_gsl": cfg.use_gsl,
    }
    if cfg.acceptor is not None:
        doc["acceptor"] = {"max_score": render_fraction(cfg.acceptor.max_score)}
    if cfg.helices:
        doc["helices"] = [
            {
                "name": h.name,
                "patterns": [p.render() for p in h.patterns],
                "stem_loop": _interval_to_dict(h.sl),
            }
            for h in cfg.helices
        ]
    if cfg.domains:
        doc["domains"] = [
            {"name": d.name, "outer": d.outer, "inner": d.inner,
             "gsl": _interval_to_dict(d.gsl)}
            for d in cfg.domains
        ]
    if cfg.notes:
        doc["notes"] = cfg.notes
    return doc


def profile_from_dict(doc: dict) -> ProfileConfig:
    if doc.get("schema") != PROFILE_SCHEMA:
        raise ProfileError(f"not a profile document: schema={doc.get('schema')!r}")
    try:
        pairing = PairingRule(wobble=bool(doc.get("pairing", {}).get("wobble", False)),
                              uu=bool(doc.get("pairing", {}).get("uu", False)))
        acceptor = None
        if doc.get("acceptor") is not None:
            acceptor = AcceptorSpec(max_score=as_fraction(doc["acceptor"]["max_score"]))
        helices = tuple(
            HelixSpec(
                name=h["name"],
                patterns=tuple(GapPattern.parse(p) for p in h["patterns"]),
                sl=_interval_from_dict(h.get("stem_loop")),
            )
            for h in doc.get("helices", ())
        )
        domains = tuple(
            DomainSpec(name=d["name"], outer=d["outer"], inner=d["inner"],
                       gsl=_interval_from_dict(d["gsl"]))
            for d in doc.get("domains", ())
        )
        return ProfileConfig(
            name=doc["name"],
            family=doc["family"],
            pairing=pairing,
            min_stem_length=int(doc["min_stem_length"]),
            sl=_interval_from_dict(doc.get("stem_loop")),
            span=_interval_from_dict(doc.get("span")),
            acceptor=acceptor,
            partial_stems=bool(doc.get("partial_stems", False)),
            use_gsl=bool(doc.get("use_gsl", True)),
            helices=helices,
            domains=domains,
            notes=doc.get("notes", ""),
        )
    except (KeyError, ValueError) as exc:
        raise ProfileError(f"bad profile document: {exc}") from None


def load_profile(path: str | Path) -> ProfileConfig:
    return profile_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def builtin_profile(name: str) -> ProfileConfig:
    ref = resources.files("stemp.profiles").joinpath(f"{name}.json")
    if not ref.is_file():
        raise ProfileError(f"no builtin profile {name!r}; known: {', '.join(BUILTIN_PROFILES)}")
    return profile_from_dict(json.loads(ref.read_text(encoding="utf-8")))


def resolve_profile(selector: str) -> ProfileConfig:
    """Profile by name or path.

    Lookup order: an explicit path wins; otherwise ``$STEMP_PROFILE_DIR``
    (when set) is searched for ``<name>.json`` before the packaged profiles.
    """
    path = Path(selector)
    if selector.endswith(".json") or path.is_file():
        return load_profile(path)
    override_dir = os.environ.get(PROFILE_DIR_ENV)
    if override_dir:
        candidate = Path(override_dir) / f"{selector}.json"
        if candidate.is_file():
            return load_profile(candidate)
    return builtin_profile(selector)
