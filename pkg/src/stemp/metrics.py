"""Scoring predicted base pairs against a reference structure.

Sensitivity, PPV, MCC and F1 are computed over base pairs: a pair counts as
a true positive only on an exact (p, q) index match. Sens, PPV and F1 are
kept as exact rationals; MCC is the square root of sens * ppv, so its exact
square is stored and the root is taken only for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable

from .errors import IndexOutOfRange
from .seq import PairingRule
from .stems import Pair

if TYPE_CHECKING:
    from .cliques import PredictionReport


@dataclass(frozen=True)
class ReferenceStructure:
    """A known folding: the pair set predictions are judged against."""

    id: str
    length: int
    pairs: frozenset[Pair]
    source: str = ""
    bases: str | None = None

    def __post_init__(self):
        used = set()
        for p, q in self.pairs:
            if not p < q:
                raise ValueError(f"reference pair ({p},{q}) is not ordered")
            for x in (p, q):
                if not 1 <= x <= self.length:
                    raise IndexOutOfRange(x, self.length)
                if x in used:
                    raise ValueError(f"index {x} appears in two reference pairs")
                used.add(x)


@dataclass(frozen=True)
class Metrics:
    """Pair-level confusion counts and the derived scores."""

    tp: int
    fp: int
    fn: int
    sens: Fraction
    ppv: Fraction
    f1: Fraction
    mcc_squared: Fraction

    @property
    def mcc(self) -> float:
        return math.sqrt(self.mcc_squared)


def score_prediction(predicted: Iterable[Pair], reference: ReferenceStructure) -> Metrics:
    """Compare a predicted pair set with the reference.

    Conventions for degenerate inputs: an empty prediction against an empty
    reference scores 1 everywhere; otherwise a side with no positives scores
    0 on the metric it starves (sens when the reference is empty, ppv when
    the prediction is), and F1 is 0 when sens + ppv is.
    """
    pred = set(predicted)
    for p, q in pred:
        for x in (p, q):
            if not 1 <= x <= reference.length:
                raise IndexOutOfRange(x, reference.length)
    ref = reference.pairs
    tp = len(pred & ref)
    fp = len(pred - ref)
    fn = len(ref - pred)
    one = Fraction(1)
    zero = Fraction(0)
    if not pred and not ref:
        return Metrics(tp=0, fp=0, fn=0, sens=one, ppv=one, f1=one, mcc_squared=one)
    sens = Fraction(tp, tp + fn) if tp + fn else zero
    ppv = Fraction(tp, tp + fp) if tp + fp else zero
    f1 = 2 * ppv * sens / (ppv + sens) if ppv + sens else zero
    return Metrics(tp=tp, fp=fp, fn=fn, sens=sens, ppv=ppv, f1=f1,
                   mcc_squared=sens * ppv)


def drop_noncanonical(reference: ReferenceStructure, rule: PairingRule) -> ReferenceStructure:
    """Remove reference pairs the pairing rule could never produce.

    Databases annotate non-canonical contacts (C-U, A-G, ...) that a
    canonical/wobble predictor cannot emit; with this filter those stop
    counting as false negatives. Requires the reference to carry bases.
    """
    if reference.bases is None:
        raise ValueError("reference carries no bases; cannot classify pairs")
    kept = frozenset(
        (p, q) for p, q in reference.pairs
        if rule.allows(reference.bases[p - 1], reference.bases[q - 1]))
    return replace(reference, pairs=kept)


@dataclass(frozen=True)
class ReportSummary:
    """Per-sequence roll-up: best score among rank-1 cliques, and overall."""

    metric: str
    top: Metrics
    best: Metrics
    best_scr: int
    best_dr: int
    best_multiplicity: int


def _metric_key(metrics: Metrics, metric: str):
    if metric == "mcc":
        return metrics.mcc_squared
    if metric == "f1":
        return metrics.f1
    raise ValueError(f"unknown metric {metric!r} (expected 'mcc' or 'f1')")


def summarize_report(report: "PredictionReport", reference: ReferenceStructure,
                     metric: str = "mcc") -> ReportSummary:
    """Top = best score among SCR=1 predictions; Best = over all of them.

    Comparison is exact (rational F1, rational squared MCC); the first
    prediction in report order wins ties, which cannot change either value.
    """
    if not report.predictions:
        raise ValueError("cannot summarize an empty report")
    scored = [(score_prediction(p.pairs, reference), p) for p in report.predictions]
    top = max((m for m, p in scored if p.scr == 1),
              key=lambda m: _metric_key(m, metric))
    best, best_pred = max(scored, key=lambda mp: _metric_key(mp[0], metric))
    return ReportSummary(metric=metric, top=top, best=best,
                         best_scr=best_pred.scr, best_dr=best_pred.dr,
                         best_multiplicity=best_pred.multiplicity)
