"""Command-line driver: predict, evaluate, and batch workflows.

Exit codes: 0 success, 2 for unreadable or inconsistent inputs, 3 when a
clique budget is exceeded. All outputs are UTF-8 text; reports are
byte-identical across runs unless --timing is requested.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .cliques import PredictionReport, maximal_cliques, rank_predictions
from .errors import BudgetExceeded, StempError
from .fileio import (graph_to_dict, read_fasta, read_reference, report_to_dict,
                     write_dot_bracket)
from .metrics import (Metrics, ReferenceStructure, drop_noncanonical,
                      score_prediction, summarize_report)
from .profiles import (Interval, ProfileConfig, as_fraction, build_profile_graph,
                       profile_from_dict, profile_to_dict, resolve_profile)
from .seq import Sequence
from .stems import StemGraph, render_graph_text

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3

METRIC_BUCKETS = (("0.95", Fraction("0.95")), ("0.90", Fraction("0.90")),
                  ("0.85", Fraction("0.85")), ("0.80", Fraction("0.80")))
SCR_BUCKETS = (1, 5, 10, 15)


def _add_profile_options(parser: argparse.ArgumentParser):
    parser.add_argument("--profile", required=True,
                        help="builtin profile name (protein, trna, rrna5s-archaeal, "
                             "rrna5s-archaeal-general, rrna5s-bacterial, "
                             "rrna5s-eukaryotic) or a path to a profile JSON")
    parser.add_argument("-L", "--min-stem-length", type=int, default=None,
                        help="override the profile's minimum stem length")
    parser.add_argument("--sl-min", default=None,
                        help="override the lower Stem-Loop bound (inclusive)")
    parser.add_argument("--sl-max", default=None,
                        help="override the upper Stem-Loop bound (inclusive)")
    parser.add_argument("--wobble", action="store_true", default=None,
                        help="allow G-U pairs")
    parser.add_argument("--uu", action="store_true", default=None,
                        help="allow U-U pairs")
    gsl = parser.add_mutually_exclusive_group()
    gsl.add_argument("--use-gsl", dest="use_gsl", action="store_true", default=None,
                     help="assemble 5S domains with the combined-score filter (default)")
    gsl.add_argument("--no-gsl", dest="use_gsl", action="store_false",
                     help="skip domain assembly; every helix candidate is a vertex")
    parser.add_argument("--max-cliques", type=int, default=None,
                        help="abort (exit 3) past this many maximal cliques")
    parser.add_argument("--max-seconds", type=float, default=None,
                        help="abort (exit 3) past this much search time per sequence")


def _configure(args) -> ProfileConfig:
    cfg = resolve_profile(args.profile)
    if args.min_stem_length is not None:
        cfg = replace(cfg, min_stem_length=args.min_stem_length)
    if args.sl_min is not None or args.sl_max is not None:
        base = cfg.sl or Interval()
        cfg = replace(cfg, sl=Interval(
            lo=as_fraction(args.sl_min) if args.sl_min is not None else base.lo,
            hi=as_fraction(args.sl_max) if args.sl_max is not None else base.hi,
            lo_strict=base.lo_strict if args.sl_min is None else False,
            hi_strict=base.hi_strict if args.sl_max is None else False,
        ))
    pairing = cfg.pairing
    if args.wobble is not None:
        pairing = replace(pairing, wobble=args.wobble)
    if args.uu is not None:
        pairing = replace(pairing, uu=args.uu)
    cfg = replace(cfg, pairing=pairing)
    if args.use_gsl is not None:
        cfg = replace(cfg, use_gsl=args.use_gsl)
    return cfg


def run_pipeline(seq: Sequence, cfg: ProfileConfig, max_cliques: int | None = None,
                 max_seconds: float | None = None) -> tuple[StemGraph, PredictionReport]:
    """Graph construction, clique search, and ranking for one sequence."""
    start = time.perf_counter()
    graph = build_profile_graph(seq, cfg)
    cliques = maximal_cliques(graph, max_cliques=max_cliques, max_seconds=max_seconds)
    report = rank_predictions(graph, cliques, sequence_id=seq.id, profile=cfg.name,
                              timing=time.perf_counter() - start)
    return graph, report


def _metrics_dict(m: Metrics) -> dict:
    return {
        "tp": m.tp, "fp": m.fp, "fn": m.fn,
        "sens": str(m.sens), "ppv": str(m.ppv), "f1": str(m.f1),
        "mcc_squared": str(m.mcc_squared),
        "sens_value": float(m.sens), "ppv_value": float(m.ppv),
        "f1_value": float(m.f1), "mcc_value": m.mcc,
    }


# ---------------------------------------------------------------- predict

def cmd_predict(args) -> int:
    cfg = _configure(args)
    sequences = read_fasta(args.input)
    docs = []
    structures = []
    for seq in sequences:
        graph, report = run_pipeline(seq, cfg, max_cliques=args.max_cliques,
                                     max_seconds=args.max_seconds)
        if args.top_k is not None:
            report = replace(report, predictions=report.predictions[:args.top_k])
        docs.append(report_to_dict(report, seq=seq, include_timing=args.timing))
        if args.dump_graph:
            path = Path(args.dump_graph)
            if len(sequences) > 1:  # one dump per record
                path = path.with_name(f"{path.stem}-{seq.id}{path.suffix}")
            if path.suffix == ".txt":
                path.write_text(render_graph_text(graph), encoding="utf-8")
            else:
                path.write_text(json.dumps(graph_to_dict(graph), indent=2) + "\n",
                                encoding="utf-8")
        tops = report.top_ranked() if args.all_ties else report.predictions[:1]
        for pred in tops:
            structures.append((seq, pred))
    payload = docs[0] if len(docs) == 1 else {"schema": "stemp-report-set/1",
                                              "reports": docs}
    text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.dot_bracket:
        lines = []
        for seq, pred in structures:
            lines.append(f">{seq.id} energy={pred.energy} scr={pred.scr} dr={pred.dr}")
            lines.append(seq.residues)
            lines.append(write_dot_bracket(seq, pred.pairs))
        Path(args.dot_bracket).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------- evaluate

def _evaluate_one(report: PredictionReport, seq: Sequence | None,
                  reference: ReferenceStructure, cfg: ProfileConfig | None,
                  args) -> dict:
    if seq is not None and reference.length != seq.length:
        raise StempError(
            f"reference length {reference.length} != sequence length {seq.length}")
    if args.ignore_noncanonical:
        rule = cfg.pairing if cfg is not None else None
        if rule is None:
            raise StempError("--ignore-noncanonical needs a profile's pairing rule")
        reference = drop_noncanonical(reference, rule)
    doc = {"id": report.sequence_id or reference.id, "metric": args.metric,
           "predictions": len(report.predictions)}
    if report.predictions:
        summary = summarize_report(report, reference, metric=args.metric)
        doc.update({
            "top": _metrics_dict(summary.top),
            "best": _metrics_dict(summary.best),
            "scr_of_best": summary.best_scr,
            "dr_of_best": summary.best_dr,
            "multiplicity": summary.best_multiplicity,
        })
    else:
        empty = score_prediction([], reference)
        doc.update({"top": _metrics_dict(empty), "best": _metrics_dict(empty),
                    "scr_of_best": 0, "dr_of_best": 0, "multiplicity": 0,
                    "note": "no predictions; scored the empty structure"})
    return doc


def cmd_evaluate(args) -> int:
    cfg = _configure(args)
    reference = read_reference(args.reference)
    if args.report:
        from .fileio import read_report
        report = read_report(args.report)
        doc = _evaluate_one(report, None, reference, cfg, args)
    else:
        sequences = read_fasta(args.input)
        if len(sequences) != 1:
            raise StempError(f"evaluate expects one sequence, found {len(sequences)}")
        seq = sequences[0]
        _, report = run_pipeline(seq, cfg, max_cliques=args.max_cliques,
                                 max_seconds=args.max_seconds)
        doc = _evaluate_one(report, seq, reference, cfg, args)
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- batch

def _metric_fraction(m: Metrics, metric: str) -> Fraction:
    # Bucket thresholds compare exactly: mcc >= t iff mcc_squared >= t*t.
    return m.mcc_squared if metric == "mcc" else m.f1


def _bucket_metric(value: Fraction, metric: str) -> str:
    for label, threshold in METRIC_BUCKETS:
        cut = threshold * threshold if metric == "mcc" else threshold
        if value >= cut:
            return f">={label}"
    return f"<{METRIC_BUCKETS[-1][0]}"


def _bucket_scr(scr: int) -> str:
    for threshold in SCR_BUCKETS:
        if scr <= threshold:
            return f"<={threshold}"
    return f">{SCR_BUCKETS[-1]}"


def _batch_worker(payload: dict) -> dict:
    seq = Sequence(id=payload["id"], residues=payload["residues"])
    cfg = profile_from_dict(payload["profile"])
    reference = ReferenceStructure(
        id=payload["ref_id"], length=payload["ref_length"],
        pairs=frozenset(tuple(p) for p in payload["ref_pairs"]),
        bases=payload["ref_bases"])
    start = time.perf_counter()
    _, report = run_pipeline(seq, cfg, max_cliques=payload["max_cliques"],
                             max_seconds=payload["max_seconds"])
    elapsed = time.perf_counter() - start
    metric = payload["metric"]
    if not report.predictions:
        empty = score_prediction([], reference)
        top = best = empty
        scr = dr = mult = 0
    else:
        summary = summarize_report(report, reference, metric=metric)
        top, best = summary.top, summary.best
        scr, dr, mult = summary.best_scr, summary.best_dr, summary.best_multiplicity
    return {
        "id": seq.id,
        "length": seq.length,
        "top": _metrics_dict(top),
        "best": _metrics_dict(best),
        "scr_of_best": scr,
        "dr_of_best": dr,
        "multiplicity": mult,
        "seconds": elapsed,
        "_top_key": str(_metric_fraction(top, metric)),
        "_best_key": str(_metric_fraction(best, metric)),
    }


def _pair_inputs(directory: Path) -> list[tuple[Path, Path]]:
    pairs = []
    for fasta in sorted(directory.glob("*.fasta")) + sorted(directory.glob("*.fa")):
        for ext in (".ct", ".dbn", ".dot"):
            ref = fasta.with_suffix(ext)
            if ref.is_file():
                pairs.append((fasta, ref))
                break
        else:
            print(f"skipping {fasta.name}: no reference file", file=sys.stderr)
    return pairs


def cmd_batch(args) -> int:
    cfg = _configure(args)
    directory = Path(args.input)
    if not directory.is_dir():
        raise StempError(f"batch input must be a directory: {directory}")
    profile_doc = profile_to_dict(cfg)
    tasks = []
    skipped = []
    failures = []
    for fasta, ref_path in _pair_inputs(directory):
        try:
            sequences = read_fasta(fasta)
            if len(sequences) != 1:
                raise StempError(f"{fasta.name}: expected one record, found {len(sequences)}")
            seq = sequences[0]
            reference = read_reference(ref_path)
            if reference.length != seq.length:
                raise StempError(f"{fasta.name}: reference length {reference.length} "
                                 f"!= sequence length {seq.length}")
        except (StempError, OSError) as exc:
            failures.append({"file": fasta.name, "error": str(exc)})
            print(f"error: {exc}", file=sys.stderr)
            continue
        if seq.length < args.min_length:
            skipped.append({"id": seq.id, "reason": f"length {seq.length} < {args.min_length}"})
            continue
        if not reference.pairs and not args.allow_empty_reference:
            skipped.append({"id": seq.id, "reason": "reference has no pairs"})
            continue
        if args.ignore_noncanonical:
            reference = drop_noncanonical(reference, cfg.pairing)
        tasks.append({
            "id": seq.id, "residues": seq.residues, "profile": profile_doc,
            "ref_id": reference.id, "ref_length": reference.length,
            "ref_pairs": sorted(reference.pairs), "ref_bases": reference.bases,
            "metric": args.metric, "max_cliques": args.max_cliques,
            "max_seconds": args.max_seconds,
        })

    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_batch_worker, tasks))
    else:
        rows = [_batch_worker(t) for t in tasks]

    scr_hist = {f"<={t}": 0 for t in SCR_BUCKETS}
    scr_hist[f">{SCR_BUCKETS[-1]}"] = 0
    top_hist = {f">={label}": 0 for label, _ in METRIC_BUCKETS}
    top_hist[f"<{METRIC_BUCKETS[-1][0]}"] = 0
    best_hist = dict(top_hist)
    for row in rows:
        # scr 0 marks an empty report; file it with the worst bucket
        scr = row["scr_of_best"]
        scr_hist[_bucket_scr(scr) if scr >= 1 else f">{SCR_BUCKETS[-1]}"] += 1
        top_hist[_bucket_metric(Fraction(row.pop("_top_key")), args.metric)] += 1
        best_hist[_bucket_metric(Fraction(row.pop("_best_key")), args.metric)] += 1
        if not args.timing:
            row.pop("seconds", None)

    header = f"{'id':<20} {'len':>5} {'top':>6} {'best':>6} {'scr':>5} {'dr':>4} {'m':>4}"
    print(header)
    print("-" * len(header))
    for row in rows:
        print(f"{row['id']:<20} {row['length']:>5} "
              f"{row['top']['mcc_value' if args.metric == 'mcc' else 'f1_value']:>6.2f} "
              f"{row['best']['mcc_value' if args.metric == 'mcc' else 'f1_value']:>6.2f} "
              f"{row['scr_of_best']:>5} {row['dr_of_best']:>4} {row['multiplicity']:>4}")
    print(f"\nsequences: {len(rows)}  skipped: {len(skipped)}  failed: {len(failures)}")
    print(f"scr of best:  {scr_hist}")
    print(f"top {args.metric}:  {top_hist}")
    print(f"best {args.metric}: {best_hist}")

    if args.output:
        doc = {
            "schema": "stemp-batch/1",
            "profile": cfg.name,
            "metric": args.metric,
            "rows": rows,
            "skipped": skipped,
            "failures": failures,
            "histograms": {"scr_of_best": scr_hist, "top": top_hist, "best": best_hist},
        }
        Path(args.output).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stemp",
        description="Deterministic RNA structure prediction by stem-graph clique search")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="predict structures for FASTA input")
    _add_profile_options(p)
    p.add_argument("input", help="FASTA file")
    p.add_argument("-o", "--output", default=None, help="report JSON path (default stdout)")
    p.add_argument("--dot-bracket", default=None,
                   help="also write the top structure(s) as dot-bracket text")
    p.add_argument("--all-ties", action="store_true",
                   help="emit every rank-1 structure, not just the first")
    p.add_argument("--dump-graph", default=None,
                   help="write the stem graph (JSON, or text if path ends in .txt)")
    p.add_argument("--top-k", type=int, default=None,
                   help="keep only the k best-ranked predictions in the report")
    p.add_argument("--timing", action="store_true", help="include timing in the report")
    p.set_defaults(func=cmd_predict)

    e = sub.add_parser("evaluate", help="score predictions against a reference")
    _add_profile_options(e)
    e.add_argument("input", nargs="?", default=None, help="FASTA file (one record)")
    e.add_argument("--report", default=None, help="score an existing report JSON instead")
    e.add_argument("--reference", required=True, help="reference structure (.ct or .dbn)")
    e.add_argument("--metric", choices=("mcc", "f1"), default="mcc")
    e.add_argument("--ignore-noncanonical", action="store_true",
                   help="drop reference pairs the pairing rule cannot produce")
    e.add_argument("-o", "--output", default=None, help="metrics JSON path (default stdout)")
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("batch", help="run a directory of FASTA+reference pairs")
    _add_profile_options(b)
    b.add_argument("input", help="directory holding <name>.fasta with <name>.ct/.dbn")
    b.add_argument("--metric", choices=("mcc", "f1"), default="mcc")
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    b.add_argument("--min-length", type=int, default=50,
                   help="skip sequences shorter than this (census validity rule)")
    b.add_argument("--allow-empty-reference", action="store_true",
                   help="keep sequences whose reference has no pairs")
    b.add_argument("--ignore-noncanonical", action="store_true",
                   help="drop reference pairs the pairing rule cannot produce")
    b.add_argument("--timing", action="store_true", help="include per-sequence wall time")
    b.add_argument("-o", "--output", default=None, help="structured results JSON path")
    b.set_defaults(func=cmd_batch)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "evaluate" and bool(args.input) == bool(args.report):
        print("error: evaluate needs a FASTA input or --report, not both/neither",
              file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (StempError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
