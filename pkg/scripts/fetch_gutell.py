#!/usr/bin/env python3
"""Stage reference structures for the gated spot-check tests.

Criteria 4-6 of tests/test_acceptance.py compare predictions against curated
structures of specific accessions. Those files are not bundled; this script
stages them into the fixture directory (tests/fixtures/gutell by default,
or $STEMP_FIXTURE_DIR) as <ACCESSION>.ct plus a derived <ACCESSION>.fasta.

Sources: the Comparative RNA Web (CRW) site of the Gutell Lab publishes the
tRNA and 5S rRNA reference structures as connectivity tables. Download the
CT files for the accessions below (or export them from a local copy of the
archive), then run either of:

    python scripts/fetch_gutell.py --from-dir /path/to/ct/files
    python scripts/fetch_gutell.py --url AB041850=https://host/path/AB041850.ct

Each staged CT is validated (mutual pairing, header length) and the FASTA is
rebuilt from the CT's own base column, so sequence and reference always
agree positionally.
"""

from __future__ import annotations

import argparse
import sys
import urllib.request
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from stemp.errors import StempError
from stemp.fileio import parse_ct
from stemp.seq import parse_sequence

TRNA = ("AB041850", "L00194", "X04779")
RRNA5S = ("AE000782", "X67579", "AF034620", "X01590", "AJ251080", "V00336",
          "AE002087")
ACCESSIONS = TRNA + RRNA5S


def default_dest() -> Path:
    import os
    env = os.environ.get("STEMP_FIXTURE_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "gutell"


def stage(ct_text: str, accession: str, dest: Path) -> None:
    reference = parse_ct(ct_text, id_hint=accession)
    if reference.bases is None:
        raise StempError(f"{accession}: CT carries no bases")
    seq = parse_sequence(reference.bases, id=accession)  # validates alphabet
    dest.mkdir(parents=True, exist_ok=True)
    (dest / f"{accession}.ct").write_text(ct_text, encoding="utf-8")
    (dest / f"{accession}.fasta").write_text(
        f">{accession}\n{seq.residues}\n", encoding="utf-8")
    print(f"staged {accession}: length {reference.length}, "
          f"{len(reference.pairs)} pairs")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--dest", type=Path, default=None,
                        help="fixture directory (default: tests/fixtures/gutell "
                             "or $STEMP_FIXTURE_DIR)")
    parser.add_argument("--from-dir", type=Path, default=None,
                        help="directory containing <ACCESSION>.ct files to stage")
    parser.add_argument("--url", action="append", default=[],
                        metavar="ACCESSION=URL", help="download one CT file")
    parser.add_argument("--list", action="store_true",
                        help="print the accessions the tests look for")
    args = parser.parse_args(argv)

    if args.list:
        print("tRNA:    " + " ".join(TRNA))
        print("5S rRNA: " + " ".join(RRNA5S))
        return 0

    dest = args.dest or default_dest()
    staged = 0
    failures = 0
    if args.from_dir:
        for accession in ACCESSIONS:
            src = args.from_dir / f"{accession}.ct"
            if not src.is_file():
                print(f"missing {src}", file=sys.stderr)
                continue
            try:
                stage(src.read_text(encoding="utf-8"), accession, dest)
                staged += 1
            except (StempError, ValueError) as exc:
                failures += 1
                print(f"{accession}: {exc}", file=sys.stderr)
    for spec in args.url:
        accession, _, url = spec.partition("=")
        if not url:
            print(f"bad --url {spec!r}; expected ACCESSION=URL", file=sys.stderr)
            return 2
        try:
            with urllib.request.urlopen(url, timeout=60) as resp:
                text = resp.read().decode("utf-8")
            stage(text, accession, dest)
            staged += 1
        except Exception as exc:
            failures += 1
            print(f"{accession}: {exc}", file=sys.stderr)
    if not args.from_dir and not args.url:
        parser.print_help()
        return 2
    print(f"{staged} staged, {failures} failed; fixtures in {dest}")
    return 0 if staged and not failures else 1


if __name__ == "__main__":
    sys.exit(main())
