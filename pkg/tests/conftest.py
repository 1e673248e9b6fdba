"""Shared fixtures plus a per-criterion summary for the acceptance suite."""

from __future__ import annotations

import os
import re
from pathlib import Path

import pytest

from stemp import parse_sequence

FIXTURES = Path(__file__).parent / "fixtures"

# Structured 25-mer used as the golden worked example (PDB entry 2QUX).
SEQ_2QUX = "GGCACAGAAGAUAUGGCUUCGUGCC"
PAIRS_2QUX = frozenset({(1, 25), (2, 24), (3, 23), (4, 22), (5, 21),
                        (7, 20), (8, 19), (9, 18), (10, 17)})


@pytest.fixture
def seq_2qux():
    return parse_sequence(SEQ_2QUX, id="2QUX")


def gutell_dir() -> Path:
    return Path(os.environ.get("STEMP_FIXTURE_DIR", FIXTURES / "gutell"))


def require_gutell(accession: str) -> tuple[Path, Path]:
    """Paths of a user-supplied FASTA+CT fixture pair, or skip the test."""
    base = gutell_dir()
    fasta = base / f"{accession}.fasta"
    ct = base / f"{accession}.ct"
    if not fasta.is_file() or not ct.is_file():
        pytest.skip(f"requires user-supplied fixtures {accession}.fasta/.ct under "
                    f"{base} (see scripts/fetch_gutell.py)")
    return fasta, ct


# ---------------------------------------------------------------- summary

_ACCEPTANCE: dict[int, dict[str, str]] = {}
_CRITERION_RE = re.compile(r"test_acceptance\.py::test_c(\d+)")


def pytest_runtest_logreport(report):
    m = _CRITERION_RE.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        outcome = ("skipped" if report.skipped
                   else "passed" if report.passed else "failed")
        _ACCEPTANCE.setdefault(int(m.group(1)), {})[report.nodeid] = outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for criterion in sorted(_ACCEPTANCE):
        outcomes = _ACCEPTANCE[criterion]
        if any(v == "failed" for v in outcomes.values()):
            status = "FAIL"
        elif any(v == "skipped" for v in outcomes.values()):
            status = "SKIP"
        else:
            status = "PASS"
        detail = ""
        if status != "PASS":
            flagged = sorted(k.split("::")[-1] for k, v in outcomes.items()
                             if v != "passed")
            detail = f"  [{', '.join(flagged)}]"
        terminalreporter.write_line(
            f"criterion {criterion}: {status} ({len(outcomes)} checks){detail}")
