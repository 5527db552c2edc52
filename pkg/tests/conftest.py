import csv
import json
from pathlib import Path

import pytest

from prestige_rank.corpus import load_corpus

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "five_journals"


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture
def make_corpus_files(tmp_path):
    """Write journals/documents/references CSVs and return their paths."""

    def make(journals=(), documents=(), references=(), areas=None):
        paths = [
            write_csv(tmp_path / "journals.csv", ["journal_id", "title", "area_codes"], journals),
            write_csv(tmp_path / "documents.csv", ["doc_id", "journal_id", "year", "doc_type"],
                      documents),
            write_csv(tmp_path / "references.csv", ["citing_doc_id", "cited_doc_id"], references),
        ]
        if areas is not None:
            paths.append(write_csv(tmp_path / "areas.csv",
                                   ["specific_area_code", "area_code", "category_code"], areas))
        return paths

    return make


@pytest.fixture
def make_corpus(make_corpus_files):
    def make(*args, **kwargs):
        return load_corpus(*make_corpus_files(*args, **kwargs))

    return make


@pytest.fixture(scope="session")
def fixture_corpus():
    return load_corpus(FIXTURE / "journals.csv", FIXTURE / "documents.csv",
                       FIXTURE / "references.csv", FIXTURE / "areas.csv")


@pytest.fixture(scope="session")
def fixture_expected():
    return json.loads((FIXTURE / "expected.json").read_text())


_RESULTS = pytest.StashKey()


@pytest.fixture
def criterion(request):
    """Context manager that records one PASS/FAIL line per acceptance criterion."""
    results = request.config.stash.setdefault(_RESULTS, [])

    class Check:
        def __init__(self, number, title):
            self.label = f"criterion {number:>2} {title}"

        def __enter__(self):
            return self

        def __exit__(self, kind, exc, tb):
            status = "PASS" if kind is None else f"FAIL ({kind.__name__}: {exc})"
            line = f"{self.label}: {status}"
            results.append(line)
            print(line)
            return False

    return Check


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, [])
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
