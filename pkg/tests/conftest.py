import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from percentile_impact import data_path  # noqa: E402
from percentile_impact.corpus import Corpus, PublicationRecord, load_csv  # noqa: E402


def make_record(pub_id="p1", group="A", year=2005, doc_type="article", subject="CHEM",
                citations=None, percentile=50.0, pages=10, n_authors=3):
    groups = tuple(group.split(";")) if isinstance(group, str) else tuple(group)
    subjects = tuple(subject.split(";")) if isinstance(subject, str) else tuple(subject)
    return PublicationRecord(pub_id, groups, year, doc_type, subjects, citations,
                             percentile, pages, n_authors)


def make_corpus(*records) -> Corpus:
    return Corpus.from_records(records)


@pytest.fixture(scope="session")
def synthetic_corpus() -> Corpus:
    return load_csv(data_path())


@pytest.fixture
def csv_header() -> str:
    return "pub_id,group,year,doc_type,subject,citations,percentile,pages,n_authors\n"


# -- acceptance reporting -------------------------------------------------------

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


class criterion:
    """Context manager recording one acceptance criterion as PASS or FAIL."""

    def __init__(self, ident: str, title: str):
        self.ident, self.title = ident, title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        detail = "; ".join(self.details)
        if exc_type is not None:
            detail = (detail + "; " if detail else "") + f"{exc_type.__name__}: {exc}".splitlines()[0]
        ACCEPTANCE_RESULTS.append((f"{self.ident} {self.title}", exc_type is None, detail))
        return False


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0].split()[0][2:])):
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
