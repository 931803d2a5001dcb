"""Publication records, CSV/JSON ingestion and validation.

A publication credited to several groups (e.g. a paper co-authored by staff
of two universities) is exploded into one record per (pub_id, group) pair.
The resulting duplicates are kept on purpose: the regression module treats
them as clusters.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

COLUMNS = ("pub_id", "group", "year", "doc_type", "subject",
           "citations", "percentile", "pages", "n_authors")
MANDATORY_COLUMNS = ("pub_id", "group", "year", "doc_type", "subject")
STANDARD_DOC_TYPES = ("article", "note", "review")
LIST_SEP = ";"


class CorpusError(Exception):
    """Fatal ingestion problem (unreadable file, bad header, rejected row in fail-fast mode)."""


@dataclass(frozen=True)
class Diagnostic:
    row: int
    message: str
    severity: str = "error"  # "error" rejects the row, "warning" keeps it

    def __str__(self) -> str:
        return f"row {self.row}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class PublicationRecord:
    pub_id: str
    groups: tuple[str, ...]
    year: int
    doc_type: str
    subjects: tuple[str, ...]
    citations: int | None = None
    percentile: float | None = None
    pages: int | None = None
    n_authors: int | None = None

    def __post_init__(self):
        if not self.pub_id:
            raise ValueError("pub_id must be non-empty")
        if not self.groups or any(not g for g in self.groups):
            raise ValueError("groups must be a non-empty list of non-empty labels")
        if not self.subjects or any(not s for s in self.subjects):
            raise ValueError("subjects must be a non-empty list of non-empty labels")
        if self.citations is None and self.percentile is None:
            raise ValueError("at least one of citations/percentile is required")
        if self.citations is not None and self.citations < 0:
            raise ValueError(f"citations must be >= 0, got {self.citations}")
        if self.percentile is not None and not 0 < self.percentile <= 100:
            raise ValueError(f"percentile must lie in (0, 100], got {self.percentile}")
        if self.pages is not None and self.pages < 1:
            raise ValueError(f"pages must be >= 1, got {self.pages}")
        if self.n_authors is not None and self.n_authors < 1:
            raise ValueError(f"n_authors must be >= 1, got {self.n_authors}")

    @property
    def group(self) -> str:
        """The single group of an exploded record."""
        return self.groups[0]

    @property
    def is_standard_doc_type(self) -> bool:
        return self.doc_type in STANDARD_DOC_TYPES


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of exploded records, one per (pub_id, group)."""

    records: tuple[PublicationRecord, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False)

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if len(rec.groups) != 1:
                raise ValueError(f"corpus records must carry exactly one group ({rec.pub_id})")
            key = (rec.pub_id, rec.group)
            if key in seen:
                raise ValueError(f"duplicate (pub_id, group) pair: {key}")
            seen.add(key)

    @classmethod
    def from_records(cls, records: Iterable[PublicationRecord],
                     diagnostics: Sequence[Diagnostic] = ()) -> "Corpus":
        """Explode multi-group records and build a corpus."""
        out = []
        for rec in records:
            for g in rec.groups:
                out.append(replace(rec, groups=(g,)))
        return cls(tuple(out), tuple(diagnostics))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def groups(self) -> list[str]:
        return sorted({r.group for r in self.records})

    @property
    def years(self) -> list[int]:
        return sorted({r.year for r in self.records})

    @property
    def group_index(self) -> dict[str, tuple[PublicationRecord, ...]]:
        index: dict[str, list[PublicationRecord]] = defaultdict(list)
        for rec in self.records:
            index[rec.group].append(rec)
        return {g: tuple(index[g]) for g in sorted(index)}

    @property
    def duplicate_map(self) -> dict[str, list[str]]:
        """pub_id -> group labels, for publications shared by more than one group."""
        by_id: dict[str, list[str]] = defaultdict(list)
        for rec in self.records:
            by_id[rec.pub_id].append(rec.group)
        return {pid: gs for pid, gs in by_id.items() if len(gs) > 1}

    @property
    def n_unique(self) -> int:
        return len({r.pub_id for r in self.records})

    def group_records(self, group: str) -> tuple[PublicationRecord, ...]:
        return self.group_index.get(group, ())

    def with_records(self, records: Iterable[PublicationRecord]) -> "Corpus":
        return Corpus(tuple(records), self.diagnostics)


# -- parsing -----------------------------------------------------------------

def _split_list(value) -> tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        items = [str(v).strip() for v in value]
    else:
        items = [v.strip() for v in str(value).split(LIST_SEP)]
    return tuple(items)


def _opt(value):
    if value is None:
        return None
    if isinstance(value, str):
        value = value.strip()
        if value == "":
            return None
    return value


def _opt_int(value, name: str) -> int | None:
    value = _opt(value)
    if value is None:
        return None
    if isinstance(value, bool):
        raise ValueError(f"{name}: expected integer, got {value!r}")
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name}: expected integer, got {value!r}") from None
    if not f.is_integer():
        raise ValueError(f"{name}: expected integer, got {value!r}")
    return int(f)


def _opt_float(value, name: str) -> float | None:
    value = _opt(value)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name}: expected number, got {value!r}") from None


def parse_row(row: dict) -> PublicationRecord:
    """Build a (non-exploded) record from a mapping of raw column values."""
    pub_id = str(_opt(row.get("pub_id")) or "")
    year = _opt_int(row.get("year"), "year")
    if year is None:
        raise ValueError("year is missing")
    doc_type = str(_opt(row.get("doc_type")) or "")
    if not doc_type:
        raise ValueError("doc_type is missing")
    return PublicationRecord(
        pub_id=pub_id,
        groups=_split_list(row.get("group") or ""),
        year=year,
        doc_type=doc_type.lower(),
        subjects=_split_list(row.get("subject") or ""),
        citations=_opt_int(row.get("citations"), "citations"),
        percentile=_opt_float(row.get("percentile"), "percentile"),
        pages=_opt_int(row.get("pages"), "pages"),
        n_authors=_opt_int(row.get("n_authors"), "n_authors"),
    )


def _build(rows: Iterable[tuple[int, dict]], fail_fast: bool) -> Corpus:
    records: list[PublicationRecord] = []
    diags: list[Diagnostic] = []
    seen: dict[tuple[str, str], int] = {}
    for lineno, row in rows:
        try:
            rec = parse_row(row)
            for g in rec.groups:
                if (rec.pub_id, g) in seen:
                    raise ValueError(f"pub_id {rec.pub_id!r} already listed for group {g!r} "
                                     f"(row {seen[(rec.pub_id, g)]})")
        except ValueError as exc:
            if fail_fast:
                raise CorpusError(f"row {lineno}: {exc}") from exc
            diags.append(Diagnostic(lineno, str(exc)))
            continue
        for g in rec.groups:
            seen[(rec.pub_id, g)] = lineno
        if not rec.is_standard_doc_type:
            diags.append(Diagnostic(lineno, f"non-standard doc_type {rec.doc_type!r}", "warning"))
        records.append(rec)
    rejected = sum(d.severity == "error" for d in diags)
    if rejected:
        logger.warning("%d row(s) rejected during load", rejected)
    return Corpus.from_records(records, diags)


def load_csv(path, delimiter: str = ",", fail_fast: bool = False) -> Corpus:
    """Read the canonical CSV layout.

    Invalid rows are collected as diagnostics on the returned corpus unless
    ``fail_fast`` is set, in which case the first one raises CorpusError.
    Row numbers count the header as row 1.
    """
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle, delimiter=delimiter)
        _check_header(reader.fieldnames or [])
        return _build(((i, row) for i, row in enumerate(reader, start=2)), fail_fast)


def load_json(path, fail_fast: bool = False) -> Corpus:
    """Read a JSON array of objects using the CSV column names as keys."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, list):
        raise CorpusError("JSON input must be an array of publication objects")
    keys = set()
    for obj in data:
        if not isinstance(obj, dict):
            raise CorpusError("JSON input must be an array of publication objects")
        keys.update(obj)
    if data:
        _check_header(sorted(keys))
    return _build(((i, obj) for i, obj in enumerate(data, start=1)), fail_fast)


def load(path, fmt: str = "csv", **kwargs) -> Corpus:
    if fmt == "csv":
        return load_csv(path, **kwargs)
    if fmt == "json":
        return load_json(path, **kwargs)
    raise CorpusError(f"unknown input format {fmt!r}")


def _check_header(names: Sequence[str]) -> None:
    missing = [c for c in MANDATORY_COLUMNS if c not in names]
    if missing:
        raise CorpusError(f"missing mandatory column(s): {', '.join(missing)}")
    if "citations" not in names and "percentile" not in names:
        raise CorpusError("input needs a citations or a percentile column")


# -- serialization -----------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def record_to_row(rec: PublicationRecord) -> dict[str, str]:
    return {
        "pub_id": rec.pub_id,
        "group": LIST_SEP.join(rec.groups),
        "year": str(rec.year),
        "doc_type": rec.doc_type,
        "subject": LIST_SEP.join(rec.subjects),
        "citations": _cell(rec.citations),
        "percentile": _cell(rec.percentile),
        "pages": _cell(rec.pages),
        "n_authors": _cell(rec.n_authors),
    }


def write_csv(corpus: Corpus, path, delimiter: str = ",") -> None:
    """Write one row per (pub_id, group) record."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=COLUMNS, delimiter=delimiter,
                                lineterminator="\n")
        writer.writeheader()
        for rec in corpus.records:
            writer.writerow(record_to_row(rec))


def write_json(corpus: Corpus, path) -> None:
    rows = []
    for rec in corpus.records:
        rows.append({
            "pub_id": rec.pub_id, "group": list(rec.groups), "year": rec.year,
            "doc_type": rec.doc_type, "subject": list(rec.subjects),
            "citations": rec.citations, "percentile": rec.percentile,
            "pages": rec.pages, "n_authors": rec.n_authors,
        })
    Path(path).write_text(json.dumps(rows, indent=1) + "\n", encoding="utf-8")


# -- derived views -----------------------------------------------------------

def regression_subset(corpus: Corpus) -> Corpus:
    """Records with percentile, pages and n_authors all present."""
    kept = [r for r in corpus.records
            if r.percentile is not None and r.pages is not None and r.n_authors is not None]
    sub = corpus.with_records(kept)
    if not kept:
        logger.warning("regression subset is empty (%d records in corpus)", len(corpus))
    else:
        logger.info("regression subset: %d of %d records, %d unique publications",
                    len(sub), len(corpus), sub.n_unique)
    return sub


def subset_counts(corpus: Corpus, subset: Corpus) -> dict[str, int | bool]:
    return {
        "total": len(corpus),
        "retained": len(subset),
        "unique": subset.n_unique,
        "empty": len(subset) == 0,
    }


@dataclass(frozen=True)
class SummaryTable:
    groups: tuple[str, ...]
    years: tuple[int, ...]
    counts: dict  # (year, group) -> count

    def cell(self, year: int, group: str) -> int:
        return self.counts.get((year, group), 0)

    def group_total(self, group: str) -> int:
        return sum(self.cell(y, group) for y in self.years)

    def year_total(self, year: int) -> int:
        return sum(self.cell(year, g) for g in self.groups)

    @property
    def grand_total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "years": list(self.years),
            "rows": [{"year": y, "counts": [self.cell(y, g) for g in self.groups],
                      "total": self.year_total(y)} for y in self.years],
            "group_totals": [self.group_total(g) for g in self.groups],
            "grand_total": self.grand_total,
        }


def summary_table(corpus: Corpus) -> SummaryTable:
    """Group x year publication counts (one count per (pub_id, group) pair)."""
    counts: dict[tuple[int, str], int] = defaultdict(int)
    for rec in corpus.records:
        counts[(rec.year, rec.group)] += 1
    return SummaryTable(tuple(corpus.groups), tuple(corpus.years), dict(counts))
