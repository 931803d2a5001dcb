"""Percentile assignment from citation counts within reference sets.

Orientation is smaller-is-better: 100 means uncited, values near 0 mean the
publication is among the most cited of its reference set.
"""

from __future__ import annotations

import bisect
import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Mapping

from .corpus import Corpus, PublicationRecord

logger = logging.getLogger(__name__)

SCHEMES = ("incites_ge", "complement_exclusive")
SMALL_REFSET = 100


class PercentileError(ValueError):
    pass


@dataclass(frozen=True)
class ReferenceSet:
    key: tuple[str, int, str]  # (subject, year, doc_type)
    counts: tuple[int, ...]  # ascending

    def __post_init__(self):
        if not self.counts:
            raise PercentileError(f"empty reference set {self.key}")
        if self.counts[0] < 0:
            raise PercentileError(f"negative citation count in reference set {self.key}")
        if any(a > b for a, b in zip(self.counts, self.counts[1:])):
            object.__setattr__(self, "counts", tuple(sorted(self.counts)))

    @classmethod
    def of(cls, key, counts) -> "ReferenceSet":
        return cls(tuple(key), tuple(sorted(int(c) for c in counts)))

    @property
    def size(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class PercentileAssignment:
    pub_id: str
    percentile: float
    refset_key: tuple[str, int, str]
    refset_size: int | None
    scheme: str = "incites_ge"


def build_reference_sets(corpus: Corpus | list[PublicationRecord]) -> dict[tuple, ReferenceSet]:
    """One reference set per (subject, year, doc_type) present in the corpus.

    A publication listed under several groups is counted once; a publication
    with k subjects is a member of k sets. Records without citations are
    skipped.
    """
    records = corpus.records if isinstance(corpus, Corpus) else corpus
    if not records:
        return {}
    members: dict[tuple, list[int]] = defaultdict(list)
    seen: set[tuple[str, tuple]] = set()
    for rec in records:
        if rec.citations is None:
            continue
        for subject in rec.subjects:
            key = (subject, rec.year, rec.doc_type)
            if (rec.pub_id, key) in seen:
                continue
            seen.add((rec.pub_id, key))
            members[key].append(rec.citations)
    if not members:
        raise PercentileError("corpus carries no citation counts to build reference sets from")
    refsets = {key: ReferenceSet.of(key, counts) for key, counts in sorted(members.items())}
    small = [k for k, rs in refsets.items() if rs.size < SMALL_REFSET]
    if small:
        logger.warning("%d reference set(s) have fewer than %d members; percentiles are coarse",
                       len(small), SMALL_REFSET)
    return refsets


def assign_percentile(citations: int, refset: ReferenceSet, scheme: str = "incites_ge") -> float:
    """Percentile of a citation count within ``refset`` (which contains the publication)."""
    if citations < 0:
        raise PercentileError(f"citations must be >= 0, got {citations}")
    n = refset.size
    if scheme == "incites_ge":
        n_ge = n - bisect.bisect_left(refset.counts, citations)
        return 100.0 * n_ge / n
    if scheme == "complement_exclusive":
        n_below = bisect.bisect_left(refset.counts, citations)
        return 100.0 * (1.0 - n_below / n)
    raise PercentileError(f"unknown percentile scheme {scheme!r}")


def best_subject_percentile(pub: PublicationRecord,
                            assignments: Mapping[str, float | PercentileAssignment],
                            refsets: Mapping[tuple, ReferenceSet] | None = None,
                            scheme: str = "incites_ge") -> PercentileAssignment:
    """Keep the lowest (best) of the per-subject percentiles.

    Ties go to the lexicographically smallest subject label.
    """
    if not assignments:
        raise PercentileError(f"no subject percentile for publication {pub.pub_id!r}")
    values = {}
    for subject, value in assignments.items():
        values[subject] = value.percentile if isinstance(value, PercentileAssignment) else float(value)
    subject = min(values, key=lambda s: (values[s], s))
    key = (subject, pub.year, pub.doc_type)
    winner = assignments[subject]
    if isinstance(winner, PercentileAssignment):
        size = winner.refset_size
    else:
        size = refsets[key].size if refsets and key in refsets else None
    return PercentileAssignment(pub.pub_id, values[subject], key, size, scheme)


def assign_record(rec: PublicationRecord, refsets: Mapping[tuple, ReferenceSet],
                  scheme: str = "incites_ge") -> PercentileAssignment:
    if rec.citations is None:
        raise PercentileError(f"publication {rec.pub_id!r} has no citation count")
    per_subject = {}
    for subject in rec.subjects:
        key = (subject, rec.year, rec.doc_type)
        refset = refsets.get(key)
        if refset is None:
            continue
        per_subject[subject] = PercentileAssignment(
            rec.pub_id, assign_percentile(rec.citations, refset, scheme), key, refset.size, scheme)
    return best_subject_percentile(rec, per_subject, refsets, scheme)


def assign_corpus_percentiles(corpus: Corpus, scheme: str = "incites_ge",
                              refsets: Mapping[tuple, ReferenceSet] | None = None,
                              ) -> tuple[Corpus, list[PercentileAssignment]]:
    """Fill in missing percentiles from citation counts.

    Records that already carry a percentile (pre-assigned export) are left
    untouched. Returns the new corpus and the assignments that were made.
    """
    if scheme not in SCHEMES:
        raise PercentileError(f"unknown percentile scheme {scheme!r}")
    todo = [r for r in corpus.records if r.percentile is None]
    if not todo:
        return corpus, []
    if refsets is None:
        refsets = build_reference_sets(corpus)
    cache: dict[str, PercentileAssignment] = {}
    assignments = []
    out = []
    for rec in corpus.records:
        if rec.percentile is not None:
            out.append(rec)
            continue
        pa = cache.get(rec.pub_id)
        if pa is None:
            pa = cache[rec.pub_id] = assign_record(rec, refsets, scheme)
        assignments.append(pa)
        out.append(replace(rec, percentile=pa.percentile))
    return corpus.with_records(out), assignments
