"""Deterministic synthetic corpus shaped like a four-university comparison.

A simulated world population supplies the reference sets; each group draws
its papers from that population with a tilt towards highly cited papers
(strongest for "Univ 3"). Percentiles are assigned within the world
population, so the output resembles a pre-assigned export.
"""

from __future__ import annotations

import argparse
from dataclasses import replace

import numpy as np

from .corpus import Corpus, PublicationRecord, write_csv
from .percentiles import assign_record, build_reference_sets

SUBJECTS = ("BIOL", "CHEM", "ENG", "MATH", "MED", "PHYS")
YEARS = (2005, 2006, 2007, 2008, 2009)
GROUPS = ("Univ 1", "Univ 2", "Univ 3", "Univ 4")
# papers per group and year
PER_YEAR = {
    "Univ 1": (374, 365, 363, 293, 292),
    "Univ 2": (264, 282, 333, 353, 365),
    "Univ 3": (79, 104, 128, 134, 147),
    "Univ 4": (212, 218, 226, 232, 237),
}
TILT = {"Univ 1": 0.35, "Univ 2": 0.35, "Univ 3": 0.7, "Univ 4": 0.3}
WORLD_PER_CELL = 1200
SHARED = 70


def _world(rng: np.random.Generator) -> list[PublicationRecord]:
    recs = []
    idx = 0
    for y_i, year in enumerate(YEARS):
        base = 1.6 - 0.35 * y_i
        for subject in SUBJECTS:
            n = WORLD_PER_CELL
            pages = 1 + rng.negative_binomial(3, 3 / (3 + 9.0), n)
            authors = np.minimum(1 + rng.poisson(4.2, n), 22)
            mu = np.exp(base + 0.02 * pages + 0.12 * authors + rng.normal(0, 1.0, n))
            cites = rng.poisson(mu)
            second = rng.random(n) < 0.2
            other = rng.integers(0, len(SUBJECTS) - 1, n)
            for i in range(n):
                subs = [subject]
                if second[i]:
                    alt = [s for s in SUBJECTS if s != subject][other[i]]
                    subs.append(alt)
                recs.append(PublicationRecord(
                    pub_id=f"W{idx:06d}", groups=("world",), year=year, doc_type="article",
                    subjects=tuple(sorted(subs)), citations=int(cites[i]),
                    pages=int(pages[i]), n_authors=int(authors[i])))
                idx += 1
    return recs


def make_synthetic_corpus(seed: int = 2012) -> Corpus:
    rng = np.random.default_rng(seed)
    world = _world(rng)
    refsets = build_reference_sets(world)
    world = [replace(r, percentile=assign_record(r, refsets).percentile) for r in world]
    by_year = {y: [r for r in world if r.year == y] for y in YEARS}

    membership: dict[str, list[str]] = {}
    picked: dict[str, list[str]] = {}
    for g in GROUPS:
        picked[g] = []
        for y, n in zip(YEARS, PER_YEAR[g]):
            pool = [r for r in by_year[y] if r.pub_id not in membership]
            pct = np.array([r.percentile for r in pool])
            w = np.exp(TILT[g] * (1 - pct / 100) * 3)
            choice = rng.choice(len(pool), size=n, replace=False, p=w / w.sum())
            for c in sorted(choice):
                membership[pool[c].pub_id] = [g]
                picked[g].append(pool[c].pub_id)
    # co-published papers credited to two groups
    all_ids = sorted(membership)
    for pid in rng.choice(all_ids, size=SHARED, replace=False):
        owner = membership[pid][0]
        partner = GROUPS[int(rng.integers(0, len(GROUPS)))]
        if partner != owner:
            membership[pid].append(partner)

    lookup = {r.pub_id: r for r in world}
    records = []
    for pid in sorted(membership):
        r = lookup[pid]
        drop_pages = rng.random() < 0.14
        drop_authors = rng.random() < 0.05
        records.append(replace(
            r, pub_id=pid.replace("W", "P"), groups=tuple(sorted(membership[pid])),
            pages=None if drop_pages else r.pages,
            n_authors=None if drop_authors else r.n_authors))
    return Corpus.from_records(records)


def main(argv=None):
    ap = argparse.ArgumentParser(description="write the synthetic four-group corpus as CSV")
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=2012)
    args = ap.parse_args(argv)
    write_csv(make_synthetic_corpus(args.seed), args.out)


if __name__ == "__main__":
    main()
