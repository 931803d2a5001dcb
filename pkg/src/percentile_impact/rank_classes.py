"""PR(6) and PR(2) percentile rank classes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .corpus import PublicationRecord


@dataclass(frozen=True)
class RankClass:
    label: str
    lower: float  # exclusive
    upper: float  # inclusive
    expected_share: float

    def contains(self, percentile: float) -> bool:
        return self.lower < percentile <= self.upper


@dataclass(frozen=True)
class ClassScheme:
    """Ordered worst class first; position i (1-based) is the class weight."""

    name: str
    classes: tuple[RankClass, ...]

    def __post_init__(self):
        bounds = sorted((c.lower, c.upper) for c in self.classes)
        if bounds[0][0] != 0 or bounds[-1][1] != 100:
            raise ValueError(f"{self.name}: classes must cover (0, 100]")
        for (_, hi), (lo, _) in zip(bounds, bounds[1:]):
            if hi != lo:
                raise ValueError(f"{self.name}: classes must partition (0, 100] without gaps")
        if abs(sum(c.expected_share for c in self.classes) - 1) > 1e-12:
            raise ValueError(f"{self.name}: expected shares must sum to 1")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes)

    @property
    def expected_shares(self) -> tuple[float, ...]:
        return tuple(c.expected_share for c in self.classes)

    def index(self, label: str) -> int:
        return self.labels.index(label)


PR6 = ClassScheme("PR6", (
    RankClass("<50%", 50, 100, 0.50),
    RankClass("50%", 25, 50, 0.25),
    RankClass("25%", 10, 25, 0.15),
    RankClass("10%", 5, 10, 0.05),
    RankClass("5%", 1, 5, 0.04),
    RankClass("1%", 0, 1, 0.01),
))

PR2 = ClassScheme("PR2", (
    RankClass("<90%", 10, 100, 0.90),
    RankClass("10%", 0, 10, 0.10),
))

SCHEMES = {"PR6": PR6, "PR2": PR2}


def get_scheme(name: str | ClassScheme) -> ClassScheme:
    if isinstance(name, ClassScheme):
        return name
    try:
        return SCHEMES[name.upper()]
    except KeyError:
        raise ValueError(f"unknown class scheme {name!r}") from None


def class_index(percentile: float, scheme: ClassScheme) -> int:
    if not 0 < percentile <= 100:
        raise ValueError(f"percentile must lie in (0, 100], got {percentile}")
    for i, c in enumerate(scheme.classes):
        if c.contains(percentile):
            return i
    raise AssertionError("scheme does not partition (0, 100]")  # pragma: no cover


def classify(percentile: float, scheme: ClassScheme = PR6) -> str:
    """Label of the class whose (lower, upper] interval holds ``percentile``."""
    return scheme.classes[class_index(percentile, scheme)].label


@dataclass(frozen=True)
class RankClassDistribution:
    group: str
    scheme: ClassScheme
    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def shares(self) -> tuple[float, ...]:
        n = self.n
        return tuple(c / n for c in self.counts)

    def count(self, label: str) -> int:
        return self.counts[self.scheme.index(label)]

    def share(self, label: str) -> float:
        return self.count(label) / self.n

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "scheme": self.scheme.name,
            "labels": list(self.scheme.labels),
            "counts": list(self.counts),
            "shares": list(self.shares),
            "expected_shares": list(self.scheme.expected_shares),
        }


def distribution(records: Iterable[PublicationRecord | float], scheme: ClassScheme = PR6,
                 group: str | None = None) -> RankClassDistribution:
    """Class counts for one group. Accepts records or bare percentiles."""
    counts = [0] * len(scheme.classes)
    labels = set()
    for item in records:
        if isinstance(item, PublicationRecord):
            if item.percentile is None:
                raise ValueError(f"record {item.pub_id!r} has no percentile")
            labels.add(item.group)
            p = item.percentile
        else:
            p = float(item)
        counts[class_index(p, scheme)] += 1
    if group is None:
        group = labels.pop() if len(labels) == 1 else ""
    if sum(counts) == 0:
        raise ValueError(f"group {group!r} has no records")
    return RankClassDistribution(group, scheme, tuple(counts))
