import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_record
from percentile_impact.rank_classes import (
    PR2,
    PR6,
    ClassScheme,
    RankClass,
    classify,
    distribution,
    get_scheme,
)

pct_strategy = st.floats(min_value=1e-9, max_value=100, allow_nan=False, exclude_min=False)


@pytest.mark.parametrize("p,scheme,label", [
    (50, PR6, "50%"), (1, PR6, "1%"), (100, PR6, "<50%"), (7.3, PR6, "10%"),
    (25, PR6, "25%"), (10, PR6, "10%"), (5, PR6, "5%"), (25.01, PR6, "50%"), (0.01, PR6, "1%"),
    (10, PR2, "10%"), (10.0001, PR2, "<90%"), (100, PR2, "<90%"),
])
def test_classify_examples(p, scheme, label):
    assert classify(p, scheme) == label


@pytest.mark.parametrize("bad", [0, -1, 100.01, float("nan")])
def test_classify_out_of_range(bad):
    with pytest.raises(ValueError):
        classify(bad)


def test_labels_and_shares():
    assert PR6.labels == ("<50%", "50%", "25%", "10%", "5%", "1%")
    assert PR2.labels == ("<90%", "10%")
    assert sum(PR6.expected_shares) == pytest.approx(1.0, abs=1e-12)
    assert get_scheme("PR2") is PR2
    with pytest.raises(ValueError):
        get_scheme("PR3")


def test_scheme_validation():
    with pytest.raises(ValueError):
        ClassScheme("gap", (RankClass("a", 50, 100, 0.5), RankClass("b", 0, 40, 0.5)))
    with pytest.raises(ValueError):
        ClassScheme("shares", (RankClass("a", 50, 100, 0.5), RankClass("b", 0, 50, 0.4)))


def test_exhaustive_grid_exactly_one_class():
    for scheme in (PR6, PR2):
        for i in range(1, 10001):
            p = i / 100
            matches = [c.label for c in scheme.classes if c.lower < p <= c.upper]
            assert len(matches) == 1
            assert classify(p, scheme) == matches[0]


def test_uniform_grid_reproduces_expected_shares():
    d = distribution(range(1, 101), PR6)
    assert d.counts == (50, 25, 15, 5, 4, 1)
    assert d.shares == tuple(PR6.expected_shares)
    d2 = distribution(range(1, 101), PR2)
    assert d2.counts == (90, 10)


def test_single_record_and_errors():
    d = distribution([make_record(percentile=0.5)], PR6, "A")
    assert d.counts == (0, 0, 0, 0, 0, 1) and d.group == "A"
    assert d.count("1%") == 1 and d.share("1%") == 1.0
    with pytest.raises(ValueError):
        distribution([], PR6, "A")
    with pytest.raises(ValueError):
        distribution([make_record(citations=1, percentile=None)], PR6)


@settings(max_examples=200, deadline=None)
@given(st.lists(pct_strategy, min_size=1, max_size=80), st.randoms(use_true_random=False))
def test_distribution_properties(values, rnd):
    d = distribution(values, PR6)
    assert sum(d.counts) == len(values) == d.n
    assert abs(sum(d.shares) - 1) <= 1e-12
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert distribution(shuffled, PR6).counts == d.counts


def test_to_dict_labels():
    d = distribution(np.linspace(1, 100, 30), PR6, "G")
    out = d.to_dict()
    assert out["group"] == "G" and out["scheme"] == "PR6"
    assert list(out["labels"]) == list(PR6.labels)
