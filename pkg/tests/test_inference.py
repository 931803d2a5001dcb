import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from oracles import chi_square_cells, kruskal_h_definition, kruskal_permutation_distribution
from percentile_impact._stats import bonferroni, chi2_sf
from percentile_impact.inference import (
    InferenceError,
    chi_square_independence,
    kruskal_wallis,
    normality_test,
    pairwise_rank_tests,
    rank_sum_test,
    skewness,
)

# D'Agostino-Pearson K^2 for the seeded sample below, from scipy.stats.normaltest
SEEDED_K2 = 2.458401900804177
SEEDED_P = 0.2925262272839067

samples = st.lists(st.integers(0, 30).map(float), min_size=1, max_size=12)


def seeded_sample():
    return np.round(np.random.default_rng(20121).normal(50, 10, 50), 3)


def test_normality_seeded_sample():
    res = normality_test(seeded_sample())
    assert res.statistic == pytest.approx(SEEDED_K2, abs=1e-6)
    assert res.p_value == pytest.approx(SEEDED_P, abs=1e-6)
    assert res.df == 2 and not res.significant


def test_normality_symmetric_component_and_size_guard():
    assert skewness([1, 2, 3, 4, 5]) == 0.0
    with pytest.raises(InferenceError, match="n >= 8"):
        normality_test([1, 2, 3, 4, 5])


def test_normality_rejects_percentile_like_data(synthetic_corpus):
    res = normality_test([r.percentile for r in synthetic_corpus])
    assert res.significant


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=20, max_size=200)
       .filter(lambda v: np.ptp(v) > 1e-3))
def test_normality_matches_scipy(values):
    ours = normality_test(values)
    ref = sps.normaltest(values)
    assert ours.statistic == pytest.approx(ref.statistic, rel=1e-6, abs=1e-8)


def test_kruskal_nine_elements():
    groups = [[1, 2, 3], [4, 5, 6], [7, 8, 9]]
    res = kruskal_wallis(groups)
    observed, null = kruskal_permutation_distribution(groups)
    assert res.statistic == pytest.approx(observed, abs=1e-9)
    assert res.statistic == pytest.approx(7.2, abs=1e-12)
    assert res.df == 2
    # the observed arrangement is the most extreme one under the exact null
    assert max(null) == pytest.approx(observed, abs=1e-12)


def test_kruskal_df_for_four_groups_and_degenerate():
    res = kruskal_wallis({"a": [1, 2], "b": [3, 4], "c": [5, 6], "d": [7, 8]})
    assert res.df == 3 and res.payload["groups"] == ["a", "b", "c", "d"]
    same = kruskal_wallis([[5, 5], [5, 5, 5]])
    assert same.statistic == 0 and same.degenerate and same.p_value == 1.0
    assert kruskal_wallis([[1, 2, 3], [1, 2, 3]]).statistic == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InferenceError):
        kruskal_wallis([[1, 2], []])
    with pytest.raises(InferenceError):
        kruskal_wallis([[1, 2]])


@settings(max_examples=200, deadline=None)
@given(st.lists(samples, min_size=2, max_size=4).filter(lambda g: sum(map(len, g)) >= 3))
def test_kruskal_against_definition_and_scipy(groups):
    pooled = [v for g in groups for v in g]
    res = kruskal_wallis(groups)
    if len(set(pooled)) == 1:
        assert res.degenerate and res.statistic == 0
        return
    assert res.statistic == pytest.approx(kruskal_h_definition(groups), rel=1e-9, abs=1e-9)
    assert res.statistic == pytest.approx(sps.kruskal(*groups).statistic, rel=1e-9, abs=1e-9)
    # tie correction can only enlarge H
    assert res.statistic >= res.payload["h_uncorrected"] - 1e-12
    if len(set(pooled)) == len(pooled):
        assert res.statistic == pytest.approx(res.payload["h_uncorrected"], rel=1e-12)
    # ranks survive a strictly monotone transform
    transformed = [[math.exp(v / 7) + 3 * v for v in g] for g in groups]
    assert kruskal_wallis(transformed).statistic == pytest.approx(res.statistic, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(samples, samples)
def test_rank_sum_matches_scipy(a, b):
    res = rank_sum_test(a, b)
    if len(set(a + b)) == 1:
        assert res["degenerate"]
        return
    ref = sps.mannwhitneyu(a, b, use_continuity=False, method="asymptotic")
    assert res["u"] == pytest.approx(ref.statistic)
    assert res["p"] == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-12)


def test_pairwise_table():
    rng = np.random.default_rng(7)
    groups = {f"G{i}": rng.normal(i * 0.3, 1, 40) for i in range(1, 5)}
    table = pairwise_rank_tests(groups, alpha=0.05)
    assert table.m == 6 and len(table.comparisons) == 6
    for c in table.comparisons:
        assert c.adjusted_p == pytest.approx(min(1.0, 6 * c.raw_p))
        assert c.significant == (c.adjusted_p < 0.05)
    c = table.lookup("G4", "G1")
    assert table.lookup("G1", "G4") is c
    assert "G1" in table.significant_partners("G4")
    with pytest.raises(InferenceError):
        pairwise_rank_tests({"a": [1.0], "b": []})


def test_bonferroni_examples():
    assert bonferroni([0.01], 6) == [pytest.approx(0.06)]
    assert bonferroni([0.5], 6) == [1.0]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=10))
def test_bonferroni_monotone_and_capped(ps):
    adj = bonferroni(ps)
    for p, a in zip(ps, adj):
        assert a == min(1.0, len(ps) * p)
    order = np.argsort(ps)
    assert all(adj[order[i]] <= adj[order[i + 1]] for i in range(len(ps) - 1))


def test_chi_square_examples():
    zero = chi_square_independence([[10, 10], [10, 10]])
    assert zero.statistic == 0 and np.all(zero.payload["decomposition"].contributions == 0)
    res = chi_square_independence([[20, 10], [10, 20]], row_labels=["A", "B"], col_labels=["x", "y"])
    dec = res.payload["decomposition"]
    assert np.all(dec.expected == 15)
    assert np.allclose(dec.contributions, 25 / 15, rtol=0, atol=1e-15)
    assert res.statistic == pytest.approx(20 / 3, rel=1e-15)
    assert res.df == 1
    assert dec.cell("A", "y") == pytest.approx(25 / 15)
    assert dec.row_totals == pytest.approx([50 / 15, 50 / 15])


def test_chi_square_errors_name_margin():
    with pytest.raises(InferenceError, match="'B'"):
        chi_square_independence([[1, 2], [0, 0]], row_labels=["A", "B"], col_labels=["x", "y"])
    with pytest.raises(InferenceError):
        chi_square_independence([[1, 2]])


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5), st.integers(2, 6), st.data())
def test_chi_square_cells_sum_and_match_oracle(r, c, data):
    table = [[data.draw(st.integers(1, 200)) for _ in range(c)] for _ in range(r)]
    res = chi_square_independence(table)
    dec = res.payload["decomposition"]
    assert dec.contributions.sum() == pytest.approx(res.statistic, rel=1e-9)
    assert np.allclose(dec.contributions, chi_square_cells(table), rtol=1e-12, atol=0)
    assert res.df == (r - 1) * (c - 1)
    assert res.statistic == pytest.approx(sps.chi2_contingency(table, correction=False)[0], rel=1e-9)


@pytest.mark.parametrize("df", [1, 2, 3, 15, 50, 200])
def test_chi2_tail(df):
    xs = np.linspace(0, 3 * df + 30, 60)
    ps = [chi2_sf(x, df) for x in xs]
    assert all(0 <= p <= 1 for p in ps)
    assert all(a >= b for a, b in zip(ps, ps[1:]))
    assert ps == pytest.approx(sps.chi2.sf(xs, df), abs=1e-10)
