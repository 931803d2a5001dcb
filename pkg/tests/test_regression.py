import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from conftest import make_corpus, make_record
from oracles import hc0_sandwich_times_factor
from percentile_impact.corpus import regression_subset
from percentile_impact.regression import (
    ConvergenceError,
    DesignMatrix,
    RankDeficiencyError,
    RegressionError,
    RegressionFit,
    SeparationError,
    adjusted_predictions,
    build_design,
    cluster_robust_vcov,
    contrast,
    fit_clustered,
    fit_logit,
    margins,
    pairwise_contrasts,
    score_contributions,
    stars,
)

# closed-form log-odds of the 2x2 table below
INTERCEPT_2X2 = math.log(20 / 80)  # -1.3862943611198906
SLOPE_2X2 = math.log((40 / 60) / (20 / 80))  # 0.9808292530117262


def design(X, y, clusters=None, columns=None, groups=(), ref=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    clusters = tuple(clusters) if clusters is not None else tuple(f"c{i}" for i in range(len(y)))
    columns = tuple(columns) if columns is not None else tuple(f"x{j}" for j in range(X.shape[1]))
    return DesignMatrix(X, np.asarray(y, dtype=float), clusters, columns, tuple(groups), ref)


def two_by_two():
    x = [0] * 100 + [1] * 100
    y = [1] * 20 + [0] * 80 + [1] * 40 + [0] * 60
    return design(np.column_stack([np.ones(200), x]), y, columns=("_cons", "x"))


def thirty_rows():
    rng = np.random.default_rng(30)
    x1 = rng.normal(0, 1, 30).round(3)
    x2 = rng.integers(1, 8, 30).astype(float)
    X = np.column_stack([np.ones(30), x1, x2])
    y = (rng.random(30) < expit(-0.5 + 0.8 * x1 + 0.1 * x2)).astype(float)
    return design(X, y, columns=("_cons", "x1", "x2"))


def group_corpus(seed=3, n=400, shared=40):
    rng = np.random.default_rng(seed)
    recs = []
    for i in range(n):
        g = ["A", "B", "C", "D"][i % 4]
        if i < shared:
            g = g + ";" + ["B", "C", "D", "A"][i % 4]
        shift = {"A": 0, "B": 0.2, "C": 0.6, "D": 0.1}[g.split(";")[0]]
        pages = int(rng.integers(2, 30))
        authors = int(rng.integers(1, 12))
        pct = float(np.clip(100 * rng.beta(1.2 - 0.4 * shift, 1.2), 0.01, 100))
        recs.append(make_record(f"p{i}", g, percentile=round(pct, 2), pages=pages, n_authors=authors))
    return make_corpus(*recs)


def test_two_by_two_closed_form_and_scores():
    d = two_by_two()
    fit = fit_logit(d)
    assert fit.coef[0] == pytest.approx(INTERCEPT_2X2, abs=1e-6)
    assert fit.coef[1] == pytest.approx(SLOPE_2X2, abs=1e-6)
    assert np.max(np.abs(score_contributions(fit, d).sum(axis=0))) < 1e-6
    assert fit.converged and fit.n_rows == 200 and fit.n_clusters == 200


def test_fit_errors():
    with pytest.raises(SeparationError, match="constant"):
        fit_logit(design(np.ones((5, 1)), [0] * 5))
    x = np.arange(10.0)
    with pytest.raises(SeparationError):
        fit_logit(design(np.column_stack([np.ones(10), x]), (x > 4.5).astype(float)))
    X = np.column_stack([np.ones(6), [1, 2, 3, 4, 5, 6], [2, 4, 6, 8, 10, 12]])
    with pytest.raises(RankDeficiencyError, match="'x2'"):
        fit_logit(design(X, [0, 1, 0, 1, 1, 0]))
    with pytest.raises(ConvergenceError):
        fit_logit(thirty_rows(), max_iter=1)
    with pytest.raises(RegressionError):
        design(np.ones((2, 1)), [0, 2])


def test_quasi_separation_detected():
    # one dummy level never has the outcome: the deviance flattens long before
    # the coefficient stops drifting towards minus infinity
    rng = np.random.default_rng(0)
    g = np.arange(80) % 2
    y = np.where(g == 1, 0, rng.random(80) < 0.3).astype(float)
    X = np.column_stack([np.ones(80), g, rng.integers(2, 30, 80)])
    with pytest.raises(SeparationError, match="'g'"):
        fit_logit(design(X, y, columns=("_cons", "g", "pages")))


def test_sandwich_singletons_equal_hc0_oracle():
    d = thirty_rows()
    fit = fit_logit(d)
    v = cluster_robust_vcov(fit, d)
    assert np.max(np.abs(v - hc0_sandwich_times_factor(d.X, d.y, fit.coef))) < 1e-10


def test_sandwich_scalar_hand_case():
    # one cluster of three rows (y = 1, 0, 0) plus a singleton (y = 1): p-hat = 1/2,
    # A = 4 * 1/4 = 1, cluster scores -1/2 and 1/2, B = 2 * (1/4 + 1/4) = 1, so V = 1
    d = design(np.ones((4, 1)), [1, 0, 0, 1], clusters=["a", "a", "a", "b"], columns=["_cons"])
    fit = fit_logit(d)
    assert fit.coef[0] == pytest.approx(0.0, abs=1e-12)
    assert cluster_robust_vcov(fit, d)[0, 0] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(RegressionError, match="2 clusters"):
        cluster_robust_vcov(fit, design(np.ones((4, 1)), [1, 0, 0, 1], clusters="aaaa"))


def test_duplicating_rows_with_fresh_clusters():
    d = thirty_rows()
    dup = design(np.vstack([d.X, d.X]), np.concatenate([d.y, d.y]),
                 clusters=[f"c{i}" for i in range(60)], columns=d.columns)
    f1, f2 = fit_clustered(d), fit_clustered(dup)
    assert np.max(np.abs(f1.coef - f2.coef)) < 1e-8
    n = 30
    assert f2.se / f1.se == pytest.approx(np.full(3, math.sqrt((n - 1) / (2 * n - 1))), rel=1e-8)


def test_clustered_fit_properties():
    sub = regression_subset(group_corpus())
    d = build_design(sub)
    fit = fit_clustered(d)
    assert d.columns == ("_cons", "B", "C", "D", "pages", "n_authors")
    assert fit.n_clusters == sub.n_unique < fit.n_rows
    assert np.allclose(fit.vcov, fit.vcov.T, atol=0)
    assert np.linalg.eigvalsh(fit.vcov).min() >= -1e-10
    assert np.max(np.abs(score_contributions(fit, d).sum(axis=0))) < 1e-6
    p = expit(d.X @ fit.coef)
    assert np.all((p > 0) & (p < 1))


def test_reference_group_invariance():
    sub = regression_subset(group_corpus())
    base_design = build_design(sub)
    base = margins(fit_clustered(base_design), base_design)
    for ref in ("B", "C", "D"):
        d = build_design(sub, ref)
        m = margins(fit_clustered(d), d)
        for c in base.contrasts:
            assert m.contrast(c.group_a, c.group_b).estimate == pytest.approx(c.estimate, abs=1e-8)
            assert m.contrast(c.group_a, c.group_b).se == pytest.approx(c.se, abs=1e-8)
        for p in base.predictions:
            assert m.prediction(p.group).margin == pytest.approx(p.margin, abs=1e-8)
    with pytest.raises(RegressionError):
        build_design(sub, "Z")


FIXED_FIT = RegressionFit.from_coefficients(
    ("_cons", "Univ 2", "Univ 3", "Univ 4", "pages", "authors"),
    (-3.00, 0.14, 0.45, 0.14, 0.02, 0.14),
    groups=("Univ 1", "Univ 2", "Univ 3", "Univ 4"), reference_group="Univ 1")


def test_fixed_fit_contrasts():
    got = [(c.group_a, c.group_b, c.estimate) for c in pairwise_contrasts(FIXED_FIT)]
    expected = [("Univ 2", "Univ 1", 0.14), ("Univ 3", "Univ 1", 0.45), ("Univ 4", "Univ 1", 0.14),
                ("Univ 3", "Univ 2", 0.31), ("Univ 4", "Univ 2", 0.00), ("Univ 4", "Univ 3", -0.31)]
    for (a, b, est), (ea, eb, ee) in zip(got, expected):
        assert (a, b) == (ea, eb) and abs(est - ee) <= 0.005


def test_contrast_antisymmetry_self_and_toy_se():
    V = np.diag([1.0, 0.04, 0.09, 0.01, 0.0, 0.0])
    V[1, 2] = V[2, 1] = 0.01
    fit = RegressionFit.from_coefficients(FIXED_FIT.columns, FIXED_FIT.coef, V,
                                          FIXED_FIT.groups, FIXED_FIT.reference_group)
    ab, ba = contrast(fit, "Univ 3", "Univ 2"), contrast(fit, "Univ 2", "Univ 3")
    assert ab.estimate == -ba.estimate
    assert ab.se == pytest.approx(math.sqrt(0.09 + 0.04 - 2 * 0.01), rel=1e-12)
    self_c = contrast(fit, "Univ 2", "Univ 2")
    assert self_c.estimate == 0 and self_c.raw_p is None and self_c.adjusted_p is None
    cs = pairwise_contrasts(fit)
    assert all(c.adjusted_p == min(1.0, 6 * c.raw_p) for c in cs)
    with pytest.raises(RegressionError):
        contrast(fit, "Univ 9", "Univ 1")


def test_intercept_only_margin():
    y = np.array([1, 0, 0, 1, 1, 0, 0, 0, 1, 0], dtype=float)
    d = design(np.ones((10, 1)), y, columns=["_cons"], groups=["A"], ref="A")
    fit = fit_clustered(d)
    (pred,) = adjusted_predictions(fit, d)
    assert pred.margin == pytest.approx(y.mean(), abs=1e-10)
    pbar = y.mean()
    assert pred.se == pytest.approx(pbar * (1 - pbar) * fit.se[0], rel=1e-10)
    assert pred.upper - pred.margin == pytest.approx(1.959963984540054 * pred.se, rel=1e-9)


def test_margin_equals_rowwise_average():
    sub = regression_subset(group_corpus(seed=9))
    d = build_design(sub)
    fit = fit_clustered(d)
    for pred in adjusted_predictions(fit, d):
        total = 0.0
        for i in range(d.n_rows):
            row = d.X[i].copy()
            for j, name in enumerate(d.columns):
                if name in d.groups:
                    row[j] = 1.0 if name == pred.group else 0.0
            total += 1 / (1 + math.exp(-float(row @ fit.coef)))
        assert pred.margin == pytest.approx(total / d.n_rows, abs=1e-12)
        assert 0 <= pred.lower <= pred.margin <= pred.upper <= 1


def test_stars():
    assert [stars(p) for p in (0.0001, 0.005, 0.03, 0.2, None)] == ["***", "**", "*", "", ""]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_score_equations_random_designs(seed):
    rng = np.random.default_rng(seed)
    n = 80
    X = np.column_stack([np.ones(n), rng.normal(size=n), rng.integers(0, 2, n)])
    y = (rng.random(n) < expit(X @ np.array([-0.3, 0.7, 0.5]))).astype(float)
    d = design(X, y, columns=("_cons", "x", "g"))
    try:
        fit = fit_clustered(d)
    except SeparationError:
        return
    assert np.max(np.abs(score_contributions(fit, d).sum(axis=0))) < 1e-6
    assert np.linalg.eigvalsh(fit.vcov).min() >= -1e-10
