"""Logistic regression of top-10% membership on group dummies and covariates,
with cluster-robust (sandwich) covariance, pairwise coefficient contrasts and
adjusted predictions (average predictive margins) with delta-method errors.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import special, stats

from ._stats import bonferroni, norm_sf2
from .corpus import Corpus

logger = logging.getLogger(__name__)

SEPARATION_LIMIT = 30.0
# Near separation the deviance flattens while Newton keeps stepping about one
# unit per iteration, so convergence also requires a small step.
STEP_TOL = 1e-4
INTERCEPT = "_cons"


class RegressionError(Exception):
    pass


class RankDeficiencyError(RegressionError):
    pass


class SeparationError(RegressionError):
    pass


class ConvergenceError(RegressionError):
    pass


@dataclass(frozen=True)
class DesignMatrix:
    X: np.ndarray
    y: np.ndarray
    cluster_ids: tuple[str, ...]
    columns: tuple[str, ...]
    groups: tuple[str, ...] = ()
    reference_group: str | None = None

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise RegressionError("X and y disagree on the number of rows")
        if len(self.cluster_ids) != self.X.shape[0]:
            raise RegressionError("one cluster id per row is required")
        if len(self.columns) != self.X.shape[1]:
            raise RegressionError("one column name per design column is required")
        if not np.all((self.y == 0) | (self.y == 1)):
            raise RegressionError("outcome must be coded 0/1")
        if not np.all(np.isfinite(self.X)):
            raise RegressionError("design matrix has missing or non-finite cells")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def group_column(self, group: str) -> int | None:
        """Column index of a group dummy; None for the reference group."""
        if group not in self.groups:
            raise RegressionError(f"unknown group {group!r}")
        if group == self.reference_group:
            return None
        return self.columns.index(group)

    def set_group(self, group: str) -> np.ndarray:
        """Copy of X with every row's group dummies switched to ``group``."""
        X = self.X.copy()
        for g in self.groups:
            if g != self.reference_group:
                X[:, self.columns.index(g)] = 0.0
        col = self.group_column(group)
        if col is not None:
            X[:, col] = 1.0
        return X


def build_design(corpus: Corpus, reference_group: str | None = None,
                 covariates: Sequence[str] = ("pages", "n_authors"),
                 top_threshold: float = 10.0) -> DesignMatrix:
    """Design for the PR(2) model: 1 = percentile <= 10 (class 10%).

    Columns are the intercept, one dummy per non-reference group, then the
    covariates. Records with any missing value must have been removed first
    (see corpus.regression_subset).
    """
    groups = tuple(corpus.groups)
    if not groups:
        raise RegressionError("no records to build a design matrix from")
    ref = groups[0] if reference_group is None else reference_group
    if ref not in groups:
        raise RegressionError(f"reference group {ref!r} not present in data")
    dummies = [g for g in groups if g != ref]
    columns = (INTERCEPT, *dummies, *covariates)
    rows = []
    y = []
    clusters = []
    for rec in corpus.records:
        vals = [getattr(rec, c) for c in covariates]
        if rec.percentile is None or any(v is None for v in vals):
            raise RegressionError(f"record {rec.pub_id!r}/{rec.group!r} has missing values")
        rows.append([1.0, *(1.0 if rec.group == g else 0.0 for g in dummies), *map(float, vals)])
        y.append(1.0 if rec.percentile <= top_threshold else 0.0)
        clusters.append(rec.pub_id)
    return DesignMatrix(np.array(rows, dtype=float).reshape(len(rows), len(columns)),
                        np.array(y), tuple(clusters), columns, groups, ref)


def design_summary(design: DesignMatrix) -> list[dict]:
    """Mean, sd (n-1), min and max for the outcome and each non-constant column."""
    out = []
    cols = [("PR(2)", design.y)]
    cols += [(name, design.X[:, j]) for j, name in enumerate(design.columns) if name != INTERCEPT]
    for name, v in cols:
        out.append({"variable": name, "mean": float(v.mean()),
                    "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
                    "min": float(v.min()), "max": float(v.max())})
    return out


@dataclass(frozen=True)
class RegressionFit:
    columns: tuple[str, ...]
    coef: np.ndarray
    cov_model: np.ndarray | None = None  # inverse observed information
    vcov: np.ndarray | None = None  # cluster-robust
    n_rows: int = 0
    n_clusters: int = 0
    converged: bool = True
    iterations: int = 0
    deviance: float = float("nan")
    groups: tuple[str, ...] = ()
    reference_group: str | None = None

    @classmethod
    def from_coefficients(cls, columns: Sequence[str], coef: Sequence[float],
                          vcov=None, groups: Sequence[str] = (),
                          reference_group: str | None = None) -> "RegressionFit":
        """A fit with externally supplied estimates, e.g. a published table."""
        coef = np.asarray(coef, dtype=float)
        vcov = None if vcov is None else np.asarray(vcov, dtype=float)
        return cls(tuple(columns), coef, None, vcov, groups=tuple(groups),
                   reference_group=reference_group)

    def _cov(self) -> np.ndarray | None:
        return self.vcov if self.vcov is not None else self.cov_model

    @property
    def se(self) -> np.ndarray:
        cov = self._cov()
        if cov is None:
            return np.full(self.coef.shape, np.nan)
        return np.sqrt(np.clip(np.diag(cov), 0, None))

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coef / self.se

    @property
    def p_values(self) -> np.ndarray:
        return np.array([norm_sf2(z) if np.isfinite(z) else np.nan for z in self.z])

    def coef_of(self, name: str) -> float:
        return float(self.coef[self.columns.index(name)])

    def group_vector(self, group: str) -> np.ndarray:
        """Selector c with c'beta = group effect relative to the reference."""
        if self.groups and group not in self.groups:
            raise RegressionError(f"unknown group {group!r}")
        c = np.zeros_like(self.coef)
        if group != self.reference_group:
            if group not in self.columns:
                raise RegressionError(f"unknown group {group!r}")
            c[self.columns.index(group)] = 1.0
        return c

    def table(self) -> list[dict]:
        return [{"variable": name, "coef": float(b), "se": float(s), "z": float(z),
                 "p": float(p)}
                for name, b, s, z, p in zip(self.columns, self.coef, self.se, self.z,
                                            self.p_values)]

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns), "coefficients": self.table(),
            "vcov": None if self.vcov is None else self.vcov.tolist(),
            "vcov_type": "cluster" if self.vcov is not None else "model",
            "n_rows": self.n_rows, "n_clusters": self.n_clusters,
            "converged": self.converged, "iterations": self.iterations,
            "deviance": self.deviance, "reference_group": self.reference_group,
        }


def _deviance(X, y, beta) -> float:
    eta = X @ beta
    # -2 loglik, written to stay finite for large |eta|
    return float(2.0 * np.sum(y * np.logaddexp(0, -eta) + (1 - y) * np.logaddexp(0, eta)))


def _check_rank(design: DesignMatrix) -> None:
    X = design.X
    rank = 0
    for j in range(X.shape[1]):
        r = np.linalg.matrix_rank(X[:, : j + 1])
        if r <= rank:
            raise RankDeficiencyError(
                f"design is rank deficient: column {design.columns[j]!r} is collinear "
                "with the preceding columns")
        rank = r


def fit_logit(design: DesignMatrix, tol: float = 1e-8, max_iter: int = 50) -> RegressionFit:
    """Maximum likelihood by Newton-Raphson (IRLS).

    Stops when the deviance changes by less than ``tol`` and the Newton step
    has become small (below STEP_TOL in every coordinate). A coefficient
    exceeding 30 in magnitude, or a deviance increase that step-halving
    cannot undo, is reported as (quasi-)separation.
    """
    X, y = design.X, design.y
    if design.n_rows == 0:
        raise RegressionError("no rows to fit")
    if y.min() == y.max():
        raise SeparationError(f"outcome is constant (all {int(y[0])}); the model is not estimable")
    _check_rank(design)
    beta = np.zeros(X.shape[1])
    dev = _deviance(X, y, beta)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = special.expit(X @ beta)
        w = p * (1 - p)
        info = X.T @ (X * w[:, None])
        step = np.linalg.solve(info, X.T @ (y - p))
        new_beta = beta + step
        new_dev = _deviance(X, y, new_beta)
        halvings = 0
        while new_dev > dev + 1e-12 * max(1.0, abs(dev)) and halvings < 20:
            step /= 2
            new_beta = beta + step
            new_dev = _deviance(X, y, new_beta)
            halvings += 1
        if new_dev > dev + 1e-12 * max(1.0, abs(dev)):
            raise SeparationError("deviance failed to decrease; data appear separated")
        beta = new_beta
        if np.max(np.abs(beta)) > SEPARATION_LIMIT:
            bad = design.columns[int(np.argmax(np.abs(beta)))]
            raise SeparationError(f"coefficient of {bad!r} diverges (|beta| > {SEPARATION_LIMIT:g}); "
                                  "complete or quasi-complete separation")
        change = abs(dev - new_dev)
        dev = new_dev
        if change < tol and np.max(np.abs(step)) < STEP_TOL:
            converged = True
            break
    if not converged:
        raise ConvergenceError(f"no convergence after {max_iter} iterations")
    p = special.expit(X @ beta)
    info = X.T @ (X * (p * (1 - p))[:, None])
    cov_model = np.linalg.inv(info)
    return RegressionFit(design.columns, beta, cov_model, None, design.n_rows,
                         len(set(design.cluster_ids)), converged, it, dev,
                         design.groups, design.reference_group)


def score_contributions(fit: RegressionFit, design: DesignMatrix) -> np.ndarray:
    p = special.expit(design.X @ fit.coef)
    return design.X * (design.y - p)[:, None]


def cluster_robust_vcov(fit: RegressionFit, design: DesignMatrix) -> np.ndarray:
    """Sandwich A^-1 B A^-1 with B summed over cluster score totals and the
    small-sample factor G/(G-1)."""
    if fit.cov_model is None:
        raise RegressionError("cluster-robust covariance needs a fitted model")
    _, codes = np.unique(np.asarray(design.cluster_ids, dtype=object), return_inverse=True)
    n_clusters = int(codes.max()) + 1 if codes.size else 0
    if n_clusters < 2:
        raise RegressionError(f"cluster-robust covariance needs >= 2 clusters, got {n_clusters}")
    scores = score_contributions(fit, design)
    totals = np.zeros((n_clusters, scores.shape[1]))
    np.add.at(totals, codes, scores)
    meat = n_clusters / (n_clusters - 1) * (totals.T @ totals)
    bread = fit.cov_model
    v = bread @ meat @ bread
    return (v + v.T) / 2


def fit_clustered(design: DesignMatrix, tol: float = 1e-8, max_iter: int = 50) -> RegressionFit:
    fit = fit_logit(design, tol, max_iter)
    return replace(fit, vcov=cluster_robust_vcov(fit, design))


# -- post-estimation -----------------------------------------------------------

@dataclass(frozen=True)
class Contrast:
    group_a: str
    group_b: str
    estimate: float
    se: float
    statistic: float
    raw_p: float | None
    adjusted_p: float | None

    def to_dict(self) -> dict:
        return {"group_a": self.group_a, "group_b": self.group_b, "estimate": self.estimate,
                "se": self.se, "statistic": self.statistic, "raw_p": self.raw_p,
                "adjusted_p": self.adjusted_p}


@dataclass(frozen=True)
class AdjustedPrediction:
    group: str
    margin: float
    se: float
    lower: float
    upper: float
    level: float = 0.95
    clipped: bool = False

    def to_dict(self) -> dict:
        return {"group": self.group, "margin": self.margin, "se": self.se,
                "lower": self.lower, "upper": self.upper, "level": self.level,
                "clipped": self.clipped}


@dataclass(frozen=True)
class MarginsResult:
    predictions: tuple[AdjustedPrediction, ...] = ()
    contrasts: tuple[Contrast, ...] = ()
    extra: dict = field(default_factory=dict)

    def prediction(self, group: str) -> AdjustedPrediction:
        for p in self.predictions:
            if p.group == group:
                return p
        raise KeyError(group)

    def contrast(self, a: str, b: str) -> Contrast:
        for c in self.contrasts:
            if (c.group_a, c.group_b) == (a, b):
                return c
        raise KeyError((a, b))

    def to_dict(self) -> dict:
        return {"predictions": [p.to_dict() for p in self.predictions],
                "contrasts": [c.to_dict() for c in self.contrasts]}


def contrast(fit: RegressionFit, a: str, b: str, m: int = 1) -> Contrast:
    """Linear-predictor difference group a minus group b, covariates held equal."""
    c = fit.group_vector(a) - fit.group_vector(b)
    est = float(c @ fit.coef)
    if a == b:
        return Contrast(a, b, 0.0, float("nan"), float("nan"), None, None)
    cov = fit._cov()
    se = math.sqrt(max(float(c @ cov @ c), 0.0)) if cov is not None else float("nan")
    stat = est / se if se > 0 else float("nan")
    raw = norm_sf2(stat) if math.isfinite(stat) else None
    adj = None if raw is None else bonferroni([raw], m)[0]
    return Contrast(a, b, est, se, stat, raw, adj)


def pairwise_contrasts(fit: RegressionFit, groups: Sequence[str] | None = None) -> tuple[Contrast, ...]:
    """All pairs (later label vs earlier label), Bonferroni over k(k-1)/2."""
    groups = tuple(groups) if groups is not None else tuple(fit.groups)
    if len(groups) < 2:
        return ()
    pairs = list(itertools.combinations(groups, 2))
    return tuple(contrast(fit, b, a, len(pairs)) for a, b in pairs)


def adjusted_predictions(fit: RegressionFit, design: DesignMatrix,
                         groups: Sequence[str] | None = None,
                         level: float = 0.95) -> tuple[AdjustedPrediction, ...]:
    """Average predicted probability with every row assigned to each group in turn.

    Standard errors come from the delta method using the averaged gradient
    and the fit's covariance (cluster-robust when available).
    """
    groups = tuple(groups) if groups is not None else tuple(design.groups)
    cov = fit._cov()
    zcrit = stats.norm.ppf(0.5 + level / 2)
    out = []
    for g in groups:
        Xg = design.set_group(g)
        p = special.expit(Xg @ fit.coef)
        margin = float(p.mean())
        grad = (Xg * (p * (1 - p))[:, None]).mean(axis=0)
        se = math.sqrt(max(float(grad @ cov @ grad), 0.0)) if cov is not None else float("nan")
        lo, hi = margin - zcrit * se, margin + zcrit * se
        clipped = lo < 0 or hi > 1
        out.append(AdjustedPrediction(g, margin, se, max(lo, 0.0), min(hi, 1.0), level, clipped))
    return tuple(out)


def margins(fit: RegressionFit, design: DesignMatrix, level: float = 0.95) -> MarginsResult:
    return MarginsResult(adjusted_predictions(fit, design, level=level),
                         pairwise_contrasts(fit, design.groups))


def stars(p: float | None) -> str:
    if p is None or not math.isfinite(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""
