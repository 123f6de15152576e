"""Stability of classifier performance over the monthly test horizon.

Three layers of analysis: per-month confusion matrices and weighted F1,
per-dialect decay regressions of precision/recall against the month
index, and an error-correction analysis of how false-positive shares
between dialect pairs move together in the long run.

All regressions are plain OLS; the cointegration step is the two-step
estimator (levels regression, unit-root check on its residuals at lag 1
against the -2.89 critical value, then the error-correction regression
on first differences). Significance is two-sided at alpha = 0.05.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sstats

from .errors import EvaluationError, InsufficientDataError
from .models import DialectModel, predict_many

ALPHA = 0.05
ADF_CRITICAL_5PCT = -2.89  # intercept, no trend, n around 36


def _per_class_prf(confusion: np.ndarray):
    """Rows are gold, columns predicted. NaN where a class has no support
    and attracted no predictions."""
    tp = np.diag(confusion).astype(float)
    support = confusion.sum(axis=1).astype(float)
    predicted = confusion.sum(axis=0).astype(float)
    k = confusion.shape[0]
    precision = np.full(k, np.nan)
    recall = np.full(k, np.nan)
    f1 = np.full(k, np.nan)
    for i in range(k):
        if predicted[i] > 0:
            precision[i] = tp[i] / predicted[i]
        elif support[i] > 0:
            precision[i] = 0.0
        if support[i] > 0:
            recall[i] = tp[i] / support[i]
            p = precision[i] if not math.isnan(precision[i]) else 0.0
            r = recall[i]
            f1[i] = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return precision, recall, f1, support


def weighted_f1(preds, golds) -> float:
    """Support-weighted mean of per-class F1 over classes present in golds."""
    preds, golds = list(preds), list(golds)
    if not golds or len(preds) != len(golds):
        raise EvaluationError("empty or mismatched prediction/gold lists")
    total_f1 = 0.0
    total_support = 0
    for cls in sorted(set(golds)):
        tp = sum(1 for p, g in zip(preds, golds) if p == cls and g == cls)
        fp = sum(1 for p, g in zip(preds, golds) if p == cls and g != cls)
        support = sum(1 for g in golds if g == cls)
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / support
        f1 = 0.0 if precision + recall == 0 else \
            2 * precision * recall / (precision + recall)
        total_f1 += f1 * support
        total_support += support
    return total_f1 / total_support


@dataclass
class MonthEval:
    month: str
    confusion: np.ndarray  # gold x predicted over the series labels
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    weighted_f1: float
    baseline_f1: float


@dataclass
class EvaluationSeries:
    labels: tuple[str, ...]
    months: tuple[str, ...]
    evals: dict[str, MonthEval]

    def metric_matrix(self, metric: str) -> np.ndarray:
        """(n_labels, n_months) array of a per-dialect metric."""
        return np.column_stack([
            getattr(self.evals[m], metric) for m in self.months])


def build_series(model: DialectModel, features_by_month: dict,
                 majority_label: str) -> EvaluationSeries:
    """Evaluate the model on each month's featurized test set.

    ``features_by_month`` maps month -> (X, gold_labels). The baseline
    predicts the training-period majority label everywhere.
    """
    labels = model.labels
    index = {c: i for i, c in enumerate(labels)}
    months = tuple(sorted(features_by_month))
    evals: dict[str, MonthEval] = {}
    for month in months:
        x, golds = features_by_month[month]
        golds = list(golds)
        if len(golds) == 0:
            raise EvaluationError(f"month {month} has no test samples")
        preds = predict_many(model, x)
        confusion = np.zeros((len(labels), len(labels)), dtype=int)
        for p, g in zip(preds, golds):
            confusion[index[g], index[p]] += 1
        precision, recall, f1, support = _per_class_prf(confusion)
        evals[month] = MonthEval(
            month=month, confusion=confusion, precision=precision,
            recall=recall, f1=f1, support=support,
            weighted_f1=weighted_f1(preds, golds),
            baseline_f1=weighted_f1([majority_label] * len(golds), golds),
        )
    return EvaluationSeries(labels=labels, months=months, evals=evals)


def _ols(x: np.ndarray, y: np.ndarray):
    """Least squares with classical standard errors.

    Returns (beta, se, t, p, resid, df). Exact fits get se = 0 and the
    t/p convention t = 0, p = 1 for zero coefficients, else |t| = inf,
    p = 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ beta
    df = x.shape[0] - x.shape[1]
    rss = float(resid @ resid)
    xtx_inv = np.linalg.pinv(x.T @ x)
    scale = max(1.0, float(np.max(np.abs(y)))) if len(y) else 1.0
    if df <= 0 or rss <= (1e-12 * scale) ** 2 * len(y):
        # exact fit: coefficients at numerical-noise level are zero
        beta = np.where(np.abs(beta) < 1e-10 * scale, 0.0, beta)
        se = np.zeros(len(beta))
        t = np.array([0.0 if b == 0 else math.copysign(math.inf, b) for b in beta])
        p = np.array([1.0 if b == 0 else 0.0 for b in beta])
        return beta, se, t, p, resid, df
    sigma2 = rss / df
    se = np.sqrt(np.maximum(np.diag(xtx_inv) * sigma2, 0.0))
    t = np.empty(len(beta))
    p = np.empty(len(beta))
    for i, b in enumerate(beta):
        if se[i] == 0:
            t[i] = 0.0 if b == 0 else math.copysign(math.inf, b)
            p[i] = 1.0 if b == 0 else 0.0
        else:
            t[i] = b / se[i]
            p[i] = 2.0 * float(sstats.t.sf(abs(t[i]), df))
    return beta, se, t, p, resid, df


@dataclass(frozen=True)
class FitStat:
    slope: float
    intercept: float
    stderr: float
    tstat: float
    pvalue: float
    n_months: int

    @property
    def significant(self) -> bool:
        return self.pvalue < ALPHA


@dataclass
class DecayFit:
    fits: dict[tuple[str, str], FitStat]  # (dialect, metric) -> stats
    metrics: tuple[str, ...]
    labels: tuple[str, ...]


def decay_fit(series: EvaluationSeries, metrics=("precision", "recall"),
              min_months: int = 3) -> DecayFit:
    """Per-dialect OLS of each metric against the month index."""
    if len(series.months) < min_months:
        raise InsufficientDataError(
            f"decay regression needs >= {min_months} months, got {len(series.months)}")
    fits: dict[tuple[str, str], FitStat] = {}
    for metric in metrics:
        values = series.metric_matrix(metric)
        for i, label in enumerate(series.labels):
            y = values[i]
            t = np.arange(len(series.months), dtype=float)
            mask = ~np.isnan(y)
            if mask.sum() < min_months:
                raise InsufficientDataError(
                    f"{label}/{metric}: only {int(mask.sum())} usable months")
            x = np.column_stack([np.ones(mask.sum()), t[mask]])
            beta, se, tstat, pval, _, _ = _ols(x, y[mask])
            fits[(label, metric)] = FitStat(
                slope=float(beta[1]), intercept=float(beta[0]),
                stderr=float(se[1]), tstat=float(tstat[1]),
                pvalue=float(pval[1]), n_months=int(mask.sum()))
    return DecayFit(fits=fits, metrics=tuple(metrics), labels=series.labels)


@dataclass(frozen=True)
class ContrastStat:
    slope_diff: float
    tstat: float
    pvalue: float
    pvalue_adjusted: float
    reference: str
    flagged: bool


def slope_contrast(series: EvaluationSeries, metrics=("precision", "recall"),
                   alpha: float = ALPHA) -> dict[str, dict[str, ContrastStat]]:
    """Flag dialects whose decay slope deviates from the others.

    Each dialect is compared against the dialect holding the median slope
    among the remaining ones (a pooled regression of both series with a
    dialect x time interaction); the interaction p-values are
    Holm-adjusted across dialects so the familywise level is alpha. The
    median reference keeps a single drifting dialect from contaminating
    everyone else's comparison.
    """
    if len(series.labels) < 3:
        raise InsufficientDataError("slope contrast needs at least 3 dialects")
    fits = decay_fit(series, metrics=metrics)
    out: dict[str, dict[str, ContrastStat]] = {}
    t = np.arange(len(series.months), dtype=float)
    for metric in metrics:
        values = series.metric_matrix(metric)
        raw: dict[str, tuple[float, float, float, str]] = {}
        for i, label in enumerate(series.labels):
            others = [l for l in series.labels if l != label]
            slopes = sorted(others, key=lambda l: (fits.fits[(l, metric)].slope, l))
            reference = slopes[(len(slopes) - 1) // 2]
            j = series.labels.index(reference)
            yi, yj = values[i], values[j]
            mask = ~np.isnan(yi) & ~np.isnan(yj)
            y = np.concatenate([yi[mask], yj[mask]])
            tt = np.concatenate([t[mask], t[mask]])
            ind = np.concatenate([np.ones(mask.sum()), np.zeros(mask.sum())])
            x = np.column_stack([np.ones(len(y)), tt, ind, tt * ind])
            beta, _, tstat, pval, _, _ = _ols(x, y)
            raw[label] = (float(beta[3]), float(tstat[3]), float(pval[3]), reference)
        # Holm step-down adjustment across dialects
        order = sorted(series.labels, key=lambda l: raw[l][2])
        k = len(order)
        adjusted: dict[str, float] = {}
        running = 0.0
        for rank, label in enumerate(order):
            adj = min(1.0, (k - rank) * raw[label][2])
            running = max(running, adj)
            adjusted[label] = running
        out[metric] = {
            label: ContrastStat(
                slope_diff=raw[label][0], tstat=raw[label][1],
                pvalue=raw[label][2], pvalue_adjusted=adjusted[label],
                reference=raw[label][3], flagged=adjusted[label] < alpha)
            for label in series.labels}
    return out


@dataclass
class FPShareSeries:
    """share[i, j, t]: fraction of source i's month-t errors landing on j."""

    labels: tuple[str, ...]
    months: tuple[str, ...]
    shares: np.ndarray  # (K, K, M), NaN where source i had no errors

    def pair(self, source: str, target: str) -> np.ndarray:
        return self.shares[self.labels.index(source), self.labels.index(target)]


def fp_shares(series: EvaluationSeries) -> FPShareSeries:
    k = len(series.labels)
    m = len(series.months)
    shares = np.full((k, k, m), np.nan)
    for ti, month in enumerate(series.months):
        confusion = series.evals[month].confusion.astype(float)
        for i in range(k):
            row_errors = confusion[i].sum() - confusion[i, i]
            if row_errors > 0:
                for j in range(k):
                    if j != i:
                        shares[i, j, ti] = confusion[i, j] / row_errors
    return FPShareSeries(labels=series.labels, months=series.months, shares=shares)


def adf_tstat(e: np.ndarray, lag: int = 1) -> float:
    """Unit-root t-statistic: de_t on (1, e_{t-1}, de_{t-1})."""
    e = np.asarray(e, dtype=float)
    de = np.diff(e)
    if len(de) <= lag + 2:
        raise InsufficientDataError("series too short for the unit-root check")
    y = de[lag:]
    x = np.column_stack([np.ones(len(y)), e[lag:-1], de[:-lag]])
    _, _, tstat, _, _, _ = _ols(x, y)
    return float(tstat[1])


@dataclass(frozen=True)
class PairResult:
    alpha: float
    tstat: float
    pvalue: float
    cointegrated: bool
    significant: bool
    n_months: int

    @property
    def reported(self) -> float:
        """Table-style value: the adjustment coefficient when the pair is
        cointegrated and significant, else 0."""
        return self.alpha if (self.cointegrated and self.significant) else 0.0


def engle_granger_pair(y: np.ndarray, x: np.ndarray, lag: int = 1,
                       adf_critical: float = ADF_CRITICAL_5PCT) -> PairResult:
    """Two-step error-correction estimate for one ordered pair.

    Step 1 regresses y on x with an intercept and checks the residuals
    for stationarity; step 2 fits dy_t = alpha * ect_{t-1} +
    gamma * dy_{t-1} with no intercept. A negative significant alpha
    means y error-corrects toward the long-run relation.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(y)
    if n != len(x):
        raise EvaluationError("pair series length mismatch")
    if n < 12:
        raise InsufficientDataError(f"need >= 12 months, got {n}")
    if np.allclose(y, y[0]) or np.allclose(x, x[0]):
        return PairResult(0.0, 0.0, 1.0, False, False, n)
    beta, *_ = np.linalg.lstsq(np.column_stack([np.ones(n), x]), y, rcond=None)
    ect = y - beta[0] - beta[1] * x
    cointegrated = adf_tstat(ect, lag=lag) < adf_critical
    dy = np.diff(y)
    target = dy[lag:]
    design = np.column_stack([ect[lag:-1], dy[:-lag]])
    coef, _, tstat, pval, _, _ = _ols(design, target)
    significant = pval[0] < ALPHA
    return PairResult(alpha=float(coef[0]), tstat=float(tstat[0]),
                      pvalue=float(pval[0]), cointegrated=bool(cointegrated),
                      significant=bool(significant), n_months=n)


@dataclass
class VecmResult:
    labels: tuple[str, ...]
    pairs: dict[tuple[str, str], PairResult]
    skipped: dict[tuple[str, str], int]  # pair -> usable months (< 12)

    def matrix(self) -> np.ndarray:
        k = len(self.labels)
        out = np.zeros((k, k))
        for (s, t), res in self.pairs.items():
            out[self.labels.index(s), self.labels.index(t)] = res.reported
        return out


def vecm(shares: FPShareSeries, lag: int = 1, min_months: int = 12) -> VecmResult:
    """Pairwise error-correction results over all ordered dialect pairs.

    For pair (i, j) the partner series is the reverse direction (j, i);
    months missing on either side are dropped pairwise. Pairs with fewer
    than ``min_months`` usable months are skipped; a series that is
    itself shorter than ``min_months`` raises.
    """
    if len(shares.months) < min_months:
        raise InsufficientDataError(
            f"series has {len(shares.months)} months, need >= {min_months}")
    pairs: dict[tuple[str, str], PairResult] = {}
    skipped: dict[tuple[str, str], int] = {}
    for i, source in enumerate(shares.labels):
        for j, target in enumerate(shares.labels):
            if i == j:
                continue
            y = shares.shares[i, j]
            x = shares.shares[j, i]
            mask = ~np.isnan(y) & ~np.isnan(x)
            if mask.sum() < min_months:
                skipped[(source, target)] = int(mask.sum())
                continue
            pairs[(source, target)] = engle_granger_pair(y[mask], x[mask], lag=lag)
    return VecmResult(labels=shares.labels, pairs=pairs, skipped=skipped)
