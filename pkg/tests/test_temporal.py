import math

import numpy as np
import pytest

from cxgdialect.errors import EvaluationError, InsufficientDataError
from cxgdialect.models import DialectModel
from cxgdialect.temporal import (EvaluationSeries, FPShareSeries, MonthEval,
                                 adf_tstat, build_series, decay_fit,
                                 engle_granger_pair, fp_shares, slope_contrast,
                                 vecm, weighted_f1)
from cxgdialect.months import month_range


def test_weighted_f1_all_correct():
    assert weighted_f1(["A", "B", "A"], ["A", "B", "A"]) == 1.0


def test_weighted_f1_hand_computed_supports():
    golds = ["A", "A", "A", "B"]
    preds = ["A", "A", "A", "C"]  # A perfect, B completely missed
    assert weighted_f1(preds, golds) == pytest.approx(0.75)


def test_weighted_f1_empty_raises():
    with pytest.raises(EvaluationError):
        weighted_f1([], [])
    with pytest.raises(EvaluationError):
        weighted_f1(["A"], ["A", "B"])


def one_hot_model(labels):
    """Feature i votes for dialect i, so predictions mirror the hot index."""
    k = len(labels)
    return DialectModel(weights=np.eye(k), intercepts=np.zeros(k),
                        feature_ids=tuple(f"f{i}" for i in range(k)),
                        labels=tuple(labels), featurizer="cxg")


def hot(labels, label):
    x = np.zeros(len(labels))
    x[labels.index(label)] = 1.0
    return x


def test_build_series_perfect_classifier():
    labels = ["A", "B"]
    model = one_hot_model(labels)
    months = month_range("2019-01", "2019-04")
    features = {}
    for m in months:
        golds = ["A", "A", "B", "B"]
        features[m] = (np.vstack([hot(labels, g) for g in golds]), golds)
    series = build_series(model, features, majority_label="A")
    for m in months:
        ev = series.evals[m]
        assert ev.weighted_f1 == 1.0
        assert np.array_equal(ev.confusion, np.diag([2, 2]))
        assert ev.support.tolist() == [2, 2]


def test_build_series_majority_baseline_balanced():
    labels = ["A", "B"]
    model = one_hot_model(labels)
    golds = ["A", "B"] * 4
    features = {"2019-01": (np.vstack([hot(labels, g) for g in golds]), golds)}
    series = build_series(model, features, majority_label="A")
    ev = series.evals["2019-01"]
    # majority accuracy = 1/k = 0.5; its weighted F1 is (2/3)/2 by hand
    assert ev.baseline_f1 == pytest.approx((2 / 3) * 0.5)


def test_build_series_confusion_row_sums_match_supports():
    labels = ["A", "B", "C"]
    model = one_hot_model(labels)
    golds = ["A"] * 4 + ["B"] * 3 + ["C"] * 2
    preds = ["A", "A", "B", "C", "B", "B", "A", "C", "C"]
    x = np.vstack([hot(labels, p) for p in preds])
    series = build_series(model, {"2019-01": (x, golds)}, majority_label="A")
    confusion = series.evals["2019-01"].confusion
    assert confusion.sum(axis=1).tolist() == [4, 3, 2]


def series_from(labels, months, metric_rows):
    """Build a series whose precision and recall both equal metric_rows."""
    evals = {}
    k = len(labels)
    values = np.asarray(metric_rows, dtype=float)
    for t, month in enumerate(months):
        evals[month] = MonthEval(
            month=month, confusion=np.zeros((k, k), dtype=int),
            precision=values[:, t].copy(), recall=values[:, t].copy(),
            f1=values[:, t].copy(), support=np.ones(k),
            weighted_f1=float(values[:, t].mean()), baseline_f1=0.0)
    return EvaluationSeries(labels=tuple(labels), months=tuple(months),
                            evals=evals)


def test_decay_fit_exact_line():
    months = month_range("2019-01", "2021-12")
    t = np.arange(len(months))
    series = series_from(["A"], months, [0.70 - 0.002 * t])
    fit = decay_fit(series).fits[("A", "recall")]
    assert fit.slope == pytest.approx(-0.002, abs=1e-12)
    assert fit.stderr == 0.0
    assert fit.pvalue == 0.0 and fit.significant


def test_decay_fit_constant_series_not_significant():
    months = month_range("2019-01", "2019-12")
    series = series_from(["A"], months, [np.full(12, 0.8)])
    fit = decay_fit(series).fits[("A", "recall")]
    assert fit.slope == 0.0
    assert fit.pvalue == 1.0 and not fit.significant


def test_decay_fit_too_few_months():
    series = series_from(["A"], ["2019-01", "2019-02"], [[0.5, 0.6]])
    with pytest.raises(InsufficientDataError):
        decay_fit(series)


def test_decay_fit_reversed_series_negates_slope():
    months = month_range("2019-01", "2020-12")
    rng = np.random.default_rng(4)
    y = 0.7 - 0.003 * np.arange(24) + rng.normal(0, 0.01, 24)
    forward = decay_fit(series_from(["A"], months, [y])).fits[("A", "recall")]
    backward = decay_fit(series_from(["A"], months, [y[::-1]])).fits[("A", "recall")]
    assert forward.slope == pytest.approx(-backward.slope, abs=1e-12)


def test_decay_fit_monte_carlo_ci_coverage():
    months = month_range("2019-01", "2021-12")
    t = np.arange(36)
    covered = 0
    runs = 40
    for seed in range(runs):
        rng = np.random.default_rng(seed)
        y = 0.7 - 0.003 * t + rng.normal(0, 0.01, 36)
        fit = decay_fit(series_from(["A"], months, [y])).fits[("A", "recall")]
        if abs(fit.slope - (-0.003)) <= 2 * fit.stderr:
            covered += 1
    assert covered >= 0.95 * runs


def test_slope_contrast_no_flags_for_shared_slope():
    months = month_range("2019-01", "2020-12")
    t = np.arange(24)
    rows = [0.8 - 0.002 * t, 0.7 - 0.002 * t, 0.6 - 0.002 * t, 0.75 - 0.002 * t]
    contrast = slope_contrast(series_from(list("ABCD"), months, rows))
    for metric in ("precision", "recall"):
        assert not any(c.flagged for c in contrast[metric].values())


def test_slope_contrast_flags_the_outlier():
    months = month_range("2019-01", "2021-12")
    t = np.arange(36)
    rng = np.random.default_rng(0)
    slope = -0.002
    rows = [0.8 + slope * t + rng.normal(0, 0.004, 36) for _ in range(3)]
    rows.append(0.8 + 5 * slope * t + rng.normal(0, 0.004, 36))
    contrast = slope_contrast(series_from(list("ABCD"), months, rows))
    flags = {d for d, c in contrast["recall"].items() if c.flagged}
    assert flags == {"D"}


def test_slope_contrast_recall_only_shape():
    """A dialect can deviate in recall while precision stays shared."""
    months = month_range("2019-01", "2021-12")
    t = np.arange(36)
    k = 4
    labels = list("ABCD")
    evals = {}
    rng = np.random.default_rng(1)
    for ti, month in enumerate(months):
        precision = 0.8 - 0.001 * ti + rng.normal(0, 0.003, k)
        recall = 0.8 - 0.001 * ti + rng.normal(0, 0.003, k)
        recall[3] -= 0.009 * ti  # only D decays faster, only in recall
        evals[month] = MonthEval(month=month, confusion=np.zeros((k, k), int),
                                 precision=precision, recall=recall,
                                 f1=recall.copy(), support=np.ones(k),
                                 weighted_f1=0.0, baseline_f1=0.0)
    series = EvaluationSeries(labels=tuple(labels), months=tuple(months),
                              evals=evals)
    contrast = slope_contrast(series)
    recall_flags = {d for d, c in contrast["recall"].items() if c.flagged}
    precision_flags = {d for d, c in contrast["precision"].items() if c.flagged}
    assert recall_flags == {"D"}
    assert "D" not in precision_flags


def confusion_series(labels, months, confusions):
    evals = {}
    k = len(labels)
    for month, confusion in zip(months, confusions):
        confusion = np.asarray(confusion)
        evals[month] = MonthEval(month=month, confusion=confusion,
                                 precision=np.zeros(k), recall=np.zeros(k),
                                 f1=np.zeros(k), support=confusion.sum(axis=1),
                                 weighted_f1=0.0, baseline_f1=0.0)
    return EvaluationSeries(labels=tuple(labels), months=tuple(months),
                            evals=evals)


def test_fp_shares_normalizes_reported_counts():
    labels = ("CA", "US", "IN", "PK")
    confusion = np.zeros((4, 4), dtype=int)
    confusion[0] = [100, 1488, 48, 7]  # CA row: diagonal plus three error cells
    series = confusion_series(labels, ["2019-01"], [confusion])
    shares = fp_shares(series)
    assert shares.pair("CA", "US")[0] == pytest.approx(0.9644, abs=5e-5)
    assert shares.pair("CA", "IN")[0] == pytest.approx(0.0311, abs=5e-5)
    assert shares.pair("CA", "PK")[0] == pytest.approx(0.0045, abs=5e-5)


def test_fp_shares_single_error_is_one():
    confusion = np.zeros((2, 2), dtype=int)
    confusion[0, 1] = 1
    series = confusion_series(("A", "B"), ["2019-01"], [confusion])
    shares = fp_shares(series)
    assert shares.pair("A", "B")[0] == 1.0


def test_fp_shares_rows_sum_to_one_or_missing(rng):
    labels = tuple("ABC")
    confusions = [rng.integers(0, 9, size=(3, 3)) for _ in range(5)]
    series = confusion_series(labels, month_range("2019-01", "2019-05"), confusions)
    shares = fp_shares(series)
    for i in range(3):
        for t in range(5):
            row = [shares.shares[i, j, t] for j in range(3) if j != i]
            if all(np.isnan(v) for v in row):
                continue
            assert sum(row) == pytest.approx(1.0)


def test_fp_shares_invariant_to_row_scaling():
    confusion = np.array([[5, 3, 2], [1, 7, 4], [2, 2, 6]])
    series1 = confusion_series(tuple("ABC"), ["2019-01"], [confusion])
    series2 = confusion_series(tuple("ABC"), ["2019-01"], [confusion * 13])
    assert np.allclose(fp_shares(series1).shares, fp_shares(series2).shares,
                       equal_nan=True)


def simulate_cointegrated(seed, n=36):
    rng = np.random.default_rng(seed)
    x = np.cumsum(rng.normal(0, 1.0, n))
    noise = np.zeros(n)
    for t in range(1, n):
        noise[t] = 0.3 * noise[t - 1] + rng.normal(0, 0.5)
    return x + noise, x


def test_engle_granger_detects_cointegration_with_negative_alpha():
    y, x = simulate_cointegrated(seed=3)
    result = engle_granger_pair(y, x)
    assert result.cointegrated
    assert result.significant
    assert result.alpha < 0
    assert result.reported < 0


def test_engle_granger_alpha_matches_independent_ols():
    y, x = simulate_cointegrated(seed=3)
    result = engle_granger_pair(y, x)
    # recompute the two-step estimate directly
    beta = np.linalg.lstsq(np.column_stack([np.ones(len(x)), x]), y, rcond=None)[0]
    ect = y - beta[0] - beta[1] * x
    dy = np.diff(y)
    design = np.column_stack([ect[1:-1], dy[:-1]])
    coef = np.linalg.lstsq(design, dy[1:], rcond=None)[0]
    assert result.alpha == pytest.approx(coef[0], abs=1e-12)


def test_engle_granger_independent_walks_report_zero():
    rng = np.random.default_rng(2024)  # archived seed
    y = np.cumsum(rng.normal(0, 1.0, 36))
    x = np.cumsum(rng.normal(0, 1.0, 36))
    result = engle_granger_pair(y, x)
    assert not result.cointegrated
    assert result.reported == 0.0


def test_engle_granger_constant_series_reports_zero():
    y = np.full(20, 0.4)
    x = np.cumsum(np.ones(20))
    result = engle_granger_pair(y, x)
    assert result.reported == 0.0 and not result.cointegrated


def test_engle_granger_too_short_raises():
    with pytest.raises(InsufficientDataError):
        engle_granger_pair(np.arange(8.0), np.arange(8.0))


def share_series_from_pair(y, x):
    """Three dialects; A<->B shares carry the pair, C absorbs the rest."""
    n = len(y)
    months = tuple(month_range("2019-01", "2019-01")[0:1]) if n == 1 else \
        tuple(month_range("2019-01", f"{2019 + (n - 1) // 12}-{(n - 1) % 12 + 1:02d}"))
    shares = np.full((3, 3, n), np.nan)
    shares[0, 1], shares[0, 2] = y, 1 - y
    shares[1, 0], shares[1, 2] = x, 1 - x
    shares[2, 0], shares[2, 1] = 0.5 * np.ones(n), 0.5 * np.ones(n)
    return FPShareSeries(labels=("A", "B", "C"), months=months, shares=shares)


def test_vecm_over_share_series():
    y, x = simulate_cointegrated(seed=3)
    # squash into (0, 1) so the shares stay share-like
    y = 1 / (1 + np.exp(-0.2 * y))
    x = 1 / (1 + np.exp(-0.2 * x))
    shares = share_series_from_pair(y, x)
    result = vecm(shares)
    assert ("A", "B") in result.pairs
    matrix = result.matrix()
    assert matrix.shape == (3, 3)
    # constant-share pairs report 0
    assert result.pairs[("C", "A")].reported == 0.0


def test_vecm_short_series_raises():
    y = np.linspace(0.2, 0.8, 6)
    shares = share_series_from_pair(y, y)
    with pytest.raises(InsufficientDataError):
        vecm(shares)


def test_vecm_skips_sparse_pairs():
    y, x = simulate_cointegrated(seed=3)
    y = 1 / (1 + np.exp(-0.2 * y))
    x = 1 / (1 + np.exp(-0.2 * x))
    shares = share_series_from_pair(y, x)
    shares.shares[2, 0, :30] = np.nan  # C row mostly missing
    shares.shares[2, 1, :30] = np.nan
    result = vecm(shares)
    assert ("C", "A") in result.skipped
    assert result.skipped[("C", "A")] == 6


def test_adf_rejects_stationary_accepts_walk():
    rng = np.random.default_rng(11)
    stationary = rng.normal(0, 1.0, 60)
    walk = np.cumsum(rng.normal(0, 1.0, 60))
    assert adf_tstat(stationary) < -2.89
    assert adf_tstat(walk) > -2.89
