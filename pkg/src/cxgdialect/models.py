"""Dialect classifiers: construction, function-word, and tf-idf models.

All three are one-vs-rest linear-margin classifiers sharing one trainer.
The trained artifact is a dense weight matrix with one row per feature
and one column per dialect, plus per-dialect intercepts; reading it
row-wise gives the spatial variation of a single feature, column-wise a
description of a dialect.

Feature conventions (training inputs are expected pre-normalized):
construction and function-word features are relative frequencies (count
divided by sample token count); tf-idf vectors are L2-normalized.

The trainer minimizes J(w) = 0.5 ||w||^2 + C * mean_i hinge(w; x_i, y_i)
with the intercept as a regularized constant column. Using the mean
rather than the sum makes the optimum invariant to duplicating the
training set. Optimization is dual coordinate descent with seeded epoch
shuffles, so results are deterministic for a fixed seed.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, TrainingError
from .lexical_data import FUNCTION_WORDS
from .parser import Matcher, count


@dataclass
class DialectModel:
    weights: np.ndarray  # (n_features, n_dialects)
    intercepts: np.ndarray  # (n_dialects,)
    feature_ids: tuple[str, ...]
    labels: tuple[str, ...]
    featurizer: str  # cxg | function | tfidf
    provenance: dict = field(default_factory=dict)


def featurize_cxg(grammar, asample, matcher: Matcher | None = None) -> np.ndarray:
    """Construction relative frequencies: match counts per sample token."""
    fv = count(grammar, asample, matcher)
    n = max(len(asample), 1)
    return fv.counts.astype(float) / float(n)


def featurize_cxg_many(grammar, corpus) -> np.ndarray:
    matcher = Matcher(grammar)
    return np.vstack([featurize_cxg(grammar, a, matcher) for a in corpus]) \
        if corpus else np.zeros((0, len(grammar.constructions)))


def featurize_function(sample, stoplist=FUNCTION_WORDS) -> np.ndarray:
    """Relative frequency of each stoplist word in the sample."""
    n = max(len(sample.tokens), 1)
    counts = Counter(sample.tokens)
    return np.array([counts.get(w, 0) / n for w in stoplist], dtype=float)


@dataclass(frozen=True)
class TfidfStats:
    vocabulary: tuple[str, ...]
    df: np.ndarray
    n_docs: int
    stoplist: frozenset

    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.vocabulary)}


def featurize_tfidf(train_samples, stoplist=FUNCTION_WORDS) -> tuple[TfidfStats, np.ndarray]:
    """Fit df on the training samples and return their weighted vectors.

    weight(t, s) = tf(t, s) * ln((1 + N) / (1 + df(t))), L2-normalized per
    sample; stoplist terms never enter the vocabulary. Use tfidf_vector
    for test-time vectors so the training df is reused.
    """
    if not train_samples:
        raise TrainingError("tf-idf requires a non-empty training set")
    stop = frozenset(stoplist)
    df_counter: Counter = Counter()
    for s in train_samples:
        for term in set(s.tokens):
            if term not in stop:
                df_counter[term] += 1
    vocabulary = tuple(sorted(df_counter))
    stats = TfidfStats(
        vocabulary=vocabulary,
        df=np.array([df_counter[t] for t in vocabulary], dtype=float),
        n_docs=len(train_samples),
        stoplist=stop,
    )
    vectors = np.vstack([tfidf_vector(stats, s) for s in train_samples])
    return stats, vectors


def tfidf_vector(stats: TfidfStats, sample) -> np.ndarray:
    index = stats.index()
    vec = np.zeros(len(stats.vocabulary))
    counts = Counter(t for t in sample.tokens if t in index)
    idf = np.log((1.0 + stats.n_docs) / (1.0 + stats.df))
    for term, tf in counts.items():
        i = index[term]
        vec[i] = tf * idf[i]
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def svm_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, c: float) -> float:
    """Primal objective for one binary problem, intercept regularized."""
    margins = y * (x @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * (w @ w + b * b) + c * float(hinge.mean())


def _dual_cd_binary(x_aug: np.ndarray, y: np.ndarray, c: float, rng,
                    tol: float, max_epochs: int) -> np.ndarray:
    """Dual coordinate descent for the L1-hinge SVM on augmented features."""
    n = x_aug.shape[0]
    upper = c / n
    q_ii = np.einsum("ij,ij->i", x_aug, x_aug)
    alpha = np.zeros(n)
    w = np.zeros(x_aug.shape[1])
    for _ in range(max_epochs):
        max_pg = 0.0
        for i in rng.permutation(n):
            g = y[i] * (x_aug[i] @ w) - 1.0
            if alpha[i] <= 0.0:
                pg = min(g, 0.0)
            elif alpha[i] >= upper:
                pg = max(g, 0.0)
            else:
                pg = g
            max_pg = max(max_pg, abs(pg))
            if pg != 0.0 and q_ii[i] > 0.0:
                new_alpha = min(max(alpha[i] - g / q_ii[i], 0.0), upper)
                if new_alpha != alpha[i]:
                    w += (new_alpha - alpha[i]) * y[i] * x_aug[i]
                    alpha[i] = new_alpha
        if max_pg < tol:
            break
    return w


def train(x: np.ndarray, y, c: float = 1.0, seed: int = 0,
          featurizer: str = "cxg", feature_ids=None,
          tol: float = 1e-6, max_epochs: int = 1000) -> DialectModel:
    """Train one-vs-rest linear classifiers over pre-normalized features."""
    x = np.asarray(x, dtype=float)
    y = list(y)
    labels = tuple(sorted(set(y)))
    if len(labels) < 2:
        raise TrainingError(f"need at least 2 classes, got {labels}")
    if x.shape[0] != len(y):
        raise DimensionMismatchError(f"{x.shape[0]} rows vs {len(y)} labels")
    n, f = x.shape
    x_aug = np.hstack([x, np.ones((n, 1))])
    weights = np.zeros((f, len(labels)))
    intercepts = np.zeros(len(labels))
    for k, label in enumerate(labels):
        yk = np.where(np.array(y) == label, 1.0, -1.0)
        rng = np.random.default_rng([seed, k])
        w_aug = _dual_cd_binary(x_aug, yk, c, rng, tol, max_epochs)
        weights[:, k] = w_aug[:-1]
        intercepts[k] = w_aug[-1]
    if feature_ids is None:
        feature_ids = tuple(str(i) for i in range(f))
    return DialectModel(weights=weights, intercepts=intercepts,
                        feature_ids=tuple(feature_ids), labels=labels,
                        featurizer=featurizer,
                        provenance={"C": c, "seed": seed})


def decision_scores(model: DialectModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.weights.shape[0]:
        raise DimensionMismatchError(
            f"{x.shape[1]} features vs model with {model.weights.shape[0]}")
    return x @ model.weights + model.intercepts


def predict(model: DialectModel, x: np.ndarray) -> str:
    """Argmax dialect; ties resolve to the earlier label in label order."""
    scores = decision_scores(model, x)[0]
    return model.labels[int(np.argmax(scores))]


def predict_many(model: DialectModel, x: np.ndarray) -> list[str]:
    scores = decision_scores(model, x)
    return [model.labels[i] for i in np.argmax(scores, axis=1)]


@dataclass(frozen=True)
class TopFeatures:
    entries: tuple[tuple[str, float], ...]
    degenerate: bool  # no strictly positive weight in the column


def top_features(model: DialectModel, dialect: str, n: int) -> TopFeatures:
    """The n largest-weight features for one dialect's column.

    An all-nonpositive column is flagged degenerate and returned in
    feature-id order.
    """
    k = model.labels.index(dialect)
    column = model.weights[:, k]
    degenerate = not np.any(column > 0)
    if degenerate:
        order = range(min(n, len(column)))
    else:
        order = sorted(range(len(column)), key=lambda i: (-column[i], i))[:n]
    return TopFeatures(
        entries=tuple((model.feature_ids[i], float(column[i])) for i in order),
        degenerate=degenerate,
    )


def select_c(x: np.ndarray, y, grid=(0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0),
             dev_fraction: float = 0.2, seed: int = 0, featurizer: str = "cxg",
             feature_ids=None, tol: float = 1e-6, max_epochs: int = 1000):
    """Pick C by accuracy on a held-out development slice, then refit.

    The slice is a seeded stratified draw from the training set; ties in
    development accuracy go to the smaller C.
    """
    y = list(y)
    rng = np.random.default_rng([seed, 97])
    by_label: dict[str, list[int]] = {}
    for i, label in enumerate(y):
        by_label.setdefault(label, []).append(i)
    dev_idx: list[int] = []
    for label in sorted(by_label):
        idx = by_label[label]
        n_dev = max(1, int(round(dev_fraction * len(idx))))
        chosen = rng.choice(len(idx), size=min(n_dev, len(idx)), replace=False)
        dev_idx.extend(idx[i] for i in chosen)
    dev_set = set(dev_idx)
    fit_idx = [i for i in range(len(y)) if i not in dev_set]
    if not fit_idx or len({y[i] for i in fit_idx}) < 2:
        raise TrainingError("development split left fewer than 2 classes")
    x_fit, y_fit = x[fit_idx], [y[i] for i in fit_idx]
    x_dev, y_dev = x[sorted(dev_set)], [y[i] for i in sorted(dev_set)]
    results = []
    for c in sorted(grid):
        m = train(x_fit, y_fit, c=c, seed=seed, featurizer=featurizer,
                  tol=tol, max_epochs=max_epochs)
        acc = float(np.mean([p == g for p, g in zip(predict_many(m, x_dev), y_dev)]))
        results.append((c, acc))
    best_c = max(results, key=lambda r: (r[1], -r[0]))[0]
    model = train(x, y, c=best_c, seed=seed, featurizer=featurizer,
                  feature_ids=feature_ids, tol=tol, max_epochs=max_epochs)
    model.provenance["c_grid"] = results
    return model, best_c, results


def save_model(model: DialectModel, path, extra_provenance=None) -> None:
    """JSON header line, then the weight matrix row-major in decimal text."""
    header = {
        "labels": list(model.labels),
        "featurizer": model.featurizer,
        "feature_ids": list(model.feature_ids),
        "intercepts": [repr(float(b)) for b in model.intercepts],
        "provenance": {**model.provenance, **(extra_provenance or {})},
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in model.weights:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_model(path) -> DialectModel:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    weights = np.array(rows) if rows else np.zeros((0, len(header["labels"])))
    return DialectModel(
        weights=weights,
        intercepts=np.array([float(v) for v in header["intercepts"]]),
        feature_ids=tuple(header["feature_ids"]),
        labels=tuple(header["labels"]),
        featurizer=header["featurizer"],
        provenance=header.get("provenance", {}),
    )
