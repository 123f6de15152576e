"""Constraint inventories and per-token annotation.

Three inventories back the three constraint types: a frequency-ranked
lexicon (LEX), the closed 14-label POS inventory (SYN), and semantic
domains obtained by k-means over word vectors (SEM). Word vectors come
from a pluggable source: either a precomputed table in word2vec text
format or a desk-scale builder that computes PPMI co-occurrence vectors
(window 2) and truncates them with a power-iteration SVD.

Tokens outside the lexicon are marked OOV (-1) in both the word and the
domain layer; POS tags are always defined.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Sample
from .errors import ConfigurationError, TagsetViolationError
from .lexical_data import DEFAULT_TAG, TAG_LEXICON, TAG_TO_ID, TAGSET

OOV = -1


@dataclass(frozen=True)
class Lexicon:
    """Frequency-ranked word inventory, capped at construction time."""

    words: tuple[str, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.words)})

    def __len__(self):
        return len(self.words)

    def word_id(self, word: str) -> int:
        return self._index.get(word, OOV)

    def to_json(self) -> dict:
        return {"words": list(self.words), "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj) -> "Lexicon":
        return cls(words=tuple(obj["words"]), counts=tuple(obj["counts"]))


def build_lexicon(docs, cap: int) -> Lexicon:
    """Top-``cap`` words by frequency; ties break lexicographically."""
    counts: Counter = Counter()
    for doc in docs:
        for tok in doc.tokens:
            counts[tok.lower()] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:cap]
    return Lexicon(words=tuple(w for w, _ in ranked),
                   counts=tuple(c for _, c in ranked))


class LexiconTagger:
    """Lookup tagger over a fixed word -> tag table with a NOUN default."""

    def __init__(self, table=None, default: str = DEFAULT_TAG):
        self.table = TAG_LEXICON if table is None else table
        self.default = default

    def tag(self, tokens) -> list[str]:
        return [self.table.get(tok, self.default) for tok in tokens]


def tag_pos(tokens, tagger) -> list[str]:
    """Run a tagger adapter and enforce the closed tagset."""
    tags = tagger.tag(tokens)
    for tok, tag in zip(tokens, tags):
        if tag not in TAG_TO_ID:
            raise TagsetViolationError(
                f"tagger produced {tag!r} for {tok!r}, not in {TAGSET}")
    return tags


@dataclass(frozen=True)
class VectorTable:
    """Dense word vectors aligned with a word list."""

    words: tuple[str, ...]
    matrix: np.ndarray  # (len(words), dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def load_vector_table(path) -> VectorTable:
    """Read the word2vec-style text format: 'count dim' header, then rows."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ConfigurationError(f"bad vector table header in {path}")
        n, dim = int(header[0]), int(header[1])
        words: list[str] = []
        rows = np.empty((n, dim))
        for i in range(n):
            parts = fh.readline().split()
            if len(parts) != dim + 1:
                raise ConfigurationError(f"bad vector row {i} in {path}")
            words.append(parts[0])
            rows[i] = [float(x) for x in parts[1:]]
    return VectorTable(words=tuple(words), matrix=rows)


def save_vector_table(table: VectorTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.words)} {table.dim}\n")
        for word, row in zip(table.words, table.matrix):
            fh.write(word + " " + " ".join(f"{x:.8f}" for x in row) + "\n")


def build_ppmi_vectors(docs, lexicon: Lexicon, dim: int = 50, window: int = 2,
                       seed: int = 0, n_iter: int = 50) -> VectorTable:
    """Desk-scale vector source: PPMI co-occurrence + power-iteration SVD.

    Intended for lexicons up to a few thousand words; the production path
    is a precomputed table via load_vector_table. Lexicon words never seen
    in ``docs`` get zero vectors.
    """
    v = len(lexicon)
    if v == 0:
        raise ConfigurationError("empty lexicon")
    cooc = np.zeros((v, v))
    for doc in docs:
        ids = [lexicon.word_id(t) for t in doc.tokens]
        n = len(ids)
        for i, wi in enumerate(ids):
            if wi == OOV:
                continue
            for j in range(i + 1, min(i + window + 1, n)):
                wj = ids[j]
                if wj == OOV:
                    continue
                cooc[wi, wj] += 1.0
                cooc[wj, wi] += 1.0
    total = cooc.sum()
    if total == 0:
        return VectorTable(words=lexicon.words, matrix=np.zeros((v, min(dim, v))))
    row = cooc.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = np.outer(row, row) / total
        pmi = np.log(np.where(expected > 0, cooc * total / np.maximum(expected * total, 1e-300), 1.0))
    ppmi = np.maximum(pmi, 0.0)
    ppmi[cooc == 0] = 0.0
    k = min(dim, v)
    vecs = _truncated_symmetric_svd(ppmi, k, seed=seed, n_iter=n_iter)
    return VectorTable(words=lexicon.words, matrix=vecs)


def _truncated_symmetric_svd(mat: np.ndarray, k: int, seed: int, n_iter: int) -> np.ndarray:
    """Top-k factors of a symmetric nonneg matrix by subspace iteration.

    Returns U * sqrt(|lambda|) with a deterministic sign convention, so
    the result is reproducible for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((mat.shape[0], k)))
    for _ in range(n_iter):
        q, _ = np.linalg.qr(mat @ q)
    small = q.T @ mat @ q
    evals, evecs = np.linalg.eigh(small)
    order = np.argsort(-np.abs(evals))
    evals, evecs = evals[order], evecs[:, order]
    u = q @ evecs
    # fix sign: largest-magnitude component of each column is positive
    for col in range(u.shape[1]):
        pivot = np.argmax(np.abs(u[:, col]))
        if u[pivot, col] < 0:
            u[:, col] = -u[:, col]
    return u * np.sqrt(np.abs(evals))


@dataclass(frozen=True)
class DomainMap:
    """One semantic domain per lexicon word, plus k-means centroids."""

    word_to_domain: dict[str, int]
    centroids: np.ndarray
    objective_history: tuple[float, ...] = ()

    @property
    def n_domains(self) -> int:
        return int(self.centroids.shape[0])

    def domain_id(self, word: str) -> int:
        return self.word_to_domain.get(word, OOV)

    def to_json(self) -> dict:
        return {word: int(d) for word, d in sorted(self.word_to_domain.items())}

    @classmethod
    def from_json(cls, obj, centroids=None) -> "DomainMap":
        mapping = {w: int(d) for w, d in obj.items()}
        k = max(mapping.values()) + 1 if mapping else 0
        cents = np.zeros((k, 0)) if centroids is None else centroids
        return cls(word_to_domain=mapping, centroids=cents)


def induce_domains(vectors: VectorTable, n_domains: int, seed: int,
                   max_iter: int = 100, rel_tol: float = 1e-6) -> DomainMap:
    """Cluster word vectors into semantic domains with seeded k-means.

    k-means++ style seeding, Lloyd iterations capped at ``max_iter``, and
    a relative-objective stopping tolerance. Empty clusters are refilled
    with the point currently farthest from its centroid, so exactly
    ``n_domains`` domains come back. Deterministic for a fixed seed.
    """
    x = np.asarray(vectors.matrix, dtype=float)
    n = x.shape[0]
    if n_domains > n:
        raise ConfigurationError(f"{n_domains} domains requested for {n} words")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(x, n_domains, rng)
    history: list[float] = []
    assign = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = _sq_dists(x, centroids)
        assign = np.argmin(d2, axis=1)
        # refill empty clusters from the farthest-assigned points
        for k in range(n_domains):
            if not np.any(assign == k):
                cur = d2[np.arange(n), assign]
                far = int(np.argmax(cur))
                assign[far] = k
                d2[far, :] = np.inf
                d2[far, k] = 0.0
        obj = float(np.sum(_sq_dists(x, centroids)[np.arange(n), assign]))
        history.append(obj)
        new_centroids = np.vstack([x[assign == k].mean(axis=0) for k in range(n_domains)])
        if np.allclose(new_centroids, centroids):
            centroids = new_centroids
            break
        centroids = new_centroids
        if len(history) >= 2 and history[-2] > 0:
            if abs(history[-2] - history[-1]) / history[-2] < rel_tol:
                break
    d2 = _sq_dists(x, centroids)
    assign = np.argmin(d2, axis=1)
    history.append(float(np.sum(d2[np.arange(n), assign])))
    mapping = {w: int(a) for w, a in zip(vectors.words, assign)}
    return DomainMap(word_to_domain=mapping, centroids=centroids,
                     objective_history=tuple(history))


def _kmeans_pp_init(x: np.ndarray, k: int, rng) -> np.ndarray:
    n = x.shape[0]
    first = int(rng.integers(n))
    chosen = [first]
    d2 = np.sum((x - x[first]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with a centroid; pick unused index
            unused = [i for i in range(n) if i not in chosen]
            chosen.append(unused[0])
            continue
        probs = d2 / total
        nxt = int(rng.choice(n, p=probs))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1))
    return x[chosen].copy()


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return (np.sum(x * x, axis=1)[:, None]
            - 2.0 * x @ centroids.T
            + np.sum(centroids * centroids, axis=1)[None, :])


@dataclass(frozen=True)
class AnnotatedSample:
    """Parallel per-token layers over a sample: word id, POS id, domain id."""

    sample: Sample
    word_ids: tuple[int, ...]
    pos_ids: tuple[int, ...]
    domain_ids: tuple[int, ...]

    def __len__(self):
        return len(self.word_ids)


def annotate(sample: Sample, lexicon: Lexicon, tagger, domains: DomainMap) -> AnnotatedSample:
    """Produce the three aligned layers; OOV words get OOV domains too."""
    tags = tag_pos(sample.tokens, tagger)
    word_ids = []
    domain_ids = []
    for tok in sample.tokens:
        wid = lexicon.word_id(tok)
        word_ids.append(wid)
        domain_ids.append(domains.domain_id(tok) if wid != OOV else OOV)
    return AnnotatedSample(
        sample=sample,
        word_ids=tuple(word_ids),
        pos_ids=tuple(TAG_TO_ID[t] for t in tags),
        domain_ids=tuple(domain_ids),
    )


def annotate_all(samples, lexicon: Lexicon, tagger, domains: DomainMap) -> list[AnnotatedSample]:
    return [annotate(s, lexicon, tagger, domains) for s in samples]
