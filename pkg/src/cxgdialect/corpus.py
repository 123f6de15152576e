"""Corpus ingestion, fixed-size sample aggregation, and temporal splits.

Raw documents arrive as JSON Lines (one object per line with text,
city_id, country, lat, lon, month, doc_id). They are grouped by city and
month and greedily concatenated into samples of at least ``target_words``
tokens; per-city quotas derived from a reference period keep the spatial
distribution of every test month identical to the training period.

All operations here are pure functions over immutable inputs.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EmptyCorpusError, EmptyPlanError
from .months import month_index, month_range, ranges_overlap
from .tokens import tokenize


@dataclass(frozen=True)
class GeoDoc:
    """One geo-referenced document, already tokenized."""

    doc_id: str
    city_id: str
    country: str
    month: str
    tokens: tuple[str, ...]
    lat: float = 0.0
    lon: float = 0.0


@dataclass(frozen=True)
class Sample:
    """Aggregated classification unit: all docs share city and month."""

    sample_id: str
    city_id: str
    country: str
    month: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class SamplingPlan:
    """Per-city monthly quota, fixed across the whole test horizon."""

    quota: dict[str, int]
    reference_months: tuple[str, ...]


@dataclass(frozen=True)
class Shortfall:
    city_id: str
    month: str
    available: int
    quota: int


@dataclass
class Splits:
    train: list[Sample]
    test: dict[str, list[Sample]]
    shortfalls: list[Shortfall] = field(default_factory=list)


@dataclass
class IngestResult:
    docs: list[GeoDoc]
    n_rejected: int
    reject_reasons: Counter


def ingest(path, manifest) -> IngestResult:
    """Read and validate a JSON-Lines corpus file.

    ``manifest`` must expose ``countries`` and the inclusive month range
    ``date_range``. Records failing validation are counted per reason and
    skipped; only a corpus with zero valid records is fatal.
    """
    countries = set(manifest.countries)
    lo = month_index(manifest.date_range[0])
    hi = month_index(manifest.date_range[1])
    docs: list[GeoDoc] = []
    reasons: Counter = Counter()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                reasons["bad-json"] += 1
                continue
            reason = _validate_record(rec, countries, lo, hi)
            if reason:
                reasons[reason] += 1
                continue
            docs.append(GeoDoc(
                doc_id=str(rec["doc_id"]),
                city_id=str(rec["city_id"]),
                country=str(rec["country"]),
                month=str(rec["month"]),
                tokens=tokenize(rec["text"]),
                lat=float(rec.get("lat", 0.0)),
                lon=float(rec.get("lon", 0.0)),
            ))
    if not docs:
        raise EmptyCorpusError(f"no valid records in {path} ({sum(reasons.values())} rejected)")
    return IngestResult(docs=docs, n_rejected=sum(reasons.values()), reject_reasons=reasons)


def _validate_record(rec, countries, lo, hi):
    for key in ("text", "city_id", "country", "month", "doc_id"):
        if key not in rec:
            return f"missing-{key}"
    if not str(rec["text"]).strip():
        return "empty-text"
    if rec["country"] not in countries:
        return "country-outside-manifest"
    try:
        idx = month_index(str(rec["month"]))
    except ConfigurationError:
        return "bad-month"
    if not lo <= idx <= hi:
        return "month-outside-range"
    return None


def aggregate(docs, target_words: int = 500) -> list[Sample]:
    """Greedily concatenate docs into samples of >= target_words tokens.

    Docs are grouped by (city, month) and consumed in doc_id order; a
    sample closes as soon as it reaches the target, and leftover tokens
    below the target at the end of a group are discarded so that every
    sample is month-pure.
    """
    if target_words < 1:
        raise ConfigurationError("target_words must be positive")
    groups: dict[tuple[str, str], list[GeoDoc]] = {}
    for doc in docs:
        groups.setdefault((doc.city_id, doc.month), []).append(doc)
    samples: list[Sample] = []
    for (city, month) in sorted(groups):
        group = sorted(groups[(city, month)], key=lambda d: d.doc_id)
        country = group[0].country
        buf: list[str] = []
        k = 0
        for doc in group:
            buf.extend(doc.tokens)
            if len(buf) >= target_words:
                samples.append(Sample(
                    sample_id=f"{city}:{month}:{k:04d}",
                    city_id=city, country=country, month=month,
                    tokens=tuple(buf),
                ))
                buf = []
                k += 1
    return samples


def fix_distribution(samples, reference: tuple[str, str]) -> SamplingPlan:
    """Derive per-city quotas from the reference period.

    A city's quota is its minimum monthly sample count across the
    reference months; cities missing from any reference month are
    excluded so every quota is feasible in a complete month.
    """
    ref_months = month_range(*reference)
    counts: dict[str, Counter] = {}
    for s in samples:
        if s.month in ref_months:
            counts.setdefault(s.city_id, Counter())[s.month] += 1
    quota = {}
    for city, per_month in counts.items():
        if all(per_month.get(m, 0) > 0 for m in ref_months):
            quota[city] = max(1, min(per_month[m] for m in ref_months))
    if not quota:
        raise EmptyPlanError("no city has samples in every reference month")
    return SamplingPlan(quota=quota, reference_months=tuple(ref_months))


def split(samples, plan: SamplingPlan, train_range: tuple[str, str],
          test_range: tuple[str, str], seed: int) -> Splits:
    """Select train samples and quota-exact monthly test sets.

    Test cells draw exactly ``quota`` samples per (city, month) by a
    seeded uniform draw without replacement; cells that cannot meet quota
    keep what they have and are flagged. Deterministic for a fixed seed
    regardless of input ordering.
    """
    if ranges_overlap(train_range, test_range):
        raise ConfigurationError(
            f"train range {train_range} overlaps test range {test_range}")
    train_months = set(month_range(*train_range))
    test_months = month_range(*test_range)
    train = sorted((s for s in samples if s.month in train_months),
                   key=lambda s: s.sample_id)
    by_cell: dict[tuple[str, str], list[Sample]] = {}
    for s in samples:
        if s.month in test_months:
            by_cell.setdefault((s.month, s.city_id), []).append(s)
    rng = np.random.default_rng(seed)
    test: dict[str, list[Sample]] = {m: [] for m in test_months}
    shortfalls: list[Shortfall] = []
    for month in test_months:
        for city in sorted(plan.quota):
            pool = sorted(by_cell.get((month, city), []), key=lambda s: s.sample_id)
            q = plan.quota[city]
            if len(pool) < q:
                shortfalls.append(Shortfall(city, month, len(pool), q))
                chosen = pool
            else:
                idx = rng.choice(len(pool), size=q, replace=False)
                chosen = [pool[i] for i in sorted(idx)]
            test[month].extend(chosen)
    return Splits(train=train, test=test, shortfalls=shortfalls)


def write_corpus(docs, path) -> None:
    """Serialize docs back to the JSON-Lines interchange format."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps({
                "text": " ".join(doc.tokens),
                "city_id": doc.city_id,
                "country": doc.country,
                "lat": doc.lat,
                "lon": doc.lon,
                "month": doc.month,
                "doc_id": doc.doc_id,
            }, sort_keys=True) + "\n")


def city_coordinates(docs) -> dict[str, tuple[float, float, str]]:
    """city_id -> (lat, lon, country), first doc wins."""
    coords: dict[str, tuple[float, float, str]] = {}
    for doc in docs:
        coords.setdefault(doc.city_id, (doc.lat, doc.lon, doc.country))
    return coords
