"""Spatial structure of per-city classification accuracy.

Per-city success rates are standardized with the Empirical Bayes rate
adjustment (so sparsely sampled cities do not masquerade as outliers),
then tested for global spatial autocorrelation with Moran's I over a
row-standardized k-nearest-neighbour weight matrix on haversine
distances. Significance comes from a seeded permutation test, one-sided
for positive autocorrelation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigurationError, DegenerateFieldError,
                     UndefinedStatisticError, UnknownCityError)

EARTH_RADIUS_KM = 6371.0
VARIANCE_FLOOR = 1e-12


@dataclass
class SpatialField:
    """Per-city coordinates with trial and success counts."""

    country: str
    city_ids: tuple[str, ...]
    lats: np.ndarray
    lons: np.ndarray
    trials: np.ndarray  # n_i
    successes: np.ndarray  # o_i

    @classmethod
    def empty(cls, country: str, cities) -> "SpatialField":
        """cities: iterable of (city_id, lat, lon)."""
        cities = sorted(cities)
        return cls(
            country=country,
            city_ids=tuple(c[0] for c in cities),
            lats=np.array([c[1] for c in cities], dtype=float),
            lons=np.array([c[2] for c in cities], dtype=float),
            trials=np.zeros(len(cities), dtype=int),
            successes=np.zeros(len(cities), dtype=int),
        )

    def rates(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.trials > 0, self.successes / self.trials, np.nan)

    def active(self) -> tuple["SpatialField", tuple[str, ...]]:
        """Drop zero-trial cities; returns (field, dropped city ids)."""
        keep = self.trials > 0
        dropped = tuple(c for c, k in zip(self.city_ids, keep) if not k)
        sub = SpatialField(
            country=self.country,
            city_ids=tuple(c for c, k in zip(self.city_ids, keep) if k),
            lats=self.lats[keep], lons=self.lons[keep],
            trials=self.trials[keep], successes=self.successes[keep],
        )
        return sub, dropped


def city_rates(predictions, field: SpatialField) -> SpatialField:
    """Accumulate (city_id, correct) prediction outcomes into the field."""
    index = {c: i for i, c in enumerate(field.city_ids)}
    trials = field.trials.copy()
    successes = field.successes.copy()
    for city_id, correct in predictions:
        if city_id not in index:
            raise UnknownCityError(f"prediction for unknown city {city_id!r}")
        i = index[city_id]
        trials[i] += 1
        if correct:
            successes[i] += 1
    return SpatialField(country=field.country, city_ids=field.city_ids,
                        lats=field.lats, lons=field.lons,
                        trials=trials, successes=successes)


def haversine_km(lat1, lon1, lat2, lon2) -> float:
    """Great-circle distance in km on a sphere of radius 6371 km."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


@dataclass
class WeightMatrix:
    matrix: np.ndarray  # row-standardized, zero diagonal
    rule: str


def knn_weights(lats, lons, k: int = 8) -> WeightMatrix:
    """Symmetrized haversine k-nearest-neighbour weights, row-standardized.

    The neighbour relation is the union of both directions, so it is
    symmetric before standardization; ties in distance break on city
    index for determinism.
    """
    lats = np.asarray(lats, dtype=float)
    lons = np.asarray(lons, dtype=float)
    n = len(lats)
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    if k >= n:
        raise ConfigurationError(f"k = {k} needs at least {k + 1} cities, got {n}")
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = haversine_km(lats[i], lons[i], lats[j], lons[j])
            dist[i, j] = dist[j, i] = d
    adjacency = np.zeros((n, n), dtype=bool)
    for i in range(n):
        order = np.argsort(dist[i], kind="stable")
        neighbours = [j for j in order if j != i][:k]
        adjacency[i, neighbours] = True
    adjacency |= adjacency.T
    np.fill_diagonal(adjacency, False)
    w = adjacency.astype(float)
    row_sums = w.sum(axis=1, keepdims=True)
    w = np.divide(w, row_sums, out=np.zeros_like(w), where=row_sums > 0)
    return WeightMatrix(matrix=w, rule=f"knn k={k} haversine union-symmetrized")


def eb_standardize(field: SpatialField) -> np.ndarray:
    """Empirical Bayes rate standardization of per-city success rates.

    b is the pooled rate; the between-city variance component
    a = s^2 - b / mean(n) can go negative for tight fields, so the
    per-city variance a + b / n_i is floored at 1e-12.
    """
    n = field.trials.astype(float)
    o = field.successes.astype(float)
    if n.sum() <= 0:
        raise DegenerateFieldError("spatial field has no trials")
    if np.any(n <= 0):
        raise DegenerateFieldError("zero-trial city in field; filter with active()")
    r = o / n
    b = o.sum() / n.sum()
    s2 = float(np.sum(n * (r - b) ** 2) / n.sum())
    a = s2 - b / (n.sum() / len(n))
    v = np.maximum(a + b / n, VARIANCE_FLOOR)
    return (r - b) / np.sqrt(v)


def morans_i(z, weights: WeightMatrix) -> float:
    """Global Moran's I of the (already standardized) values."""
    z = np.asarray(z, dtype=float)
    w = weights.matrix
    if len(z) != w.shape[0]:
        raise ConfigurationError(f"{len(z)} values vs {w.shape[0]}x{w.shape[0]} weights")
    if np.allclose(z, z[0]):
        raise UndefinedStatisticError("all values equal; Moran's I undefined")
    s0 = w.sum()
    return float(len(z) / s0 * (z @ w @ z) / (z @ z))


def expected_i(n: int) -> float:
    return -1.0 / (n - 1)


def permutation_test(z, weights: WeightMatrix, n_perm: int = 999, seed: int = 0) -> float:
    """One-sided permutation p-value for positive autocorrelation.

    p = (1 + #{I_perm >= I_obs}) / (n_perm + 1). Each permutation draws
    from its own seed-sequence child stream, so the result is identical
    regardless of evaluation order.
    """
    z = np.asarray(z, dtype=float)
    observed = morans_i(z, weights)
    children = np.random.SeedSequence(seed).spawn(n_perm)
    exceed = 0
    for child in children:
        rng = np.random.default_rng(child)
        if morans_i(z[rng.permutation(len(z))], weights) >= observed:
            exceed += 1
    return (1 + exceed) / (n_perm + 1)


@dataclass
class MoranResult:
    country: str
    n_cities: int
    morans_i: float
    expected: float
    p_value: float
    mean_accuracy: float
    min_accuracy: float
    max_accuracy: float
    dropped_cities: tuple[str, ...] = ()
    weight_rule: str = ""


def analyze_country(field: SpatialField, k: int = 8, n_perm: int = 999,
                    seed: int = 0) -> MoranResult:
    """Full per-country analysis: EB z-values, kNN weights, Moran's I, p."""
    active, dropped = field.active()
    if len(active.city_ids) < 2:
        raise DegenerateFieldError(
            f"{field.country}: need >= 2 active cities, got {len(active.city_ids)}")
    z = eb_standardize(active)
    weights = knn_weights(active.lats, active.lons, k=min(k, len(active.city_ids) - 1))
    rates = active.rates()
    return MoranResult(
        country=field.country,
        n_cities=len(active.city_ids),
        morans_i=morans_i(z, weights),
        expected=expected_i(len(z)),
        p_value=permutation_test(z, weights, n_perm=n_perm, seed=seed),
        mean_accuracy=float(rates.mean()),
        min_accuracy=float(rates.min()),
        max_accuracy=float(rates.max()),
        dropped_cities=dropped,
        weight_rule=weights.rule,
    )


def export_geojson(field: SpatialField, result: MoranResult | None, path,
                   provenance: dict | None = None) -> None:
    """Point FeatureCollection: one feature per city, summary on top.

    Rates are encoded to 4 decimal places; zero-trial cities are skipped
    (they are listed in the summary's dropped_cities instead).
    """
    active, dropped = field.active()
    z = eb_standardize(active) if len(active.city_ids) >= 1 else np.array([])
    rates = active.rates()
    features = []
    for i, city in enumerate(active.city_ids):
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point",
                         "coordinates": [float(active.lons[i]), float(active.lats[i])]},
            "properties": {
                "city_id": city,
                "rate": round(float(rates[i]), 4),
                "n": int(active.trials[i]),
                "z": round(float(z[i]), 6),
            },
        })
    summary: dict = {"country": field.country, "dropped_cities": list(dropped)}
    if result is not None:
        summary.update({
            "morans_i": round(result.morans_i, 6),
            "expected_i": round(result.expected, 6),
            "p_value": round(result.p_value, 6),
            "mean_accuracy": round(result.mean_accuracy, 4),
            "min_accuracy": round(result.min_accuracy, 4),
            "max_accuracy": round(result.max_accuracy, 4),
        })
    if provenance:
        summary["provenance"] = provenance
    obj = {"type": "FeatureCollection", "properties": summary, "features": features}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")
