"""Synthetic geo-temporal corpora with known dialect signal.

Documents are sampled from a mixture of shared multi-token templates and
filler unigrams. A dialect is a set of per-template rate multipliers; a
multiplier's pull away from 1.0 is what distinguishes the dialect from
the shared baseline. Both the drift schedule and the per-city multiplier
act on that pull:

    effective_mult(t) = 1 + (mult(t) - 1) * city_mult * drift(month)

so drift -> 0 means the dialect converges to the shared baseline over
time (its distinctive usage fades) and a small city multiplier means a
city speaks a weaker version of its dialect. Scaling the pull rather
than the raw rate is what makes drift and heterogeneity visible to a
classifier: scaling every rate uniformly would leave the template mix,
and therefore the decision boundary, untouched.

True per-cell rates and realized counts are recorded next to the corpus
so downstream statistics can be checked against ground truth exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import GeoDoc
from .errors import ConfigurationError
from .months import add_months, month_range


@dataclass(frozen=True)
class Template:
    """A slot sequence; each slot lists its filler options."""

    name: str
    slots: tuple[tuple[str, ...], ...]

    def __len__(self):
        return len(self.slots)


@dataclass(frozen=True)
class CitySpec:
    city_id: str
    lat: float
    lon: float
    multiplier: float = 1.0


@dataclass(frozen=True)
class DialectProfile:
    label: str  # ISO-3166-style country code
    cities: tuple[CitySpec, ...]
    template_multipliers: dict = field(default_factory=dict)
    drift_schedule: tuple[float, ...] = ()

    def multiplier(self, template_name: str) -> float:
        return self.template_multipliers.get(template_name, 1.0)


def inject_drift(profile: DialectProfile, rate: float, start: int = 0) -> DialectProfile:
    """Replace the drift schedule with a geometric one.

    Month m (0-based) gets rate**(m - start + 1) once the drift has
    started, and 1.0 before; over a horizon of H months starting at 0 the
    terminal entry is rate**H.
    """
    if rate <= 0:
        raise ConfigurationError(f"drift rate must be positive, got {rate}")
    horizon = len(profile.drift_schedule)
    schedule = tuple(
        rate ** (m - start + 1) if m >= start else 1.0 for m in range(horizon))
    return replace(profile, drift_schedule=schedule)


@dataclass(frozen=True)
class GeneratorConfig:
    profiles: tuple[DialectProfile, ...]
    templates: tuple[Template, ...]
    base_rates: dict  # template name -> per-step emission probability
    start_month: str
    horizon: int
    docs_per_city_month: int
    tokens_per_doc: int
    filler_vocab: int = 100
    seed: int = 0

    def months(self) -> list[str]:
        return month_range(self.start_month, add_months(self.start_month, self.horizon - 1))


def _validate(config: GeneratorConfig) -> None:
    if len(config.profiles) < 2:
        raise ConfigurationError("need at least 2 dialect profiles")
    if config.horizon < 4:
        raise ConfigurationError("horizon must be >= 4 months")
    labels = [p.label for p in config.profiles]
    if len(set(labels)) != len(labels):
        raise ConfigurationError("duplicate dialect labels")
    max_total = 0.0
    for profile in config.profiles:
        if len(profile.drift_schedule) not in (0, config.horizon):
            raise ConfigurationError(
                f"{profile.label}: drift schedule length "
                f"{len(profile.drift_schedule)} != horizon {config.horizon}")
        for name, mult in profile.template_multipliers.items():
            if mult <= 0:
                raise ConfigurationError(f"{profile.label}: multiplier {mult} for {name}")
        for city in profile.cities:
            if city.multiplier <= 0:
                raise ConfigurationError(f"{city.city_id}: city multiplier must be > 0")
        worst = sum(
            config.base_rates.get(t.name, 0.0)
            * max(1.0, 1.0 + (profile.multiplier(t.name) - 1.0)
                  * max((c.multiplier for c in profile.cities), default=1.0))
            for t in config.templates)
        max_total = max(max_total, worst)
    if max_total >= 0.9:
        raise ConfigurationError(
            f"total template emission probability {max_total:.3f} too close to 1")


def _cell_rates(config: GeneratorConfig, profile: DialectProfile,
                city: CitySpec, month_idx: int) -> dict:
    drift = profile.drift_schedule[month_idx] if profile.drift_schedule else 1.0
    rates = {}
    for template in config.templates:
        pull = (profile.multiplier(template.name) - 1.0) * city.multiplier * drift
        rates[template.name] = config.base_rates.get(template.name, 0.0) * (1.0 + pull)
    return rates


@dataclass
class GroundTruth:
    """True emission rates and realized counts per (dialect, city, month)."""

    cells: dict  # "label|city|month" -> {"rates", "counts", "decisions"}
    seed: int

    def to_json(self) -> dict:
        return {"seed": self.seed, "cells": self.cells}


def generate(config: GeneratorConfig) -> tuple[list[GeoDoc], GroundTruth]:
    """Sample the corpus; byte-identical for a fixed seed.

    Every (dialect, city, month) cell draws from its own seed-sequence
    child keyed by cell indices, so cells are independent of generation
    order.
    """
    _validate(config)
    months = config.months()
    templates = {t.name: t for t in config.templates}
    names = [t.name for t in config.templates]
    docs: list[GeoDoc] = []
    cells: dict = {}
    for di, profile in enumerate(config.profiles):
        for ci, city in enumerate(profile.cities):
            for mi, month in enumerate(months):
                rng = np.random.default_rng(
                    np.random.SeedSequence(config.seed, spawn_key=(di, ci, mi)))
                rates = _cell_rates(config, profile, city, mi)
                probs = np.array([rates[name] for name in names])
                cum = np.cumsum(probs)
                counts = {name: 0 for name in names}
                decisions = 0
                for k in range(config.docs_per_city_month):
                    tokens: list[str] = []
                    while len(tokens) < config.tokens_per_doc:
                        u = rng.random()
                        decisions += 1
                        idx = int(np.searchsorted(cum, u, side="right"))
                        if idx < len(names):
                            template = templates[names[idx]]
                            counts[names[idx]] += 1
                            for options in template.slots:
                                tokens.append(options[int(rng.integers(len(options)))]
                                              if len(options) > 1 else options[0])
                        else:
                            tokens.append(f"w{int(rng.integers(config.filler_vocab)):03d}")
                    docs.append(GeoDoc(
                        doc_id=f"{profile.label}-{city.city_id}-{month}-{k:04d}",
                        city_id=city.city_id, country=profile.label,
                        month=month, tokens=tuple(tokens),
                        lat=city.lat, lon=city.lon))
                cells[f"{profile.label}|{city.city_id}|{month}"] = {
                    "rates": {n: rates[n] for n in names},
                    "counts": counts,
                    "decisions": decisions,
                }
    return docs, GroundTruth(cells=cells, seed=config.seed)


def write_ground_truth(truth: GroundTruth, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(truth.to_json(), fh, sort_keys=True, indent=1)
        fh.write("\n")


# ----------------------------------------------------------------------
# Stock scenarios. These are the corpora the test suite and the demo
# scripts run on; templates reuse real function words so the fallback
# tagger produces informative SYN layers.

DEFAULT_TEMPLATES: tuple[Template, ...] = (
    Template("expletive", (("it",), ("was", "is", "can"), ("shut", "set", "go"))),
    Template("ability", (("ability",), ("to",), ("focus", "live", "wait"))),
    Template("copula", (("bike", "movie", "birthday"), ("was",),
                        ("awesome", "great", "better"), ("but", "and"))),
    Template("poss", (("ur",), ("new", "own", "mad"), ("journey", "money", "tunes"))),
)


def _grid_cities(prefix: str, n: int, lat0: float, lon0: float,
                 spacing: float = 1.0, multiplier: float = 1.0) -> tuple[CitySpec, ...]:
    cols = max(1, int(round(n ** 0.5)))
    return tuple(
        CitySpec(city_id=f"{prefix}{i:02d}", lat=lat0 + spacing * (i // cols),
                 lon=lon0 + spacing * (i % cols), multiplier=multiplier)
        for i in range(n))


def two_dialect_config(seed: int = 0, docs_per_city_month: int = 40,
                       tokens_per_doc: int = 40, horizon: int = 8,
                       shift: float = 2.0, n_cities: int = 2) -> GeneratorConfig:
    """Two dialects differing only in one template's rate (shift x vs 1x)."""
    profiles = (
        DialectProfile(label="AA", cities=_grid_cities("a", n_cities, -37.0, 174.0),
                       template_multipliers={"expletive": shift}),
        DialectProfile(label="BB", cities=_grid_cities("b", n_cities, 51.0, 0.0),
                       template_multipliers={}),
    )
    return GeneratorConfig(
        profiles=profiles, templates=DEFAULT_TEMPLATES,
        base_rates={"expletive": 0.05, "ability": 0.04, "copula": 0.03, "poss": 0.04},
        start_month="2018-07", horizon=horizon,
        docs_per_city_month=docs_per_city_month, tokens_per_doc=tokens_per_doc,
        filler_vocab=80, seed=seed)


def drift_config(seed: int = 0, drift_rate: float | None = 0.97,
                 drifted: str = "CC", horizon: int = 42,
                 drift_start: int = 6, docs_per_city_month: int = 30,
                 tokens_per_doc: int = 30) -> GeneratorConfig:
    """Four dialects, each over-using its own template; one may drift.

    With the default horizon the first 6 months are the training period
    and the remaining 36 the test horizon, mirroring the headline
    decay-rate scenario.
    """
    assignments = {"AA": "expletive", "BB": "ability", "CC": "copula", "DD": "poss"}
    anchors = {"AA": (-37.0, 174.0), "BB": (51.0, 0.0), "CC": (43.0, -79.0), "DD": (28.0, 77.0)}
    profiles = []
    for label, template in assignments.items():
        profile = DialectProfile(
            label=label,
            cities=_grid_cities(label.lower(), 3, *anchors[label]),
            template_multipliers={template: 3.0},
            drift_schedule=(1.0,) * horizon)
        if drift_rate is not None and label == drifted:
            profile = inject_drift(profile, drift_rate, start=drift_start)
        profiles.append(profile)
    return GeneratorConfig(
        profiles=tuple(profiles), templates=DEFAULT_TEMPLATES,
        base_rates={"expletive": 0.04, "ability": 0.04, "copula": 0.04, "poss": 0.04},
        start_month="2018-07", horizon=horizon,
        docs_per_city_month=docs_per_city_month, tokens_per_doc=tokens_per_doc,
        filler_vocab=80, seed=seed)


def two_blob_config(seed: int = 0, weak: float = 0.1, n_per_blob: int = 12,
                    docs_per_city_month: int = 36, tokens_per_doc: int = 30,
                    horizon: int = 10) -> GeneratorConfig:
    """Spatial heterogeneity: dialect AA has a strong and a weak city blob.

    Weak-blob cities speak a nearly neutral variety, so downstream
    classification accuracy is spatially clustered inside AA.
    """
    strong = _grid_cities("n", n_per_blob, -35.0, 174.0, spacing=0.5, multiplier=1.0)
    weak_blob = _grid_cities("s", n_per_blob, -45.0, 168.0, spacing=0.5, multiplier=weak)
    profiles = (
        DialectProfile(label="AA", cities=strong + weak_blob,
                       template_multipliers={"expletive": 3.0}),
        # same city count on the other side so neither class dominates
        DialectProfile(label="BB", cities=_grid_cities("b", 2 * n_per_blob, 51.0, 0.0),
                       template_multipliers={"ability": 3.0}),
    )
    return GeneratorConfig(
        profiles=profiles, templates=DEFAULT_TEMPLATES,
        base_rates={"expletive": 0.05, "ability": 0.05, "copula": 0.03, "poss": 0.03},
        start_month="2018-07", horizon=horizon,
        docs_per_city_month=docs_per_city_month, tokens_per_doc=tokens_per_doc,
        filler_vocab=80, seed=seed)
