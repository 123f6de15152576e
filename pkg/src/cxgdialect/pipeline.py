"""End-to-end wiring of the pipeline stages.

The CLI subcommands, the test suite, and the demo scripts all run the
same functions, so a manifest fully determines every intermediate object
and re-runs are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import annotate as annotate_mod
from . import models as models_mod
from . import spatial as spatial_mod
from . import temporal as temporal_mod
from .annotate import (AnnotatedSample, DomainMap, Lexicon, LexiconTagger,
                       VectorTable, build_lexicon, build_ppmi_vectors,
                       induce_domains, load_vector_table)
from .corpus import (GeoDoc, Sample, Splits, aggregate, city_coordinates,
                     fix_distribution, split)
from .errors import ConfigurationError
from .induction import Grammar, InductionConfig, induce
from .manifest import RunManifest
from .months import month_range
from .parser import Matcher


@dataclass
class Inventories:
    lexicon: Lexicon
    tagger: LexiconTagger
    domains: DomainMap
    vectors: VectorTable


def build_splits(docs: list[GeoDoc], manifest: RunManifest) -> Splits:
    samples = aggregate(docs, target_words=manifest.target_words)
    plan = fix_distribution(samples, manifest.train_range)
    return split(samples, plan, manifest.train_range, manifest.test_range,
                 seed=manifest.seed)


def build_inventories(docs: list[GeoDoc], manifest: RunManifest) -> Inventories:
    """Lexicon over the whole corpus; vectors over the training period."""
    cfg = manifest.annotate_cfg
    lexicon = build_lexicon(docs, cap=int(cfg["lexicon_cap"]))
    if cfg.get("vector_table"):
        vectors = load_vector_table(manifest.base_dir / cfg["vector_table"])
    else:
        train_months = set(month_range(*manifest.train_range))
        train_docs = [d for d in docs if d.month in train_months]
        vectors = build_ppmi_vectors(train_docs or docs, lexicon,
                                     dim=int(cfg["vector_dim"]),
                                     window=int(cfg["window"]),
                                     seed=manifest.seed)
    n_domains = min(int(cfg["n_domains"]), len(lexicon.words))
    if n_domains < 1:
        raise ConfigurationError("empty lexicon; cannot build domains")
    domains = induce_domains(vectors, n_domains, seed=manifest.seed)
    return Inventories(lexicon=lexicon, tagger=LexiconTagger(),
                       domains=domains, vectors=vectors)


def annotate_samples(samples: list[Sample], inv: Inventories) -> list[AnnotatedSample]:
    return annotate_mod.annotate_all(samples, inv.lexicon, inv.tagger, inv.domains)


def induce_grammar(train_annotated: list[AnnotatedSample], inv: Inventories,
                   manifest: RunManifest, corpus_id: str = "") -> Grammar:
    cfg = manifest.induction_cfg
    config = InductionConfig(
        lexicon_size=len(inv.lexicon), domain_count=inv.domains.n_domains,
        theta=float(cfg["theta"]), max_slots=int(cfg["max_slots"]),
        beam_width=int(cfg["beam_width"]), seed=manifest.seed,
        corpus_id=corpus_id or manifest.hash()[:12])
    return induce(train_annotated, config)


@dataclass
class FeaturizedSplits:
    featurizer: str
    feature_ids: tuple[str, ...]
    train_x: np.ndarray
    train_y: list[str]
    train_samples: list[Sample]
    test: dict[str, tuple[np.ndarray, list[str], list[Sample]]]  # month -> (X, y, samples)


def featurize_splits(splits: Splits, manifest: RunManifest,
                     inv: Inventories | None = None,
                     grammar: Grammar | None = None) -> FeaturizedSplits:
    featurizer = manifest.models_cfg["featurizer"]
    if featurizer == "cxg":
        if grammar is None or inv is None:
            raise ConfigurationError("cxg featurizer needs a grammar and inventories")
        matcher = Matcher(grammar)

        def vectorize(samples):
            annotated = annotate_samples(samples, inv)
            return np.vstack([models_mod.featurize_cxg(grammar, a, matcher)
                              for a in annotated]) if samples else \
                np.zeros((0, len(grammar.constructions)))

        feature_ids = tuple(f"c{c.cid:05d}" for c in grammar.constructions)
    elif featurizer == "function":
        def vectorize(samples):
            return np.vstack([models_mod.featurize_function(s) for s in samples]) \
                if samples else np.zeros((0, len(models_mod.FUNCTION_WORDS)))

        feature_ids = models_mod.FUNCTION_WORDS
    elif featurizer == "tfidf":
        stats, train_x = models_mod.featurize_tfidf(splits.train)

        def vectorize(samples):
            return np.vstack([models_mod.tfidf_vector(stats, s) for s in samples]) \
                if samples else np.zeros((0, len(stats.vocabulary)))

        feature_ids = stats.vocabulary
    else:
        raise ConfigurationError(f"unknown featurizer {featurizer!r}")

    train_x = vectorize(splits.train)
    return FeaturizedSplits(
        featurizer=featurizer, feature_ids=feature_ids,
        train_x=train_x, train_y=[s.country for s in splits.train],
        train_samples=list(splits.train),
        test={month: (vectorize(samples), [s.country for s in samples], list(samples))
              for month, samples in splits.test.items()})


def train_model(feats: FeaturizedSplits, manifest: RunManifest):
    cfg = manifest.models_cfg
    tol = float(cfg.get("tol", 1e-6))
    max_epochs = int(cfg.get("max_epochs", 1000))
    if cfg.get("c") is not None:
        c = float(cfg["c"])
        model = models_mod.train(feats.train_x, feats.train_y, c=c,
                                 seed=manifest.seed, featurizer=feats.featurizer,
                                 feature_ids=feats.feature_ids, tol=tol,
                                 max_epochs=max_epochs)
        return model, c, [(c, float("nan"))]
    model, best_c, grid = models_mod.select_c(
        feats.train_x, feats.train_y, grid=tuple(cfg["c_grid"]),
        dev_fraction=float(cfg["dev_fraction"]), seed=manifest.seed,
        featurizer=feats.featurizer, feature_ids=feats.feature_ids,
        tol=tol, max_epochs=max_epochs)
    return model, best_c, grid


def majority_label(train_y) -> str:
    counts: dict[str, int] = {}
    for label in train_y:
        counts[label] = counts.get(label, 0) + 1
    return max(sorted(counts), key=lambda l: counts[l])


def temporal_series(model, feats: FeaturizedSplits) -> temporal_mod.EvaluationSeries:
    by_month = {month: (x, y) for month, (x, y, _) in feats.test.items()}
    return temporal_mod.build_series(model, by_month, majority_label(feats.train_y))


def spatial_fields(model, feats: FeaturizedSplits,
                   docs: list[GeoDoc]) -> dict[str, spatial_mod.SpatialField]:
    """Per-country fields of per-city accuracy over the whole test horizon."""
    coords = city_coordinates(docs)
    by_country: dict[str, list] = {}
    for city, (lat, lon, country) in coords.items():
        by_country.setdefault(country, []).append((city, lat, lon))
    fields = {country: spatial_mod.SpatialField.empty(country, cities)
              for country, cities in by_country.items()}
    predictions: dict[str, list] = {country: [] for country in fields}
    for month in sorted(feats.test):
        x, golds, samples = feats.test[month]
        if len(samples) == 0:
            continue
        preds = models_mod.predict_many(model, x)
        for pred, gold, sample in zip(preds, golds, samples):
            predictions[sample.country].append((sample.city_id, pred == gold))
    return {country: spatial_mod.city_rates(predictions[country], field)
            for country, field in fields.items()}


@dataclass
class PipelineResult:
    splits: Splits
    inventories: Inventories
    grammar: Grammar | None
    feats: FeaturizedSplits
    model: object
    best_c: float
    series: temporal_mod.EvaluationSeries
    fields: dict[str, spatial_mod.SpatialField]


def run_pipeline(docs: list[GeoDoc], manifest: RunManifest) -> PipelineResult:
    """Corpus to model to evaluation series and spatial fields, in one go."""
    splits = build_splits(docs, manifest)
    inv = build_inventories(docs, manifest)
    grammar = None
    if manifest.models_cfg["featurizer"] == "cxg":
        grammar = induce_grammar(annotate_samples(splits.train, inv), inv, manifest)
    feats = featurize_splits(splits, manifest, inv=inv, grammar=grammar)
    model, best_c, _ = train_model(feats, manifest)
    series = temporal_series(model, feats)
    fields = spatial_fields(model, feats, docs)
    return PipelineResult(splits=splits, inventories=inv, grammar=grammar,
                          feats=feats, model=model, best_c=best_c,
                          series=series, fields=fields)


def manifest_for_synth(config_raw: dict, base_dir) -> RunManifest:
    return RunManifest(raw=config_raw, base_dir=base_dir)
