"""Command-line pipeline: one subcommand per stage, one manifest per run.

Every subcommand reads the run manifest, writes its outputs under the
manifest's paths, and stamps each output with the manifest hash and
seed. Diagnostics go to stderr; data only ever goes to files. Exit
codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import models as models_mod
from . import spatial as spatial_mod
from . import synthgen
from . import temporal as temporal_mod
from .corpus import ingest, write_corpus
from .errors import PipelineError
from .induction import load_grammar, save_grammar, slots_to_strings
from .manifest import RunManifest
from .parser import count_many, write_feature_matrix
from .pipeline import (annotate_samples, build_inventories, build_splits,
                       featurize_splits, induce_grammar, run_pipeline,
                       spatial_fields, temporal_series, train_model)

SUBCOMMANDS = ("ingest", "annotate", "induce", "featurize", "train",
               "eval-temporal", "eval-spatial", "synth", "report")


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_csv(path: Path, manifest: RunManifest, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {manifest.header()}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def _write_json(path: Path, manifest: RunManifest, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    obj = {"provenance": {"manifest_sha256": manifest.hash(),
                          "seed": manifest.seed}, **obj}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _load_docs(manifest: RunManifest):
    result = ingest(manifest.path("corpus"), manifest)
    if result.n_rejected:
        _log(f"ingest: rejected {result.n_rejected} records "
             f"({dict(result.reject_reasons)})")
    return result


def cmd_synth(manifest: RunManifest) -> int:
    cfg_block = manifest.synth_cfg
    scenario = cfg_block.get("scenario", "two_dialect")
    options = dict(cfg_block.get("options", {}))
    builders = {"two_dialect": synthgen.two_dialect_config,
                "drift": synthgen.drift_config,
                "two_blob": synthgen.two_blob_config}
    if scenario not in builders:
        raise PipelineError(f"unknown synth scenario {scenario!r}")
    config = builders[scenario](seed=manifest.seed, **options)
    docs, truth = synthgen.generate(config)
    corpus_path = manifest.path("corpus")
    corpus_path.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(docs, corpus_path)
    synthgen.write_ground_truth(truth, corpus_path.with_suffix(".truth.json"))
    _log(f"synth: wrote {len(docs)} docs to {corpus_path}")
    return 0


def cmd_ingest(manifest: RunManifest) -> int:
    result = _load_docs(manifest)
    out = manifest.output_dir / "ingest_report.json"
    _write_json(out, manifest, {
        "n_docs": len(result.docs),
        "n_rejected": result.n_rejected,
        "reject_reasons": dict(sorted(result.reject_reasons.items())),
        "countries": sorted({d.country for d in result.docs}),
        "months": sorted({d.month for d in result.docs}),
    })
    _log(f"ingest: {len(result.docs)} docs ok -> {out}")
    return 0


def cmd_annotate(manifest: RunManifest) -> int:
    docs = _load_docs(manifest).docs
    inv = build_inventories(docs, manifest)
    out_dir = manifest.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "lexicon.json", manifest, {"lexicon": inv.lexicon.to_json()})
    _write_json(out_dir / "domains.json", manifest,
                {"domains": inv.domains.to_json(),
                 "n_domains": inv.domains.n_domains})
    from .annotate import save_vector_table
    save_vector_table(inv.vectors, out_dir / "vectors.txt")
    _log(f"annotate: lexicon {len(inv.lexicon)} words, "
         f"{inv.domains.n_domains} domains -> {out_dir}")
    return 0


def cmd_induce(manifest: RunManifest) -> int:
    docs = _load_docs(manifest).docs
    splits = build_splits(docs, manifest)
    inv = build_inventories(docs, manifest)
    grammar = induce_grammar(annotate_samples(splits.train, inv), inv, manifest)
    grammar_path = manifest.path("grammar")
    grammar_path.parent.mkdir(parents=True, exist_ok=True)
    save_grammar(grammar, grammar_path, lexicon=inv.lexicon)
    _log(f"induce: {len(grammar.constructions)} constructions -> {grammar_path}")
    for c in grammar.constructions[:10]:
        _log("  " + " -- ".join(slots_to_strings(c.slots, inv.lexicon)))
    return 0


def cmd_featurize(manifest: RunManifest) -> int:
    docs = _load_docs(manifest).docs
    splits = build_splits(docs, manifest)
    inv = build_inventories(docs, manifest)
    grammar = load_grammar(manifest.path("grammar"))
    samples = list(splits.train)
    for month in sorted(splits.test):
        samples.extend(splits.test[month])
    annotated = annotate_samples(samples, inv)
    features = count_many(grammar, annotated)
    out_dir = manifest.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    write_feature_matrix(features, out_dir / "features.csv",
                         out_dir / "features_meta.csv",
                         header=manifest.header())
    _log(f"featurize: {len(features)} samples x {len(grammar.constructions)} "
         f"constructions -> {out_dir}")
    return 0


def cmd_train(manifest: RunManifest) -> int:
    docs = _load_docs(manifest).docs
    splits = build_splits(docs, manifest)
    inv = build_inventories(docs, manifest)
    grammar = None
    if manifest.models_cfg["featurizer"] == "cxg":
        grammar_path = manifest.path("grammar")
        if grammar_path.exists():
            grammar = load_grammar(grammar_path)
        else:
            grammar = induce_grammar(annotate_samples(splits.train, inv), inv, manifest)
            save_grammar(grammar, grammar_path, lexicon=inv.lexicon)
    feats = featurize_splits(splits, manifest, inv=inv, grammar=grammar)
    model, best_c, grid = train_model(feats, manifest)
    model_path = manifest.path("model")
    model_path.parent.mkdir(parents=True, exist_ok=True)
    models_mod.save_model(model, model_path,
                          extra_provenance={"manifest_sha256": manifest.hash(),
                                            "seed": manifest.seed})
    _write_csv(manifest.output_dir / f"dev_selection_{model.featurizer}.csv",
               manifest, ("C", "dev_accuracy"),
               [(c, f"{acc:.6f}") for c, acc in grid])
    _log(f"train: featurizer={model.featurizer} C={best_c} -> {model_path}")
    return 0


def _featurized(manifest: RunManifest):
    docs = _load_docs(manifest).docs
    splits = build_splits(docs, manifest)
    inv = build_inventories(docs, manifest)
    grammar = None
    if manifest.models_cfg["featurizer"] == "cxg":
        grammar = load_grammar(manifest.path("grammar"))
    feats = featurize_splits(splits, manifest, inv=inv, grammar=grammar)
    model = models_mod.load_model(manifest.path("model"))
    if list(model.feature_ids) != list(feats.feature_ids):
        raise PipelineError("model feature ids do not match the featurizer output")
    return docs, feats, model


def cmd_eval_temporal(manifest: RunManifest) -> int:
    _, feats, model = _featurized(manifest)
    series = temporal_series(model, feats)
    tag = model.featurizer
    out = manifest.output_dir
    rows = []
    for month in series.months:
        ev = series.evals[month]
        rows.append((month, "__all__", "weighted_f1", f"{ev.weighted_f1:.6f}"))
        rows.append((month, "__baseline__", "weighted_f1", f"{ev.baseline_f1:.6f}"))
        for i, label in enumerate(series.labels):
            for metric in ("precision", "recall", "f1"):
                value = getattr(ev, metric)[i]
                rows.append((month, label, metric,
                             "" if np.isnan(value) else f"{value:.6f}"))
    _write_csv(out / f"monthly_metrics_{tag}.csv", manifest,
               ("month", "dialect", "metric", "value"), rows)

    try:
        fits = temporal_mod.decay_fit(series)
    except temporal_mod.InsufficientDataError as exc:
        fits = None
        _log(f"eval-temporal: decay regression skipped ({exc})")
    if fits is not None:
        try:
            contrast = temporal_mod.slope_contrast(series)
        except temporal_mod.InsufficientDataError as exc:
            contrast = None
            _log(f"eval-temporal: slope contrast skipped ({exc})")
        rows = []
        for (label, metric), fit in sorted(fits.fits.items()):
            cstat = contrast[metric][label] if contrast else None
            rows.append((label, metric, f"{fit.slope:.8f}", f"{fit.stderr:.8f}",
                         f"{fit.tstat:.4f}", f"{fit.pvalue:.6f}",
                         f"{cstat.pvalue_adjusted:.6f}" if cstat else "",
                         int(cstat.flagged) if cstat else ""))
        _write_csv(out / f"decay_{tag}.csv", manifest,
                   ("dialect", "metric", "slope", "stderr", "t", "p",
                    "contrast_p_adjusted", "deviates"), rows)

    shares = temporal_mod.fp_shares(series)
    rows = []
    for ti, month in enumerate(shares.months):
        confusion = series.evals[month].confusion
        for i, src in enumerate(shares.labels):
            for j, tgt in enumerate(shares.labels):
                if i == j:
                    continue
                share = shares.shares[i, j, ti]
                rows.append((month, src, tgt, int(confusion[i, j]),
                             "" if np.isnan(share) else f"{share:.6f}"))
    _write_csv(out / f"fp_shares_{tag}.csv", manifest,
               ("month", "source", "target", "count", "share"), rows)

    cfg = manifest.temporal_cfg
    try:
        vecm_result = temporal_mod.vecm(shares, lag=int(cfg["vecm_lag"]),
                                        min_months=int(cfg["vecm_min_months"]))
        matrix = vecm_result.matrix()
        rows = [(src,) + tuple(f"{matrix[i, j]:.4f}"
                               for j in range(len(shares.labels)))
                for i, src in enumerate(shares.labels)]
        _write_csv(out / f"vecm_{tag}.csv", manifest,
                   ("source",) + shares.labels, rows)
    except temporal_mod.InsufficientDataError as exc:
        _log(f"eval-temporal: vecm skipped ({exc})")
    _log(f"eval-temporal: {len(series.months)} months -> {out}")
    return 0


def cmd_eval_spatial(manifest: RunManifest) -> int:
    docs, feats, model = _featurized(manifest)
    fields = spatial_fields(model, feats, docs)
    cfg = manifest.spatial_cfg
    out = manifest.output_dir
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for country in sorted(fields):
        field = fields[country]
        try:
            result = spatial_mod.analyze_country(
                field, k=int(cfg["knn_k"]), n_perm=int(cfg["n_permutations"]),
                seed=manifest.seed)
        except PipelineError as exc:
            _log(f"eval-spatial: {country} skipped ({exc})")
            continue
        rows.append((country, result.n_cities, f"{result.morans_i:.4f}",
                     f"{result.expected:.4f}", f"{result.p_value:.4f}",
                     f"{result.mean_accuracy:.4f}", f"{result.min_accuracy:.4f}",
                     f"{result.max_accuracy:.4f}"))
        spatial_mod.export_geojson(
            field, result, out / f"map_{country}.geojson",
            provenance={"manifest_sha256": manifest.hash(), "seed": manifest.seed})
    tag = model.featurizer
    _write_csv(out / f"spatial_{tag}.csv", manifest,
               ("country", "n_cities", "morans_i", "expected_i", "p_value",
                "mean_accuracy", "min_accuracy", "max_accuracy"), rows)
    _log(f"eval-spatial: {len(rows)} countries -> {out}")
    return 0


REPORT_FAMILIES = {
    "f1_over_time": "monthly_metrics_*.csv",
    "decay": "decay_*.csv",
    "vecm": "vecm_*.csv",
    "spatial": "spatial_*.csv",
    "maps": "map_*.geojson",
}


def cmd_report(manifest: RunManifest) -> int:
    out = manifest.output_dir
    report_dir = out / "report"
    present: dict[str, list[Path]] = {}
    absent: list[str] = []
    for family, pattern in REPORT_FAMILIES.items():
        files = sorted(out.glob(pattern))
        if files:
            present[family] = files
        else:
            absent.append(family)
    if not present:
        _log("report: no evaluation outputs found in " + str(out))
        _log("  absent families: " + ", ".join(absent))
        return 1
    report_dir.mkdir(parents=True, exist_ok=True)
    for family, files in present.items():
        if family == "maps":
            for f in files:
                (report_dir / f.name).write_bytes(f.read_bytes())
            continue
        merged = report_dir / f"{family}.csv"
        with open(merged, "w", encoding="utf-8") as fh:
            fh.write(f"# {manifest.header()}\n")
            wrote_header = False
            for f in files:
                tag = f.stem.split("_")[-1]
                with open(f, encoding="utf-8") as src:
                    seen_header = False
                    for line in src:
                        if line.startswith("#") or not line.strip():
                            continue
                        if not seen_header:
                            seen_header = True
                            if not wrote_header:
                                fh.write("model," + line)
                                wrote_header = True
                            continue
                        fh.write(f"{tag},{line}")
    summary = {
        "present": {k: [f.name for f in v] for k, v in present.items()},
        "absent": absent,
    }
    _write_json(report_dir / "summary.json", manifest, summary)
    _log(f"report: {len(present)} families -> {report_dir}")
    return 0


def dispatch(argv) -> int:
    parser = argparse.ArgumentParser(
        prog="cxgdialect",
        description="Construction-grammar dialect models: induction, "
                    "classification, and stability analysis.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--manifest", required=True, help="run manifest JSON")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; the contract is 1
        return 0 if exc.code in (0, None) else 1
    try:
        manifest = RunManifest.from_file(args.manifest)
        handler = {
            "ingest": cmd_ingest, "annotate": cmd_annotate, "induce": cmd_induce,
            "featurize": cmd_featurize, "train": cmd_train,
            "eval-temporal": cmd_eval_temporal, "eval-spatial": cmd_eval_spatial,
            "synth": cmd_synth, "report": cmd_report,
        }[args.command]
        return handler(manifest)
    except PipelineError as exc:
        _log(f"error: {exc}")
        return 1
    except OSError as exc:
        _log(f"i/o error: {exc}")
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
