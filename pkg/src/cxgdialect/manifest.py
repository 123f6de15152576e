"""Run manifest: one JSON document that configures every stage.

The manifest is hashed (canonical JSON, sha256) and the hash plus the
global seed are stamped into every output header so any artifact can be
traced back to its exact configuration.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError

_DEFAULTS = {
    "target_words": 500,
    "seed": 0,
    "annotate": {"lexicon_cap": 100000, "n_domains": 1000, "vector_dim": 50,
                 "window": 2, "vector_table": None},
    "induction": {"theta": 0.1, "max_slots": 5, "beam_width": 8},
    "models": {"featurizer": "cxg", "c_grid": [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0],
               "dev_fraction": 0.2},
    "temporal": {"vecm_lag": 1, "vecm_min_months": 12},
    "spatial": {"knn_k": 8, "n_permutations": 999},
    "synth": {"scenario": "two_dialect", "options": {}},
}


@dataclass
class RunManifest:
    raw: dict
    base_dir: Path

    @classmethod
    def from_file(cls, path) -> "RunManifest":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        manifest = cls(raw=raw, base_dir=path.parent)
        manifest.validate()
        return manifest

    def validate(self) -> None:
        for key in ("countries", "train_range", "test_range"):
            if key not in self.raw:
                raise ConfigurationError(f"manifest missing required key {key!r}")
        for key in ("train_range", "test_range"):
            rng = self.raw[key]
            if not (isinstance(rng, list) and len(rng) == 2):
                raise ConfigurationError(f"manifest {key} must be [start, end]")

    def hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def header(self) -> str:
        return f"manifest_sha256={self.hash()} seed={self.seed}"

    def _section(self, name: str) -> dict:
        merged = dict(_DEFAULTS.get(name, {}))
        merged.update(self.raw.get(name, {}))
        return merged

    # --- common fields ---------------------------------------------------
    @property
    def countries(self) -> list[str]:
        return list(self.raw["countries"])

    @property
    def train_range(self) -> tuple[str, str]:
        return tuple(self.raw["train_range"])

    @property
    def test_range(self) -> tuple[str, str]:
        return tuple(self.raw["test_range"])

    @property
    def date_range(self) -> tuple[str, str]:
        return (self.train_range[0], self.test_range[1])

    @property
    def target_words(self) -> int:
        return int(self.raw.get("target_words", _DEFAULTS["target_words"]))

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", _DEFAULTS["seed"]))

    # --- per-stage config blocks -----------------------------------------
    @property
    def annotate_cfg(self) -> dict:
        return self._section("annotate")

    @property
    def induction_cfg(self) -> dict:
        return self._section("induction")

    @property
    def models_cfg(self) -> dict:
        return self._section("models")

    @property
    def temporal_cfg(self) -> dict:
        return self._section("temporal")

    @property
    def spatial_cfg(self) -> dict:
        return self._section("spatial")

    @property
    def synth_cfg(self) -> dict:
        return self._section("synth")

    def path(self, name: str) -> Path:
        paths = self.raw.get("paths", {})
        if name not in paths:
            raise ConfigurationError(f"manifest paths block missing {name!r}")
        p = Path(paths[name])
        return p if p.is_absolute() else self.base_dir / p

    @property
    def output_dir(self) -> Path:
        return self.path("output_dir")
