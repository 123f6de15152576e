"""Construction-grammar dialect models with stability analysis.

The pipeline: ingest geo-referenced text into fixed-size samples
(corpus), annotate tokens with word/POS/domain layers (annotate), induce
a construction grammar by delta-P association and MDL selection
(induction), featurize samples by construction counts (parser), train
linear dialect classifiers (models), and measure stability over time
(temporal) and space (spatial). synthgen builds corpora with known
ground truth for validating every statistic; cli wires the stages into
subcommands driven by a single run manifest.
"""

from . import (annotate, corpus, induction, manifest, models, months,
               parser, pipeline, spatial, synthgen, temporal)
from .errors import PipelineError

__version__ = "0.1.0"

__all__ = [
    "annotate", "corpus", "induction", "manifest", "models", "months",
    "parser", "pipeline", "spatial", "synthgen", "temporal",
    "PipelineError", "__version__",
]
