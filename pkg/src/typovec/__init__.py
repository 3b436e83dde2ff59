"""Per-language vector representations from multilingual LSTM models,
with binary typological feature prediction on top of them.

The package is organized as a numpy library:

- :mod:`typovec.corpus`: registry / parallel-corpus loading and preprocessing
- :mod:`typovec.bpe`: joint byte-pair encoding and the shared vocabulary
- :mod:`typovec.autograd`: dense float64 tensors with reverse-mode autodiff
- :mod:`typovec.optim`: Adam and gradient clipping
- :mod:`typovec.models` / :mod:`typovec.training`: LSTM language model and
  many-to-one translation model
- :mod:`typovec.vectors`: LMVec / MTVec / MTCell / MTBoth extraction
- :mod:`typovec.typology`: feature matrix, geodesic + genetic distances, k-NN
- :mod:`typovec.predict`: per-feature logistic regression, cross-validation,
  paired bootstrap, cell-trajectory export
- :mod:`typovec.synth`: synthetic mini-languages with known word order
- :mod:`typovec.cli`: pipeline orchestration
"""

__version__ = "0.1.0"

from .corpus import LanguageRecord, Registry, SentencePair, CorpusStore
from .vectors import LangVector

__all__ = [
    "__version__",
    "LanguageRecord",
    "Registry",
    "SentencePair",
    "CorpusStore",
    "LangVector",
]
