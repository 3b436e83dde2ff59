"""Per-language representation vectors extracted from trained models.

Methods:

- ``LMVec``: embedding row of the language token in the language model.
- ``MTVec``: embedding row of the language token in the translation model.
- ``MTCell``: flat mean of encoder cell states c over every time step of
  every selected sentence (language-token and EOS steps included by
  default).
- ``MTBoth``: concatenation [MTVec; MTCell].
- ``MTCellFinal`` / ``MTHiddenMean``: ablation variants (mean of final cell
  states, and mean of hidden states h over all steps).

Reductions use math.fsum per dimension (per sentence, then across
sentences), so results are exactly invariant under sentence permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import linkage as _scipy_linkage

from .bpe import EncodedCorpus, SubwordVocab
from .models import RnnLmModel, Seq2SeqModel, encode

METHODS = ("LMVec", "MTVec", "MTCell", "MTBoth", "MTCellFinal", "MTHiddenMean")


@dataclass
class LangVector:
    """One language's representation vector, tagged with how it was made."""

    lang: str
    method: str
    values: np.ndarray
    n_sentences: int = 0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError(f"{self.lang}/{self.method}: values must be 1-D")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.lang}/{self.method}: non-finite values")
        if self.method not in METHODS:
            raise ValueError(f"unknown extraction method {self.method!r}")

    @property
    def dim(self) -> int:
        return len(self.values)


def extract_lmvec(lm: RnnLmModel, vocab: SubwordVocab, lang: str) -> LangVector:
    """The embedding row learned for the language token in the LM."""
    row = lm.embedding.value[vocab.lang_id(lang)]
    return LangVector(lang, "LMVec", row.copy(), 0)


def extract_mtvec(nmt: Seq2SeqModel, vocab: SubwordVocab, lang: str) -> LangVector:
    """The embedding row learned for the language token in the NMT model."""
    row = nmt.embedding.value[vocab.lang_id(lang)]
    return LangVector(lang, "MTVec", row.copy(), 0)


def _select_sentences(encoded: EncodedCorpus, lang: str,
                      max_sentences: int | None, seed: int):
    sentences = encoded.by_lang.get(lang, [])
    if not sentences:
        raise ValueError(f"no sentences for language {lang!r}")
    if max_sentences is not None and 0 < max_sentences < len(sentences):
        rng = np.random.default_rng([seed, 3])
        keep = sorted(rng.choice(len(sentences), size=max_sentences, replace=False))
        sentences = [sentences[i] for i in keep]
    return sentences


def _fsum_rows(rows: list[np.ndarray]) -> np.ndarray:
    stacked = np.stack(rows)
    return np.array([math.fsum(stacked[:, j]) for j in range(stacked.shape[1])])


def extract_mtcell(nmt: Seq2SeqModel, encoded: EncodedCorpus, vocab: SubwordVocab,
                   lang: str, max_sentences: int | None = None, *,
                   include_special: bool = True, sentence_equal: bool = False,
                   seed: int = 0) -> LangVector:
    """Mean encoder cell state over all time steps of all selected sentences.

    ``include_special=False`` drops the language-token and EOS steps from
    the mean. ``sentence_equal=True`` weights sentences equally instead of
    tokens; the default is the flat token-equal mean. Subsampling under
    ``max_sentences`` is seeded and uniform.
    """
    sentences = _select_sentences(encoded, lang, max_sentences, seed)
    per_sentence_sums: list[np.ndarray] = []
    per_sentence_counts: list[int] = []
    for pair in sentences:
        states = encode(nmt, vocab, lang, pair.source_ids)
        cells = [c for _, c in states]
        if not include_special:
            cells = cells[1:-1]
        if not cells:
            continue
        per_sentence_sums.append(_fsum_rows(cells))
        per_sentence_counts.append(len(cells))
    if not per_sentence_sums:
        raise ValueError(f"no time steps selected for language {lang!r}")
    if sentence_equal:
        means = [s / n for s, n in zip(per_sentence_sums, per_sentence_counts)]
        values = _fsum_rows(means) / len(means)
    else:
        values = _fsum_rows(per_sentence_sums) / sum(per_sentence_counts)
    return LangVector(lang, "MTCell", values, len(sentences))


def extract_variant(nmt: Seq2SeqModel, encoded: EncodedCorpus, vocab: SubwordVocab,
                    lang: str, kind: str, max_sentences: int | None = None, *,
                    seed: int = 0) -> LangVector:
    """Ablation extractors: ``final-cell`` or ``mean-hidden``."""
    if kind not in ("final-cell", "mean-hidden"):
        raise ValueError(f"unknown variant kind {kind!r}")
    sentences = _select_sentences(encoded, lang, max_sentences, seed)
    if kind == "final-cell":
        finals = [encode(nmt, vocab, lang, p.source_ids)[-1][1] for p in sentences]
        values = _fsum_rows(finals) / len(finals)
        return LangVector(lang, "MTCellFinal", values, len(sentences))
    sums, counts = [], []
    for pair in sentences:
        states = encode(nmt, vocab, lang, pair.source_ids)
        hs = [h for h, _ in states]
        sums.append(_fsum_rows(hs))
        counts.append(len(hs))
    values = _fsum_rows(sums) / sum(counts)
    return LangVector(lang, "MTHiddenMean", values, len(sentences))


def combine_mtboth(v1: LangVector, v2: LangVector) -> LangVector:
    """[MTVec; MTCell] concatenation for one language."""
    if v1.lang != v2.lang:
        raise ValueError(f"language mismatch: {v1.lang!r} vs {v2.lang!r}")
    if v1.method != "MTVec" or v2.method != "MTCell":
        raise ValueError(f"expected (MTVec, MTCell), got ({v1.method}, {v2.method})")
    return LangVector(v1.lang, "MTBoth", np.concatenate([v1.values, v2.values]), v2.n_sentences)


@dataclass
class Dendrogram:
    """Agglomerative clustering result: scipy linkage matrix plus labels."""

    labels: list[str]
    merges: np.ndarray  # (n-1, 4) scipy linkage matrix

    @property
    def leaf_count(self) -> int:
        return len(self.labels)


def cluster_vectors(vectors: list[LangVector], linkage: str = "average") -> Dendrogram:
    """Hierarchical clustering of language vectors under cosine distance."""
    if len(vectors) < 2:
        raise ValueError("clustering needs at least 2 vectors")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"vectors have mixed dimensions {sorted(dims)}")
    data = np.stack([v.values for v in vectors])
    merges = _scipy_linkage(data, method=linkage, metric="cosine")
    return Dendrogram([v.lang for v in vectors], merges)


# --- vector store -----------------------------------------------------------

STORE_HEADER = "lang\tmethod\tdim\tn_sentences"


def save_vectors(path, vectors: list[LangVector]) -> None:
    """Write a vector store; float repr keeps full round-trip precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(STORE_HEADER + "\n")
        for v in vectors:
            values = " ".join(repr(float(x)) for x in v.values)
            fh.write(f"{v.lang}\t{v.method}\t{v.dim}\t{v.n_sentences}\t{values}\n")


def load_vectors(path) -> list[LangVector]:
    out: list[LangVector] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != STORE_HEADER:
            raise ValueError(f"{path}: bad vector store header {header!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 tab-separated fields")
            lang, method, dim_s, n_s, values_s = fields
            values = np.array([float(x) for x in values_s.split(" ")])
            if len(values) != int(dim_s):
                raise ValueError(f"{path}:{lineno}: dim {dim_s} but {len(values)} values")
            out.append(LangVector(lang, method, values, int(n_s)))
    return out
