"""Joint byte-pair encoding over all languages plus the shared vocabulary.

One BPE model is learned over the union of every language's source text and
the English target text, so a single merge table and a single vocabulary are
shared by all models.

Conventions:

- Each word is split into characters and the end-of-word marker ``⟨/w⟩`` is
  appended to the final character.
- Pair counting and pair matching ignore the marker on the right symbol, so
  a merge ``(a, b)`` applies to both ``a b`` and ``a b⟨/w⟩``. The merged
  symbol keeps the marker. Merge tables therefore store unmarked pairs.
- Equal-frequency pairs are broken lexicographically by ``(left, right)``,
  which makes learning a pure function of (corpus, num_merges).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .corpus import CorpusStore, Registry

END_OF_WORD = "⟨/w⟩"

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
RESERVED = (PAD, BOS, EOS, UNK)
PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3


def _strip_marker(symbol: str) -> str:
    return symbol.removesuffix(END_OF_WORD)


def word_to_symbols(word: str) -> list[str]:
    """Character split with the marker attached to the final character."""
    chars = list(word)
    chars[-1] = chars[-1] + END_OF_WORD
    return chars


def _adjacent_pairs(symbols: list[str]) -> list[tuple[str, str]]:
    return [(symbols[i], _strip_marker(symbols[i + 1])) for i in range(len(symbols) - 1)]


def _merge_once(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    """Single left-to-right pass merging non-overlapping occurrences of ``pair``."""
    left, right = pair
    out: list[str] = []
    i = 0
    while i < len(symbols):
        if (
            i + 1 < len(symbols)
            and symbols[i] == left
            and _strip_marker(symbols[i + 1]) == right
        ):
            marked = symbols[i + 1].endswith(END_OF_WORD)
            out.append(left + right + (END_OF_WORD if marked else ""))
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


@dataclass
class MergeTable:
    """Ordered BPE merges; position in the list is the rank."""

    pairs: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("merge table contains duplicate pairs")
        self._ranks = {pair: rank for rank, pair in enumerate(self.pairs)}

    def append(self, pair: tuple[str, str]) -> None:
        if pair in self._ranks:
            raise ValueError(f"duplicate merge pair {pair!r}")
        self._ranks[pair] = len(self.pairs)
        self.pairs.append(pair)

    def rank(self, pair: tuple[str, str]) -> int | None:
        return self._ranks.get(pair)

    def __len__(self) -> int:
        return len(self.pairs)


def corpus_word_frequencies(corpus: CorpusStore) -> Counter:
    freqs: Counter = Counter()
    for pair in corpus.ordered:
        freqs.update(pair.source)
        freqs.update(pair.target)
    return freqs


def learn_bpe(corpus: CorpusStore, num_merges: int) -> MergeTable:
    """Greedy BPE learning over the word-frequency-weighted joint vocabulary.

    At each step the most frequent adjacent symbol pair is merged; learning
    stops early once no pair occurs at least twice. Overlapping occurrences
    within a word are all counted.
    """
    if num_merges <= 0:
        raise ValueError(f"num_merges must be positive, got {num_merges}")
    if isinstance(corpus, CorpusStore):
        word_freqs = corpus_word_frequencies(corpus)
    else:
        word_freqs = Counter(dict(corpus))
    if not word_freqs:
        raise ValueError("corpus is empty")

    words: dict[str, list[str]] = {w: word_to_symbols(w) for w in sorted(word_freqs)}
    counts: Counter = Counter()
    where: dict[tuple[str, str], set[str]] = {}
    for word, symbols in words.items():
        freq = word_freqs[word]
        for pair in _adjacent_pairs(symbols):
            counts[pair] += freq
            where.setdefault(pair, set()).add(word)

    table = MergeTable()
    for _ in range(num_merges):
        if not counts:
            break
        best_count = max(counts.values())
        if best_count < 2:
            break
        best = min(pair for pair, c in counts.items() if c == best_count)
        table.append(best)

        for word in sorted(where.get(best, ())):
            freq = word_freqs[word]
            symbols = words[word]
            for pair in _adjacent_pairs(symbols):
                counts[pair] -= freq
                if counts[pair] <= 0:
                    del counts[pair]
                where[pair].discard(word)
            symbols = _merge_once(symbols, best)
            words[word] = symbols
            for pair in _adjacent_pairs(symbols):
                counts[pair] += freq
                where.setdefault(pair, set()).add(word)
    return table


def apply_word(word: str, merges: MergeTable) -> tuple[str, ...]:
    """Split one word into subword pieces under ``merges``.

    Repeatedly merges the lowest-rank pair present in the word, which is
    equivalent to applying the table in rank order.
    """
    symbols = word_to_symbols(word)
    while len(symbols) > 1:
        ranked = [
            (rank, pair)
            for pair in _adjacent_pairs(symbols)
            if (rank := merges.rank(pair)) is not None
        ]
        if not ranked:
            break
        _, best = min(ranked)
        symbols = _merge_once(symbols, best)
    return tuple(symbols)


def apply_bpe(
    tokens,
    merges: MergeTable,
    cache: dict[str, tuple[str, ...]] | None = None,
) -> list[str]:
    """Apply BPE to a token sequence; ``cache`` must belong to this table."""
    out: list[str] = []
    for word in tokens:
        if cache is not None:
            pieces = cache.get(word)
            if pieces is None:
                pieces = apply_word(word, merges)
                cache[word] = pieces
        else:
            pieces = apply_word(word, merges)
        out.extend(pieces)
    return out


def decode_pieces(pieces) -> list[str]:
    """Reassemble words from subword pieces using the end-of-word marker."""
    words: list[str] = []
    current: list[str] = []
    for piece in pieces:
        if piece.endswith(END_OF_WORD):
            current.append(_strip_marker(piece))
            words.append("".join(current))
            current = []
        else:
            current.append(piece)
    if current:
        words.append("".join(current))
    return words


class SubwordVocab:
    """Token/id bijection with reserved ids 0..3 and one token per language."""

    def __init__(self, tokens: list[str]):
        self.id_to_token = list(tokens)
        self.token_to_id = {tok: i for i, tok in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("vocabulary tokens are not unique")
        if self.id_to_token[:4] != list(RESERVED):
            raise ValueError("ids 0..3 must be PAD, BOS, EOS, UNK")

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def lang_token(self, code: str) -> str:
        return f"<{code}>"

    def lang_id(self, code: str) -> int:
        token = self.lang_token(code)
        ident = self.token_to_id.get(token)
        if ident is None:
            raise ValueError(f"unknown language token {token!r}")
        return ident

    def encode(self, tokens) -> list[int]:
        return [self.token_to_id.get(tok, UNK_ID) for tok in tokens]

    def decode(self, ids) -> list[str]:
        return [self.id_to_token[i] for i in ids]


def build_vocab(corpus: CorpusStore, merges: MergeTable, registry: Registry) -> SubwordVocab:
    """Reserved tokens, one token per registry language, then all corpus subwords."""
    cache: dict[str, tuple[str, ...]] = {}
    subwords: set[str] = set()
    for word in sorted(corpus_word_frequencies(corpus)):
        subwords.update(apply_bpe([word], merges, cache))
    tokens = list(RESERVED)
    tokens.extend(f"<{code}>" for code in sorted(registry.codes))
    seen = set(tokens)
    for sub in sorted(subwords):
        if sub not in seen:
            tokens.append(sub)
            seen.add(sub)
    return SubwordVocab(tokens)


@dataclass
class EncodedPair:
    lang: str
    source_ids: tuple[int, ...]
    target_ids: tuple[int, ...]


@dataclass
class EncodedCorpus:
    """Corpus mapped to subword ids, grouped by language and in file order."""

    by_lang: dict[str, list[EncodedPair]] = field(default_factory=dict)
    ordered: list[EncodedPair] = field(default_factory=list)

    def add(self, pair: EncodedPair) -> None:
        self.by_lang.setdefault(pair.lang, []).append(pair)
        self.ordered.append(pair)

    def __len__(self) -> int:
        return len(self.ordered)


def encode_corpus(store: CorpusStore, merges: MergeTable, vocab: SubwordVocab) -> EncodedCorpus:
    cache: dict[str, tuple[str, ...]] = {}
    encoded = EncodedCorpus()
    for pair in store.ordered:
        src = vocab.encode(apply_bpe(pair.source, merges, cache))
        tgt = vocab.encode(apply_bpe(pair.target, merges, cache))
        encoded.add(EncodedPair(pair.lang, tuple(src), tuple(tgt)))
    return encoded


def save_merges(path, merges: MergeTable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for left, right in merges.pairs:
            fh.write(f"{left} {right}\n")


def load_merges(path) -> MergeTable:
    pairs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'left right'")
            pairs.append((parts[0], parts[1]))
    return MergeTable(pairs)


def save_vocab(path, vocab: SubwordVocab) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, tok in enumerate(vocab.id_to_token):
            fh.write(f"{tok}\t{i}\n")


def load_vocab(path) -> SubwordVocab:
    entries: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            tok, tab, ident = line.partition("\t")
            if not tab:
                raise ValueError(f"{path}:{lineno}: expected 'token<TAB>id'")
            entries.append((int(ident), tok))
    entries.sort()
    if [i for i, _ in entries] != list(range(len(entries))):
        raise ValueError(f"{path}: vocabulary ids are not dense and contiguous")
    return SubwordVocab([tok for _, tok in entries])
