"""Joint byte-pair encoding across languages on a toy corpus.

Learns merges over all source sides plus the shared target side, shows how
words segment, and demonstrates the end-of-word marker round trip.
"""

from typovec.bpe import apply_bpe, build_vocab, decode_pieces, learn_bpe
from typovec.corpus import CorpusStore, LanguageRecord, Registry, SentencePair

registry = Registry([
    LanguageRecord("deu", ("IndoEuropean", "Germanic"), 51.0, 10.0),
    LanguageRecord("nld", ("IndoEuropean", "Germanic"), 52.0, 5.0),
])

store = CorpusStore()
for lang, src, tgt in [
    ("deu", "das haus ist klein", "the house is small"),
    ("deu", "das kleine haus", "the small house"),
    ("deu", "die hauser sind klein", "the houses are small"),
    ("nld", "het huis is klein", "the house is small"),
    ("nld", "het kleine huis", "the small house"),
    ("nld", "de huizen zijn klein", "the houses are small"),
]:
    store.add(SentencePair(lang, tuple(src.split()), tuple(tgt.split())))

merges = learn_bpe(store, 15)
print("learned merges (rank order):")
for rank, pair in enumerate(merges.pairs):
    print(f"  {rank:2d}  {pair[0]} + {pair[1]}")

for word in ("kleine", "hauser", "huizen", "unseenword"):
    pieces = apply_bpe([word], merges)
    print(f"{word:12s} -> {pieces} -> {decode_pieces(pieces)}")

vocab = build_vocab(store, merges, registry)
print(f"\nvocabulary size {len(vocab)} "
      f"(4 reserved + {len(registry)} language tokens + subwords)")
print("language token ids:", {c: vocab.lang_id(c) for c in registry.codes})
sentence = apply_bpe("das kleine haus".split(), merges)
ids = vocab.encode(sentence)
print("encode/decode round trip:", vocab.decode(ids) == sentence)
