"""Train the many-to-one translation model on a toy 3-language corpus.

Every language translates into the same small English lexicon; the
language token is prepended to each source sentence. Prints the per-epoch
loss curve and final perplexity, then shows encoder states for a sentence.
"""

import numpy as np

from typovec.bpe import build_vocab, encode_corpus, learn_bpe
from typovec.corpus import CorpusStore, LanguageRecord, Registry, SentencePair
from typovec.models import TrainConfig, encode
from typovec.training import perplexity, train_nmt

registry = Registry([
    LanguageRecord("aaa", ("F1", "B1"), 10.0, 10.0),
    LanguageRecord("bbb", ("F1", "B2"), 20.0, 20.0),
    LanguageRecord("ccc", ("F2",), -30.0, 140.0),
])

# aaa is verb-final, bbb and ccc are verb-medial; lexicons are disjoint
sentences = {
    "aaa": [("ona kumi vatu", "dog sees cat"), ("ona tiru vatu", "dog bites cat"),
            ("kumi ona vatu", "cat sees dog"), ("tiru kumi vatu", "bird sees cat")],
    "bbb": [("rek mal zon", "dog sees cat"), ("rek vit zon", "dog bites cat"),
            ("mal rek zon", "cat sees dog"), ("vit mal zon", "bird sees cat")],
    "ccc": [("pul gor nif", "dog sees cat"), ("pul dak nif", "dog bites cat"),
            ("gor pul nif", "cat sees dog"), ("dak gor nif", "bird sees cat")],
}
store = CorpusStore()
for lang, pairs in sentences.items():
    for src, tgt in pairs:
        store.add(SentencePair(lang, tuple(src.split()), tuple(tgt.split())))

merges = learn_bpe(store, 25)
vocab = build_vocab(store, merges, registry)
encoded = encode_corpus(store, merges, vocab)
print(f"vocab size {len(vocab)}, {len(encoded.ordered)} sentence pairs")

config = TrainConfig(hidden_size=24, embed_size=24, lr=0.05, dropout=0.0,
                     epochs=40, batch_size=4, seed=1)
model, curve = train_nmt(encoded, vocab, config)
print("loss/token per epoch:", " ".join(f"{x:.2f}" for x in curve[::5]))
print(f"final perplexity: {perplexity(model, encoded, vocab):.3f}")

pair = encoded.by_lang["aaa"][0]
states = encode(model, vocab, "aaa", pair.source_ids)
print(f"\nencoder run for one sentence: {len(pair.source_ids)} subwords "
      f"-> {len(states)} states (language token + tokens + EOS)")
print("first cell state, 6 of 24 dims:", np.round(states[0][1][:6], 3))
print("last  cell state, 6 of 24 dims:", np.round(states[-1][1][:6], 3))
