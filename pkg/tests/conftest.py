import numpy as np
import pytest

from typovec.corpus import CorpusStore, LanguageRecord, Registry, SentencePair


@pytest.fixture
def small_registry() -> Registry:
    return Registry([
        LanguageRecord("deu", ("IndoEuropean", "Germanic"), 51.0, 10.0),
        LanguageRecord("fra", ("IndoEuropean", "Romance"), 46.0, 2.0),
        LanguageRecord("kor", ("Koreanic",), 37.5, 128.0),
        LanguageRecord("por", ("IndoEuropean", "Romance"), 39.4, -8.2),
    ])


@pytest.fixture
def small_corpus() -> CorpusStore:
    store = CorpusStore()
    pairs = [
        ("deu", "der hund sieht die katze", "the dog sees the cat"),
        ("deu", "die katze sieht den vogel", "the cat sees the bird"),
        ("deu", "der vogel singt", "the bird sings"),
        ("fra", "le chien voit le chat", "the dog sees the cat"),
        ("fra", "le chat dort", "the cat sleeps"),
        ("kor", "gae ga goyangi reul bonda", "the dog sees the cat"),
        ("kor", "goyangi ga janda", "the cat sleeps"),
        ("por", "o cao ve o gato", "the dog sees the cat"),
        ("por", "o gato dorme", "the cat sleeps"),
    ]
    for lang, src, tgt in pairs:
        store.add(SentencePair(lang, tuple(src.split()), tuple(tgt.split())))
    return store


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
