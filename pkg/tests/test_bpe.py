import numpy as np
import pytest
from hypothesis import given, strategies as st

from typovec.bpe import (
    END_OF_WORD,
    MergeTable,
    UNK_ID,
    apply_bpe,
    apply_word,
    build_vocab,
    decode_pieces,
    encode_corpus,
    learn_bpe,
    load_merges,
    load_vocab,
    save_merges,
    save_vocab,
)
from typovec.corpus import CorpusStore, LanguageRecord, Registry, SentencePair

from oracles import brute_force_learn_bpe, naive_apply_bpe


def store_from_words(words: dict[str, int]) -> CorpusStore:
    store = CorpusStore()
    for word, freq in words.items():
        for _ in range(freq):
            store.add(SentencePair("xx", (word,), ("x",)))
    return store


class TestLearn:
    def test_most_frequent_pair_wins(self):
        table = learn_bpe({"abab": 1, "abc": 1}, 1)
        assert table.pairs == [("a", "b")]

    def test_single_character_words_learn_nothing(self):
        table = learn_bpe({"a": 5, "b": 9, "c": 2}, 10)
        assert table.pairs == []

    def test_zero_merges_is_an_error(self):
        with pytest.raises(ValueError, match="positive"):
            learn_bpe({"ab": 2}, 0)

    def test_empty_corpus_is_an_error(self):
        with pytest.raises(ValueError, match="empty"):
            learn_bpe({}, 5)

    def test_accepts_corpus_store(self, small_corpus):
        table = learn_bpe(small_corpus, 10)
        assert len(table) > 0

    def test_tie_break_is_lexicographic(self):
        # (a,b) and (c,d) both occur twice; (a,b) sorts first
        table = learn_bpe({"ab": 2, "cd": 2}, 1)
        assert table.pairs == [("a", "b")]

    def test_matches_recount_oracle_on_random_corpora(self):
        rng = np.random.default_rng(77)
        alphabet = "abcdef"
        for trial in range(10):
            n_words = int(rng.integers(2, 60))
            words = {}
            for _ in range(n_words):
                length = int(rng.integers(1, 8))
                w = "".join(alphabet[i] for i in rng.integers(0, len(alphabet), length))
                words[w] = int(rng.integers(1, 9))
            merges = int(rng.integers(1, 20))
            got = learn_bpe(dict(words), merges)
            expect = brute_force_learn_bpe(words, merges)
            assert got.pairs == expect, f"trial {trial}: {words}"


class TestApply:
    def test_merge_crosses_end_of_word_marker(self):
        table = MergeTable([("a", "b")])
        assert apply_bpe(["abab"], table) == ["ab", f"ab{END_OF_WORD}"]

    def test_empty_sequence(self):
        assert apply_bpe([], MergeTable([("a", "b")])) == []

    def test_unseen_characters_stay_as_characters(self):
        table = MergeTable([("a", "b")])
        assert apply_bpe(["xyz"], table) == ["x", "y", f"z{END_OF_WORD}"]

    def test_matches_in_order_application(self):
        rng = np.random.default_rng(99)
        alphabet = "abcd"
        for _ in range(30):
            words = {}
            for _ in range(int(rng.integers(2, 30))):
                length = int(rng.integers(1, 9))
                w = "".join(alphabet[i] for i in rng.integers(0, len(alphabet), length))
                words[w] = int(rng.integers(1, 5))
            table = learn_bpe(dict(words), 12)
            probe = "".join(alphabet[i] for i in rng.integers(0, len(alphabet), 7))
            assert list(apply_word(probe, table)) == naive_apply_bpe(probe, table.pairs)

    @given(st.text(alphabet="abcde", min_size=1, max_size=12))
    def test_pieces_reconstruct_the_word(self, word):
        table = learn_bpe({"ababab": 3, "bcbc": 2, "dede": 2}, 6)
        pieces = apply_word(word, table)
        assert decode_pieces(pieces) == [word]


class TestVocab:
    @pytest.fixture
    def setup(self):
        registry = Registry([
            LanguageRecord("aaa", ("F",), 0.0, 0.0),
            LanguageRecord("bbb", ("G",), 1.0, 1.0),
        ])
        store = CorpusStore()
        store.add(SentencePair("aaa", ("ab", "ab"), ("cd",)))
        store.add(SentencePair("bbb", ("ef",), ("cd",)))
        table = learn_bpe(store, 3)
        return registry, store, table

    def test_size_is_reserved_plus_languages_plus_subwords(self, setup):
        registry, store, _ = setup
        # no merges apply (all pairs unique): subwords are pure characters
        empty = MergeTable([])
        vocab = build_vocab(store, empty, registry)
        # chars: a b⟨/w⟩ c d⟨/w⟩ e f⟨/w⟩ -> 6 distinct pieces
        assert len(vocab) == 4 + 2 + 6

    def test_encode_decode_round_trip(self, setup):
        registry, store, table = setup
        vocab = build_vocab(store, table, registry)
        pieces = apply_bpe(["ab", "ef"], table)
        assert vocab.decode(vocab.encode(pieces)) == pieces

    def test_unknown_token_maps_to_unk(self, setup):
        registry, store, table = setup
        vocab = build_vocab(store, table, registry)
        assert vocab.encode(["never-seen"]) == [UNK_ID]

    def test_language_tokens_present(self, setup):
        registry, store, table = setup
        vocab = build_vocab(store, table, registry)
        assert vocab.lang_id("aaa") != vocab.lang_id("bbb")
        with pytest.raises(ValueError, match="unknown language"):
            vocab.lang_id("zzz")

    def test_ids_dense_and_bijective(self, setup):
        registry, store, table = setup
        vocab = build_vocab(store, table, registry)
        assert sorted(vocab.token_to_id.values()) == list(range(len(vocab)))

    def test_file_round_trips(self, setup, tmp_path):
        registry, store, table = setup
        vocab = build_vocab(store, table, registry)
        save_merges(tmp_path / "m.txt", table)
        save_vocab(tmp_path / "v.tsv", vocab)
        assert load_merges(tmp_path / "m.txt").pairs == table.pairs
        assert load_vocab(tmp_path / "v.tsv").id_to_token == vocab.id_to_token

    def test_encode_corpus_groups_by_language(self, setup):
        registry, store, table = setup
        vocab = build_vocab(store, table, registry)
        encoded = encode_corpus(store, table, vocab)
        assert set(encoded.by_lang) == {"aaa", "bbb"}
        assert len(encoded.ordered) == 2
        assert all(UNK_ID not in p.source_ids for p in encoded.ordered)


def test_learning_is_deterministic(small_corpus):
    a = learn_bpe(small_corpus, 15)
    b = learn_bpe(small_corpus, 15)
    assert a.pairs == b.pairs
