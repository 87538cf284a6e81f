"""Vocabulary construction, encode/decode round trips, subword matching."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopqg.errors import ConfigError, DecodeError, ValidationError
from hopqg.tokenizer import (
    BOS_ID,
    EOS_ID,
    SEP_ID,
    UNK_ID,
    Vocabulary,
    build_vocab,
    load_piece_inventory,
    load_vocab,
)

WORDS = st.text(alphabet="abcdefg", min_size=1, max_size=6)


class TestBuildVocab:
    def test_frequency_plus_specials(self):
        vocab = build_vocab(["a a b".split()], max_size=6)
        assert len(vocab) == 6
        assert vocab.pieces() == ["a", "b"]
        assert vocab.id_of("a") == 4  # most frequent gets the first free id

    def test_unseen_token_maps_to_unk(self):
        vocab = build_vocab(["a a b".split()], max_size=6)
        assert vocab.encode("z") == [UNK_ID]

    def test_rebuild_is_identical(self):
        corpus = ["c a b a".split(), "b c c".split()]
        first = build_vocab(corpus, max_size=8)
        second = build_vocab(corpus, max_size=8)
        assert first.pieces() == second.pieces()

    def test_tie_break_is_lexicographic(self):
        vocab = build_vocab(["b a".split()], max_size=5)  # room for one piece
        assert vocab.pieces() == ["a"]

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValidationError):
            build_vocab([], max_size=10)

    def test_too_small_max_size_rejected(self):
        with pytest.raises(ConfigError):
            build_vocab(["a"], max_size=4)

    def test_specials_fixed(self):
        vocab = build_vocab(["x y".split()], max_size=10)
        assert vocab.id_of("<unk>") == UNK_ID == 0
        assert vocab.id_of("<bos>") == BOS_ID == 1
        assert vocab.id_of("<eos>") == EOS_ID == 2
        assert vocab.id_of("<sep>") == SEP_ID == 3


class TestEncodeDecode:
    def test_encode_pair(self):
        vocab = build_vocab(["a b".split()], max_size=6)
        assert vocab.encode("a b") == [vocab.id_of("a"), vocab.id_of("b")]

    def test_decode_with_specials(self):
        vocab = build_vocab(["a".split()], max_size=5)
        assert vocab.decode([BOS_ID, vocab.id_of("a"), EOS_ID]) == "<bos> a <eos>"

    def test_decode_out_of_range(self):
        vocab = build_vocab(["a".split()], max_size=5)
        with pytest.raises(DecodeError):
            vocab.decode([len(vocab)])

    def test_never_emits_id_beyond_vocab(self):
        vocab = build_vocab(["a b c".split()], max_size=6)
        ids = vocab.encode("a b c d e <sep>")
        assert max(ids) < len(vocab)

    @given(st.lists(WORDS, min_size=1, max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_roundtrip_in_vocabulary_text(self, words):
        vocab = build_vocab([words], max_size=4 + len(set(words)))
        text = " ".join(words)
        assert vocab.decode(vocab.encode(text)) == text


class TestSubwordMode:
    def test_greedy_longest_match(self):
        vocab = Vocabulary(["to", "ront", "o"], subword=True)
        ids = vocab.encode("toronto")
        assert [vocab.piece_of(i) for i in ids] == ["to", "ront", "o"]

    def test_prefers_longest_piece(self):
        vocab = Vocabulary(["ab", "a", "b", "abc"], subword=True)
        ids = vocab.encode("abc")
        assert [vocab.piece_of(i) for i in ids] == ["abc"]

    def test_unmatched_character_becomes_unk(self):
        vocab = Vocabulary(["a"], subword=True)
        assert vocab.encode("axa") == [vocab.id_of("a"), UNK_ID, vocab.id_of("a")]

    def test_word_marker_roundtrip(self):
        vocab = Vocabulary(["▁to", "ronto", "▁go"], subword=True)
        ids = vocab.encode("toronto go")
        assert vocab.decode(ids) == "toronto go"

    def test_specials_pass_through(self):
        vocab = Vocabulary(["ab"], subword=True)
        assert vocab.encode(["<sep>", "ab"]) == [SEP_ID, vocab.id_of("ab")]


class TestPersistence:
    def test_save_load_roundtrip(self, tmp_path):
        vocab = build_vocab(["c a b a c c".split()], max_size=7)
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        loaded = load_vocab(path)
        assert loaded.pieces() == vocab.pieces()
        assert loaded.sha256() == vocab.sha256()
        # line number = id - 4
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[vocab.id_of("a") - 4] == "a"

    def test_inventory_mode(self, tmp_path):
        path = tmp_path / "pieces.txt"
        path.write_text("to\nront\no\n", encoding="utf-8")
        vocab = load_piece_inventory(path)
        assert vocab.subword
        assert len(vocab.encode("toronto")) == 3

    def test_hash_tracks_content(self, tmp_path):
        a = Vocabulary(["x", "y"])
        b = Vocabulary(["x", "z"])
        assert a.sha256() != b.sha256()
