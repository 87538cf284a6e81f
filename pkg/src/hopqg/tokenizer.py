"""Vocabulary management and text<->id conversion.

Two segmentation modes:
  - whitespace (default): every whitespace-delimited word is one piece;
  - piece inventory: a fixed list of subword pieces applied to each word by
    deterministic greedy longest-match (pieces may carry a leading "▁"
    word-boundary marker in the sentencepiece convention).

Special ids are fixed for checkpoint portability: <unk>=0, <bos>=1, <eos>=2,
<sep>=3. Vocabulary files hold one non-special piece per line; line i maps to
id i + 4.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from pathlib import Path

from .errors import ConfigError, DecodeError, ValidationError

UNK_ID = 0
BOS_ID = 1
EOS_ID = 2
SEP_ID = 3

UNK = "<unk>"
BOS = "<bos>"
EOS = "<eos>"
SEP = "<sep>"

SPECIALS = (UNK, BOS, EOS, SEP)

_WORD_MARK = "▁"


class Vocabulary:
    """Immutable piece<->id mapping with the four fixed special tokens."""

    def __init__(self, pieces: list[str], subword: bool = False):
        for special in SPECIALS:
            if special in pieces:
                raise ConfigError(f"special token {special} cannot be a vocabulary piece")
        if len(set(pieces)) != len(pieces):
            raise ConfigError("duplicate pieces in vocabulary")
        self._id_to_piece = list(SPECIALS) + list(pieces)
        self._piece_to_id = {p: i for i, p in enumerate(self._id_to_piece)}
        self.subword = subword
        # Greedy longest-match scans candidate lengths downward from here.
        self._max_piece_len = max((len(p) for p in pieces), default=1)

    def __len__(self) -> int:
        return len(self._id_to_piece)

    def __contains__(self, piece: str) -> bool:
        return piece in self._piece_to_id

    def id_of(self, piece: str) -> int:
        return self._piece_to_id.get(piece, UNK_ID)

    def piece_of(self, idx: int) -> str:
        if not 0 <= idx < len(self._id_to_piece):
            raise DecodeError(f"id {idx} outside vocabulary of size {len(self)}")
        return self._id_to_piece[idx]

    def pieces(self) -> list[str]:
        return self._id_to_piece[len(SPECIALS):]

    def sha256(self) -> str:
        payload = "\n".join(self._id_to_piece).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    # -- word segmentation ---------------------------------------------------

    def segment_word(self, word: str) -> list[int]:
        """Ids for one whitespace word.

        Whitespace mode: the word itself (or <unk>). Subword mode: greedy
        longest-match against the inventory; an unmatched position emits one
        <unk> and advances a character.
        """
        if word in (BOS, EOS, SEP):
            return [self._piece_to_id[word]]
        if not self.subword:
            return [self._piece_to_id.get(word, UNK_ID)]
        ids = []
        pos = 0
        first = True
        while pos < len(word):
            matched = None
            for length in range(min(self._max_piece_len + 1, len(word) - pos + 1) - 1, 0, -1):
                candidate = word[pos:pos + length]
                if first and _WORD_MARK + candidate in self._piece_to_id:
                    matched = (_WORD_MARK + candidate, length)
                    break
                if candidate in self._piece_to_id:
                    matched = (candidate, length)
                    break
            if matched is None:
                ids.append(UNK_ID)
                pos += 1
            else:
                ids.append(self._piece_to_id[matched[0]])
                pos += matched[1]
            first = False
        return ids

    def encode(self, text) -> list[int]:
        """Encode a string (whitespace-split first) or a token sequence."""
        words = text.split() if isinstance(text, str) else list(text)
        ids: list[int] = []
        for word in words:
            ids.extend(self.segment_word(word))
        return ids

    def decode(self, ids) -> str:
        """Inverse of encode up to whitespace joining.

        Pieces carrying the word-boundary marker are glued to form words;
        otherwise pieces are joined with single spaces.
        """
        pieces = [self.piece_of(i) for i in ids]
        if self.subword and any(_WORD_MARK in p for p in pieces):
            text = ""
            for piece in pieces:
                if piece in SPECIALS:
                    text += " " + piece + " "
                elif piece.startswith(_WORD_MARK):
                    text += " " + piece[len(_WORD_MARK):]
                else:
                    text += piece
            return " ".join(text.split())
        return " ".join(pieces)

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        Path(path).write_text(
            "".join(p + "\n" for p in self.pieces()), encoding="utf-8"
        )


def build_vocab(corpus, max_size: int) -> Vocabulary:
    """Frequency-ranked whitespace vocabulary; ties break lexicographically.

    `corpus` is an iterable of token sequences (or strings, whitespace-split).
    """
    if max_size < 5:
        raise ConfigError(f"max_size must be >= 5 to fit the specials, got {max_size}")
    counts: Counter[str] = Counter()
    for row in corpus:
        tokens = row.split() if isinstance(row, str) else row
        counts.update(t for t in tokens if t not in SPECIALS)
    if not counts:
        raise ValidationError("cannot build a vocabulary from an empty corpus")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [piece for piece, _ in ranked[: max_size - len(SPECIALS)]]
    return Vocabulary(kept)


def load_vocab(path, subword: bool = False) -> Vocabulary:
    """Read a one-piece-per-line vocabulary file."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return Vocabulary([line for line in lines if line], subword=subword)


def load_piece_inventory(path) -> Vocabulary:
    """Read a subword piece inventory (one piece per line), greedy-match mode."""
    return load_vocab(path, subword=True)
