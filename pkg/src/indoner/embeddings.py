"""Token input features: pretrained word vectors, C2W character embeddings, POS vectors."""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from indoner.corpus import POS_TAGS, Token, normalize_chars, normalize_word
from indoner.lstm import LstmCache, LstmParams, lstm_backward, lstm_forward, lstm_forward_train

logger = logging.getLogger(__name__)


class EmbeddingFormatError(ValueError):
    pass


@dataclass
class EmbeddingTable:
    """Rows of ``matrix`` keyed by normalized word.

    ``unk`` is the row returned for words without an entry.
    """

    index: dict[str, int]
    matrix: np.ndarray
    unk: np.ndarray | None = None
    trainable: bool = False

    def __post_init__(self):
        if self.matrix.ndim != 2 or len(self.index) != self.matrix.shape[0]:
            raise ValueError(f"{len(self.index)} keys for a {self.matrix.shape} matrix")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("embedding table holds non-finite values")
        if self.unk is None:
            self.unk = np.zeros(self.dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def words(self) -> list[str]:
        return sorted(self.index, key=self.index.__getitem__)

    def __len__(self):
        return self.matrix.shape[0]

    def __contains__(self, word):
        return normalize_word(word) in self.index


def load_word2vec(source) -> EmbeddingTable:
    """Read the word2vec text format from a path, a byte stream or a text stream.

    The first line is ``<count> <dim>``; every other line is a word followed
    by ``dim`` numbers. Keys are normalized; when two entries collide the
    later one wins.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as f:
            return load_word2vec(f)
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    if isinstance(source, io.TextIOBase):
        lines = iter(source)
    else:
        lines = (raw.decode("utf-8") for raw in source)

    header = next(lines, "").split()
    try:
        count, dim = (int(v) for v in header)
    except ValueError:
        raise EmbeddingFormatError(f"bad header {' '.join(header)!r}; expected '<count> <dim>'") from None
    if count < 0 or dim <= 0:
        raise EmbeddingFormatError(f"bad header values count={count} dim={dim}")

    index: dict[str, int] = {}
    rows: list[np.ndarray] = []
    n_rows = 0
    for lineno, line in enumerate(lines, start=2):
        line = line.rstrip("\r\n").rstrip(" ")
        if not line:
            continue
        word, *values = line.split(" ")
        if len(values) != dim:
            raise EmbeddingFormatError(
                f"line {lineno}: {len(values)} values for {word!r}, header says {dim}")
        try:
            vec = np.array([float(v) for v in values])
        except ValueError:
            raise EmbeddingFormatError(f"line {lineno}: non-numeric component for {word!r}") from None
        if not np.all(np.isfinite(vec)):
            raise EmbeddingFormatError(f"line {lineno}: non-finite component for {word!r}")
        n_rows += 1
        key = normalize_word(word)
        if key in index:
            logger.warning("line %d: duplicate word %r (normalized %r), keeping the later row",
                           lineno, word, key)
            rows[index[key]] = vec
        else:
            index[key] = len(rows)
            rows.append(vec)
    if n_rows != count:
        raise EmbeddingFormatError(f"header announces {count} rows, file has {n_rows}")
    matrix = np.stack(rows) if rows else np.zeros((0, dim))
    return EmbeddingTable(index, matrix)


def save_word2vec(path, table: EmbeddingTable, precision: int | None = 6) -> None:
    """Write ``table`` as word2vec text; ``precision=None`` writes exact shortest reprs."""
    fmt = repr if precision is None else (lambda v: f"{v:.{precision}f}")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(table)} {table.dim}\n")
        for word in table.words:
            vals = " ".join(fmt(float(v)) for v in table.matrix[table.index[word]])
            f.write(f"{word} {vals}\n")


def lookup_word(word: str, table: EmbeddingTable) -> np.ndarray:
    """Row of the normalized ``word``, or the table's unknown-word row."""
    row = table.index.get(normalize_word(word))
    return table.unk if row is None else table.matrix[row]


# --------------------------------------------------------------------------
# Character-to-word embeddings
# --------------------------------------------------------------------------

@dataclass
class C2wParams:
    chars: np.ndarray  # (n_chars, d_char)
    fwd: LstmParams
    bwd: LstmParams

    def __post_init__(self):
        if self.fwd.hidden_size != self.bwd.hidden_size:
            raise ValueError("C2W directions must share a hidden size")
        if self.fwd.input_size != self.chars.shape[1] or self.bwd.input_size != self.chars.shape[1]:
            raise ValueError("C2W LSTM input size must equal the character embedding size")

    @property
    def output_size(self) -> int:
        return 2 * self.fwd.hidden_size


def c2w_embed(chars: Sequence[int], p: C2wParams) -> np.ndarray:
    """``[final forward state; final backward state]`` over a word's characters."""
    if len(chars) == 0:
        raise ValueError("c2w_embed needs at least one character")
    xs = p.chars[np.asarray(chars)]
    h_f = lstm_forward(xs, p.fwd)[-1].h
    h_b = lstm_forward(xs[::-1], p.bwd)[-1].h
    return np.concatenate([h_f, h_b])


@dataclass
class C2wCache:
    ids_f: np.ndarray
    ids_b: np.ndarray
    mask: np.ndarray
    fwd: LstmCache = field(repr=False)
    bwd: LstmCache = field(repr=False)


def _pad(words: Sequence[Sequence[int]], reverse: bool):
    L = max(len(w) for w in words)
    ids = np.zeros((L, len(words)), dtype=int)
    mask = np.zeros((L, len(words)))
    for b, w in enumerate(words):
        seq = list(w)[::-1] if reverse else list(w)
        ids[:len(seq), b] = seq
        mask[:len(seq), b] = 1.0
    return ids, mask


def c2w_forward_batch(words: Sequence[Sequence[int]], p: C2wParams) -> tuple[np.ndarray, C2wCache]:
    """C2W vectors for several words at once, ``(B, 2 * hidden)``, with a backward cache."""
    if any(len(w) == 0 for w in words):
        raise ValueError("c2w needs at least one character per word")
    ids_f, mask = _pad(words, reverse=False)
    ids_b, _ = _pad(words, reverse=True)
    hf, cache_f = lstm_forward_train(p.chars[ids_f], p.fwd, mask)
    hb, cache_b = lstm_forward_train(p.chars[ids_b], p.bwd, mask)
    out = np.concatenate([hf[-1], hb[-1]], axis=-1)
    return out, C2wCache(ids_f, ids_b, mask, cache_f, cache_b)


def c2w_backward_batch(d_out: np.ndarray, cache: C2wCache, p: C2wParams):
    """Returns ``(d_chars, d_fwd, d_bwd)``."""
    H = p.fwd.hidden_size
    L = cache.ids_f.shape[0]
    dh = np.zeros((L, *d_out.shape[:-1], H))
    dh[-1] = d_out[..., :H]
    dx_f, g_f = lstm_backward(dh, cache.fwd, p.fwd)
    dh = np.zeros_like(dh)
    dh[-1] = d_out[..., H:]
    dx_b, g_b = lstm_backward(dh, cache.bwd, p.bwd)
    d_chars = np.zeros_like(p.chars)
    # Padded steps carry exactly zero gradient, so their dummy ids are harmless.
    np.add.at(d_chars, cache.ids_f, dx_f)
    np.add.at(d_chars, cache.ids_b, dx_b)
    return d_chars, g_f, g_b


# --------------------------------------------------------------------------
# Full token input
# --------------------------------------------------------------------------

def assemble_input(tok: Token, words: EmbeddingTable, c2w: C2wParams,
                   pos: np.ndarray | None = None) -> np.ndarray:
    """``word ++ c2w`` or, when a POS table is given, ``word ++ c2w ++ pos``."""
    parts = [lookup_word(tok.surface, words), c2w_embed(normalize_chars(tok.surface), c2w)]
    if pos is not None:
        parts.append(pos[POS_TAGS.index(tok.pos)])
    return np.concatenate(parts)
