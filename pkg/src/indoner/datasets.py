"""The bundled synthetic Indonesian-style corpus and its word vectors.

20 training sentences covering all five entity types and all 26 POS tags,
8 held-out sentences, and 100-d vectors for most of their words.
"""

from __future__ import annotations

from importlib import resources

from indoner.corpus import Sentence, parse_conll
from indoner.embeddings import EmbeddingTable, load_word2vec

_DATA = resources.files("indoner") / "data"


def data_path(name: str):
    return _DATA / name


def toy_train() -> list[Sentence]:
    return parse_conll(data_path("toy_train.conll").read_text(encoding="utf-8"))


def toy_heldout() -> list[Sentence]:
    return parse_conll(data_path("toy_heldout.conll").read_text(encoding="utf-8"))


def toy_vectors() -> EmbeddingTable:
    with data_path("toy_vectors.txt").open("rb") as f:
        return load_word2vec(f)
