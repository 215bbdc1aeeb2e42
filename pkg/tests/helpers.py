"""Small models and tables for fast tests."""

import numpy as np

from indoner.embeddings import EmbeddingTable
from indoner.model import ModelConfig, init_model

TINY_DIMS = dict(word_dim=4, char_dim=3, c2w_hidden=2, pos_dim=3, lstm_hidden=3, fc_hidden=4,
                 entity_types=("PER", "LOC"))


def tiny_config(variant="crf", **overrides):
    return ModelConfig.for_variant(variant, **{**TINY_DIMS, **overrides})


def tiny_table(seed=0, words=("joko", "makan", "bakso", "di")):
    rng = np.random.default_rng(seed)
    return EmbeddingTable({w: i for i, w in enumerate(words)}, rng.normal(size=(len(words), 4)))


def tiny_model(variant="crf", seed=0, **overrides):
    return init_model(tiny_config(variant, seed=seed, **overrides), tiny_table(seed))
