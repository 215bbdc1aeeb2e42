"""Bi-LSTM named-entity tagger with softmax or linear-chain CRF output."""

__version__ = "0.1.0"

from indoner.corpus import (  # noqa: E402
    ENTITY_TYPES, POS_TAGS, TAGS, EntitySpan, Sentence, Token, Vocab, build_vocab,
    normalize_chars, parse_conll, serialize_conll, spans_to_tags, tags_to_spans, validate_iob,
)
from indoner.model import Model, ModelConfig, load_model, predict, save_model  # noqa: E402
from indoner.training import train  # noqa: E402
