"""The full tagger: parameters, forward pass, reverse-mode gradients, checkpoints.

Network per sentence::

    [word vector ; C2W(chars) ; POS vector?]  ->  Bi-LSTM  ->  tanh FC  ->  emissions
                                                                    -> softmax | CRF

Parameters live in a flat ``dict[str, np.ndarray]`` so that gradients,
updates, finite-difference checks and serialization all walk one structure.
"""

from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from indoner import heads
from indoner.corpus import (
    CHARS, ENTITY_TYPES, POS_TAGS, Sentence, make_tagset, normalize_chars, normalize_word,
)
from indoner.embeddings import C2wParams, EmbeddingTable, c2w_backward_batch, c2w_forward_batch
from indoner.heads import CrfParams, HiddenParams, IobMask
from indoner.lstm import LstmParams, lstm_backward, lstm_forward_train

VARIANTS = {
    "crf": ("crf", False),
    "crf-pos": ("crf", True),
    "softmax": ("softmax", False),
    "softmax-pos": ("softmax", True),
}

N_CHARS = len(CHARS) + 1


@dataclass
class ModelConfig:
    head: str = "crf"
    use_pos: bool = False
    word_dim: int = 100
    char_dim: int = 25
    c2w_hidden: int = 25
    pos_dim: int = 25
    lstm_hidden: int = 100
    fc_hidden: int = 100
    entity_types: tuple[str, ...] = ENTITY_TYPES
    seed: int = 0
    learning_rate: float = 0.01
    clip_norm: float = 5.0
    epochs: int = 50
    finetune_word_emb: bool = False
    decode_mask: bool = False
    dropout: float = 0.0

    def __post_init__(self):
        self.entity_types = tuple(self.entity_types)
        if self.head not in heads.HEADS:
            raise ValueError(f"unknown head {self.head!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")

    @classmethod
    def for_variant(cls, variant: str, **overrides) -> "ModelConfig":
        try:
            head, use_pos = VARIANTS[variant]
        except KeyError:
            raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}") from None
        return cls(head=head, use_pos=use_pos, **overrides)

    @property
    def variant(self) -> str:
        return self.head + ("-pos" if self.use_pos else "")

    @property
    def tags(self) -> tuple[str, ...]:
        return make_tagset(self.entity_types)

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @property
    def input_dim(self) -> int:
        return self.word_dim + 2 * self.c2w_hidden + (self.pos_dim if self.use_pos else 0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["entity_types"] = list(self.entity_types)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass
class Model:
    config: ModelConfig
    params: dict[str, np.ndarray]
    word_index: dict[str, int]
    vocab_words: list[str] = field(default_factory=list)

    @property
    def tags(self) -> tuple[str, ...]:
        return self.config.tags

    def trainable(self) -> list[str]:
        if self.config.finetune_word_emb:
            return list(self.params)
        return [k for k in self.params if k != "word_emb"]

    def lstm(self, prefix: str) -> LstmParams:
        return LstmParams(self.params[f"{prefix}.W"], self.params[f"{prefix}.U"],
                          self.params[f"{prefix}.b"])

    @property
    def c2w(self) -> C2wParams:
        return C2wParams(self.params["char_emb"], self.lstm("c2w_fwd"), self.lstm("c2w_bwd"))

    @property
    def hidden(self) -> HiddenParams:
        p = self.params
        return HiddenParams(p["fc.W"], p["fc.b"], p["out.W"], p["out.b"])

    @property
    def crf(self) -> CrfParams | None:
        if self.config.head != "crf":
            return None
        p = self.params
        return CrfParams(p["crf.trans"], p["crf.start"], p["crf.stop"])

    @property
    def word_table(self) -> EmbeddingTable:
        return EmbeddingTable(self.word_index, self.params["word_emb"], self.params["word_unk"],
                              trainable=self.config.finetune_word_emb)

    def copy(self) -> "Model":
        return Model(self.config, {k: v.copy() for k, v in self.params.items()},
                     self.word_index, self.vocab_words)


def _glorot(rng, fan_out, fan_in):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


def _init_lstm(rng, params, prefix, input_size, hidden):
    params[f"{prefix}.W"] = np.concatenate([_glorot(rng, hidden, input_size) for _ in range(4)])
    params[f"{prefix}.U"] = np.concatenate([_glorot(rng, hidden, hidden) for _ in range(4)])
    params[f"{prefix}.b"] = np.zeros(4 * hidden)


def init_model(config: ModelConfig, pretrained: EmbeddingTable | None = None,
               vocab_words: Sequence[str] = ()) -> Model:
    """Seeded Glorot-uniform weights, zero biases, pretrained word rows copied in."""
    if pretrained is None:
        pretrained = EmbeddingTable({}, np.zeros((0, config.word_dim)))
    if pretrained.dim != config.word_dim:
        raise ValueError(f"pretrained vectors have dim {pretrained.dim}, config says {config.word_dim}")
    rng = np.random.default_rng(config.seed)
    c = config
    p: dict[str, np.ndarray] = {}
    p["word_emb"] = np.array(pretrained.matrix, dtype=float)
    p["word_unk"] = _glorot(rng, 1, c.word_dim)[0]
    p["char_emb"] = _glorot(rng, N_CHARS, c.char_dim)
    _init_lstm(rng, p, "c2w_fwd", c.char_dim, c.c2w_hidden)
    _init_lstm(rng, p, "c2w_bwd", c.char_dim, c.c2w_hidden)
    if c.use_pos:
        p["pos_emb"] = _glorot(rng, len(POS_TAGS), c.pos_dim)
    _init_lstm(rng, p, "lstm_fwd", c.input_dim, c.lstm_hidden)
    _init_lstm(rng, p, "lstm_bwd", c.input_dim, c.lstm_hidden)
    p["fc.W"] = _glorot(rng, c.fc_hidden, 2 * c.lstm_hidden)
    p["fc.b"] = np.zeros(c.fc_hidden)
    p["out.W"] = _glorot(rng, c.n_tags, c.fc_hidden)
    p["out.b"] = np.zeros(c.n_tags)
    if c.head == "crf":
        p["crf.trans"] = _glorot(rng, c.n_tags, c.n_tags)
        p["crf.start"] = np.zeros(c.n_tags)
        p["crf.stop"] = np.zeros(c.n_tags)
    return Model(config, p, dict(pretrained.index), list(vocab_words))


# --------------------------------------------------------------------------
# Encoding
# --------------------------------------------------------------------------

@dataclass
class Encoded:
    word_ids: np.ndarray     # -1 for the unknown-word row
    words: list[tuple[int, ...]]  # distinct character sequences
    word_of_token: np.ndarray
    pos_ids: np.ndarray
    tag_ids: np.ndarray | None

    def __len__(self):
        return len(self.word_ids)


def encode(model: Model, sent: Sentence, with_tags: bool = True) -> Encoded:
    word_ids = np.array([model.word_index.get(normalize_word(s), -1) for s in sent.surfaces])
    distinct: dict[tuple[int, ...], int] = {}
    word_of_token = np.array([distinct.setdefault(tuple(normalize_chars(s)), len(distinct))
                              for s in sent.surfaces])
    pos_ids = np.array([POS_TAGS.index(p) for p in sent.pos_tags])
    tag_ids = None
    if with_tags:
        tags = model.tags
        try:
            tag_ids = np.array([tags.index(t) for t in sent.tags])
        except ValueError as exc:
            raise ValueError(f"sentence uses a tag outside the model tagset {tags}") from exc
    return Encoded(word_ids, list(distinct), word_of_token, pos_ids, tag_ids)


# --------------------------------------------------------------------------
# Forward / backward
# --------------------------------------------------------------------------

@dataclass
class ForwardCache:
    enc: Encoded
    c2w: object
    drop: np.ndarray | None
    lstm_in: np.ndarray
    fwd: object
    bwd: object
    bilstm_out: np.ndarray


def forward(model: Model, sent, rng: np.random.Generator | None = None):
    """Emission scores ``(T, K)`` and the cache needed by :func:`backward`.

    ``sent`` is a :class:`Sentence` or an already :func:`encode`-d one.
    Dropout is applied only when ``rng`` is given.
    """
    enc = sent if isinstance(sent, Encoded) else encode(model, sent, with_tags=False)
    p, cfg = model.params, model.config
    word_vecs = np.where((enc.word_ids >= 0)[:, None],
                         p["word_emb"][np.maximum(enc.word_ids, 0)] if len(p["word_emb"])
                         else 0.0, p["word_unk"])
    c2w_out, c2w_cache = c2w_forward_batch(enc.words, model.c2w)
    parts = [word_vecs, c2w_out[enc.word_of_token]]
    if cfg.use_pos:
        parts.append(p["pos_emb"][enc.pos_ids])
    x = np.concatenate(parts, axis=1)
    drop = None
    if rng is not None and cfg.dropout > 0:
        drop = (rng.random(x.shape) >= cfg.dropout) / (1.0 - cfg.dropout)
        x = x * drop
    hf, cache_f = lstm_forward_train(x, model.lstm("lstm_fwd"))
    hb, cache_b = lstm_forward_train(x[::-1], model.lstm("lstm_bwd"))
    out = np.concatenate([hf, hb[::-1]], axis=1)
    e = heads.emissions(out, model.hidden)
    return e, ForwardCache(enc, c2w_cache, drop, x, cache_f, cache_b, out)


def backward(model: Model, sent, gold: Sequence[int] | None = None,
             rng: np.random.Generator | None = None) -> tuple[float, dict[str, np.ndarray]]:
    """Sentence loss and its gradient for every trainable parameter."""
    enc = sent if isinstance(sent, Encoded) else encode(model, sent, with_tags=gold is None)
    if gold is None:
        gold = enc.tag_ids
    if gold is None or len(gold) != len(enc):
        raise ValueError("gold tags must match the sentence length")
    cfg, p = model.config, model.params
    e, cache = forward(model, enc, rng)
    nll, dE, d_crf = heads.loss_and_grad(e, cfg.head, gold, model.crf)

    g: dict[str, np.ndarray] = {}
    d_out, d_hidden = heads.emissions_backward(dE, cache.bilstm_out, model.hidden)
    g["fc.W"], g["fc.b"], g["out.W"], g["out.b"] = (
        d_hidden.W_h, d_hidden.b_h, d_hidden.W_out, d_hidden.b_out)
    if d_crf is not None:
        g["crf.trans"], g["crf.start"], g["crf.stop"] = d_crf.trans, d_crf.start, d_crf.stop

    H = cfg.lstm_hidden
    dx_f, g_f = lstm_backward(d_out[:, :H], cache.fwd, model.lstm("lstm_fwd"))
    dx_b, g_b = lstm_backward(d_out[:, H:][::-1], cache.bwd, model.lstm("lstm_bwd"))
    for prefix, gl in (("lstm_fwd", g_f), ("lstm_bwd", g_b)):
        g[f"{prefix}.W"], g[f"{prefix}.U"], g[f"{prefix}.b"] = gl.W, gl.U, gl.b
    dx = dx_f + dx_b[::-1]
    if cache.drop is not None:
        dx = dx * cache.drop

    dw = cfg.word_dim
    d_word, d_c2w = dx[:, :dw], dx[:, dw:dw + 2 * cfg.c2w_hidden]
    known = enc.word_ids >= 0
    g["word_unk"] = d_word[~known].sum(axis=0)
    if cfg.finetune_word_emb:
        g["word_emb"] = np.zeros_like(p["word_emb"])
        np.add.at(g["word_emb"], enc.word_ids[known], d_word[known])
    if cfg.use_pos:
        g["pos_emb"] = np.zeros_like(p["pos_emb"])
        np.add.at(g["pos_emb"], enc.pos_ids, dx[:, dw + 2 * cfg.c2w_hidden:])

    d_distinct = np.zeros((len(enc.words), 2 * cfg.c2w_hidden))
    np.add.at(d_distinct, enc.word_of_token, d_c2w)
    g["char_emb"], g_cf, g_cb = c2w_backward_batch(d_distinct, cache.c2w, model.c2w)
    for prefix, gl in (("c2w_fwd", g_cf), ("c2w_bwd", g_cb)):
        g[f"{prefix}.W"], g[f"{prefix}.U"], g[f"{prefix}.b"] = gl.W, gl.U, gl.b
    return nll, g


def sentence_loss(model: Model, sent, gold: Sequence[int] | None = None) -> float:
    enc = sent if isinstance(sent, Encoded) else encode(model, sent, with_tags=gold is None)
    e, _ = forward(model, enc)
    return heads.loss(e, model.config.head, enc.tag_ids if gold is None else gold, model.crf)


def decode_mask(model: Model) -> IobMask | None:
    return heads.iob_mask(model.tags) if model.config.decode_mask else None


def predict_ids(model: Model, sent) -> list[int]:
    e, _ = forward(model, sent)
    return heads.decode(e, model.config.head, model.crf, decode_mask(model))


def predict(model: Model, sent: Sentence) -> list[str]:
    return [model.tags[k] for k in predict_ids(model, sent)]


def tag_sentences(model: Model, sentences: Sequence[Sentence]) -> list[Sentence]:
    return [s.with_tags(predict(model, s)) for s in sentences]


# --------------------------------------------------------------------------
# Checkpoints
# --------------------------------------------------------------------------

MAGIC = b"INDONER-CKPT\n"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _json_array(obj) -> np.ndarray:
    return np.frombuffer(json.dumps(obj).encode("utf-8"), dtype=np.uint8)


def save_model(model: Model, path) -> None:
    """Magic line, little-endian uint32 version, then an ``.npz`` payload."""
    meta = {"config": model.config.to_dict(), "param_names": list(model.params)}
    words = sorted(model.word_index, key=model.word_index.__getitem__)
    buf = io.BytesIO()
    np.savez(buf, __meta__=_json_array(meta), __words__=_json_array(words),
             __vocab__=_json_array(model.vocab_words),
             **{f"param:{k}": v for k, v in model.params.items()})
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(VERSION.to_bytes(4, "little"))
        f.write(buf.getvalue())


def load_model(path) -> Model:
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint (bad magic header)")
    version = int.from_bytes(data[len(MAGIC):len(MAGIC) + 4], "little")
    if version != VERSION:
        raise CheckpointError(f"{path}: checkpoint version {version}, this build reads {VERSION}")
    try:
        npz = np.load(io.BytesIO(data[len(MAGIC) + 4:]), allow_pickle=False)
        meta = json.loads(npz["__meta__"].tobytes())
        words = json.loads(npz["__words__"].tobytes())
        vocab = json.loads(npz["__vocab__"].tobytes())
        params = {k: npz[f"param:{k}"] for k in meta["param_names"]}
    except (KeyError, ValueError, OSError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from exc
    config = ModelConfig.from_dict(meta["config"])
    model = Model(config, params, {w: i for i, w in enumerate(words)}, vocab)
    expected = init_model(config, EmbeddingTable(model.word_index, params["word_emb"]))
    for k, v in expected.params.items():
        if k not in params or params[k].shape != v.shape:
            raise CheckpointError(f"{path}: parameter {k} missing or misshapen for {config.variant}")
    return model
