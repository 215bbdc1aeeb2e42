"""Output side of the tagger: the tanh layer, emission scores and the two heads.

Emission scores are ``W_out tanh(W_h x + b_h) + b_out`` per token. The
softmax head normalizes each row independently; the CRF head scores whole
tag paths with transition, start and stop scores on top of the emissions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from indoner.corpus import split_tag

# Stands in for -inf inside the DP so that masked sums never produce nan.
NEG_INF = -1e30

HEADS = ("softmax", "crf")


def logsumexp(x, axis=None):
    """Max-shifted ``log(sum(exp(x)))`` along ``axis``."""
    x = np.asarray(x, dtype=float)
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return out.reshape(())[()]
    return np.squeeze(out, axis=axis)


@dataclass
class HiddenParams:
    W_h: np.ndarray    # (F, 2H)
    b_h: np.ndarray    # (F,)
    W_out: np.ndarray  # (K, F)
    b_out: np.ndarray  # (K,)


@dataclass
class CrfParams:
    """``trans[j, k]`` scores moving from tag ``j`` to tag ``k``."""

    trans: np.ndarray  # (K, K)
    start: np.ndarray  # (K,)
    stop: np.ndarray   # (K,)

    @classmethod
    def zeros(cls, n_tags: int) -> "CrfParams":
        return cls(np.zeros((n_tags, n_tags)), np.zeros(n_tags), np.zeros(n_tags))

    @property
    def n_tags(self) -> int:
        return self.trans.shape[0]


@dataclass
class IobMask:
    """Which start tags and transitions are IOB-legal."""

    start: np.ndarray  # (K,) bool
    trans: np.ndarray  # (K, K) bool


def iob_mask(tags: Sequence[str]) -> IobMask:
    """Legality tables for ``tags``: ``I-X`` may start nothing and follow only ``B-X``/``I-X``."""
    parsed = [split_tag(t) for t in tags]
    start = np.array([kind != "I" for kind, _ in parsed])
    trans = np.ones((len(tags), len(tags)), dtype=bool)
    for k, (kind, ent) in enumerate(parsed):
        if kind == "I":
            for j, (_, prev_ent) in enumerate(parsed):
                trans[j, k] = prev_ent == ent
    return IobMask(start, trans)


# --------------------------------------------------------------------------
# Emissions
# --------------------------------------------------------------------------

def emissions(bilstm_out, p: HiddenParams) -> np.ndarray:
    x = np.asarray(bilstm_out, dtype=float)
    if x.shape[-1] != p.W_h.shape[1]:
        raise ValueError(f"input width {x.shape[-1]} does not match W_h {p.W_h.shape}")
    return np.tanh(x @ p.W_h.T + p.b_h) @ p.W_out.T + p.b_out


def emissions_backward(dE, bilstm_out, p: HiddenParams) -> tuple[np.ndarray, HiddenParams]:
    """Gradients of the tanh and output layers; recomputes the hidden activations."""
    z = np.tanh(bilstm_out @ p.W_h.T + p.b_h)
    dz = (dE @ p.W_out) * (1.0 - z ** 2)
    grads = HiddenParams(dz.T @ bilstm_out, dz.sum(axis=0), dE.T @ z, dE.sum(axis=0))
    return dz @ p.W_h, grads


# --------------------------------------------------------------------------
# Softmax head
# --------------------------------------------------------------------------

def softmax(e) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    z = np.exp(e - e.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def softmax_decode(e) -> tuple[list[int], np.ndarray]:
    """Independent per-token argmax; ``np.argmax`` already picks the lowest index on ties.

    The resulting path is not guaranteed to be IOB-valid.
    """
    probs = softmax(e)
    return [int(k) for k in np.argmax(probs, axis=-1)], probs


# --------------------------------------------------------------------------
# CRF head
# --------------------------------------------------------------------------

def crf_score(e, crf: CrfParams, tags: Sequence[int]) -> float:
    e = np.asarray(e, dtype=float)
    if len(tags) != len(e):
        raise ValueError(f"path length {len(tags)} != sentence length {len(e)}")
    K = crf.n_tags
    if any(not 0 <= y < K for y in tags):
        raise IndexError(f"tag index out of range for {K} tags: {list(tags)}")
    total = crf.start[tags[0]] + crf.stop[tags[-1]]
    total += sum(e[t, y] for t, y in enumerate(tags))
    total += sum(crf.trans[a, b] for a, b in zip(tags[:-1], tags[1:]))
    return float(total)


def _forward_scores(e, crf: CrfParams) -> np.ndarray:
    alpha = np.empty_like(e)
    alpha[0] = crf.start + e[0]
    for t in range(1, len(e)):
        alpha[t] = e[t] + logsumexp(alpha[t - 1][:, None] + crf.trans, axis=0)
    return alpha


def _backward_scores(e, crf: CrfParams) -> np.ndarray:
    beta = np.empty_like(e)
    beta[-1] = crf.stop
    for t in range(len(e) - 2, -1, -1):
        beta[t] = logsumexp(crf.trans + (e[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def crf_log_partition(e, crf: CrfParams) -> float:
    """Log of the summed exponentiated scores of all ``K**T`` paths (forward algorithm)."""
    e = np.asarray(e, dtype=float)
    if len(e) == 0:
        raise ValueError("empty sentence")
    alpha = _forward_scores(e, crf)
    return float(logsumexp(alpha[-1] + crf.stop))


def crf_marginals(e, crf: CrfParams) -> tuple[float, np.ndarray, np.ndarray]:
    """Forward-backward: ``(log Z, node marginals (T, K), pairwise marginals (T-1, K, K))``."""
    e = np.asarray(e, dtype=float)
    alpha = _forward_scores(e, crf)
    beta = _backward_scores(e, crf)
    log_z = float(logsumexp(alpha[-1] + crf.stop))
    nodes = np.exp(alpha + beta - log_z)
    pairs = np.exp(alpha[:-1, :, None] + crf.trans[None] + (e[1:] + beta[1:])[:, None, :] - log_z)
    return log_z, nodes, pairs


def viterbi_decode(e, crf: CrfParams, mask: IobMask | None = None) -> tuple[list[int], float]:
    """Highest-scoring path and its score.

    The DP runs right to left (best suffix score per tag) and the path is read
    off left to right taking the lowest index among tied candidates, which
    yields the lexicographically smallest of all maximizing paths. With
    ``mask`` illegal starts and transitions score ``NEG_INF``.
    """
    e = np.asarray(e, dtype=float)
    T = len(e)
    if T == 0:
        raise ValueError("empty sentence")
    start, trans = crf.start, crf.trans
    if mask is not None:
        start = np.where(mask.start, start, NEG_INF)
        trans = np.where(mask.trans, trans, NEG_INF)
    suffix = np.empty_like(e)
    suffix[-1] = crf.stop
    for t in range(T - 2, -1, -1):
        suffix[t] = np.max(trans + (e[t + 1] + suffix[t + 1])[None, :], axis=1)
    first = start + e[0] + suffix[0]
    path = [int(np.argmax(first))]
    for t in range(1, T):
        # Same association as the DP above, so exact ties compare equal.
        cand = trans[path[-1]] + (e[t] + suffix[t])
        path.append(int(np.argmax(cand)))
    return path, float(first[path[0]])


# --------------------------------------------------------------------------
# Losses
# --------------------------------------------------------------------------

def _check_gold(e, gold):
    if len(gold) != len(e):
        raise ValueError(f"gold length {len(gold)} != sentence length {len(e)}")


def loss(e, head: str, gold: Sequence[int], crf: CrfParams | None = None) -> float:
    """Sentence negative log-likelihood under either head."""
    return loss_and_grad(e, head, gold, crf)[0]


def loss_and_grad(e, head: str, gold: Sequence[int], crf: CrfParams | None = None):
    """``(nll, dnll/de, CrfParams of gradients or None)``."""
    e = np.asarray(e, dtype=float)
    _check_gold(e, gold)
    gold = np.asarray(gold, dtype=int)
    T = len(e)
    onehot = np.zeros_like(e)
    onehot[np.arange(T), gold] = 1.0
    if head == "softmax":
        log_probs = e - logsumexp(e, axis=1)[:, None]
        nll = -float(log_probs[np.arange(T), gold].sum())
        return nll, np.exp(log_probs) - onehot, None
    if head == "crf":
        if crf is None:
            raise ValueError("crf head needs CrfParams")
        log_z, nodes, pairs = crf_marginals(e, crf)
        nll = log_z - crf_score(e, crf, gold.tolist())
        d_trans = pairs.sum(axis=0)
        np.add.at(d_trans, (gold[:-1], gold[1:]), -1.0)
        grads = CrfParams(d_trans, nodes[0] - onehot[0], nodes[-1] - onehot[-1])
        return nll, nodes - onehot, grads
    raise ValueError(f"unknown head {head!r}; expected one of {HEADS}")


def decode(e, head: str, crf: CrfParams | None = None, mask: IobMask | None = None) -> list[int]:
    if head == "softmax":
        return softmax_decode(e)[0]
    if head == "crf":
        return viterbi_decode(e, crf, mask)[0]
    raise ValueError(f"unknown head {head!r}; expected one of {HEADS}")

