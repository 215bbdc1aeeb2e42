"""LSTM cell, directional unrolling and the bidirectional layer.

The cell has no peepholes::

    i = sigmoid(W_i x + U_i h' + b_i)
    f = sigmoid(W_f x + U_f h' + b_f)
    c = f * c' + i * tanh(W_c x + U_c h' + b_c)
    o = sigmoid(W_o x + U_o h' + b_o)
    h = o * tanh(c)

Gate blocks are stacked in the order i, f, c, o along the first axis of
``W``, ``U`` and ``b``.

All sequence functions accept either a single sequence ``(T, D)`` or a
padded batch ``(T, B, D)`` with a ``(T, B)`` mask; masked-out steps carry
the previous state forward unchanged, so the state at the last step is the
state at each sequence's own end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GATES = ("i", "f", "c", "o")


def sigmoid(x):
    # tanh form never overflows.
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class LstmParams:
    W: np.ndarray  # (4H, D)
    U: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)

    def __post_init__(self):
        h4 = self.b.shape[0]
        if h4 % 4 or self.W.shape[0] != h4 or self.U.shape != (h4, h4 // 4):
            raise ValueError(
                f"inconsistent LSTM shapes W{self.W.shape} U{self.U.shape} b{self.b.shape}")

    @property
    def hidden_size(self) -> int:
        return self.b.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.W.shape[1]

    def gate(self, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Views ``(W_g, U_g, b_g)`` of the block for gate ``name``."""
        k = GATES.index(name)
        H = self.hidden_size
        sl = slice(k * H, (k + 1) * H)
        return self.W[sl], self.U[sl], self.b[sl]

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int) -> "LstmParams":
        return cls(np.zeros((4 * hidden_size, input_size)),
                   np.zeros((4 * hidden_size, hidden_size)),
                   np.zeros(4 * hidden_size))

    @classmethod
    def from_gates(cls, **blocks) -> "LstmParams":
        """Build from per-gate arrays such as ``W_i=..., U_i=..., b_i=...``."""
        W = np.concatenate([blocks[f"W_{g}"] for g in GATES], axis=0)
        U = np.concatenate([blocks[f"U_{g}"] for g in GATES], axis=0)
        b = np.concatenate([blocks[f"b_{g}"] for g in GATES], axis=0)
        return cls(W, U, b)


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_size: int, batch: int | None = None) -> "LstmState":
        shape = (hidden_size,) if batch is None else (batch, hidden_size)
        return cls(np.zeros(shape), np.zeros(shape))


def _gates(x, h_prev, p: LstmParams):
    H = p.hidden_size
    a = x @ p.W.T + h_prev @ p.U.T + p.b
    i = sigmoid(a[..., :H])
    f = sigmoid(a[..., H:2 * H])
    g = np.tanh(a[..., 2 * H:3 * H])
    o = sigmoid(a[..., 3 * H:])
    return i, f, g, o


def lstm_step(x, prev: LstmState, p: LstmParams) -> LstmState:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != p.input_size or prev.h.shape[-1] != p.hidden_size:
        raise ValueError(f"input {x.shape} / state {prev.h.shape} do not fit "
                         f"LSTM {p.input_size}->{p.hidden_size}")
    i, f, g, o = _gates(x, prev.h, p)
    c = f * prev.c + i * g
    return LstmState(o * np.tanh(c), c)


def lstm_forward(xs, p: LstmParams, init: LstmState | None = None) -> list[LstmState]:
    """Run the cell over ``xs`` left to right; one state per step."""
    xs = np.asarray(xs, dtype=float)
    if len(xs) == 0:
        raise ValueError("lstm_forward needs a non-empty sequence")
    batch = xs.shape[1] if xs.ndim == 3 else None
    state = init if init is not None else LstmState.zeros(p.hidden_size, batch)
    states = []
    for x in xs:
        state = lstm_step(x, state, p)
        states.append(state)
    return states


def bilstm_forward(xs, fwd: LstmParams, bwd: LstmParams) -> np.ndarray:
    """Per-step ``[h_fwd; h_bwd]`` for a single sequence ``(T, D)``."""
    if fwd.hidden_size != bwd.hidden_size:
        raise ValueError(f"direction sizes differ: {fwd.hidden_size} vs {bwd.hidden_size}")
    xs = np.asarray(xs, dtype=float)
    hf = np.stack([s.h for s in lstm_forward(xs, fwd)])
    hb = np.stack([s.h for s in lstm_forward(xs[::-1], bwd)])[::-1]
    return np.concatenate([hf, hb], axis=-1)


# --------------------------------------------------------------------------
# Training path: cached forward and backpropagation through time
# --------------------------------------------------------------------------

@dataclass
class LstmCache:
    xs: np.ndarray
    mask: np.ndarray | None
    h: np.ndarray      # (T+1, ..., H), h[0] is the initial state
    c: np.ndarray
    c_new: np.ndarray  # unmasked candidate cell at each step
    i: np.ndarray
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray


def lstm_forward_train(xs, p: LstmParams, mask=None) -> tuple[np.ndarray, LstmCache]:
    """Forward pass from a zero state keeping what :func:`lstm_backward` needs.

    Returns all hidden states ``(T, ..., H)`` and the cache.
    """
    xs = np.asarray(xs, dtype=float)
    T = len(xs)
    if T == 0:
        raise ValueError("lstm_forward_train needs a non-empty sequence")
    H = p.hidden_size
    lead = xs.shape[1:-1]
    h = np.zeros((T + 1, *lead, H))
    c = np.zeros((T + 1, *lead, H))
    c_new = np.empty((T, *lead, H))
    gi, gf, gg, go = (np.empty((T, *lead, H)) for _ in range(4))
    for t in range(T):
        i, f, g, o = _gates(xs[t], h[t], p)
        cn = f * c[t] + i * g
        hn = o * np.tanh(cn)
        if mask is not None:
            m = mask[t][..., None]
            cn_kept = m * cn + (1.0 - m) * c[t]
            hn = m * hn + (1.0 - m) * h[t]
        else:
            cn_kept = cn
        h[t + 1], c[t + 1], c_new[t] = hn, cn_kept, cn
        gi[t], gf[t], gg[t], go[t] = i, f, g, o
    cache = LstmCache(xs, None if mask is None else np.asarray(mask, dtype=float),
                      h, c, c_new, gi, gf, gg, go)
    return h[1:], cache


def lstm_backward(dh_out, cache: LstmCache, p: LstmParams) -> tuple[np.ndarray, LstmParams]:
    """Gradients w.r.t. inputs and parameters given ``dL/dh`` at every step."""
    T = len(cache.xs)
    H = p.hidden_size
    dW = np.zeros_like(p.W)
    dU = np.zeros_like(p.U)
    db = np.zeros_like(p.b)
    dxs = np.zeros_like(cache.xs)
    dh_next = np.zeros_like(cache.h[0])
    dc_next = np.zeros_like(cache.c[0])
    for t in reversed(range(T)):
        dh = dh_out[t] + dh_next
        dc = dc_next
        i, f, g, o = cache.i[t], cache.f[t], cache.g[t], cache.o[t]
        tc = np.tanh(cache.c_new[t])
        if cache.mask is not None:
            m = cache.mask[t][..., None]
            dh_carry, dc_carry = (1.0 - m) * dh, (1.0 - m) * dc
            dh, dc = m * dh, m * dc
        else:
            dh_carry = dc_carry = 0.0
        dcn = dc + dh * o * (1.0 - tc ** 2)
        da = np.concatenate([
            dcn * g * i * (1.0 - i),
            dcn * cache.c[t] * f * (1.0 - f),
            dcn * i * (1.0 - g ** 2),
            dh * tc * o * (1.0 - o),
        ], axis=-1)
        x2 = cache.xs[t].reshape(-1, cache.xs.shape[-1])
        h2 = cache.h[t].reshape(-1, H)
        da2 = da.reshape(-1, 4 * H)
        dW += da2.T @ x2
        dU += da2.T @ h2
        db += da2.sum(axis=0)
        dxs[t] = da @ p.W
        dh_next = da @ p.U + dh_carry
        dc_next = dcn * f + dc_carry
    return dxs, LstmParams(dW, dU, db)
