"""Half-rate convolutional code with soft-decision Viterbi decoding.

Default code: constraint length K=8, generators (0o247, 0o371), trellis
terminated with K-1 zero tail bits, so n input bits produce 2*(n+K-1)
coded bits. LLR sign convention: positive means bit 0 is more likely.
The decoder picks the maximum-likelihood path through the terminated
trellis (start and end in the zero state), breaking metric ties toward
the lower-indexed predecessor state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._jit import njit
from . import codec


@dataclass(frozen=True)
class ConvCodeSpec:
    """Rate-1/2 feedforward code description."""

    constraint_length: int = 8
    generators: tuple[int, int] = (0o247, 0o371)

    def __post_init__(self):
        if self.constraint_length < 2:
            raise ValueError("constraint length must be >= 2")
        top = 1 << self.constraint_length
        for g in self.generators:
            if not 0 < g < top:
                raise ValueError(f"generator {oct(g)} out of range for K={self.constraint_length}")

    @property
    def n_states(self) -> int:
        return 1 << (self.constraint_length - 1)

    @property
    def tail_bits(self) -> int:
        return self.constraint_length - 1


DEFAULT_CODE = ConvCodeSpec()


@lru_cache(maxsize=8)
def _tables(spec: ConvCodeSpec):
    """Trellis tables keyed by destination state.

    For destination ns, the two predecessors are 2*(ns & (S/2-1)) + {0,1}
    (ascending, so index 0 is the lower state) and the input bit is the
    MSB of ns. Returns (pred, sign0, sign1, taps0, taps1).
    """
    k = spec.constraint_length
    n_states = spec.n_states
    g0, g1 = spec.generators
    pred = np.zeros((n_states, 2), dtype=np.int64)
    sign0 = np.zeros((n_states, 2), dtype=np.float64)
    sign1 = np.zeros((n_states, 2), dtype=np.float64)
    for ns in range(n_states):
        u = ns >> (k - 2)
        base = (ns & ((n_states >> 1) - 1)) << 1
        for j, s in enumerate((base, base + 1)):
            reg = (u << (k - 1)) | s
            o0 = bin(reg & g0).count("1") & 1
            o1 = bin(reg & g1).count("1") & 1
            pred[ns, j] = s
            sign0[ns, j] = 1.0 - 2.0 * o0
            sign1[ns, j] = 1.0 - 2.0 * o1
    taps0 = np.array([(g0 >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)
    taps1 = np.array([(g1 >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)
    return pred, sign0, sign1, taps0, taps1


def conv_encode(bits: np.ndarray, spec: ConvCodeSpec = DEFAULT_CODE) -> np.ndarray:
    """Encode bits through the terminated trellis; output interleaves g0, g1."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1 or bits.shape[0] == 0:
        raise ValueError("input bits must be a non-empty 1-D array")
    _, _, _, taps0, taps1 = _tables(spec)
    padded = np.concatenate([bits, np.zeros(spec.tail_bits, dtype=np.uint8)])
    # out_j(t) = parity of taps_j against the last K inputs
    o0 = np.convolve(padded, taps0)[: padded.shape[0]] & 1
    o1 = np.convolve(padded, taps1)[: padded.shape[0]] & 1
    out = np.empty(2 * padded.shape[0], dtype=np.uint8)
    out[0::2] = o0
    out[1::2] = o1
    return out


@njit(cache=True)
def _viterbi(llr0, llr1, pred, sign0, sign1):  # pragma: no cover - via wrapper
    n = llr0.shape[0]
    n_states = pred.shape[0]
    big_neg = -1e300
    pm = np.full(n_states, big_neg)
    pm[0] = 0.0
    pm_next = np.empty(n_states)
    choice = np.empty((n, n_states), dtype=np.uint8)
    for t in range(n):
        a = llr0[t]
        b = llr1[t]
        for ns in range(n_states):
            c0 = pm[pred[ns, 0]] + a * sign0[ns, 0] + b * sign1[ns, 0]
            c1 = pm[pred[ns, 1]] + a * sign0[ns, 1] + b * sign1[ns, 1]
            if c1 > c0:
                pm_next[ns] = c1
                choice[t, ns] = 1
            else:
                pm_next[ns] = c0
                choice[t, ns] = 0
        for ns in range(n_states):
            pm[ns] = pm_next[ns]
    bits = np.empty(n, dtype=np.uint8)
    msb = n_states >> 1
    st = 0  # terminated trellis ends in the zero state
    for t in range(n - 1, -1, -1):
        bits[t] = 1 if (st & msb) != 0 else 0
        st = pred[st, choice[t, st]]
    return bits


def viterbi_decode(llrs: np.ndarray, spec: ConvCodeSpec = DEFAULT_CODE) -> np.ndarray:
    """ML-decode a terminated rate-1/2 frame from per-coded-bit LLRs."""
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim != 1 or llrs.shape[0] % 2 != 0:
        raise ValueError("LLR sequence must be 1-D with even length")
    n = llrs.shape[0] // 2
    if n < spec.tail_bits + 1:
        raise ValueError(f"frame too short: {n} trellis steps, K={spec.constraint_length}")
    pred, sign0, sign1, _, _ = _tables(spec)
    decoded = _viterbi(
        np.ascontiguousarray(llrs[0::2]),
        np.ascontiguousarray(llrs[1::2]),
        pred,
        sign0,
        sign1,
    )
    return decoded[: n - spec.tail_bits]


def checksum_verify(bits: np.ndarray) -> bool:
    """Integrity gate over a decoded bitstream carrying the codec container."""
    bits = np.asarray(bits)
    if bits.size == 0:
        return False
    return codec.checksum_ok(bits.astype(np.uint8))
