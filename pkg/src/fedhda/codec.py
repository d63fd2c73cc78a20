"""Digital source codec for flat parameter vectors.

Pipeline: uniform quantization with step ``delta`` -> adaptive binary
arithmetic coding of the signed levels -> self-describing bit container
with a CRC-32 integrity gate. Decoding is all-or-nothing: any corruption
of the container raises :class:`DecodeFailure`, so a receiver either gets
the exact quantized payload or an explicit failure it can act on.

Binarization per level: a significance flag, a sign flag, then the
magnitude as truncated unary plus an order-0 exponential-Golomb
remainder. Every bin is coded with its own adaptive probability context.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from ._jit import njit

CONTAINER_MAGIC = b"FANB"
CONTAINER_VERSION = 1
# magic(4) + version(1) + delta f32(4) + count u32(4) + crc32(4)
CONTAINER_OVERHEAD_BITS = (4 + 1 + 4 + 4 + 4) * 8

# quantization step-size grid: delta0 * 2**k for k in [0, GRID_SIZE)
GRID_SIZE = 32
GRID_BASE_SHIFT = 15  # delta0 = max|w| / 2**15

# adaptive contexts: significance, sign, four unary magnitude flags,
# exp-Golomb prefix, exp-Golomb suffix
_CTX_SIG = 0
_CTX_SIGN = 1
_CTX_GT = 2
_UNARY_FLAGS = 4
_CTX_EGP = _CTX_GT + _UNARY_FLAGS
_CTX_EGS = _CTX_EGP + 1
_N_CTX = _CTX_EGS + 1

_FULL = (1 << 32) - 1
_HALF = 1 << 31
_QUARTER = 1 << 30
_COUNT_RESCALE = 1 << 13


class DecodeFailure(Exception):
    """Container failed its integrity check; payload is unusable."""


@dataclass
class QuantizedPayload:
    """Signed quantization levels plus the step size that produced them."""

    delta: float
    levels: np.ndarray  # int64

    @property
    def count(self) -> int:
        return int(self.levels.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantizedPayload):
            return NotImplemented
        return self.delta == other.delta and np.array_equal(self.levels, other.levels)


@dataclass
class StepSizeResult:
    """Outcome of the step-size search against a bit budget."""

    delta: float
    encoded_bits: int
    fits_budget: bool


def quantize(w: np.ndarray, delta: float) -> QuantizedPayload:
    """Round w onto the grid {k*delta}, halves away from zero."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    w = np.asarray(w, dtype=np.float64)
    levels = (np.sign(w) * np.floor(np.abs(w) / delta + 0.5)).astype(np.int64)
    return QuantizedPayload(delta=float(delta), levels=levels)


def dequantize(q: QuantizedPayload) -> np.ndarray:
    """Reconstruct the grid values levels * delta (float64)."""
    return q.levels.astype(np.float64) * q.delta


def residual(w: np.ndarray, w_bar: np.ndarray) -> np.ndarray:
    """Elementwise difference w - w_bar carried by the analog path."""
    w = np.asarray(w, dtype=np.float64)
    w_bar = np.asarray(w_bar, dtype=np.float64)
    if w.shape != w_bar.shape:
        raise ValueError(f"length mismatch: {w.shape} vs {w_bar.shape}")
    return w - w_bar


@njit(cache=True)
def _ac_encode(levels, out):  # pragma: no cover - exercised via wrapper
    """Arithmetic-encode signed levels into out (uint8 bits); returns bit count."""
    c0 = np.ones(_N_CTX, dtype=np.int64)
    c1 = np.ones(_N_CTX, dtype=np.int64)
    low = np.int64(0)
    high = np.int64(_FULL)
    pending = 0
    pos = 0
    cap = out.shape[0]
    # scratch for one level's binarization (worst case ~134 bins for int64)
    bins = np.empty(160, dtype=np.uint8)
    ctxs = np.empty(160, dtype=np.int64)

    for n in range(levels.shape[0]):
        v = levels[n]
        # walk the binarization of v, coding each bin in its context
        nb = 0
        if v == 0:
            bins[0] = 0
            ctxs[0] = _CTX_SIG
            nb = 1
        else:
            bins[0] = 1
            ctxs[0] = _CTX_SIG
            bins[1] = 1 if v < 0 else 0
            ctxs[1] = _CTX_SIGN
            nb = 2
            mag = v if v > 0 else -v
            u = mag - 1
            k = 0
            while k < _UNARY_FLAGS:
                if u > k:
                    bins[nb] = 1
                else:
                    bins[nb] = 0
                ctxs[nb] = _CTX_GT + k
                nb += 1
                if u <= k:
                    break
                k += 1
            if u >= _UNARY_FLAGS:
                # order-0 exp-Golomb of the remainder
                rem = u - _UNARY_FLAGS
                val = rem + 1
                q = 0
                t = val
                while t > 1:
                    t >>= 1
                    q += 1
                for _ in range(q):
                    bins[nb] = 1
                    ctxs[nb] = _CTX_EGP
                    nb += 1
                bins[nb] = 0
                ctxs[nb] = _CTX_EGP
                nb += 1
                for j in range(q - 1, -1, -1):
                    bins[nb] = np.uint8((val >> j) & 1)
                    ctxs[nb] = _CTX_EGS
                    nb += 1

        for b in range(nb):
            bit = bins[b]
            ctx = ctxs[b]
            tot = c0[ctx] + c1[ctx]
            rng = high - low + 1
            split = low + (rng * c0[ctx]) // tot - 1
            if bit == 0:
                high = split
                c0[ctx] += 1
            else:
                low = split + 1
                c1[ctx] += 1
            if c0[ctx] + c1[ctx] >= _COUNT_RESCALE:
                c0[ctx] = (c0[ctx] + 1) >> 1
                c1[ctx] = (c1[ctx] + 1) >> 1
            while True:
                if high < _HALF:
                    if pos + pending + 1 > cap:
                        tmp = np.empty(cap * 2 + pending + 64, dtype=np.uint8)
                        tmp[:pos] = out[:pos]
                        out = tmp
                        cap = out.shape[0]
                    out[pos] = 0
                    pos += 1
                    for _ in range(pending):
                        out[pos] = 1
                        pos += 1
                    pending = 0
                elif low >= _HALF:
                    if pos + pending + 1 > cap:
                        tmp = np.empty(cap * 2 + pending + 64, dtype=np.uint8)
                        tmp[:pos] = out[:pos]
                        out = tmp
                        cap = out.shape[0]
                    out[pos] = 1
                    pos += 1
                    for _ in range(pending):
                        out[pos] = 0
                        pos += 1
                    pending = 0
                    low -= _HALF
                    high -= _HALF
                elif low >= _QUARTER and high < _HALF + _QUARTER:
                    pending += 1
                    low -= _QUARTER
                    high -= _QUARTER
                else:
                    break
                low = low << 1
                high = (high << 1) | 1

    # flush: one disambiguating bit plus carried pending bits
    pending += 1
    if pos + pending + 1 > cap:
        tmp = np.empty(cap + pending + 64, dtype=np.uint8)
        tmp[:pos] = out[:pos]
        out = tmp
    if low < _QUARTER:
        out[pos] = 0
        pos += 1
        for _ in range(pending):
            out[pos] = 1
            pos += 1
    else:
        out[pos] = 1
        pos += 1
        for _ in range(pending):
            out[pos] = 0
            pos += 1
    return out, pos


@njit(cache=True)
def _ac_decode(bits, count):  # pragma: no cover - exercised via wrapper
    """Decode count levels from an arithmetic-coded bit array."""
    c0 = np.ones(_N_CTX, dtype=np.int64)
    c1 = np.ones(_N_CTX, dtype=np.int64)
    low = np.int64(0)
    high = np.int64(_FULL)
    nbits = bits.shape[0]
    ptr = 0
    value = np.int64(0)
    for _ in range(32):
        value = value << 1
        if ptr < nbits:
            value |= bits[ptr]
        ptr += 1

    levels = np.empty(count, dtype=np.int64)

    for n in range(count):
        # decode one level by walking the binarization tree
        stage = 0  # 0=sig, 1=sign, 2=unary, 3=eg prefix, 4=eg suffix
        sign = 1
        u = 0
        k = 0
        q = 0
        sj = 0
        val = 0
        done = False
        while not done:
            if stage == 0:
                ctx = _CTX_SIG
            elif stage == 1:
                ctx = _CTX_SIGN
            elif stage == 2:
                ctx = _CTX_GT + k
            elif stage == 3:
                ctx = _CTX_EGP
            else:
                ctx = _CTX_EGS

            tot = c0[ctx] + c1[ctx]
            rng = high - low + 1
            split = low + (rng * c0[ctx]) // tot - 1
            if value <= split:
                bit = 0
                high = split
                c0[ctx] += 1
            else:
                bit = 1
                low = split + 1
                c1[ctx] += 1
            if c0[ctx] + c1[ctx] >= _COUNT_RESCALE:
                c0[ctx] = (c0[ctx] + 1) >> 1
                c1[ctx] = (c1[ctx] + 1) >> 1
            while True:
                if high < _HALF:
                    pass
                elif low >= _HALF:
                    low -= _HALF
                    high -= _HALF
                    value -= _HALF
                elif low >= _QUARTER and high < _HALF + _QUARTER:
                    low -= _QUARTER
                    high -= _QUARTER
                    value -= _QUARTER
                else:
                    break
                low = low << 1
                high = (high << 1) | 1
                value = value << 1
                if ptr < nbits:
                    value |= bits[ptr]
                ptr += 1

            if stage == 0:
                if bit == 0:
                    levels[n] = 0
                    done = True
                else:
                    stage = 1
            elif stage == 1:
                sign = -1 if bit == 1 else 1
                stage = 2
                k = 0
            elif stage == 2:
                if bit == 0:
                    u = k
                    levels[n] = sign * (u + 1)
                    done = True
                else:
                    k += 1
                    if k == _UNARY_FLAGS:
                        stage = 3
                        q = 0
            elif stage == 3:
                if bit == 1:
                    q += 1
                else:
                    if q == 0:
                        levels[n] = sign * (_UNARY_FLAGS + 1)
                        done = True
                    else:
                        stage = 4
                        sj = 0
                        val = 1
            else:
                val = (val << 1) | bit
                sj += 1
                if sj == q:
                    rem = val - 1
                    levels[n] = sign * (_UNARY_FLAGS + rem + 1)
                    done = True
    return levels


def _encode_levels(levels: np.ndarray) -> np.ndarray:
    out = np.empty(4 * levels.shape[0] + 128, dtype=np.uint8)
    buf, nbits = _ac_encode(np.ascontiguousarray(levels, dtype=np.int64), out)
    return buf[:nbits]


def entropy_encode(q: QuantizedPayload) -> np.ndarray:
    """Encode a payload into the self-describing container (uint8 bit array).

    An empty payload produces header + checksum only.
    """
    header = (
        CONTAINER_MAGIC
        + bytes([CONTAINER_VERSION])
        + struct.pack("<f", np.float32(q.delta))
        + struct.pack("<I", q.count)
    )
    if q.count:
        payload_bits = _encode_levels(q.levels)
        pad = (-payload_bits.shape[0]) % 8
        if pad:
            payload_bits = np.concatenate([payload_bits, np.zeros(pad, dtype=np.uint8)])
        payload_bytes = np.packbits(payload_bits).tobytes()
    else:
        payload_bytes = b""
    crc = zlib.crc32(header + payload_bytes) & 0xFFFFFFFF
    container = header + payload_bytes + struct.pack("<I", crc)
    return np.unpackbits(np.frombuffer(container, dtype=np.uint8))


def entropy_decode(bits: np.ndarray) -> QuantizedPayload:
    """Decode a container bit array; raises DecodeFailure on any corruption."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[0] < CONTAINER_OVERHEAD_BITS or bits.shape[0] % 8 != 0:
        raise DecodeFailure("container truncated")
    raw = np.packbits(bits).tobytes()
    if raw[:4] != CONTAINER_MAGIC:
        raise DecodeFailure("bad magic")
    if raw[4] != CONTAINER_VERSION:
        raise DecodeFailure(f"unsupported version {raw[4]}")
    (stored_crc,) = struct.unpack("<I", raw[-4:])
    if zlib.crc32(raw[:-4]) & 0xFFFFFFFF != stored_crc:
        raise DecodeFailure("checksum mismatch")
    (delta,) = struct.unpack("<f", raw[5:9])
    (count,) = struct.unpack("<I", raw[9:13])
    if delta <= 0 and count > 0:
        raise DecodeFailure(f"invalid delta {delta}")
    if count > 1 << 28:
        # implementation bound against pathological (forged) headers
        raise DecodeFailure(f"count {count} exceeds implementation limit")
    if count == 0:
        return QuantizedPayload(delta=float(delta), levels=np.zeros(0, dtype=np.int64))
    payload_bits = np.unpackbits(np.frombuffer(raw[13:-4], dtype=np.uint8))
    levels = _ac_decode(payload_bits, count)
    return QuantizedPayload(delta=float(delta), levels=levels)


def checksum_ok(bits: np.ndarray) -> bool:
    """True iff the container's CRC-32 verifies (no payload decode)."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[0] < CONTAINER_OVERHEAD_BITS or bits.shape[0] % 8 != 0:
        return False
    raw = np.packbits(bits).tobytes()
    if raw[:4] != CONTAINER_MAGIC or raw[4] != CONTAINER_VERSION:
        return False
    (stored_crc,) = struct.unpack("<I", raw[-4:])
    return (zlib.crc32(raw[:-4]) & 0xFFFFFFFF) == stored_crc


def delta_grid(w: np.ndarray) -> np.ndarray:
    """Candidate step sizes delta0 * 2**k, float32-exact, ascending.

    delta0 = max|w| / 2**15; a zero vector gets the unit grid so that
    quantization stays well-defined (all levels are zero regardless).
    """
    w = np.asarray(w, dtype=np.float64)
    peak = float(np.max(np.abs(w))) if w.size else 0.0
    if peak == 0.0 or not np.isfinite(peak):
        peak = 1.0
    base = np.float32(peak) * np.float32(2.0**-GRID_BASE_SHIFT)
    return np.array(
        [np.float64(base * np.float32(2.0**k)) for k in range(GRID_SIZE)],
        dtype=np.float64,
    )


def select_step_size(w: np.ndarray, bit_budget: int) -> StepSizeResult:
    """Smallest grid delta whose encoded container fits in bit_budget.

    Candidate sizes are measured by actually encoding, never estimated.
    If nothing fits, the largest-delta candidate is returned with
    ``fits_budget=False``.
    """
    if bit_budget <= CONTAINER_OVERHEAD_BITS:
        raise ValueError(
            f"bit_budget {bit_budget} does not exceed container overhead "
            f"{CONTAINER_OVERHEAD_BITS}"
        )
    grid = delta_grid(w)

    sizes: dict[int, int] = {}

    def encoded_bits(k: int) -> int:
        if k not in sizes:
            sizes[k] = int(entropy_encode(quantize(w, grid[k])).shape[0])
        return sizes[k]

    # coded size is (near-)monotone non-increasing in delta: bisect for the
    # smallest fitting index, then walk down to absorb local non-monotonicity
    lo, hi = 0, GRID_SIZE - 1
    if encoded_bits(hi) > bit_budget:
        return StepSizeResult(float(grid[hi]), encoded_bits(hi), False)
    while lo < hi:
        mid = (lo + hi) // 2
        if encoded_bits(mid) <= bit_budget:
            hi = mid
        else:
            lo = mid + 1
    while hi > 0 and encoded_bits(hi - 1) <= bit_budget:
        hi -= 1
    return StepSizeResult(float(grid[hi]), encoded_bits(hi), True)
