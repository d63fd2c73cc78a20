"""End-to-end parameter transmission schemes.

Three pipelines behind one interface, ``transmit(v, cfg, channel) ->
(vector | None, TransmissionReport)``:

* ``hybrid``   - quantize + arithmetic-code + convolutional-code + BPSK on
  the I component, power-normalized residuals on the Q component; the
  receiver Viterbi-decodes, checks the container CRC, and adds the
  MMSE-denoised residuals to the dequantized baseline. A checksum miss is
  a total failure (the residuals reference an unknown baseline).
* ``digital``  - the same digital chain at full power, BPSK or 4-QAM, no
  residual path; quality is floored by the quantization step.
* ``analog``   - the whole vector is power-normalized onto symbols and
  MMSE-denoised; degrades gracefully and never fails.

A fourth kind, ``perfect``, passes vectors through unchanged and exists
for oracle/regression tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import codec, convcode, phy

SCHEME_KINDS = ("hybrid", "digital", "analog", "perfect")


@dataclass
class SchemeConfig:
    """Everything a scheme needs besides the channel itself."""

    kind: str
    symbol_budget: int
    p_total: float = 1.0
    noise_power: float = 0.1  # nominal N0 used by the fixed power plan
    gamma_0_db: float = 5.0
    modulation_order: int = 4  # digital-only baseline: 2 (BPSK) or 4 (4-QAM)
    code: convcode.ConvCodeSpec = field(default_factory=convcode.ConvCodeSpec)
    analog_iq: bool = False  # pack two parameters per symbol in the analog scheme
    track_channel: bool = False  # recompute N0 from the actual channel each call

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.symbol_budget <= 0:
            raise ValueError("symbol_budget must be positive")
        if self.modulation_order not in (2, 4):
            raise ValueError("modulation_order must be 2 or 4")
        if self.p_total <= 0 or self.noise_power <= 0:
            raise ValueError("p_total and noise_power must be positive")

    @property
    def gamma_0(self) -> float:
        return 10.0 ** (self.gamma_0_db / 10.0)


@dataclass
class TransmissionReport:
    """Per-transmission accounting; ``mse`` is a sender-side diagnostic."""

    scheme: str
    success: bool
    symbols_used: int
    budget: int
    budget_ok: bool
    mse: float
    failure_cause: str = ""
    delta: float = math.nan
    encoded_bits: int = 0
    n_digital: int = 0
    n_analog: int = 0
    m: float = 0.0
    p_digital: float = 0.0
    p_analog: float = 0.0


def _plan(cfg: SchemeConfig, channel: phy.ChannelConfig) -> phy.PowerPlan:
    n0 = channel.noise_power if cfg.track_channel else cfg.noise_power
    return phy.plan_power(cfg.p_total, n0, cfg.gamma_0)


def _info_bit_budget(cfg: SchemeConfig, bits_per_symbol: int) -> int:
    budget = (cfg.symbol_budget * bits_per_symbol) // 2 - cfg.code.tail_bits
    if budget <= codec.CONTAINER_OVERHEAD_BITS:
        raise ValueError(
            f"symbol_budget {cfg.symbol_budget} leaves no room for the "
            f"bitstream container ({budget} info bits available)"
        )
    return budget


def _encode_digital(v: np.ndarray, bit_budget: int):
    """Step-size search + container + channel code for a vector."""
    step = codec.select_step_size(v, bit_budget)
    q = codec.quantize(v, step.delta)
    container = codec.entropy_encode(q)
    coded = convcode.conv_encode(container)
    w_bar = codec.dequantize(q)
    return step, container, coded, w_bar


def _analog_chain(
    v: np.ndarray,
    power: float,
    cfg: SchemeConfig,
    channel: phy.ChannelConfig,
    plan: phy.PowerPlan,
) -> tuple[np.ndarray, TransmissionReport]:
    """Power-normalized analog mapping shared by analog and degenerate hybrid."""
    m_count = v.shape[0]
    if cfg.analog_iq:
        n_sym = (m_count + 1) // 2
        per_axis = power / 2.0
        m = phy.normalization_factor(v, per_axis)
        padded = np.concatenate([v, np.zeros(m_count % 2, dtype=np.float64)])
        symbols = m * padded[0::2] + 1j * (m * padded[1::2])
        frame = phy.SymbolFrame(symbols, 0, n_sym, m, plan)
        received = phy.awgn_channel(frame, channel)
        est = np.empty(padded.shape[0], dtype=np.float64)
        est[0::2] = phy.mmse_denoise(received.symbols.real, m, channel.sigma2)
        est[1::2] = phy.mmse_denoise(received.symbols.imag, m, channel.sigma2)
        est = est[:m_count]
    else:
        n_sym = m_count
        m = phy.normalization_factor(v, power)
        frame = phy.SymbolFrame((m * v) + 0j, 0, n_sym, m, plan)
        received = phy.awgn_channel(frame, channel)
        est = phy.mmse_denoise(received.symbols.real, m, channel.sigma2)
    report = TransmissionReport(
        scheme=cfg.kind,
        success=True,
        symbols_used=n_sym,
        budget=cfg.symbol_budget,
        budget_ok=n_sym <= cfg.symbol_budget,
        mse=float(np.mean((est - v) ** 2)) if m_count else 0.0,
        m=m,
        n_analog=n_sym,
        p_digital=0.0,
        p_analog=power,
    )
    return est, report


def hybrid_transmit(
    v: np.ndarray, cfg: SchemeConfig, channel: phy.ChannelConfig
) -> tuple[np.ndarray | None, TransmissionReport]:
    """Digital baseline on I superposed with analog residuals on Q.

    When the fixed plan cannot afford the digital stream (P_d = 0) the
    sender skips the digital stage entirely and the call degenerates to
    the analog scheme at full power.
    """
    v = np.asarray(v, dtype=np.float64)
    plan = _plan(cfg, channel)
    if plan.p_digital == 0.0:
        return _analog_chain(v, plan.p_total, cfg, channel, plan)

    # each coded bit occupies one I slot, so one coded bit per symbol
    step, container, coded, w_bar = _encode_digital(v, _info_bit_budget(cfg, 1))
    res = codec.residual(v, w_bar)
    frame = phy.modulate_hybrid(coded, res, plan)
    received = phy.awgn_channel(frame, channel)

    report = TransmissionReport(
        scheme=cfg.kind,
        success=False,
        symbols_used=len(frame),
        budget=cfg.symbol_budget,
        budget_ok=step.fits_budget and len(frame) <= cfg.symbol_budget,
        mse=math.nan,
        delta=step.delta,
        encoded_bits=step.encoded_bits,
        n_digital=frame.n_digital,
        n_analog=frame.n_analog,
        m=frame.m,
        p_digital=plan.p_digital,
        p_analog=plan.p_analog,
    )

    llrs = phy.compute_llr(
        received.symbols.real[: frame.n_digital], plan.p_digital, channel.sigma2
    )
    decoded_bits = convcode.viterbi_decode(llrs, cfg.code)
    try:
        payload = codec.entropy_decode(decoded_bits)
    except codec.DecodeFailure as exc:
        report.failure_cause = f"checksum: {exc}"
        return None, report

    w_bar_rx = codec.dequantize(payload)
    r_hat = phy.mmse_denoise(
        received.symbols.imag[: frame.n_analog], frame.m, channel.sigma2
    )
    out = w_bar_rx + r_hat
    report.success = True
    report.mse = float(np.mean((out - v) ** 2)) if v.size else 0.0
    return out, report


def digital_transmit(
    v: np.ndarray, cfg: SchemeConfig, channel: phy.ChannelConfig
) -> tuple[np.ndarray | None, TransmissionReport]:
    """Quantize + entropy-code + convolutional-code at full power, no residuals."""
    v = np.asarray(v, dtype=np.float64)
    order = cfg.modulation_order
    bps = 1 if order == 2 else 2
    step, container, coded, w_bar = _encode_digital(v, _info_bit_budget(cfg, bps))

    symbols = phy.qam_modulate(coded, order, cfg.p_total)
    n_sym = symbols.shape[0]
    plan = phy.PowerPlan(
        p_total=cfg.p_total,
        noise_power=cfg.noise_power,
        gamma_0=cfg.gamma_0,
        p_threshold=cfg.p_total,
        p_digital=cfg.p_total,
        p_analog=0.0,
    )
    frame = phy.SymbolFrame(symbols, n_sym, 0, 0.0, plan)
    received = phy.awgn_channel(frame, channel)

    report = TransmissionReport(
        scheme=cfg.kind,
        success=False,
        symbols_used=n_sym,
        budget=cfg.symbol_budget,
        budget_ok=step.fits_budget and n_sym <= cfg.symbol_budget,
        mse=math.nan,
        delta=step.delta,
        encoded_bits=step.encoded_bits,
        n_digital=coded.shape[0],
        p_digital=cfg.p_total,
    )

    llrs = phy.qam_llr(received.symbols, order, cfg.p_total, channel.sigma2)
    decoded_bits = convcode.viterbi_decode(llrs[: coded.shape[0]], cfg.code)
    try:
        payload = codec.entropy_decode(decoded_bits)
    except codec.DecodeFailure as exc:
        report.failure_cause = f"checksum: {exc}"
        return None, report

    out = codec.dequantize(payload)
    report.success = True
    report.mse = float(np.mean((out - v) ** 2)) if v.size else 0.0
    return out, report


def analog_transmit(
    v: np.ndarray, cfg: SchemeConfig, channel: phy.ChannelConfig
) -> tuple[np.ndarray, TransmissionReport]:
    """Map the whole vector onto symbols at full power; never fails."""
    v = np.asarray(v, dtype=np.float64)
    plan = phy.PowerPlan(
        p_total=cfg.p_total,
        noise_power=cfg.noise_power,
        gamma_0=cfg.gamma_0,
        p_threshold=math.inf,
        p_digital=0.0,
        p_analog=cfg.p_total,
    )
    return _analog_chain(v, cfg.p_total, cfg, channel, plan)


def perfect_transmit(
    v: np.ndarray, cfg: SchemeConfig, channel: phy.ChannelConfig
) -> tuple[np.ndarray, TransmissionReport]:
    """Identity channel for oracle and regression tests."""
    v = np.asarray(v, dtype=np.float64)
    report = TransmissionReport(
        scheme=cfg.kind,
        success=True,
        symbols_used=0,
        budget=cfg.symbol_budget,
        budget_ok=True,
        mse=0.0,
    )
    return v.copy(), report


_DISPATCH = {
    "hybrid": hybrid_transmit,
    "digital": digital_transmit,
    "analog": analog_transmit,
    "perfect": perfect_transmit,
}


def transmit(
    v: np.ndarray, cfg: SchemeConfig, channel: phy.ChannelConfig
) -> tuple[np.ndarray | None, TransmissionReport]:
    """Send a flat vector through the configured scheme."""
    return _DISPATCH[cfg.kind](v, cfg, channel)
