"""Physical layer: power planning, I/Q superposition, AWGN, LLRs, MMSE.

Power split: the digital stream gets the power needed to hit the required
SNR gamma_0 over the (nominal) noise power, P_th = N0 * gamma_0, capped
at the total budget; the analog stream gets the remainder. Hybrid frames
carry BPSK on the in-phase component and normalized residuals on the
quadrature component, so the two streams do not interfere.

Noise is parameterized per real dimension: sigma2 = P_t / (2 * 10^(SNR/10)),
i.e. channel SNR counts total symbol power over total complex noise power
E|n|^2 = 2*sigma2. The MMSE shrinkage r_hat = m/(m^2 + sigma2) * y then
applies sigma2 exactly as written.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PowerPlan:
    """Digital/analog power split for one transmission."""

    p_total: float
    noise_power: float
    gamma_0: float  # linear
    p_threshold: float
    p_digital: float
    p_analog: float


@dataclass(frozen=True)
class ChannelConfig:
    """AWGN channel state: per-real-dimension variance and noise seed."""

    snr_db: float
    seed: int | tuple
    sigma2: float

    @classmethod
    def for_power(cls, p_total: float, snr_db: float, seed) -> "ChannelConfig":
        sigma2 = p_total / (2.0 * 10.0 ** (snr_db / 10.0))
        return cls(snr_db=float(snr_db), seed=seed, sigma2=float(sigma2))

    @property
    def noise_power(self) -> float:
        """Total complex noise power E|n|^2."""
        return 2.0 * self.sigma2


@dataclass
class SymbolFrame:
    """Complex symbols plus the side information a receiver needs.

    Side information (m, stream lengths, power plan) is treated as
    perfectly known at the receiver, as in metadata-on-a-robust-channel
    simulators.
    """

    symbols: np.ndarray  # complex128
    n_digital: int
    n_analog: int
    m: float
    plan: PowerPlan

    def __len__(self) -> int:
        return int(self.symbols.shape[0])


def plan_power(p_total: float, noise_power: float, gamma_0: float) -> PowerPlan:
    """Split p_total into digital and analog shares.

    P_th = noise_power * gamma_0; the digital stream gets exactly P_th
    when affordable and nothing otherwise; the analog stream takes the rest.
    """
    if p_total <= 0 or noise_power <= 0 or gamma_0 <= 0:
        raise ValueError("p_total, noise_power and gamma_0 must all be positive")
    p_th = noise_power * gamma_0
    p_d = p_th if p_th <= p_total else 0.0
    return PowerPlan(
        p_total=p_total,
        noise_power=noise_power,
        gamma_0=gamma_0,
        p_threshold=p_th,
        p_digital=p_d,
        p_analog=p_total - p_d,
    )


def normalization_factor(residuals: np.ndarray, p_analog: float) -> float:
    """Scale m = sqrt(M * P_a / sum(r_j^2)) making mean analog power P_a.

    Zero residual energy (or zero analog power) degenerates to m = 0: the
    analog stream carries nothing.
    """
    if p_analog < 0:
        raise ValueError("p_analog must be non-negative")
    r = np.asarray(residuals, dtype=np.float64)
    energy = float(np.sum(r * r))
    if energy == 0.0 or p_analog == 0.0:
        return 0.0
    return float(np.sqrt(r.shape[0] * p_analog / energy))


def bpsk_map(bits: np.ndarray) -> np.ndarray:
    """bit 0 -> +1, bit 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def modulate_hybrid(
    coded_bits: np.ndarray, residuals: np.ndarray, plan: PowerPlan
) -> SymbolFrame:
    """Superpose sqrt(P_d)*BPSK on I with m*residual on Q.

    The frame spans max(n_digital, n_analog) symbols; the shorter stream
    is zero-padded (padding carries no power).
    """
    coded_bits = np.asarray(coded_bits, dtype=np.uint8)
    residuals = np.asarray(residuals, dtype=np.float64)
    n_d = int(coded_bits.shape[0])
    n_a = int(residuals.shape[0])
    m = normalization_factor(residuals, plan.p_analog) if n_a else 0.0
    n = max(n_d, n_a)
    i_part = np.zeros(n, dtype=np.float64)
    q_part = np.zeros(n, dtype=np.float64)
    if n_d:
        i_part[:n_d] = np.sqrt(plan.p_digital) * bpsk_map(coded_bits)
    if n_a:
        q_part[:n_a] = m * residuals
    return SymbolFrame(
        symbols=i_part + 1j * q_part, n_digital=n_d, n_analog=n_a, m=m, plan=plan
    )


def awgn_channel(frame: SymbolFrame, cfg: ChannelConfig) -> SymbolFrame:
    """y = x + n with i.i.d. N(0, sigma2) per real dimension, seeded."""
    rng = np.random.default_rng(cfg.seed)
    n = frame.symbols.shape[0]
    scale = np.sqrt(cfg.sigma2)
    noise = rng.standard_normal(n) * scale + 1j * (rng.standard_normal(n) * scale)
    return SymbolFrame(
        symbols=frame.symbols + noise,
        n_digital=frame.n_digital,
        n_analog=frame.n_analog,
        m=frame.m,
        plan=frame.plan,
    )


def compute_llr(received_i: np.ndarray, p_digital: float, sigma2: float) -> np.ndarray:
    """Per-coded-bit LLR = 2*sqrt(P_d)*y_I/sigma2 (positive favors bit 0)."""
    if p_digital <= 0:
        raise ValueError("digital stream absent (p_digital == 0)")
    received_i = np.asarray(received_i, dtype=np.float64)
    return 2.0 * np.sqrt(p_digital) * received_i / sigma2


def mmse_denoise(received_q: np.ndarray, m: float, sigma2: float) -> np.ndarray:
    """Linear MMSE shrinkage r_hat = m/(m^2 + sigma2) * y_Q; m=0 gives zeros."""
    if m < 0:
        raise ValueError("normalization factor must be non-negative")
    received_q = np.asarray(received_q, dtype=np.float64)
    if m == 0.0:
        return np.zeros_like(received_q)
    return (m / (m * m + sigma2)) * received_q


def qam_modulate(bits: np.ndarray, order: int, power: float) -> np.ndarray:
    """Digital-only constellation mapping at the given mean symbol power.

    order 2 is BPSK on I; order 4 is Gray-mapped 4-QAM with one bit per
    axis at power/2 each. Odd-length 4-QAM inputs are zero-padded.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if order == 2:
        return np.sqrt(power) * bpsk_map(bits) + 0j
    if order == 4:
        if bits.shape[0] % 2:
            bits = np.concatenate([bits, np.zeros(1, dtype=np.uint8)])
        amp = np.sqrt(power / 2.0)
        return amp * bpsk_map(bits[0::2]) + 1j * amp * bpsk_map(bits[1::2])
    raise ValueError(f"unsupported modulation order {order}")


def qam_llr(received: np.ndarray, order: int, power: float, sigma2: float) -> np.ndarray:
    """Per-bit LLRs for qam_modulate output, per-axis independent."""
    received = np.asarray(received, dtype=np.complex128)
    if order == 2:
        return 2.0 * np.sqrt(power) * received.real / sigma2
    if order == 4:
        amp = np.sqrt(power / 2.0)
        llrs = np.empty(2 * received.shape[0], dtype=np.float64)
        llrs[0::2] = 2.0 * amp * received.real / sigma2
        llrs[1::2] = 2.0 * amp * received.imag / sigma2
        return llrs
    raise ValueError(f"unsupported modulation order {order}")
