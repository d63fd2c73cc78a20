"""Hybrid digital-analog transmission of neural-network parameters for
federated learning over noisy wireless links, simulated end to end.

Layers: models (dense classifier + data), codec (quantization +
arithmetic coding + CRC container), convcode (rate-1/2 convolutional
code + soft Viterbi), phy (power split, I/Q superposition, AWGN, MMSE),
schemes (hybrid / digital / analog pipelines), federation (round-robin
loop), sweep/plots/cli (experiment harness).
"""

from . import codec, config, convcode, federation, models, phy, plots, schemes, sweep

__all__ = [
    "codec",
    "config",
    "convcode",
    "federation",
    "models",
    "phy",
    "plots",
    "schemes",
    "sweep",
]

__version__ = "0.1.0"
