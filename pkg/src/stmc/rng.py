"""Counter-based noise streams for reproducible sampling.

Each (seed, stream) pair addresses an independent Philox counter block, so a
noise array is a pure function of (seed, stream, shape) and element [i, j] of
that array is a pure function of (seed, stream, i, j). The generation loop
uses stream 0 for the initial noise and stream t for the re-noising at step t;
because every array is drawn at a synchronization point for the full buffer,
concurrent crop evaluation cannot perturb the stream.
"""

from __future__ import annotations

import numpy as np

__all__ = ["noise_array", "init_noise", "step_noise"]

_MASK64 = (1 << 64) - 1


def noise_array(seed: int, stream: int, shape: tuple[int, ...]) -> np.ndarray:
    """Standard-normal array addressed by (seed, stream)."""
    if stream < 0:
        raise ValueError("stream must be non-negative")
    bitgen = np.random.Philox(key=seed & _MASK64, counter=[0, stream & _MASK64, 0, 0])
    return np.random.Generator(bitgen).standard_normal(shape, dtype=np.float64)


def init_noise(seed: int, shape: tuple[int, ...]) -> np.ndarray:
    """The x_T initialization noise."""
    return noise_array(seed, 0, shape)


def step_noise(seed: int, t: int, shape: tuple[int, ...]) -> np.ndarray:
    """The re-noising draw applied after composing step t (t >= 1)."""
    if t < 1:
        raise ValueError("steps are indexed from 1")
    return noise_array(seed, t, shape)
