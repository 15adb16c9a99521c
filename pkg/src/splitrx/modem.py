"""M-PPM bit mapping, spreading, and per-chip detector outputs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelDraw, NoiseDraw
from .core import LinkParams, is_power_of_two

__all__ = [
    "ChipObservation",
    "SymbolFrame",
    "demodulate",
    "index_bits",
    "modulate",
    "spread",
    "spread_positions",
    "synthesize",
    "synthesize_chip",
]


@dataclass(frozen=True)
class SymbolFrame:
    bits: np.ndarray
    indices: np.ndarray
    m_order: int = 2


@dataclass(frozen=True)
class ChipObservation:
    y1: np.ndarray
    y2: np.ndarray
    truth: int
    draw: ChannelDraw


def _as_bits(bits) -> np.ndarray:
    if isinstance(bits, str):
        bits = [int(ch) for ch in bits]
    arr = np.asarray(bits, dtype=np.int64).ravel()
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bits must be 0/1")
    return arr


def modulate(bits, m_order: int) -> SymbolFrame:
    """Natural-binary mapping: the k bits of a symbol, MSB first, give its slot."""
    if not is_power_of_two(m_order) or m_order < 2:
        raise ValueError(f"M={m_order} is not a power of two >= 2")
    arr = _as_bits(bits)
    k = int(math.log2(m_order))
    if arr.size % k:
        raise ValueError(f"{arr.size} bits cannot be split into {k}-bit symbols")
    weights = 1 << np.arange(k - 1, -1, -1)
    idx = arr.reshape(-1, k) @ weights
    return SymbolFrame(arr, idx.astype(np.int64), m_order)


def index_bits(indices, m_order: int) -> np.ndarray:
    """Inverse of the mapping, shape ``(..., k)``."""
    k = int(math.log2(m_order))
    idx = np.asarray(indices, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1)
    return (idx[..., None] >> shifts) & 1


def demodulate(indices, m_order: int) -> np.ndarray:
    return index_bits(indices, m_order).reshape(-1)


def spread_positions(bits, code) -> np.ndarray:
    """Chip slots ``bit XOR NOT code[i]`` for every bit, shape ``(n_bits, Ns)``."""
    b = _as_bits(bits)
    c = _as_bits(code)
    if c.size == 0:
        raise ValueError("empty spreading code")
    return b[:, None] ^ (1 - c[None, :])


def spread(frame: SymbolFrame, code) -> SymbolFrame:
    """Expand each 2-PPM bit into ``len(code)`` chips."""
    if frame.m_order != 2:
        raise NotImplementedError("spreading is only defined for 2-PPM")
    chips = spread_positions(frame.indices, code).reshape(-1)
    return SymbolFrame(chips.copy(), chips, 2)


def synthesize(indices, p: LinkParams, h, noise: NoiseDraw):
    """Vectorised detector integrals for a batch of chips.

    ``indices`` has shape ``(n,)``; ``h``, ``noise.n2_pulse`` broadcast
    against it; ``noise.n1`` and ``noise.eps`` have shape ``(n, M)``.
    Returns ``(y1, y2)`` of shape ``(n, M)``.
    """
    idx = np.asarray(indices, dtype=np.int64)
    h = np.asarray(h, dtype=float)
    ep, rho = p.ep, p.rho
    onehot = np.zeros(np.shape(noise.n1), dtype=bool)
    np.put_along_axis(onehot, idx[..., None], True, axis=-1)
    sig1 = (h * math.sqrt(rho) * ep)[..., None]
    y1 = np.where(onehot, sig1, 0.0) + math.sqrt(rho * ep) * noise.n1
    pulse = (h * h * ep + 2.0 * h * math.sqrt(ep) * np.asarray(noise.n2_pulse))[..., None]
    y2 = (1.0 - rho) * (np.where(onehot, pulse, 0.0) + noise.eps)
    return y1, y2


def synthesize_chip(index: int, p: LinkParams, draw: ChannelDraw,
                    noise: NoiseDraw) -> ChipObservation:
    if not 0 <= index < p.m_order:
        raise ValueError(f"index {index} outside 0..{p.m_order - 1}")
    y1, y2 = synthesize(np.array([index]), p, np.array([draw.h]),
                        NoiseDraw(np.atleast_2d(noise.n1),
                                  np.atleast_1d(noise.n2_pulse),
                                  np.atleast_2d(noise.eps)))
    return ChipObservation(y1[0], y2[0], int(index), draw)
