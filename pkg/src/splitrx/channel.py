"""Random draws for fading, channel-estimation error and receiver noise.

Every sampler takes an explicit :class:`numpy.random.Generator` and an
optional ``size``; with ``size=None`` a scalar draw is returned, otherwise
arrays whose leading axis indexes chips.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import ChannelModel, LinkParams

__all__ = [
    "ChannelDraw",
    "NoiseDraw",
    "SquareNoiseMode",
    "draw_channel",
    "sample_estimation_error",
    "sample_fading",
    "sample_noise",
]


class SquareNoiseMode(str, enum.Enum):
    #: N(c N0, c N0^2) energies, the model the analysis is built on.
    GAUSSIAN_APPROX = "gaussian"
    #: Gamma(c, N0) energies: same two moments, never negative.
    EXACT_GAMMA = "gamma"


@dataclass(frozen=True)
class ChannelDraw:
    h: float | np.ndarray
    h_bar: float | np.ndarray


@dataclass(frozen=True)
class NoiseDraw:
    """Noise for one chip (1-D ``n1``/``eps``) or a batch (2-D)."""

    n1: np.ndarray
    n2_pulse: float | np.ndarray
    eps: np.ndarray

    @classmethod
    def zeros(cls, m_order: int) -> "NoiseDraw":
        return cls(np.zeros(m_order), 0.0, np.zeros(m_order))


def sample_fading(model: ChannelModel, rng: np.random.Generator, size=None):
    """Draw fading amplitudes.

    For the generalized Nakagami law, ``h**(2z)`` is Gamma distributed with
    shape ``m`` and scale ``omega/m``, so ``h = G**(1/(2z))`` is exact.
    """
    if not model.is_fading:
        return 1.0 if size is None else np.ones(size)
    g = rng.gamma(model.m_shape, model.omega / model.m_shape, size=size)
    h = g ** (1.0 / (2.0 * model.z_gen)) * model.amplitude_scale()
    return float(h) if size is None else h


def sample_estimation_error(sigma_e2: float, rng: np.random.Generator, size=None):
    if not sigma_e2 >= 0 or not math.isfinite(sigma_e2):
        raise ValueError(f"estimation-error variance must be >= 0, got {sigma_e2!r}")
    if sigma_e2 == 0:
        return 0.0 if size is None else np.zeros(size)
    he = rng.normal(0.0, math.sqrt(sigma_e2), size=size)
    return float(he) if size is None else he


def draw_channel(model: ChannelModel, sigma_e2: float,
                 rng: np.random.Generator, size=None) -> ChannelDraw:
    h = sample_fading(model, rng, size)
    return ChannelDraw(h, h + sample_estimation_error(sigma_e2, rng, size))


def sample_noise(p: LinkParams, mode: SquareNoiseMode | str,
                 rng: np.random.Generator, size=None) -> NoiseDraw:
    """Draw CD projection noise, ED cross-term noise and square-noise energies.

    The cross term at the pulse position and the energies are drawn
    independently of each other, as the detection statistics assume.
    """
    mode = SquareNoiseMode(mode)
    m = p.m_order
    shape = (m,) if size is None else (size, m)
    sd = math.sqrt(p.n0 / 2.0)
    n1 = rng.standard_normal(shape) * sd
    n2 = rng.standard_normal(None if size is None else size) * sd
    c, n0 = p.c_dim, p.n0
    if mode is SquareNoiseMode.GAUSSIAN_APPROX:
        eps = c * n0 + math.sqrt(c) * n0 * rng.standard_normal(shape)
    else:
        eps = rng.standard_gamma(c, shape) * n0
    if size is None:
        n2 = float(n2)
    return NoiseDraw(n1, n2, eps)
