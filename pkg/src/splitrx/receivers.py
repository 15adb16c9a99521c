"""Decision rules of the four receivers.

Each rule reduces a chip to one statistic per PPM slot and picks the
largest; ``np.argmax`` returns the first maximum, which gives the
lowest-index tie rule for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import LinkParams, ReceiverKind
from .modem import ChipObservation

__all__ = [
    "Decision",
    "decide",
    "decide_cd",
    "decide_ed",
    "decide_sdjd",
    "decide_sdsd",
    "decide_spread",
    "despread_metrics",
    "metrics",
    "sdsd_norm_decision",
    "sdsd_weights",
]


@dataclass(frozen=True)
class Decision:
    index_hat: int
    metric: np.ndarray


def sdsd_weights(h_bar, p: LinkParams):
    """Estimated signal vector ``[h_bar sqrt(rho) Ep, (1-rho) h_bar^2 Ep]``."""
    h_bar = np.asarray(h_bar, dtype=float)
    s1 = h_bar * math.sqrt(p.rho) * p.ep
    s2 = (1.0 - p.rho) * h_bar ** 2 * p.ep
    return s1, s2


def metrics(kind: ReceiverKind, y1, y2, h_bar=1.0, p: LinkParams | None = None):
    """Per-slot decision statistic, larger is better, shape of ``y1``.

    SDSD uses the inner-product form of the minimum-distance rule:
    ``|Y - S X_i|^2 = |Y|^2 - 2 <S, Y_i> + |S|^2``, and only the middle
    term depends on ``i``.
    """
    kind = ReceiverKind.parse(kind)
    if kind is ReceiverKind.CD:
        return np.asarray(y1, dtype=float)
    if kind is ReceiverKind.ED:
        return np.asarray(y2, dtype=float)
    if kind is ReceiverKind.SDJD:
        return np.asarray(y1, dtype=float) + np.asarray(y2, dtype=float)
    if p is None:
        raise ValueError("SDSD needs the link parameters")
    s1, s2 = sdsd_weights(h_bar, p)
    s1 = np.asarray(s1)[..., None] if np.ndim(y1) > np.ndim(s1) else s1
    s2 = np.asarray(s2)[..., None] if np.ndim(y2) > np.ndim(s2) else s2
    return s1 * y1 + s2 * y2


def decide(kind: ReceiverKind, y1, y2, h_bar=1.0, p: LinkParams | None = None):
    """Vectorised decisions over the last axis."""
    return np.argmax(metrics(kind, y1, y2, h_bar, p), axis=-1)


def _single(kind, obs: ChipObservation, p=None) -> Decision:
    m = metrics(kind, obs.y1, obs.y2, obs.draw.h_bar, p)
    return Decision(int(np.argmax(m)), m)


def decide_cd(obs: ChipObservation) -> Decision:
    return _single(ReceiverKind.CD, obs)


def decide_ed(obs: ChipObservation) -> Decision:
    return _single(ReceiverKind.ED, obs)


def decide_sdjd(obs: ChipObservation) -> Decision:
    return _single(ReceiverKind.SDJD, obs)


def decide_sdsd(obs: ChipObservation, p: LinkParams) -> Decision:
    return _single(ReceiverKind.SDSD, obs, p)


def sdsd_norm_decision(y1, y2, h_bar, p: LinkParams) -> int:
    """Literal minimum-distance rule over the 2 x M decision matrix."""
    Y = np.vstack([np.asarray(y1, float), np.asarray(y2, float)])
    s = np.array(sdsd_weights(h_bar, p), dtype=float)
    M = Y.shape[1]
    dist = [np.sum((Y - np.outer(s, np.eye(M)[i])) ** 2) for i in range(M)]
    return int(np.argmin(dist))


def despread_metrics(per_chip, code) -> np.ndarray:
    """Combine 2-PPM chip metrics of one bit into a length-2 bit metric.

    ``per_chip`` has shape ``(..., Ns, 2)``. Under bit ``b`` chip ``i``
    occupies slot ``b XOR NOT code[i]``, so the bit-0 score collects slot
    ``1 - code[i]`` and the bit-1 score slot ``code[i]``.
    """
    per_chip = np.asarray(per_chip, dtype=float)
    c = np.asarray([int(x) for x in code] if isinstance(code, str) else code,
                   dtype=np.int64)
    if per_chip.shape[-2] != c.size:
        raise ValueError(f"{per_chip.shape[-2]} chips for a length-{c.size} code")
    j = np.arange(c.size)
    score0 = per_chip[..., j, 1 - c].sum(axis=-1)
    score1 = per_chip[..., j, c].sum(axis=-1)
    return np.stack([score0, score1], axis=-1)


def decide_spread(obs_list: Sequence[ChipObservation], kind: ReceiverKind,
                  p: LinkParams, code=None) -> Decision:
    """Soft de-spreading for one bit; ``code`` defaults to ``1 0 1 0 ...``."""
    n = len(obs_list)
    if code is None:
        code = (np.arange(n) + 1) % 2
    if p.m_order != 2:
        raise NotImplementedError("spreading is only defined for 2-PPM")
    if n != len(code):
        raise ValueError(f"{n} chips for a length-{len(code)} code")
    per_chip = np.stack([
        metrics(kind, o.y1, o.y2, o.draw.h_bar, p) for o in obs_list])
    m = despread_metrics(per_chip, code)
    return Decision(int(np.argmax(m)), m)
