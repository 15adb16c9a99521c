"""Analytical and semi-analytical link performance.

Conventions: ``gamma`` is always the *instantaneous* SNR ``h^2 Ep / N0``
and ``h`` the true amplitude of the same chip, so ``Ep / N0 = gamma / h^2``.
``snr`` (linear) is the nominal ``Ep / N0`` used when a channel model draws
``h`` itself. All functions broadcast over array arguments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .channel import sample_estimation_error, sample_fading
from .core import (BerEstimate, CapacityEstimate, ChannelModel, ReceiverKind,
                   Source, q_function)

__all__ = [
    "ConditionedBerQuery",
    "QuadratureError",
    "QuadratureScheme",
    "QuadratureSpec",
    "apply_spreading",
    "average_optimal_rho",
    "ber_2ppm",
    "ber_2ppm_closed",
    "ber_cd",
    "ber_ed",
    "ber_faded",
    "ber_mppm_numeric",
    "bit_error_from_symbol",
    "capacity",
    "conditioned_ber",
    "optimal_rho",
    "rho_grid_minimum",
    "signal_space_distance",
    "symbol_error_mppm",
]


class QuadratureError(ArithmeticError):
    pass


class QuadratureScheme(str, enum.Enum):
    GAUSS_HERMITE = "gauss-hermite"
    ADAPTIVE_TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class QuadratureSpec:
    node_count: int = 64
    scheme: QuadratureScheme = QuadratureScheme.GAUSS_HERMITE
    tol: float = 1e-6

    def __post_init__(self):
        if self.node_count < 8:
            raise ValueError("node_count must be >= 8")
        object.__setattr__(self, "scheme", QuadratureScheme(self.scheme))


@dataclass(frozen=True)
class ConditionedBerQuery:
    receiver: ReceiverKind
    gamma: float
    rho: float
    c_dim: float
    m_order: int = 2
    h: float = 1.0
    h_bar: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "receiver", ReceiverKind.parse(self.receiver))

    @property
    def estimate(self) -> float:
        return self.h if self.h_bar is None else self.h_bar


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def ber_cd(gamma):
    return q_function(np.sqrt(gamma))


def ber_ed(gamma, c):
    gamma = np.asarray(gamma, dtype=float)
    return q_function(gamma / np.sqrt(2.0 * gamma + 2.0 * np.asarray(c, float)))


def bit_error_from_symbol(pe, m_order: int):
    k = int(round(math.log2(m_order)))
    return 2 ** (k - 1) / (2 ** k - 1) * np.asarray(pe, dtype=float)


def apply_spreading(gamma, c, ns: int):
    """Soft-combined ``ns``-chip spreading scales SNR and square-noise alike."""
    if ns < 1:
        raise ValueError("ns must be >= 1")
    return ns * np.asarray(gamma, float), ns * np.asarray(c, float)


def _sdjd_argument(gamma, rho, c, h):
    # (sqrt(rho) + (1-rho) h) gamma / sqrt(rho gamma + 2 (1-rho)^2 h^2 (gamma + c))
    num = (np.sqrt(rho) + (1.0 - rho) * h) * gamma
    den = np.sqrt(rho * gamma + 2.0 * (1.0 - rho) ** 2 * h ** 2 * (gamma + c))
    return num / den


def _sdsd_argument(gamma, rho, c, h, h_bar):
    # Algebraically the printed expression for h_bar > 0; keeps the sign of
    # h_bar (a negative estimate flips the coherent weight) and stays finite
    # at rho = 1.
    u = (1.0 - rho) ** 2 * np.abs(h_bar) * h
    num = gamma * (np.sign(h_bar) * rho + u)
    den = np.sqrt(rho ** 2 * gamma + u ** 2 * (2.0 * gamma + 2.0 * c))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = num / den
    return np.where(den > 0, r, 0.0)


def ber_2ppm(receiver, gamma, rho, c, h=1.0, h_bar=None):
    """Vectorised conditioned 2-PPM BER for any receiver."""
    kind = ReceiverKind.parse(receiver)
    gamma, rho, c, h = np.broadcast_arrays(*(np.asarray(a, dtype=float)
                                             for a in (gamma, rho, c, h)))
    if kind in (ReceiverKind.CD, ReceiverKind.ED):
        rho = np.full(rho.shape, kind.effective_rho(0.5))
    if kind is ReceiverKind.SDSD:
        hb = h if h_bar is None else np.broadcast_to(np.asarray(h_bar, float), h.shape)
        if np.any((h <= 0) & (rho < 1)):
            raise ValueError("SDSD conditioned BER needs h > 0")
        out = q_function(_sdsd_argument(gamma, rho, c, h, hb))
        ed = ber_ed(gamma, c)
        out = np.where((rho == 0) & (hb != 0), ed, out)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            arg = np.where(rho > 0, _sdjd_argument(gamma, rho, c, h), 0.0)
        out = q_function(arg)
        out = np.where(rho == 0, ber_ed(gamma, c), out)
        out = np.where(rho == 1, ber_cd(gamma), out)
    return float(out) if np.ndim(out) == 0 else out


def ber_2ppm_closed(q: ConditionedBerQuery) -> float:
    if q.m_order != 2:
        raise NotImplementedError("closed forms exist for 2-PPM only")
    return float(ber_2ppm(q.receiver, q.gamma, q.rho, q.c_dim, q.h, q.estimate))


# ---------------------------------------------------------------------------
# M-PPM by conditioning on the common pulse-slot noise
# ---------------------------------------------------------------------------

def _conditioning_terms(kind, gamma, rho, c, h, h_bar):
    """Offset ``a``, pairwise noise sd ``s`` and conditioning sd ``sn``.

    The correct-decision probability is ``E_t[Phi((a + sn t)/s)^(M-1)]``
    with ``t ~ N(0, 1)``; the mean of the conditioning variable cancels the
    square-noise mean of the competing slots exactly.
    """
    if kind is ReceiverKind.SDSD:
        hb = h_bar
        w = (1.0 - rho) ** 4 * hb ** 4
        a = 2.0 * hb * rho / h + 2.0 * (1.0 - rho) ** 2 * hb ** 2
        lin = 2.0 * rho ** 2 * hb ** 2 / (h ** 2 * gamma)
        s2 = lin + 4.0 * w * c / gamma ** 2
        sn2 = lin + 8.0 * w / gamma + 4.0 * w * c / gamma ** 2
    else:
        a = np.sqrt(rho) + h * (1.0 - rho)
        s2 = rho / (2.0 * gamma) + (1.0 - rho) ** 2 * c * h ** 2 / gamma ** 2
        sn2 = s2 + 2.0 * (1.0 - rho) ** 2 * h ** 2 / gamma
    return a, np.sqrt(s2), np.sqrt(sn2)


def _symbol_error_from_nodes(a, s, sn, m_order, t, w):
    """``1 - sum_j w_j Phi((a + sn t_j)/s)^(M-1)`` along a trailing node axis."""
    with np.errstate(invalid="ignore", divide="ignore"):
        arg = (a[..., None] + sn[..., None] * t) / s[..., None]
    log_phi = special.log_ndtr(arg)
    miss = -np.expm1((m_order - 1) * log_phi)
    return np.sum(w * miss, axis=-1)


def _gh(n):
    x, w = np.polynomial.hermite.hermgauss(n)
    return math.sqrt(2.0) * x, w / math.sqrt(math.pi)


def _trapezoid(n):
    t = np.linspace(-8.0, 8.0, n)
    w = np.exp(-0.5 * t ** 2) / math.sqrt(2.0 * math.pi) * (t[1] - t[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return t, w / w.sum()


def symbol_error_mppm(receiver, gamma, rho, c, m_order, h=1.0, h_bar=None,
                      quad: QuadratureSpec | None = None):
    """Conditioned M-PPM symbol-error probability (vectorised)."""
    quad = quad or QuadratureSpec()
    kind = ReceiverKind.parse(receiver)
    gamma, rho, c, h = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                             for v in (gamma, rho, c, h)))
    if kind in (ReceiverKind.CD, ReceiverKind.ED):
        rho = np.full(rho.shape, kind.effective_rho(0.5))
        kind = ReceiverKind.SDJD
    hb = h if h_bar is None else np.broadcast_to(np.asarray(h_bar, float), h.shape)
    if np.any(h <= 0) or np.any(gamma <= 0):
        raise ValueError("M-PPM quadrature needs h > 0 and gamma > 0")
    a, s, sn = _conditioning_terms(kind, gamma, rho, c, h, hb)
    degenerate = s == 0
    s = np.where(degenerate, 1.0, s)
    a, s, sn = (np.atleast_1d(v).ravel() for v in (a, s, sn))

    def evaluate(scheme, n, idx):
        t, w = _gh(n) if scheme is QuadratureScheme.GAUSS_HERMITE else _trapezoid(n)
        return _symbol_error_from_nodes(a[idx], s[idx], sn[idx], m_order, t, w)

    # first pass on every entry; only entries that fail the doubling check
    # are refined, on the trapezoid rule with successively doubled nodes
    everything = np.arange(a.size)
    n, scheme = quad.node_count, quad.scheme
    pe, out = evaluate(scheme, n, everything), evaluate(scheme, 2 * n, everything)
    todo = everything[np.abs(out - pe) > quad.tol]
    if todo.size and scheme is QuadratureScheme.GAUSS_HERMITE:
        scheme, n = QuadratureScheme.ADAPTIVE_TRAPEZOID, max(n, 257)
        pe, fine = evaluate(scheme, n, todo), evaluate(scheme, 2 * n - 1, todo)
        out[todo] = fine
        keep = np.abs(fine - pe) > quad.tol
        todo, pe = todo[keep], fine[keep]
    for _ in range(6):
        if not todo.size:
            break
        n = 2 * n - 1
        fine = evaluate(scheme, 2 * n - 1, todo)
        out[todo] = fine
        keep = np.abs(fine - pe) > quad.tol
        todo, pe = todo[keep], fine[keep]
    if todo.size:
        raise QuadratureError(
            f"M-PPM integral did not converge to {quad.tol:g} with {n} nodes")
    pe2 = out.reshape(np.shape(degenerate))
    # a zero channel estimate makes every slot metric equal; slot 0 always wins
    pe2 = np.where(degenerate, (m_order - 1) / m_order, pe2)
    return float(pe2) if pe2.ndim == 0 else pe2


def ber_mppm_numeric(q: ConditionedBerQuery, quad: QuadratureSpec | None = None) -> float:
    pe = symbol_error_mppm(q.receiver, q.gamma, q.rho, q.c_dim, q.m_order,
                           q.h, q.estimate, quad)
    return float(bit_error_from_symbol(pe, q.m_order))


def conditioned_ber(receiver, gamma, rho, c, m_order=2, h=1.0, h_bar=None,
                    ns: int = 1, quad: QuadratureSpec | None = None):
    """Conditioned BER, closed form for 2-PPM and quadrature otherwise."""
    if ns > 1 and m_order != 2:
        raise NotImplementedError("spreading is only defined for 2-PPM")
    gamma, c = apply_spreading(gamma, c, ns)
    if m_order == 2:
        return ber_2ppm(receiver, gamma, rho, c, h, h_bar)
    pe = symbol_error_mppm(receiver, gamma, rho, c, m_order, h, h_bar, quad)
    return bit_error_from_symbol(pe, m_order)


# ---------------------------------------------------------------------------
# fading expectations
# ---------------------------------------------------------------------------

def _normal_interval(mean, se):
    return max(0.0, mean - 1.96 * se), min(1.0, mean + 1.96 * se)


def ber_faded(receiver, snr: float, rho: float, c: float, m_order: int = 2,
              channel: ChannelModel | None = None, sigma_e2: float = 0.0,
              ns: int = 1, method: str = "mc", n_draws: int = 200_000,
              seed: int = 0, nodes: int = 48,
              quad: QuadratureSpec | None = None) -> BerEstimate:
    """Average the conditioned BER over fading and estimation error.

    ``method="mc"`` samples ``(h, h_e)`` pairs and reports the standard
    error of the mean; ``method="quadrature"`` uses generalized
    Gauss-Laguerre nodes on ``h^(2z)`` and Gauss-Hermite nodes on ``h_e``.
    Only SDSD sees ``h_e``.
    """
    channel = channel or ChannelModel.gaussian()
    kind = ReceiverKind.parse(receiver)
    uses_estimate = kind is ReceiverKind.SDSD and sigma_e2 > 0

    def evaluate(h, he):
        return conditioned_ber(kind, h ** 2 * snr, rho, c, m_order, h,
                               h + he if uses_estimate else None, ns, quad)

    if not channel.is_fading and not uses_estimate:
        return BerEstimate.exact(float(evaluate(np.float64(1.0), 0.0)))

    if method == "quadrature":
        if channel.is_fading:
            m, theta = channel.m_shape, channel.omega / channel.m_shape
            x, wx = special.roots_genlaguerre(nodes, m - 1.0)
            hs = (theta * x) ** (1.0 / (2.0 * channel.z_gen)) * channel.amplitude_scale()
            wh = wx / math.exp(special.gammaln(m))
        else:
            hs, wh = np.ones(1), np.ones(1)
        if uses_estimate:
            t, wt = _gh(nodes)
            he, we = math.sqrt(sigma_e2) * t, wt
        else:
            he, we = np.zeros(1), np.ones(1)
        H, HE = np.meshgrid(hs, he, indexing="ij")
        vals = np.asarray(evaluate(H, HE))
        ber = float(np.einsum("i,j,ij->", wh, we, vals))
        return BerEstimate(ber, ber, ber, Source.THEORY, stderr=0.0)

    rng = np.random.default_rng(seed)
    h = sample_fading(channel, rng, n_draws)
    he = sample_estimation_error(sigma_e2, rng, n_draws) if uses_estimate else 0.0
    vals = np.asarray(evaluate(h, he))
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(vals.size))
    lo, hi = _normal_interval(mean, se)
    return BerEstimate(mean, lo, hi, Source.THEORY, trials=int(vals.size), stderr=se)


# ---------------------------------------------------------------------------
# capacity
# ---------------------------------------------------------------------------

def _branch_terms(m0, kappa, z):
    """Log-likelihood-ratio exponents of one Gaussian PPM branch.

    ``m0`` is the squared mean separation over the off-pulse variance and
    ``kappa = var_pulse / var_off - 1``. Column 0 of ``z`` (standard normal,
    shape ``(n, M)``) drives the pulse slot.
    """
    m0 = np.asarray(m0, float)[..., None]
    kappa = np.asarray(kappa, float)[..., None]
    r = 1.0 + kappa
    a = np.sqrt(m0) / r
    b = kappa / r
    v1 = np.sqrt(m0) + np.sqrt(r) * z[:, :1]
    vi = z
    t = a * (vi - v1) + b * (vi ** 2 - v1 ** 2) / 2.0
    t[:, 0] = 0.0
    return t


def _sdjd_moments(h, ep, rho, c):
    dmu = h * math.sqrt(rho) * ep + h ** 2 * (1.0 - rho) * ep
    var_off = rho * ep / 2.0 + (1.0 - rho) ** 2 * c
    var_gap = 2.0 * h ** 2 * (1.0 - rho) ** 2 * ep
    return dmu ** 2 / var_off, var_gap / var_off


def capacity(receiver, snr: float, rho: float, c: float, m_order: int = 2,
             channel: ChannelModel | None = None, n_draws: int = 100_000,
             seed: int = 0) -> CapacityEstimate:
    """Monte Carlo capacity with equiprobable M-PPM inputs, bits/channel use.

    The v-vector expectation uses the branch statistics of each receiver;
    for a fading channel every draw carries its own ``h`` so the outer
    expectation over ``h`` is folded into the same average.
    """
    if n_draws < 2:
        raise ValueError("need at least two draws for a standard error")
    kind = ReceiverKind.parse(receiver)
    channel = channel or ChannelModel.gaussian()
    rng = np.random.default_rng(seed)
    h = np.asarray(sample_fading(channel, rng, n_draws), float)
    gamma = h ** 2 * snr
    z = rng.standard_normal((n_draws, m_order))
    if kind is ReceiverKind.CD:
        t = _branch_terms(2.0 * gamma, 0.0, z)
    elif kind is ReceiverKind.ED:
        t = _branch_terms(gamma ** 2 / c, 2.0 * gamma / c, z)
    elif kind is ReceiverKind.SDSD:
        z2 = rng.standard_normal((n_draws, m_order))
        t = _branch_terms(2.0 * gamma, 0.0, z) + \
            _branch_terms(gamma ** 2 / c, 2.0 * gamma / c, z2)
    else:
        m0, kappa = _sdjd_moments(h, snr, rho, c)
        t = _branch_terms(m0, kappa, z)
    log2m = math.log2(m_order)
    vals = log2m - special.logsumexp(t, axis=1) / math.log(2.0)
    mean = float(np.clip(vals.mean(), 0.0, log2m))
    se = float(vals.std(ddof=1) / math.sqrt(n_draws))
    return CapacityEstimate(mean, se, n_draws)


# ---------------------------------------------------------------------------
# splitting ratio
# ---------------------------------------------------------------------------

def _root(A):
    # smaller root of rho = A (1 - rho)^2, written without cancellation
    A = np.asarray(A, dtype=float)
    return 2.0 * A / (2.0 * A + 1.0 + np.sqrt(4.0 * A + 1.0))


def optimal_rho(receiver, gamma, c, h_bar=1.0):
    """BER-minimising 2-PPM splitting ratio for SDSD or SDJD.

    Both receivers peak where their effective combining weight reaches
    ``2 (gamma + c) / gamma``; for SDSD that weight is
    ``rho / ((1-rho)^2 h_bar^2)``, for SDJD ``sqrt(rho) / ((1-rho) h_bar)``.
    """
    kind = ReceiverKind.parse(receiver)
    gamma = np.asarray(gamma, dtype=float)
    target = 2.0 * (gamma + np.asarray(c, float)) / gamma
    hb2 = np.asarray(h_bar, dtype=float) ** 2
    if kind is ReceiverKind.SDSD:
        out = _root(target * hb2)
    elif kind is ReceiverKind.SDJD:
        out = _root(target ** 2 * hb2)
    else:
        raise ValueError("only SDSD and SDJD have a splitting ratio to optimise")
    return float(out) if out.ndim == 0 else out


def average_optimal_rho(receiver, snr: float, c: float,
                        channel: ChannelModel | None = None,
                        sigma_e2: float = 0.0, n_draws: int = 200_000,
                        seed: int = 0) -> tuple[float, float]:
    """``E[rho*]`` over the estimated amplitude ``h_bar = h + h_e``.

    The SNR stays at its nominal value while the amplitude varies, so the
    result is the average of ``optimal_rho(snr, c, h_bar)``. Returns
    ``(mean, standard error)``; the error is 0 for a deterministic channel.
    """
    channel = channel or ChannelModel.gaussian()
    if not channel.is_fading and sigma_e2 == 0:
        return optimal_rho(receiver, snr, c, 1.0), 0.0
    rng = np.random.default_rng(seed)
    h = sample_fading(channel, rng, n_draws)
    hb = h + sample_estimation_error(sigma_e2, rng, n_draws)
    r = optimal_rho(receiver, snr, c, hb)
    return float(r.mean()), float(r.std(ddof=1) / math.sqrt(n_draws))


def rho_grid_minimum(fn, step: float = 0.01):
    """Grid search ``min_rho fn(rho)`` over ``[0, 1]``; returns ``(rho, value)``."""
    n = int(round(1.0 / step))
    grid = np.linspace(0.0, 1.0, n + 1)
    vals = np.asarray([fn(r) for r in grid])
    i = int(np.argmin(vals))
    return float(grid[i]), float(vals[i])


def signal_space_distance(rho: float, m_order: int = 2) -> float:
    """Distance between neighbouring 2-PPM points in the (pulse, energy) plane."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if rho in (0.0, 1.0):
        return 2.0
    return 2.0 * math.sqrt(1.0 + (1.0 - rho) ** 2 / rho)
