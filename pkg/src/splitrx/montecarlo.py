"""Seeded, block-parallel BER simulation.

Symbols are processed in fixed-size blocks and block ``b`` of a run with
seed ``s`` always draws from ``SeedSequence(s, spawn_key=(b,))``. Workers
only decide which blocks they execute, so the error count is the same for
any worker count.
"""

from __future__ import annotations

import enum
import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .channel import SquareNoiseMode, draw_channel, sample_noise
from .core import (BerEstimate, ChannelModel, LinkParams, ReceiverKind, Source,
                   db_to_linear, validate_params)
from .modem import index_bits, spread_positions, synthesize
from .receivers import despread_metrics, metrics
from .theory import ber_faded, bit_error_from_symbol

__all__ = [
    "BLOCK_SIZE",
    "CountMode",
    "SimConfig",
    "SweepPoint",
    "binomial_sigma",
    "default_code",
    "point_seed",
    "sigma_distance",
    "simulate_ber",
    "sweep",
    "theory_for",
    "wilson_interval",
]

log = logging.getLogger(__name__)

BLOCK_SIZE = 1 << 16
MIN_ERRORS = 10


class CountMode(str, enum.Enum):
    SYMBOL_THEN_CONVERT = "symbol"
    DIRECT_BITS = "bits"


def default_code(ns: int) -> np.ndarray:
    """Alternating ``1 0 1 0 ...`` code of length ``ns``."""
    return (np.arange(ns) + 1) % 2


@dataclass(frozen=True)
class SimConfig:
    params: LinkParams
    channel: ChannelModel = field(default_factory=ChannelModel.gaussian)
    receiver: ReceiverKind = ReceiverKind.SDJD
    n_symbols: int = 1_000_000
    seed: int = 0
    workers: int = 1
    square_noise_mode: SquareNoiseMode = SquareNoiseMode.GAUSSIAN_APPROX
    count_mode: CountMode = CountMode.SYMBOL_THEN_CONVERT
    code: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "receiver", ReceiverKind.parse(self.receiver))
        object.__setattr__(self, "square_noise_mode", SquareNoiseMode(self.square_noise_mode))
        object.__setattr__(self, "count_mode", CountMode(self.count_mode))

    def spreading_code(self) -> np.ndarray:
        if self.code is not None:
            code = np.asarray(self.code, dtype=np.int64)
            if code.size != self.params.ns:
                raise ValueError(f"code length {code.size} != ns={self.params.ns}")
            return code
        return default_code(self.params.ns)


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054):
    if trials <= 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


def _run_block(cfg: SimConfig, p: LinkParams, code, block: int, n: int):
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(cfg.seed, spawn_key=(block,))))
    M, ns = p.m_order, p.ns
    truth = rng.integers(0, M, size=n)
    draw = draw_channel(cfg.channel, p.sigma_e2, rng, n)
    if ns > 1:
        chips = spread_positions(truth, code).reshape(-1)
        h = np.repeat(draw.h, ns)
        h_bar = np.repeat(draw.h_bar, ns)
    else:
        chips, h, h_bar = truth, draw.h, draw.h_bar
    noise = sample_noise(p, cfg.square_noise_mode, rng, chips.size)
    y1, y2 = synthesize(chips, p, h, noise)
    score = metrics(cfg.receiver, y1, y2, h_bar, p)
    if ns > 1:
        score = despread_metrics(score.reshape(n, ns, M), code)
    decided = np.argmax(score, axis=-1)
    sym_err = int(np.count_nonzero(decided != truth))
    bit_err = int(np.count_nonzero(index_bits(decided, M) != index_bits(truth, M)))
    return sym_err, bit_err


def simulate_ber(cfg: SimConfig) -> BerEstimate:
    """Monte Carlo BER of one configuration.

    ``SYMBOL_THEN_CONVERT`` counts symbol errors and maps them to bits with
    the orthogonal-PPM factor ``2^(k-1)/(2^k-1)``; ``DIRECT_BITS`` compares
    the natural-binary labels directly.
    """
    report = validate_params(cfg.params)
    if not report.valid:
        raise ValueError("; ".join(report.errors))
    if cfg.params.ns > 1 and cfg.params.m_order != 2:
        raise NotImplementedError("spreading is only defined for 2-PPM")
    if cfg.n_symbols < 1 or cfg.workers < 1:
        raise ValueError("n_symbols and workers must be >= 1")
    p = cfg.params.with_rho(cfg.receiver.effective_rho(cfg.params.rho))
    code = cfg.spreading_code()

    sizes = [BLOCK_SIZE] * (cfg.n_symbols // BLOCK_SIZE)
    if cfg.n_symbols % BLOCK_SIZE:
        sizes.append(cfg.n_symbols % BLOCK_SIZE)
    jobs = list(enumerate(sizes))
    if cfg.workers == 1 or len(jobs) == 1:
        counts = [_run_block(cfg, p, code, b, n) for b, n in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            counts = list(pool.map(lambda j: _run_block(cfg, p, code, *j), jobs))
    sym_err = sum(c[0] for c in counts)
    bit_err = sum(c[1] for c in counts)

    n, k = cfg.n_symbols, p.bits_per_symbol
    if cfg.count_mode is CountMode.SYMBOL_THEN_CONVERT:
        lo, hi = wilson_interval(sym_err, n)
        factor = float(bit_error_from_symbol(1.0, p.m_order))
        ber, lo, hi = factor * sym_err / n, factor * lo, factor * hi
        errors, trials = sym_err, n
    else:
        trials = n * k
        ber = bit_err / trials
        lo, hi = wilson_interval(bit_err, trials)
        errors = bit_err
    low = errors < MIN_ERRORS
    if low:
        log.warning("only %d errors in %d trials; estimate is low-confidence",
                    errors, trials)
    return BerEstimate(ber, lo, hi, Source.SIMULATION, errors_counted=errors,
                       trials=trials, stderr=math.sqrt(max(ber * (1 - ber), 0) / trials),
                       low_confidence=low)


def binomial_sigma(p_theory: float, cfg: SimConfig) -> float:
    """Standard error of the BER estimator when the true value is ``p_theory``."""
    M = cfg.params.m_order
    if cfg.count_mode is CountMode.SYMBOL_THEN_CONVERT:
        factor = float(bit_error_from_symbol(1.0, M))
        ps = p_theory / factor
        return factor * math.sqrt(ps * (1 - ps) / cfg.n_symbols)
    trials = cfg.n_symbols * int(math.log2(M))
    return math.sqrt(p_theory * (1 - p_theory) / trials)


def point_seed(seed: int, axis: str, point: float) -> int:
    """Stable 63-bit seed for one grid point, independent of the rest of the grid."""
    key = f"{int(seed)}|{axis}|{float(point):.12g}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") >> 1


@dataclass
class SweepPoint:
    point: float
    config: SimConfig
    sim: Optional[BerEstimate] = None
    theory: Optional[BerEstimate] = None
    error: Optional[str] = None


def theory_for(cfg: SimConfig, n_draws: int = 200_000, seed: int = 0) -> BerEstimate:
    p = cfg.params
    return ber_faded(cfg.receiver, p.snr, p.rho, p.c_dim, p.m_order,
                     cfg.channel, p.sigma_e2, p.ns, n_draws=n_draws, seed=seed)


def sweep(axis: str, grid: Sequence[float], template: SimConfig,
          simulate: bool = True, theory: bool = True,
          rho_for_point: Callable[[SimConfig], float] | None = None,
          theory_draws: int = 200_000) -> list[SweepPoint]:
    """Paired simulation/theory estimates along ``rho`` or ``snr_db``.

    A failing point is recorded in ``SweepPoint.error`` and the sweep goes on.
    ``rho_for_point`` (used with the SNR axis) picks the splitting ratio
    after the point's SNR has been applied.
    """
    if axis not in ("rho", "snr_db"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("empty grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    out = []
    for x in grid:
        seed = point_seed(template.seed, axis, x)
        p = template.params
        if axis == "rho":
            p = p.with_rho(x)
        else:
            p = replace(p, ep=float(db_to_linear(x)) * p.n0)
        cfg = replace(template, params=p, seed=seed)
        pt = SweepPoint(x, cfg)
        try:
            if rho_for_point is not None:
                cfg = replace(cfg, params=p.with_rho(rho_for_point(cfg)))
                pt.config = cfg
            if simulate:
                pt.sim = simulate_ber(cfg)
            if theory:
                pt.theory = theory_for(cfg, theory_draws, seed)
        except Exception as exc:  # noqa: BLE001 - reported per point
            log.error("point %s=%g failed: %s", axis, x, exc)
            pt.error = f"{type(exc).__name__}: {exc}"
        out.append(pt)
    return out


def sigma_distance(ber_sim: float, ber_theory: float, cfg: SimConfig) -> float:
    """Distance between simulation and theory in binomial standard errors."""
    sigma = binomial_sigma(ber_theory, cfg)
    return abs(ber_sim - ber_theory) / sigma if sigma > 0 else math.inf
