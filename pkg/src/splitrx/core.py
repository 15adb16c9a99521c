"""Domain types and shared special functions.

All SNR bookkeeping uses the normalisation ``n0 = 1`` unless a caller
builds :class:`LinkParams` by hand; the nominal SNR is then simply
``ep / n0`` and the instantaneous SNR of a chip is ``h**2 * ep / n0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import special

__all__ = [
    "CLT_MIN_C",
    "DEFAULT_C_DIM",
    "BerEstimate",
    "CapacityEstimate",
    "ChannelKind",
    "ChannelModel",
    "LinkParams",
    "ReceiverKind",
    "Source",
    "ValidationReport",
    "db_to_linear",
    "is_power_of_two",
    "linear_to_db",
    "q_function",
    "snr",
    "validate_params",
]

#: The Gaussian model of the square-noise energy is only trusted above this.
CLT_MIN_C = 40.0
DEFAULT_C_DIM = 50.0


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def q_function(x):
    """Gaussian tail probability ``P[N(0, 1) > x]``.

    Accepts scalars or arrays. Uses ``erfc`` so the far tail underflows
    gracefully to 0 instead of losing precision through ``1 - Phi``.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("q_function requires finite input")
    out = 0.5 * special.erfc(arr / math.sqrt(2.0))
    if out.ndim == 0:
        return float(out)
    return out


class ReceiverKind(str, enum.Enum):
    CD = "cd"
    ED = "ed"
    SDSD = "sdsd"
    SDJD = "sdjd"

    @classmethod
    def parse(cls, value) -> "ReceiverKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())

    def effective_rho(self, rho: float) -> float:
        """CD and ED pin the splitting ratio regardless of the link setting."""
        if self is ReceiverKind.CD:
            return 1.0
        if self is ReceiverKind.ED:
            return 0.0
        return rho


class ChannelKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    NAKAGAMI = "nakagami"


@dataclass(frozen=True)
class ChannelModel:
    """Unit-gain Gaussian channel or generalized Nakagami fading.

    ``normalize`` rescales the Nakagami amplitude so that ``E[h^2] = 1``;
    off by default, which keeps the raw ``(m, omega, z)`` parameters.
    """

    kind: ChannelKind = ChannelKind.GAUSSIAN
    m_shape: float = 1.0
    omega: float = 1.0
    z_gen: float = 1.0
    normalize: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if self.kind is ChannelKind.NAKAGAMI:
            for name in ("m_shape", "omega", "z_gen"):
                v = getattr(self, name)
                if not (math.isfinite(v) and v > 0):
                    raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @classmethod
    def gaussian(cls) -> "ChannelModel":
        return cls(ChannelKind.GAUSSIAN)

    @classmethod
    def nakagami(cls, m_shape: float, omega: float, z_gen: float,
                 normalize: bool = False) -> "ChannelModel":
        return cls(ChannelKind.NAKAGAMI, m_shape, omega, z_gen, normalize)

    @property
    def is_fading(self) -> bool:
        return self.kind is ChannelKind.NAKAGAMI

    def raw_second_moment(self) -> float:
        """``E[h^2]`` of the un-normalised amplitude."""
        if not self.is_fading:
            return 1.0
        m, om, z = self.m_shape, self.omega, self.z_gen
        # h^2 = G^(1/z) with G ~ Gamma(m, om/m)
        return math.exp((1.0 / z) * math.log(om / m)
                        + special.gammaln(m + 1.0 / z) - special.gammaln(m))

    def amplitude_scale(self) -> float:
        if self.is_fading and self.normalize:
            return 1.0 / math.sqrt(self.raw_second_moment())
        return 1.0

    def pdf(self, h):
        """Amplitude density of the generalized Nakagami law (raw scale)."""
        h = np.asarray(h, dtype=float)
        if not self.is_fading:
            raise ValueError("the unit-gain channel has no continuous density")
        m, om, z = self.m_shape, self.omega, self.z_gen
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = (math.log(2.0 * z) + m * math.log(m) - special.gammaln(m)
                    - m * math.log(om) + (2.0 * z * m - 1.0) * np.log(h)
                    - (m / om) * h ** (2.0 * z))
            out = np.where(h > 0, np.exp(logf), 0.0)
        return out

    def describe(self) -> str:
        if not self.is_fading:
            return "gaussian"
        tag = f"nakagami(m={self.m_shape:g},omega={self.omega:g},z={self.z_gen:g})"
        return tag + ("+norm" if self.normalize else "")


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class LinkParams:
    """Link-level constants shared by every chip of a run.

    Construction never raises for out-of-range values; use
    :func:`validate_params` (or :meth:`check`) to see what is wrong.
    """

    m_order: int = 2
    ep: float = 1.0
    n0: float = 1.0
    rho: float = 0.5
    c_dim: float = DEFAULT_C_DIM
    ns: int = 1
    sigma_e2: float = 0.0

    @classmethod
    def from_snr_db(cls, snr_db: float, **kw) -> "LinkParams":
        """Fix ``n0 = 1`` and derive ``ep`` from the nominal SNR in dB."""
        kw.setdefault("n0", 1.0)
        return cls(ep=float(db_to_linear(snr_db)) * kw["n0"], **kw)

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.m_order)))

    @property
    def snr(self) -> float:
        return self.ep / self.n0

    @property
    def snr_db(self) -> float:
        return float(linear_to_db(self.snr))

    @property
    def approximation_warning(self) -> bool:
        return self.c_dim < CLT_MIN_C

    def with_rho(self, rho: float) -> "LinkParams":
        return replace(self, rho=float(rho))

    def check(self) -> "LinkParams":
        report = validate_params(self)
        if not report.valid:
            raise ValueError("; ".join(report.errors))
        return self


def validate_params(p: LinkParams) -> ValidationReport:
    errors, warnings = [], []
    if not is_power_of_two(p.m_order) or p.m_order < 2:
        errors.append(f"m_order={p.m_order} is not a power of two >= 2")
    if not (0.0 <= p.rho <= 1.0):
        errors.append(f"rho={p.rho} outside [0, 1]")
    if not p.ep > 0:
        errors.append(f"ep={p.ep} must be > 0")
    if not p.n0 > 0:
        errors.append(f"n0={p.n0} must be > 0")
    if not p.c_dim > 0:
        errors.append(f"c_dim={p.c_dim} must be > 0")
    elif p.c_dim < CLT_MIN_C:
        warnings.append(
            f"c_dim={p.c_dim} < {CLT_MIN_C:g}: Gaussian square-noise "
            "approximation is not reliable")
    if not (isinstance(p.ns, (int, np.integer)) and p.ns >= 1):
        errors.append(f"ns={p.ns} must be an integer >= 1")
    if not p.sigma_e2 >= 0:
        errors.append(f"sigma_e2={p.sigma_e2} must be >= 0")
    return ValidationReport(tuple(errors), tuple(warnings))


def snr(p: LinkParams, h=1.0):
    """Instantaneous SNR ``h^2 Ep / N0``."""
    return np.asarray(h, dtype=float) ** 2 * p.ep / p.n0


class Source(str, enum.Enum):
    THEORY = "theory"
    SIMULATION = "simulation"


@dataclass(frozen=True)
class BerEstimate:
    """A BER point value with its 95% interval.

    ``errors_counted``/``trials`` are set for simulation results. For
    theory results evaluated by sampling, ``stderr`` carries the Monte Carlo
    standard error of the expectation and the interval is normal-based.
    """

    ber: float
    ci95_low: float
    ci95_high: float
    source: Source
    errors_counted: Optional[int] = None
    trials: Optional[int] = None
    stderr: Optional[float] = None
    low_confidence: bool = False

    @classmethod
    def exact(cls, ber: float) -> "BerEstimate":
        return cls(float(ber), float(ber), float(ber), Source.THEORY, stderr=0.0)


@dataclass(frozen=True)
class CapacityEstimate:
    capacity: float
    stderr: float
    draws: int
    source: Source = Source.THEORY
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.capacity - 1.96 * self.stderr, self.capacity + 1.96 * self.stderr)
