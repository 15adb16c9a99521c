"""Symbol-level simulation and theory for ultrasonic M-PPM links with
coherent, energy, and power-splitting receivers."""

__version__ = "0.1.0"

from .core import (BerEstimate, CapacityEstimate, ChannelKind, ChannelModel,
                   LinkParams, ReceiverKind, Source, ValidationReport,
                   db_to_linear, linear_to_db, q_function, snr, validate_params)
from .channel import (ChannelDraw, NoiseDraw, SquareNoiseMode, draw_channel,
                      sample_estimation_error, sample_fading, sample_noise)
from .modem import (ChipObservation, SymbolFrame, demodulate, modulate, spread,
                    synthesize, synthesize_chip)
from .receivers import (Decision, decide, decide_cd, decide_ed, decide_sdjd,
                        decide_sdsd, decide_spread)
from .theory import (ConditionedBerQuery, QuadratureError, QuadratureScheme,
                     QuadratureSpec, apply_spreading, average_optimal_rho,
                     ber_2ppm, ber_2ppm_closed, ber_cd, ber_ed, ber_faded,
                     ber_mppm_numeric, bit_error_from_symbol, capacity,
                     conditioned_ber, optimal_rho, signal_space_distance)
from .montecarlo import CountMode, SimConfig, SweepPoint, simulate_ber, sweep

__all__ = [
    "__version__",
    "BerEstimate",
    "CapacityEstimate",
    "ChannelDraw",
    "ChannelKind",
    "ChannelModel",
    "ChipObservation",
    "ConditionedBerQuery",
    "CountMode",
    "Decision",
    "LinkParams",
    "NoiseDraw",
    "QuadratureError",
    "QuadratureScheme",
    "QuadratureSpec",
    "ReceiverKind",
    "Source",
    "SquareNoiseMode",
    "SimConfig",
    "SweepPoint",
    "SymbolFrame",
    "ValidationReport",
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
    "db_to_linear",
    "decide",
    "decide_cd",
    "decide_ed",
    "decide_sdjd",
    "decide_sdsd",
    "decide_spread",
    "demodulate",
    "draw_channel",
    "linear_to_db",
    "modulate",
    "optimal_rho",
    "q_function",
    "sample_estimation_error",
    "sample_fading",
    "sample_noise",
    "signal_space_distance",
    "simulate_ber",
    "snr",
    "spread",
    "sweep",
    "synthesize",
    "synthesize_chip",
    "validate_params",
]
