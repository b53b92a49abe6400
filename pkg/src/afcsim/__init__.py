"""Entanglement over lossy photonic links: absorption-free channel, self-purification and repeater planning."""

__version__ = "0.1.0"

from .afc import RetryPolicy, Verdict, afc_attempt, afc_branches, afc_transmit, build_epr_via_afc, encode
from .channel import ChannelModel, LinearDrift, NoJitter, SinusoidalJitter, direct_epr, transfer
from .errors import (
    AfcSimError,
    ConfigError,
    ConvergenceError,
    DegenerateStateError,
    PreconditionError,
    RetryExhaustedError,
)
from .planner import (
    compound_cost,
    connect,
    connect_chain,
    connect_pairs,
    doubling_schedule,
    min_cost,
    optimal_segments,
    required_initial_fidelity,
    simple_cost,
)
from .purification import Step, purify_step, purify_with_barrier
from .states import BranchState, EprPairState, fidelity

__all__ = [
    "AfcSimError", "BranchState", "ChannelModel", "ConfigError", "ConvergenceError",
    "DegenerateStateError", "EprPairState", "LinearDrift", "NoJitter", "PreconditionError",
    "RetryExhaustedError", "RetryPolicy", "SinusoidalJitter", "Step", "Verdict",
    "afc_attempt", "afc_branches", "afc_transmit", "build_epr_via_afc", "compound_cost",
    "connect", "connect_chain", "connect_pairs", "direct_epr", "doubling_schedule", "encode",
    "fidelity", "min_cost", "optimal_segments", "purify_step", "purify_with_barrier",
    "required_initial_fidelity", "simple_cost", "transfer",
]
