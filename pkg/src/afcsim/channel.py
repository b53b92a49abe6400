"""Photonic channel between two cavities.

One photon transfer maps ``|0>_s|0>_r -> |0>_s|0>_r T0`` and
``|1>_s|0>_r -> |0>_s|1>_r T1 + |0>_s|0>_r Ta``. For the absorption-only
environment ``T0 = 1``, ``|T1| = exp(-kappa tau) = exp(-l / 2 l0)`` and the
absorption branch carries the remaining weight ``1 - exp(-2 kappa tau)``.
Non-stationary behaviour enters as a start-time dependent unit phase on
``T1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Hashable, Protocol

from .errors import ConfigError, PreconditionError
from .states import SQRT_HALF, BranchState, phi_plus_overlap

PARAM_TOL = 1e-12


class PhaseJitter(Protocol):
    stationary: bool
    kernel_code: int

    def phase(self, t: float) -> float: ...

    def kernel_params(self) -> tuple[float, float]: ...


@dataclass(frozen=True)
class NoJitter:
    """Stationary environment: the success amplitude does not depend on start time."""

    stationary = True
    kernel_code = 0

    def phase(self, t: float) -> float:
        return 0.0

    def kernel_params(self) -> tuple[float, float]:
        return 0.0, 0.0


@dataclass(frozen=True)
class LinearDrift:
    """Phase ``omega * t``, e.g. a fixed detuning of the Raman pulses.

    Two transfers started ``tau`` apart pick up a constant relative phase
    ``omega * tau`` regardless of when the pair is attempted.
    """

    omega: float
    kernel_code = 1

    @property
    def stationary(self) -> bool:
        return self.omega == 0.0

    def phase(self, t: float) -> float:
        return self.omega * t

    def kernel_params(self) -> tuple[float, float]:
        return self.omega, 0.0


@dataclass(frozen=True)
class SinusoidalJitter:
    """Phase ``amplitude * sin(omega * t)``: a periodic pulse-timing error."""

    amplitude: float
    omega: float
    kernel_code = 2

    @property
    def stationary(self) -> bool:
        return self.amplitude == 0.0 or self.omega == 0.0

    def phase(self, t: float) -> float:
        return self.amplitude * math.sin(self.omega * t)

    def kernel_params(self) -> tuple[float, float]:
        return self.amplitude, self.omega


JITTER_MODELS = {"none": NoJitter, "drift": LinearDrift, "sine": SinusoidalJitter}


@dataclass(frozen=True)
class ChannelModel:
    """Loss and phase model of one cavity-fiber-cavity link.

    Give either ``kappa`` and ``tau`` or the fiber length ``l`` and half
    length ``l0`` (or both, if consistent). Built from lengths alone, the
    transfer time defaults to one time unit.
    """

    kappa: float | None = None
    tau: float | None = None
    l: float | None = None
    l0: float | None = None
    phase_jitter: PhaseJitter = field(default_factory=NoJitter)
    kappa_tau: float = field(init=False)

    def __post_init__(self):
        for name in ("kappa", "tau", "l", "l0"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be a finite non-negative number, got {value}", name)
        if self.tau is not None and self.tau <= 0:
            raise ConfigError("tau must be positive", "tau")
        if self.l0 is not None and self.l0 <= 0:
            raise ConfigError("l0 must be positive", "l0")
        by_time = None
        if self.kappa is not None or self.tau is not None:
            if self.kappa is None or self.tau is None:
                raise ConfigError("kappa and tau must be given together", "kappa")
            by_time = self.kappa * self.tau
        by_length = None
        if self.l is not None or self.l0 is not None:
            if self.l is None or self.l0 is None:
                raise ConfigError("l and l0 must be given together", "l0")
            by_length = self.l / (2.0 * self.l0)
        if by_time is None and by_length is None:
            raise ConfigError("channel needs (kappa, tau) or (l, l0)", "kappa")
        if by_time is not None and by_length is not None:
            if abs(math.exp(-by_time) - math.exp(-by_length)) > PARAM_TOL:
                raise ConfigError(
                    f"inconsistent channel: exp(-kappa*tau)={math.exp(-by_time):.15g} "
                    f"but exp(-l/2l0)={math.exp(-by_length):.15g}",
                    "l",
                )
        kt = by_time if by_time is not None else by_length
        if self.tau is None:
            object.__setattr__(self, "tau", 1.0)
            object.__setattr__(self, "kappa", kt)
        object.__setattr__(self, "kappa_tau", kt)

    @classmethod
    def from_kappa_tau(cls, kappa_tau: float, tau: float = 1.0, phase_jitter=None) -> "ChannelModel":
        return cls(kappa=kappa_tau / tau, tau=tau, phase_jitter=phase_jitter or NoJitter())

    @property
    def stationary(self) -> bool:
        return self.phase_jitter.stationary

    @property
    def success_magnitude(self) -> float:
        return math.exp(-self.kappa_tau)

    def amplitude(self, t: float) -> complex:
        """Success amplitude ``T1(t)`` for a transfer starting at ``t``."""
        return self.success_magnitude * cmath.exp(1j * self.phase_jitter.phase(t))

    def absorption_weight(self, t: float = 0.0) -> float:
        """Aggregate squared norm of ``Ta``; ``-expm1`` keeps small losses accurate."""
        return -math.expm1(-2.0 * self.kappa_tau)


def success_probability(channel: ChannelModel) -> float:
    """``|T1|^2 = exp(-2 kappa tau) = exp(-l/l0)``."""
    return math.exp(-2.0 * channel.kappa_tau)


def transfer(
    state: BranchState,
    sender: str,
    receiver: str,
    channel: ChannelModel,
    t: float,
    index: Hashable = 0,
) -> BranchState:
    """Apply the photonic channel from ``sender`` to ``receiver`` starting at time ``t``.

    Absorption branches go to a fresh sector extended by the event tag
    ``(t, index)``; pass distinct ``index`` values for transfers that share a
    start time.
    """
    if sender == receiver:
        raise ConfigError("sender and receiver must be distinct atoms")
    s, r = state.index(sender), state.index(receiver)
    if state.values(receiver) != {0}:
        raise PreconditionError(f"receiver {receiver!r} is not in |0> in every branch")
    a1 = channel.amplitude(t)
    loss = math.sqrt(channel.absorption_weight(t))
    event = (t, index)

    def photon(label, sector, amp):
        if not label[s]:
            yield label, sector, amp
            return
        emptied = list(label)
        emptied[s] = 0
        arrived = list(emptied)
        arrived[r] = 1
        yield tuple(arrived), sector, amp * a1
        if loss > 0.0:
            yield tuple(emptied), sector + (event,), amp * loss

    return state.map_branches(photon)


def direct_epr(channel: ChannelModel, t: float = 0.0) -> BranchState:
    """Local CNOT onto a courier atom, then one uncorrected transfer to B.

    Returns the normalized two-atom state over ``(A, B)``; its Phi+ overlap
    is ``|(1 + T1(t)) / 2|^2``.
    """
    state = BranchState.qubit("A", SQRT_HALF, SQRT_HALF).add_atom("A2").add_atom("B")
    state = state.cnot("A", "A2")
    state = transfer(state, "A2", "B", channel, t)
    return state.remove_atom("A2")


def direct_epr_fidelity(channel: ChannelModel, t: float = 0.0) -> float:
    """Closed form ``|(1 + T1(t)) / 2|^2`` of the direct attempt."""
    return abs((1.0 + channel.amplitude(t)) / 2.0) ** 2


def direct_epr_overlap(channel: ChannelModel, t: float = 0.0) -> float:
    """Phi+ overlap of :func:`direct_epr` evaluated on its branches."""
    return phi_plus_overlap(direct_epr(channel, t))


def make_jitter(kind: str = "none", omega: float = 0.0, amplitude: float = 0.0) -> PhaseJitter:
    if kind == "none":
        return NoJitter()
    if kind == "drift":
        return LinearDrift(omega)
    if kind == "sine":
        return SinusoidalJitter(amplitude, omega)
    raise ConfigError(f"unknown jitter model {kind!r}; expected one of {sorted(JITTER_MODELS)}", "jitter")
