"""Absorption-free channel (AFC): encode, transmit twice, measure, retry.

The qubit ``chi0|0> + chi1|1>`` on the sender is spread over three atoms
(sender, courier ``A2``, backup ``A3``) as
``chi0(|000> + |111>) + chi1(|001> + |110>)``: the qubit lives in the
parity of sender and ``A3`` while the sender value is a uniformly random
*path* bit ``a``. The courier then sends ``a`` to ``B2`` and, after a flip of
the sender, ``not a`` to the receiver, so every branch carries exactly one
photon. A lost photon leaves both receiver atoms in ``|0>``; their parity
therefore flags the error without revealing the qubit.

* No error: measuring ``A3`` ties the path bit to the qubit value, giving
  ``chi0|00> S0 + chi1|11> S1`` with ``(S0, S1) = (T1(t), T1(t+tau))``
  (``forward``) or the reverse ordering, depending on the outcome.
* Error: the path bit is peeled off into ``A3`` and measured, which selects
  the absorption record but leaves ``chi0|0> + chi1|1>`` on the sender intact,
  so the attempt can simply be repeated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .channel import ChannelModel, transfer
from .errors import ConfigError, DegenerateStateError, PreconditionError, RetryExhaustedError
from .states import SQRT_HALF, BranchState, EprPairState, to_pair

DEFAULT_MAX_ATTEMPTS = 10**6
BACKUPS = ("A2", "A3", "B2")


class Verdict(enum.Enum):
    OK = "ok"
    ERROR = "error"

    @property
    def symbol(self) -> str:
        return "O" if self is Verdict.OK else "E"


@dataclass(frozen=True)
class AfcOutcome:
    """One measured branch of a single AFC attempt.

    ``state`` is the unnormalized post-measurement state, ``probability``
    its weight relative to the input norm. ``s0_applied``/``s1_applied`` are
    the environment factors attached to the 0- and 1-branch of the qubit
    (equal to the absorption amplitude on an error).
    """

    verdict: Verdict
    state: BranchState
    attempt_index: int
    s0_applied: complex
    s1_applied: complex
    probability: float
    ordering: str = ""


@dataclass(frozen=True)
class RetryPolicy:
    """Retry cap, random stream and inter-attempt timing overhead.

    ``max_attempts=None`` retries without limit.
    """

    max_attempts: int | None = DEFAULT_MAX_ATTEMPTS
    rng: np.random.Generator | None = None
    overhead: float = 0.0

    def __post_init__(self):
        if self.max_attempts is not None and self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1", "max_attempts")
        if self.overhead < 0:
            raise ConfigError("overhead must be non-negative", "overhead")

    def attempt_duration(self, channel: ChannelModel) -> float:
        return 2.0 * channel.tau + self.overhead


class Transmission(NamedTuple):
    state: BranchState
    attempts: int
    t_end: float
    outcome: AfcOutcome

    @property
    def photon_sends(self) -> int:
        return 2 * self.attempts


class AfcPair(NamedTuple):
    pair: EprPairState
    attempts: int
    t_end: float
    s0: complex
    s1: complex


def encode(chi0: complex, chi1: complex) -> BranchState:
    """Three-atom encoding ``chi0(|000>+|111>) + chi1(|001>+|110>)`` over (A, A2, A3).

    Built by a Hadamard on ``A3`` and the CNOTs ``A3 -> A`` and ``A -> A2``;
    the circuit's ``1/sqrt 2`` is removed so the amplitudes match the display.
    """
    if chi0 == 0 and chi1 == 0:
        raise DegenerateStateError("cannot encode the zero vector")
    state = BranchState.qubit("A", chi0, chi1).add_atom("A2").add_atom("A3")
    return _encode_circuit(state, "A", "A2", "A3").scaled(math.sqrt(2.0))


def _encode_circuit(state: BranchState, sender: str, courier: str, backup: str) -> BranchState:
    return state.h(backup).cnot(backup, sender).cnot(sender, courier)


def _prepare(state: BranchState, sender: str, receiver: str, backups: Sequence[str]) -> BranchState:
    state.index(sender)
    if receiver not in state.atoms:
        state = state.add_atom(receiver)
    for atom in backups:
        if atom not in state.atoms:
            state = state.add_atom(atom)
    for atom in (receiver, *backups):
        if state.values(atom) != {0}:
            raise PreconditionError(f"atom {atom!r} must start in |0>")
    return state


def afc_branches(
    state: BranchState,
    channel: ChannelModel,
    t: float,
    sender: str = "A",
    receiver: str = "B",
    backups: Sequence[str] = BACKUPS,
    attempt_index: int = 0,
) -> list[AfcOutcome]:
    """All four measured branches of one attempt, without sampling.

    Two no-error branches (forward/reverse ordering) and two error branches
    (photon lost in the first/second slot). Zero-weight branches are omitted.
    """
    courier, backup, rbackup = backups
    input_norm2 = state.norm2
    if input_norm2 <= 0:
        raise DegenerateStateError("zero-norm AFC input")
    st = _prepare(state, sender, receiver, backups)
    t2 = t + channel.tau
    st = _encode_circuit(st, sender, courier, backup)
    st = transfer(st, courier, rbackup, channel, t, index=(attempt_index, 0))
    st = st.x(sender).cnot(sender, courier)
    st = transfer(st, courier, receiver, channel, t2, index=(attempt_index, 1))
    # one photon per branch: parity 1 <=> it arrived
    st = st.cnot(receiver, rbackup)

    def finish(part: BranchState) -> BranchState:
        for atom in backups:
            if atom not in state.atoms:
                part = part.remove_atom(atom)
        return part

    outcomes = []
    ok = st.projected(rbackup, 1)
    if ok is not None:
        ok = ok.x(rbackup)
        for m in (0, 1):
            part = ok.projected(backup, m)
            if part is None:
                continue
            # path bit a = x xor m; sender and receiver both hold not-a
            part = part.x(backup) if m else part.x(sender).x(receiver)
            s_first, s_second = channel.amplitude(t), channel.amplitude(t2)
            s0, s1 = (s_first, s_second) if m else (s_second, s_first)
            outcomes.append(
                AfcOutcome(
                    Verdict.OK, finish(part), attempt_index, s0, s1,
                    part.norm2 / input_norm2, "forward" if m else "reverse",
                )
            )
    err = st.projected(rbackup, 0)
    if err is not None:
        # sender = not a, backup = a xor x  ->  sender = x, backup = a
        err = err.x(sender).cnot(sender, backup).swap(sender, backup)
        loss = math.sqrt(channel.absorption_weight(t))
        for a in (0, 1):
            part = err.projected(backup, a)
            if part is None:
                continue
            part = part.x(backup) if a else part
            outcomes.append(
                AfcOutcome(Verdict.ERROR, finish(part), attempt_index, loss, loss, part.norm2 / input_norm2)
            )
    return outcomes


def afc_attempt(
    state: BranchState,
    channel: ChannelModel,
    t: float,
    rng: np.random.Generator | None = None,
    force: Verdict | None = None,
    sender: str = "A",
    receiver: str = "B",
    backups: Sequence[str] = BACKUPS,
    attempt_index: int = 0,
) -> AfcOutcome:
    """Run one attempt and sample its measured branch.

    ``force`` restricts sampling to one verdict (its internal outcomes are
    still drawn with their relative weights).
    """
    outcomes = afc_branches(state, channel, t, sender, receiver, backups, attempt_index)
    if force is not None:
        outcomes = [o for o in outcomes if o.verdict is force]
    total = math.fsum(o.probability for o in outcomes)
    if total <= 0:
        raise DegenerateStateError(f"AFC outcome {force} has zero probability")
    if len(outcomes) == 1:
        return outcomes[0]
    if rng is None:
        raise ConfigError("afc_attempt needs an rng to sample the measurement")
    u = rng.random() * total
    acc = 0.0
    for o in outcomes:
        acc += o.probability
        if u < acc:
            return o
    return outcomes[-1]


def afc_transmit(
    state: BranchState,
    channel: ChannelModel,
    policy: RetryPolicy,
    t0: float = 0.0,
    forced: Sequence[Verdict] = (),
    sender: str = "A",
    receiver: str = "B",
    backups: Sequence[str] = BACKUPS,
) -> Transmission:
    """Repeat AFC attempts until one reports no error.

    Attempt ``k`` starts at ``t0 + k * (2 tau + overhead)``. The first
    ``len(forced)`` verdicts are imposed instead of sampled. Between attempts
    the restored state is renormalized (it is the conditional state after an
    observed error).
    """
    step = policy.attempt_duration(channel)
    k = 0
    while policy.max_attempts is None or k < policy.max_attempts:
        t = t0 + k * step
        force = forced[k] if k < len(forced) else None
        outcome = afc_attempt(state, channel, t, policy.rng, force, sender, receiver, backups, k)
        if outcome.verdict is Verdict.OK:
            return Transmission(outcome.state, k + 1, t + step, outcome)
        state = outcome.state.normalized().compact_sectors()
        k += 1
    raise RetryExhaustedError(
        f"no error-free AFC attempt in {policy.max_attempts} tries", state, k, t0 + k * step
    )


def build_epr_via_afc(
    channel: ChannelModel,
    policy: RetryPolicy,
    t0: float = 0.0,
    forced: Sequence[Verdict] = (),
    sender: str = "A",
    receiver: str = "B",
    backups: Sequence[str] = BACKUPS,
) -> AfcPair:
    """Send ``(|0> + |1>)/sqrt 2`` through the AFC and read off the Bell-basis pair.

    ``|00> S0 + |11> S1`` becomes ``Phi+ (S0+S1)/2 + Phi- (S0-S1)/2``; the
    returned pair is normalized.
    """
    start = BranchState.qubit(sender, SQRT_HALF, SQRT_HALF)
    sent = afc_transmit(start, channel, policy, t0, forced, sender, receiver, backups)
    pair = to_pair(sent.state.compact_sectors(), sender, receiver).normalized()
    return AfcPair(pair, sent.attempts, sent.t_end, sent.outcome.s0_applied, sent.outcome.s1_applied)
