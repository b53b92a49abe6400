"""Self-purification of one EPR pair with two auxiliary atoms.

Each step builds an auxiliary pair ``(A1, B1)`` through the AFC, applies a
bilateral CNOT (auxiliary atoms as controls, pair atoms as targets), and
measures the auxiliary atoms in the X basis. A Phi- on the pair flips the
phase of the auxiliary pair, so the parity of the two results compares the
pair's Bell phase with that of the auxiliary pair:

* parity 0 (Up):   ``E+ -> (S0+S1)/2 E+``,  ``E- -> (S0-S1)/2 E-``
* parity 1 (Down): ``E+ -> (S0-S1)/2 E+``,  ``E- -> (S0+S1)/2 E-``

With the reflecting barrier, a pair whose fidelity falls below the first
AFC fidelity ``F0`` is replaced by a fresh AFC pair.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .afc import RetryPolicy, Verdict, afc_transmit, build_epr_via_afc
from .channel import ChannelModel
from .errors import ConfigError, ConvergenceError, DegenerateStateError, PreconditionError
from .rng import substream
from .states import BranchState, EprPairState, pair_to_state, to_pair

DEFAULT_STEP_CAP = 10**4
BARRIER_TOL = 1e-12
PAIR_ATOMS = ("A", "B")
AUX_ATOMS = ("A1", "B1")
AFC_BACKUPS = ("A2", "A3", "B2")
ALL_ATOMS = frozenset(PAIR_ATOMS + AUX_ATOMS + AFC_BACKUPS)


class Step(enum.Enum):
    UP = "up"
    DOWN = "down"

    @property
    def symbol(self) -> str:
        return "U" if self is Step.UP else "D"


@dataclass(frozen=True)
class PurifyStepResult:
    outcome: Step
    new_pair: EprPairState
    prob: float
    p_up: float
    attempts: int
    t_end: float
    s0: complex = 0j
    s1: complex = 0j


@dataclass
class Trajectory:
    """Fidelity after the initial AFC and after every step (post-reset value at reset steps)."""

    fidelities: list[float] = field(default_factory=list)
    resets: list[int] = field(default_factory=list)
    attempts_total: int = 0
    t_end: float = 0.0
    outcomes: str = ""

    @property
    def steps(self) -> int:
        return max(len(self.fidelities) - 1, 0)

    @property
    def final_fidelity(self) -> float:
        return self.fidelities[-1]


def _parity_parts(state: BranchState) -> dict[int, list[BranchState]]:
    parts: dict[int, list[BranchState]] = {0: [], 1: []}
    for x1 in (0, 1):
        a = state.projected("A1", x1)
        if a is None:
            continue
        for x2 in (0, 1):
            b = a.projected("B1", x2)
            if b is not None:
                parts[x1 ^ x2].append(b)
    return parts


def purify_step(
    pair: EprPairState,
    channel: ChannelModel,
    t: float,
    policy: RetryPolicy,
    force: Step | None = None,
    forced_afc: Sequence[Verdict] = (),
) -> PurifyStepResult:
    """One purification step at branch level.

    Draw order: one uniform per AFC attempt for the auxiliary pair, one for
    the Up/Down parity, one for the local outcome inside the parity class.
    """
    state = pair_to_state(pair.normalized(), *PAIR_ATOMS)
    state = state.add_atom("A1").h("A1")
    sent = afc_transmit(state, channel, policy, t, forced_afc, "A1", "B1", AFC_BACKUPS)
    state = sent.state.cnot("A1", "A").cnot("B1", "B").h("A1").h("B1")
    parts = _parity_parts(state)
    weights = {p: math.fsum(s.norm2 for s in parts[p]) for p in (0, 1)}
    total = weights[0] + weights[1]
    if total <= 0:
        raise DegenerateStateError("purification step on a zero-norm state")
    p_up = weights[0] / total
    if force is None:
        if policy.rng is None:
            raise ConfigError("purify_step needs an rng or a forced outcome")
        parity = 0 if policy.rng.random() < p_up else 1
    else:
        parity = 0 if force is Step.UP else 1
        if weights[parity] <= 0:
            raise DegenerateStateError(f"outcome {force} has zero probability")
    candidates = [s for s in parts[parity] if s.norm2 > 0]
    local = policy.rng.random() if policy.rng is not None else 0.0
    acc, chosen = 0.0, candidates[-1]
    for s in candidates:
        acc += s.norm2 / weights[parity]
        if local < acc:
            chosen = s
            break
    for atom in AUX_ATOMS:
        if chosen.values(atom) != {0}:
            chosen = chosen.x(atom)
        chosen = chosen.remove_atom(atom)
    assert set(chosen.atoms) <= ALL_ATOMS
    new = to_pair(chosen.compact_sectors(), *PAIR_ATOMS).normalized()
    new = EprPairState(new.e_plus, new.e_minus, pair.history + 1)
    outcome = Step.UP if parity == 0 else Step.DOWN
    prob = p_up if parity == 0 else 1.0 - p_up
    return PurifyStepResult(
        outcome, new, prob, p_up, sent.attempts, sent.t_end, sent.outcome.s0_applied, sent.outcome.s1_applied
    )


def recursion_update(pair: EprPairState, s0: complex, s1: complex, outcome: Step) -> EprPairState:
    """Apply ``(S0 +- S1)/2`` to the records directly (no circuit)."""
    plus, minus = (s0 + s1) / 2, (s0 - s1) / 2
    if outcome is Step.DOWN:
        plus, minus = minus, plus
    return pair.scaled(plus, minus)


def purify_with_barrier(
    channel: ChannelModel,
    f_target: float,
    policy: RetryPolicy,
    step_cap: int = DEFAULT_STEP_CAP,
    t0: float = 0.0,
    barrier: bool = True,
    forced_steps: Sequence[Step] = (),
) -> Trajectory:
    """Purify until the fidelity reaches ``f_target`` (branch-level engine).

    Raises :class:`ConvergenceError` carrying the trajectory if ``step_cap``
    steps do not suffice.
    """
    if not 0.5 < f_target < 1.0:
        raise ConfigError("f_target must lie in (1/2, 1)", "f_target")
    first = build_epr_via_afc(channel, policy, t0)
    pair, t = first.pair, first.t_end
    f0 = pair.fidelity
    traj = Trajectory([f0], [], first.attempts, t)
    if f0 <= 0.5:
        raise PreconditionError(f"single-AFC fidelity {f0:.6g} is not above 1/2")
    fid = f0
    while fid < f_target:
        if traj.steps >= step_cap:
            raise ConvergenceError(f"fidelity {fid:.6g} < {f_target} after {step_cap} steps", traj)
        k = traj.steps
        force = forced_steps[k] if k < len(forced_steps) else None
        res = purify_step(pair, channel, t, policy, force)
        pair, t = res.new_pair, res.t_end
        traj.attempts_total += res.attempts
        traj.outcomes += res.outcome.symbol
        fid = pair.fidelity
        if barrier and fid < f0 - BARRIER_TOL:
            fresh = build_epr_via_afc(channel, policy, t)
            pair, t = fresh.pair, fresh.t_end
            traj.attempts_total += fresh.attempts
            traj.resets.append(k + 1)
            fid = pair.fidelity
        traj.fidelities.append(fid)
        traj.t_end = t
    return traj


# -- ensemble engine (scalar kernels) ---------------------------------------


@dataclass
class KernelTrajectory:
    status: int
    steps: int
    attempts: int
    resets: int
    fidelity: float
    t_end: float
    fidelities: list[float] | None
    reset_steps: list[int] | None


def simulate_trajectory(
    channel: ChannelModel,
    policy: RetryPolicy,
    seed: int,
    trial: int,
    f_target: float,
    step_cap: int = DEFAULT_STEP_CAP,
    t0: float = 0.0,
    barrier: bool = True,
    record: bool = False,
    backend: str | None = None,
) -> KernelTrajectory:
    """One kernel trajectory on substream ``(seed, trial)``.

    Uses the scalar record representation, which is exact for the jitter
    models here (every branch shares one environment sector after each
    measured step). Status codes are documented in ``_kernels_py``.
    """
    p = kernels.KernelParams.from_model(channel, policy)
    out = kernels.get(backend).purify_trial(
        substream(seed, trial), *p.args, t0, p.max_attempts, f_target, step_cap, barrier, record
    )
    return KernelTrajectory(*out)


def purify_ensemble(
    channel: ChannelModel,
    n_steps: int,
    trials: int,
    seed: int,
    policy: RetryPolicy | None = None,
    barrier: bool = True,
    backend: str | None = None,
) -> np.ndarray:
    """Fidelity matrix ``(trials, n_steps + 1)`` for fixed-length barrier walks.

    Trajectories that lose the AFC (retry cap) are rejected with an error.
    """
    policy = policy or RetryPolicy()
    out = np.empty((trials, n_steps + 1))
    for i in range(trials):
        # target above 1: run exactly n_steps
        tr = simulate_trajectory(channel, policy, seed, i, 2.0, n_steps, 0.0, barrier, True, backend)
        if tr.status not in (0, 1) or len(tr.fidelities) != n_steps + 1:
            raise ConvergenceError(f"trajectory {i} ended early with status {tr.status}", tr)
        out[i] = tr.fidelities
    return out


def convergence_fit(mean_fidelity: Sequence[float], floor: float = 1e-8) -> tuple[float, float, float, int]:
    """Least-squares line through ``log(1 - F_N)`` up to the first step below ``floor``.

    Returns ``(slope, intercept, r_squared, points_used)``.
    """
    gap = 1.0 - np.asarray(mean_fidelity, dtype=float)
    below = np.nonzero(gap <= floor)[0]
    stop = int(below[0]) if below.size else gap.size
    if stop < 3:
        raise ValueError("fewer than three pre-saturation points")
    n = np.arange(stop)
    y = np.log(gap[:stop])
    slope, intercept = np.polyfit(n, y, 1)
    resid = y - (slope * n + intercept)
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
    return float(slope), float(intercept), r2, stop
