"""Transmission cost and fidelity calculus for segmented (compound) fibers.

With per-segment success probability ``p(l) = exp(-l/l0)`` a plain fiber
needs ``exp(l/l0)`` sends on average, a fiber cut into ``N`` checkpointed
segments ``N exp(l/(N l0))``. Connecting pairs multiplies ``2F - 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError, PreconditionError
from .states import EprPairState


class Schedule(enum.Enum):
    SEQUENTIAL = "sequential"
    DOUBLING = "doubling"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _check_lengths(l: float, l0: float, strict: bool = False) -> None:
    if not (l0 > 0 and math.isfinite(l0)):
        raise ConfigError(f"l0 must be positive, got {l0}", "l0")
    if not math.isfinite(l) or l < 0 or (strict and l == 0):
        raise ConfigError(f"l must be {'positive' if strict else 'non-negative'}, got {l}", "l")


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def simple_cost(l: float, l0: float) -> float:
    """Average sends over an unsegmented fiber, ``exp(l/l0)``."""
    _check_lengths(l, l0)
    return _exp(l / l0)


def compound_cost(l: float, l0: float, n: int) -> float:
    """Average sends over ``n`` checkpointed segments, ``n exp(l/(n l0))``."""
    _check_lengths(l, l0)
    if int(n) != n or n < 1:
        raise ConfigError(f"segment count must be an integer >= 1, got {n}", "n_segments")
    return n * _exp(l / (n * l0))


def optimal_segments(l: float, l0: float) -> int:
    """Integer segment count minimizing :func:`compound_cost`.

    ``N exp(x/N)`` is convex in ``N`` with its continuum minimum at
    ``x = l/l0``, so the integer optimum is ``floor(x)`` or ``ceil(x)``;
    ties go to the smaller count.
    """
    _check_lengths(l, l0, strict=True)
    x = l / l0
    lo, hi = max(1, math.floor(x)), max(1, math.ceil(x))
    return lo if compound_cost(l, l0, lo) <= compound_cost(l, l0, hi) else hi


def min_cost(l: float, l0: float) -> float:
    """Continuum minimum ``(l/l0) e`` reached with checkpoints every ``l0``."""
    _check_lengths(l, l0, strict=True)
    return (l / l0) * math.e


@dataclass(frozen=True)
class CostReport:
    """Costs for one ``(l, l0)``; ``compound_cost`` is taken at ``n_segments``."""

    simple_cost: float
    compound_cost: float
    n_segments: int
    min_cost: float
    n_continuum: float

    @property
    def integer_gap(self) -> float:
        """Relative excess of the integer optimum over the continuum bound."""
        return self.compound_cost / self.min_cost - 1.0

    @classmethod
    def evaluate(cls, l: float, l0: float) -> "CostReport":
        n = optimal_segments(l, l0)
        return cls(simple_cost(l, l0), compound_cost(l, l0, n), n, min_cost(l, l0), l / l0)


def connect(f1: float, f2: float, quality: float = 1.0) -> float:
    """Fidelity after joining two pairs: ``2F - 1 = q (2F1 - 1)(2F2 - 1)``.

    ``quality`` multiplies ``2F - 1`` per connection to model imperfect
    local operations; 1 means a perfect Bell measurement.
    """
    for name, f in (("f1", f1), ("f2", f2)):
        if not 0.0 <= f <= 1.0:
            raise ConfigError(f"{name} must lie in [0, 1], got {f}", name)
    if not 0.0 <= quality <= 1.0:
        raise ConfigError(f"quality must lie in [0, 1], got {quality}", "connection_quality")
    return 0.5 * (1.0 + quality * (2.0 * f1 - 1.0) * (2.0 * f2 - 1.0))


def connect_chain(f0: float, n: int, quality: float = 1.0) -> float:
    """Fidelity of ``n`` equal pairs joined end to end, ``(1 + (2F0-1)^n)/2``."""
    if int(n) != n or n < 1:
        raise ConfigError(f"pair count must be an integer >= 1, got {n}", "n_segments")
    if not 0.0 <= f0 <= 1.0:
        raise ConfigError(f"f0 must lie in [0, 1], got {f0}", "f0")
    return 0.5 * (1.0 + quality ** (n - 1) * (2.0 * f0 - 1.0) ** n)


def fold_connect(fidelities: Sequence[float], quality: float = 1.0) -> float:
    """Left fold of :func:`connect` over arbitrary segment fidelities."""
    if not fidelities:
        raise ConfigError("need at least one pair", "n_segments")
    acc = fidelities[0]
    for f in fidelities[1:]:
        acc = connect(acc, f, quality)
    return acc


def doubling_schedule(f0: float, n: int, quality: float = 1.0) -> list[tuple[int, int, float]]:
    """Rows ``(round, pairs, fidelity)`` when neighbouring pairs are joined in parallel.

    Round ``k`` leaves ``n / 2**k`` pairs with ``2F_k - 1 = (2F0 - 1)^(2**k)``.
    """
    if not _is_power_of_two(n):
        raise ConfigError(f"doubling needs a power-of-two segment count, got {n}", "n_segments")
    rows = [(0, n, f0)]
    f, pairs, k = f0, n, 0
    while pairs > 1:
        f = connect(f, f, quality)
        pairs //= 2
        k += 1
        rows.append((k, pairs, f))
    return rows


def doubling_fold(fidelities: Sequence[float], quality: float = 1.0) -> list[list[float]]:
    """Doubling schedule on individual segment fidelities; returns every round."""
    if not _is_power_of_two(len(fidelities)):
        raise ConfigError("doubling needs a power-of-two number of pairs", "n_segments")
    rounds = [list(fidelities)]
    while len(rounds[-1]) > 1:
        cur = rounds[-1]
        rounds.append([connect(cur[i], cur[i + 1], quality) for i in range(0, len(cur), 2)])
    return rounds


def required_initial_fidelity(f_target: float, n: int) -> float:
    """Segment fidelity whose ``n``-fold connection gives ``f_target``."""
    if not 0.5 < f_target < 1.0:
        raise ConfigError(f"f_target must lie in (1/2, 1), got {f_target}", "f_target")
    if int(n) != n or n < 1:
        raise ConfigError(f"segment count must be an integer >= 1, got {n}", "n_segments")
    return 0.5 * (1.0 + (2.0 * f_target - 1.0) ** (1.0 / n))


def connect_pairs(p1: EprPairState, p2: EprPairState) -> EprPairState:
    """Join pairs ``A-C1`` and ``C2-B`` by a Bell measurement at the checkpoint.

    Independent environments give product sectors ``(s1, s2, tag)``: the
    matched records ``E+ E+`` and ``E- E-`` end up on Phi+ and the cross
    records on Phi-, so ``fidelity = F1 F2 + (1-F1)(1-F2)``.
    """
    for p in (p1, p2):
        if not isinstance(p, EprPairState):
            raise PreconditionError("connect_pairs takes two-branch EprPairState records")
        keys = set(p.e_plus) | set(p.e_minus)
        if not all(isinstance(k, tuple) for k in keys):
            raise PreconditionError("incompatible sector structure: sectors must be tuples")
    plus: dict = {}
    minus: dict = {}
    for s1 in set(p1.e_plus) | set(p1.e_minus):
        for s2 in set(p2.e_plus) | set(p2.e_minus):
            ap, am = p1.e_plus.get(s1, 0j), p1.e_minus.get(s1, 0j)
            bp, bm = p2.e_plus.get(s2, 0j), p2.e_minus.get(s2, 0j)
            plus[(s1, s2, "++")] = ap * bp
            plus[(s1, s2, "--")] = am * bm
            minus[(s1, s2, "+-")] = ap * bm
            minus[(s1, s2, "-+")] = am * bp
    return EprPairState(plus, minus, p1.history + p2.history)


@dataclass(frozen=True)
class RepeaterPlan:
    l: float
    l0: float
    n_segments: int
    f0: float
    f_target: float
    schedule: Schedule = Schedule.DOUBLING

    def __post_init__(self):
        _check_lengths(self.l, self.l0, strict=True)
        if int(self.n_segments) != self.n_segments or self.n_segments < 1:
            raise ConfigError("n_segments must be an integer >= 1", "n_segments")
        if self.schedule is Schedule.DOUBLING and not _is_power_of_two(self.n_segments):
            raise ConfigError("doubling needs a power-of-two segment count", "n_segments")
        if not 0.5 < self.f0 <= 1.0:
            raise ConfigError(f"f0 must lie in (1/2, 1], got {self.f0}", "f0")

    @property
    def segment_length(self) -> float:
        return self.l / self.n_segments

    @property
    def rounds(self) -> int:
        n = self.n_segments
        return n.bit_length() - 1 if self.schedule is Schedule.DOUBLING else n - 1

    @property
    def transmissions(self) -> float:
        return compound_cost(self.l, self.l0, self.n_segments)


def plan_repeater(
    l: float,
    l0: float,
    f_target: float,
    schedule: Schedule = Schedule.DOUBLING,
    n_segments: int | None = None,
) -> RepeaterPlan:
    """Pick a segment count and the per-segment fidelity that reaches ``f_target``.

    Without an explicit count the cost-optimal one is used; under the
    doubling schedule the cheapest power of two is taken instead.
    """
    if n_segments is None:
        n_segments = optimal_segments(l, l0)
        if schedule is Schedule.DOUBLING and not _is_power_of_two(n_segments):
            lo = 1 << (n_segments.bit_length() - 1)
            n_segments = min((lo, 2 * lo), key=lambda n: (compound_cost(l, l0, n), n))
    f0 = required_initial_fidelity(f_target, n_segments)
    return RepeaterPlan(l, l0, n_segments, f0, f_target, schedule)


def repurified_doubling_schedule(
    f0: float, n: int, f_working: float, rate: float, quality: float = 1.0
) -> list[tuple[int, int, float, int, float]]:
    """Stand-in for concatenated re-purification between doubling rounds.

    This is NOT a published concatenation protocol. After each round a pair
    below ``f_working`` is topped up with enough extra purification steps for
    an exponential model ``1 - F -> (1 - F) exp(-rate * steps)`` to bring it
    back to ``f_working``. ``rate`` would come from a fit of the ensemble
    purification curve. Rows are ``(round, pairs, f_connected, extra_steps, f_after)``.
    """
    if rate <= 0:
        raise ConfigError("rate must be positive", "rate")
    if not 0.5 < f_working < 1.0:
        raise ConfigError("f_working must lie in (1/2, 1)", "f_working")
    if not _is_power_of_two(n):
        raise ConfigError("doubling needs a power-of-two segment count", "n_segments")
    rows = [(0, n, f0, 0, f0)]
    f, pairs, k = f0, n, 0
    while pairs > 1:
        connected = connect(f, f, quality)
        pairs //= 2
        k += 1
        extra, f = 0, connected
        if connected < f_working:
            extra = math.ceil(math.log((1.0 - connected) / (1.0 - f_working)) / rate)
            f = 1.0 - (1.0 - connected) * math.exp(-rate * extra)
        rows.append((k, pairs, connected, extra, f))
    return rows
