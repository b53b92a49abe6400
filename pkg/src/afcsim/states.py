"""Unnormalized joint atom/environment states at branch level.

A :class:`BranchState` is a finite superposition over computational-basis
labels of a set of named atoms. Each branch carries a complex amplitude and
an environment *sector*: branches in different sectors are exactly
orthogonal in the environment (they differ in their photon-absorption
record), so they never interfere. The environment modes themselves are not
tracked, only which absorption events happened.

A sector is a tuple of hashable absorption-event tags; ``()`` is the
no-absorption (vacuum) sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .errors import ConfigError, DegenerateStateError, PreconditionError

Label = tuple[int, ...]
Sector = tuple
Key = tuple[Label, Sector]

SQRT_HALF = 1.0 / math.sqrt(2.0)
NORM_TOL = 1e-12


def _merge(terms: Iterable[tuple[Label, Sector, complex]]) -> dict[Key, complex]:
    merged: dict[Key, complex] = {}
    for label, sector, amp in terms:
        key = (label, sector)
        merged[key] = merged.get(key, 0j) + amp
    return {k: v for k, v in merged.items() if v != 0}


@dataclass(frozen=True)
class BranchState:
    """Immutable superposition ``sum amp |label> |sector>`` over named atoms."""

    atoms: tuple[str, ...]
    amplitudes: Mapping[Key, complex]

    def __post_init__(self):
        if len(set(self.atoms)) != len(self.atoms):
            raise ConfigError(f"duplicate atom names in {self.atoms}")
        for label, _ in self.amplitudes:
            if len(label) != len(self.atoms) or any(b not in (0, 1) for b in label):
                raise ConfigError(f"label {label} does not match atoms {self.atoms}")
        if not self.amplitudes:
            raise DegenerateStateError("state has no nonzero branch")
        if not isinstance(self.amplitudes, MappingProxyType):
            object.__setattr__(self, "amplitudes", MappingProxyType(dict(self.amplitudes)))

    @classmethod
    def from_terms(
        cls, atoms: Iterable[str], terms: Iterable[tuple[Label, Sector, complex]]
    ) -> "BranchState":
        """Build a state, summing amplitudes that share ``(label, sector)``."""
        return cls(tuple(atoms), _merge((tuple(l), tuple(s), complex(a)) for l, s, a in terms))

    @classmethod
    def qubit(cls, atom: str, chi0: complex, chi1: complex) -> "BranchState":
        return cls.from_terms((atom,), [((0,), (), chi0), ((1,), (), chi1)])

    # -- inspection ---------------------------------------------------------

    def __iter__(self) -> Iterator[tuple[Label, Sector, complex]]:
        for (label, sector), amp in self.amplitudes.items():
            yield label, sector, amp

    def __len__(self) -> int:
        return len(self.amplitudes)

    def index(self, atom: str) -> int:
        try:
            return self.atoms.index(atom)
        except ValueError:
            raise ConfigError(f"unknown atom {atom!r}; state holds {self.atoms}") from None

    @property
    def norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    @property
    def sectors(self) -> set:
        return {s for _, s in self.amplitudes}

    def values(self, atom: str) -> set[int]:
        """Set of values the atom takes over all branches."""
        i = self.index(atom)
        return {label[i] for label, _ in self.amplitudes}

    def amplitude(self, bits: Mapping[str, int], sector: Sector = ()) -> complex:
        """Amplitude of the branch with the given atom values (unlisted atoms 0)."""
        label = tuple(bits.get(a, 0) for a in self.atoms)
        return self.amplitudes.get((label, tuple(sector)), 0j)

    def atomic_part(self, sector: Sector = ()) -> dict[Label, complex]:
        return {l: a for (l, s), a in self.amplitudes.items() if s == sector}

    # -- structural ---------------------------------------------------------

    def map_branches(
        self, fn: Callable[[Label, Sector, complex], Iterable[tuple[Label, Sector, complex]]]
    ) -> "BranchState":
        return BranchState(self.atoms, _merge(t for branch in self for t in fn(*branch)))

    def add_atom(self, atom: str, value: int = 0) -> "BranchState":
        if atom in self.atoms:
            raise ConfigError(f"atom {atom!r} already present")
        return BranchState(
            self.atoms + (atom,), {(l + (value,), s): a for (l, s), a in self.amplitudes.items()}
        )

    def remove_atom(self, atom: str) -> "BranchState":
        """Factor out an atom that is ``|0>`` in every branch."""
        i = self.index(atom)
        if self.values(atom) != {0}:
            raise PreconditionError(f"atom {atom!r} is not in |0> in every branch")
        atoms = self.atoms[:i] + self.atoms[i + 1 :]
        return BranchState(atoms, {(l[:i] + l[i + 1 :], s): a for (l, s), a in self.amplitudes.items()})

    def scaled(self, factor: complex) -> "BranchState":
        if factor == 0:
            raise DegenerateStateError("scaling by zero")
        return BranchState(self.atoms, {k: a * factor for k, a in self.amplitudes.items()})

    def normalized(self) -> "BranchState":
        n2 = self.norm2
        if n2 <= 0:
            raise DegenerateStateError("zero-norm state")
        return self.scaled(1.0 / math.sqrt(n2))

    def compact_sectors(self) -> "BranchState":
        """Relabel a single shared sector to ``()``.

        A sector common to every branch is a global environment factor; the
        relabelling keeps sector tuples from growing across retries.
        """
        sectors = self.sectors
        if len(sectors) != 1 or sectors == {()}:
            return self
        return BranchState(self.atoms, {(l, ()): a for (l, _), a in self.amplitudes.items()})

    # -- local gates (exact, error free) ------------------------------------

    def x(self, atom: str) -> "BranchState":
        i = self.index(atom)

        def flip(label, sector, amp):
            yield label[:i] + (1 - label[i],) + label[i + 1 :], sector, amp

        return self.map_branches(flip)

    def z(self, atom: str) -> "BranchState":
        i = self.index(atom)
        return self.map_branches(lambda l, s, a: [(l, s, -a if l[i] else a)])

    def cnot(self, control: str, target: str) -> "BranchState":
        c, t = self.index(control), self.index(target)
        if c == t:
            raise ConfigError("CNOT control and target must differ")

        def gate(label, sector, amp):
            if label[c]:
                label = label[:t] + (1 - label[t],) + label[t + 1 :]
            yield label, sector, amp

        return self.map_branches(gate)

    def h(self, atom: str) -> "BranchState":
        i = self.index(atom)

        def gate(label, sector, amp):
            for bit in (0, 1):
                sign = -1.0 if (label[i] and bit) else 1.0
                yield label[:i] + (bit,) + label[i + 1 :], sector, sign * SQRT_HALF * amp

        return self.map_branches(gate)

    def swap(self, a: str, b: str) -> "BranchState":
        i, j = self.index(a), self.index(b)

        def gate(label, sector, amp):
            new = list(label)
            new[i], new[j] = label[j], label[i]
            yield tuple(new), sector, amp

        return self.map_branches(gate)

    # -- measurement --------------------------------------------------------

    def projected(self, atom: str, value: int) -> "BranchState | None":
        """Unnormalized projection onto ``atom == value``; None when empty."""
        i = self.index(atom)
        kept = {k: a for k, a in self.amplitudes.items() if k[0][i] == value}
        return BranchState(self.atoms, kept) if kept else None

    def measure(
        self, atom: str, rng: np.random.Generator | None = None, force: int | None = None
    ) -> tuple[int, "BranchState"]:
        """Projective Z measurement followed by reset of the atom to ``|0>``.

        The outcome is ``force`` if given, otherwise sampled with probability
        equal to the squared norm of the projected branches. The returned
        state is left unnormalized.
        """
        parts = {v: self.projected(atom, v) for v in (0, 1)}
        if force is None:
            if rng is None:
                raise ConfigError("measure needs an rng or a forced outcome")
            p1 = parts[1].norm2 / self.norm2 if parts[1] is not None else 0.0
            force = int(rng.random() < p1)
        post = parts[force]
        if post is None or post.norm2 == 0:
            raise DegenerateStateError(f"outcome {force} on {atom!r} has zero probability")
        return force, (post.x(atom) if force else post)

    # -- comparison helpers -------------------------------------------------

    def isclose(self, other: "BranchState", tol: float = NORM_TOL) -> bool:
        if set(self.atoms) != set(other.atoms):
            return False
        order = [other.atoms.index(a) for a in self.atoms]
        theirs = {(tuple(l[k] for k in order), s): a for (l, s), a in other.amplitudes.items()}
        keys = set(self.amplitudes) | set(theirs)
        return all(abs(self.amplitudes.get(k, 0j) - theirs.get(k, 0j)) <= tol for k in keys)


@dataclass(frozen=True)
class EprPairState:
    """Two-atom state ``|Phi+> E_plus + |Phi-> E_minus`` by environment sector.

    ``e_plus`` and ``e_minus`` map sector -> complex amplitude. The overall
    scale is arbitrary; only the ratio of the two norms is physical.
    """

    e_plus: Mapping[Sector, complex]
    e_minus: Mapping[Sector, complex]
    history: int = 0

    def __post_init__(self):
        for name in ("e_plus", "e_minus"):
            value = getattr(self, name)
            if not isinstance(value, MappingProxyType):
                object.__setattr__(self, name, MappingProxyType(dict(value)))

    @classmethod
    def from_amplitudes(cls, e_plus: complex, e_minus: complex, history: int = 0) -> "EprPairState":
        return cls({(): complex(e_plus)}, {(): complex(e_minus)}, history)

    @property
    def plus_norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.e_plus.values())

    @property
    def minus_norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.e_minus.values())

    @property
    def fidelity(self) -> float:
        return fidelity(self)

    def scaled(self, plus: complex, minus: complex) -> "EprPairState":
        """Multiply the Phi+ record by ``plus`` and the Phi- record by ``minus``."""
        return EprPairState(
            {s: a * plus for s, a in self.e_plus.items()},
            {s: a * minus for s, a in self.e_minus.items()},
            self.history + 1,
        )

    def normalized(self) -> "EprPairState":
        n2 = self.plus_norm2 + self.minus_norm2
        if n2 <= 0:
            raise DegenerateStateError("zero-norm pair")
        k = 1.0 / math.sqrt(n2)
        return EprPairState(
            {s: a * k for s, a in self.e_plus.items()},
            {s: a * k for s, a in self.e_minus.items()},
            self.history,
        )


def fidelity(pair: EprPairState) -> float:
    """Normalized weight of the ``|Phi+>`` record, ``|E+|^2 / (|E+|^2 + |E-|^2)``."""
    p, m = pair.plus_norm2, pair.minus_norm2
    if p + m <= 0:
        raise DegenerateStateError("fidelity of a zero-norm pair is undefined")
    return p / (p + m)


def to_pair(state: BranchState, a: str = "A", b: str = "B", restrict: bool = False) -> EprPairState:
    """Re-express the ``(a, b)`` part of a state in the Phi+/Phi- basis.

    Amplitudes ``c00 |00> + c11 |11>`` per sector become ``e_plus = (c00+c11)/2``
    and ``e_minus = (c00-c11)/2``. Every other atom must be ``|0>``. Psi
    components raise unless ``restrict`` is set, in which case they are dropped.
    """
    i, j = state.index(a), state.index(b)
    others = [k for k in range(len(state.atoms)) if k not in (i, j)]
    c00: dict[Sector, complex] = {}
    c11: dict[Sector, complex] = {}
    for label, sector, amp in state:
        if any(label[k] for k in others):
            raise PreconditionError("auxiliary atoms must be in |0> to read off a pair")
        if label[i] != label[j]:
            if restrict:
                continue
            raise PreconditionError("state has Psi components; not a two-branch pair")
        target = c11 if label[i] else c00
        target[sector] = target.get(sector, 0j) + amp
    sectors = set(c00) | set(c11)
    if not sectors:
        raise DegenerateStateError("no Phi component")
    plus = {s: (c00.get(s, 0j) + c11.get(s, 0j)) / 2 for s in sectors}
    minus = {s: (c00.get(s, 0j) - c11.get(s, 0j)) / 2 for s in sectors}
    return EprPairState(plus, minus)


def pair_to_state(pair: EprPairState, a: str = "A", b: str = "B") -> BranchState:
    """Inverse of :func:`to_pair`: ``c00 = e_plus + e_minus``, ``c11 = e_plus - e_minus``."""
    sectors = set(pair.e_plus) | set(pair.e_minus)
    terms = []
    for s in sectors:
        ep, em = pair.e_plus.get(s, 0j), pair.e_minus.get(s, 0j)
        terms.append(((0, 0), s, ep + em))
        terms.append(((1, 1), s, ep - em))
    return BranchState.from_terms((a, b), terms)


def phi_plus_overlap(state: BranchState, a: str = "A", b: str = "B") -> float:
    """``sum_sector |<Phi+_ab|psi_sector>|^2`` with other atoms required in ``|0>``."""
    i, j = state.index(a), state.index(b)
    acc: dict[Sector, complex] = {}
    for label, sector, amp in state:
        if label[i] == label[j] and not any(v for k, v in enumerate(label) if k not in (i, j)):
            acc[sector] = acc.get(sector, 0j) + amp * SQRT_HALF
    return math.fsum(abs(v) ** 2 for v in acc.values())
