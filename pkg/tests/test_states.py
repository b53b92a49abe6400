import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from afcsim.errors import ConfigError, DegenerateStateError, PreconditionError
from afcsim.states import BranchState, EprPairState, fidelity, pair_to_state, phi_plus_overlap, to_pair

amps = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def two_atom(c):
    labels = [(0, 0), (0, 1), (1, 0), (1, 1)]
    return BranchState.from_terms(("A", "B"), [(l, (), a) for l, a in zip(labels, c)])


def test_identical_keys_merge():
    s = BranchState.from_terms(("A",), [((0,), (), 0.5), ((0,), (), 0.25), ((1,), ("x",), 1.0)])
    assert len(s) == 2
    assert s.amplitude({"A": 0}) == 0.75


def test_cancelled_branches_are_dropped():
    s = BranchState.from_terms(("A",), [((0,), (), 1.0), ((1,), (), 1.0), ((1,), (), -1.0)])
    assert s.values("A") == {0}


def test_empty_state_is_degenerate():
    with pytest.raises(DegenerateStateError):
        BranchState.from_terms(("A",), [((0,), (), 0.0)])


def test_unknown_atom():
    s = BranchState.qubit("A", 1, 0)
    with pytest.raises(ConfigError):
        s.x("Z")


def test_remove_atom_requires_zero():
    s = BranchState.qubit("A", 1, 1).add_atom("B").cnot("A", "B")
    with pytest.raises(PreconditionError):
        s.remove_atom("B")


def test_hadamard_twice_is_identity():
    s = BranchState.qubit("A", 0.6, 0.8j)
    assert s.h("A").h("A").isclose(s)


def test_cnot_makes_bell_state():
    s = BranchState.qubit("A", 1, 0).add_atom("B").h("A").cnot("A", "B")
    assert phi_plus_overlap(s) == pytest.approx(1.0, abs=1e-15)


def test_swap():
    s = BranchState.qubit("A", 0.6, 0.8).add_atom("B").swap("A", "B")
    assert s.amplitude({"B": 1}) == pytest.approx(0.8)
    assert s.values("A") == {0}


def test_measure_resets_and_keeps_weight(rng):
    s = BranchState.qubit("A", 0.6, 0.8)
    v, post = s.measure("A", force=1)
    assert v == 1 and post.values("A") == {0}
    assert post.norm2 == pytest.approx(0.64)


def test_measure_forced_impossible_outcome():
    with pytest.raises(DegenerateStateError):
        BranchState.qubit("A", 1, 0).measure("A", force=1)


@given(st.tuples(amps, amps, amps, amps))
def test_gates_preserve_norm(c):
    if all(abs(x) < 1e-6 for x in c):
        return
    s = two_atom(c)
    for t in (s.h("A"), s.cnot("A", "B"), s.swap("A", "B"), s.x("B"), s.z("A")):
        assert t.norm2 == pytest.approx(s.norm2, rel=1e-12)


@given(amps, amps)
def test_pair_round_trip(p, m):
    if abs(p) < 1e-6 and abs(m) < 1e-6:
        return
    pair = EprPairState.from_amplitudes(p, m)
    back = to_pair(pair_to_state(pair))
    assert back.e_plus[()] == pytest.approx(p, abs=1e-12)
    assert back.e_minus[()] == pytest.approx(m, abs=1e-12)


def test_fidelity_examples():
    assert fidelity(EprPairState.from_amplitudes(1, 0)) == 1.0
    assert fidelity(EprPairState.from_amplitudes(0.3, 0.3)) == 0.5
    with pytest.raises(DegenerateStateError):
        fidelity(EprPairState.from_amplitudes(0, 0))


def test_fidelity_sums_orthogonal_sectors():
    pair = EprPairState({"a": 0.6, "b": 0.0}, {"a": 0.0, "b": 0.8})
    assert pair.fidelity == pytest.approx(0.36)


def test_to_pair_rejects_psi_unless_restricted():
    s = two_atom([1, 1, 0, 0])
    with pytest.raises(PreconditionError):
        to_pair(s)
    assert to_pair(s, restrict=True).fidelity == pytest.approx(0.5)
