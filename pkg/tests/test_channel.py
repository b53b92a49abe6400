import math

import pytest
from hypothesis import given, strategies as st

from afcsim.channel import (
    ChannelModel,
    LinearDrift,
    NoJitter,
    SinusoidalJitter,
    direct_epr,
    direct_epr_fidelity,
    direct_epr_overlap,
    make_jitter,
    success_probability,
    transfer,
)
from afcsim.errors import ConfigError, PreconditionError
from afcsim.states import BranchState, to_pair

kts = st.floats(min_value=0.0, max_value=5.0)
phases = st.floats(min_value=-math.pi, max_value=math.pi)


def sender(chi0, chi1, receiver="B"):
    return BranchState.qubit("A", chi0, chi1).add_atom(receiver)


def test_lossless_transfer_is_a_swap():
    ch = ChannelModel.from_kappa_tau(0.0)
    out = transfer(sender(0.6, 0.8j), "A", "B", ch, 0.0)
    expected = BranchState.qubit("B", 0.6, 0.8j).add_atom("A")
    assert out.isclose(expected)
    assert out.sectors == {()}


@given(kts, st.floats(min_value=0.0, max_value=50.0))
def test_transfer_preserves_norm(kt, t):
    ch = ChannelModel.from_kappa_tau(kt, phase_jitter=LinearDrift(0.7))
    s = sender(0.6, 0.8)
    assert transfer(s, "A", "B", ch, t).norm2 == pytest.approx(s.norm2, abs=1e-12)


@given(kts)
def test_absorption_weight_of_one_photon(kt):
    ch = ChannelModel.from_kappa_tau(kt)
    out = transfer(sender(0, 1), "A", "B", ch, 0.0)
    lost = sum(abs(a) ** 2 for _, s, a in out if s)
    arrived = sum(abs(a) ** 2 for l, s, a in out if not s)
    assert lost == pytest.approx(1 - math.exp(-2 * kt), abs=1e-12)
    assert arrived == pytest.approx(success_probability(ch), abs=1e-12)
    assert out.values("A") == {0}


def test_two_hops_match_hand_enumeration():
    ch = ChannelModel.from_kappa_tau(0.3)
    s = BranchState.qubit("A", 0, 1).add_atom("B").add_atom("C")
    s = transfer(s, "A", "B", ch, 0.0, index=0)
    s = transfer(s, "B", "C", ch, 1.0, index=1)
    assert s.amplitude({"C": 1}) == pytest.approx(math.exp(-0.6), abs=1e-12)
    lost = sum(abs(a) ** 2 for _, sec, a in s if sec)
    assert lost == pytest.approx(1 - math.exp(-1.2), abs=1e-12)
    assert len(s.sectors) == 3


def test_transfer_preconditions():
    ch = ChannelModel.from_kappa_tau(0.1)
    busy = BranchState.qubit("A", 1, 1).add_atom("B", 1)
    with pytest.raises(PreconditionError):
        transfer(busy, "A", "B", ch, 0.0)
    with pytest.raises(ConfigError):
        transfer(sender(1, 1), "A", "Q", ch, 0.0)


def test_vacuum_branch_untouched():
    ch = ChannelModel.from_kappa_tau(1.3)
    out = transfer(sender(0.6, 0.8), "A", "B", ch, 0.0)
    assert out.amplitude({}) == pytest.approx(0.6, abs=1e-15)


@pytest.mark.parametrize("kt", [0.0, 0.05, 0.1, 0.5, 2.0])
def test_direct_epr_overlap_closed_form(kt):
    ch = ChannelModel.from_kappa_tau(kt)
    expected = ((1 + math.exp(-kt)) / 2) ** 2
    assert direct_epr_overlap(ch) == pytest.approx(expected, abs=1e-12)
    assert direct_epr_fidelity(ch) == pytest.approx(expected, abs=1e-12)


def test_direct_epr_value_at_one_tenth():
    assert direct_epr_overlap(ChannelModel.from_kappa_tau(0.1)) == pytest.approx(0.9071, abs=5e-5)


def test_direct_epr_restricted_pair_fidelity():
    kt = 0.1
    pair = to_pair(direct_epr(ChannelModel.from_kappa_tau(kt)), restrict=True)
    a = math.exp(-kt)
    # Phi block: c00 = 1/sqrt2, c11 = a/sqrt2, so F = (1+a)^2 / (2 (1 + a^2))
    assert pair.fidelity == pytest.approx((1 + a) ** 2 / (2 * (1 + a * a)), abs=1e-12)


@given(kts, phases)
def test_direct_epr_with_phase(kt, phi):
    ch = ChannelModel.from_kappa_tau(kt, phase_jitter=LinearDrift(phi))
    a1 = ch.amplitude(1.0)
    assert direct_epr_overlap(ch, 1.0) == pytest.approx(abs((1 + a1) / 2) ** 2, abs=1e-12)


def test_both_parameterizations_agree():
    ch = ChannelModel(kappa=0.25, tau=2.0, l=10.0, l0=10.0)
    assert success_probability(ch) == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert success_probability(ChannelModel(l=10.0, l0=10.0)) == pytest.approx(math.exp(-1), abs=1e-15)
    assert success_probability(ChannelModel(l=0.0, l0=3.0)) == 1.0


def test_mismatched_parameterizations_rejected():
    with pytest.raises(ConfigError) as err:
        ChannelModel(kappa=1.0, tau=1.0, l=1.0, l0=1.0)
    assert err.value.field == "l"


@pytest.mark.parametrize(
    "kwargs,field",
    [({"kappa": 1.0}, "kappa"), ({"l": 1.0}, "l0"), ({"l": 1.0, "l0": -2.0}, "l0"), ({}, "kappa")],
)
def test_incomplete_parameters(kwargs, field):
    with pytest.raises(ConfigError) as err:
        ChannelModel(**kwargs)
    assert err.value.field == field


@given(kts, st.floats(min_value=0, max_value=100))
def test_amplitude_and_absorption_sum_to_one(kt, t):
    ch = ChannelModel.from_kappa_tau(kt, phase_jitter=SinusoidalJitter(0.4, 1.1))
    assert abs(ch.amplitude(t)) ** 2 + ch.absorption_weight(t) == pytest.approx(1.0, abs=1e-12)


def test_stationarity_flags():
    assert NoJitter().stationary
    assert LinearDrift(0.0).stationary and not LinearDrift(0.1).stationary
    assert SinusoidalJitter(0.0, 1.0).stationary and not SinusoidalJitter(0.2, 1.0).stationary
    assert make_jitter("drift", omega=0.5) == LinearDrift(0.5)
    with pytest.raises(ConfigError):
        make_jitter("gauss")
