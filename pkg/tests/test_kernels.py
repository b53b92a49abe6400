import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from afcsim import kernels
from afcsim.channel import ChannelModel, LinearDrift
from afcsim.afc import RetryPolicy
from afcsim.errors import ConfigError
from afcsim.rng import check_seed, substream, trial_rng

needs_compiled = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="extension not built")
py = kernels.get("python")

params = st.tuples(
    st.floats(min_value=0.0, max_value=2.0),  # kappa_tau
    st.floats(min_value=0.1, max_value=3.0),  # tau
    st.sampled_from([0, 1, 2]),
    st.floats(min_value=-3, max_value=3),
    st.floats(min_value=0, max_value=3),
)


def args(kt, tau, code, p1, p2, overhead=0.0):
    return (kt, tau, 2 * tau + overhead, code, p1, p2)


@needs_compiled
@given(params, st.integers(0, 2**64 - 1), st.integers(0, 10**6), st.integers(0, 6))
def test_afc_and_direct_parity(p, seed, trial, cap):
    cy = kernels.get("cython")
    a = args(*p)
    for name in ("afc_trial", "direct_trial"):
        left = getattr(py, name)(substream(seed, trial), *a, 0.5, cap)
        right = getattr(cy, name)(substream(seed, trial), *a, 0.5, cap)
        assert left == right


@needs_compiled
@given(params, st.integers(0, 2**32), st.booleans(), st.floats(min_value=0.6, max_value=0.9999))
def test_purify_parity(p, seed, barrier, target):
    cy = kernels.get("cython")
    a = args(*p)
    left = py.purify_trial(substream(seed, 0), *a, 0.0, 50, target, 200, barrier, True)
    right = cy.purify_trial(substream(seed, 0), *a, 0.0, 50, target, 200, barrier, True)
    assert left == right


def test_kernel_draws_one_uniform_per_attempt():
    # p_ok = exp(-2): count the draws below it by hand
    kt = 1.0
    u = trial_rng(5, 0).random(200)
    first_ok = int(np.argmax(u < math.exp(-2 * kt)))
    ok, attempts, *_ = py.afc_trial(substream(5, 0), *args(kt, 1.0, 0, 0, 0), 0.0, 0)
    assert ok == 1 and attempts == first_ok + 1


def test_kernel_ordering_from_draw():
    kt, omega = 0.1, 0.7
    u = trial_rng(8, 3).random()
    ok, att, t, s0r, s0i, s1r, s1i = py.afc_trial(substream(8, 3), *args(kt, 1.0, 1, omega, 0), 0.0, 0)
    reverse = u < 0.5 * math.exp(-2 * kt)
    assert (math.atan2(s0i, s0r) == pytest.approx(omega)) is reverse


def test_kernel_params_from_model():
    ch = ChannelModel.from_kappa_tau(0.4, tau=2.0, phase_jitter=LinearDrift(0.3))
    p = kernels.KernelParams.from_model(ch, RetryPolicy(max_attempts=None, overhead=1.0))
    assert p.args == (0.4, 2.0, 5.0, 1, 0.3, 0.0) and p.max_attempts == 0


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get("fortran")


def test_seed_bounds():
    assert check_seed(2**64 - 1) == 2**64 - 1
    for bad in (-1, 2**64, 1.5, True):
        with pytest.raises(ConfigError):
            check_seed(bad)


def test_substreams_are_distinct_and_stable():
    a = trial_rng(1, 0).random(4)
    assert np.array_equal(a, trial_rng(1, 0).random(4))
    assert not np.array_equal(a, trial_rng(1, 1).random(4))
    assert not np.array_equal(a, trial_rng(2, 0).random(4))


def test_substream_outcomes_uncorrelated():
    n = 10_000
    x = np.array([trial_rng(77, 2 * i).random() for i in range(n)]) < math.exp(-1)
    y = np.array([trial_rng(77, 2 * i + 1).random() for i in range(n)]) < math.exp(-1)
    r = np.corrcoef(x, y)[0, 1]
    assert abs(r) < 4 / math.sqrt(n)
