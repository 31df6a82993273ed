import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf, sqrt

from bohm_sg.params import ModelParams, ReducedState, SpinWeights
from bohm_sg.reduced import (
    BranchExponents,
    branch_exponents,
    branch_weight,
    log_odds,
    pointer_phase_gradient,
    reduced_field,
    reduced_velocity,
    spin_phase_gradient,
)


def params(sigma=0.0, v=10.0, V=10.0, eta=1.0, n=1, spin=None):
    return ModelParams(v, V, eta, n, spin or SpinWeights.from_polarization(sigma))


def unsimplified_spin_gradient(q, t, sign, v):
    return sign * v + 4 * t * (q - sign * v * t) / (1 + 4 * t * t)


# --- phase gradients -------------------------------------------------------

@pytest.mark.parametrize("q", [-3.0, 0.0, 0.7])
def test_spin_gradient_at_zero_time(q):
    assert spin_phase_gradient(q, 0.0, "plus", 10.0) == 10.0


def test_spin_gradient_examples():
    assert spin_phase_gradient(0.0, 0.5, "minus", 10.0) == -5.0
    assert unsimplified_spin_gradient(0.0, 0.5, -1, 10.0) == -5.0
    # a particle at the packet centre keeps the packet velocity
    assert spin_phase_gradient(5.0, 0.5, "plus", 10.0) == 10.0
    assert unsimplified_spin_gradient(5.0, 0.5, 1, 10.0) == 10.0


@given(st.floats(-50, 50), st.floats(0, 5), st.floats(0.1, 50), st.sampled_from([1, -1]))
def test_spin_gradient_matches_two_term_form(q, t, v, sign):
    branch = "plus" if sign > 0 else "minus"
    assert spin_phase_gradient(q, t, branch, v) == pytest.approx(
        unsimplified_spin_gradient(q, t, sign, v), rel=1e-12, abs=1e-9
    )


def test_pointer_gradient_examples():
    p = params(V=10.0, n=25)
    assert pointer_phase_gradient(0.3, 0.0, "moving_plus", p) == 50.0
    assert pointer_phase_gradient(0.3, 0.0, "moving_minus", p) == -50.0
    assert pointer_phase_gradient(0.2, 0.0, "static", params(n=7, eta=3.0)) == 0.0
    assert pointer_phase_gradient(1.0, 0.5, "static", params(eta=1.0)) == 1.0


@given(st.floats(-20, 20), st.floats(0, 3), st.floats(0.1, 4), st.integers(1, 10**6))
def test_pointer_gradient_matches_two_term_form(z, t, eta, n):
    # d/dt' of a fictitious pointer: eta * b * grad(xi), with grad(xi) in its unsimplified form
    p = params(eta=eta, n=n, V=7.0)
    speed = math.sqrt(n) * 7.0
    den = 1 + 4 * eta**2 * t * t
    two_term = eta * (speed + 4 * eta * t * (z - eta * speed * t) / den)
    assert pointer_phase_gradient(z, t, "moving_plus", p) == pytest.approx(two_term, rel=1e-9, abs=1e-9)


# --- branch exponents and weights ----------------------------------------

def test_exponents_vanish_at_zero_time():
    ex = branch_exponents(ReducedState(0.0, 1.3, -0.4, 2.0), params(n=10**6))
    assert (ex.r1, ex.r2) == (0.0, 0.0)


def test_exponents_spin_term():
    mp.dps = 30
    t = mpf("0.1")
    oracle = float(4 * 10 * t / (1 + 4 * t**2))
    ex = branch_exponents(ReducedState(0.1, 1.0, 0.0, 0.0), params())
    assert ex.r1 == ex.r2 == pytest.approx(oracle, rel=1e-14)
    assert ex.r1 == pytest.approx(3.846153846153846, rel=1e-14)


def test_exponents_pointer_term_large_n():
    mp.dps = 30
    t = mpf("0.1")
    oracle = float(4 * sqrt(10**4) * 10 * t * mpf("0.02") / (1 + 4 * t**2))
    ex = branch_exponents(ReducedState(0.1, 0.0, 0.02, 0.02), params(n=10**4))
    assert ex.r1 == ex.r2 == pytest.approx(oracle, rel=1e-14)
    assert ex.r1 == pytest.approx(7.6923076923076925, rel=1e-14)


def test_weight_examples():
    assert branch_weight(BranchExponents(0.0, 0.0), SpinWeights(0.5, 0.5)).w == 0.5
    assert branch_weight(BranchExponents(0.0, 0.0), SpinWeights(0.75, 0.25)).w == pytest.approx(0.75, abs=1e-15)
    half = math.log(3.0) / 2
    assert branch_weight(BranchExponents(half, half), SpinWeights(0.5, 0.5)).w == pytest.approx(0.75, abs=1e-15)


def test_weight_exact_for_polarized_spin():
    assert branch_weight(BranchExponents(-300.0, -400.0), SpinWeights(1.0, 0.0)).w == 1.0
    assert branch_weight(BranchExponents(300.0, 400.0), SpinWeights(0.0, 1.0)).w == 0.0
    assert log_odds(SpinWeights(1.0, 0.0)) == math.inf


@pytest.mark.parametrize("r", [1e9, -1e9, 5e8, 710.0, -710.0, 1e5])
def test_weight_survives_huge_exponents(r):
    with np.errstate(all="raise"):
        w = branch_weight(BranchExponents(r / 2, r / 2), SpinWeights(0.505, 0.495)).w
    assert 0.0 <= w <= 1.0 and math.isfinite(w)


@given(st.floats(-1e9, 1e9), st.floats(-1e9, 1e9), st.floats(0.0, 1.0))
def test_weight_bounded(r1, r2, w_plus):
    w = branch_weight(BranchExponents(r1, r2), SpinWeights(w_plus, 1 - w_plus)).w
    assert 0.0 <= w <= 1.0


# --- velocity field --------------------------------------------------------

def test_initial_velocity_unpolarized():
    p = params(sigma=0.0, n=25, eta=0.8)
    dq, dz1, dz2 = reduced_velocity(ReducedState(0.0, 0.4, -1.0, 3.0), p)
    assert dq == 0.0
    assert dz1 == pytest.approx(0.5 * p.pointer_speed, rel=1e-15)
    assert dz2 == pytest.approx(-0.5 * p.pointer_speed, rel=1e-15)


def test_initial_velocity_polarized():
    dq, _, _ = reduced_velocity(ReducedState(0.0, 0.4, 0.1, 0.1), params(sigma=0.5))
    assert dq == pytest.approx(5.0, rel=1e-14)


@given(st.floats(-5, 5), st.floats(-20, 20), st.floats(-20, 20), st.floats(0, 2))
def test_single_branch_limit(q, z1, z2, t):
    p = params(spin=SpinWeights(1.0, 0.0), n=9, eta=1.3)
    dq, _, dz2 = reduced_velocity(ReducedState(t, q, z1, z2), p)
    assert dq == pytest.approx((10 + 4 * t * q) / (1 + 4 * t * t), rel=1e-13, abs=1e-12)
    assert dz2 == pytest.approx(4 * 1.3**2 * t * z2 / (1 + 4 * 1.3**2 * t * t), rel=1e-13, abs=1e-12)


states = st.tuples(
    st.floats(0, 2), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)
)
param_sets = st.builds(
    lambda s, v, V, eta, n: params(sigma=s, v=v, V=V, eta=eta, n=n),
    st.floats(-0.99, 0.99), st.floats(0.5, 20), st.floats(0, 20), st.floats(0.2, 3), st.integers(1, 10**4),
)


@settings(max_examples=200)
@given(states, param_sets, st.floats(-3, 3))
def test_dq_depends_on_pointer_sum_only(s, p, delta):
    t, q, z1, z2 = s
    a = reduced_velocity(ReducedState(t, q, z1, z2), p)
    b = reduced_velocity(ReducedState(t, q, z1 + delta, z2 - delta), p)
    assert b[0] == pytest.approx(a[0], rel=1e-9, abs=1e-9)


@settings(max_examples=200)
@given(states, param_sets)
def test_mirror_symmetry_is_exact(s, p):
    t, q, z1, z2 = s
    mirrored = ModelParams(p.v_prime, p.V_prime, p.eta, p.n_pointer, SpinWeights(p.spin.w_minus, p.spin.w_plus))
    dq, dz1, dz2 = reduced_velocity(ReducedState(t, q, z1, z2), p)
    mq, mz1, mz2 = reduced_velocity(ReducedState(t, -q, -z2, -z1), mirrored)
    assert (mq, mz1, mz2) == (-dq, -dz2, -dz1)


@given(states, st.floats(-0.99, 0.99), st.integers(1, 10**6))
def test_decoupled_at_zero_pointer_speed(s, sigma, n):
    t, q, z1, z2 = s
    p = params(sigma=sigma, V=0.0, n=n)
    ex = branch_exponents(ReducedState(t, q, z1, z2), p)
    assert ex.r1 == ex.r2
    dq, _, _ = reduced_velocity(ReducedState(t, q, z1, z2), p)
    # two packets alone, weights from the full squared moduli
    den = 1 + 4 * t * t
    lp = math.log(p.spin.w_plus) - 2 * (q - 10 * t) ** 2 / den
    lm = math.log(p.spin.w_minus) - 2 * (q + 10 * t) ** 2 / den
    w = 1 / (1 + math.exp(min(lm - lp, 700.0)))
    free = w * unsimplified_spin_gradient(q, t, 1, 10) + (1 - w) * unsimplified_spin_gradient(q, t, -1, 10)
    assert dq == pytest.approx(free, rel=1e-9, abs=1e-9)
    assert reduced_velocity(ReducedState(t, q, z1 + 7, z2 - 3), p)[0] == dq


def test_velocity_independent_of_hbar_scale():
    # the field takes only dimensionless inputs; equal dimensionless groups give equal fields
    s = ReducedState(0.3, 0.2, 0.1, -0.4)
    a = reduced_velocity(s, params(sigma=0.2, n=16, V=5.0))
    b = reduced_velocity(s, params(sigma=0.2, n=1, V=20.0))  # sqrt(N) V' is the same
    assert a == pytest.approx(b, rel=1e-14)


def test_vectorized_field_matches_scalar():
    p = params(sigma=0.3, n=100)
    rng = np.random.default_rng(4)
    y = rng.normal(size=(20, 3))
    t = rng.uniform(0, 1, 20)
    batch = reduced_field(p)(t, y)
    for i in range(20):
        assert tuple(batch[i]) == reduced_velocity(ReducedState(t[i], *y[i]), p)


def test_field_finite_in_large_n_regime():
    p = params(sigma=0.01, n=10**6)
    t = np.array([1e-3, 0.5, 1.0])
    y = np.array([[3.0, 1e4, -1e4], [-8.0, 5e3, 2.0], [10.0, 1e4, 0.1]])
    with np.errstate(all="raise"):
        out = reduced_field(p)(t, y)
    assert np.all(np.isfinite(out))
