import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dicke2 import _kernels
from dicke2.errors import DisplacedPole, NoConvergence, SingletPole
from dicke2.extrapolate import tail_exponent
from dicke2.oracle import oracle_spectrum
from dicke2.params import ModelParams, Parity
from dicke2.series import (_seed_terms, displaced_recurrence, displaced_seed, fock_recurrence, g_fixed_order,
                           g_function, nearest_pole, seed_sums)

P = ModelParams(0.5, 0.6)

deltas = st.floats(0.0, 2.0)
couplings = st.floats(0.1, 1.2)
parities = st.sampled_from([Parity.EVEN, Parity.ODD])


def test_a0_is_one():
    for parity in Parity:
        assert fock_recurrence(P, parity, 1.3, 10).a[0] == 1.0


def test_first_coefficient_odd():
    co = fock_recurrence(P, "odd", 0.5, 4)
    assert co.a[1] == pytest.approx(0.5 / 0.6, rel=1e-15)


def test_first_coefficient_even_vanishes_at_e_equal_delta():
    co = fock_recurrence(P, "even", 0.5, 4)
    assert co.a[1] == 0.0


@given(deltas, couplings, parities, st.floats(-0.5, 6.0))
@settings(max_examples=60, deadline=None)
def test_parity_selection_is_exact(delta, g, parity, E):
    params = ModelParams(delta, g)
    try:
        co = fock_recurrence(params, parity, E, 30)
    except SingletPole:
        return
    wrong = 1 if parity is Parity.EVEN else 0
    assert np.all(co.b[wrong::2] == 0.0)
    ta, tb = _kernels.fock_terms(delta, g, float(parity.sign), E, 64)
    assert np.all(tb[wrong::2] == 0.0)


def test_singlet_pole_in_fock_recurrence():
    with pytest.raises(SingletPole):
        fock_recurrence(P, "even", 2.0, 5)
    fock_recurrence(P, "odd", 2.0, 5)


@given(deltas, couplings, parities, st.floats(0.05, 4.0))
@settings(max_examples=40, deadline=None)
def test_scaled_kernel_matches_raw_recurrence(delta, g, parity, E):
    params = ModelParams(delta, g)
    try:
        co = fock_recurrence(params, parity, E, 25)
    except SingletPole:
        return
    ta, tb = _kernels.fock_terms(delta, g, float(parity.sign), E, 26)
    k = np.arange(26)
    np.testing.assert_allclose(ta, co.a * g**k, rtol=1e-9, atol=1e-14)
    np.testing.assert_allclose(tb, co.b * g**k, rtol=1e-9, atol=1e-14)


def test_seeds_without_coupling_to_qubits():
    params = ModelParams(0.0, 0.6)
    su, sv, sw = seed_sums(params, "even", 0.7)
    assert sv.value == 0.0
    co = displaced_recurrence(params, "even", 0.7, 20, (su.value, sv.value, sw.value))
    assert np.all(co.u[1:] == 0.0) and np.all(co.v == 0.0)


def test_g_without_coupling_to_qubits_is_parity_blind():
    params = ModelParams(0.0, 0.6)
    for E in (0.1, 0.9, 2.3):
        even = g_function(params, "even", E).value
        odd = g_function(params, "odd", E).value
        assert even == pytest.approx(odd, rel=1e-12)


@pytest.mark.parametrize("parity", list(Parity))
def test_zeroth_seed_terms(parity):
    # the k = 0 contribution alone gives u0 = 1, w0 = s
    tu, tv, tw = _seed_terms(ModelParams(0.5, 1e-4), parity, 0.3, 128)
    assert tu[0] == 1.0
    assert parity.sign * tw[0] == parity.sign


def test_seed_triple_stable_under_doubling():
    a = seed_sums(P, "even", 0.2, max_terms=4096)
    b = seed_sums(P, "even", 0.2, max_terms=8192)
    for x, y in zip(a, b):
        assert abs(x.value - y.value) < 1e-10


def test_first_displaced_coefficient_by_hand():
    E, g, c = 0.2, 0.6, 0.5 / math.sqrt(2)
    u0, v0, w0 = displaced_seed(P, "even", E)
    co = displaced_recurrence(P, "even", E, 3, (u0, v0, w0))
    assert co.v[1] == pytest.approx(-(1 / g) * ((E - g * g) * v0 + c * (u0 + w0)), rel=1e-14)
    assert co.w[1] == pytest.approx(-(1 / (2 * g)) * ((E - 3 * g * g) * w0 + c * v0), rel=1e-14)


def test_displaced_pole():
    E = 1 - P.g2
    with pytest.raises(DisplacedPole) as info:
        displaced_recurrence(P, "even", E, 3, (1.0, 1.0, 1.0))
    assert info.value.n == 1
    with pytest.raises(DisplacedPole):
        g_function(P, "even", E)


@given(deltas, couplings, parities, st.floats(0.05, 4.0))
@settings(max_examples=40, deadline=None)
def test_u_v_relation(delta, g, parity, E):
    params = ModelParams(delta, g)
    try:
        co = displaced_recurrence(params, parity, E, 25, (0.3, -1.1, 0.7))
    except DisplacedPole:
        return
    n = np.arange(26)
    lhs = co.u[1:] * (E - n[1:] + g * g) + params.coupling * co.v[1:]
    scale = np.maximum(np.abs(params.coupling * co.v[1:]), 1e-300)
    assert np.all(np.abs(lhs) <= 1e-12 * scale + 1e-300)


@given(st.floats(-5.0, 5.0).filter(lambda c: abs(c) > 1e-3))
@settings(max_examples=15, deadline=None)
def test_linearity_in_normalisation(c):
    base = g_function(P, "odd", 0.37).value
    scaled = g_function(P, "odd", 0.37, a0=c).value
    assert scaled / base == pytest.approx(c, rel=1e-12)
    seeds = np.array(displaced_seed(P, "odd", 0.37))
    one = displaced_recurrence(P, "odd", 0.37, 15, tuple(seeds))
    many = displaced_recurrence(P, "odd", 0.37, 15, tuple(c * seeds))
    np.testing.assert_allclose(many.v, c * one.v, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(many.w, c * one.w, rtol=1e-12, atol=1e-300)


def test_scaled_displaced_kernel_matches_raw():
    seeds = (0.4, -0.9, 1.3)
    co = displaced_recurrence(P, "even", 0.81, 30, seeds)
    tu, tv, tw = _kernels.displaced_terms(0.5, 0.6, 0.81, *seeds, 31)
    gn = 0.6 ** np.arange(31)
    np.testing.assert_allclose(tu, co.u * gn, rtol=1e-9, atol=1e-15)
    np.testing.assert_allclose(tv, co.v * gn, rtol=1e-9, atol=1e-15)
    np.testing.assert_allclose(tw, co.w * gn, rtol=1e-9, atol=1e-15)


@pytest.mark.parametrize("E", [0.2, 0.9, 2.5])
def test_term_decay_matches_analytic_exponent(E):
    ta, tb = _kernels.fock_terms(0.5, 0.6, 1.0, E, 20000)
    alt = np.where(np.arange(ta.size) % 2 == 0, 1.0, -1.0)
    # a_k (-g)^k keeps one sign and decays like k^-(1+E+g^2); a_k g^k alternates
    assert tail_exponent(alt * ta) == pytest.approx(1 + E + 0.36, abs=0.05)
    assert tail_exponent(ta) == pytest.approx(2 + E + 0.36, abs=0.05)


def test_g_diverges_next_to_displaced_pole():
    E = 1 - P.g2
    for dE in (-1e-5, 1e-5):
        assert abs(g_function(P, "even", E + dE).value) > 1e3


def test_g_changes_sign_at_lowest_even_level():
    spec = oracle_spectrum(P, 100, (-P.g2, 4.0), check_convergence=False)
    E0 = spec.energies("even")[0]
    left = g_function(P, "even", E0 - 1e-4).value
    right = g_function(P, "even", E0 + 1e-4).value
    assert left * right < 0


def test_g_reports_nearest_pole_and_tail():
    ev = g_function(P, "odd", 0.62)
    assert ev.nearest_pole.kind == "displaced" and ev.nearest_pole.index == 1
    assert ev.terms_used <= 20000
    assert ev.tail_estimate < 1e-10 * max(1.0, abs(ev.value)) * 10
    assert nearest_pole(P, Parity.EVEN, 1.95).kind == "singlet"


def test_g_outside_convergence_domain():
    with pytest.raises(NoConvergence):
        g_function(P, "even", -0.4)


def test_term_cap_from_environment(monkeypatch):
    monkeypatch.setenv("DICKE2_MAX_TERMS", "300")
    with pytest.raises(NoConvergence) as info:
        g_function(P, "even", -0.35, tol=1e-14)
    assert info.value.terms_cap == 300


def test_truncation_stability_grid():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        delta, g = rng.uniform(0.0, 1.5), rng.uniform(0.1, 1.0)
        E = rng.uniform(-g * g + 0.05, 5.0)
        parity = Parity.EVEN if rng.random() < 0.5 else Parity.ODD
        params = ModelParams(delta, g)
        try:
            a = g_fixed_order(params, parity, E, 2048)
            b = g_fixed_order(params, parity, E, 4096)
        except (SingletPole, DisplacedPole):
            continue
        assert abs(a.value - b.value) <= 2 * a.tail_estimate
        checked += 1
