import itertools

import numpy as np
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from phaseless_sis._precision import working_precision
from phaseless_sis.generators import Chirp, CubicBSpline
from phaseless_sis.signals import (CausalSignal, ambiguous_pair, aux_v, evaluate, index_set,
                                   is_nonseparable_candidate, max_gap, theta_grid_residual)

from conftest import unit_disk


def test_single_coefficient_signal_is_generator(chirp4):
    f = CausalSignal([1.0], chirp4)
    assert evaluate(f, 2.0) == pytest.approx(chirp4(2.0))
    assert abs(f(2.0)) == pytest.approx(1.49466, abs=1e-5)


def test_causal_support(chirp4):
    f = CausalSignal(unit_disk(np.random.default_rng(0), 5), chirp4)
    assert f(-0.5) == 0
    assert f(-1e-9) == 0
    assert f(5 + 4) == 0


def test_two_term_sum_matches_frozen_oracle(chirp4):
    f = CausalSignal([1.0, 1j], chirp4)
    # mpmath at 40 digits: phi(2.5) + i phi(1.5)
    expected = 0.4022806397314812734551642026264302739971 + 0.06508418814918705130253641391097412120999j
    assert abs(f(2.5) - expected) < 1e-14
    assert abs(f.value(2.5) - expected) < 1e-14


def test_mp_value_matches_float(chirp4):
    c = unit_disk(np.random.default_rng(1), 6)
    f = CausalSignal(c, chirp4)
    with working_precision(128):
        v = f.value(mpfr("3.3"))
    assert complex(v) == pytest.approx(f(3.3), abs=1e-13)


def test_signal_invariants(chirp4, spline):
    with pytest.raises(ValueError):
        CausalSignal([0.0, 1.0], chirp4)
    with pytest.raises(ValueError):
        CausalSignal([], chirp4)
    assert CausalSignal([1.0, 0.0, 2.0, 0.0], chirp4).max_index == 2
    real = CausalSignal([1.0, -2.0], spline)
    assert real.is_real
    assert not CausalSignal([1.0, 1j], spline).is_real
    assert not CausalSignal([1.0, 2.0], chirp4).is_real


@pytest.mark.parametrize("n,s,expected", [(1, 4, [0]), (3, 4, [0, 1, 2]), (5, 4, [2, 3, 4]),
                                          (4, 4, [1, 2, 3]), (1, 2, [0]), (7, 2, [6])])
def test_index_set(n, s, expected):
    assert list(index_set(n, s)) == expected


def test_index_set_rejects_nonpositive_n():
    with pytest.raises(ValueError):
        index_set(0, 4)
    with pytest.raises(ValueError):
        index_set(1, 1)


@pytest.mark.parametrize("n,s", list(itertools.product(range(1, 51), range(2, 9))))
def test_index_set_size(n, s):
    idx = index_set(n, s)
    assert len(idx) == min(n, s - 1)
    assert all(k < n for k in idx)


def test_aux_v_first_interval(chirp4):
    c = [0.3 - 0.2j]
    x = 0.37
    assert aux_v(c, chirp4, 1, x) == pytest.approx(c[0] * chirp4(1 + x))


def test_aux_v_zero_coefficients(chirp4):
    assert aux_v([1.0, 0, 0, 0, 0], chirp4, 5, 0.4) == 0


def test_aux_v_matches_full_sum_minus_current_term(chirp4):
    c = unit_disk(np.random.default_rng(2), 8)
    f = CausalSignal(c, chirp4)
    x = 0.61
    brute = f(5 + x) - c[5] * chirp4(x)
    assert aux_v(c, chirp4, 5, x) == pytest.approx(brute, abs=1e-14)
    want = c[2] * chirp4(3 + x) + c[3] * chirp4(2 + x) + c[4] * chirp4(1 + x)
    assert aux_v(c[:5], chirp4, 5, x) == pytest.approx(want, abs=1e-14)


def test_aux_v_needs_prior_coefficients(chirp4):
    with pytest.raises(ValueError):
        aux_v([1.0, 2.0], chirp4, 5, 0.5)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 12), x=st.floats(0.001, 0.999))
def test_identity_f_equals_v_plus_current_term(seed, n, x):
    gen = Chirp(4.0, 0.8, 1.0)
    c = unit_disk(np.random.default_rng(seed), 13)
    f = CausalSignal(c, gen)
    lhs = f(n + x)
    rhs = aux_v(c, gen, n, x) + c[n] * gen(x)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
    xs = np.array([x, x / 2])
    np.testing.assert_allclose(f(n + xs), aux_v(c, gen, n, xs) + c[n] * gen(xs), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_evaluate_is_linear(seed):
    gen = Chirp(50.0, 0.8, 1.0)
    rng = np.random.default_rng(seed)
    a, b = unit_disk(rng, 6), unit_disk(rng, 6)
    a[0] = b[0] = 1.0
    x = np.linspace(-1, 10, 57)
    both = CausalSignal(a + b + 0.5, gen)
    parts = CausalSignal(a, gen)(x) + CausalSignal(b, gen)(x) + CausalSignal(np.full(6, 0.5), gen)(x)
    np.testing.assert_allclose(both(x), parts, atol=1e-12)


@pytest.mark.parametrize("coeffs,gap", [((1, 1, 1), 0), ((1, 0, 0, 1), 2), ((1, 0, 0, 0), 0),
                                        ((1, 0, 1, 0, 0, 0, 2), 3), ((1,), 0)])
def test_max_gap_examples(coeffs, gap):
    assert max_gap(coeffs) == gap


def brute_gap(c):
    best = 0
    for i in range(1, len(c)):
        for g in range(1, len(c) - i):
            if all(v == 0 for v in c[i:i + g]) and c[i + g] != 0:
                best = max(best, g)
    return best


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from([0, 0, 1, -2.5]), min_size=1, max_size=20))
def test_max_gap_matches_brute_force(tail):
    c = [1] + tail
    assert max_gap(c) == brute_gap(c)


def test_nonseparable_candidate(spline):
    assert not is_nonseparable_candidate(CausalSignal([1, 0, 0, 0, 1], spline))
    assert is_nonseparable_candidate(CausalSignal([1, 0, 0, 1], spline))


def test_nonseparable_candidate_short_support():
    from phaseless_sis.generators import Tabulated
    gen = Tabulated(np.array([0.0, 1.0, 0.0]), support=2)
    assert is_nonseparable_candidate(CausalSignal([1, 1], gen))


def test_ambiguous_pair_magnitudes_agree():
    f, g = ambiguous_pair(CubicBSpline(), alpha=1.0, beta=0.0, N=2)
    x = np.linspace(0, 2 + 4, 10_000)
    assert np.max(np.abs(np.abs(f(x)) - np.abs(g(x)))) < 1e-12
    assert theta_grid_residual(f.coeffs, g.coeffs) > 0.1


def test_ambiguous_pair_partner_coefficient():
    alpha, beta = 0.8, 0.3
    f, g = ambiguous_pair(CubicBSpline(), alpha, beta, N=4, free=0.5 - 0.2j)
    assert g.coeffs[1] == pytest.approx(np.exp(1j * (2 * alpha - beta)))
    assert f.coeffs[0] == 1 and f.coeffs[1] == pytest.approx(np.exp(1j * beta))
    np.testing.assert_allclose(f.coeffs[2:], 0.5 - 0.2j)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.05, 3.0), beta=st.floats(-3.0, 3.0), n=st.integers(2, 6))
def test_ambiguous_pair_property(alpha, beta, n):
    if abs(np.sin(alpha - beta)) < 1e-3:
        return
    f, g = ambiguous_pair(CubicBSpline(), alpha, beta, n)
    x = np.linspace(0, n + 4, 2001)
    assert np.max(np.abs(np.abs(f(x)) - np.abs(g(x)))) < 1e-12


@pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (1.0, 1.0), (1.0 + np.pi, 1.0)])
def test_ambiguous_pair_rejects_degenerate(alpha, beta):
    with pytest.raises(ValueError):
        ambiguous_pair(CubicBSpline(), alpha, beta, 2)


def test_theta_grid_residual_of_rotation():
    c = unit_disk(np.random.default_rng(4), 7)
    assert theta_grid_residual(c, c * np.exp(1j * np.pi / 2)) < 1e-12
