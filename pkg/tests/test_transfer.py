import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from delaycert.core import DelayMeasure, DelaySystem, poly_eval
from delaycert.errors import EvaluationOverflow, SingularAtP
from delaycert.goodwin import build_goodwin
from delaycert.transfer import (eval_measure, eval_transfer, exp_moments, spectral_norm,
                                transfer_many)


def _cquad(f, a, b):
    re = integrate.quad(lambda s: f(s).real, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    im = integrate.quad(lambda s: f(s).imag, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return re + 1j * im


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30), st.floats(0.01, 2.0), st.integers(0, 5))
def test_exp_moments_against_quadrature(re, im, h, k):
    p = complex(re, im)
    if re * h > 20:
        return
    got = exp_moments(np.array([p]), h, k)[0, k]
    want = _cquad(lambda s: s ** k * np.exp(p * s), 0.0, h)
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want)) * max(1.0, np.exp(abs(re) * h) / 1e3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4), st.floats(-5, 5), st.floats(-40, 40),
       st.integers(0, 1))
def test_density_closed_form_against_quadrature(coeffs, re, im, q):
    c = np.array(coeffs).reshape(-1, 1, 1)
    mu = DelayMeasure((1, 1), density=[(-1.3, -0.2, c)])
    p = complex(re, im)
    got = eval_measure(mu, p, weight_power=q)[0, 0]
    dens = lambda s: poly_eval(c, np.array([s]))[0, 0, 0] * s ** q * np.exp(p * s)
    want = _cquad(dens, -1.3, -0.2)
    assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def test_atoms_exact():
    mu = DelayMeasure.atom(-0.5, [[2.0]]) + DelayMeasure.atom(0.0, [[1.0]])
    p = np.array([1j, 2 + 3j])
    assert np.allclose(eval_measure(mu, p)[:, 0, 0], 2 * np.exp(-0.5 * p) + 1, rtol=1e-15)
    assert np.allclose(eval_measure(mu, p, 1)[:, 0, 0], -np.exp(-0.5 * p), rtol=1e-15)


def test_goodwin_transfer_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(5):
        tau, lam, rho = rng.uniform(0.1, 4), rng.uniform(0.05, 1), rng.uniform(0, 1)
        sys, _ = build_goodwin(tau, lam, rho)
        p = rng.uniform(-0.5, 2, 40) + 1j * rng.uniform(-20, 20, 40)
        want = -1.0 / ((lam + p) ** 3 * np.exp(tau * p) + rho)
        got = transfer_many(sys, p)[:, 0, 0]
        assert np.max(np.abs(got / want - 1)) < 1e-12


def test_goodwin_modulus_on_axis():
    sys, _ = build_goodwin(1.7, 0.6, 0.0)
    om = np.linspace(-10, 10, 101)
    got = np.abs(transfer_many(sys, 1j * om)[:, 0, 0])
    assert np.allclose(got, (0.36 + om ** 2) ** -1.5, rtol=1e-12)


def test_hand_resolvent_two_by_two():
    # a = atom(0, A0) + atom(-1, A1); (alpha - p)^{-1} computed by Cramer's rule
    a0 = np.array([[-1.0, 2.0], [0.5, -3.0]])
    a1 = np.array([[0.2, 0.0], [0.0, -0.4]])
    a = DelayMeasure.atom(0.0, a0) + DelayMeasure.atom(-1.0, a1)
    b = np.array([[1.0], [2.0]])
    c = DelayMeasure.atom(-0.5, [[1.0, -1.0]])
    sys = DelaySystem(1.0, a, b, c)
    for p in (0.3j, 1 + 2j, -0.2 + 5j):
        m = a0 + a1 * np.exp(-p) - p * np.eye(2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
        want = np.exp(-0.5 * p) * (np.array([1.0, -1.0]) @ inv @ b)
        assert eval_transfer(sys, p)[0, 0] == pytest.approx(want[0], rel=1e-13)


def test_singular_point_raises():
    sys = DelaySystem(1.0, DelayMeasure.atom(0.0, [[0.0]]), [[1.0]],
                      DelayMeasure.atom(0.0, [[1.0]]))
    with pytest.raises(SingularAtP):
        eval_transfer(sys, 0j)


def test_overflow_raises():
    sys, _ = build_goodwin(4.0, 0.5, 0.1)
    with pytest.raises(EvaluationOverflow):
        eval_transfer(sys, -200 + 0j)


def test_spectral_norm():
    m = np.array([[3.0, 0], [0, 4.0j]])
    assert spectral_norm(m) == pytest.approx(4.0)
    assert np.allclose(spectral_norm(np.stack([m, 2 * m])), [4.0, 8.0])
