import math

import numpy as np
import pytest

from delaycert.core import DelayMeasure, DelaySystem, Nonlinearity
from delaycert.errors import ConfigError, DifferenceUnderflow, NonFiniteState
from delaycert.goodwin import build_goodwin
from delaycert.simulate import (constant_history, expression_history, fit_decay_rate, integrate,
                                integrate_batch, snap_step)

ZERO_NL = Nonlinearity("linear", {"gain": [[0.0]]})


def scalar(coef0, coef1=0.0, lag=1.0):
    a = DelayMeasure.atom(0.0, [[coef0]]) + DelayMeasure.atom(-lag, [[coef1]])
    return DelaySystem(lag, a, [[1.0]], DelayMeasure.atom(0.0, [[1.0]]))


def test_exponential_decay():
    tr = integrate(scalar(-1.0), ZERO_NL, constant_history(1.0, 1), 1.0, 0.01)
    assert tr.states[-1, 0] == pytest.approx(math.exp(-1), abs=1e-8)


def test_convergence_order():
    errs = []
    hs = [0.1, 0.05, 0.025, 0.0125]
    for h in hs:
        tr = integrate(scalar(-1.0), ZERO_NL, constant_history(1.0, 1), 1.0, h)
        errs.append(abs(tr.states[-1, 0] - math.exp(-1)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders > 3.7) & (orders < 4.3))


def test_method_of_steps_exact():
    tr = integrate(scalar(0.0, -1.0), ZERO_NL, constant_history(1.0, 1), 2.0, 0.1)
    assert abs(tr(np.array([1.0]))[0, 0]) < 1e-12
    assert tr(np.array([2.0]))[0, 0] == pytest.approx(-0.5, abs=1e-12)
    # on [2, 3]: x(t) = -1/2 + (t-2)^2/2 - (t-2)^3/6
    tr3 = integrate(scalar(0.0, -1.0), ZERO_NL, constant_history(1.0, 1), 3.0, 0.1)
    for t in (2.5, 3.0):
        u = t - 2
        assert tr3(np.array([t]))[0, 0] == pytest.approx(-0.5 + u * u / 2 - u ** 3 / 6, abs=1e-12)


def test_hermite_continuity():
    sys, nl = build_goodwin(1.0, 0.7)
    tr = integrate(sys, nl, constant_history([0.3, 0.5, 0.9], 3), 5.0, 0.05)
    nodes = tr.times[1:-1]
    left = tr(nodes - 1e-13)
    assert np.max(np.abs(tr(nodes) - tr.states[1:-1])) == 0.0
    assert np.max(np.abs(left - tr.states[1:-1])) < 1e-11


def test_step_snapping():
    assert snap_step(0.3, [1.0]) == pytest.approx(0.25)
    h = snap_step(0.01, [0.7, 1.3])
    for lag in (0.7, 1.3):
        assert abs(lag / h - round(lag / h)) < 1e-9


def test_step_halving_goodwin():
    sys, nl = build_goodwin(1.0, 0.8)
    hist = constant_history([0.2, 1.5, 0.7], 3)
    a = integrate(sys, nl, hist, 20.0, 0.01)
    b = integrate(sys, nl, hist, 20.0, 0.005)
    assert np.max(np.abs(a.states - b.states[::2])) <= 1e-6


def test_cone_invariance_two_steps():
    sys, nl = build_goodwin(1.0, 1.0)
    for h in (0.02, 0.01):
        tr = integrate(sys, nl, constant_history([0.0, 0.0, 2.0], 3), 50.0, h)
        assert tr.states.min() >= -1e-12


def test_expression_history_and_batch():
    hist = expression_history("1+0.5*sin(t)", 1)
    assert hist(np.array([-1.0]))[0, 0] == pytest.approx(1 + 0.5 * math.sin(-1))
    trs = integrate_batch(scalar(-1.0, 0.5), ZERO_NL, [hist, constant_history(2.0, 1)], 3.0, 0.05)
    one = integrate(scalar(-1.0, 0.5), ZERO_NL, hist, 3.0, 0.05)
    assert np.array_equal(trs[0].states, one.states)


def test_nonfinite_state():
    with pytest.raises(NonFiniteState) as info:
        integrate(scalar(0.0), Nonlinearity("expression", {"expr": "sigma^3"}),
                  constant_history(2.0, 1), 10.0, 0.01)
    assert 0 < info.value.time < 10


def test_decay_rate():
    tr1 = integrate(scalar(-1.0), ZERO_NL, constant_history(1.0, 1), 10.0, 0.01)
    tr2 = integrate(scalar(-1.0), ZERO_NL, constant_history(2.0, 1), 10.0, 0.01)
    fit = fit_decay_rate(tr1, tr2, (2.0, 10.0))
    assert fit.rate == pytest.approx(1.0, abs=0.01)
    assert fit.residual < 1e-6
    with pytest.raises(DifferenceUnderflow):
        fit_decay_rate(tr1, tr1, (2.0, 10.0))


def test_forcing():
    tr = integrate(scalar(-1.0), ZERO_NL, constant_history(0.0, 1), 2.0, 0.01,
                   forcing=lambda t: np.array([1.0]))
    assert tr.states[-1, 0] == pytest.approx(1 - math.exp(-2), abs=1e-8)


def test_bad_t_end():
    with pytest.raises(ConfigError):
        integrate(scalar(-1.0), ZERO_NL, constant_history(1.0, 1), 0.0, 0.1)
