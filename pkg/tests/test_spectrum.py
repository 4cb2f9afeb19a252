import numpy as np
import pytest
from scipy.special import lambertw

from delaycert.core import DelayMeasure, DelaySystem
from delaycert.errors import RootOnLine
from delaycert.goodwin import build_goodwin, rho_cap
from delaycert.spectrum import (char_fn, count_roots_right_of, log_derivative, newton_root,
                                root_box)

from oracles import grid_winding, random_system


def scalar(coef0, coef1, lag=1.0):
    a = DelayMeasure.atom(0.0, [[coef0]]) + DelayMeasure.atom(-lag, [[coef1]])
    return DelaySystem(lag, a, [[1.0]], DelayMeasure.atom(0.0, [[1.0]]))


def test_ode_has_no_roots_right():
    assert count_roots_right_of(scalar(-1.0, 0.0), 0.0).j == 0


def test_positive_feedback_delay_one_root():
    sys = scalar(0.0, 1.0)
    rc = count_roots_right_of(sys, 0.0)
    assert rc.j == 1
    root = newton_root(sys, 0.5)
    assert root.real == pytest.approx(float(lambertw(1).real), abs=1e-12)
    assert abs(root.imag) < 1e-12


def test_root_on_line_is_detected():
    # x' = -(pi/2) x(t-1) has roots +-i pi/2
    sys = scalar(0.0, -np.pi / 2)
    with pytest.raises(RootOnLine):
        count_roots_right_of(sys, 0.0)
    assert count_roots_right_of(sys, 0.01).j == 2
    assert count_roots_right_of(sys, -0.01).j == 0


def test_root_box_contains_roots():
    sys = scalar(0.3, 2.0)
    r = root_box(sys, 0.0)
    # roots of p = 0.3 + 2 exp(-p) with Re p >= 0: the real one
    root = newton_root(sys, 1.0)
    assert abs(root) < r


def test_log_derivative_matches_finite_difference():
    rng = np.random.default_rng(11)
    sys = random_system(rng, n=3)
    p, h = 0.4 + 1.3j, 1e-6
    fd = (char_fn(sys, p + h) - char_fn(sys, p - h)) / (2 * h) / char_fn(sys, p)
    assert log_derivative(sys, p) == pytest.approx(fd, rel=1e-7)


def test_goodwin_below_cap_is_stable():
    for tau, lam in [(1.0, 1.0), (3.0, 0.4), (0.2, 0.9)]:
        sys, _ = build_goodwin(tau, lam, 0.9 * rho_cap(tau, lam))
        assert count_roots_right_of(sys, 0.0).j == 0


def test_goodwin_above_cap_has_pair():
    sys, _ = build_goodwin(1.0, 1.0, 1.2 * rho_cap(1.0, 1.0))
    assert count_roots_right_of(sys, 0.0).j == 2


@pytest.mark.parametrize("seed", range(8))
def test_against_grid_winding(seed):
    rng = np.random.default_rng(100 + seed)
    sys = random_system(rng)
    nu = float(rng.uniform(-0.5, 0.5))
    rc = count_roots_right_of(sys, nu)
    assert rc.j == round(grid_winding(sys, nu, root_box(sys, nu)))
    assert rc.winding_residual < 0.05
