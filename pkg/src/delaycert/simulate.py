"""Fixed-step RK4 method of steps with cubic Hermite dense output.

The step is snapped so that it divides every discrete lag; delayed values at
the RK stages then fall on nodes or step midpoints of already computed
steps, where the Hermite interpolant is fourth-order accurate.  Several
trajectories of the same system can be integrated together (`histories` may
be a list), which is how validation batteries are run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as _expr
from .errors import ConfigError, DifferenceUnderflow, NonFiniteState

__all__ = ["Trace", "DecayFit", "integrate", "integrate_batch", "fit_decay_rate",
           "snap_step", "constant_history", "expression_history"]


def constant_history(value, n):
    v = np.broadcast_to(np.asarray(value, dtype=float), (n,)).copy()

    def history(t):
        return np.broadcast_to(v, np.shape(t) + (n,))
    return history


def expression_history(text, n):
    """History ``phi(t)`` given by an expression in ``t`` (same for all components)."""
    tree = _expr.parse_expression(text, variables=("t",))

    def history(t):
        t = np.asarray(t, dtype=float)
        val = np.asarray(_expr.evaluate(tree, t=t), dtype=float) + 0.0 * t
        return np.repeat(val[..., None], n, axis=-1)
    return history


def snap_step(h, lags, tol=1e-12):
    """Largest step ``<= h`` that divides every lag (relative tolerance `tol`)."""
    if not lags:
        return float(h)
    base = min(lags)
    k = int(np.ceil(base / h - 1e-9))
    for kk in range(k, k + 10000):
        step = base / kk
        if all(abs(lag / step - round(lag / step)) <= tol * lag / step for lag in lags):
            return step
    raise ConfigError(f"no step <= {h} divides all lags {lags}")


@dataclass
class Trace:
    """Dense solution: nodes ``t_k = k h``, states and derivatives at nodes.

    ``states`` has shape ``(N + 1, n)``; the history function answers
    queries with ``t <= 0``.
    """

    t0: float
    t_end: float
    h: float
    tau: float
    breakpoints: np.ndarray
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    history: object

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return _dense(t, self.h, self.states, self.derivs, self.history)

    def segment_sup(self, other, window=None):
        """``sup_{s in [t - tau, t]} |x(s) - y(s)|_inf`` at every node t."""
        return _segment_sup(self, other)


def _dense(t, h, states, derivs, history):
    """Evaluate the solution at times `t` (1-D) from node data."""
    out = np.empty((len(t),) + states.shape[1:])
    past = t <= 0.0
    if np.any(past):
        out[past] = history(t[past])
    fut = ~past
    if np.any(fut):
        tf = t[fut]
        k = np.clip(np.ceil(tf / h - 1e-12).astype(int) - 1, 0, len(states) - 2)
        s = (tf - k * h) / h
        # land exactly on node values at the ends of a piece
        s = np.where(np.abs(s - 1.0) < 1e-9, 1.0, np.where(np.abs(s) < 1e-9, 0.0, s))
        s = s.reshape(s.shape + (1,) * (states.ndim - 1))
        y0, y1 = states[k], states[k + 1]
        d0, d1 = derivs[k], derivs[k + 1]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        out[fut] = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    return out


class _Integrator:
    def __init__(self, sys, nonlinearity, histories, forcing, h, steps):
        self.sys = sys
        self.f = nonlinearity
        self.histories = histories
        self.forcing = forcing
        self.h = h
        self.batch = len(histories)
        n = sys.n
        self.states = np.empty((steps + 1, self.batch, n))
        self.derivs = np.empty((steps + 1, self.batch, n))
        self.known = 0  # index of the last completed node

    def history(self, t):
        return np.stack([np.asarray(hist(t), dtype=float).reshape(np.shape(t) + (-1,))
                         for hist in self.histories], axis=-2)

    def path(self, ts, xs):
        """Return theta -> x(ts + theta) of shape (k, batch, n).

        Values between the last node and the stage time are interpolated
        linearly between the last node and the stage state.
        """
        tn = self.known * self.h
        xn = self.states[self.known]

        def at(theta):
            s = ts + np.asarray(theta, dtype=float)
            out = np.empty((len(s), self.batch, self.sys.n))
            stage = s >= ts - 1e-14 * max(1.0, abs(ts))
            ahead = (s > tn) & ~stage
            known = ~(stage | ahead)
            out[stage] = xs
            if np.any(ahead):
                w = ((s[ahead] - tn) / (ts - tn))[:, None, None]
                out[ahead] = (1.0 - w) * xn + w * xs
            if np.any(known):
                out[known] = _dense(s[known], self.h, self.states[: self.known + 1],
                                    self.derivs[: self.known + 1], self.history)
            return out
        return at

    def rhs(self, t, x):
        path = self.path(t, x)
        sigma = np.atleast_2d(self.sys.c.apply(path))
        xi = np.asarray(self.f(sigma), dtype=float).reshape(self.batch, -1)
        out = np.atleast_2d(self.sys.a.apply(path)) + xi @ self.sys.b_tilde.T
        if self.forcing is not None:
            out = out + np.asarray(self.forcing(t), dtype=float)
        return out


def integrate_batch(sys, nonlinearity, histories, t_end, h, forcing=None):
    """Integrate several histories of the same system; returns a list of `Trace`.

    Raises `NonFiniteState` with the blow-up time if any state overflows.
    """
    if not t_end > 0:
        raise ConfigError("t_end must be positive")
    lags = sys.lags()
    step = snap_step(h, lags)
    steps = int(round(t_end / step))
    if abs(steps * step - t_end) > 1e-9 * max(1.0, t_end):
        steps = int(np.ceil(t_end / step))
    integ = _Integrator(sys, nonlinearity, list(histories), forcing, step, steps)
    x = integ.history(np.array([0.0]))[0]
    integ.states[0] = x
    # blow-up is reported through NonFiniteState, not floating-point warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            t = k * step
            integ.known = k
            k1 = integ.rhs(t, x)
            integ.derivs[k] = k1
            k2 = integ.rhs(t + 0.5 * step, x + 0.5 * step * k1)
            k3 = integ.rhs(t + 0.5 * step, x + 0.5 * step * k2)
            k4 = integ.rhs(t + step, x + step * k3)
            x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise NonFiniteState(t + step)
            integ.states[k + 1] = x
    integ.known = steps
    integ.derivs[steps] = integ.rhs(steps * step, x)
    times = step * np.arange(steps + 1)
    t_final = times[-1]
    bps = sorted({m * lag for lag in lags for m in range(1, int(t_final / lag) + 1)})
    traces = []
    for b, hist in enumerate(integ.histories):
        traces.append(Trace(0.0, float(t_final), step, sys.tau, np.array(bps), times,
                            integ.states[:, b, :].copy(), integ.derivs[:, b, :].copy(),
                            _single_history(hist, sys.n)))
    return traces


def _single_history(hist, n):
    def history(t):
        return np.asarray(hist(t), dtype=float).reshape(np.shape(t) + (n,))
    return history


def integrate(sys, nonlinearity, history, t_end, h, forcing=None):
    """Integrate ``x' = A x_t + B F(C x_t) + forcing(t)`` from `history`."""
    return integrate_batch(sys, nonlinearity, [history], t_end, h, forcing)[0]


@dataclass(frozen=True)
class DecayFit:
    rate: float
    window: tuple
    residual: float
    pair: tuple = ()


def _segment_sup(a, b):
    # node-sampled difference, history part sampled on the same spacing
    h = a.h
    lag_steps = int(round(a.tau / h))
    past_t = -h * np.arange(lag_steps, 0, -1)
    diff_past = np.abs(a.history(past_t) - b.history(past_t)).max(axis=-1) if lag_steps else np.empty(0)
    diff = np.abs(a.states - b.states).max(axis=-1)
    full = np.concatenate([diff_past, diff])
    # running max over windows of lag_steps + 1 samples
    width = lag_steps + 1
    padded = np.concatenate([np.full(width - 1 - len(diff_past), -np.inf), full]) \
        if len(diff_past) < width - 1 else full
    view = np.lib.stride_tricks.sliding_window_view(padded, width)
    return view.max(axis=-1)[-len(diff):]


def fit_decay_rate(trace_a, trace_b, window, pair=()):
    """Exponential rate of the trailing-segment sup distance on `window`.

    Fits ``log d(t) ~ c - rate t`` by least squares, where ``d(t)`` is the
    sup over ``[t - tau, t]`` of ``|x_a - x_b|_inf``.
    """
    if trace_a.h != trace_b.h or len(trace_a.times) != len(trace_b.times):
        raise ConfigError("traces must share their grid")
    t = trace_a.times
    d = _segment_sup(trace_a, trace_b)
    ta, tb = window
    floor = 1e-13
    before = t < ta
    if np.any(d[before] < floor) or (not np.any(before) and d[0] < floor):
        where = t[np.argmax(d < floor)]
        raise DifferenceUnderflow(float(where))
    sel = (t >= ta) & (t <= tb)
    under = sel & (d < floor)
    if np.any(under):
        sel &= t < t[np.argmax(under)]
    if sel.sum() < 2:
        raise DifferenceUnderflow(float(ta))
    coef, res, *_ = np.polyfit(t[sel], np.log(d[sel]), 1, full=True)
    resid = float(np.sqrt(res[0] / sel.sum())) if len(res) else 0.0
    return DecayFit(-float(coef[0]), (float(ta), float(tb)), resid, tuple(pair))
