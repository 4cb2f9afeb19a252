"""Characteristic function, a-priori root box and argument-principle root counts."""

from dataclasses import dataclass

import numpy as np

from .core import total_variation
from .errors import NonIntegerWinding, RootOnLine
from .transfer import eval_measure, resolvent_matrix

__all__ = ["RootCount", "char_fn", "log_derivative", "root_box", "count_roots_right_of",
           "newton_root"]

# Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half, descending)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[13, 11, 9]] = _WG[:3]
_WG15[7] = _WG[3]

LEFT_EDGE_SAMPLES = 4096
ROOT_ON_LINE_RTOL = 1e-8


@dataclass(frozen=True)
class RootCount:
    nu: float
    j: int
    contour: tuple
    winding_residual: float
    min_boundary_modulus: float
    raw: complex = 0j


def char_fn(sys, p):
    """``det(alpha(p) - pI)``."""
    return np.linalg.det(resolvent_matrix(sys, p))


def log_derivative(sys, p):
    """``Delta'(p) / Delta(p) = tr((alpha - pI)^{-1} (alpha' - I))``."""
    p = np.asarray(p, dtype=complex)
    mats = resolvent_matrix(sys, p)
    dmats = eval_measure(sys.a, p, weight_power=1) - np.eye(sys.n)
    return np.trace(np.linalg.solve(mats, dmats), axis1=-2, axis2=-1)


def root_box(sys, nu):
    """Radius bound for roots with ``Re p >= -nu``.

    For such p and theta in [-tau, 0], ``|exp(p theta)| <= max(1, exp(nu tau))``,
    so ``|alpha(p)|_2 <= max(1, exp(nu tau)) TV(a)``.  A root makes p an
    eigenvalue of alpha(p), hence ``|p| <= |alpha(p)|_2``.  The returned
    ``R`` is that bound plus one, so the contour edges at distance R stay
    clear of every root.
    """
    return max(1.0, float(np.exp(nu * sys.tau))) * total_variation(sys.a) + 1.0


def _gk_edge(f, p0, p1, tol, max_intervals):
    """Adaptive G7/K15 integral of f along the segment p0 -> p1."""
    dp = p1 - p0
    pending = [(0.0, 1.0)]
    total = 0j
    used = 0
    while pending:
        a = np.array([iv[0] for iv in pending])
        b = np.array([iv[1] for iv in pending])
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        s = mid[:, None] + half[:, None] * _NODES[None, :]
        vals = f(p0 + s * dp) * dp
        kron = half * (vals @ _WK)
        gauss = half * (vals @ _WG15)
        err = np.abs(kron - gauss)
        ok = (err <= tol * 2.0 * half) | (half < 1e-14)
        total += kron[ok].sum()
        used += len(pending)
        if used > max_intervals:
            total += kron[~ok].sum()
            return total, False
        pending = [iv for iv, good in zip(pending, ok) if not good]
        pending = [piece for a0, b0 in pending
                   for piece in ((a0, 0.5 * (a0 + b0)), (0.5 * (a0 + b0), b0))]
    return total, True


def _left_edge_minimum(sys, nu, radius):
    y = np.linspace(-radius, radius, LEFT_EDGE_SAMPLES)
    mod = np.abs(char_fn(sys, -nu + 1j * y))
    big = float(mod.max())
    interior = (mod[1:-1] <= mod[:-2]) & (mod[1:-1] <= mod[2:])
    cand = np.flatnonzero(interior) + 1
    cand = cand[np.argsort(mod[cand])][:16]
    best_y, best = float(y[np.argmin(mod)]), float(mod.min())
    step = y[1] - y[0]
    for i in cand:
        # Newton in the complex plane from the sample, then project the
        # root (if it stays nearby) back onto the line
        p = complex(-nu, y[i])
        for _ in range(30):
            try:
                dp = 1.0 / complex(log_derivative(sys, p))
            except np.linalg.LinAlgError:
                break  # landed exactly on a root
            p -= dp
            if not np.isfinite(p) or abs(p - complex(-nu, y[i])) > 4.0 * step:
                break
            if abs(dp) < 1e-15 * max(1.0, abs(p)):
                break
        if not np.isfinite(p) or abs(p - complex(-nu, y[i])) > 4.0 * step:
            continue
        val = abs(complex(char_fn(sys, complex(-nu, p.imag))))
        if val < best:
            best, best_y = val, p.imag
    return best, best_y, big


def count_roots_right_of(sys, nu, tol=1e-4, max_intervals=40000):
    """Number of characteristic roots (with multiplicity) with ``Re p > -nu``.

    Integrates ``Delta'/Delta`` around the rectangle ``[-nu, R] x [-R, R]``
    with ``R = root_box(sys, nu)``.  Raises `RootOnLine` when a root sits on
    the line ``Re p = -nu`` and `NonIntegerWinding` when the contour integral
    fails to settle near an integer.
    """
    radius = root_box(sys, nu)
    corners = ((-nu, -radius), (radius, -radius), (radius, radius), (-nu, radius))
    if -nu >= radius:
        return RootCount(nu, 0, corners, 0.0, float("inf"), 0j)
    best, best_y, big = _left_edge_minimum(sys, nu, radius)
    if best < ROOT_ON_LINE_RTOL * (1.0 + big):
        raise RootOnLine(nu, complex(-nu, best_y), best)
    pts = [complex(x, y) for x, y in corners]

    def f(p):
        return log_derivative(sys, p)

    residual = 1.0
    value = 0j
    while True:
        value = 0j
        converged = True
        for p0, p1 in zip(pts, pts[1:] + pts[:1]):
            part, ok = _gk_edge(f, p0, p1, tol, max_intervals)
            value += part
            converged &= ok
        value /= 2j * np.pi
        residual = abs(value - round(value.real))
        if residual < 0.05 or tol < 1e-10 or not converged:
            break
        tol *= 1e-2
    if residual >= 0.25:
        raise NonIntegerWinding(value, residual)
    return RootCount(nu, int(round(value.real)), corners, float(residual), best, complex(value))


def newton_root(sys, p0, tol=1e-14, maxiter=60):
    """Newton iteration ``p <- p - Delta/Delta'`` from `p0`."""
    p = complex(p0)
    for _ in range(maxiter):
        step = 1.0 / complex(log_derivative(sys, p))
        p -= step
        if abs(step) <= tol * max(1.0, abs(p)):
            break
    return p
