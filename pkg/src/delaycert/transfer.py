"""Evaluation of alpha(p), gamma(p) and the transfer matrix W(p).

All evaluators accept a scalar ``p`` or an array of points; array input
returns stacked matrices with the point axis first.
"""

import numpy as np

from .core import poly_eval, poly_shift
from .errors import EvaluationOverflow, SingularAtP

__all__ = ["eval_measure", "eval_transfer", "transfer_many", "spectral_norm",
           "resolvent_matrix", "exp_moments"]

RCOND_SINGULAR = 1e-13
_EXP_LIMIT = 700.0
_SERIES_TERMS = 24


def exp_moments(p, h, kmax):
    """Moments ``I_k(p) = int_0^h s^k exp(p s) ds`` for ``k = 0..kmax``.

    Uses the Taylor series of the exponential when ``|p| h <= 1`` and the
    integration-by-parts recurrence otherwise; the recurrence loses at most a
    factor ``k!`` in that regime.  Returns shape ``p.shape + (kmax + 1,)``.
    """
    p = np.asarray(p, dtype=complex)
    out = np.empty(p.shape + (kmax + 1,), dtype=complex)
    small = np.abs(p) * h <= 1.0
    if np.any(small):
        ps = p[small]
        m = np.arange(_SERIES_TERMS)
        fact = np.cumprod(np.concatenate(([1.0], np.arange(1.0, _SERIES_TERMS))))
        powers = (ps[..., None] * h) ** m / fact  # (k, M)
        for k in range(kmax + 1):
            out[small, k] = h ** (k + 1) * np.sum(powers / (k + m + 1), axis=-1)
    big = ~small
    if np.any(big):
        pb = p[big]
        e = np.exp(pb * h)
        prev = (e - 1.0) / pb
        out[big, 0] = prev
        for k in range(1, kmax + 1):
            prev = (h ** k * e - k * prev) / pb
            out[big, k] = prev
    return out


def _check_range(mu, p):
    lo = mu.support_min
    if lo < 0 and np.any(np.real(p) * lo > _EXP_LIMIT):
        raise EvaluationOverflow(
            f"exp(p*theta) overflows for Re p = {np.min(np.real(p))!r} on [{lo}, 0]")


def eval_measure(mu, p, weight_power=0):
    """Return ``int exp(p theta) theta**q dmu(theta)`` with ``q = weight_power``.

    ``weight_power=1`` gives the derivative of ``alpha`` with respect to p.
    Density pieces are integrated in closed form after re-expanding the
    polynomial about whichever end of the piece keeps ``exp`` bounded.
    """
    scalar = np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    _check_range(mu, p)
    rows, cols = mu.dims
    out = np.zeros(p.shape + (rows, cols), dtype=complex)
    for theta, mat in mu.atoms:
        w = np.exp(p * theta) * theta ** weight_power
        out += w[..., None, None] * mat
    for lo, hi, coeffs in mu.density:
        if weight_power:
            pad = np.zeros((weight_power,) + coeffs.shape[1:])
            coeffs = np.concatenate([pad, coeffs])
        h = hi - lo
        kmax = coeffs.shape[0] - 1
        fwd = np.real(p) < 0
        for mask, anchor in ((fwd, lo), (~fwd, hi)):
            if not np.any(mask):
                continue
            pm = p[mask]
            local = poly_shift(coeffs, anchor)
            if anchor == lo:
                mom = exp_moments(pm, h, kmax)
            else:
                # int_{-h}^0 s^k e^{ps} ds = (-1)^k int_0^h t^k e^{-pt} dt
                mom = exp_moments(-pm, h, kmax) * (-1.0) ** np.arange(kmax + 1)
            val = np.einsum("pk,krc->prc", mom, local)
            out[mask] += np.exp(pm * anchor)[:, None, None] * val
    return out[0] if scalar else out


def resolvent_matrix(sys, p):
    """``alpha(p) - p I`` for scalar or array ``p``."""
    alpha = eval_measure(sys.a, p)
    idx = np.arange(sys.n)
    alpha[..., idx, idx] -= np.asarray(p, dtype=complex)[..., None]
    return alpha


def _small_inverse(m):
    """Adjugate inverse of a stack of 1x1, 2x2 or 3x3 matrices.

    Elementwise formulas beat batched LAPACK calls by a wide margin at
    these sizes; singular entries come out non-finite.
    """
    n = m.shape[-1]
    if n == 1:
        return 1.0 / m
    if n == 2:
        a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
        det = a * d - b * c
        inv = np.stack([np.stack([d, -b], -1), np.stack([-c, a], -1)], -2)
        return inv / det[..., None, None]
    mt = np.ascontiguousarray(np.moveaxis(m, (-2, -1), (0, 1)))  # contiguous entries
    e = [[mt[i, j] for j in range(3)] for i in range(3)]
    cof = [[e[(j + 1) % 3][(i + 1) % 3] * e[(j + 2) % 3][(i + 2) % 3]
            - e[(j + 1) % 3][(i + 2) % 3] * e[(j + 2) % 3][(i + 1) % 3]
            for j in range(3)] for i in range(3)]
    # cof[i][j] is the (i, j) entry of the adjugate
    det = e[0][0] * cof[0][0] + e[0][1] * cof[1][0] + e[0][2] * cof[2][0]
    inv_det = 1.0 / det
    out = np.empty(m.shape, dtype=np.result_type(m, complex))
    for i in range(3):
        for j in range(3):
            out[..., i, j] = cof[i][j] * inv_det
    return out


def _inverse(mats):
    if mats.shape[-1] <= 3:
        return _small_inverse(mats)
    try:
        return np.linalg.solve(mats, np.broadcast_to(np.eye(mats.shape[-1], dtype=complex),
                                                     mats.shape))
    except np.linalg.LinAlgError:
        return np.stack([_safe_inv(m) for m in mats])


def _norm1(mats):
    """Matrix 1-norm of each matrix in a stack (max absolute column sum)."""
    a = np.abs(mats)
    if a.shape[-1] > 4:
        return a.sum(axis=-2).max(axis=-1)
    # explicit loops: numpy reductions over length-3 axes are slow
    cols = a[..., 0, :].copy()
    for i in range(1, a.shape[-2]):
        cols += a[..., i, :]
    out = cols[..., 0].copy()
    for j in range(1, a.shape[-1]):
        np.maximum(out, cols[..., j], out=out)
    return out


def transfer_many(sys, p):
    """Stack of ``W(p_k)`` of shape ``(len(p), r, m)``.

    The resolvent is inverted explicitly (adjugate formulas up to 3x3, LU
    beyond), which also yields the 1-norm reciprocal condition number;
    `SingularAtP` is raised at the first point where it drops below 1e-13.
    """
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    mats = resolvent_matrix(sys, p)
    with np.errstate(all="ignore"):
        inv = _inverse(mats)
        rc = 1.0 / (_norm1(mats) * _norm1(inv))
    bad = ~(rc >= RCOND_SINGULAR)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SingularAtP(complex(p[k]), float(np.nan_to_num(rc[k])))
    gamma = eval_measure(sys.c, p)
    w = gamma @ (inv @ sys.b_tilde)
    if not np.all(np.isfinite(w)):
        raise EvaluationOverflow("non-finite transfer value")
    return w


def _safe_inv(mat):
    try:
        return np.linalg.inv(mat)
    except np.linalg.LinAlgError:
        return np.full(mat.shape, np.inf, dtype=complex)


def eval_transfer(sys, p):
    """``W(p) = gamma(p) (alpha(p) - pI)^{-1} B`` at a single point."""
    return transfer_many(sys, np.array([p]))[0]


def spectral_norm(mat):
    """Largest singular value (also on stacks of matrices)."""
    mat = np.asarray(mat)
    if mat.ndim < 2:
        mat = np.atleast_2d(mat)
    return np.linalg.svd(mat, compute_uv=False)[..., 0]
