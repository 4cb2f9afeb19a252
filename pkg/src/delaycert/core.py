"""Domain types: delay measures, delay systems, nonlinearities, quadratic forms.

A `DelayMeasure` is a matrix-valued measure on ``[-tau, 0]`` made of point
masses (atoms) and piecewise-polynomial densities.  Polynomial densities are
written in the absolute delay variable ``theta``, coefficients lowest degree
first, so a piece ``(l, u, coeffs)`` represents
``sum_k coeffs[k] * theta**k`` for ``theta`` in ``[l, u]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import integrate

from . import expr as _expr
from .errors import ConfigError

__all__ = [
    "DelayMeasure", "DelaySystem", "Nonlinearity", "QuadForm",
    "sector_form", "lipschitz_form", "total_variation", "GOODWIN_SLOPE",
]

# lower slope bound of g(s) = 1/(1+s^3) on s >= 0
GOODWIN_SLOPE = 2.0 * 2.0 ** (1.0 / 3.0) / 3.0


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def poly_eval(coeffs, theta):
    """Horner evaluation of a matrix polynomial at an array of points.

    Returns an array of shape ``theta.shape + coeffs.shape[1:]``.
    """
    theta = np.asarray(theta)
    out = np.zeros(theta.shape + coeffs.shape[1:], dtype=np.result_type(coeffs, theta))
    t = theta.reshape(theta.shape + (1,) * (coeffs.ndim - 1))
    for c in coeffs[::-1]:
        out = out * t + c
    return out


def poly_shift(coeffs, x0):
    """Coefficients of ``s -> P(x0 + s)``."""
    deg = coeffs.shape[0] - 1
    out = np.zeros_like(coeffs, dtype=np.result_type(coeffs, float))
    for k in range(deg + 1):
        for j in range(k + 1):
            out[j] = out[j] + comb(k, j) * x0 ** (k - j) * coeffs[k]
    return out


@dataclass(frozen=True)
class DelayMeasure:
    """Matrix-valued Stieltjes measure on a delay interval.

    Parameters
    ----------
    dims : (int, int)
        Shape of every matrix in the measure.
    atoms : sequence of (theta, matrix)
        Point masses ``M_k`` at locations ``theta_k <= 0``.
    density : sequence of (l, u, coeffs)
        Polynomial density pieces with ``l < u <= 0`` and disjoint interiors.
    """

    dims: tuple
    atoms: tuple = ()
    density: tuple = ()

    def __post_init__(self):
        rows, cols = (int(d) for d in self.dims)
        if rows < 1 or cols < 1:
            raise ConfigError(f"invalid measure dims {self.dims}")
        object.__setattr__(self, "dims", (rows, cols))
        atoms = []
        for theta, mat in self.atoms:
            theta = float(theta)
            mat = _frozen(np.reshape(mat, (rows, cols)))
            if not np.isfinite(theta) or theta > 0:
                raise ConfigError(f"atom location {theta} outside [-tau, 0]")
            atoms.append((theta, mat))
        pieces = []
        for lo, hi, coeffs in self.density:
            lo, hi = float(lo), float(hi)
            coeffs = np.asarray(coeffs, dtype=float)
            coeffs = _frozen(coeffs.reshape((-1, rows, cols)))
            if not (lo < hi <= 0):
                raise ConfigError(f"density interval [{lo}, {hi}] invalid")
            pieces.append((lo, hi, coeffs))
        pieces.sort(key=lambda piece: piece[0])
        for (_, hi0, _), (lo1, _, _) in zip(pieces, pieces[1:]):
            if lo1 < hi0:
                raise ConfigError("density pieces overlap")
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "density", tuple(pieces))

    @classmethod
    def zero(cls, rows, cols):
        return cls((rows, cols))

    @classmethod
    def atom(cls, theta, matrix):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(matrix.shape, atoms=((theta, matrix),))

    @property
    def support_min(self):
        """Leftmost point carrying mass (0 for the empty measure)."""
        locs = [t for t, _ in self.atoms] + [lo for lo, _, _ in self.density]
        return min(locs, default=0.0)

    @property
    def max_degree(self):
        return max((c.shape[0] - 1 for _, _, c in self.density), default=-1)

    def lags(self):
        """Positive discrete lags of the atoms."""
        return sorted({-t for t, _ in self.atoms if t < 0})

    def __add__(self, other):
        if self.dims != other.dims:
            raise ConfigError("cannot add measures of different shape")
        atoms = self.atoms + other.atoms
        pieces = list(self.density) + list(other.density)
        if not pieces:
            return DelayMeasure(self.dims, atoms)
        cuts = sorted({x for lo, hi, _ in pieces for x in (lo, hi)})
        merged = []
        for lo, hi in zip(cuts, cuts[1:]):
            covering = [c for l0, h0, c in pieces if l0 <= lo and hi <= h0]
            if not covering:
                continue
            deg = max(c.shape[0] for c in covering)
            total = np.zeros((deg,) + self.dims)
            for c in covering:
                total[: c.shape[0]] += c
            merged.append((lo, hi, total))
        return DelayMeasure(self.dims, atoms, merged)

    def __neg__(self):
        return DelayMeasure(
            self.dims,
            [(t, -m) for t, m in self.atoms],
            [(lo, hi, -c) for lo, hi, c in self.density])

    def split(self, index, point):
        """Split density piece `index` at an interior point (same measure)."""
        lo, hi, c = self.density[index]
        if not lo < point < hi:
            raise ValueError("split point must be interior")
        pieces = list(self.density)
        pieces[index:index + 1] = [(lo, point, c), (point, hi, c)]
        return DelayMeasure(self.dims, self.atoms, pieces)

    def apply(self, path):
        """Integrate ``dmu(theta) path(theta)`` for a vector-valued path.

        `path` maps an array of theta values (shape ``(k,)``) to an array of
        shape ``(k, cols)`` or ``(k, batch, cols)``.  Densities use
        Gauss-Legendre quadrature exact for the density degree plus 4.
        """
        total = 0.0
        for theta, mat in self.atoms:
            x = path(np.array([theta]))[0]
            total = total + x @ mat.T
        for lo, hi, coeffs in self.density:
            order = coeffs.shape[0] + 4
            nodes, weights = np.polynomial.legendre.leggauss(order)
            half = 0.5 * (hi - lo)
            th = lo + half * (nodes + 1.0)
            dens = poly_eval(coeffs, th)  # (k, rows, cols)
            x = path(th)
            if x.ndim == 2:
                total = total + half * np.einsum("k,krc,kc->r", weights, dens, x)
            else:
                total = total + half * np.einsum("k,krc,kbc->br", weights, dens, x)
        return total


def _scalar_abs_integral(c, lo, hi):
    """Exact integral of |p(theta)| over [lo, hi] for a real polynomial."""
    poly = np.polynomial.Polynomial(c)
    roots = [r.real for r in poly.roots() if abs(r.imag) < 1e-12 and lo < r.real < hi]
    prim = poly.integ()
    cuts = [lo] + sorted(roots) + [hi]
    return float(sum(abs(prim(b) - prim(a)) for a, b in zip(cuts, cuts[1:])))


def total_variation(mu):
    """Total variation of a measure in the spectral norm.

    Atoms contribute ``|M_k|_2``; density pieces contribute the integral of
    the spectral norm of the density.  Constant and scalar pieces are
    integrated exactly, general matrix pieces by adaptive Gauss-Kronrod.
    """
    tv = sum(float(np.linalg.norm(m, 2)) for _, m in mu.atoms)
    for lo, hi, c in mu.density:
        if c.shape[0] == 1:
            tv += float(np.linalg.norm(c[0], 2)) * (hi - lo)
        elif c.shape[1:] == (1, 1):
            tv += _scalar_abs_integral(c[:, 0, 0], lo, hi)
        else:
            def norm_at(th, c=c):
                return float(np.linalg.norm(poly_eval(c, np.array([th]))[0], 2))
            val, _ = integrate.quad(norm_at, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
            tv += val
    return tv


@dataclass(frozen=True)
class DelaySystem:
    """Linear plant ``x' = A x_t + B xi``, ``sigma = C x_t`` on horizon `tau`."""

    tau: float
    a: DelayMeasure
    b_tilde: np.ndarray
    c: DelayMeasure

    def __post_init__(self):
        tau = float(self.tau)
        if not tau > 0:
            raise ConfigError("tau must be positive")
        object.__setattr__(self, "tau", tau)
        b = np.atleast_2d(np.asarray(self.b_tilde, dtype=float))
        n = self.a.dims[0]
        if self.a.dims != (n, n):
            raise ConfigError(f"a must be square, got {self.a.dims}")
        if b.shape[0] != n:
            raise ConfigError(f"b_tilde has {b.shape[0]} rows, expected {n}")
        if self.c.dims[1] != n:
            raise ConfigError(f"c has {self.c.dims[1]} columns, expected {n}")
        for mu in (self.a, self.c):
            if mu.support_min < -tau - 1e-12:
                raise ConfigError("measure support extends beyond -tau")
        object.__setattr__(self, "b_tilde", _frozen(b))

    @property
    def n(self):
        return self.a.dims[0]

    @property
    def m(self):
        return self.b_tilde.shape[1]

    @property
    def r(self):
        return self.c.dims[0]

    def lags(self):
        return sorted(set(self.a.lags()) | set(self.c.lags()))


@dataclass(frozen=True)
class QuadForm:
    """Quadratic constraint form ``G(sigma, xi)``.

    ``G(s, x) = s'Gs s + 2 x'Gsx s + x'Gx x`` with `g_sigma` (r x r),
    `g_cross` (m x r) and `g_xi` (m x m).  Symmetric blocks are symmetrised
    on construction.
    """

    g_sigma: np.ndarray
    g_cross: np.ndarray
    g_xi: np.ndarray

    def __post_init__(self):
        gs = np.atleast_2d(np.asarray(self.g_sigma, dtype=float))
        gc = np.atleast_2d(np.asarray(self.g_cross, dtype=float))
        gx = np.atleast_2d(np.asarray(self.g_xi, dtype=float))
        r, m = gs.shape[0], gx.shape[0]
        if gs.shape != (r, r) or gx.shape != (m, m) or gc.shape != (m, r):
            raise ConfigError("inconsistent quadratic form blocks")
        object.__setattr__(self, "g_sigma", _frozen(0.5 * (gs + gs.T)))
        object.__setattr__(self, "g_cross", _frozen(gc))
        object.__setattr__(self, "g_xi", _frozen(0.5 * (gx + gx.T)))

    @property
    def r(self):
        return self.g_sigma.shape[0]

    @property
    def m(self):
        return self.g_xi.shape[0]

    def evaluate(self, sigma, xi):
        s = np.atleast_1d(np.asarray(sigma, dtype=float))
        x = np.atleast_1d(np.asarray(xi, dtype=float))
        return float(s @ self.g_sigma @ s + 2.0 * x @ self.g_cross @ s + x @ self.g_xi @ x)


def sector_form(k1, k2):
    """Form of ``(xi - k1 sigma)(k2 sigma - xi)`` for a scalar sector [k1, k2]."""
    if k1 > k2:
        raise ConfigError(f"sector requires k1 <= k2, got ({k1}, {k2})")
    return QuadForm([[-k1 * k2]], [[0.5 * (k1 + k2)]], [[-1.0]])


def lipschitz_form(lam, r=1, m=1):
    """Form of ``lam^2 |sigma|^2 - |xi|^2``."""
    if not lam > 0:
        raise ConfigError("Lipschitz constant must be positive")
    return QuadForm(lam * lam * np.eye(r), np.zeros((m, r)), -np.eye(m))


def _goodwin(sigma):
    return 1.0 / (1.0 + np.abs(sigma) ** 3)


@dataclass(frozen=True)
class Nonlinearity:
    """Static nonlinearity ``F(sigma)`` with declared sector/Lipschitz data.

    kind is one of ``'goodwin'`` (params: ``rho``, evaluates
    ``1/(1+|s|^3) + rho*s``), ``'linear'`` (params: ``gain`` m x r matrix) or
    ``'expression'`` (params: ``expr`` text in the variable ``sigma``).
    ``lipschitz`` is ``(lam, incremental)``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    sector: tuple | None = None
    lipschitz: tuple | None = None
    time_dependent: bool = False

    def __post_init__(self):
        if self.kind not in ("goodwin", "linear", "expression"):
            raise ConfigError(f"unknown nonlinearity kind {self.kind!r}")
        if self.sector is not None:
            k1, k2 = (float(v) for v in self.sector)
            if k1 > k2:
                raise ConfigError("sector requires k1 <= k2")
            object.__setattr__(self, "sector", (k1, k2))
        if self.lipschitz is not None:
            lam, incremental = self.lipschitz
            if not float(lam) > 0:
                raise ConfigError("Lipschitz constant must be positive")
            object.__setattr__(self, "lipschitz", (float(lam), bool(incremental)))
        if self.time_dependent:
            raise ConfigError("time-dependent nonlinearities are not supported")
        tree = None
        if self.kind == "expression":
            tree = _expr.parse_expression(self.params["expr"])
        elif self.kind == "linear":
            gain = np.atleast_2d(np.asarray(self.params["gain"], dtype=float))
            object.__setattr__(self, "params", {**self.params, "gain": gain})
        object.__setattr__(self, "_tree", tree)

    @classmethod
    def goodwin(cls, rho=0.0):
        return cls("goodwin", {"rho": float(rho)},
                   sector=(-GOODWIN_SLOPE + rho, rho),
                   lipschitz=(GOODWIN_SLOPE + rho, True))

    @property
    def dims(self):
        """(m, r): output and input dimension."""
        if self.kind == "linear":
            return self.params["gain"].shape
        return (1, 1)

    def __call__(self, sigma):
        """Evaluate on ``sigma`` of shape ``(..., r)``; returns ``(..., m)``."""
        sigma = np.asarray(sigma, dtype=float)
        if self.kind == "linear":
            return sigma @ self.params["gain"].T
        if self.kind == "goodwin":
            return _goodwin(sigma) + self.params.get("rho", 0.0) * sigma
        return np.asarray(_expr.evaluate(self._tree, sigma=sigma), dtype=float) + 0.0 * sigma
