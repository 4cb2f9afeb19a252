"""Frequency-domain inequality checks along a vertical line ``p = -nu + i omega``.

The condition verified everywhere in this module is

    sup_omega lambda_max(H(omega)) < 0,
    H(omega) = W^H Gs W - (Gsx W + (Gsx W)^H) + Gx,  W = W(-nu + i omega),

so that ``xi^H H xi = G(-W xi, xi)``.  The frequency axis is cut at a finite
``omega_cap`` beyond which a Neumann-series bound on the resolvent caps
``lambda_max`` analytically; ``[0, omega_cap]`` is swept numerically (real
data makes ``lambda_max`` even in omega).
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import lipschitz_form, sector_form, total_variation
from .errors import ConfigError, DelayCertError, RootOnLine, SingularAtP, TailBoundError, TailUnbounded
from .spectrum import count_roots_right_of
from .transfer import spectral_norm, transfer_many

__all__ = [
    "Certificate", "SweepResult", "hermitian_form_at", "lambda_max", "tail_cap",
    "verify_frequency_condition", "check_form", "smith_check", "circle_check", "certify",
    "MARGIN_ATOL",
]

MARGIN_ATOL = 1e-9
OMEGA_LIMIT = 1e9
CERTIFIED, REJECTED, INCONCLUSIVE = "Certified", "Rejected", "Inconclusive"


@dataclass(frozen=True)
class SweepResult:
    sup: float
    worst_omega: float
    omega_cap: float
    nodes: int
    depth: int
    tail_bound: float


@dataclass(frozen=True)
class Certificate:
    """Outcome of a frequency check.

    ``delta`` is ``-sup lambda_max`` over the swept band; it must exceed
    `MARGIN_ATOL` (and the tail bound must be negative) for a certificate.
    ``kind`` is ``'Stability'`` when no root lies right of the line and
    ``'InertialManifold'`` (of dimension ``j``) otherwise.
    """

    verdict: str
    nu: float
    j: int | None = None
    delta: float | None = None
    worst_omega: float | None = None
    sweep: dict = field(default_factory=dict)
    tail_bound_value: float | None = None
    kind: str | None = None
    check: str = "form"
    mode: str = "msc"
    gain_sup: float | None = None
    reason: str = ""

    @property
    def certified(self):
        return self.verdict == CERTIFIED

    def to_dict(self):
        return asdict(self)


def hermitian_form_at(form, w):
    """Hermitian matrix ``H`` with ``xi^H H xi = G(-W xi, xi)``.

    `w` is an ``r x m`` matrix or a stack of them.
    """
    w = np.asarray(w, dtype=complex)
    if w.ndim < 2:
        w = w.reshape(w.shape + (1, 1)) if w.ndim == 0 else w[..., None]
    if w.shape[-2:] != (form.r, form.m):
        raise ConfigError(f"W has shape {w.shape[-2:]}, form expects {(form.r, form.m)}")
    wh = np.conj(np.swapaxes(w, -1, -2))
    cross = form.g_cross @ w
    h = wh @ form.g_sigma @ w - (cross + np.conj(np.swapaxes(cross, -1, -2))) + form.g_xi
    return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))


def lambda_max(h):
    """Largest eigenvalue of a Hermitian matrix (or stack)."""
    h = np.asarray(h)
    if h.shape[-2:] == (1, 1):
        return np.real(h[..., 0, 0])
    return np.linalg.eigvalsh(h)[..., -1]


def _shift_factor(sys, nu):
    # sup of |exp(p theta)| over theta in [-tau, 0] on the line Re p = -nu
    return max(1.0, float(np.exp(nu * sys.tau)))


def tail_cap(sys, form, nu, omega_cap):
    """Upper bound of ``lambda_max(H(omega))`` for ``|omega| > omega_cap``.

    On the line, ``|p| >= |omega|`` and ``|alpha(p)|_2 <= f TV(a)`` with
    ``f = max(1, exp(nu tau))``, so ``|(alpha(p) - pI)^{-1}|_2 <=
    1/(omega_cap - f TV(a))`` and ``|W|_2 <= wbar = f TV(c) |B|_2 /
    (omega_cap - f TV(a))``.  Then
    ``lambda_max(H) <= |Gs| wbar^2 + 2 |Gsx| wbar + lambda_max(Gx)``.
    """
    f = _shift_factor(sys, nu)
    minimal = f * total_variation(sys.a)
    if not omega_cap > minimal:
        raise TailBoundError(omega_cap, minimal)
    wbar = f * total_variation(sys.c) * float(spectral_norm(sys.b_tilde)) / (omega_cap - minimal)
    return (float(spectral_norm(form.g_sigma)) * wbar ** 2
            + 2.0 * float(spectral_norm(form.g_cross)) * wbar
            + float(lambda_max(form.g_xi)))


def _lambda_curve(sys, form, nu, omegas, chunk=8192):
    out = np.empty(len(omegas))
    for start in range(0, len(omegas), chunk):
        om = omegas[start:start + chunk]
        w = transfer_many(sys, -nu + 1j * om)
        out[start:start + chunk] = lambda_max(hermitian_form_at(form, w))
    return out


def choose_omega_cap(sys, form, nu):
    """Smallest ``minimal * 2^k`` (k >= 1) whose tail bound is negative."""
    minimal = _shift_factor(sys, nu) * total_variation(sys.a)
    omega = 2.0 * minimal if minimal > 0 else 1.0
    while omega <= OMEGA_LIMIT:
        cap = tail_cap(sys, form, nu, omega)
        if cap < 0:
            return omega, cap
        omega *= 2.0
    raise TailUnbounded(f"tail bound stays non-negative up to omega = {OMEGA_LIMIT:g}")


def _refine(fun, brackets, omega_max, atol, max_depth=80, points=15):
    """Grid-zoom search on several brackets at once.

    Each level evaluates `points` equispaced points per active bracket and
    keeps the two cells around the best one, so the width shrinks by a
    factor ``(points - 1) / 2``.  A bracket retires after two consecutive
    levels improving its maximum by less than `atol`.
    """
    lo = np.array([b[0] for b in brackets], dtype=float)
    hi = np.array([b[1] for b in brackets], dtype=float)
    nb = len(brackets)
    best = np.full(nb, -np.inf)
    best_om = lo.copy()
    stalls = np.zeros(nb, dtype=int)
    active = np.ones(nb, dtype=bool)
    depth = 0
    while np.any(active) and depth < max_depth:
        depth += 1
        idx = np.flatnonzero(active)
        pts = lo[idx, None] + (hi - lo)[idx, None] * np.linspace(0.0, 1.0, points)[None, :]
        vals = fun(pts.ravel()).reshape(pts.shape)
        k = np.argmax(vals, axis=1)
        top = vals[np.arange(len(idx)), k]
        at = pts[np.arange(len(idx)), k]
        gain = top - best[idx]
        improved = top > best[idx]
        best[idx] = np.where(improved, top, best[idx])
        best_om[idx] = np.where(improved, at, best_om[idx])
        stalls[idx] = np.where(gain < atol, stalls[idx] + 1, 0)
        half = (hi[idx] - lo[idx]) / (points - 1)
        lo[idx] = np.maximum(0.0, at - half)
        hi[idx] = np.minimum(omega_max, at + half)
        done = (stalls[idx] >= 2) | (hi[idx] - lo[idx] <= 1e-15 * np.maximum(1.0, np.abs(at)))
        active[idx[done]] = False
    return best, best_om, depth


def verify_frequency_condition(sys, form, nu, nodes=2048, omega_cap=None, atol=1e-9,
                               candidates=8):
    """Sweep ``lambda_max(H(omega))`` and return a `SweepResult`.

    The uniform grid on ``[0, omega_cap]`` has at least `nodes` points and
    at least 16 points per period ``2 pi / tau`` of the delay exponentials.
    The `candidates` highest local maxima are refined by repeated
    trisection until two successive levels improve by less than `atol`.
    Raises `SingularAtP` if the line passes through a characteristic root.
    """
    if omega_cap is None:
        omega_cap, tail = choose_omega_cap(sys, form, nu)
    else:
        tail = tail_cap(sys, form, nu, omega_cap)
    per_period = int(np.ceil(16.0 * omega_cap * sys.tau / (2.0 * np.pi))) + 1
    count = max(int(nodes), per_period)
    grid = np.linspace(0.0, omega_cap, count)

    def fun(om):
        return _lambda_curve(sys, form, nu, om)

    vals = fun(grid)
    padded = np.concatenate(([-np.inf], vals, [-np.inf]))
    peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))
    peaks = peaks[np.argsort(vals[peaks])[::-1]][:candidates]
    k0 = int(np.argmax(vals))
    best, worst = float(vals[k0]), float(grid[k0])
    brackets = [(grid[max(i - 1, 0)], grid[min(i + 1, count - 1)]) for i in peaks]
    vals_ref, oms, depth = _refine(fun, brackets, omega_cap, atol)
    i = int(np.argmax(vals_ref))
    if vals_ref[i] > best:
        best, worst = float(vals_ref[i]), float(oms[i])
    return SweepResult(best, worst, float(omega_cap), count, depth, float(tail))


def _verdict(delta, tail):
    if delta > MARGIN_ATOL and tail < 0:
        return CERTIFIED
    if delta <= 0:
        return REJECTED
    return INCONCLUSIVE


def _kind(j):
    if j is None:
        return None
    return "Stability" if j == 0 else "InertialManifold"


def check_form(sys, form, nu, *, mode="msc", j=None, count_roots=True, check="form",
               nodes=2048, omega_cap=None):
    """Run the frequency condition for `form` and assemble a `Certificate`.

    ``j`` may be supplied to skip the root count; with ``count_roots=False``
    and no ``j`` the certificate carries ``j=None`` and only reflects the
    frequency inequality.
    """
    if j is None and count_roots:
        try:
            j = count_roots_right_of(sys, nu).j
        except RootOnLine as exc:
            return Certificate(INCONCLUSIVE, nu, check=check, mode=mode, reason=str(exc))
        except DelayCertError as exc:
            return Certificate(INCONCLUSIVE, nu, check=check, mode=mode, reason=str(exc))
    try:
        sw = verify_frequency_condition(sys, form, nu, nodes=nodes, omega_cap=omega_cap)
    except SingularAtP as exc:
        return Certificate(INCONCLUSIVE, nu, j=j, kind=_kind(j), check=check, mode=mode,
                           reason=str(exc))
    except TailUnbounded as exc:
        return Certificate(INCONCLUSIVE, nu, j=j, kind=_kind(j), check=check, mode=mode,
                           reason=str(exc))
    delta = -sw.sup
    verdict = _verdict(delta, sw.tail_bound)
    reason = ""
    if verdict == CERTIFIED and mode == "sc" and j:
        verdict, reason = INCONCLUSIVE, "sector condition (SC) certifies stability only (j = 0)"
    return Certificate(
        verdict, nu, j=j, delta=delta, worst_omega=sw.worst_omega,
        sweep={"omega_cap": sw.omega_cap, "nodes": sw.nodes, "depth": sw.depth},
        tail_bound_value=sw.tail_bound, kind=_kind(j), check=check, mode=mode, reason=reason)


def smith_check(sys, lam, nu, **kwargs):
    """Certify ``sup_omega |W(-nu + i omega)|_2 < 1/lam``.

    The certificate's ``gain_sup`` is the swept ``sup |W|_2``, recovered from
    ``lambda_max = lam^2 |W|_2^2 - 1``.
    """
    form = lipschitz_form(lam, sys.r, sys.m)
    cert = check_form(sys, form, nu, check="smith", **kwargs)
    if cert.delta is None:
        return cert
    gain = float(np.sqrt(max(1.0 - cert.delta, 0.0))) / lam
    return Certificate(**{**cert.to_dict(), "gain_sup": gain})


def circle_check(sys, k1, k2, nu, mode="msc", **kwargs):
    """Circle criterion ``Re[(1 + k1 W)^* (1 + k2 W)] > 0`` along the line.

    The margin ``delta`` equals ``inf_omega Re[...]`` over the swept band.
    """
    if (sys.r, sys.m) != (1, 1):
        raise ConfigError("circle criterion is defined for scalar plants only")
    if mode == "sc" and not k1 < 0 < k2:
        raise ConfigError("sector condition (SC) requires k1 < 0 < k2")
    return check_form(sys, sector_form(k1, k2), nu, mode=mode, check="circle", **kwargs)


def certify(sys, nonlinearity, nu, mode="msc", forcing=None, **kwargs):
    """Check every hypothesis of the quadratic-functional theorem.

    Uses the sector form when the nonlinearity declares a scalar sector and
    the Lipschitz form otherwise.  ``mode`` is ``'sc'`` (pointwise
    constraints, zero forcing) or ``'msc'`` (incremental constraints).
    """
    mode = mode.lower()
    if mode not in ("sc", "msc"):
        raise ConfigError(f"unknown mode {mode!r}")
    if mode == "sc" and forcing is not None:
        raise ConfigError("sector condition (SC) requires zero forcing")
    m, r = nonlinearity.dims
    if (sys.m, sys.r) != (m, r):
        raise ConfigError(f"nonlinearity is {m}x{r}, plant expects {sys.m}x{sys.r}")
    if nonlinearity.sector is not None and (r, m) == (1, 1):
        k1, k2 = nonlinearity.sector
        if mode == "sc":
            if np.any(np.abs(nonlinearity(np.zeros(r))) > 1e-12):
                raise ConfigError("sector condition (SC) needs F(0) = 0")
        elif k1 * k2 > 0:
            raise ConfigError("sector must satisfy k1 * k2 <= 0 so that F(v, 0) >= 0")
        return circle_check(sys, k1, k2, nu, mode=mode, **kwargs)
    if nonlinearity.lipschitz is not None:
        lam, incremental = nonlinearity.lipschitz
        if mode == "msc" and not incremental:
            raise ConfigError("monotone sector condition (MSC) needs an incremental Lipschitz bound")
        if mode == "sc" and incremental and np.any(np.abs(nonlinearity(np.zeros(r))) > 1e-12):
            raise ConfigError("incremental Lipschitz bound implies (L1) only when F(0) = 0")
        return smith_check(sys, lam, nu, mode=mode, **kwargs)
    raise ConfigError("nonlinearity declares neither a sector nor a Lipschitz constant")
