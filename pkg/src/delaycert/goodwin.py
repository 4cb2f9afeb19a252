"""The Goodwin delay chain: builders, root-free bounds and the (tau, lambda) scan.

The plant is the coupled chain

    x1' = -lam x1 - rho x3(t - tau) + g_rho(x3(t - tau))
    x2' = -lam x2 + x1
    x3' = -lam x3 + x2

with ``g_rho(s) = 1/(1 + |s|^3) + rho s``.  Its characteristic equation is
``(lam + p)^3 + rho exp(-tau p) = 0`` and its transfer function is
``-1 / ((lam + p)^3 exp(tau p) + rho)``.  Pass ``coupled=False`` to
`build_goodwin` for the chain without the x1 -> x2 -> x3 couplings.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import GOODWIN_SLOPE, DelayMeasure, DelaySystem, Nonlinearity, sector_form
from .errors import DelayCertError
from .freqcheck import MARGIN_ATOL, circle_check, verify_frequency_condition
from .spectrum import count_roots_right_of

__all__ = [
    "GoodwinPoint", "build_goodwin", "solve_theta", "rho_cap", "goodwin_fixed_point",
    "goodwin_certify", "region_scan", "write_region_csv", "read_region_csv",
    "DEFAULT_TAUS", "DEFAULT_LAMBDAS",
]

DEFAULT_TAUS = (0.05, 4.0, 41)
DEFAULT_LAMBDAS = (0.05, 1.0, 21)
REGION_COLUMNS = ("tau", "lambda", "certified", "rho_star", "margin", "reason")


@dataclass(frozen=True)
class GoodwinPoint:
    tau: float
    lam: float
    theta: float
    rho_cap: float
    fixed_point: tuple
    rho_star: float | None = None
    certificate: object = None
    margin: float | None = None
    reason: str = ""

    @property
    def certified(self):
        return self.rho_star is not None


def build_goodwin(tau, lam, rho=0.0, coupled=True):
    """Return ``(DelaySystem, Nonlinearity)`` for the rho-shifted Goodwin chain."""
    if not (tau > 0 and lam > 0 and rho >= 0):
        raise ValueError("need tau > 0, lam > 0, rho >= 0")
    link = 1.0 if coupled else 0.0
    a0 = np.array([[-lam, 0.0, 0.0], [link, -lam, 0.0], [0.0, link, -lam]])
    a = DelayMeasure.atom(0.0, a0)
    if rho:
        shift = np.zeros((3, 3))
        shift[0, 2] = -rho
        a = a + DelayMeasure.atom(-tau, shift)
    b = np.array([[1.0], [0.0], [0.0]])
    c = DelayMeasure.atom(-tau, [[0.0, 0.0, 1.0]])
    return DelaySystem(tau, a, b, c), Nonlinearity.goodwin(rho)


def solve_theta(tau, lam, tol=1e-15):
    """Unique ``theta`` in (0, pi/3) with ``tau lam tan(theta) = pi - 3 theta``."""
    tl = tau * lam
    if not tl > 0:
        raise ValueError("tau * lam must be positive")
    lo, hi = 0.0, np.pi / 3.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tl * np.tan(mid) - (np.pi - 3.0 * mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def rho_cap(tau, lam):
    """``(lam sec theta)^3``: below it every root of the shifted chain is stable."""
    return (lam / np.cos(solve_theta(tau, lam))) ** 3


def goodwin_fixed_point(lam):
    """Stationary point of the coupled chain (``x1 = lam x2``, ``x2 = lam x3``)."""
    lam3 = lam ** 3
    lo, hi = 0.0, 1.0 / lam3  # lam^3 x (1 + x^3) - 1 is increasing, >= 0 at 1/lam^3
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lam3 * mid * (1.0 + mid ** 3) - 1.0 > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-16 * hi:
            break
    x3 = 0.5 * (lo + hi)
    return (lam * lam * x3, lam * x3, x3)


def _rho_grid(tau, lam, size):
    top = min(GOODWIN_SLOPE, rho_cap(tau, lam)) * (1.0 - 1e-6)
    return np.linspace(0.0, top, size)


def goodwin_certify(tau, lam, rho_grid_size=64, nodes=2048, rank_candidates=2):
    """Search a rho grid for a circle-criterion certificate at ``nu = 0``.

    Every grid rho is swept; rho values are then tried in order of
    decreasing margin, and the first one whose full check (root count
    included) certifies becomes ``rho_star``.  The ranking sweep refines
    only its `rank_candidates` best peaks: a coarser sup never exceeds the
    true one, so no certifiable rho is dropped, and the winner is re-swept
    in full.
    """
    theta = solve_theta(tau, lam)
    cap = rho_cap(tau, lam)
    fixed = goodwin_fixed_point(lam)
    margins = []
    for rho in _rho_grid(tau, lam, rho_grid_size):
        sys, _ = build_goodwin(tau, lam, rho)
        try:
            sw = verify_frequency_condition(
                sys, sector_form(rho - GOODWIN_SLOPE, rho), 0.0, nodes=nodes,
                candidates=rank_candidates)
            margins.append((-sw.sup, float(rho)))
        except DelayCertError:
            continue
    margins.sort(reverse=True)
    reason = "no rho passes the frequency sweep"
    best = margins[0][0] if margins else None
    for margin, rho in margins:
        if margin <= MARGIN_ATOL:
            break
        sys, _ = build_goodwin(tau, lam, rho)
        cert = circle_check(sys, rho - GOODWIN_SLOPE, rho, 0.0, mode="msc", nodes=nodes)
        if cert.certified and cert.j == 0:
            return GoodwinPoint(tau, lam, theta, cap, fixed, rho, cert, cert.delta)
        reason = cert.reason or f"j={cert.j}"
    return GoodwinPoint(tau, lam, theta, cap, fixed, None, None, best, reason)


def _scan_node(args):
    tau, lam, size, nodes = args
    try:
        return goodwin_certify(tau, lam, size, nodes)
    except DelayCertError as exc:  # per-node failure is data, not a crash
        return GoodwinPoint(tau, lam, float("nan"), float("nan"), (), None, None, None,
                            f"error: {exc}")


def region_scan(taus=None, lams=None, rho_grid_size=64, nodes=2048, workers=None):
    """Certify every ``(tau, lam)`` node; rows ordered by lambda, then tau.

    Returns a list of dicts with keys ``tau, lambda, certified, rho_star,
    margin, reason``.
    """
    taus = np.linspace(*DEFAULT_TAUS) if taus is None else np.asarray(taus, dtype=float)
    lams = np.linspace(*DEFAULT_LAMBDAS) if lams is None else np.asarray(lams, dtype=float)
    jobs = [(float(t), float(l), rho_grid_size, nodes) for l in lams for t in taus]
    workers = workers or os.cpu_count() or 1
    if workers == 1:
        points = [_scan_node(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_scan_node, jobs, chunksize=4))
    return [{
        "tau": pt.tau,
        "lambda": pt.lam,
        "certified": int(pt.certified),
        "rho_star": pt.rho_star if pt.certified else float("nan"),
        "margin": pt.margin if pt.margin is not None else float("nan"),
        "reason": "" if pt.certified else pt.reason,
    } for pt in points]


def write_region_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REGION_COLUMNS)
        for row in rows:
            writer.writerow([
                f"{row['tau']:.17g}", f"{row['lambda']:.17g}", row["certified"],
                f"{row['rho_star']:.17g}", f"{row['margin']:.17g}", row["reason"]])


def read_region_csv(path):
    with open(path, newline="") as fh:
        rows = []
        for rec in csv.DictReader(fh):
            rows.append({
                "tau": float(rec["tau"]), "lambda": float(rec["lambda"]),
                "certified": int(rec["certified"]), "rho_star": float(rec["rho_star"]),
                "margin": float(rec["margin"]), "reason": rec["reason"]})
        return rows
