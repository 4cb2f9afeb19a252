"""Small-delay inertial manifolds for ``x' = F(C x_t)`` in R^n.

Three sufficient conditions on the delay are compared, each of the form
``tau < threshold / Lambda`` where ``Lambda`` is the Euclidean Lipschitz
constant of F and r is the number of delayed measurements:

* the frequency-domain bound ``1 / (e sqrt(r) sqrt(1 + e^-2 / r))``,
  obtained from the Smith condition for the shifted plant below;
* the Ryabov-Driver bound ``1 / (e sqrt(r))``;
* Chicone's smoothness bound ``1 / (2 sqrt(r e))``.

Only the first comes with an explicit exponent ``nu = 1 / tau`` and the
manifold dimension ``n``; it governs the overall verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DelayMeasure, DelaySystem
from .errors import ConfigError

__all__ = ["SmallDelayReport", "small_delay_certificate", "small_delay_spectral_bound",
           "threshold_frequency", "threshold_ryabov_driver", "threshold_chicone",
           "shifted_plant"]


def threshold_frequency(r):
    return 1.0 / (math.e * math.sqrt(r) * math.sqrt(1.0 + math.exp(-2.0) / r))


def threshold_ryabov_driver(r):
    return 1.0 / (math.sqrt(r) * math.e)


def threshold_chicone(r):
    return 1.0 / (2.0 * math.sqrt(r) * math.sqrt(math.e))


@dataclass(frozen=True)
class SmallDelayReport:
    n: int
    r: int
    lam: float
    tau: float
    threshold_frequency: float
    threshold_rd: float
    threshold_chicone: float
    verdict_frequency: bool
    verdict_rd: bool
    verdict_chicone: bool
    nu: float | None
    dimension: int | None

    @property
    def certified(self):
        return self.verdict_frequency

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def small_delay_certificate(n, r, lam, tau):
    """Evaluate all three small-delay thresholds at ``(n, r, Lambda, tau)``.

    Thresholds are bounds on ``tau``; they already include the ``1/Lambda``
    factor.
    """
    if not (int(n) == n and n >= 1 and int(r) == r and r >= 1):
        raise ConfigError("n and r must be positive integers")
    if not (lam > 0 and tau > 0):
        raise ConfigError("Lambda and tau must be positive")
    n, r = int(n), int(r)
    tp = threshold_frequency(r) / lam
    trd = threshold_ryabov_driver(r) / lam
    tch = threshold_chicone(r) / lam
    ok = tau < tp
    return SmallDelayReport(n, r, float(lam), float(tau), tp, trd, tch, ok, tau < trd,
                            tau < tch, 1.0 / tau if ok else None, n if ok else None)


def small_delay_spectral_bound(r, nu, a_shift, tau, omega=None):
    """``sqrt(r exp(2 tau nu) + 1) / (a + nu)``, a bound on ``|W(-nu + i omega)|_2``.

    The bound does not depend on `omega`; the argument is accepted for
    symmetry with pointwise evaluations.
    """
    if not a_shift + nu > 0:
        raise ConfigError("need a_shift + nu > 0")
    return math.sqrt(r * math.exp(2.0 * tau * nu) + 1.0) / (a_shift + nu)


def shifted_plant(n, a_shift, delays, components=None, tau=None):
    """Shifted plant ``x' = a x + (F - a x)`` as a `DelaySystem`.

    ``A phi = a phi(0)``, ``B = I`` and the output stacks the measurements
    ``phi_{j_k}(-delays[k])`` (k = 1..r) on top of ``phi(0)``.
    `components` holds the 0-based indices ``j_k`` (default: ``k mod n``).
    """
    delays = [float(d) for d in delays]
    r = len(delays)
    if r < 1 or any(d < 0 for d in delays):
        raise ConfigError("need at least one non-negative delay")
    if components is None:
        components = [k % n for k in range(r)]
    tau = float(tau if tau is not None else max(max(delays), 1e-300))
    a = DelayMeasure.atom(0.0, a_shift * np.eye(n))
    c = DelayMeasure.zero(r + n, n)
    for k, (d, j) in enumerate(zip(delays, components)):
        row = np.zeros((r + n, n))
        row[k, j] = 1.0
        c = c + DelayMeasure.atom(-d, row)
    tail = np.zeros((r + n, n))
    tail[r:, :] = np.eye(n)
    c = c + DelayMeasure.atom(0.0, tail)
    return DelaySystem(tau, a, np.eye(n), c)
