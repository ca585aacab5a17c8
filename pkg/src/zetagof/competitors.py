"""Competing goodness-of-fit statistics for the Zeta family.

Each takes the sample and a plug-in estimate ``s_hat`` so that a bootstrap
can refit the parameter once per resample and share it across statistics.
"""
from __future__ import annotations

import functools
import math

import numpy as np
from scipy import integrate
from scipy import special as sps

from ._backend import kernels
from .distributions import as_sample, tally
from .errors import ConvergenceError, DomainError
from .special import zeta_triple, zeta_values

__all__ = [
    "cvm_henze",
    "ksd_yang",
    "ksd_kernel",
    "meintanis",
    "ben_statistic",
    "ben_profile",
]

KSD_BANDWIDTH = 1.0
LAGUERRE_NODES = 64
MEINTANIS_TOL = 1e-9


def _check(s_hat):
    if not s_hat > 1:
        raise DomainError("s_hat must exceed 1")


def cvm_henze(sample, s_hat):
    """Cramer-von Mises distance weighted by the empirical pmf.

    ``n * sum_k (F_n(k) - F(k; s_hat))**2 * (F_n(k) - F_n(k-1))``; only the
    observed atoms contribute.
    """
    _check(s_hat)
    x = as_sample(sample)
    vals, counts = tally(x)
    return _cvm_tallied(vals, counts, x.size, s_hat)


def _cvm_tallied(vals, counts, n, s_hat):
    ecdf = np.cumsum(counts) / n
    z0 = zeta_triple(s_hat)[0]
    model_cdf = 1.0 - sps.zeta(s_hat, vals + 1.0) / z0
    return float(np.sum((ecdf - model_cdf) ** 2 * counts))


def ksd_kernel(x, y, s_hat, top, bandwidth=KSD_BANDWIDTH):
    """Stein kernel ``kappa(x, y)`` on the cyclic support ``{1..top}``."""
    x = float(x)
    y = float(y)

    def score(v):
        nxt = v + 1.0 if v < top else 1.0
        return 1.0 - (v / nxt) ** s_hat

    def prev(v):
        return v - 1.0 if v > 1.0 else float(top)

    def k(a, b):
        return math.exp(-((a - b) ** 2) / (2.0 * bandwidth**2))

    sx, sy = score(x), score(y)
    rx, ry = prev(x), prev(y)
    return (
        sx * k(x, y) * sy
        - sx * (k(x, y) - k(x, ry))
        - (k(x, y) - k(rx, y)) * sy
        + (k(x, y) - k(rx, y) - k(x, ry) + k(rx, ry))
    )


def ksd_yang(sample, s_hat, bandwidth=KSD_BANDWIDTH):
    """Kernel Stein discrepancy U-statistic with plugged-in ``s_hat``.

    The support is taken as ``{1..max(X)}`` with wrap-around neighbours.  Can
    be negative in finite samples.
    """
    _check(s_hat)
    x = as_sample(sample)
    if x.size < 2:
        raise DomainError("the KSD U-statistic needs n >= 2")
    vals, counts = tally(x)
    return _ksd_tallied(vals, counts, x.size, s_hat, bandwidth)


def _ksd_tallied(vals, counts, n, s_hat, bandwidth=KSD_BANDWIDTH):
    total = kernels.ksd_pair_sum(
        vals.astype(float), counts.astype(float), float(s_hat), float(vals[-1]), bandwidth
    )
    return total / (n * (n - 1.0))


@functools.lru_cache(maxsize=8)
def _laguerre(nodes):
    u, w = sps.roots_laguerre(nodes)
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def _meintanis_integrand(t, vals, weights, s_hat, z0):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    mellin = weights @ np.exp(-np.outer(np.log(vals), t))
    return (z0 * mellin - zeta_values(s_hat + t)) ** 2


def _meintanis_tallied(vals, counts, n, s_hat, beta, nodes=LAGUERRE_NODES):
    vals = vals.astype(float)
    weights = counts / n
    z0 = zeta_triple(s_hat)[0]

    def laguerre(m):
        u, w = _laguerre(m)
        return float(np.sum(w * _meintanis_integrand(u / beta, vals, weights, s_hat, z0))) / beta

    coarse = laguerre(nodes)
    fine = laguerre(2 * nodes)
    if abs(fine - coarse) <= MEINTANIS_TOL:
        return n * fine
    val, err = integrate.quad(
        lambda t: float(_meintanis_integrand(t, vals, weights, s_hat, z0)[0]) * math.exp(-beta * t),
        0.0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200,
    )
    if not err <= max(1e-9, 1e-8 * abs(val)):
        raise ConvergenceError(f"Mellin integral error estimate {err:.2g} too large")
    return n * val


def meintanis(sample, s_hat, beta, nodes=LAGUERRE_NODES):
    """Weighted L2 distance between empirical and model Mellin transforms.

    ``n * int_0^inf (zeta(s_hat) M_n(t) - zeta(s_hat + t))**2 exp(-beta t) dt``
    with ``M_n(t) = mean(X**-t)``.  Gauss-Laguerre in ``u = beta t``; falls
    back to adaptive quadrature when doubling the node count moves the value
    by more than ``1e-9``.
    """
    _check(s_hat)
    if not beta > 0:
        raise DomainError("Mellin weight exponent must be positive")
    x = as_sample(sample)
    vals, counts = tally(x)
    return _meintanis_tallied(vals, counts, x.size, s_hat, float(beta), nodes)


def ben_profile(sample, s_hat):
    """``e_n(k; s_hat)`` and the empirical pmf ``rho_n(k)`` for ``k = 1..max(X)``."""
    x = as_sample(sample)
    top = int(x.max())
    w = -np.expm1(-s_hat * np.log1p(1.0 / x))
    k = np.arange(1, top + 1)
    order = np.sort(x)
    wsorted = w[np.argsort(x, kind="stable")]
    # suffix sums over the sorted sample
    suffix = np.concatenate([np.cumsum(wsorted[::-1])[::-1], [0.0]])
    first = np.searchsorted(order, k, side="left")
    e = suffix[first] / x.size
    rho = np.bincount(x, minlength=top + 1)[1:] / x.size
    return e, rho


def ben_statistic(sample, s_hat):
    """Squared L2 distance between ``e_n(.; s_hat)`` and the empirical pmf."""
    x = as_sample(sample)
    vals, counts = tally(x)
    return _ben_tallied(vals, counts, x.size, s_hat)


def _ben_tallied(vals, counts, n, s_hat):
    v = vals.astype(float)
    w = -np.expm1(-s_hat * np.log1p(1.0 / v))
    tail = np.cumsum((counts * w)[::-1])[::-1] / n
    gaps = np.diff(np.concatenate([[0.0], v])) - 1.0
    return float(np.sum(gaps * tail**2 + (tail - counts / n) ** 2))
