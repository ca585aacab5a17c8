"""Birth-death Stein operator and the weighted L2 statistic built on it.

With test functions ``f_t(x) = t**x`` the generator of the birth-death chain
with rates ``lambda_k = 1`` and ``mu_k = (k/(k-1))**s`` (``mu_1 = 0``) maps
``f_t`` to

    h_s(x, t) = (1 - t) * t**(x-1) * (mu_x - t),

which covers the ``x = 1`` case ``-t(1-t)`` as well.  Writing
``mu_x - t = d_x + (1 - t)`` with ``d_x = mu_x - 1`` turns each pair term of
``T = n**-1 sum_{j,k} int h(X_j,t) h(X_k,t) (1-t)**beta dt`` into a sum of
three Beta functions with nonnegative coefficients for ``x, y >= 2``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from ._backend import kernels
from .distributions import as_sample, tally
from .errors import ConvergenceError, DomainError

__all__ = [
    "WeightBeta",
    "SteinStatistic",
    "birth_rate",
    "death_rate",
    "stein_operator_apply",
    "h",
    "g",
    "empirical_process",
    "stein_values",
    "statistic_closed_form",
    "statistic_quadrature",
    "gauss_jacobi",
    "population_discrepancy",
    "BETA_GRID",
]

BETA_GRID = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
MAX_QUAD_NODES = 4096


@dataclass(frozen=True)
class WeightBeta:
    """Exponent of the weight ``w(t) = (1 - t)**beta``."""

    beta: float = 0.0

    def __post_init__(self):
        if not self.beta >= 0:
            raise DomainError("weight exponent beta must be >= 0")

    def __float__(self):
        return float(self.beta)


def _beta_value(beta):
    b = float(beta.beta if isinstance(beta, WeightBeta) else beta)
    if not b >= 0:
        raise DomainError("weight exponent beta must be >= 0")
    return b


@dataclass(frozen=True)
class SteinStatistic:
    value: float
    beta: float
    s_used: float
    n: int


def birth_rate(k):
    return 1.0


def _log_ratio(x):
    """``log(x / (x-1))`` for ``x >= 2`` (``log 2`` placeholder at ``x = 1``)."""
    return np.log1p(1.0 / np.where(x >= 2, x - 1.0, 1.0))


def death_rate(k, s):
    """``mu_k = (k/(k-1))**s`` for ``k >= 2`` and ``mu_1 = 0``."""
    k = np.asarray(k, dtype=float)
    mu = np.where(k >= 2, np.exp(s * _log_ratio(k)), 0.0)
    return float(mu) if mu.ndim == 0 else mu


def _delta(x, s):
    """``mu_x - 1`` computed without cancellation; ``-1`` at ``x = 1``."""
    x = np.asarray(x, dtype=float)
    return np.where(x >= 2, np.expm1(s * _log_ratio(x)), -1.0)


def stein_operator_apply(f, s, k):
    """Generator ``L_s f(k)`` of the birth-death chain."""
    if k < 1:
        raise DomainError("k must be a positive integer")
    up = f(k + 1) - f(k)
    if k == 1:
        return up
    return up + (k / (k - 1.0)) ** s * (f(k - 1) - f(k))


def h(s, x, t):
    """``L_s f_t(x)`` for ``f_t(x) = t**x``; broadcasts over ``x`` and ``t``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise DomainError("t must lie in [0, 1]")
    out = (1.0 - t) * t ** (x - 1.0) * (death_rate(x, s) - t)
    return float(out) if out.ndim == 0 else out


def g(s, x, t):
    """Derivative of :func:`h` with respect to ``s``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.where(x >= 2, (1.0 - t) * t ** (x - 1.0) * death_rate(x, s) * _log_ratio(x), 0.0)
    out = out * np.ones_like(t)
    return float(out) if out.ndim == 0 else out


def empirical_process(sample, s, t):
    """``Z_n(t; s) = n**-1/2 sum_i h_s(X_i, t)``; ``t`` may be an array."""
    x = as_sample(sample)
    vals, counts = tally(x)
    t = np.asarray(t, dtype=float)
    hv = h(s, vals[:, None], np.atleast_1d(t)[None, :])
    out = (counts @ hv) / math.sqrt(x.size)
    return float(out[0]) if t.ndim == 0 else out


def stein_values(vals, counts, n, s_hat, betas=BETA_GRID):
    """Closed-form ``T_{n,beta}`` for a tallied sample, one value per beta."""
    deltas = _delta(vals, s_hat)
    sums = kernels.stein_pair_sums(
        np.asarray(vals, dtype=float), np.asarray(counts, dtype=float),
        deltas, np.asarray(betas, dtype=float),
    )
    return np.maximum(sums / n, 0.0)


def statistic_closed_form(sample, s_hat, beta=WeightBeta()):
    """Integration-free evaluation of ``T_{n,beta}``.

    Parameters
    ----------
    sample : array_like of int
        Observations, all ``>= 1``.
    s_hat : float
        Plug-in shape parameter (usually the MLE).
    beta : WeightBeta or float
        Weight exponent.
    """
    if not s_hat > 1:
        raise DomainError("s_hat must exceed 1")
    b = _beta_value(beta)
    x = as_sample(sample)
    vals, counts = tally(x)
    val = float(stein_values(vals, counts, x.size, s_hat, (b,))[0])
    return SteinStatistic(val, b, float(s_hat), int(x.size))


@functools.lru_cache(maxsize=64)
def _gauss_jacobi_cached(n, beta):
    x, w = roots_jacobi(n, beta, 0.0)
    t = 0.5 * (1.0 + x)
    w = w * 0.5 ** (beta + 1.0)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_jacobi(n, beta):
    """Nodes and weights for ``int_0^1 f(t) (1-t)**beta dt``."""
    if n < 1:
        raise DomainError("need at least one node")
    return _gauss_jacobi_cached(int(n), float(beta))


def statistic_quadrature(sample, s_hat, beta=WeightBeta(), nodes=None):
    """``T_n = int_0^1 Z_n(t; s_hat)**2 (1-t)**beta dt`` by Gauss-Jacobi.

    The integrand is a polynomial of degree ``2 max(X) + 2`` times the weight,
    so ``max(X) + 2`` nodes integrate it exactly.  By default that count is
    rounded up to a power of two (so cached rules are reused) and clipped
    to ``[64, 4096]``; beyond the cap only terms of size ``O(max(X)**-3)``
    are affected.
    """
    b = _beta_value(beta)
    x = as_sample(sample)
    if nodes is None:
        need = int(x.max()) + 2
        nodes = int(min(max(64, 1 << (need - 1).bit_length()), MAX_QUAD_NODES))
    if nodes < 32:
        raise DomainError("use at least 32 quadrature nodes")
    t, w = gauss_jacobi(nodes, b)
    z = empirical_process(x, s_hat, t)
    return SteinStatistic(float(np.sum(w * z * z)), b, float(s_hat), int(x.size))


def _expected_h(spec, s0, t, tol=1e-12, max_cut=1 << 24):
    """``E h_{s0}(X, t)`` at each node ``t`` under ``spec``, with a tail bound."""
    t = np.asarray(t, dtype=float)
    bound_const = 2.0**s0 + 1.0
    cut = 1024
    if not math.isinf(spec.upper):
        cut = int(spec.upper)
    while True:
        tail = spec.sf(cut) if cut < spec.upper else 0.0
        err = np.max((1.0 - t) * t**cut) * bound_const * tail
        if err < tol or cut >= spec.upper:
            break
        if cut >= max_cut:
            raise ConvergenceError(f"tail of E h above {tol:g} after {max_cut} terms")
        cut *= 2
    acc = np.zeros_like(t)
    chunk = 1 << 15
    for start in range(1, cut + 1, chunk):
        k = np.arange(start, min(start + chunk, cut + 1), dtype=float)
        p = spec.pmf(k)
        acc += h(s0, k[:, None], t[None, :]).T @ p
    return acc


def population_discrepancy(spec, s0, beta=WeightBeta(), nodes=128):
    """``int_0^1 (E h_{s0}(X, t))**2 (1-t)**beta dt`` for ``X ~ spec``.

    Zero exactly when ``spec`` is Zeta(s0); the almost-sure limit of
    ``T_n / n`` when ``s0`` is the KL projection of ``spec``.
    """
    if not s0 > 1:
        raise DomainError("s0 must exceed 1")
    b = _beta_value(beta)
    t, w = gauss_jacobi(nodes, b)
    eh = _expected_h(spec, s0, t)
    return float(np.sum(w * eh * eh))
