"""Riemann zeta function and its first two derivatives on ``s > 1``.

The zeta series is summed directly up to a cut ``K`` and the remainder is
handled by an Euler-Maclaurin expansion.  Since every term of the tail
expansion has the form ``c(s) * K**(-s - r)``, derivatives with respect to
``s`` are obtained analytically instead of by differencing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sps

from ._backend import kernels
from ._constants import EM_COEF, EM_TERMS
from .errors import ConvergenceError, DomainError

__all__ = [
    "PrecisionPolicy",
    "DEFAULT_POLICY",
    "zeta_derivative",
    "zeta_array",
    "zeta_triple",
    "log_beta",
    "beta",
    "zeta_tail",
    "zeta_values",
]

_EM_COEF = np.array(EM_COEF)
_EM_TERMS = EM_TERMS


@dataclass(frozen=True)
class PrecisionPolicy:
    abs_tol: float = 1e-12
    max_terms: int = 1 << 20

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if self.max_terms < 100:
            raise DomainError("max_terms must be at least 100")


DEFAULT_POLICY = PrecisionPolicy()


def _em_tail(s, cut):
    """Euler-Maclaurin tail sum_{k >= cut} k**-s and its two s-derivatives.

    Returns ``(tail0, tail1, tail2, bound)`` where ``bound`` is the magnitude
    of the first omitted correction, taken over all three orders.
    """
    L = math.log(cut)
    E = np.exp(-s * L)
    u = s - 1.0
    t0 = cut * E / u + 0.5 * E
    t1 = cut * E * (-L / u - 1.0 / u**2) - 0.5 * L * E
    t2 = cut * E * (L * L / u + 2.0 * L / u**2 + 2.0 / u**3) + 0.5 * L * L * E

    # rising factorial P(s) = s (s+1) ... (s+r-1) with its s-derivatives
    P = np.ones_like(s)
    dP = np.zeros_like(s)
    d2P = np.zeros_like(s)
    r = 0
    bound = None
    for j in range(1, _EM_TERMS + 2):
        while r < 2 * j - 1:
            d2P = d2P * (s + r) + 2.0 * dP
            dP = dP * (s + r) + P
            P = P * (s + r)
            r += 1
        scale = _EM_COEF[j - 1] * cut ** (1.0 - 2 * j) * E
        c0 = scale * P
        c1 = scale * (dP - L * P)
        c2 = scale * (d2P - 2.0 * L * dP + L * L * P)
        if j == _EM_TERMS + 1:
            bound = np.maximum(np.abs(c0), np.maximum(np.abs(c1), np.abs(c2)))
            break
        t0 = t0 + c0
        t1 = t1 + c1
        t2 = t2 + c2
    return t0, t1, t2, bound


def _zeta_all(s, policy):
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 1.0)):
        raise DomainError("zeta series diverges for s <= 1")
    cut = 16
    while True:
        k = np.arange(1, cut, dtype=float)
        logk = np.log(k)
        pw = np.exp(-np.multiply.outer(s, logk))
        z0 = pw.sum(axis=-1)
        z1 = -(pw * logk).sum(axis=-1)
        z2 = (pw * logk * logk).sum(axis=-1)
        t0, t1, t2, bound = _em_tail(s, cut)
        if np.all(bound < policy.abs_tol):
            return z0 + t0, z1 + t1, z2 + t2
        cut *= 2
        if cut > policy.max_terms:
            raise ConvergenceError(
                f"zeta tail bound {float(np.max(bound)):.3g} above tolerance "
                f"after {policy.max_terms} terms"
            )


def zeta_array(s, order=0, policy=DEFAULT_POLICY):
    """Vectorised ``zeta^(order)(s)`` for an array of arguments ``s > 1``."""
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1 or 2")
    return _zeta_all(s, policy)[order]


def zeta_triple(s, policy=DEFAULT_POLICY):
    """Return ``(zeta(s), zeta'(s), zeta''(s))`` as Python floats."""
    s = float(s)
    if not s > 1.0:
        raise DomainError("zeta series diverges for s <= 1")
    z0, z1, z2, bound = kernels.zeta3(s, policy.abs_tol, policy.max_terms)
    if not bound < policy.abs_tol:
        raise ConvergenceError(
            f"zeta tail bound {bound:.3g} above tolerance after {policy.max_terms} terms"
        )
    return z0, z1, z2


def zeta_derivative(s, order=0, policy=DEFAULT_POLICY):
    """Evaluate ``sum_k (-log k)**order * k**(-s)``.

    Parameters
    ----------
    s : float
        Argument, must exceed 1.
    order : {0, 1, 2}
        Order of the derivative with respect to ``s``.
    policy : PrecisionPolicy
        Absolute tolerance and the cap on the direct-summation length.

    Raises
    ------
    DomainError
        If ``s <= 1``.
    ConvergenceError
        If the tail bound cannot be pushed below ``abs_tol``.
    """
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1 or 2")
    return zeta_triple(s, policy)[order]


def log_beta(a, b):
    """``log B(a, b)`` for positive ``a`` and ``b`` (array friendly)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("Beta function needs positive arguments")
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    # log Gamma(lo) - log poch(hi, lo) avoids the cancellation betaln shows
    # once hi is large; betaln is kept where poch over- or underflows
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = sps.gammaln(lo) - np.log(sps.poch(hi, lo))
    bad = ~np.isfinite(out)
    if np.any(bad):
        out = np.where(bad, sps.betaln(a, b), out)
    return float(out) if out.ndim == 0 else out


def beta(a, b):
    return np.exp(log_beta(a, b))


def zeta_tail(s, cut):
    """``sum_{k > cut} k**(-s)`` (Hurwitz zeta at ``cut + 1``)."""
    if not s > 1.0:
        raise DomainError("zeta series diverges for s <= 1")
    return float(sps.zeta(s, cut + 1.0))


def zeta_values(s):
    """``zeta(s)`` elementwise for an array of arguments, via the scalar kernel."""
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 1.0)):
        raise DomainError("zeta series diverges for s <= 1")
    tol = DEFAULT_POLICY.abs_tol
    out = np.array([kernels.zeta3(v, tol, DEFAULT_POLICY.max_terms)[0] for v in s.ravel()])
    return out.reshape(s.shape)
