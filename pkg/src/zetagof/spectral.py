"""Covariance kernel of the limit null process and its eigenvalues.

The limit of ``T_n`` under the null is ``sum_j lambda_j N_j**2`` where the
``lambda_j`` are the eigenvalues of the integral operator with kernel
``C(u, v)`` on ``L2((1-t)**beta dt)``.  They are approximated by
Rayleigh-Ritz on orthonormal shifted Jacobi polynomials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import binom, eval_jacobi

from .distributions import RngStream
from .errors import ConvergenceError, DomainError, NumericError
from .estimation import fisher_information
from .special import zeta_triple
from .stein import WeightBeta, gauss_jacobi

__all__ = [
    "CovarianceKernel",
    "EigenResult",
    "a_function",
    "kernel_eval",
    "jacobi_basis",
    "jacobi_basis_explicit",
    "kernel_trace",
    "rayleigh_ritz",
    "limit_quantile",
]

_CHUNK = 1 << 14


def _beta_value(beta):
    b = float(beta.beta if isinstance(beta, WeightBeta) else beta)
    if not b >= 0:
        raise DomainError("weight exponent beta must be >= 0")
    return b


@dataclass(frozen=True)
class CovarianceKernel:
    """``C(u, v)`` for the null parameter ``s0`` and weight ``(1-t)**beta``."""

    s0: float
    beta: float = 0.0
    tol: float = 1e-13
    max_terms: int = 1 << 22

    def __post_init__(self):
        if not self.s0 > 1:
            raise DomainError("s0 must exceed 1")
        object.__setattr__(self, "beta", _beta_value(self.beta))

    @property
    def zeta0(self):
        return zeta_triple(self.s0)[0]

    def series_cut(self, points):
        """Truncation index making the neglected tail of the series < ``tol``.

        Terms are bounded by ``(1-u)(1-v) (uv)**(k-1) k**-s0 (2**s0 + 1)**2``;
        by Cauchy-Schwarz the diagonal ``u = v`` gives the worst case.
        """
        u = np.unique(np.clip(np.asarray(points, dtype=float).ravel(), 0.0, 1.0))
        u = u[u < 1.0]
        if u.size == 0:
            return 2
        c = (2.0**self.s0 + 1.0) ** 2 / self.zeta0
        cut = 64
        while True:
            geo = (1.0 - u) ** 2 * u ** (2.0 * cut) / (1.0 - u * u)
            flat = (1.0 - u) ** 2 / (self.s0 - 1.0) * cut
            bound = c * cut ** (-self.s0) * np.minimum(geo, flat)
            if np.max(bound) < self.tol:
                return cut
            if cut >= self.max_terms:
                raise ConvergenceError(f"kernel series needs more than {self.max_terms} terms")
            cut *= 2

    def a(self, t):
        return a_function(self.s0, t, self.tol, self.max_terms)

    def matrix(self, u, v):
        """``C(u_i, v_j)`` for node vectors ``u`` and ``v``."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        cut = self.series_cut(np.concatenate([u, v]))
        z = self.zeta0
        total = np.outer(u * (1.0 - u), v * (1.0 - v)) / z
        series = np.zeros((u.size, v.size))
        for start in range(2, cut + 1, _CHUNK):
            k = np.arange(start, min(start + _CHUNK, cut + 1), dtype=float)
            mu = np.exp(self.s0 * np.log1p(1.0 / (k - 1.0)))
            wk = k ** (-self.s0)
            fu = u[None, :] ** (k[:, None] - 1.0) * (mu[:, None] - u[None, :])
            fv = v[None, :] ** (k[:, None] - 1.0) * (mu[:, None] - v[None, :])
            series += (fu * wk[:, None]).T @ fv
        total += np.outer(1.0 - u, 1.0 - v) * series / z
        total -= np.outer(self.a(u), self.a(v)) / fisher_information(self.s0)
        return total


def a_function(s0, t, tol=1e-13, max_terms=1 << 22):
    """``a(t) = E g_{s0}(X, t)`` under Zeta(s0), by its series.

    Uses ``mu_k k**-s0 = (k-1)**-s0``; the tail after ``K`` terms is below
    ``t**K K**(-s0-1)``.
    """
    if not s0 > 1:
        raise DomainError("s0 must exceed 1")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((t_arr < 0) | (t_arr > 1)):
        raise DomainError("t must lie in [0, 1]")
    inner = t_arr[t_arr < 1.0]
    cut = 64
    while inner.size:
        bound = np.max(np.minimum(inner**cut, (1.0 - inner) * cut / s0)) * cut ** (-s0 - 1.0)
        if bound < tol:
            break
        if cut >= max_terms:
            raise ConvergenceError(f"a(t) series needs more than {max_terms} terms")
        cut *= 2
    acc = np.zeros_like(t_arr)
    for start in range(2, cut + 1, _CHUNK):
        k = np.arange(start, min(start + _CHUNK, cut + 1), dtype=float)
        coef = (k - 1.0) ** (-s0) * np.log1p(1.0 / (k - 1.0))
        acc += (t_arr[:, None] ** (k[None, :] - 1.0)) @ coef
    out = (1.0 - t_arr) * acc / zeta_triple(s0)[0]
    return float(out[0]) if np.ndim(t) == 0 else out


def kernel_eval(kernel, u, v):
    """``C(u, v)`` at a single pair of points in ``[0, 1]``."""
    for p in (u, v):
        if not 0 <= p <= 1:
            raise DomainError("kernel arguments must lie in [0, 1]")
    return float(kernel.matrix([u], [v])[0, 0])


def jacobi_basis(index, beta, t):
    """Orthonormal shifted Jacobi polynomial on ``L2((1-t)**beta dt)``."""
    if index < 0:
        raise DomainError("index must be nonnegative")
    b = _beta_value(beta)
    t = np.asarray(t, dtype=float)
    out = math.sqrt(2 * index + b + 1.0) * eval_jacobi(index, b, 0.0, 2.0 * t - 1.0)
    return float(out) if out.ndim == 0 else out


def jacobi_basis_explicit(index, beta, t):
    """Same polynomials from the explicit binomial sum (reliable up to ~8)."""
    b = _beta_value(beta)
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for k in range(index + 1):
        acc = acc + (-1) ** k * binom(index + b, index - k) * binom(index, k) * (1 - t) ** k * t ** (index - k)
    return math.sqrt(2 * index + b + 1.0) * acc


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    dim: int
    quad_order: int
    trace: float
    trace_residual: float
    clip_mass: float
    s0: float
    beta: float
    settings: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schema": 1,
            "s0": self.s0,
            "beta": self.beta,
            "dim": self.dim,
            "quad_order": self.quad_order,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "trace": self.trace,
            "trace_residual": self.trace_residual,
            "clip_mass": self.clip_mass,
            **self.settings,
        }


def kernel_trace(kernel, order=400):
    """``int_0^1 C(t, t) (1-t)**beta dt`` by Gauss-Jacobi on the diagonal."""
    t, w = gauss_jacobi(order, kernel.beta)
    diag = np.concatenate(
        [kernel.matrix(t[i:i + 64], t[i:i + 64]).diagonal() for i in range(0, t.size, 64)]
    )
    return float(np.sum(w * diag))


def rayleigh_ritz(kernel, dim, quad_order=None):
    """Rayleigh-Ritz eigenvalues of the covariance operator.

    Projects onto the first ``dim`` orthonormal Jacobi polynomials, with
    the Galerkin matrix integrated by a ``quad_order``-point Gauss-Jacobi
    rule in each variable.  Eigenvalues are returned in descending order,
    clipped at zero; the clipped mass is reported.
    """
    if dim < 1:
        raise DomainError("dim must be >= 1")
    if quad_order is None:
        quad_order = max(120, 4 * dim)
    if quad_order < 2 * dim:
        raise DomainError("quad_order must be at least 2 * dim")
    t, w = gauss_jacobi(quad_order, kernel.beta)
    phi = np.stack([jacobi_basis(i, kernel.beta, t) for i in range(dim)])
    cmat = kernel.matrix(t, t)
    pw = phi * w[None, :]
    A = pw @ cmat @ pw.T
    asym = float(np.max(np.abs(A - A.T)))
    if asym > 1e-8:
        raise NumericError(f"Galerkin matrix asymmetric by {asym:.3g}")
    A = 0.5 * (A + A.T)
    lam = np.linalg.eigvalsh(A)[::-1]
    clip = float(max(0.0, -np.sum(lam[lam < 0])))
    lam = np.clip(lam, 0.0, None)
    trace = kernel_trace(kernel)
    return EigenResult(
        eigenvalues=lam,
        dim=dim,
        quad_order=quad_order,
        trace=trace,
        trace_residual=abs(float(lam.sum()) - trace),
        clip_mass=clip,
        s0=kernel.s0,
        beta=kernel.beta,
    )


def limit_quantile(eigenvalues, q=0.95, draws=1_000_000, seed=0):
    """Quantile of ``sum_j lambda_j N_j**2`` by simulation."""
    lam = np.asarray(eigenvalues, dtype=float)
    rng = RngStream(seed, 0).generator
    acc = np.zeros(draws)
    for lj in lam:
        acc += lj * rng.standard_normal(draws) ** 2
    return float(np.quantile(acc, q))
