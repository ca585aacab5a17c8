"""Maximum-likelihood estimation of the Zeta shape parameter."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .distributions import as_sample, tally
from .errors import BracketError, DegenerateSample, DomainError
from .special import zeta_triple

__all__ = [
    "MleResult",
    "score",
    "fisher_information",
    "log_derivative",
    "log_likelihood",
    "solve_score_equation",
    "mle_fit",
    "mle_or_cap",
    "kl_projection",
    "bahadur_diagnostic",
]

S_LOW = 1.0 + 1e-6
S_CAP = 200.0


@dataclass(frozen=True)
class MleResult:
    s_hat: float
    iterations: int
    converged: bool
    bracket: tuple
    residual: float


def log_derivative(s):
    """``zeta'(s) / zeta(s)``, strictly increasing and negative on s > 1."""
    z0, z1, _ = zeta_triple(s)
    return z1 / z0


def score(x, s):
    """Zeta score ``-log x - zeta'(s)/zeta(s)``; ``x`` may be an array."""
    if not s > 1:
        raise DomainError("score needs s > 1")
    x = np.asarray(x, dtype=float)
    if np.any(x < 1):
        raise DomainError("score needs x >= 1")
    out = -np.log(x) - log_derivative(s)
    return float(out) if out.ndim == 0 else out


def fisher_information(s):
    """``I(s) = zeta''/zeta - (zeta'/zeta)**2``, i.e. ``Var(log X)``."""
    if not s > 1:
        raise DomainError("Fisher information needs s > 1")
    z0, z1, z2 = zeta_triple(s)
    r = z1 / z0
    return z2 / z0 - r * r


def log_likelihood(sample, s):
    x = as_sample(sample)
    return float(-s * np.sum(np.log(x)) - x.size * math.log(zeta_triple(s)[0]))


def solve_score_equation(mean_log, s_max=50.0, tol=1e-10):
    """Root of ``zeta'(s)/zeta(s) + mean_log = 0`` on ``(1, s_max]``.

    The upper end is doubled up to 200 before giving up.
    """
    if not mean_log > 0:
        raise DegenerateSample("degenerate sample: all observations equal 1")
    if not s_max > 1 or not tol > 0:
        raise DomainError("need s_max > 1 and tol > 0")

    def g(s):
        return log_derivative(s) + mean_log

    hi = float(s_max)
    while g(hi) < 0:
        if hi >= S_CAP:
            raise BracketError(f"MLE exceeds s_max = {S_CAP:g}")
        hi = min(2.0 * hi, S_CAP)
    root, info = brentq(g, S_LOW, hi, xtol=1e-15, rtol=1e-15, maxiter=200,
                        full_output=True, disp=False)
    # one Newton polish; g' = I(s)
    res = g(root)
    info_s = fisher_information(root)
    if info_s > 0:
        cand = root - res / info_s
        if S_LOW < cand <= hi and abs(g(cand)) < abs(res):
            root = cand
            res = g(root)
    return MleResult(
        s_hat=float(root),
        iterations=info.iterations,
        converged=bool(info.converged and abs(res) < tol),
        bracket=(S_LOW, hi),
        residual=float(res),
    )


def _mean_log(sample):
    # summing over tallied values fixes the order, so the estimate is
    # bit-for-bit invariant under permutations of the sample
    vals, counts = tally(as_sample(sample))
    return float(counts @ np.log(vals)) / float(counts.sum())


def mle_fit(sample, s_max=50.0, tol=1e-10):
    """Maximum-likelihood estimate of ``s`` for a Zeta sample.

    Raises
    ------
    DegenerateSample
        If every observation equals 1 (no finite root).
    BracketError
        If the root lies beyond ``s = 200``.
    """
    return solve_score_equation(_mean_log(sample), s_max, tol)


def mle_or_cap(sample, s_max=50.0, tol=1e-10):
    """Like :func:`mle_fit` but returns ``(s_max, True)`` on degenerate input.

    Used inside resampling loops, which must never abort.
    """
    mean_log = _mean_log(sample)
    if not mean_log > 0:
        return float(s_max), True
    try:
        return solve_score_equation(mean_log, s_max, tol).s_hat, False
    except BracketError:
        return float(s_max), True


def kl_projection(spec, s_max=50.0):
    """Parameter of the Zeta law closest in Kullback-Leibler sense to ``spec``.

    This is the almost-sure limit of the MLE under the alternative.
    """
    return solve_score_equation(spec.mean_log(), s_max).s_hat


def bahadur_diagnostic(sample, s0, s_max=50.0):
    """Compare ``sqrt(n)(s_hat - s0)`` with its linearisation in the score.

    Returns ``(exact, linearised)``; the two agree up to ``o_P(1)``.
    """
    x = as_sample(sample)
    n = x.size
    s_hat = mle_fit(x, s_max).s_hat
    lin = np.sum(score(x, s0)) / (math.sqrt(n) * fisher_information(s0))
    return math.sqrt(n) * (s_hat - s0), float(lin)
