"""Pure-Python/numpy implementations of the hot kernels.

These mirror :mod:`zetagof._ckernels` function for function and are used when
the compiled extension is unavailable (or ``ZETAGOF_PURE=1``).
"""
import math

import numpy as np
from scipy.special import betaln, gamma, poch

from ._constants import EM_COEF as _EM_COEF, EM_TERMS as _EM_TERMS

BACKEND = "python"

_EMC = [float(c) for c in _EM_COEF]
_MAX_SAMPLE = float(2**62)


def zeta3(s, abs_tol, max_terms):
    """Return ``(zeta, zeta', zeta'', tail_bound)`` at a scalar ``s > 1``."""
    cut = 16
    while True:
        z0 = 1.0
        z1 = z2 = 0.0
        for k in range(2, cut):
            L = math.log(k)
            p = math.exp(-s * L)
            z0 += p
            z1 -= L * p
            z2 += L * L * p
        L = math.log(cut)
        E = math.exp(-s * L)
        u = s - 1.0
        t0 = cut * E / u + 0.5 * E
        t1 = cut * E * (-L / u - 1.0 / (u * u)) - 0.5 * L * E
        t2 = cut * E * (L * L / u + 2.0 * L / (u * u) + 2.0 / (u * u * u)) + 0.5 * L * L * E
        P, dP, d2P = 1.0, 0.0, 0.0
        r = 0
        kp = cut * E
        inv2 = 1.0 / (cut * cut)
        bound = 0.0
        for j in range(1, _EM_TERMS + 2):
            while r < 2 * j - 1:
                d2P = d2P * (s + r) + 2.0 * dP
                dP = dP * (s + r) + P
                P = P * (s + r)
                r += 1
            kp *= inv2
            sc = _EMC[j - 1] * kp
            c0 = sc * P
            c1 = sc * (dP - L * P)
            c2 = sc * (d2P - 2.0 * L * dP + L * L * P)
            if j == _EM_TERMS + 1:
                bound = max(abs(c0), abs(c1), abs(c2))
                break
            t0 += c0
            t1 += c1
            t2 += c2
        if bound < abs_tol or 2 * cut > max_terms:
            return z0 + t0, z1 + t1, z2 + t2, bound
        cut *= 2


def _beta3(m, b):
    # Gamma(b) / poch(m, b) keeps full relative accuracy for large m, where
    # differences of log-gamma values lose about log10(m * log m) digits
    with np.errstate(over="ignore", invalid="ignore"):
        out = gamma(b) / poch(m, b)
    bad = ~np.isfinite(out) | (out == 0)
    if np.any(bad):
        out = np.where(bad, np.exp(betaln(m, b)), out)
    return out


def stein_pair_sums(values, counts, deltas, betas):
    """``sum_{a,b} c_a c_b K_beta(v_a, v_b)`` for each beta.

    ``K_beta(x, y) = d_x d_y B(m, 3+b) + (d_x + d_y) B(m, 4+b) + B(m, 5+b)``
    with ``m = x + y - 1`` and ``d_x = mu_x - 1`` (``d_1 = -1``).
    """
    v = np.asarray(values, dtype=float)
    c = np.asarray(counts, dtype=float)
    d = np.asarray(deltas, dtype=float)
    m = v[:, None] + v[None, :] - 1.0
    dd = d[:, None] * d[None, :]
    ds = d[:, None] + d[None, :]
    cc = c[:, None] * c[None, :]
    out = np.empty(len(betas))
    for i, b in enumerate(betas):
        b3 = _beta3(m, 3.0 + b)
        b4 = b3 * (3.0 + b) / (m + 3.0 + b)
        b5 = b4 * (4.0 + b) / (m + 4.0 + b)
        out[i] = np.sum(cc * (dd * b3 + ds * b4 + b5))
    return out


def ksd_pair_sum(values, counts, s_hat, top, bandwidth):
    """Sum of the KSD Stein kernel over ordered pairs of distinct indices."""
    v = np.asarray(values, dtype=float)
    c = np.asarray(counts, dtype=float)
    top = float(top)
    tau = np.where(v < top, v + 1.0, 1.0)
    rho = np.where(v > 1.0, v - 1.0, top)
    score = 1.0 - np.exp(s_hat * (np.log(v) - np.log(tau)))
    h2 = 2.0 * bandwidth * bandwidth

    def k(a, b):
        return np.exp(-((a[:, None] - b[None, :]) ** 2) / h2)

    kxx = k(v, v)
    kxr = k(v, rho)
    krx = k(rho, v)
    krr = k(rho, rho)
    sx = score[:, None]
    sy = score[None, :]
    kappa = (
        sx * kxx * sy
        - sx * (kxx - kxr)
        - (kxx - krx) * sy
        + (kxx - krx - kxr + krr)
    )
    # pairs i != j: weight c_a c_b off the diagonal and c_a (c_a - 1) on it,
    # built before multiplying so large diagonal kernels never cancel
    w = np.outer(c, c)
    w[np.diag_indices_from(w)] -= c
    return float(np.sum(w * kappa))


def zipf_reject(u, v, s):
    """Devroye's rejection step for Zeta(s); returns the accepted draws.

    ``u`` must lie in (0, 1]; ``v`` in [0, 1).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    am1 = s - 1.0
    b = 2.0**am1
    with np.errstate(over="ignore"):
        x = np.floor(np.exp(-np.log(u) / am1))
    ok = x < _MAX_SAMPLE
    x = np.where(ok, x, 1.0)
    t = np.exp(am1 * np.log1p(1.0 / x))
    acc = ok & (v * x * (t - 1.0) / (b - 1.0) <= t / b)
    return x[acc].astype(np.int64)
