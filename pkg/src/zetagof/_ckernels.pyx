# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see :mod:`zetagof._pykernels`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, lgamma, floor, pow, fabs, isfinite
from scipy.special.cython_special cimport poch

from ._constants import EM_COEF as _EM_COEF, EM_TERMS as _EM_TERMS

cnp.import_array()

BACKEND = "cython"

cdef double _EMC[16]
cdef int _NTERMS = _EM_TERMS
for _i in range(_EM_TERMS + 1):
    _EMC[_i] = float(_EM_COEF[_i])



def zeta3(double s, double abs_tol, long max_terms):
    cdef long cut = 16, k
    cdef int j, r
    cdef double z0, z1, z2, L, p, E, u, t0, t1, t2, P, dP, d2P, kp, inv2, sc
    cdef double c0, c1, c2, bound
    while True:
        z0 = 1.0
        z1 = 0.0
        z2 = 0.0
        for k in range(2, cut):
            L = log(<double>k)
            p = exp(-s * L)
            z0 += p
            z1 -= L * p
            z2 += L * L * p
        L = log(<double>cut)
        E = exp(-s * L)
        u = s - 1.0
        t0 = cut * E / u + 0.5 * E
        t1 = cut * E * (-L / u - 1.0 / (u * u)) - 0.5 * L * E
        t2 = cut * E * (L * L / u + 2.0 * L / (u * u) + 2.0 / (u * u * u)) + 0.5 * L * L * E
        P = 1.0
        dP = 0.0
        d2P = 0.0
        r = 0
        kp = cut * E
        inv2 = 1.0 / (<double>cut * <double>cut)
        bound = 0.0
        for j in range(1, _NTERMS + 2):
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
            if j == _NTERMS + 1:
                bound = max(fabs(c0), max(fabs(c1), fabs(c2)))
                break
            t0 += c0
            t1 += c1
            t2 += c2
        if bound < abs_tol or 2 * cut > max_terms:
            return z0 + t0, z1 + t1, z2 + t2, bound
        cut *= 2


cdef inline double _beta3(double m, double bb, double gb, double lgb) noexcept nogil:
    # B(m, 3 + bb) as Gamma(3 + bb) / poch(m, 3 + bb); the log-gamma
    # difference is only a fallback since it cancels badly for large m
    cdef double p = poch(m, 3.0 + bb)
    if isfinite(p) and p > 0.0 and isfinite(gb):
        return gb / p
    return exp(lgamma(m) + lgb - lgamma(m + 3.0 + bb))


def stein_pair_sums(values, counts, deltas, betas):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(counts, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(deltas, dtype=np.float64)
    cdef double[::1] bs = np.ascontiguousarray(betas, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], nb = bs.shape[0], a, b, i
    out = np.zeros(nb)
    cdef double[::1] o = out
    cdef double m, b3, b4, b5, w, bb, acc, lgb, gb
    for i in range(nb):
        bb = bs[i]
        lgb = lgamma(3.0 + bb)
        gb = exp(lgb)
        acc = 0.0
        with nogil:
            for a in range(n):
                for b in range(a, n):
                    m = v[a] + v[b] - 1.0
                    b3 = _beta3(m, bb, gb, lgb)
                    b4 = b3 * (3.0 + bb) / (m + 3.0 + bb)
                    b5 = b4 * (4.0 + bb) / (m + 4.0 + bb)
                    w = c[a] * c[b] * (d[a] * d[b] * b3 + (d[a] + d[b]) * b4 + b5)
                    if b != a:
                        w *= 2.0
                    acc += w
        o[i] = acc
    return out


cdef inline double _gk(double a, double b, double h2) nogil:
    return exp(-(a - b) * (a - b) / h2)


def ksd_pair_sum(values, counts, double s_hat, double top, double bandwidth):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(counts, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], a, b
    cdef double h2 = 2.0 * bandwidth * bandwidth
    cdef double x, y, rx, ry, sx, sy, kxx, kxr, krx, krr, kap, acc = 0.0, tx, ty
    with nogil:
        for a in range(n):
            x = v[a]
            tx = x + 1.0 if x < top else 1.0
            rx = x - 1.0 if x > 1.0 else top
            sx = 1.0 - exp(s_hat * (log(x) - log(tx)))
            for b in range(n):
                y = v[b]
                ty = y + 1.0 if y < top else 1.0
                ry = y - 1.0 if y > 1.0 else top
                sy = 1.0 - exp(s_hat * (log(y) - log(ty)))
                kxx = _gk(x, y, h2)
                kxr = _gk(x, ry, h2)
                krx = _gk(rx, y, h2)
                krr = _gk(rx, ry, h2)
                kap = (sx * kxx * sy - sx * (kxx - kxr) - (kxx - krx) * sy
                       + (kxx - krx - kxr + krr))
                if a == b:
                    acc += (c[a] * c[a] - c[a]) * kap
                else:
                    acc += c[a] * c[b] * kap
    return acc


# The rejection step stays in numpy: its SIMD exp/log beat a scalar libm
# loop by about 4x here, and sharing it keeps draws identical across builds.
from ._pykernels import zipf_reject
