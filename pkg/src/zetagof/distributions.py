"""Zeta law, the alternative families of the power study, and samplers.

Samples are plain ``numpy.int64`` arrays of positive integers.  Every sampler
draws from an :class:`RngStream`, so a given ``(master_seed, stream_index)``
always reproduces the same data.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._backend import kernels
from .errors import DomainError
from .special import zeta_tail, zeta_triple

__all__ = [
    "RngStream",
    "ZetaModel",
    "ZetaAlt",
    "GeomMatched",
    "Zipf",
    "ZG",
    "GZ",
    "Zigzag",
    "as_sample",
    "tally",
    "zeta_pmf",
    "zeta_cdf",
    "sample_zeta",
    "alt_pmf",
    "sample_alt",
    "parse_alternative",
]


class RngStream:
    """Deterministic random stream keyed by ``(master_seed, *stream_index)``.

    Streams with different indices come from independent children of one
    :class:`numpy.random.SeedSequence`, so they can be consumed in any order
    or in parallel.
    """

    def __init__(self, master_seed, *stream_index):
        self.master_seed = int(master_seed)
        self.stream_index = tuple(int(i) for i in stream_index)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_index)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RngStream({self.master_seed}, {', '.join(map(str, self.stream_index))})"

    def random(self, size=None):
        return self.generator.random(size)

    def uniform_open_left(self, size):
        """Uniforms on (0, 1]."""
        return 1.0 - self.generator.random(size)


def as_sample(values):
    """Validate ``values`` as a sample of positive integers (int64 array)."""
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("a sample must be a nonempty 1-d sequence")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            raise DomainError("sample values must be integers")
    elif arr.dtype.kind not in "iu":
        raise DomainError("sample values must be integers")
    arr = arr.astype(np.int64)
    if np.any(arr < 1):
        raise DomainError("sample values must be >= 1")
    return arr


def tally(sample):
    """Distinct values and their multiplicities."""
    return np.unique(sample, return_counts=True)


@dataclass(frozen=True)
class ZetaModel:
    """Member of the Zeta family with cached ``zeta(s)`` and derivatives."""

    s: float
    zeta0: float = field(init=False, repr=False)
    zeta1: float = field(init=False, repr=False)
    zeta2: float = field(init=False, repr=False)

    def __post_init__(self):
        if not self.s > 1.0:
            raise DomainError(f"Zeta(s) needs s > 1, got {self.s}")
        z0, z1, z2 = zeta_triple(self.s)
        object.__setattr__(self, "zeta0", z0)
        object.__setattr__(self, "zeta1", z1)
        object.__setattr__(self, "zeta2", z2)

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        return np.exp(-self.s * np.log(k)) / self.zeta0

    def sf(self, k):
        """P(X > k)."""
        return zeta_tail(self.s, k) / self.zeta0


def _check_support(k, upper=None):
    k = np.asarray(k)
    if np.any(k < 1):
        raise DomainError("pmf is supported on the positive integers")
    if upper is not None and np.any(k > upper):
        raise DomainError(f"pmf is supported on 1..{upper}")
    return k.astype(float)


def zeta_pmf(model, k):
    """``k**(-s) / zeta(s)``; ``k`` may be an array."""
    kk = _check_support(k)
    out = model.pmf(kk)
    return float(out) if np.ndim(out) == 0 else out


def zeta_cdf(model, k):
    """``P(X <= k)`` under ``model``, computed from the Hurwitz tail."""
    kk = _check_support(k)
    out = 1.0 - np.vectorize(model.sf, otypes=[float])(kk)
    return float(out) if np.ndim(out) == 0 else out


def sample_zeta(model, n, rng):
    """Draw ``n`` variates from Zeta(s) by Devroye's rejection method.

    Draws beyond ``2**62`` are rejected to stay within int64, so the law is
    Zeta(s) conditioned on ``X < 2**62``.  The mass removed is
    ``sf(2**62 - 1)``: about 4e-10 at ``s = 1.5``, 2e-4 at ``s = 1.2`` and
    0.11 at ``s = 1.05``.
    """
    s = model.s if isinstance(model, ZetaModel) else float(model)
    if n < 1:
        raise DomainError("n must be positive")
    parts = []
    need = n
    while need > 0:
        m = need + need // 2 + 16
        got = kernels.zipf_reject(rng.uniform_open_left(m), rng.random(m), s)
        got = got[:need]
        parts.append(got)
        need -= got.size
    return np.concatenate(parts)


def _truncated_geometric(rng, p, upper, n):
    """Inversion sampler for Geometric(p) on {1..upper} (upper may be inf)."""
    u = rng.random(n)
    q = 1.0 - p
    mass = 1.0 if math.isinf(upper) else -math.expm1(upper * math.log(q))
    k = np.ceil(np.log1p(-u * mass) / math.log(q))
    k = np.maximum(k, 1.0)
    if not math.isinf(upper):
        k = np.minimum(k, upper)
    return k.astype(np.int64)


def _finite_inverse(rng, probs, n):
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return (np.minimum(idx, len(probs) - 1) + 1).astype(np.int64)


def _sum_with_tail(f, start):
    """``sum_{j >= 1} f(j)`` for a smooth, slowly decaying ``f`` (vectorised).

    Direct sum up to ``start`` plus a midpoint-corrected integral for the rest.
    """
    j = np.arange(1, start + 1, dtype=float)
    head = float(np.sum(f(j)))
    tail, _ = integrate.quad(lambda x: float(f(np.array([x]))[0]), start + 0.5, np.inf,
                             limit=200, epsabs=1e-14, epsrel=1e-12)
    return head + tail


class _Alternative:
    """Common helpers for the alternative families."""

    upper = math.inf

    def pmf(self, k):
        raise NotImplementedError

    def sf(self, k):
        """``P(X > k)`` for integer ``k >= 0``."""
        raise NotImplementedError

    def sample(self, n, rng):
        raise NotImplementedError

    def mean_log(self):
        raise NotImplementedError

    def support_cut(self, tol):
        """Smallest power of two ``K`` with tail mass beyond ``K`` below ``tol``."""
        K = 64
        while K < self.upper and self.sf(K) >= tol:
            K *= 2
            if K > 2**40:
                break
        return int(min(K, self.upper))

    def __str__(self):
        return self.label


def _fmt(x):
    return f"{x:g}"


@dataclass(frozen=True)
class ZetaAlt(_Alternative):
    s: float

    def __post_init__(self):
        if not self.s > 1:
            raise DomainError("Zeta alternative needs s > 1")

    @property
    def model(self):
        return ZetaModel(self.s)

    @property
    def label(self):
        return f"Zeta({_fmt(self.s)})"

    def pmf(self, k):
        return self.model.pmf(k)

    def sf(self, k):
        return self.model.sf(k)

    def sample(self, n, rng):
        return sample_zeta(self.model, n, rng)

    def mean_log(self):
        m = self.model
        return -m.zeta1 / m.zeta0


@dataclass(frozen=True)
class GeomMatched(_Alternative):
    """Geometric law on {1, 2, ...} whose mean equals that of Zeta(s)."""

    s: float

    def __post_init__(self):
        if not self.s > 2:
            raise DomainError("matched geometric needs s > 2 (finite Zeta mean)")

    @property
    def p(self):
        return zeta_triple(self.s)[0] / zeta_triple(self.s - 1.0)[0]

    @property
    def label(self):
        return f"Geom({_fmt(self.s)})"

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        p = self.p
        return np.exp((k - 1.0) * math.log1p(-p)) * p

    def sf(self, k):
        return math.exp(k * math.log1p(-self.p))

    def sample(self, n, rng):
        return rng.generator.geometric(self.p, size=n).astype(np.int64)

    def mean_log(self):
        K = self.support_cut(1e-18)
        k = np.arange(1, K + 1, dtype=float)
        return float(np.sum(self.pmf(k) * np.log(k)))


@dataclass(frozen=True)
class Zipf(_Alternative):
    """Zeta law truncated to {1..N}."""

    s: float
    N: int

    def __post_init__(self):
        if not self.s > 1 or int(self.N) < 1:
            raise DomainError("Zipf needs s > 1 and N >= 1")

    @property
    def upper(self):
        return int(self.N)

    @property
    def label(self):
        return f"Zipf({_fmt(self.s)},{self.N})"

    def _weights(self):
        k = np.arange(1, self.N + 1, dtype=float)
        w = k ** (-self.s)
        return w / w.sum()

    def pmf(self, k):
        k = _check_support(k, self.N).astype(np.int64)
        return self._weights()[k - 1]

    def sf(self, k):
        if k >= self.N:
            return 0.0
        return float(self._weights()[int(k):].sum())

    def sample(self, n, rng):
        return _finite_inverse(rng, self._weights(), n)

    def mean_log(self):
        k = np.arange(1, self.N + 1, dtype=float)
        return float(np.sum(self._weights() * np.log(k)))


@dataclass(frozen=True)
class ZG(_Alternative):
    """Zeta(s) on {1..N}; the remaining mass spread as a shifted geometric tail."""

    s: float
    N: int
    p_g: float

    def __post_init__(self):
        if not self.s > 1 or int(self.N) < 1 or not 0 < self.p_g < 1:
            raise DomainError("ZG needs s > 1, N >= 1 and 0 < p_g < 1")

    @property
    def label(self):
        return f"ZG({_fmt(self.s)},{self.N},{_fmt(self.p_g)})"

    def _tail_mass(self):
        return ZetaModel(self.s).sf(self.N)

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        m = ZetaModel(self.s)
        tail = self._tail_mass() * np.exp((k - self.N - 1.0) * math.log1p(-self.p_g)) * self.p_g
        return np.where(k <= self.N, m.pmf(k), tail)

    def sf(self, k):
        if k < self.N:
            return ZetaModel(self.s).sf(k)
        return self._tail_mass() * math.exp((k - self.N) * math.log1p(-self.p_g))

    def sample(self, n, rng):
        head = Zipf(self.s, self.N)
        from_tail = rng.random(n) < self._tail_mass()
        out = head.sample(n, rng)
        n_tail = int(from_tail.sum())
        if n_tail:
            out[from_tail] = self.N + _truncated_geometric(rng, self.p_g, math.inf, n_tail)
        return out

    def mean_log(self):
        m = ZetaModel(self.s)
        k = np.arange(1, self.N + 1, dtype=float)
        head = float(np.sum(m.pmf(k) * np.log(k)))
        q = 1.0 - self.p_g
        J = int(math.ceil(-40.0 / math.log(q))) + 1
        j = np.arange(1, J + 1, dtype=float)
        tail = float(np.sum(q ** (j - 1) * self.p_g * np.log(self.N + j)))
        return head + self._tail_mass() * tail


@dataclass(frozen=True)
class GZ(_Alternative):
    """Matched geometric on {1..N}; remaining mass spread as a shifted Zeta tail.

    The geometric piece uses the mean-matched success probability of
    :class:`GeomMatched`, hence ``s > 2``.
    """

    s: float
    N: int

    def __post_init__(self):
        if not self.s > 2 or int(self.N) < 1:
            raise DomainError("GZ needs s > 2 and N >= 1")

    @property
    def p(self):
        return GeomMatched(self.s).p

    @property
    def label(self):
        return f"GZ({_fmt(self.s)},{self.N})"

    def _tail_mass(self):
        return math.exp(self.N * math.log1p(-self.p))

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        p = self.p
        head = np.exp((k - 1.0) * math.log1p(-p)) * p
        shift = np.maximum(k - self.N, 1.0)
        tail = self._tail_mass() * ZetaModel(self.s).pmf(shift)
        return np.where(k <= self.N, head, tail)

    def sf(self, k):
        if k < self.N:
            return math.exp(k * math.log1p(-self.p))
        return self._tail_mass() * ZetaModel(self.s).sf(k - self.N)

    def sample(self, n, rng):
        from_tail = rng.random(n) < self._tail_mass()
        out = _truncated_geometric(rng, self.p, self.N, n)
        n_tail = int(from_tail.sum())
        if n_tail:
            out[from_tail] = self.N + sample_zeta(ZetaModel(self.s), n_tail, rng)
        return out

    def mean_log(self):
        k = np.arange(1, self.N + 1, dtype=float)
        head = float(np.sum(self.pmf(k) * np.log(k)))
        m = ZetaModel(self.s)
        tail = _sum_with_tail(lambda j: m.pmf(j) * np.log(self.N + j), 4096)
        return head + self._tail_mass() * tail


@dataclass(frozen=True)
class Zigzag(_Alternative):
    """pmf proportional to ``k**(-s) * (1 + eps * (-1)**k)``."""

    s: float
    eps: float

    def __post_init__(self):
        if not self.s > 1 or not abs(self.eps) < 1:
            raise DomainError("Zigzag needs s > 1 and |eps| < 1")

    @property
    def label(self):
        return f"Zigzag({_fmt(self.s)},{_fmt(self.eps)})"

    @property
    def norm(self):
        z = zeta_triple(self.s)[0]
        return z * (1.0 + self.eps * (2.0 ** (1.0 - self.s) - 1.0))

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        sign = np.where(np.mod(k, 2) == 0, 1.0, -1.0)
        return np.exp(-self.s * np.log(k)) * (1.0 + self.eps * sign) / self.norm

    def sf(self, k):
        every = zeta_tail(self.s, k)
        even = 2.0 ** (-self.s) * zeta_tail(self.s, k // 2)
        return (every + self.eps * (2.0 * even - every)) / self.norm

    def sample(self, n, rng):
        # rejection from Zeta(s): envelope (1 + |eps|) k**-s
        model = ZetaModel(self.s)
        parts = []
        need = n
        while need > 0:
            m = need + need // 2 + 16
            x = sample_zeta(model, m, rng)
            sign = np.where(x % 2 == 0, 1.0, -1.0)
            keep = rng.random(m) * (1.0 + abs(self.eps)) <= 1.0 + self.eps * sign
            got = x[keep][:need]
            parts.append(got)
            need -= got.size
        return np.concatenate(parts)

    def mean_log(self):
        z0, z1, _ = zeta_triple(self.s)
        c = 2.0 ** (1.0 - self.s)
        # sum_k (-1)^k log(k) k^-s = d/ds[(1 - 2^(1-s)) zeta(s)]
        alt = c * math.log(2.0) * z0 + (1.0 - c) * z1
        return (-z1 + self.eps * alt) / self.norm


def alt_pmf(spec, k):
    """Probability mass of alternative ``spec`` at ``k`` (array friendly)."""
    _check_support(k, None if math.isinf(spec.upper) else spec.upper)
    out = spec.pmf(k)
    return float(out) if np.ndim(out) == 0 else out


def sample_alt(spec, n, rng):
    """``n`` i.i.d. draws from ``spec``."""
    if n < 1:
        raise DomainError("n must be positive")
    return spec.sample(n, rng)


_FAMILIES = {
    "zeta": ZetaAlt,
    "geom": GeomMatched,
    "zipf": Zipf,
    "zg": ZG,
    "gz": GZ,
    "zigzag": Zigzag,
}
_INT_FIELDS = {"N"}


def parse_alternative(text):
    """Parse labels such as ``"Zigzag(2,0.5)"`` or ``"ZG(3,10,0.2)"``."""
    m = re.fullmatch(r"\s*([A-Za-z]+)\s*\(([^)]*)\)\s*", text)
    if not m or m.group(1).lower() not in _FAMILIES:
        raise DomainError(f"unknown alternative {text!r}")
    cls = _FAMILIES[m.group(1).lower()]
    names = list(cls.__dataclass_fields__)
    args = [a.strip() for a in m.group(2).split(",") if a.strip()]
    if len(args) != len(names):
        raise DomainError(f"{cls.__name__} takes {len(names)} parameters")
    kwargs = {}
    for name, a in zip(names, args):
        kwargs[name] = int(a) if name in _INT_FIELDS else float(a)
    return cls(**kwargs)
