"""Parametric bootstrap tests and the warp-speed power-study engine."""
from __future__ import annotations

import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import competitors, stein
from ._backend import BACKEND
from .distributions import RngStream, ZetaModel, as_sample, parse_alternative, sample_zeta, tally
from .errors import DomainError
from .estimation import mle_fit, mle_or_cap

__all__ = [
    "StatisticKind",
    "parse_statistic",
    "evaluate_statistics",
    "BootstrapConfig",
    "TestOutcome",
    "order_statistic_quantile",
    "bootstrap_test",
    "SimulationConfig",
    "PowerTable",
    "simulate_pairs",
    "warp_speed_study",
    "STUDY_STATISTICS",
    "STUDY_ALTERNATIVES",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StatisticKind:
    family: str
    param: float | None = None

    @property
    def label(self):
        if self.param is None:
            return self.family
        return f"{self.family}:{self.param:g}"

    def __str__(self):
        return self.label


_NO_PARAM = {"cvm", "ksd", "ben"}


def parse_statistic(text):
    """Parse ``stein:<beta>``, ``meintanis:<beta>``, ``cvm``, ``ksd`` or ``ben``."""
    if isinstance(text, StatisticKind):
        return text
    m = re.fullmatch(r"\s*([a-z]+)\s*(?::\s*([0-9.eE+-]+))?\s*", str(text).lower())
    if not m:
        raise DomainError(f"unknown statistic {text!r}")
    fam, par = m.group(1), m.group(2)
    if fam in _NO_PARAM and par is None:
        return StatisticKind(fam)
    if fam in ("stein", "meintanis") and par is not None:
        try:
            p = float(par)
        except ValueError:
            raise DomainError(f"bad parameter in {text!r}") from None
        if fam == "stein" and not p >= 0:
            raise DomainError("stein weight exponent must be >= 0")
        if fam == "meintanis" and not p > 0:
            raise DomainError("meintanis weight exponent must be > 0")
        return StatisticKind(fam, p)
    raise DomainError(f"unknown statistic {text!r}")


def evaluate_statistics(kinds, sample, s_hat):
    """Evaluate several statistics on one sample with a shared ``s_hat``."""
    x = as_sample(sample)
    vals, counts = tally(x)
    n = x.size
    out = np.empty(len(kinds))
    stein_idx = [i for i, k in enumerate(kinds) if k.family == "stein"]
    if stein_idx:
        betas = [kinds[i].param for i in stein_idx]
        out[stein_idx] = stein.stein_values(vals, counts, n, s_hat, betas)
    for i, k in enumerate(kinds):
        if k.family == "stein":
            continue
        if k.family == "cvm":
            out[i] = competitors._cvm_tallied(vals, counts, n, s_hat)
        elif k.family == "ksd":
            out[i] = competitors._ksd_tallied(vals, counts, n, s_hat) if n > 1 else np.nan
        elif k.family == "meintanis":
            out[i] = competitors._meintanis_tallied(vals, counts, n, s_hat, k.param)
        elif k.family == "ben":
            out[i] = competitors._ben_tallied(vals, counts, n, s_hat)
        else:
            raise DomainError(f"unknown statistic family {k.family!r}")
    return out


def order_statistic_quantile(values, alpha):
    """Empirical ``(1 - alpha)``-quantile by the order-statistic rule.

    Uses ``T_{b(1-alpha):b}`` when ``b(1-alpha)`` is an integer and
    ``T_{floor(b(1-alpha))+1:b}`` otherwise.
    """
    v = np.sort(np.asarray(values, dtype=float))
    b = v.size
    if b == 0:
        raise DomainError("need at least one resampled statistic")
    if not 0 <= alpha < 1:
        raise DomainError("alpha must lie in [0, 1)")
    pos = b * (1.0 - alpha)
    r = round(pos)
    idx = int(r) if abs(pos - r) < 1e-9 * max(1.0, b) else int(math.floor(pos)) + 1
    idx = min(max(idx, 1), b)
    return float(v[idx - 1])


@dataclass(frozen=True)
class BootstrapConfig:
    b: int = 500
    alpha: float = 0.05
    master_seed: int = 0
    s_max: float = 50.0

    def __post_init__(self):
        if self.b < 1:
            raise DomainError("b must be >= 1")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class TestOutcome:
    statistic: float
    critical_value: float
    p_value: float
    s_hat: float
    reject: bool
    kind: str
    b: int
    alpha: float
    master_seed: int
    degenerate_resamples: int = 0

    __test__ = False  # not a pytest class

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "kind": self.kind,
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "s_hat": self.s_hat,
            "reject": self.reject,
            "b": self.b,
            "alpha": self.alpha,
            "seed": self.master_seed,
            "degenerate_resamples": self.degenerate_resamples,
        }


def bootstrap_test(sample, kind, config=BootstrapConfig()):
    """Parametric bootstrap goodness-of-fit test of the Zeta family.

    Fits ``s`` on the data, draws ``config.b`` samples from Zeta(s_hat),
    refits on each and recomputes the statistic.  Resamples consisting only
    of ones get ``s_hat* = s_max``.

    Raises
    ------
    DegenerateSample
        If the observed sample is all ones.
    """
    kind = parse_statistic(kind)
    x = as_sample(sample)
    n = x.size
    s_hat = mle_fit(x, config.s_max).s_hat
    t_obs = float(evaluate_statistics([kind], x, s_hat)[0])
    model = ZetaModel(s_hat)
    t_star = np.empty(config.b)
    n_degen = 0
    for i in range(config.b):
        rng = RngStream(config.master_seed, i)
        xs = sample_zeta(model, n, rng)
        s_star, degen = mle_or_cap(xs, config.s_max)
        n_degen += degen
        t_star[i] = evaluate_statistics([kind], xs, s_star)[0]
    crit = order_statistic_quantile(t_star, config.alpha)
    p_value = (1.0 + np.count_nonzero(t_star >= t_obs)) / (config.b + 1.0)
    return TestOutcome(
        statistic=t_obs,
        critical_value=crit,
        p_value=float(p_value),
        s_hat=s_hat,
        reject=bool(t_obs > crit),
        kind=kind.label,
        b=config.b,
        alpha=config.alpha,
        master_seed=config.master_seed,
        degenerate_resamples=n_degen,
    )


STUDY_STATISTICS = (
    [f"stein:{b}" for b in range(6)] + [f"meintanis:{b}" for b in range(1, 7)] + ["cvm", "ksd", "ben"]
)
STUDY_ALTERNATIVES = (
    ["Zeta(1.5)", "Zeta(1.75)", "Zeta(2)", "Zeta(2.25)",
     "Geom(2.5)", "Geom(3)", "Geom(3.5)"]
    + [f"ZG(3,10,{p})" for p in (0.2, 0.4, 0.6, 0.8)]
    + [f"ZG(2,5,{p})" for p in (0.2, 0.4, 0.6, 0.8)]
    + ["ZG(2,30,0.4)"]
    + [f"GZ(2.5,{N})" for N in (5, 10, 20, 50)]
    + [f"Zipf({s},10)" for s in (1.5, 1.75, 2, 2.25, 2.5, 3)]
    + ["Zipf(1.5,20)", "Zipf(1.75,20)"]
    + [f"Zipf({s},5)" for s in (2, 2.25, 2.5, 3)]
    + [f"Zigzag({s},{e})" for s in (1.75, 2, 2.5, 3) for e in (0.1, 0.5)]
)
FULL_SCALE_REPLICATIONS = 10000


@dataclass(frozen=True)
class SimulationConfig:
    """Design of a warp-speed power study."""

    n: int = 100
    replications: int = 2000
    alternatives: tuple = ("Zeta(2)",)
    statistics: tuple = ("stein:0",)
    alpha: float = 0.05
    master_seed: int = 0
    workers: int = 1
    s_max: float = 50.0
    full_scale: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        alts = tuple(a if not isinstance(a, str) else parse_alternative(a) for a in self.alternatives)
        kinds = tuple(parse_statistic(k) for k in self.statistics)
        if not alts or not kinds:
            raise DomainError("need at least one alternative and one statistic")
        object.__setattr__(self, "alternatives", alts)
        object.__setattr__(self, "statistics", kinds)

    @property
    def m(self):
        return FULL_SCALE_REPLICATIONS if self.full_scale else self.replications

    def to_dict(self):
        return {
            "n": self.n,
            "replications": self.m,
            "alternatives": [a.label for a in self.alternatives],
            "statistics": [k.label for k in self.statistics],
            "alpha": self.alpha,
            "seed": self.master_seed,
            "s_max": self.s_max,
        }


def _replicate(spec, alt_index, rep, n, kinds, master_seed, s_max):
    rng = RngStream(master_seed, rep, alt_index)
    x = spec.sample(n, rng)
    s_hat, degen = mle_or_cap(x, s_max)
    t = evaluate_statistics(kinds, x, s_hat)
    xs = sample_zeta(ZetaModel(s_hat), n, rng)
    s_star, _ = mle_or_cap(xs, s_max)
    t_star = evaluate_statistics(kinds, xs, s_star)
    return t, t_star, degen


def _run_block(args):
    spec, alt_index, start, stop, n, kinds, master_seed, s_max = args
    k = len(kinds)
    t = np.empty((stop - start, k))
    ts = np.empty((stop - start, k))
    degen = np.zeros(stop - start, dtype=bool)
    for j, rep in enumerate(range(start, stop)):
        t[j], ts[j], degen[j] = _replicate(spec, alt_index, rep, n, kinds, master_seed, s_max)
    return alt_index, start, t, ts, degen


def simulate_pairs(config):
    """Raw ``(T_m, T*_m)`` pairs for every alternative.

    Returns a list, one entry per alternative, of ``(T, T_star, degenerate)``
    arrays of shape ``(M, n_statistics)`` / ``(M,)``.  Identical for any
    number of workers.
    """
    m = config.m
    kinds = config.statistics
    block = max(1, min(250, math.ceil(m / (4 * config.workers))))
    jobs = [
        (spec, a, start, min(start + block, m), config.n, kinds, config.master_seed, config.s_max)
        for a, spec in enumerate(config.alternatives)
        for start in range(0, m, block)
    ]
    out = [
        (np.empty((m, len(kinds))), np.empty((m, len(kinds))), np.zeros(m, dtype=bool))
        for _ in config.alternatives
    ]
    if config.workers == 1:
        results = map(_run_block, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=config.workers)
        results = pool.map(_run_block, jobs)
    for a, start, t, ts, degen in results:
        stop = start + t.shape[0]
        out[a][0][start:stop] = t
        out[a][1][start:stop] = ts
        out[a][2][start:stop] = degen
    if config.workers != 1:
        pool.shutdown()
    return out


@dataclass
class PowerTable:
    """Empirical rejection rates (percent) with Monte Carlo standard errors."""

    alternatives: list
    statistics: list
    rates: np.ndarray
    se: np.ndarray
    degenerate_fraction: np.ndarray
    critical_values: np.ndarray
    metadata: dict = field(default_factory=dict)

    DEGENERATE_FLAG = 0.01

    @property
    def flagged(self):
        return [a for a, f in zip(self.alternatives, self.degenerate_fraction)
                if f > self.DEGENERATE_FLAG]

    def rate(self, alternative, statistic):
        i = self.alternatives.index(str(alternative))
        j = self.statistics.index(parse_statistic(statistic).label)
        return float(self.rates[i, j])

    def to_csv(self):
        lines = ["alternative," + ",".join(self.statistics)]
        for i, alt in enumerate(self.alternatives):
            cells = [f"{r:.2f}±{s:.2f}" for r, s in zip(self.rates[i], self.se[i])]
            lines.append(",".join([alt] + cells))
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "alternatives": self.alternatives,
            "statistics": self.statistics,
            "rates": self.rates.tolist(),
            "se": self.se.tolist(),
            "critical_values": self.critical_values.tolist(),
            "degenerate_fraction": self.degenerate_fraction.tolist(),
            "flagged": self.flagged,
            "metadata": self.metadata,
        }


def warp_speed_study(config):
    """Warp-speed Monte Carlo estimate of rejection rates.

    Each replication draws one data set and one parametric-bootstrap
    resample; the ``(1 - alpha)``-quantile of the pooled resample statistics
    of a cell is that cell's critical value.
    """
    t0 = time.perf_counter()
    pairs = simulate_pairs(config)
    m = config.m
    n_alt, n_stat = len(config.alternatives), len(config.statistics)
    rates = np.empty((n_alt, n_stat))
    crit = np.empty((n_alt, n_stat))
    degen = np.empty(n_alt)
    for a, (t, ts, dg) in enumerate(pairs):
        degen[a] = dg.mean()
        for j in range(n_stat):
            crit[a, j] = order_statistic_quantile(ts[:, j], config.alpha)
            rates[a, j] = 100.0 * np.mean(t[:, j] > crit[a, j])
    p = rates / 100.0
    se = 100.0 * np.sqrt(p * (1.0 - p) / m)
    from . import __version__

    meta = dict(config.to_dict(), workers=config.workers, backend=BACKEND,
                version=__version__, duration_s=time.perf_counter() - t0)
    return PowerTable(
        alternatives=[a.label for a in config.alternatives],
        statistics=[k.label for k in config.statistics],
        rates=rates,
        se=se,
        degenerate_fraction=degen,
        critical_values=crit,
        metadata=meta,
    )


def default_workers():
    env = os.environ.get("GOF_THREADS")
    if env:
        return max(1, int(env))
    return 1
