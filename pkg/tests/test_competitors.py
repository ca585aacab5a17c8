import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from zetagof.competitors import (
    _meintanis_integrand,
    ben_profile,
    ben_statistic,
    cvm_henze,
    ksd_kernel,
    ksd_yang,
    meintanis,
)
from zetagof.distributions import RngStream, ZetaModel, sample_zeta
from zetagof.errors import DomainError
from zetagof.estimation import mle_fit
from zetagof.special import zeta_derivative

samples = st.lists(st.integers(1, 80), min_size=2, max_size=40)


def test_cvm_single_one():
    assert cvm_henze([1], 2.0) == pytest.approx((1 - 6 / math.pi**2) ** 2, rel=1e-12)
    assert cvm_henze([1], 2.0) == pytest.approx(0.1537211575, abs=1e-10)


def test_cvm_vanishes_as_model_concentrates():
    vals = [cvm_henze([1] * 20, s) for s in (2.0, 5.0, 10.0, 30.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-15


def test_ksd_two_point():
    # pairs (1, 2) and (2, 1); K_n = 2 so tau(1) = 2, tau(2) = 1
    s = 2.0
    s1, s2 = 1 - (1 / 2) ** s, 1 - (2 / 1) ** s
    e = math.exp(-0.5)

    def kappa(sx, sy, kxy, kx_ry, krx_y, krx_ry):
        return sx * kxy * sy - sx * (kxy - kx_ry) - (kxy - krx_y) * sy + (kxy - krx_y - kx_ry + krx_ry)

    # rho(1) = 2, rho(2) = 1: k(1,2) = e, k(1,1) = 1, k(2,2) = 1, k(2,1) = e
    k12 = kappa(s1, s2, e, 1.0, 1.0, e)
    k21 = kappa(s2, s1, e, 1.0, 1.0, e)
    hand = (k12 + k21) / 2
    assert ksd_kernel(1, 2, s, 2) == pytest.approx(k12, rel=1e-14)
    assert ksd_yang([1, 2], s) == pytest.approx(hand, rel=1e-14)
    assert ksd_yang([1, 2], s) == pytest.approx(-3.036938680574733, rel=1e-12)


def test_ksd_constant_sample():
    assert ksd_yang([3, 3, 3], 2.0) == pytest.approx(ksd_kernel(3, 3, 2.0, 3), rel=1e-13)


def test_ksd_needs_two():
    with pytest.raises(DomainError):
        ksd_yang([4], 2.0)


def test_ksd_against_pairwise_loop():
    x = sample_zeta(ZetaModel(2.0), 40, RngStream(3, 0))
    s = mle_fit(x).s_hat
    top = int(x.max())
    ref = sum(ksd_kernel(a, b, s, top) for i, a in enumerate(x) for j, b in enumerate(x) if i != j)
    assert ksd_yang(x, s) == pytest.approx(ref / (x.size * (x.size - 1)), rel=1e-11)


@pytest.mark.slow
def test_ksd_null_band():
    m = ZetaModel(2.0)
    x = sample_zeta(m, 200, RngStream(4, 0))
    stat = ksd_yang(x, mle_fit(x).s_hat)
    boot = []
    for r in range(200):
        y = sample_zeta(m, 200, RngStream(4, 1, r))
        boot.append(ksd_yang(y, mle_fit(y).s_hat))
    assert abs(stat) < 10 * np.std(boot)


def test_meintanis_all_ones():
    s, b = 2.0, 1.0
    z = zeta_derivative(s)
    ref, _ = integrate.quad(lambda t: (z - zeta_derivative(s + t)) ** 2 * math.exp(-b * t), 0, np.inf,
                            epsabs=1e-13, epsrel=1e-12)
    got = meintanis([1] * 5, s, b)
    assert got == pytest.approx(5 * ref, abs=1e-8)


def test_meintanis_population_transform_is_zero():
    # with weights equal to the pmf, M_n becomes zeta(s + t) / zeta(s)
    s = 3.0
    m = ZetaModel(s)
    k = np.arange(1, 200_001, dtype=float)
    t = np.array([0.1, 0.5, 2.0, 7.0])
    vals = _meintanis_integrand(t, k, m.pmf(k), s, m.zeta0)
    assert np.max(vals) < 1e-18


def test_meintanis_decreases_in_beta():
    x = sample_zeta(ZetaModel(2.0), 100, RngStream(6, 0))
    s = mle_fit(x).s_hat
    vals = [meintanis(x, s, b) for b in (1, 2, 4)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_meintanis_nodes_agree():
    x = [1, 1, 2, 5, 1, 3]
    assert meintanis(x, 1.8, 2.0, nodes=32) == pytest.approx(meintanis(x, 1.8, 2.0, nodes=96), abs=1e-8)


def test_meintanis_domain():
    with pytest.raises(DomainError):
        meintanis([1, 2], 2.0, 0.0)
    with pytest.raises(DomainError):
        cvm_henze([1, 2], 1.0)


def test_ben_single_one():
    assert ben_statistic([1], 1.0) == pytest.approx(0.25, abs=1e-15)
    for s in (1.5, 2.0, 3.3):
        assert ben_statistic([1], s) == pytest.approx(0.5 ** (2 * s), rel=1e-12)


def test_ben_matches_profile():
    x = np.array([1, 1, 2, 4, 4, 9])
    e, rho = ben_profile(x, 2.0)
    assert ben_statistic(x, 2.0) == pytest.approx(np.sum((e - rho) ** 2), rel=1e-12)


def test_ben_decay_under_null():
    m = ZetaModel(3.0)
    n = 10**5
    for r in range(5):
        x = sample_zeta(m, n, RngStream(13, r))
        assert ben_statistic(x, mle_fit(x).s_hat) < 10 / n


@pytest.mark.slow
def test_cvm_bounded_under_null():
    m = ZetaModel(2.0)
    worst = max(
        cvm_henze(x, mle_fit(x).s_hat)
        for x in (sample_zeta(m, 10**5, RngStream(14, r)) for r in range(100))
    )
    assert worst < 5


@settings(max_examples=40, deadline=None)
@given(samples, st.floats(1.2, 5.0))
def test_nonnegative_and_permutation_invariant(values, s):
    rev = values[::-1]
    for fn in (cvm_henze, ben_statistic):
        a = fn(values, s)
        assert a >= 0
        assert fn(rev, s) == pytest.approx(a, rel=1e-12, abs=1e-300)
    m = meintanis(values, s, 1.5)
    assert m >= 0 and meintanis(rev, s, 1.5) == pytest.approx(m, rel=1e-12, abs=1e-300)
    assert ksd_yang(rev, s) == pytest.approx(ksd_yang(values, s), rel=1e-10, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.floats(1.1, 5.0))
def test_ksd_kernel_symmetric(a, b, s):
    top = max(a, b) + 3
    assert ksd_kernel(a, b, s, top) == pytest.approx(ksd_kernel(b, a, s, top), rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(samples, st.floats(1.1, 5.0))
def test_ben_profile_nonincreasing(values, s):
    e, _ = ben_profile(values, s)
    assert np.all(np.diff(e) <= 1e-15)
