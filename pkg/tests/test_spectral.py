import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetagof.distributions import ZetaModel
from zetagof.errors import DomainError
from zetagof.estimation import fisher_information
from zetagof.spectral import (
    CovarianceKernel,
    a_function,
    jacobi_basis,
    jacobi_basis_explicit,
    kernel_eval,
    kernel_trace,
    limit_quantile,
    rayleigh_ritz,
)
from zetagof.stein import g, gauss_jacobi, h


@pytest.fixture(scope="module")
def kernel2():
    return CovarianceKernel(2.0, 0.0)


def test_a_function_against_truncated_moment():
    m = ZetaModel(2.0)
    k = np.arange(1, 2_000_001, dtype=float)
    p = m.pmf(k)
    for t in (0.1, 0.5, 0.9):
        assert a_function(2.0, t) == pytest.approx(np.sum(p * g(2.0, k, t)), abs=1e-12)
    assert a_function(2.0, 1.0) == 0.0
    assert a_function(2.0, 0.0) == 0.0


def test_kernel_symmetric(kernel2):
    u = np.linspace(0.0, 1.0, 20)
    c = kernel2.matrix(u, u)
    assert np.max(np.abs(c - c.T)) < 1e-12


def test_kernel_two_routes(kernel2):
    u, v = 0.3, 0.7
    m = ZetaModel(2.0)
    k = np.arange(1, 200_001, dtype=float)
    moment = np.sum(m.pmf(k) * h(2.0, k, u) * h(2.0, k, v))
    ref = moment - a_function(2.0, u) * a_function(2.0, v) / fisher_information(2.0)
    assert kernel_eval(kernel2, u, v) == pytest.approx(ref, abs=1e-9)


def test_kernel_boundary(kernel2):
    assert kernel_eval(kernel2, 1.0, 1.0) == 0.0
    assert kernel_eval(kernel2, 0.0, 0.4) == 0.0
    with pytest.raises(DomainError):
        kernel_eval(kernel2, 1.2, 0.1)
    with pytest.raises(DomainError):
        CovarianceKernel(1.0)


def test_kernel_psd(kernel2):
    u = np.linspace(0.0, 1.0, 30)
    assert np.min(np.linalg.eigvalsh(kernel2.matrix(u, u))) >= -1e-8


def test_jacobi_examples():
    t = np.linspace(0, 1, 7)
    np.testing.assert_allclose(jacobi_basis(0, 0, t), 1.0)
    assert jacobi_basis(1, 0, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert jacobi_basis(1, 0, 0.9) == pytest.approx(np.sqrt(3) * 0.8, rel=1e-14)
    with pytest.raises(DomainError):
        jacobi_basis(-1, 0, 0.5)


@pytest.mark.parametrize("beta", [0.0, 2.0, 3.5])
def test_jacobi_orthonormal(beta):
    t, w = gauss_jacobi(40, beta)
    phi = np.stack([jacobi_basis(i, beta, t) for i in range(9)])
    gram = (phi * w) @ phi.T
    assert np.max(np.abs(gram - np.eye(9))) < 1e-10


@pytest.mark.parametrize("beta", [0.0, 1.0, 2.5])
def test_jacobi_matches_explicit_sum(beta):
    t = np.linspace(0, 1, 25)
    for n in range(9):
        np.testing.assert_allclose(jacobi_basis(n, beta, t), jacobi_basis_explicit(n, beta, t), atol=1e-10)


def test_rayleigh_ritz_trace_and_order(kernel2):
    r20 = rayleigh_ritz(kernel2, 20)
    lam = r20.eigenvalues
    assert np.all(np.diff(lam) <= 0) and np.all(lam >= 0)
    assert r20.trace_residual < 1e-4
    r10 = rayleigh_ritz(kernel2, 10)
    assert lam[0] >= r10.eigenvalues[0] - 1e-15
    one = rayleigh_ritz(kernel2, 1)
    assert one.eigenvalues.size == 1 and one.eigenvalues[0] <= one.trace
    d = r20.to_dict()
    assert d["schema"] == 1 and len(d["eigenvalues"]) == 20


def test_trace_residual_decreases(kernel2):
    res = [rayleigh_ritz(kernel2, d).trace_residual for d in (5, 10, 20, 40)]
    # at dim 20 the residual reaches rounding level, so allow ties there
    assert res[0] > res[1] > res[2] or res[2] < 1e-13
    assert res[1] > res[2] - 1e-14 and res[2] < 1e-12 and res[3] < 1e-12


def test_rayleigh_ritz_validation(kernel2):
    with pytest.raises(DomainError):
        rayleigh_ritz(kernel2, 0)
    with pytest.raises(DomainError):
        rayleigh_ritz(kernel2, 20, quad_order=30)


def test_weighted_kernel_trace():
    k = CovarianceKernel(3.0, 2.0)
    r = rayleigh_ritz(k, 15)
    assert r.trace_residual < 1e-6
    assert kernel_trace(k) < kernel_trace(CovarianceKernel(3.0, 0.0))


def test_limit_quantile_single_term():
    # 0.5 * chi2(1) has 95% quantile 0.5 * 3.841...
    assert limit_quantile([0.5], 0.95, draws=400_000) == pytest.approx(0.5 * 3.8414588, rel=0.01)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_kernel_eval_symmetric_property(u, v):
    k = CovarianceKernel(2.5, 1.0)
    assert kernel_eval(k, u, v) == pytest.approx(kernel_eval(k, v, u), abs=1e-13)
