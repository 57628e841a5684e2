import numpy as np
import pytest

from lyapflow.eigen import (
    BranchCollision,
    NonConvergence,
    balance,
    eigen_derivatives,
    eigvals,
    is_hessenberg,
    leading_eigenpair,
    quadratic_derivatives,
    solve_adaptive,
)


def _sorted(ev):
    ev = np.asarray(ev)
    return ev[np.lexsort((ev.imag, ev.real))]


def _random(n, seed):
    return np.random.default_rng(seed).normal(size=(n, n))


@pytest.mark.parametrize("n,seed", [(1, 0), (2, 1), (5, 2), (17, 3), (40, 4)])
def test_kernels_match_numpy(kernels, n, seed):
    a = _random(n, seed)
    b = np.ascontiguousarray(a.copy())
    kernels.balance(b)
    kernels.orthes(b)
    assert is_hessenberg(b)
    wr, wi = kernels.hqr(np.ascontiguousarray(b))
    got = _sorted(np.asarray(wr) + 1j * np.asarray(wi))
    np.testing.assert_allclose(got, _sorted(np.linalg.eigvals(a)), atol=1e-9)


def test_backends_agree_to_rounding():
    from lyapflow import _backend

    try:
        fast = _backend.get("compiled")
    except ImportError:
        pytest.skip("compiled kernels not built")
    slow = _backend.get("python")
    a = _random(30, 9)
    outs = []
    for mod in (fast, slow):
        b = np.ascontiguousarray(a.copy())
        mod.balance(b)
        mod.orthes(b)
        wr, wi = mod.hqr(b)
        outs.append(_sorted(np.asarray(wr) + 1j * np.asarray(wi)))
    np.testing.assert_allclose(outs[0], outs[1], atol=1e-11)


def test_balance_is_a_similarity():
    a = _random(8, 5) * np.logspace(-6, 6, 8)[:, None]
    b, scale = balance(a)
    np.testing.assert_allclose(b, a * scale[None, :] / scale[:, None], rtol=1e-15)
    assert np.all(np.log2(scale) == np.round(np.log2(scale)))


def test_eigvals_special_shapes():
    assert eigvals(np.zeros((0, 0))).size == 0
    with pytest.raises(ValueError):
        eigvals(np.zeros((2, 3)))
    tri = np.diag(np.arange(6.0)) + np.diag(np.ones(5), 1) + np.diag(np.full(5, 0.5), -1)
    np.testing.assert_allclose(_sorted(eigvals(tri)), _sorted(np.linalg.eigvals(tri)), atol=1e-12)


def test_complex_leading_pair_is_reported():
    with pytest.raises(BranchCollision):
        leading_eigenpair(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_leading_pair_vectors():
    a = _random(12, 6) + np.diag(np.arange(12.0))
    p = leading_eigenpair(a)
    assert p.mu == pytest.approx(max(np.linalg.eigvals(a).real), rel=1e-12)
    assert p.residual < 1e-10
    np.testing.assert_allclose(p.left @ a, p.mu * p.left, atol=1e-10)


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(7)
    a0 = 0.5 * rng.normal(size=(10, 10)) + np.diag(5.0 * np.arange(10.0))
    a1, a2 = rng.normal(size=(2, 10, 10))
    A = lambda t: a0 + t * a1 + t * t * a2  # noqa: E731
    f, df, ddf = quadratic_derivatives(A, 0.3)
    np.testing.assert_allclose(df, a1 + 0.6 * a2, atol=1e-12)
    np.testing.assert_allclose(ddf, 2 * a2, atol=1e-12)
    m1, m2 = eigen_derivatives(leading_eigenpair(f), f, df, ddf)
    h = 1e-4
    mus = [leading_eigenpair(A(0.3 + s * h)).mu for s in (-1, 0, 1)]
    assert m1 == pytest.approx((mus[2] - mus[0]) / (2 * h), abs=1e-7)
    assert m2 == pytest.approx((mus[2] - 2 * mus[1] + mus[0]) / h**2, abs=1e-4)


def test_solve_adaptive_stops_and_fails():
    def build(N):
        j = np.arange(N + 1.0)
        return np.diag(-(j**2)) + np.diag(np.full(N, 0.1), 1) + np.diag(np.full(N, 0.1), -1), None, None

    r = solve_adaptive(build, lambda N: np.ones(N + 1), tol=1e-12)
    exact = max(np.linalg.eigvalsh(build(200)[0]))
    assert r.mu == pytest.approx(exact, abs=1e-12)
    assert r.eigvec.sum() == pytest.approx(1.0)

    def drifting(N):
        return np.diag(np.full(N, float(N))), None, None

    with pytest.raises(NonConvergence):
        solve_adaptive(drifting, lambda N: np.ones(N), Nmax=128)
    with pytest.raises(ValueError):
        solve_adaptive(build, lambda N: np.ones(N + 1), tol=0)
