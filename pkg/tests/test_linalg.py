import numpy as np
import pytest
import scipy.linalg

from blsnav import linalg
from blsnav.errors import InputError, NumericError
from blsnav.linalg import orthogonality_residual, psd_sqrt, svd, trace_sqrt_product
from oracles import matrix_with_spectrum, random_orthogonal


def check_contract(J, s, tol=1e-10):
    n = J.shape[0]
    scale = max(np.linalg.norm(J), 1e-300)
    assert np.linalg.norm(J - s.reconstruct()) / scale <= tol
    assert orthogonality_residual(s.u) <= tol * n
    assert orthogonality_residual(s.v) <= tol * n
    assert np.all(np.diff(s.sigma) <= 0.0)
    assert np.all(s.sigma >= 0.0)


def test_identity():
    s = svd(np.eye(2))
    np.testing.assert_array_equal(s.sigma, [1.0, 1.0])
    np.testing.assert_array_equal(s.u, np.eye(2))
    np.testing.assert_array_equal(s.v, np.eye(2))


def test_diagonal_is_sorted():
    s = svd(np.diag([1.0, 3.0]))
    np.testing.assert_allclose(s.sigma, [3.0, 1.0], rtol=1e-15)
    np.testing.assert_allclose(s.u, [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(s.v, [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)


def test_rank_one():
    s = svd([[1.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(s.sigma, [2.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(s.u[:, 0], [2**-0.5, 2**-0.5], rtol=1e-14)
    assert orthogonality_residual(s.u) <= 1e-14
    check_contract(np.ones((2, 2)), s)


def test_zero_matrix():
    s = svd(np.zeros((3, 3)))
    np.testing.assert_array_equal(s.sigma, np.zeros(3))
    assert orthogonality_residual(s.u) <= 1e-15
    assert orthogonality_residual(s.v) <= 1e-15


def test_negative_diagonal_sign_convention():
    s = svd(np.diag([-2.0, 1.0]))
    np.testing.assert_allclose(s.sigma, [2.0, 1.0])
    # u columns have a positive largest entry; v absorbs the sign
    np.testing.assert_allclose(s.u, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(s.v, np.diag([-1.0, 1.0]), atol=1e-15)


def test_random_matrices_match_numpy(rng):
    for n in (1, 2, 3, 8, 16, 24):
        for _ in range(5):
            J = rng.standard_normal((n, n))
            s = svd(J)
            check_contract(J, s)
            np.testing.assert_allclose(s.sigma, np.linalg.svd(J, compute_uv=False), rtol=1e-12, atol=1e-13)


def test_sign_convention(rng):
    for _ in range(20):
        s = svd(rng.standard_normal((6, 6)))
        idx = np.argmax(np.abs(s.u), axis=0)
        assert np.all(s.u[idx, np.arange(6)] > 0.0)


def test_prescribed_spectrum(rng):
    sigma = np.array([5.0, 2.0, 1.0, 0.3, 0.049, 1e-6])
    J = matrix_with_spectrum(rng, sigma)
    s = svd(J)
    np.testing.assert_allclose(s.sigma, sigma, rtol=1e-9, atol=1e-14)
    check_contract(J, s)


def test_rank_deficient_completion(rng):
    q = random_orthogonal(rng, 5)
    J = q[:, :2] @ rng.standard_normal((2, 5))
    s = svd(J)
    check_contract(J, s)
    assert np.all(s.sigma[2:] <= 1e-13 * s.sigma[0])
    assert orthogonality_residual(s.u) <= 1e-12


def test_repeated_singular_values(rng):
    J = random_orthogonal(rng, 6) * 2.0
    s = svd(J)
    np.testing.assert_allclose(s.sigma, np.full(6, 2.0), rtol=1e-14)
    check_contract(J, s)


def test_determinism(rng):
    J = rng.standard_normal((16, 16))
    a, b = svd(J), svd(J.copy())
    for x, y in ((a.u, b.u), (a.sigma, b.sigma), (a.v, b.v)):
        assert x.tobytes() == y.tobytes()


def test_outputs_are_read_only():
    s = svd(np.eye(3))
    with pytest.raises(ValueError):
        s.sigma[0] = 2.0


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.ones(3), np.array([[1.0, np.nan], [0.0, 1.0]])])
def test_invalid_input(bad):
    with pytest.raises(InputError):
        svd(bad)


def test_non_convergence_reports_sweeps(monkeypatch, rng):
    monkeypatch.setattr(linalg, "SWEEPS_PER_DIM", 1 / 16)
    with pytest.raises(NumericError) as err:
        svd(rng.standard_normal((16, 16)))
    assert err.value.iteration == 1


# --- trace term ---------------------------------------------------------------


def test_trace_sqrt_identity():
    assert trace_sqrt_product(np.eye(3), np.eye(3)) == pytest.approx(3.0, abs=1e-12)


def test_trace_sqrt_commuting_diagonals():
    assert trace_sqrt_product(np.diag([4.0, 1.0]), np.diag([1.0, 4.0])) == pytest.approx(4.0, abs=1e-12)


def random_psd(rng, m, rank=None):
    a = rng.standard_normal((m, rank or m))
    return a @ a.T


def test_trace_sqrt_matches_sqrtm(rng):
    for _ in range(20):
        c1, c2 = random_psd(rng, 5), random_psd(rng, 5)
        expected = np.trace(scipy.linalg.sqrtm(c1 @ c2)).real
        assert trace_sqrt_product(c1, c2) == pytest.approx(expected, rel=1e-8)


def test_trace_sqrt_symmetric_in_arguments(rng):
    for _ in range(20):
        c1, c2 = random_psd(rng, 4, 2), random_psd(rng, 4)
        assert trace_sqrt_product(c1, c2) == pytest.approx(trace_sqrt_product(c2, c1), rel=1e-8, abs=1e-10)


def test_trace_sqrt_singular_inputs(rng):
    c = random_psd(rng, 4, 1)
    assert trace_sqrt_product(c, c) == pytest.approx(np.trace(c), rel=1e-9)
    assert trace_sqrt_product(np.zeros((3, 3)), np.eye(3)) == 0.0


def test_trace_sqrt_rejects_asymmetric():
    with pytest.raises(InputError):
        trace_sqrt_product(np.array([[1.0, 0.5], [0.0, 1.0]]), np.eye(2))


def test_trace_sqrt_rejects_indefinite():
    with pytest.raises(InputError):
        trace_sqrt_product(np.eye(2), np.diag([1.0, -1.0]))


def test_trace_sqrt_rejects_shape_mismatch():
    with pytest.raises(InputError):
        trace_sqrt_product(np.eye(2), np.eye(3))


def test_psd_sqrt(rng):
    c = random_psd(rng, 5)
    r = psd_sqrt(c)
    np.testing.assert_allclose(r @ r, c, atol=1e-10 * np.abs(c).max())
    np.testing.assert_allclose(r, r.T, atol=1e-12)
