import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blsnav import basis
from blsnav.errors import InputError
from blsnav.linalg import SingularSystem
from oracles import linear_net, random_orthogonal


def frame_from_parts(u, sigma, v, alpha=1.0, sv_threshold=0.05, w=None):
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0]
    return basis.LocalFrame(
        z=np.zeros(n),
        w=np.zeros(n) if w is None else np.asarray(w, dtype=float),
        sys=SingularSystem(np.asarray(u, float), sigma, np.asarray(v, float)),
        alpha=alpha,
        sv_threshold=sv_threshold,
    )


def random_frame(rng, n, alpha=1.0, sv_threshold=0.05):
    sigma = np.sort(rng.uniform(0.1, 3.0, n))[::-1]
    return frame_from_parts(random_orthogonal(rng, n), sigma, random_orthogonal(rng, n), alpha, sv_threshold)


def test_compute_frame_identity_net():
    frame = basis.compute_frame(linear_net(np.eye(2)), np.zeros(2))
    np.testing.assert_array_equal(frame.sys.sigma, [1.0, 1.0])
    np.testing.assert_array_equal(frame.sys.u, np.eye(2))


def test_compute_frame_diag_net():
    frame = basis.compute_frame(linear_net(np.diag([3.0, 1.0])), np.zeros(2))
    np.testing.assert_allclose(frame.sys.sigma, [3.0, 1.0])
    np.testing.assert_allclose(frame.sys.u, np.eye(2))


def test_clamp_examples():
    eye = np.eye(2)
    f = frame_from_parts(eye, [1.0, 1.0], eye, alpha=1.0)
    np.testing.assert_array_equal(basis.clamp_coefficients(f, [2.0, -0.5]), [1.0, -0.5])
    f = frame_from_parts(eye, [2.0, 0.5], eye, alpha=1.0)
    np.testing.assert_array_equal(basis.clamp_coefficients(f, [3.0, 3.0]), [2.0, 0.5])
    f = frame_from_parts(eye, [1.0, 0.04], eye, alpha=1.0)
    np.testing.assert_array_equal(basis.clamp_coefficients(f, [0.5, 0.5]), [0.5, 0.0])


def test_threshold_boundary_is_inclusive():
    eye = np.eye(2)
    f = frame_from_parts(eye, [1.0, 0.05], eye)
    np.testing.assert_array_equal(f.retained, [True, False])
    np.testing.assert_array_equal(f.sigma_pinv, [1.0, 0.0])


def test_coefficients_round_trip(rng):
    f = random_frame(rng, 6)
    dw = rng.standard_normal(6)
    np.testing.assert_allclose(basis.reconstruct_delta(f, basis.coefficients(f, dw)), dw, atol=1e-14)


def test_contains_boundary():
    eye = np.eye(2)
    f = frame_from_parts(eye, [1.0, 1.0], eye)
    assert basis.contains(f, [1.0, 1.0])
    assert basis.contains(f, [-1.0, 0.3])
    assert not basis.contains(f, [1.0 + 1e-12, 0.0])
    assert basis.contains(f, [1.0 + 1e-12, 0.0], tol=1e-9)


def test_contains_thresholded_direction_has_no_width():
    eye = np.eye(2)
    f = frame_from_parts(eye, [1.0, 0.01], eye)
    assert basis.contains(f, [0.5, 0.0])
    assert not basis.contains(f, [0.0, 0.005])


def test_clamp_idempotent(rng):
    for _ in range(20):
        f = random_frame(rng, 5)
        a = basis.clamp_coefficients(f, 5.0 * rng.standard_normal(5))
        np.testing.assert_array_equal(basis.clamp_coefficients(f, a), a)


def test_clamp_result_is_in_box(rng):
    for _ in range(50):
        f = random_frame(rng, 6, alpha=rng.uniform(0.1, 3.0))
        target = f.w + 10.0 * rng.standard_normal(6)
        upd = basis.bounded_update(f, target)
        assert basis.contains(f, f.w + upd.delta_w, tol=1e-12)


def test_in_box_target_is_reached_exactly(rng):
    for _ in range(20):
        f = random_frame(rng, 5)
        lam = rng.uniform(-1.0, 1.0, 5) * f.half_widths
        target = f.w + lam @ f.sys.u.T
        upd = basis.bounded_update(f, target)
        np.testing.assert_allclose(upd.delta_w, target - f.w, atol=1e-13)


def test_projection_is_closest_on_grid(rng):
    # small exhaustive check; the large random-sample version is an acceptance test
    f = random_frame(rng, 2)
    target = f.w + 5.0 * rng.standard_normal(2)
    upd = basis.bounded_update(f, target)
    best = np.linalg.norm(f.w + upd.delta_w - target)
    g = np.linspace(-1.0, 1.0, 201)
    lam = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2) * f.half_widths
    dists = np.linalg.norm(f.w + lam @ f.sys.u.T - target, axis=1)
    assert best <= dists.min() + 1e-12


def test_latent_delta_maps_back_through_jacobian(rng):
    n = 5
    J = rng.standard_normal((n, n))
    f = basis.frame_from_jacobian(np.zeros(n), np.zeros(n), J)
    a_c = basis.clamp_coefficients(f, rng.standard_normal(n))
    dz = basis.latent_delta(f, a_c)
    np.testing.assert_allclose(J @ dz, basis.reconstruct_delta(f, a_c), atol=1e-12)


def test_latent_delta_ignores_thresholded_directions():
    eye = np.eye(3)
    f = frame_from_parts(eye, [2.0, 1.0, 0.01], eye)
    np.testing.assert_array_equal(basis.latent_delta(f, [1.0, 1.0, 1.0]), [0.5, 1.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 2.0), st.floats(1.0, 4.0))
def test_alpha_monotone(seed, alpha, factor):
    rng = np.random.default_rng(seed)
    f = random_frame(rng, 4)
    a = 5.0 * rng.standard_normal(4)
    small = basis.clamp_coefficients(basis.LocalFrame(f.z, f.w, f.sys, alpha, f.sv_threshold), a)
    big = basis.clamp_coefficients(basis.LocalFrame(f.z, f.w, f.sys, alpha * factor, f.sv_threshold), a)
    assert np.all(np.abs(small) <= np.abs(big))


@pytest.mark.parametrize("alpha,thr", [(0.0, 0.05), (-1.0, 0.05), (1.0, -0.1)])
def test_invalid_frame_parameters(alpha, thr):
    with pytest.raises(InputError):
        basis.compute_frame(linear_net(np.eye(2)), np.zeros(2), alpha, thr)


def test_shape_mismatch():
    f = frame_from_parts(np.eye(2), [1.0, 1.0], np.eye(2))
    with pytest.raises(InputError):
        basis.coefficients(f, np.zeros(3))
