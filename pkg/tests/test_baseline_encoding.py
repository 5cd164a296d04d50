import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exact_ipe.analysis import random_rotations
from exact_ipe import baseline_encoding
from exact_ipe.baseline_encoding import (
    GaussianRegion,
    cone_moments,
    contract_gaussian,
    contraction_jacobian,
    frequency_lift,
    gaussian_ipe,
    gaussian_ipe_batch,
    pe,
    square_pyramid_eipe,
)
from exact_ipe.errors import DomainError, InvalidCovarianceError, InvalidInputError
from exact_ipe.exact_encoding import eipe_frustum
from exact_ipe.geometry import CameraPose, contract_point, frustum_from_pixel, rotation_matrix
from exact_ipe.oracle import mc_moments


def numeric_jacobian(x, h=1e-5):
    J = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[:, j] = (contract_point(x + e) - contract_point(x - e)) / (2 * h)
    return J


class TestGaussianRegion:
    def test_rejects_asymmetric(self):
        S = np.eye(3)
        S[0, 1] = 1e-6
        with pytest.raises(InvalidCovarianceError):
            GaussianRegion(np.zeros(3), S)

    def test_rejects_indefinite(self):
        with pytest.raises(InvalidCovarianceError):
            GaussianRegion(np.zeros(3), np.diag([1.0, -1e-3, 1.0]))

    def test_rejects_bad_shapes(self):
        with pytest.raises(InvalidInputError):
            GaussianRegion(np.zeros(2), np.eye(3))


def test_frequency_lift():
    P = frequency_lift(3)
    x = np.array([0.3, -1.2, 2.5])
    lifted = (P @ x).reshape(3, 3)
    for l in range(3):
        assert np.array_equal(lifted[l], 2.0**l * x)


class TestPe:
    def test_origin(self):
        enc = pe([0.0, 0.0, 0.0], 2)
        assert np.all(enc.sin == 0.0) and np.all(enc.cos == 1.0)

    def test_pi(self):
        enc = pe([np.pi, 0.0, 0.0], 1)
        assert abs(enc.sin[0, 0]) < 1e-15 and enc.cos[0, 0] == -1.0

    def test_componentwise(self):
        x = np.array([0.3, -0.2, 1.1])
        enc = pe(x, 3)
        for l in range(3):
            for k in range(3):
                assert enc.sin[l, k] == np.sin(2.0**l * x[k])
                assert enc.cos[l, k] == np.cos(2.0**l * x[k])

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            pe([0.0, np.nan, 0.0], 2)
        with pytest.raises(InvalidInputError):
            pe([0.0, 0.0, 0.0], 0)


class TestGaussianIpe:
    def test_zero_variance_is_point_encoding(self):
        assert np.array_equal(gaussian_ipe(GaussianRegion(np.zeros(3), np.zeros((3, 3))), 2).values, pe(np.zeros(3), 2).values)

    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.integers(1, 8))
    @settings(max_examples=100, deadline=None)
    def test_zero_variance_exact(self, mu, L):
        g = GaussianRegion(mu, np.zeros((3, 3)))
        assert np.array_equal(gaussian_ipe(g, L).values, pe(mu, L).values)

    def test_unit_variance(self):
        enc = gaussian_ipe(GaussianRegion(np.zeros(3), np.eye(3)), 1)
        assert enc.sin[0, 0] == 0.0
        assert enc.cos[0, 0] == pytest.approx(np.exp(-0.5), abs=1e-15)

    def test_damping_monotone(self):
        mu = np.array([0.4, -1.0, 2.2])
        prev = None
        for v in np.linspace(0.0, 50.0, 60):
            mag = np.abs(gaussian_ipe_batch(mu, np.full(3, v), 4))
            if prev is not None:
                assert np.all(mag <= prev)
            prev = mag
        assert np.all(prev < 1e-5)

    def test_only_diagonal_matters(self):
        S = np.array([[1.0, 0.5, 0.0], [0.5, 2.0, 0.3], [0.0, 0.3, 0.5]])
        a = gaussian_ipe(GaussianRegion([0.1, 0.2, 0.3], S), 3).values
        b = gaussian_ipe(GaussianRegion([0.1, 0.2, 0.3], np.diag(np.diag(S))), 3).values
        assert np.array_equal(a, b)


class TestConeMoments:
    def test_axis_symmetric(self):
        g = cone_moments([0, 0, 1], [0, 0, 0], 0.1, 1.0, 2.0)
        off = g.Sigma[~np.eye(3, dtype=bool)]
        assert np.all(off == 0.0)
        assert g.mu[0] == g.mu[1] == 0.0

    def test_thin_slab(self):
        r = 0.05
        g = cone_moments([0, 0, 1], [0, 0, 0], r, 2.0, 2.0 + 1e-7)
        assert g.mu[2] == pytest.approx(2.0, abs=1e-6)
        # perpendicular variance of a uniform disk of radius r * t is (r t)^2 / 4
        assert g.Sigma[0, 0] == pytest.approx((r * 2.0) ** 2 / 4, rel=1e-6)
        assert g.Sigma[2, 2] < 1e-14

    def test_thin_slab_against_sampling(self):
        est = mc_moments([0, 0, 1], [0, 0, 0], 0.05, 2.0, 2.001, 400_000, seed=0)
        g = cone_moments([0, 0, 1], [0, 0, 0], 0.05, 2.0, 2.001)
        assert np.all(np.abs(est.mean - g.mu) <= 4 * est.mean_se)
        assert np.all(np.abs(est.cov - g.Sigma) <= 4 * est.cov_se + 1e-15)

    def test_random_cones_against_sampling(self):
        rng = np.random.default_rng(2)
        for i in range(3):
            d = rng.normal(size=3)
            o = rng.uniform(-1, 1, 3)
            t0 = rng.uniform(0.5, 3)
            t1 = t0 + rng.uniform(0.1, 2)
            est = mc_moments(d, o, 0.2, t0, t1, 400_000, seed=i)
            g = cone_moments(d, o, 0.2, t0, t1)
            assert np.all(np.abs(est.mean - g.mu) <= 4.5 * est.mean_se)
            assert np.all(np.abs(est.cov - g.Sigma) <= 4.5 * est.cov_se)

    @pytest.mark.parametrize("args", [(0.1, 2.0, 1.0), (0.1, 0.0, 1.0), (0.0, 1.0, 2.0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            cone_moments([0, 0, 1], [0, 0, 0], *args)


class TestContraction:
    def test_inside_unit_ball_unchanged(self):
        g = GaussianRegion([0.3, -0.2, 0.5], np.eye(3) * 0.01)
        assert contract_gaussian(g) is g
        assert np.array_equal(contraction_jacobian(g.mu), np.eye(3))

    def test_example(self):
        out = contract_gaussian(GaussianRegion([2.0, 0.0, 0.0], np.eye(3)))
        assert np.allclose(out.mu, [1.5, 0.0, 0.0], atol=1e-15)
        J = contraction_jacobian([2.0, 0.0, 0.0])
        assert np.max(np.abs(J - numeric_jacobian(np.array([2.0, 0.0, 0.0])))) <= 1e-6
        assert np.allclose(out.Sigma, J @ J.T)

    def test_zero_covariance(self):
        out = contract_gaussian(GaussianRegion([0.0, 3.0, 4.0], np.zeros((3, 3))))
        assert np.all(out.Sigma == 0.0)

    def test_jacobian_finite_differences(self):
        rng = np.random.default_rng(0)
        dirs = rng.normal(size=(100, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = rng.uniform(1.0 + 1e-3, 10.0, 100)
        for x in dirs * radii[:, None]:
            assert np.max(np.abs(contraction_jacobian(x) - numeric_jacobian(x))) <= 1e-6


class TestSquarePyramid:
    def test_identity_pose_falls_back(self):
        pose = CameraPose.identity(0.3)
        ref = eipe_frustum(frustum_from_pixel(pose, [0, 0, 1], 1.0, 2.0), 4)
        assert np.array_equal(square_pyramid_eipe(pose, 1.0, 2.0, 4).values, ref.values)

    def test_rotated_example(self):
        pose = CameraPose(rotation_matrix([0, 0, 1], np.pi / 6), [0.1, -0.2, 0.05], 0.4)
        closed = square_pyramid_eipe(pose, 1.0, 2.0, 4).values
        general = eipe_frustum(frustum_from_pixel(pose, [0, 0, 1], 1.0, 2.0), 4).values
        assert np.max(np.abs(closed - general)) <= 1e-9

    def test_random_poses(self):
        rng = np.random.default_rng(4)
        for R in random_rotations(30, rng):
            pose = CameraPose(R, rng.uniform(-1, 1, 3), rng.uniform(0.01, 0.5))
            t0 = rng.uniform(0.2, 4)
            t1 = t0 + rng.uniform(0.05, 3)
            closed = square_pyramid_eipe(pose, t0, t1, 5).values
            general = eipe_frustum(frustum_from_pixel(pose, [0, 0, 1], t0, t1), 5).values
            assert np.max(np.abs(closed - general)) <= 1e-9

    def test_degenerate_slab_rejected(self):
        with pytest.raises(DomainError):
            square_pyramid_eipe(CameraPose.identity(0.1), 2.0 - 1e-12, 2.0, 2)

    def test_thin_pixels_against_high_precision(self, monkeypatch):
        calls = []
        real = baseline_encoding._depth_quadrature
        monkeypatch.setattr(
            baseline_encoding, "_depth_quadrature", lambda *a: calls.append(a) or real(*a)
        )
        rng = np.random.default_rng(5)
        for omega in (1e-5, 1e-3, 0.3):
            R = random_rotations(1, rng)[0]
            pose = CameraPose(R, rng.uniform(-3, 3, 3), omega)
            enc = square_pyramid_eipe(pose, 0.7, 2.9, 6)
            ref_sin, ref_cos = pyramid_reference(pose, 0.7, 2.9, 6)
            assert np.max(np.abs(enc.sin - ref_sin)) <= 1e-11
            assert np.max(np.abs(enc.cos - ref_cos)) <= 1e-11
        # the thinnest pixel needs the smooth form, the widest does not everywhere
        assert 0 < len(calls) < 3 * 3 * 6


def pyramid_reference(pose, t0, t1, L, digits=50):
    """Four-corner closed form carried out in high precision."""
    with mp.workdps(digits):
        h = mp.mpf(pose.omega) / 2
        t0, t1 = mp.mpf(t0), mp.mpf(t1)
        vol = 4 * h * h * (t1**3 - t0**3) / 3
        out_sin = np.empty((L, 3))
        out_cos = np.empty((L, 3))
        for k in range(3):
            r1, r2, r3 = (mp.mpf(float(x)) for x in pose.R[k])
            o = mp.mpf(float(pose.o[k]))
            corners = [(1, h * r1 + h * r2 + r3), (-1, -h * r1 + h * r2 + r3), (-1, h * r1 - h * r2 + r3), (1, -h * r1 - h * r2 + r3)]
            for l in range(L):
                a = mp.mpf(2) ** l
                C = sum(s * (mp.cos(a * (t1 * z + o)) - mp.cos(a * (t0 * z + o))) / z for s, z in corners)
                S = sum(s * (mp.sin(a * (t1 * z + o)) - mp.sin(a * (t0 * z + o))) / z for s, z in corners)
                pre = 1 / (a**3 * r1 * r2 * vol)
                out_sin[l, k] = float(pre * C)
                out_cos[l, k] = float(-pre * S)
    return out_sin, out_cos
