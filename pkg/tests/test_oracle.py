import numpy as np
import pytest

from exact_ipe import oracle
from exact_ipe.analysis import random_frusta
from exact_ipe.baseline_encoding import pe_batch
from exact_ipe.errors import InvalidInputError, UnsupportedRegionError
from exact_ipe.geometry import CameraPose, Frustum, box_frustum, frustum_from_pixel, frustum_volume
from exact_ipe.oracle import (
    CHUNK,
    _encoding_sums,
    decompose,
    is_convex,
    mc_encoding,
    mc_moments,
    polyhedron_moments,
    sample_uniform,
)


class TestDecompose:
    def test_unit_cube(self):
        td = decompose(box_frustum(0.0, 1.0))
        assert td.total_volume == pytest.approx(1.0, abs=1e-12)
        assert np.all(td.volumes > 0.0)

    def test_square_pyramid(self):
        f = frustum_from_pixel(CameraPose.identity(1.0), [0, 0, 1], 1.0, 2.0)
        assert decompose(f).total_volume == pytest.approx(7.0 / 3.0, abs=1e-12)

    def test_random_frusta_match_surface_volume(self):
        for v in random_frusta(1000, 10).vertices:
            td = decompose(Frustum(v))
            ref = frustum_volume(v)
            assert abs(td.total_volume - ref) <= 1e-9 * ref
            assert np.all(td.volumes > 0.0)

    def test_non_convex_rejected(self):
        v = box_frustum(0.0, 1.0).vertices.copy()
        v[6] = [0.5, 0.5, 0.4]  # push a back corner through the box
        assert not is_convex(v)
        with pytest.raises(UnsupportedRegionError):
            decompose(Frustum(v))


class TestSampleUniform:
    def test_cube_mean(self):
        n = 1_000_000
        x = sample_uniform(decompose(box_frustum(0.0, 1.0)), n, seed=0)
        assert x.shape == (n, 3)
        assert np.all(np.abs(x.mean(axis=0) - 0.5) <= 3 * (1 / np.sqrt(12)) / np.sqrt(n))

    def test_containment(self):
        for i, v in enumerate(random_frusta(20, 11).vertices):
            td = decompose(Frustum(v))
            assert np.all(td.contains(sample_uniform(td, 20_000, seed=i)))

    def test_deterministic(self):
        td = decompose(box_frustum(-1.0, 2.0))
        assert np.array_equal(sample_uniform(td, 1000, 7), sample_uniform(td, 1000, 7))
        assert not np.array_equal(sample_uniform(td, 1000, 7), sample_uniform(td, 1000, 8))

    def test_prefix_stable_across_chunks(self):
        td = decompose(box_frustum(0.0, 1.0))
        a = sample_uniform(td, CHUNK + 10, 3)
        b = sample_uniform(td, 2 * CHUNK, 3)
        assert np.array_equal(a[:CHUNK], b[:CHUNK])

    def test_invalid_n(self):
        with pytest.raises(InvalidInputError):
            sample_uniform(decompose(box_frustum(0.0, 1.0)), 0, 0)


class TestMcEncoding:
    def test_cube(self):
        est = mc_encoding(box_frustum(-1.0, 1.0), 1, 1_000_000, seed=0)
        cos = est.mean[3:]
        sin = est.mean[:3]
        assert np.all(np.abs(cos - np.sin(1.0)) <= 3 * est.std_error[3:])
        assert np.all(np.abs(sin) <= 3 * est.std_error[:3])

    def test_fused_kernel_matches_numpy(self):
        # the compiled kernel must reproduce point encodings of the very same
        # samples that sample_uniform draws
        td = decompose(Frustum(random_frusta(1, 12).vertices[0]))
        L = 6
        sums = _encoding_sums(td, L, 5000, 4, 0)
        x = sample_uniform(td, 5000, 4)
        ref = pe_batch(x, L + 1).sum(axis=0)
        assert np.allclose(sums[:, 0].ravel(), ref[: 3 * (L + 1)], atol=1e-9)
        assert np.allclose(sums[:, 1].ravel(), ref[3 * (L + 1) :], atol=1e-9)

    def test_thin_frustum_finite(self):
        f = frustum_from_pixel(CameraPose.identity(0.01), [0, 0, 1], 0.1, 0.1 + 5e-4)
        est = mc_encoding(f, 4, 100_000, seed=1)
        assert np.all(np.isfinite(est.mean)) and np.all(est.std_error < 1e-3)

    def test_disjoint_seeds_agree(self):
        f = Frustum(random_frusta(1, 13).vertices[0])
        a = mc_encoding(f, 5, 200_000, seed=1)
        b = mc_encoding(f, 5, 200_000, seed=2)
        assert np.all(np.abs(a.mean - b.mean) <= 4 * np.hypot(a.std_error, b.std_error))

    def test_standard_error_scaling(self):
        f = Frustum(random_frusta(1, 14).vertices[0])
        a = mc_encoding(f, 3, 100_000, seed=0)
        b = mc_encoding(f, 3, 400_000, seed=0)
        ratio = a.std_error / b.std_error
        assert np.all((ratio >= 1.8) & (ratio <= 2.2))

    def test_jobs_do_not_change_result(self):
        f = Frustum(random_frusta(1, 15).vertices[0])
        a = mc_encoding(f, 3, 3 * CHUNK + 5, seed=9, jobs=1)
        b = mc_encoding(f, 3, 3 * CHUNK + 5, seed=9, jobs=2)
        assert np.array_equal(a.mean, b.mean) and np.array_equal(a.std_error, b.std_error)
        assert a.n_samples == 3 * CHUNK + 5 and a.seed == 9


class TestMoments:
    def test_symmetric_axis(self):
        est = mc_moments([0, 0, 1], [0, 0, 0], 0.1, 1.0, 2.0, 500_000, seed=0)
        off = np.abs(est.cov[~np.eye(3, dtype=bool)])
        se = est.cov_se[~np.eye(3, dtype=bool)]
        assert np.all(off <= 3.5 * se)

    def test_thin_slab_mean(self):
        est = mc_moments([0, 0, 1], [0, 0, 0], 0.1, 1.0, 1.0 + 1e-6, 200_000, seed=0)
        assert np.all(np.abs(est.mean - [0, 0, 1.0]) <= 3 * est.mean_se + 1e-6)

    def test_acceptance_rate_at_least_one_third(self):
        # cylinder-slab rejection keeps E[(t / t1)**2] >= 1/3 of candidates
        est = mc_moments([0, 0, 1], [0, 0, 0], 0.1, 1e-6, 1.0, 100_000, seed=0)
        assert est.acceptance == pytest.approx(1.0 / 3.0, abs=0.01)

    def test_low_acceptance_warns(self, monkeypatch):
        real = oracle._moment_sums

        def sparse(*args):
            x, _ = real(*args)
            return x[:5], 5

        monkeypatch.setattr(oracle, "_moment_sums", sparse)
        with pytest.warns(RuntimeWarning, match="accepted only"):
            mc_moments([0, 0, 1], [0, 0, 0], 0.1, 0.5, 1.0, 20_000, seed=0)

    def test_polyhedron_moments_box(self):
        mean, cov = polyhedron_moments(box_frustum([0, 0, 0], [1, 2, 3]))
        assert np.allclose(mean, [0.5, 1.0, 1.5], atol=1e-14)
        assert np.allclose(cov, np.diag([1, 4, 9]) / 12.0, atol=1e-14)

    def test_polyhedron_moments_against_samples(self):
        f = Frustum(random_frusta(1, 16).vertices[0])
        mean, cov = polyhedron_moments(f)
        x = sample_uniform(decompose(f), 400_000, seed=0)
        se = x.std(axis=0) / np.sqrt(len(x))
        assert np.all(np.abs(x.mean(axis=0) - mean) <= 4 * se)
        assert np.allclose(np.cov(x.T), cov, rtol=0.02, atol=1e-3 * np.max(np.diag(cov)))
