"""Spectral calculus on the torus: exactness, quadrature, wedge density, dumps."""

import numpy as np
import pytest

from sigma2lab import torus
from sigma2lab.errors import ConfigurationError
from sigma2lab.torus import (
    ScalarField,
    complex_hessian,
    constant_field,
    d_holo,
    grad_sq,
    integrate,
    laplacian,
    load_field,
    make_geometry,
    mixed_wedge_density,
    random_band_limited,
    save_field,
    spectral_derivatives,
    zero_mean,
)


def mode_field(geom, axis, periods=1):
    x = geom.coordinate(axis) * np.ones(geom.shape)
    return x, 2.0 * np.pi * periods / geom.period


class TestGeometry:
    def test_node_counts_and_unit_volume(self):
        g2 = make_geometry(2, 16)
        assert g2.node_count == 16 ** 4
        assert integrate(constant_field(g2, 1.0)) == 1.0
        g3 = make_geometry(3, 8)
        assert g3.node_count == 8 ** 6
        assert integrate(constant_field(g3, 1.0)) == 1.0

    def test_rejects_bad_grids(self):
        with pytest.raises(ConfigurationError):
            make_geometry(2, 10)  # not a power of two
        with pytest.raises(ConfigurationError):
            make_geometry(2, 4)   # too coarse
        with pytest.raises(ConfigurationError):
            make_geometry(4, 16)  # unsupported dimension

    def test_field_shape_validation(self, geom2):
        with pytest.raises(ConfigurationError):
            ScalarField(geom2, np.zeros((3, 3)))
        with pytest.raises(ConfigurationError):
            ScalarField(geom2, np.full(geom2.shape, np.inf))


class TestDHolo:
    def test_cosine_mode(self, geom2):
        x, w = mode_field(geom2, 0)
        u = ScalarField(geom2, np.cos(w * x))
        got = d_holo(u, 1)
        want = -0.5 * w * np.sin(w * x)  # d/dx of cos, halved; no y dependence
        assert np.max(np.abs(got - want)) < 1e-11

    def test_constant_is_flat(self, geom2):
        assert np.max(np.abs(d_holo(constant_field(geom2, 3.7), 1))) == 0.0

    def test_wrong_axis_kills_derivative(self, geom2):
        x, w = mode_field(geom2, 2)  # depends on x_2 only
        u = ScalarField(geom2, np.sin(w * x))
        assert np.max(np.abs(d_holo(u, 1))) < 1e-12

    def test_index_range(self, geom2):
        with pytest.raises(ValueError):
            d_holo(constant_field(geom2, 0.0), 3)

    def test_y_derivative_imaginary_part(self, geom2):
        # D_1 = (d/dx_1 - i d/dy_1)/2: a pure y_1 mode lands in the imaginary part
        y, w = mode_field(geom2, 1)
        u = ScalarField(geom2, np.cos(w * y))
        got = d_holo(u, 1)
        want = 0.5j * w * np.sin(w * y)
        assert np.max(np.abs(got - want)) < 1e-11

    def test_derivatives_integrate_to_zero(self, geom2, rng):
        u = random_band_limited(geom2, rng, 3, 1.0)
        for j in (1, 2):
            assert abs(np.mean(d_holo(u, j))) < 1e-12


class TestComplexHessian:
    def test_constant(self, geom2):
        h = complex_hessian(constant_field(geom2, 1.0))
        assert np.max(np.abs(h.matrices)) == 0.0

    def test_cosine_mode_entry(self, geom2):
        # D_1 D_1bar = (d^2/dx_1^2 + d^2/dy_1^2)/4 on real fields
        x, w = mode_field(geom2, 0)
        u = ScalarField(geom2, np.cos(w * x))
        h = complex_hessian(u).matrices
        want = -0.25 * w * w * np.cos(w * x)
        assert np.max(np.abs(h[0, 0] - want)) < 1e-10
        assert np.max(np.abs(h[0, 1])) < 1e-12

    def test_sparsity_for_single_axis_field(self, geom2):
        y, w = mode_field(geom2, 3)  # function of y_2 only
        u = ScalarField(geom2, np.sin(w * y))
        h = complex_hessian(u).matrices
        assert np.max(np.abs(h[1, 1])) > 1.0
        for j, k in ((0, 0), (0, 1), (1, 0)):
            assert np.max(np.abs(h[j, k])) < 1e-12

    def test_hermitian_at_every_node(self, geom2, rng):
        u = random_band_limited(geom2, rng, 3, 1.0)
        h = complex_hessian(u).matrices
        skew = h - np.conj(np.swapaxes(h, 0, 1))
        assert np.max(np.abs(skew)) <= 1e-13 * (1.0 + np.max(np.abs(h)))


class TestLaplacian:
    def test_constant(self, geom2):
        assert np.max(np.abs(laplacian(constant_field(geom2, 2.0)).values)) == 0.0

    def test_single_mode_eigenvalue(self, geom2):
        x, w = mode_field(geom2, 0, periods=2)
        u = ScalarField(geom2, np.cos(w * x))
        got = laplacian(u).values
        want = -0.25 * w * w * np.cos(w * x)
        assert np.max(np.abs(got - want)) < 1e-10

    def test_mean_free(self, geom2, rng):
        u = random_band_limited(geom2, rng, 3, 1.0)
        assert abs(integrate(laplacian(u))) < 1e-12

    def test_equals_hessian_trace(self, geom2, rng):
        u = random_band_limited(geom2, rng, 3, 1.0)
        dv = spectral_derivatives(u)
        lap2 = laplacian(u).values
        assert np.max(np.abs(dv.lap - lap2)) < 1e-12 * (1.0 + np.max(np.abs(lap2)))


class TestGradSq:
    def test_constant(self, geom2):
        assert np.max(grad_sq(constant_field(geom2, 1.0)).values) == 0.0

    def test_analytic_mode(self, geom2):
        x, w = mode_field(geom2, 0)
        u = ScalarField(geom2, np.sin(w * x))
        got = grad_sq(u).values
        want = 0.25 * w * w * np.cos(w * x) ** 2
        assert np.max(np.abs(got - want)) < 1e-10

    def test_nonnegative(self, geom2, rng):
        u = random_band_limited(geom2, rng, 3, 1.0)
        assert np.min(grad_sq(u).values) >= 0.0


class TestIntegrate:
    def test_constant(self, geom2):
        assert integrate(constant_field(geom2, 2.5)) == 2.5

    def test_pure_mode_integrates_to_zero(self, geom2):
        x, w = mode_field(geom2, 0)
        assert abs(integrate(ScalarField(geom2, np.cos(w * x)))) < 1e-13

    def test_self_adjointness(self, geom2, rng):
        # discrete integration by parts: I[u lap v] = -I[sum_j D_j u conj(D_j v)]
        u = random_band_limited(geom2, rng, 2, 1.0)
        v = random_band_limited(geom2, rng, 2, 1.0)
        lhs = integrate(ScalarField(geom2, u.values * laplacian(v).values))
        du = spectral_derivatives(u).grad
        dv = spectral_derivatives(v).grad
        pairing = np.sum(du * np.conj(dv), axis=0)
        assert abs(np.mean(pairing.imag)) < 1e-12
        rhs = -float(np.mean(pairing.real))
        assert abs(lhs - rhs) < 1e-10 * (1.0 + abs(lhs))

    def test_u_lap_u_vs_grad_sq(self, geom2, rng):
        u = random_band_limited(geom2, rng, 2, 1.0)
        lhs = integrate(ScalarField(geom2, u.values * laplacian(u).values))
        rhs = -integrate(grad_sq(u))
        assert abs(lhs - rhs) < 1e-10 * (1.0 + abs(lhs))


class TestProductRule:
    def test_residual_decays_spectrally(self):
        # Lap(uv) - u Lap v - v Lap u - 2 Re<Du, Dv> vanishes in the continuum;
        # the discrete residual is pure aliasing and collapses under refinement
        errs = []
        for points in (8, 16, 32):
            g = make_geometry(2, points)
            x = g.coordinate(0) * np.ones(g.shape)
            y = g.coordinate(1) * np.ones(g.shape)
            w = 2.0 * np.pi / g.period
            u = ScalarField(g, np.exp(0.8 * np.cos(w * x)))
            v = ScalarField(g, np.exp(0.6 * np.sin(w * y)))
            uv = ScalarField(g, u.values * v.values)
            du = spectral_derivatives(u).grad
            dv = spectral_derivatives(v).grad
            cross = 2.0 * np.sum(du * np.conj(dv), axis=0).real
            res = (laplacian(uv).values - u.values * laplacian(v).values
                   - v.values * laplacian(u).values - cross)
            errs.append(float(np.max(np.abs(res))))
        assert errs[1] < errs[0] * 1e-3
        assert errs[2] < 1e-10


class TestMixedWedgeDensity:
    def test_constant(self, geom2):
        dens = mixed_wedge_density(constant_field(geom2, 1.0))
        assert np.max(np.abs(dens.values)) == 0.0

    def test_diagonal_hessian_formula(self, geom2):
        # u = p(z_1) + q(z_2) has exactly diagonal complex Hessian; the density
        # must match (n-2)! sum_i |u_i|^2 (lap u - u_{i ibar}) assembled by hand
        x, w = mode_field(geom2, 0)
        y, _ = mode_field(geom2, 3)
        u = ScalarField(geom2, 0.7 * np.cos(w * x) + 0.4 * np.sin(w * y))
        h = complex_hessian(u).matrices
        assert np.max(np.abs(h[0, 1])) < 1e-12
        lap = laplacian(u).values
        direct = np.zeros(geom2.shape)
        for j in (1, 2):
            uj = d_holo(u, j)
            direct += np.abs(uj) ** 2 * (lap - h[j - 1, j - 1].real)
        got = mixed_wedge_density(u).values
        assert np.max(np.abs(got - direct)) <= 1e-10 * (1.0 + np.max(np.abs(got)))

    def test_invariant_contraction_is_real(self, geom2, rng):
        u = random_band_limited(geom2, rng, 2, 0.8)
        dens = mixed_wedge_density(u).values
        assert np.all(np.isfinite(dens))


class TestFieldDumps:
    def test_round_trip(self, geom2, rng, tmp_path):
        u = random_band_limited(geom2, rng, 2, 1.3)
        path = tmp_path / "field.bin"
        save_field(path, u)
        back = load_field(path, geom2)
        assert np.array_equal(back.values, u.values)

    def test_geometry_mismatch(self, geom2, rng, tmp_path):
        u = random_band_limited(geom2, rng, 2, 1.0)
        path = tmp_path / "field.bin"
        save_field(path, u)
        with pytest.raises(ConfigurationError):
            load_field(path, make_geometry(2, 32))

    def test_truncated_dump(self, geom2, rng, tmp_path):
        u = random_band_limited(geom2, rng, 2, 1.0)
        path = tmp_path / "field.bin"
        save_field(path, u)
        data = path.read_bytes()
        path.write_bytes(data[:-16])
        with pytest.raises(ConfigurationError):
            load_field(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOTAFIELDDUMP")
        with pytest.raises(ConfigurationError):
            load_field(path)


class TestRandomFields:
    def test_deterministic(self, geom2):
        a = random_band_limited(geom2, np.random.default_rng(5), 2, 1.0)
        b = random_band_limited(geom2, np.random.default_rng(5), 2, 1.0)
        assert np.array_equal(a.values, b.values)

    def test_band_limit_and_amplitude(self, geom2, rng):
        u = random_band_limited(geom2, rng, 2, 0.7)
        assert np.max(np.abs(u.values)) == pytest.approx(0.7, rel=1e-12)
        spec = np.fft.fftn(u.values)
        for axis in range(4):
            idx = np.abs(geom2.mode_index(axis)) > 2
            sel = spec * idx
            assert np.max(np.abs(sel)) < 1e-9 * np.max(np.abs(spec))

    def test_zero_mean_helper(self, geom2, rng):
        u = random_band_limited(geom2, rng, 2, 1.0)
        shifted = ScalarField(geom2, u.values + 3.0)
        assert abs(integrate(zero_mean(shifted))) < 1e-14
