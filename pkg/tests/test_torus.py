import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusflux import (
    FlatTorus,
    OneForm,
    eval_spectral,
    harmonic_norm,
    hodge_decompose,
    integrate,
    integrate_form_along_path,
    line_integral,
    minimal_geodesic,
    poincare_pair,
    sup_norm,
    torus_displacement,
    torus_distance,
)
from torusflux.torus import grad


class TestConstruction:
    def test_validation(self):
        with pytest.raises(ValueError):
            FlatTorus(1, 16)
        with pytest.raises(ValueError):
            FlatTorus(2, 7)
        with pytest.raises(ValueError):
            FlatTorus(2, 9)
        with pytest.raises(ValueError):
            FlatTorus(3, 16, symplectic=True)

    def test_volume_quadrature(self, torus):
        assert abs(integrate(torus, np.ones(torus.shape)) - 1.0) < 1e-12

    def test_injectivity_radius(self, torus):
        assert torus.injectivity_radius == 0.5


class TestIntegrate:
    def test_odd_harmonic(self, torus):
        f = np.sin(2 * np.pi * torus.grid[0])
        assert abs(integrate(torus, f)) < 1e-12

    def test_sin_squared(self, torus):
        # closed form: integral of sin^2(2 pi x) over one period is 1/2
        f = np.sin(2 * np.pi * torus.grid[0]) ** 2
        assert abs(integrate(torus, f) - 0.5) < 1e-10

    def test_shape_mismatch(self, torus):
        with pytest.raises(ValueError):
            integrate(torus, np.ones((3, 3)))

    def test_spectral_decay(self):
        # quadrature error on smooth non-band-limited data drops much faster
        # than any fixed power of the resolution
        exact = 1.0 / np.sqrt(3.0)  # integral of 1/(2 + cos(2 pi x))

        def err(n: int) -> float:
            t = FlatTorus(2, n)
            f = 1.0 / (2.0 + np.cos(2.0 * np.pi * t.grid[0]))
            return abs(integrate(t, f) - exact)

        e16, e64 = err(16), err(64)
        assert e64 < max(e16 * (16 / 64) ** 8, 1e-15)


class TestHodge:
    def test_constant_form(self, torus):
        beta = np.zeros((2,) + torus.shape)
        beta[0], beta[1] = 3.0, 2.0
        form = hodge_decompose(torus, beta)
        assert np.allclose(form.harmonic, [3.0, 2.0], atol=1e-13)
        assert np.abs(form.potential).max() < 1e-13

    def test_exact_form_roundtrip(self, torus):
        # differentiate an explicit potential, then decompose
        potential = np.sin(2 * np.pi * torus.grid[0]) * np.sin(2 * np.pi * torus.grid[1])
        form = hodge_decompose(torus, grad(torus, potential))
        assert np.abs(form.harmonic).max() < 1e-12
        assert np.abs(form.potential - potential).max() < 1e-12
        assert form.coexact_sup == 0.0

    def test_mixed_form(self, torus):
        g_pot = np.cos(2 * np.pi * torus.grid[1])
        beta = grad(torus, g_pot)
        beta[0] += 1.0
        form = hodge_decompose(torus, beta)
        assert np.allclose(form.harmonic, [1.0, 0.0], atol=1e-13)
        assert np.abs(form.potential - (g_pot - g_pot.mean())).max() < 1e-12

    def test_nonclosed_residual_reported(self, torus):
        beta = np.zeros((2,) + torus.shape)
        beta[0] = np.sin(2 * np.pi * torus.grid[1])  # curl-carrying field
        form = hodge_decompose(torus, beta)
        assert form.coexact_sup > 0.1
        with pytest.raises(ValueError):
            line_integral(form, np.array([[0.0, 0.0], [0.2, 0.0]]))

    @settings(max_examples=20, deadline=None)
    @given(
        a=st.floats(-2, 2), b=st.floats(-2, 2),
        m=st.integers(1, 3), n=st.integers(1, 3),
        amp=st.floats(-1, 1),
    )
    def test_roundtrip_random(self, a, b, m, n, amp):
        torus = FlatTorus(2, 32)
        pot = amp * np.sin(2 * np.pi * m * torus.grid[0]) * np.cos(
            2 * np.pi * n * torus.grid[1]
        )
        form = OneForm(torus, (a, b), pot - pot.mean())
        back = hodge_decompose(torus, form.samples())
        assert np.abs(back.harmonic - form.harmonic).max() < 1e-8
        assert np.abs(back.potential - form.potential).max() < 1e-8

    def test_roundtrip_production_grid(self, torus64, rng):
        # decompose-reconstruct identity at the production resolution
        for _ in range(5):
            coeffs = rng.normal(size=2)
            pot = np.zeros(torus64.shape)
            for _ in range(3):
                m, n = rng.integers(1, 5, size=2)
                pot += rng.normal() * np.sin(
                    2 * np.pi * m * torus64.grid[0] + rng.uniform(0, 7)
                ) * np.cos(2 * np.pi * n * torus64.grid[1] + rng.uniform(0, 7))
            form = OneForm(torus64, coeffs, pot - pot.mean())
            back = hodge_decompose(torus64, form.samples())
            assert np.abs(back.samples() - form.samples()).max() < 1e-8


class TestLineIntegral:
    def test_coordinate_loop(self, torus):
        form = OneForm.harmonic_form(torus, (1, 0))
        path = np.stack([np.linspace(0, 1, 33), np.zeros(33)], axis=1)
        assert abs(line_integral(form, path) - 1.0) < 1e-12

    def test_exact_form_over_loop(self, torus):
        pot = np.sin(2 * np.pi * torus.grid[0]) * np.cos(2 * np.pi * torus.grid[1])
        form = OneForm.exact_form(torus, pot)
        s = np.linspace(0, 1, 65)
        loop = np.stack([0.2 + np.cos(2 * np.pi * s) / 4, 0.3 + np.sin(2 * np.pi * s) / 4],
                        axis=1)
        assert abs(line_integral(form, loop)) < 1e-10

    def test_shear_orbit(self, torus):
        # orbit of the standard shear at y = 1/4 has x-displacement g(1/4) = 1
        s = np.linspace(0, 1, 101)
        path = np.stack([0.1 + s * 1.0, np.full_like(s, 0.25)], axis=1)
        form = OneForm.harmonic_form(torus, (1, 0))
        assert abs(line_integral(form, path) - 1.0) < 1e-12

    def test_too_short(self, torus):
        form = OneForm.harmonic_form(torus, (1, 0))
        with pytest.raises(ValueError):
            line_integral(form, np.array([[0.0, 0.0]]))

    def test_null_homotopic_loop_vanishes(self, torus):
        # closed form over a contractible sampled loop integrates to zero
        form = OneForm(
            torus, (0.8, -1.2),
            np.sin(2 * np.pi * torus.grid[0]) * np.cos(2 * np.pi * torus.grid[1]) / 3,
        )
        s = np.linspace(0, 1, 129)
        loop = np.stack(
            [0.4 + 0.3 * np.cos(2 * np.pi * s), 0.5 + 0.2 * np.sin(4 * np.pi * s)],
            axis=1,
        )
        assert abs(line_integral(form, loop)) < 1e-10

    def test_against_quadrature_oracle(self, torus):
        # independent oracle: per-segment Simpson of the sampled components
        form = OneForm(
            torus, (0.7, -0.3),
            np.sin(2 * np.pi * torus.grid[0]) * np.sin(2 * np.pi * torus.grid[1]) / 5,
        )
        path = minimal_geodesic(np.array([0.1, 0.9]), np.array([0.6, 0.4]), 257)
        direct = line_integral(form, path)
        oracle = integrate_form_along_path(torus, form.samples(), path)
        assert abs(direct - oracle) < 1e-9


class TestPairingAndNorms:
    def test_pairing_values(self):
        assert poincare_pair(np.array([1.0, 0.0]), np.array([0.5, 0.0])) == 0.5
        assert poincare_pair(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 0.0
        assert poincare_pair(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            poincare_pair(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(-5, 5),
        d=st.floats(-5, 5), lam=st.floats(-3, 3),
    )
    def test_bilinearity(self, a, b, c, d, lam):
        u, v = np.array([a, b]), np.array([c, d])
        w = np.array([1.3, -0.4])
        left = poincare_pair(u + lam * v, w)
        assert np.isclose(left, poincare_pair(u, w) + lam * poincare_pair(v, w),
                          rtol=1e-12, atol=1e-9)

    def test_harmonic_norm_values(self):
        assert harmonic_norm([1.0, 0.0]) == 1.0
        assert harmonic_norm([2.0, -1.0]) == 3.0

    def test_sup_norm_unit_basis(self, torus):
        form = OneForm.harmonic_form(torus, (1, 0))
        assert abs(sup_norm(form) - 1.0) < 1e-14

    def test_sup_norm_diagonal(self, torus):
        # dual norm against unit-l1 tangent vectors: brute-force oracle over
        # the extreme directions of the l1 ball
        form = OneForm.harmonic_form(torus, (1, 1))
        directions = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
        oracle = max(abs(form.harmonic @ d) for d in directions)
        assert abs(sup_norm(form) - oracle) < 1e-14
        assert sup_norm(form) <= harmonic_norm(form.harmonic)

    def test_norm_comparison_bulk(self, rng):
        coeffs = rng.normal(size=(1000, 2))
        sups = np.abs(coeffs).max(axis=1)
        l1s = np.abs(coeffs).sum(axis=1)
        assert np.all(sups <= l1s + 1e-15)


class TestMetric:
    def test_distance_simple(self):
        assert abs(torus_distance(np.array([0.0, 0.0]), np.array([0.1, 0.0])) - 0.1) < 1e-14

    def test_distance_wraps(self):
        d = torus_distance(np.array([0.0, 0.0]), np.array([0.75, 0.0]))
        assert abs(d - 0.25) < 1e-14

    def test_geodesic_through_wrap(self):
        path = minimal_geodesic(np.array([0.0, 0.0]), np.array([0.75, 0.0]), 9)
        length = np.linalg.norm(np.diff(path, axis=0), axis=1).sum()
        assert abs(length - 0.25) < 1e-12
        assert path[-1][0] == pytest.approx(-0.25)

    def test_cut_locus_deterministic(self):
        d1 = torus_displacement(np.array([0.0, 0.0]), np.array([0.5, 0.0]))
        d2 = torus_displacement(np.array([0.0, 0.0]), np.array([0.5, 0.0]))
        assert np.array_equal(d1, d2)
        assert d1[0] == -0.5  # fixed representative on the cut locus

    @settings(max_examples=40, deadline=None)
    @given(px=st.floats(0, 1), py=st.floats(0, 1), qx=st.floats(0, 1), qy=st.floats(0, 1))
    def test_distance_symmetric_and_bounded(self, px, py, qx, qy):
        p, q = np.array([px, py]), np.array([qx, qy])
        assert np.isclose(torus_distance(p, q), torus_distance(q, p), atol=1e-12)
        assert torus_distance(p, q) <= np.sqrt(0.5) + 1e-12


class TestSpectralEval:
    def test_matches_grid(self, torus):
        f = np.sin(2 * np.pi * torus.grid[0]) + np.cos(4 * np.pi * torus.grid[1])
        vals = eval_spectral(torus, f, torus.points[:50])
        assert np.abs(vals - f.reshape(-1)[:50]).max() < 1e-12

    def test_off_grid_exact_for_band_limited(self, torus):
        pts = np.array([[0.123, 0.456], [0.987, 0.001]])
        f = np.sin(2 * np.pi * torus.grid[0]) * np.cos(2 * np.pi * torus.grid[1])
        expected = np.sin(2 * np.pi * pts[:, 0]) * np.cos(2 * np.pi * pts[:, 1])
        assert np.abs(eval_spectral(torus, f, pts) - expected).max() < 1e-12
