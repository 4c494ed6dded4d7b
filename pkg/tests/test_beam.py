import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softbeam.beam import (BeamSpec, RootFindingError, anharmonic_coefficient, duffing_params,
                           gyration_ratio, integrate_unit, load_materials, mode_curvature,
                           mode_properties, mode_roots, mode_shape, mode_slope,
                           nonlinearity_tensor, stiffness_overlaps)

# Roots of cos(nu) cosh(nu) = 1 from an independent 50-digit evaluation.
FROZEN_ROOTS = [4.730040744862704, 7.853204624095838, 10.99560783800167,
                14.13716549125746, 17.27875965739948]


class TestBeamSpec:
    def test_preset_line_density(self, cnt_beam):
        assert cnt_beam.line_density == pytest.approx(2 * np.pi * 3.9e-10 * 7.6e-7)
        assert cnt_beam.gyration == pytest.approx(3.9e-10 / np.sqrt(2))

    @pytest.mark.parametrize("field", ["length", "line_density", "gyration", "sound_speed"])
    def test_rejects_non_positive(self, field):
        kwargs = dict(length=1e-6, line_density=1e-15, gyration=1e-10, sound_speed=1e4)
        kwargs[field] = 0.0
        with pytest.raises(ValueError, match=field):
            BeamSpec(**kwargs)

    def test_thick_rod_warns(self):
        with pytest.warns(RuntimeWarning, match="thin-rod"):
            BeamSpec(1e-6, 1e-15, 1e-7, 1e4)

    def test_unknown_preset(self):
        with pytest.raises(KeyError, match="available"):
            BeamSpec.from_preset("unobtainium", 1e-6)

    def test_materials_table(self):
        assert "cnt_10_0" in load_materials()

    @pytest.mark.parametrize("shape,factor", [("rectangular", 1 / np.sqrt(12)),
                                              ("circular", 0.5),
                                              ("cylindrical_shell", 1 / np.sqrt(2))])
    def test_gyration(self, shape, factor):
        assert gyration_ratio(shape, 2.0) == pytest.approx(2.0 * factor)

    def test_gyration_unknown_shape(self):
        with pytest.raises(ValueError, match="unknown cross-section"):
            gyration_ratio("hexagonal", 1.0)


class TestRoots:
    def test_frozen_values(self):
        np.testing.assert_allclose(mode_roots(5), FROZEN_ROOTS, rtol=1e-13)

    def test_residuals(self):
        nu = mode_roots(50)
        resid = np.abs(np.cos(nu) - 1.0 / np.cosh(nu))
        assert resid.max() < 1e-12

    def test_asymptotic_spacing(self):
        nu = mode_roots(50)
        np.testing.assert_allclose(nu[-5:], (np.arange(46, 51) + 0.5) * np.pi, rtol=1e-12)

    @pytest.mark.parametrize("n", [0, 51])
    def test_range(self, n):
        with pytest.raises(ValueError):
            mode_roots(n)

    def test_error_type_is_runtime(self):
        assert issubclass(RootFindingError, RuntimeError)


class TestModeShapes:
    @pytest.mark.parametrize("n", [1, 2, 5, 20, 50])
    def test_clamped_boundaries(self, n):
        for s in (0.0, 1.0):
            assert abs(mode_shape(n, s)) < 1e-9
            assert abs(mode_slope(n, s)) < 1e-9 * mode_roots(n)[-1]

    @pytest.mark.parametrize("n", [1, 2, 3, 10, 50])
    def test_unit_maximum(self, n):
        s = np.linspace(0, 1, 20001)
        assert np.max(np.abs(mode_shape(n, s))) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_symmetric_modes_positive_at_centre(self, n):
        assert mode_shape(n, 0.5) > 0.5

    @pytest.mark.parametrize("n", [2, 4])
    def test_antisymmetric_modes(self, n):
        s = np.linspace(0, 1, 101)
        np.testing.assert_allclose(mode_shape(n, s), -mode_shape(n, 1 - s), atol=1e-10)
        assert mode_shape(n, 0.1) > 0

    def test_orthogonality(self):
        gram = integrate_unit(lambda s: np.stack([mode_shape(i, s) * mode_shape(j, s)
                                                  for i in (1, 2, 3) for j in (1, 2, 3)]))
        gram = gram.reshape(3, 3)
        assert np.max(np.abs(gram - np.diag(np.diag(gram)))) < 1e-10

    def test_beam_equation(self):
        # phi'''' = nu^4 phi, checked through curvature differences.
        nu = mode_roots(2)[1]
        s = np.linspace(0.2, 0.8, 7)
        h = 1e-3
        fourth = (mode_curvature(2, s + h) - 2 * mode_curvature(2, s)
                  + mode_curvature(2, s - h)) / h**2
        np.testing.assert_allclose(fourth, nu**4 * mode_shape(2, s), rtol=1e-4, atol=1e-6)

    def test_rejects_outside_unit_interval(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            mode_shape(1, 1.2)


class TestQuadrature:
    def test_polynomial(self):
        assert integrate_unit(lambda s: s**7) == pytest.approx(1 / 8, rel=1e-14)

    def test_oscillatory(self):
        val = integrate_unit(lambda s: np.cos(200 * s))
        assert val == pytest.approx(np.sin(200) / 200, abs=1e-12)


class TestModeProperties:
    def test_effective_mass_ratio(self, cnt_beam):
        m = mode_properties(cnt_beam, 1)
        assert m.effective_mass / cnt_beam.mass == pytest.approx(0.39648, abs=2e-5)

    def test_frequency(self, cnt_beam):
        m = mode_properties(cnt_beam, 1)
        expected = cnt_beam.sound_speed * cnt_beam.gyration * (FROZEN_ROOTS[0] / 1e-6) ** 2
        assert m.omega == pytest.approx(expected, rel=1e-12)
        assert m.frequency_hz == pytest.approx(20.6214e6, rel=1e-5)

    def test_zero_point_amplitude(self, cnt_beam):
        m = mode_properties(cnt_beam, 1)
        assert m.x_zpm == pytest.approx(2.34766e-11, rel=1e-5)

    def test_overlaps_parity(self):
        m = stiffness_overlaps(6)
        np.testing.assert_array_equal(m, m.T)
        for i in range(6):
            for j in range(6):
                if (i + j) % 2:
                    assert m[i, j] == 0.0


class TestNonlinearity:
    def test_coefficient(self):
        assert anharmonic_coefficient() == pytest.approx(0.059941, abs=1e-6)

    def test_duffing_lambda(self, cnt_beam):
        d = duffing_params(cnt_beam)
        assert d.lambda0 / (2 * np.pi) == pytest.approx(2239.5, rel=1e-4)
        assert d.lambda0 == pytest.approx(d.beta * d.x_zpm**4 / (2 * 1.054571817e-34), rel=1e-8)

    def test_lambda0_consistent_with_tensor(self, cnt_beam):
        t = nonlinearity_tensor(cnt_beam, 2)
        d = duffing_params(cnt_beam)
        assert 2 * t.lambda0[0, 0, 0, 0] == pytest.approx(d.lambda0, rel=1e-9)

    def test_tensor_symmetries(self, cnt_beam):
        b = nonlinearity_tensor(cnt_beam, 4).bracket
        np.testing.assert_allclose(b, b.transpose(1, 0, 2, 3), atol=1e-15)
        np.testing.assert_allclose(b, b.transpose(2, 3, 0, 1), atol=1e-15)

    def test_tuned_scaling(self, cnt_beam):
        t = nonlinearity_tensor(cnt_beam, 2)
        tuned = t.tuned([4.0, 1.0])
        assert tuned[0, 0, 0, 0] == pytest.approx(16 * t.lambda0[0, 0, 0, 0])
        assert tuned[0, 0, 1, 1] == pytest.approx(4 * t.lambda0[0, 0, 1, 1])
        with pytest.raises(ValueError):
            t.tuned([1.0])

    def test_cutoff_limit(self, cnt_beam):
        with pytest.raises(ValueError):
            nonlinearity_tensor(cnt_beam, 11)

    @settings(max_examples=15, deadline=None)
    @given(length=st.floats(0.3, 5.0), density=st.floats(0.2, 5.0),
           gyration=st.floats(0.2, 3.0))
    def test_bracket_scale_invariant(self, cnt_beam, length, density, gyration):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            spec = cnt_beam.scaled(length, density, gyration)
        t = nonlinearity_tensor(spec, 3)
        phys = 32 * spec.gyration**2 * spec.mass * t.lambda0 / 1.054571817e-34
        ref = nonlinearity_tensor(cnt_beam, 3).bracket
        np.testing.assert_allclose(phys, ref, atol=1e-10)
