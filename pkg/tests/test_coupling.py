import numpy as np
import pytest
from scipy import special

from softbeam.constants import bessel_x11, bessel_xstar
from softbeam.coupling import (CavityGeometry, CutoffError, coupling_g0, correction_factor,
                               evanescent_amplitude, field_structure, g0_sensitivity,
                               internal_amplitude, linearize_drive, mode_normalization,
                               optimize_placement, power_for_coupling)
from softbeam.electrostatics import ANGSTROM_POLARIZABILITY

ALPHA = 143 * ANGSTROM_POLARIZABILITY


@pytest.fixture(scope="module")
def geom():
    return CavityGeometry(1.1e-6, 1.44, 2.0e-6, 1e-3, 50e-9)


@pytest.fixture(scope="module")
def fs(geom):
    return field_structure(geom)


class TestBessel:
    def test_x11(self):
        assert bessel_x11() == pytest.approx(3.8317059702075, abs=1e-12)
        assert abs(special.j1(bessel_x11())) < 1e-14

    def test_xstar(self):
        x = bessel_xstar()
        assert x == pytest.approx(1.8411837813407, abs=1e-12)
        assert special.j0(x) == pytest.approx(special.jv(2, x), abs=1e-14)


class TestGeometry:
    def test_validation(self):
        with pytest.raises(ValueError):
            CavityGeometry(1.1e-6, 0.9, 2e-6, 1e-3, 5e-8)
        with pytest.raises(ValueError):
            CavityGeometry(1.1e-6, 1.44, 2e-6, 1e-3, 5e-8, ac_convention="other")

    def test_ref_convention_scales_radius(self, geom):
        assert geom.with_convention("ref").radius == pytest.approx(1.44 * geom.radius)

    def test_linewidth(self, geom):
        assert geom.linewidth == pytest.approx(geom.free_spectral_range / 3e6)

    def test_cutoff_error(self):
        with pytest.raises(CutoffError, match="cutoff"):
            field_structure(CavityGeometry(1.1e-6, 1.44, 0.3e-6, 1e-3, 5e-8))


class TestFieldStructure:
    def test_decay_length(self, fs):
        assert fs.decay_length == pytest.approx(0.16896e-6, rel=1e-4)

    def test_xi(self, fs):
        assert fs.xi == pytest.approx(0.22407, rel=1e-4)
        assert fs.xi_definition == pytest.approx(fs.xi, rel=1e-12)

    def test_amplitudes_continuous_in_magnitude_scale(self, fs):
        inside = abs(internal_amplitude(fs, fs.radius * 0.999999))
        outside = abs(evanescent_amplitude(fs, fs.radius * 1.000001))
        # The surface field is suppressed by xi relative to the interior maximum.
        peak = abs(internal_amplitude(fs, fs.xstar / fs.gamma_t))
        assert outside == pytest.approx(fs.xi * peak * 1.0, rel=1e-4)
        assert inside < peak

    def test_evanescent_domain(self, fs):
        with pytest.raises(ValueError):
            evanescent_amplitude(fs, fs.radius * 0.5)

    def test_normalization_order_one(self, fs):
        total = mode_normalization(fs)["total"]
        assert 0.9 < total < 1.05


class TestPlacement:
    def test_optimum(self, geom, fs):
        p = optimize_placement(fs, geom.gap)
        assert np.sin(p.theta) ** 2 == pytest.approx(2 / 3)
        assert 1 / p.c_corr == pytest.approx(22.25, abs=0.01)
        assert 1 / p.c_corr_leading == pytest.approx(20.49, abs=0.01)

    def test_grid_search_agrees(self, geom, fs):
        p = optimize_placement(fs, geom.gap)
        thetas = np.linspace(0.5, 1.3, 161)
        phis = np.linspace(0.01, 0.6, 600)
        best = max(correction_factor(fs, geom.gap, t, f) for t in thetas for f in phis)
        assert p.c_corr == pytest.approx(best, rel=1e-2)
        assert p.c_corr >= best

    def test_phi_exact_stationary(self, geom, fs):
        p = optimize_placement(fs, geom.gap)
        h = 1e-6
        up = correction_factor(fs, geom.gap, p.theta, p.phi + h)
        down = correction_factor(fs, geom.gap, p.theta, p.phi - h)
        assert abs(up - down) / (2 * h) < 1e-6 * p.c_corr / p.phi
        assert p.phi_leading == pytest.approx(1 / np.sqrt(2 * p.big_k))
        assert p.phi < p.phi_leading

    def test_phi_range(self, geom, fs):
        with pytest.raises(ValueError):
            correction_factor(fs, geom.gap, 1.0, 2.0)


class TestG0:
    def test_value(self, geom):
        assert coupling_g0(geom, ALPHA, 1e-6) == pytest.approx(1.745e10, rel=1e-3)

    def test_linear_in_polarizability_and_length(self, geom):
        base = coupling_g0(geom, ALPHA, 1e-6)
        assert coupling_g0(geom, 2 * ALPHA, 1e-6) == pytest.approx(2 * base)
        assert coupling_g0(geom, ALPHA, 3e-6) == pytest.approx(3 * base)

    def test_sensitivity_rows(self, geom):
        rows = g0_sensitivity(geom, ALPHA, 1e-6, 1.02e10)
        labels = [r["variant"] for r in rows]
        assert any("2 pi" in label for label in labels)
        assert rows[0]["ratio"] == pytest.approx(1.71, abs=0.01)


class TestDrive:
    def test_power_round_trip(self):
        kw = dict(g0=1.7e10, x_zpm=4.7e-11, omega_laser=1.7e15, detuning=3e7,
                  kappa=4e5, kappa_ex=4e4)
        p = power_for_coupling(1.3e5, **kw)
        lin = linearize_drive(power=p, **kw)
        assert abs(lin.g) == pytest.approx(1.3e5, rel=1e-10)

    def test_zero_power(self):
        lin = linearize_drive(1e10, 1e-11, 0.0, 1e15, 0.0, 1e5, 1e4)
        assert lin.g == 0 and lin.photons == 0 and lin.linear_ok
