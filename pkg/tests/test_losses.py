import numpy as np
import pytest

from softbeam.coupling import CavityGeometry, field_structure
from softbeam.losses import (LOWER_BOUND, ORDER_ESTIMATE, ElectrodeLossConfig,
                             absorption_finesse, absorption_integral_j,
                             absorption_integral_j_approx, combine, gap_finesse, intrinsic,
                             scattering_finesse, scattering_integral_g,
                             scattering_integral_g_approx)


@pytest.fixture(scope="module")
def geom():
    return CavityGeometry(1.1e-6, 1.44, 2.0e-6, 1e-3, 50e-9)


@pytest.fixture(scope="module")
def fs(geom):
    return field_structure(geom)


class TestIntegrals:
    def test_g_close_to_thin_wire_estimate(self, fs):
        g = scattering_integral_g(fs.k, 10e-9)
        approx = scattering_integral_g_approx(fs.k, 10e-9)
        assert g == pytest.approx(0.2117, abs=1e-3)
        assert g == pytest.approx(approx, rel=0.1)

    @pytest.mark.parametrize("big_k", [5.0, 20.0, 100.0])
    def test_j_steepest_descents(self, big_k):
        rel = 0.25 / big_k + 0.05 / big_k
        assert absorption_integral_j(big_k) == pytest.approx(
            absorption_integral_j_approx(big_k), rel=max(rel, 1e-3) * 4)


class TestChannels:
    def test_scattering_bound(self, geom, fs):
        ch = scattering_finesse(geom, fs, ElectrodeLossConfig(10e-9, np.deg2rad(10)))
        assert ch.qualifier == LOWER_BOUND
        assert ch.finesse == pytest.approx(3.188e15, rel=1e-3)
        assert ch.diagnostics["unsimplified"] > ch.finesse

    def test_scattering_preconditions(self, geom, fs):
        with pytest.raises(ValueError, match="misalignment"):
            scattering_finesse(geom, fs, ElectrodeLossConfig(10e-9, 0.0))
        with pytest.raises(ValueError, match="thin-wire"):
            scattering_finesse(geom, fs, ElectrodeLossConfig(100e-9, 0.1))

    def test_gap(self, geom, fs):
        ch = gap_finesse(geom, fs, ElectrodeLossConfig(10e-9, np.deg2rad(10), gap=40e-9))
        assert ch.finesse == pytest.approx(1.031e10, rel=1e-3)
        assert ch.diagnostics["prefactor"] == pytest.approx(0.7805, abs=1e-3)
        assert ch.diagnostics["closed_form"] == pytest.approx(ch.finesse, rel=1e-6)

    def test_gap_scaling(self, geom, fs):
        a = gap_finesse(geom, fs, ElectrodeLossConfig(5e-9, 0.1, gap=40e-9)).finesse
        b = gap_finesse(geom, fs, ElectrodeLossConfig(5e-9, 0.1, gap=80e-9)).finesse
        assert a / b == pytest.approx(64.0)

    def test_absorption(self, geom, fs):
        cfg = ElectrodeLossConfig(2.5e-9, np.deg2rad(3), sigma_fraction=0.05)
        ch = absorption_finesse(geom, fs, cfg)
        assert ch.qualifier == ORDER_ESTIMATE
        assert ch.finesse == pytest.approx(3.966e8, rel=1e-3)
        numeric = absorption_finesse(geom, fs, cfg, numeric_j=True).finesse
        assert numeric == pytest.approx(ch.finesse, rel=0.1)

    def test_zero_conductivity(self, geom, fs):
        cfg = ElectrodeLossConfig(2.5e-9, 0.05, sigma_fraction=0.0)
        assert absorption_finesse(geom, fs, cfg).finesse == np.inf

    def test_config_validation(self):
        with pytest.raises(ValueError, match="theta"):
            ElectrodeLossConfig(1e-9, 0.31)
        with pytest.raises(ValueError):
            ElectrodeLossConfig(-1e-9, 0.1)


class TestCombine:
    def test_harmonic(self):
        budget = combine([2.0, 2.0], names=["a", "b"])
        assert budget.combined == pytest.approx(1.0)
        assert np.isnan(budget.linewidth)
        assert budget.by_name("b").finesse == 2.0

    def test_infinite_channel_drops_out(self, geom):
        budget = combine([intrinsic(geom), np.inf], geom=geom)
        assert budget.combined == pytest.approx(3e6)
        assert budget.linewidth == pytest.approx(geom.linewidth)

    def test_reference_budget(self, geom, fs):
        chans = [intrinsic(geom),
                 scattering_finesse(geom, fs, ElectrodeLossConfig(10e-9, np.deg2rad(10))),
                 gap_finesse(geom, fs, ElectrodeLossConfig(10e-9, np.deg2rad(10))),
                 absorption_finesse(geom, fs, ElectrodeLossConfig(2.5e-9, np.deg2rad(3)))]
        budget = combine(chans, geom=geom)
        assert budget.combined == pytest.approx(2.9766e6, rel=1e-4)
        assert budget.linewidth / (2 * np.pi) == pytest.approx(69.9e3, rel=1e-3)

    def test_rejects_empty_and_non_positive(self):
        with pytest.raises(ValueError):
            combine([])
        with pytest.raises(ValueError):
            combine([0.0])
