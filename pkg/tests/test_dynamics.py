import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softbeam.dynamics import (PREPARATION, PROBE, Drive, DriveSet, ReducibleGeneratorError,
                               ThermalBath, bose_occupation, effective_linewidths,
                               emission_spectrum, generator, laser_rates, rate_matrix,
                               spectrum_grid, steady_populations)
from softbeam.spectrum import duffing_spectrum


@pytest.fixture(scope="module")
def harmonic():
    return duffing_spectrum(1.0, 0.0, n_keep=40)


@pytest.fixture(scope="module")
def duffing():
    return duffing_spectrum(1.0, 0.01, n_keep=10)


def geometric(nbar, k):
    r = nbar / (nbar + 1.0)
    p = r ** np.arange(k)
    return p / p.sum()


class TestDrives:
    def test_probe_must_be_resonant(self):
        with pytest.raises(ValueError, match="zero detuning"):
            Drive(0.1, 1.0, 1.0, PROBE)

    def test_single_probe(self):
        p = Drive(0.0, 1.0, 1.0, PROBE)
        with pytest.raises(ValueError, match="at most one"):
            DriveSet((p, p))

    def test_linewidth_positive(self):
        with pytest.raises(ValueError):
            Drive(0.0, 1.0, 0.0)

    def test_scaled_probe_changes_only_probe(self):
        ds = DriveSet((Drive(0.0, 2.0, 1.0, PROBE), Drive(-1.0, 3.0, 1.0)))
        scaled = ds.scaled_probe(4.0)
        assert scaled.probe.coupling == pytest.approx(4.0)
        assert scaled.preparation.drives == ds.preparation.drives

    def test_bose(self):
        assert bose_occupation(1.0, 0.0) == 0.0
        hw = 1.054571817e-34 * 2 * np.pi * 5e6
        kt = 1.380649e-23 * 0.02
        assert bose_occupation(2 * np.pi * 5e6, 0.02) == pytest.approx(1 / np.expm1(hw / kt))


class TestRates:
    def test_zero_coupling_gives_zero_rates(self, duffing):
        a = laser_rates(duffing, [Drive(-1.0, 0.0, 0.02)])
        assert np.all(a == 0.0)

    def test_resonant_rate(self, duffing):
        g, kappa = 1e-3, 0.02
        a = laser_rates(duffing, [Drive(duffing.delta[0, 1], g, kappa)])[0]
        assert a[0, 1] == pytest.approx(g**2 * duffing.x[0, 1] ** 2 / kappa)

    def test_generator_columns_sum_to_zero(self, duffing):
        bath = ThermalBath(1e-4, 0.5)
        g = generator(rate_matrix(duffing, [Drive(-1.0, 1e-3, 0.02)], bath))
        np.testing.assert_allclose(g.sum(axis=0), 0.0, atol=1e-18)

    def test_detailed_balance(self, duffing):
        bath = ThermalBath(1e-4, 0.7)
        r = rate_matrix(duffing, [], bath)
        n = np.arange(1, duffing.n_keep)
        ratio = r[n, n - 1] / r[n - 1, n]
        np.testing.assert_allclose(ratio, 0.7 / 1.7)


class TestSteadyState:
    @given(nbar=st.floats(0.01, 3.0))
    @settings(max_examples=20, deadline=None)
    def test_thermal_distribution(self, harmonic, nbar):
        steady = steady_populations(harmonic, [], ThermalBath(1e-3, nbar))
        np.testing.assert_allclose(steady.populations, geometric(nbar, harmonic.n_keep),
                                   rtol=1e-8, atol=1e-15)

    def test_harmonic_linewidth(self, harmonic):
        nbar, gamma = 0.4, 2e-3
        widths = effective_linewidths(harmonic, [], ThermalBath(gamma, nbar))
        assert widths[1, 0] == pytest.approx(gamma * (4 * nbar + 1))
        np.testing.assert_allclose(widths, widths.T)

    def test_sideband_cooling(self, duffing):
        bath = ThermalBath(1e-5, 1.0)
        thermal = steady_populations(duffing, [], bath).populations
        cool = Drive(duffing.delta[0, 1], 2e-3, 0.02)
        cooled = steady_populations(duffing, [cool], bath).populations
        assert cooled[0] > thermal[0] + 0.3

    def test_population_inversion_into_first_level(self, duffing):
        bath = ThermalBath(1e-6, 0.3)
        drives = [Drive(duffing.delta[1, 0], 2e-3, 0.002),
                  Drive(duffing.delta[1, 2], 2e-3, 0.002)]
        p = steady_populations(duffing, drives, bath).populations
        assert np.argmax(p) == 1

    def test_reducible_raises(self, duffing):
        bath = ThermalBath(1e-4, 0.0)
        with pytest.raises(ReducibleGeneratorError, match="strongly connected"):
            steady_populations(duffing, [], bath)

    def test_residual_small(self, duffing):
        s = steady_populations(duffing, [Drive(-1.0, 1e-3, 0.02)], ThermalBath(1e-4, 0.2))
        assert s.residual < 1e-14
        assert s.populations.sum() == pytest.approx(1.0)


class TestEmission:
    @pytest.fixture
    def setup(self, harmonic):
        bath = ThermalBath(1e-3, 0.25)
        drives = DriveSet((Drive(0.0, 1e-3, 0.05, PROBE),))
        return harmonic, drives, bath, steady_populations(harmonic, drives, bath)

    def test_requires_probe(self, harmonic):
        bath = ThermalBath(1e-3, 0.25)
        steady = steady_populations(harmonic, [], bath)
        with pytest.raises(ValueError, match="probe"):
            emission_spectrum(harmonic, steady, [Drive(-1.0, 1e-3, 0.05)], bath, 0.5)

    def test_empty_grid(self, setup):
        spec, drives, bath, steady = setup
        with pytest.raises(ValueError, match="empty"):
            emission_spectrum(spec, steady, drives, bath, 0.5, grid=[])

    def test_sideband_asymmetry(self, setup):
        spec, drives, bath, steady = setup
        res = emission_spectrum(spec, steady, drives, bath, 0.5)
        plus = sum(p.weight for p in res.peaks if abs(p.position - 1.0) < 1e-9)
        minus = sum(p.weight for p in res.peaks if abs(p.position + 1.0) < 1e-9)
        # The resonant probe heats slightly, at a rate 1e-5 of the bath rate.
        assert plus / minus == pytest.approx(0.25 / 1.25, rel=1e-4)

    def test_only_odd_transitions(self, duffing):
        bath = ThermalBath(1e-4, 0.5)
        drives = DriveSet((Drive(0.0, 1e-3, 0.05, PROBE),))
        steady = steady_populations(duffing, drives, bath)
        res = emission_spectrum(duffing, steady, drives, bath, 0.5)
        big = max(p.weight for p in res.peaks)
        for p in res.peaks:
            if (p.n - p.m) % 2 == 0:
                assert p.weight < 1e-12 * big

    def test_peak_height(self, setup):
        spec, drives, bath, steady = setup
        res = emission_spectrum(spec, steady, drives, bath, 0.5)
        line = max(res.peaks, key=lambda p: p.weight)
        # Evaluate at the line centre; the harmonic lines at one position coincide.
        same = [p for p in res.peaks if abs(p.position - line.position) < 1e-12]
        value = emission_spectrum(spec, steady, drives, bath, 0.5,
                                  grid=[line.position]).values[0]
        expected = sum(2 * p.weight / (np.pi * p.width) for p in same)
        assert value == pytest.approx(expected, rel=1e-6)

    def test_integrates_to_weight(self, setup):
        spec, drives, bath, steady = setup
        res = emission_spectrum(spec, steady, drives, bath, 0.5)
        line = [p for p in res.peaks if p.n == 1 and p.m == 0][0]
        half = 100.0
        grid = line.position + line.width * np.linspace(-half, half, 200001)
        single = emission_spectrum(spec, steady, drives, bath, 0.5, grid=grid)
        # Lines sharing the position have different widths.
        inside = sum(p.weight * 2.0 / np.pi * np.arctan(2.0 * half * line.width / p.width)
                     for p in res.peaks if abs(p.position - line.position) < 1e-12)
        assert np.trapezoid(single.values, grid) == pytest.approx(inside, rel=1e-3)

    def test_linear_in_probe_power(self, duffing):
        bath = ThermalBath(1e-3, 0.5)
        prep = Drive(duffing.delta[0, 1], 1e-3, 0.02)
        weak = DriveSet((Drive(0.0, 1e-5, 0.02, PROBE), prep))
        strong = weak.scaled_probe(2.0)
        w1 = [p.weight for p in emission_spectrum(
            duffing, steady_populations(duffing, weak, bath), weak, bath, 0.1).peaks]
        w2 = [p.weight for p in emission_spectrum(
            duffing, steady_populations(duffing, strong, bath), strong, bath, 0.1).peaks]
        np.testing.assert_allclose(np.array(w2) / np.array(w1), 2.0, rtol=1e-3)

    @pytest.mark.parametrize("partitions", [2, 7, 64])
    def test_partition_invariance(self, setup, partitions):
        spec, drives, bath, steady = setup
        ref = emission_spectrum(spec, steady, drives, bath, 0.5)
        other = emission_spectrum(spec, steady, drives, bath, 0.5, partitions=partitions)
        assert np.array_equal(ref.values, other.values)
        assert np.array_equal(ref.offsets, other.offsets)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            spectrum_grid([], 100)

    def test_nearest_peaks(self, setup):
        spec, drives, bath, steady = setup
        res = emission_spectrum(spec, steady, drives, bath, 0.5, n_points=101)
        idx = res.nearest_peaks()
        pos = np.array([p.position for p in res.peaks])[idx]
        assert np.all(np.abs(res.offsets - pos) <= 1.0 + 1e-12)
