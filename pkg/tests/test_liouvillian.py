import numpy as np
import pytest

from softbeam.dynamics import Drive, ThermalBath, steady_populations
from softbeam.liouvillian import (MAX_MECH, build_system, correlator, fit_correlator_decay,
                                  full_liouvillian_steady)

BASE = dict(omega=1.0, lam=0.01, kappa=0.02, damping=3e-5, nbar=0.3)


@pytest.fixture(scope="module")
def uncoupled():
    return full_liouvillian_steady(build_system(detuning=-1.0, coupling=0.0, **BASE))


class TestSystem:
    def test_dimension_limits(self):
        with pytest.raises(ValueError):
            build_system(detuning=0.0, coupling=0.0, n_mech=MAX_MECH + 1, **BASE)
        with pytest.raises(ValueError):
            build_system(detuning=0.0, coupling=0.0, n_phot=1, **BASE)

    def test_bath_model_name(self):
        with pytest.raises(ValueError, match="bath_model"):
            build_system(detuning=0.0, coupling=0.0, bath_model="other", **BASE)

    def test_trace_preserving(self):
        sys = build_system(detuning=-1.0, coupling=1e-3, **BASE)
        trace_row = np.eye(sys.dim).reshape(-1, order="F")
        assert np.max(np.abs(trace_row @ sys.liouvillian)) < 1e-12


class TestSteadyState:
    def test_uncoupled_is_thermal_times_vacuum(self, uncoupled):
        spec = uncoupled.system.spectrum
        reduced = steady_populations(spec, [], ThermalBath(BASE["damping"], BASE["nbar"]))
        np.testing.assert_allclose(uncoupled.populations, reduced.populations, atol=1e-10)
        n_phot = uncoupled.system.n_phot
        photon = np.kron(np.eye(uncoupled.system.n_mech), np.diag(np.arange(n_phot)))
        assert abs(np.trace(photon @ uncoupled.rho)) < 1e-12

    def test_physical(self, uncoupled):
        assert uncoupled.trace_error < 1e-12
        assert uncoupled.hermiticity_error < 1e-10
        assert uncoupled.min_eigenvalue > -1e-12

    def test_cooling_lowers_occupation(self, uncoupled):
        red = uncoupled.system.spectrum.delta[0, 1]
        cooled = full_liouvillian_steady(build_system(detuning=red, coupling=3e-3, **BASE))
        assert cooled.mechanical_occupation < 0.5 * uncoupled.mechanical_occupation

    def test_fock_bath_also_thermal(self):
        sys = build_system(detuning=-1.0, coupling=0.0, bath_model="fock", **BASE)
        occ = full_liouvillian_steady(sys).mechanical_occupation
        assert occ == pytest.approx(BASE["nbar"], rel=0.05)


class TestCorrelator:
    def test_time_validation(self, uncoupled):
        with pytest.raises(ValueError, match="increasing"):
            correlator(uncoupled, 1, 0, [1.0, 0.0])
        with pytest.raises(ValueError, match="evenly"):
            correlator(uncoupled, 1, 0, [0.0, 1.0, 3.0])

    def test_initial_value_is_population(self, uncoupled):
        c = correlator(uncoupled, 1, 0, [0.0, 1.0])
        assert c[0].real == pytest.approx(uncoupled.populations[1], rel=1e-8)

    def test_uncoupled_decay_matches_rate_model(self, uncoupled):
        spec = uncoupled.system.spectrum
        from softbeam.dynamics import effective_linewidths
        widths = effective_linewidths(spec, [], ThermalBath(BASE["damping"], BASE["nbar"]))
        fit = fit_correlator_decay(uncoupled, 1, 0, 0.0, 2.0 / widths[1, 0], num=60)
        assert fit.decay_rate == pytest.approx(widths[1, 0], rel=5e-3)
        assert abs(fit.frequency) == pytest.approx(abs(spec.delta[1, 0]), rel=1e-4)
