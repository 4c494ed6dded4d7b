import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softbeam.spectrum import (SpectrumConvergenceError, build_hamiltonian, diagonalize,
                               duffing_spectrum, position_matrix, quartic_matrix,
                               rwa_spectrum, transition_table)


class TestOperators:
    def test_position_matrix(self):
        x = position_matrix(4)
        np.testing.assert_allclose(np.diag(x, 1), np.sqrt([1, 2, 3]))
        np.testing.assert_array_equal(x, x.T)

    def test_quartic_diagonal_exact(self):
        n = np.arange(10)
        np.testing.assert_allclose(np.diag(quartic_matrix(10)), 6 * n**2 + 6 * n + 3)

    def test_quartic_edge_elements_not_truncated(self):
        # <8|X^4|9> style elements vanish by parity; <7|X^4|9> must be exact.
        q = quartic_matrix(10)
        n = 7
        expected = np.sqrt((n + 1) * (n + 2)) * (4 * n + 6)
        assert q[n, n + 2] == pytest.approx(expected)

    def test_hamiltonian_guards(self):
        with pytest.raises(ValueError):
            build_hamiltonian(1.0, -0.1, 10)
        with pytest.raises(ValueError):
            build_hamiltonian(1.0, 0.1, 3)
        with pytest.warns(RuntimeWarning):
            build_hamiltonian(1.0, 0.6, 10)


class TestDiagonalize:
    def test_harmonic_limit(self):
        spec = diagonalize(build_hamiltonian(1.0, 0.0, 20), 6)
        np.testing.assert_allclose(spec.energies, np.arange(6), atol=1e-12)
        np.testing.assert_allclose(spec.x[:5, :5], position_matrix(5), atol=1e-12)

    def test_parity_zeros_exact(self):
        spec = duffing_spectrum(1.0, 0.01, n_keep=8)
        for n in range(8):
            for m in range(8):
                if (n - m) % 2 == 0:
                    assert spec.x[n, m] == 0.0

    def test_small_lambda_matches_first_order(self):
        lam = 1e-3
        spec = duffing_spectrum(1.0, lam, n_keep=6)
        rwa = rwa_spectrum(1.0, lam, 5)
        np.testing.assert_allclose(spec.energies[1:], rwa[1:], rtol=1e-2)

    def test_first_order_slope(self):
        h = 1e-6
        e = [np.linalg.eigvalsh(build_hamiltonian(1.0, x, 60))[:5] for x in (0.0, h, 2 * h)]
        slope = (4 * e[1] - e[2] - 3 * e[0]) / (2 * h)
        n = np.arange(5)
        np.testing.assert_allclose(slope, (6 * n**2 + 6 * n + 3) / 2, rtol=1e-6)

    def test_delta_antisymmetric(self):
        spec = duffing_spectrum(1.0, 0.01, n_keep=5)
        np.testing.assert_allclose(spec.delta, -spec.delta.T)
        assert transition_table(spec, 2).shape == (3, 3)
        with pytest.raises(ValueError):
            transition_table(spec, 9)

    def test_truncated_and_export(self):
        spec = duffing_spectrum(2 * np.pi, 0.01, n_keep=5)
        small = spec.truncated(3)
        assert small.n_keep == 3
        d = spec.to_dict()
        assert d["energies_hz"][1] == pytest.approx(spec.energies[1] / (2 * np.pi))

    def test_convergence_error(self):
        with pytest.raises(SpectrumConvergenceError, match="cutoff"):
            duffing_spectrum(1.0, 0.4, n_keep=40, cutoff=60, tol=1e-14, max_cutoff=120)

    @settings(max_examples=20, deadline=None)
    @given(lam=st.floats(0.0, 0.05))
    def test_cutoff_independence(self, lam):
        a = diagonalize(build_hamiltonian(1.0, lam, 80), 6).energies
        b = diagonalize(build_hamiltonian(1.0, lam, 120), 6).energies
        np.testing.assert_allclose(a, b, atol=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(lam=st.floats(1e-4, 0.05))
    def test_levels_increase_and_anharmonic(self, lam):
        e = duffing_spectrum(1.0, lam, n_keep=6).energies
        gaps = np.diff(e)
        assert np.all(gaps > 0)
        assert np.all(np.diff(gaps) > 0)
