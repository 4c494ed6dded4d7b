"""Anharmonic spectrum of the quantized Duffing oscillator.

The Hamiltonian ``w b+b + (lam/2)(b + b+)^4`` is diagonalized in a
truncated number basis.  Since the quartic term only connects number
states of equal parity, even and odd sectors are diagonalized
separately, which makes the parity selection rule of the displacement
matrix exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

__all__ = [
    "AnharmonicSpectrum",
    "SpectrumConvergenceError",
    "position_matrix",
    "quartic_matrix",
    "build_hamiltonian",
    "diagonalize",
    "duffing_spectrum",
    "rwa_spectrum",
    "transition_table",
]

DEFAULT_CUTOFF = 60
DEFAULT_KEEP = 15
VALIDITY_LIMIT = 0.5


class SpectrumConvergenceError(RuntimeError):
    """Raised when levels do not settle under cutoff doubling."""


def position_matrix(n: int) -> np.ndarray:
    """``b + b+`` in the first ``n`` number states."""
    off = np.sqrt(np.arange(1, n, dtype=float))
    return np.diag(off, 1) + np.diag(off, -1)


def quartic_matrix(n: int) -> np.ndarray:
    """Exact matrix elements of ``(b + b+)^4`` among the first ``n`` states.

    The fourth power is taken in a space padded by four states so that
    no element inside the returned block feels the truncation.
    """
    x = position_matrix(n + 4)
    x2 = x @ x
    return (x2 @ x2)[:n, :n]


def build_hamiltonian(omega: float, lam: float, n: int) -> np.ndarray:
    """Number-basis matrix of ``omega b+b + (lam/2)(b + b+)^4``.

    Parameters
    ----------
    omega, lam : float
        Harmonic frequency and nonlinearity, in the same units.
    n : int
        Fock cutoff, at least 4.
    """
    n = int(n)
    if n < 4:
        raise ValueError(f"Fock cutoff must be at least 4, got {n}")
    if lam < 0:
        raise ValueError("nonlinearity must be non-negative")
    if omega <= 0:
        raise ValueError("harmonic frequency must be positive")
    if lam / omega >= VALIDITY_LIMIT:
        warnings.warn(f"lam/omega = {lam / omega:.3g} exceeds the weak-anharmonicity "
                      f"guard {VALIDITY_LIMIT}", RuntimeWarning, stacklevel=2)
    h = omega * np.diag(np.arange(n, dtype=float)) + 0.5 * lam * quartic_matrix(n)
    return 0.5 * (h + h.T)


@dataclass(frozen=True)
class AnharmonicSpectrum:
    """Lowest eigenlevels of the truncated Duffing Hamiltonian.

    Attributes
    ----------
    cutoff : int
        Fock cutoff used for the retained levels.
    energies : ndarray
        ``E_n - E_0`` in ascending order (same units as the Hamiltonian).
    x : ndarray
        Displacement matrix ``X_nm`` in units of the zero-point amplitude.
    """

    cutoff: int
    energies: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)

    @property
    def n_keep(self) -> int:
        return len(self.energies)

    @property
    def delta(self) -> np.ndarray:
        """Transition frequencies ``delta_nm = E_n - E_m``."""
        return self.energies[:, None] - self.energies[None, :]

    def truncated(self, n_keep: int) -> "AnharmonicSpectrum":
        if not 1 <= n_keep <= self.n_keep:
            raise ValueError(f"cannot keep {n_keep} of {self.n_keep} levels")
        return AnharmonicSpectrum(self.cutoff, self.energies[:n_keep].copy(),
                                  self.x[:n_keep, :n_keep].copy())

    def to_dict(self, angular: bool = True) -> dict:
        """Plain export with energies and transitions in Hz."""
        scale = 1.0 / (2.0 * np.pi) if angular else 1.0
        return {
            "cutoff": self.cutoff,
            "energies_hz": (self.energies * scale).tolist(),
            "delta_hz": (self.delta * scale).tolist(),
            "x": self.x.tolist(),
        }


def _sector(h: np.ndarray, parity: int):
    idx = np.arange(parity, h.shape[0], 2)
    vals, vecs = linalg.eigh(h[np.ix_(idx, idx)])
    full = np.zeros((h.shape[0], len(idx)))
    full[idx, :] = vecs
    return vals, full


def diagonalize(h: np.ndarray, n_keep: int = DEFAULT_KEEP) -> AnharmonicSpectrum:
    """Lowest ``n_keep`` eigenpairs of a number-basis Duffing Hamiltonian.

    Eigenvectors are phased so that the component on the number state of
    the same index is positive; ties are ordered by bare phonon number.
    """
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    if not 1 <= n_keep <= n:
        raise ValueError(f"n_keep must lie in [1, {n}]")
    ev, vv = _sector(h, 0)
    od, vo = _sector(h, 1)
    vals = np.concatenate([ev, od])
    vecs = np.concatenate([vv, vo], axis=1)
    # Secondary key: bare phonon number with the largest weight.
    bare = np.argmax(vecs**2, axis=0)
    order = np.lexsort((bare, vals))[:n_keep]
    vals, vecs = vals[order], vecs[:, order]
    for k in range(n_keep):
        if vecs[k, k] < 0:
            vecs[:, k] *= -1.0
    x = vecs.T @ position_matrix(n) @ vecs
    x = 0.5 * (x + x.T)
    return AnharmonicSpectrum(cutoff=n, energies=vals - vals[0], x=x)


def duffing_spectrum(omega: float, lam: float, n_keep: int = DEFAULT_KEEP,
                     cutoff: int = DEFAULT_CUTOFF, tol: float = 1e-8,
                     max_cutoff: int = 1000) -> AnharmonicSpectrum:
    """Diagonalize with automatic cutoff doubling.

    The cutoff doubles until the ``n_keep`` lowest energies move by less
    than ``tol * omega``; the spectrum at the larger cutoff is returned.
    """
    n = max(int(cutoff), n_keep + 4)
    prev = diagonalize(build_hamiltonian(omega, lam, n), n_keep)
    while 2 * n <= max_cutoff:
        n *= 2
        cur = diagonalize(build_hamiltonian(omega, lam, n), n_keep)
        change = np.max(np.abs(cur.energies - prev.energies))
        if change < tol * omega:
            return cur
        prev = cur
    raise SpectrumConvergenceError(
        f"levels still moving by {change / omega:.2e} omega at cutoff {n}; "
        f"try a cutoff above {2 * n} or fewer retained levels")


def rwa_spectrum(omega: float, lam: float, n_max: int) -> np.ndarray:
    """Levels ``E_n = n w' + n(n-1) lam'/2`` for ``n = 0 .. n_max``.

    Here ``lam' = 6 lam`` and ``w' = omega + 2 lam'``.
    """
    lam_p = 6.0 * lam
    n = np.arange(int(n_max) + 1, dtype=float)
    return n * (omega + 2.0 * lam_p) + 0.5 * n * (n - 1.0) * lam_p


def transition_table(spec: AnharmonicSpectrum, max_level: int) -> np.ndarray:
    """Antisymmetric matrix ``delta_nm`` for ``n, m <= max_level``."""
    k = int(max_level) + 1
    if not 1 <= k <= spec.n_keep:
        raise ValueError(f"max_level must lie in [0, {spec.n_keep - 1}]")
    return spec.delta[:k, :k].copy()
