"""Brute-force Lindblad oracle for one cavity mode coupled to the resonator.

The linearized Hamiltonian in the frame of the laser is

    H = -Delta a^dag a + H_m + (g / 2)(a + a^dag) X,   X = b + b^dag,

with cavity decay ``kappa D[a]`` and the mechanical bath
``gamma (nbar + 1) D[X_-] + gamma nbar D[X_+]``.  ``X_-`` and ``X_+`` are
the parts of ``X`` that lower and raise the energy in the eigenbasis of
``H_m``, which is the secular form of a bath coupled through position.
``bath_model="fock"`` uses ``b`` and ``b^dag`` instead.  Operators act on a
truncated Fock space; the density matrix is vectorized by column
stacking so that ``vec(A rho B) = (B^T kron A) vec(rho)``.

Intended for small systems only (at most 8 mechanical and 6 photon
levels) as a check of the reduced rate model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .spectrum import AnharmonicSpectrum, build_hamiltonian, diagonalize

__all__ = [
    "MAX_MECH",
    "MAX_PHOT",
    "DegenerateSteadyStateError",
    "OracleSystem",
    "FullSteadyState",
    "CorrelatorFit",
    "build_system",
    "full_liouvillian_steady",
    "correlator",
    "fit_correlator_decay",
]

MAX_MECH = 8
MAX_PHOT = 6


class DegenerateSteadyStateError(RuntimeError):
    """Raised when the Liouvillian kernel is not one-dimensional."""


def _lowering(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, n)), 1)


def _dissipator(op: np.ndarray) -> np.ndarray:
    d = op.shape[0]
    eye = np.eye(d)
    odo = op.conj().T @ op
    return np.kron(op.conj(), op) - 0.5 * np.kron(eye, odo) - 0.5 * np.kron(odo.T, eye)


def _commutator(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    eye = np.eye(d)
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


@dataclass(frozen=True)
class OracleSystem:
    """Operators and generator of the truncated cavity plus resonator.

    The composite space is ``mechanics kron cavity``.  ``basis`` holds the
    mechanical eigenvectors in the Fock basis (columns), ordered as in
    ``spectrum``.
    """

    n_mech: int
    n_phot: int
    hamiltonian: np.ndarray = field(repr=False)
    liouvillian: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)
    spectrum: AnharmonicSpectrum = field(repr=False)

    @property
    def dim(self) -> int:
        return self.n_mech * self.n_phot

    def mech_operator(self, op_eigen: np.ndarray) -> np.ndarray:
        """Lift a mechanical operator given in the eigenbasis to the full space."""
        fock = self.basis @ op_eigen @ self.basis.T
        return np.kron(fock, np.eye(self.n_phot))


def build_system(omega: float, lam: float, detuning: float, coupling: float,
                 kappa: float, damping: float, nbar: float,
                 n_mech: int = 6, n_phot: int = 4,
                 bath_model: str = "eigenbasis") -> OracleSystem:
    """Assemble the Liouvillian of the linearized single-drive model.

    Parameters
    ----------
    bath_model : {"eigenbasis", "fock"}
        Jump operators of the mechanical bath.
    """
    if bath_model not in ("eigenbasis", "fock"):
        raise ValueError("bath_model must be 'eigenbasis' or 'fock'")
    if not 4 <= n_mech <= MAX_MECH:
        raise ValueError(f"n_mech must lie in [4, {MAX_MECH}]")
    if not 2 <= n_phot <= MAX_PHOT:
        raise ValueError(f"n_phot must lie in [2, {MAX_PHOT}]")
    if kappa <= 0 or damping <= 0:
        raise ValueError("kappa and gamma must be positive")
    h_m = build_hamiltonian(omega, lam, n_mech)
    spec = diagonalize(h_m, n_keep=n_mech)
    energies, vecs = np.linalg.eigh(h_m)
    # Align eigenvector order and phases with the diagonalized spectrum.
    order = [int(np.argmin(np.abs(energies - e))) for e in spec.energies]
    vecs = vecs[:, order]
    vecs = vecs * np.sign(vecs[np.arange(n_mech), np.arange(n_mech)])[None, :]

    b = _lowering(n_mech)
    a = _lowering(n_phot)
    eye_m, eye_c = np.eye(n_mech), np.eye(n_phot)
    big_b = np.kron(b, eye_c)
    big_a = np.kron(eye_m, a)
    x = big_b + big_b.T
    ham = (np.kron(h_m, eye_c) - detuning * big_a.T @ big_a
           + 0.5 * coupling * (big_a + big_a.T) @ x)
    if bath_model == "fock":
        lower = big_b
    else:
        x_eig = vecs.T @ (b + b.T) @ vecs
        lower = np.kron(vecs @ np.triu(x_eig, 1) @ vecs.T, eye_c)
    liou = (_commutator(ham) + kappa * _dissipator(big_a)
            + damping * (nbar + 1.0) * _dissipator(lower)
            + damping * nbar * _dissipator(lower.T))
    return OracleSystem(n_mech=n_mech, n_phot=n_phot, hamiltonian=ham,
                        liouvillian=liou, basis=vecs, spectrum=spec)


@dataclass(frozen=True)
class FullSteadyState:
    """Steady state of the full Liouvillian with its quality metrics."""

    rho: np.ndarray = field(repr=False)
    populations: np.ndarray
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float
    residual: float
    system: OracleSystem = field(repr=False)

    @property
    def mechanical_occupation(self) -> float:
        """``Tr(b^dag b rho)``."""
        b = _lowering(self.system.n_mech)
        num = np.kron(b.T @ b, np.eye(self.system.n_phot))
        return float(np.real(np.trace(num @ self.rho)))


def _kernel_dimension(liou: np.ndarray, tol: float) -> int:
    _, r, _ = linalg.qr(liou, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    return int(np.sum(diag < tol * diag[0]))


def full_liouvillian_steady(system: OracleSystem, tol: float = 1e-11) -> FullSteadyState:
    """Null-space steady state of ``system``.

    The kernel dimension is checked with a column-pivoted QR; the state is
    then found by replacing one balance row with the trace condition.
    """
    liou = system.liouvillian
    dim = system.dim
    nullity = _kernel_dimension(liou, tol)
    if nullity != 1:
        raise DegenerateSteadyStateError(f"Liouvillian kernel has dimension {nullity}")
    trace_row = np.eye(dim).reshape(-1, order="F")
    lhs = liou.copy()
    lhs[0, :] = trace_row
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    vec = linalg.solve(lhs, rhs)
    rho = vec.reshape(dim, dim, order="F")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    rho_h = 0.5 * (rho + rho.conj().T)
    min_eig = float(np.min(np.linalg.eigvalsh(rho_h)))
    trace_err = float(abs(np.trace(rho) - 1.0))
    residual = float(np.max(np.abs(liou @ vec)))
    reduced = np.einsum("iaja->ij", rho_h.reshape(system.n_mech, system.n_phot,
                                                 system.n_mech, system.n_phot))
    pops = np.real(np.einsum("in,ij,jn->n", system.basis, reduced, system.basis))
    return FullSteadyState(rho=rho_h, populations=pops, trace_error=trace_err,
                           hermiticity_error=herm, min_eigenvalue=min_eig,
                           residual=residual, system=system)


def correlator(steady: FullSteadyState, n: int, m: int, times) -> np.ndarray:
    """``<|n><m|(t + tau) |m><n|(t)>`` in the steady state at the given delays."""
    system = steady.system
    k = system.n_mech
    proj_mn = np.zeros((k, k))
    proj_mn[m, n] = 1.0
    op_mn = system.mech_operator(proj_mn)
    op_nm = op_mn.T
    start = (op_mn @ steady.rho).reshape(-1, order="F")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be an increasing 1-d array")
    step = np.diff(times)
    if not np.allclose(step, step[0], rtol=1e-9, atol=0.0):
        raise ValueError("times must be evenly spaced")
    liou = system.liouvillian
    state = linalg.expm(liou * times[0]) @ start if times[0] != 0 else start
    propagator = linalg.expm(liou * step[0])
    trace_row = op_nm.T.reshape(-1, order="F")
    out = np.empty(times.size, dtype=complex)
    for i in range(times.size):
        out[i] = trace_row @ state
        state = propagator @ state
    return out


@dataclass(frozen=True)
class CorrelatorFit:
    """Exponential fit ``C(tau) ~ C0 exp((i omega - Gamma/2) tau)``."""

    decay_rate: float
    frequency: float
    amplitude: float
    max_log_residual: float


def fit_correlator_decay(steady: FullSteadyState, n: int, m: int,
                         t_start: float, t_stop: float, num: int = 200) -> CorrelatorFit:
    """Fit the amplitude decay and phase rotation of a coherence correlator.

    ``decay_rate`` is the full linewidth ``Gamma`` (twice the amplitude
    decay rate), directly comparable to ``gamma_eff^{nm}``.  The rotation
    frequency is fitted on a short, densely sampled window after
    ``t_start`` so that the phase can be unwrapped.
    """
    times = np.linspace(t_start, t_stop, num)
    c = correlator(steady, n, m, times)
    log_amp = np.log(np.abs(c))
    slope, intercept = np.polyfit(times, log_amp, 1)
    resid = log_amp - (slope * times + intercept)
    delta = abs(steady.system.spectrum.delta[n, m])
    short = t_start + np.linspace(0.0, 20.0 * np.pi / delta, 400)
    phase = np.unwrap(np.angle(correlator(steady, n, m, short)))
    omega_fit = np.polyfit(short, phase, 1)[0]
    return CorrelatorFit(decay_rate=float(-2.0 * slope), frequency=float(omega_fit),
                         amplitude=float(np.exp(intercept)),
                         max_log_residual=float(np.max(np.abs(resid))))
