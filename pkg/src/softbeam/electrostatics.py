"""Electrostatic softening of the fundamental mode by tip electrodes.

The electrodes are modeled as two point charges in the plane of
deflection.  The beam lies on the x axis between 0 and L and deflects
along y.  Its dielectric energy per unit length is

    W(x, y) = -(alpha_par E_x^2 + alpha_perp E_y^2) / 2,

and the y derivatives entering mode forces and curvatures are evaluated
from closed-form derivatives of the Coulomb field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as _c

from .beam import BeamSpec, DuffingParams, integrate_unit, mode_shape
from .constants import HBAR, K_B, TWO_PI

__all__ = [
    "ANGSTROM_POLARIZABILITY",
    "ElectrodeConfig",
    "TunedMode",
    "dielectric_energy_density",
    "field",
    "mode_coefficients",
    "soften",
    "soften_to_frequency",
    "tuning_sweep",
    "compensation_force",
    "johnson_decoherence",
    "one_over_f_spectral_density",
    "one_over_f_decoherence",
    "PEAK_PROFILE_FACTOR",
]

COULOMB = 1.0 / (4.0 * np.pi * _c.epsilon_0)
#: Unit of the tabulated polarizabilities, 4 pi eps0 times one square angstrom.
ANGSTROM_POLARIZABILITY = 4.0 * np.pi * _c.epsilon_0 * 1e-20
#: max over u of u / (u^2 + a^2)^{3/2}, in units of 1/a^2.
PEAK_PROFILE_FACTOR = 2.0 / (3.0 * np.sqrt(3.0))


@dataclass(frozen=True)
class ElectrodeConfig:
    """Two point-charge tips facing the beam.

    Attributes
    ----------
    charges : tuple of float
        ``(q, q')`` in coulomb.
    positions : tuple of (float, float)
        Tip positions ``(x, y)`` in metre.
    gap : float
        Tip-to-tip distance ``D`` (m).
    alpha_par, alpha_perp : float
        Screened polarizabilities per unit length (C m / V).
    """

    charges: tuple
    positions: tuple
    gap: float
    alpha_par: float
    alpha_perp: float

    def __post_init__(self):
        if self.gap <= 0:
            raise ValueError("electrode gap must be positive")
        if self.alpha_par < 0 or self.alpha_perp < 0:
            raise ValueError("polarizabilities must be non-negative")
        if len(self.charges) != len(self.positions):
            raise ValueError("one position per charge is required")

    @classmethod
    def symmetric(cls, beam: BeamSpec, gap: float, q: float, q_prime: float,
                  alpha_par: float, alpha_perp: float) -> "ElectrodeConfig":
        """Tips at ``(L/2, +D/2)`` carrying ``q`` and ``(L/2, -D/2)`` carrying ``q'``."""
        mid = 0.5 * beam.length
        return cls(charges=(float(q), float(q_prime)),
                   positions=((mid, 0.5 * gap), (mid, -0.5 * gap)),
                   gap=gap, alpha_par=alpha_par, alpha_perp=alpha_perp)

    @classmethod
    def from_fields(cls, beam: BeamSpec, gap: float, e_par: float, e_perp: float,
                    alpha_par: float, alpha_perp: float) -> "ElectrodeConfig":
        """Fit symmetric tip charges to prescribed fields at the tube.

        ``e_par`` is the largest axial field along the tube and ``e_perp``
        the transverse field at the point closest to the tips.  For tips at
        distance ``a = D/2`` these are ``0.385 k (q + q') / a^2`` and
        ``k (q' - q) / a^2``.
        """
        a = 0.5 * gap
        total = e_par * a**2 / (PEAK_PROFILE_FACTOR * COULOMB)
        diff = e_perp * a**2 / COULOMB
        return cls.symmetric(beam, gap, 0.5 * (total - diff), 0.5 * (total + diff),
                             alpha_par, alpha_perp)


def field(config: ElectrodeConfig, x, y):
    """Field components and their first two y derivatives.

    Returns
    -------
    ex, ey, dex, dey, d2ex, d2ey : ndarray
        ``E_x``, ``E_y``, ``dE/dy`` and ``d^2E/dy^2`` for both components.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = [np.zeros(np.broadcast(x, y).shape) for _ in range(6)]
    for q, (x0, y0) in zip(config.charges, config.positions):
        if q == 0.0:
            continue
        dx, dy = x - x0, y - y0
        r2 = dx * dx + dy * dy
        if np.any(r2 == 0.0):
            raise ValueError("field evaluated at a point charge")
        kq = COULOMB * q
        r3, r5, r7 = r2**1.5, r2**2.5, r2**3.5
        out[0] += kq * dx / r3
        out[1] += kq * dy / r3
        out[2] += -3.0 * kq * dx * dy / r5
        out[3] += kq * (1.0 / r3 - 3.0 * dy * dy / r5)
        out[4] += kq * (-3.0 * dx / r5 + 15.0 * dx * dy * dy / r7)
        out[5] += kq * (-9.0 * dy / r5 + 15.0 * dy**3 / r7)
    return tuple(out)


def dielectric_energy_density(config: ElectrodeConfig, x, y):
    """Dielectric energy per unit length ``W(x, y)`` (J/m)."""
    ex, ey, *_ = field(config, x, y)
    return -0.5 * (config.alpha_par * ex**2 + config.alpha_perp * ey**2)


def _w_derivatives(config: ElectrodeConfig, x):
    ex, ey, dex, dey, d2ex, d2ey = field(config, x, 0.0)
    ap, at = config.alpha_par, config.alpha_perp
    dw = -(ap * ex * dex + at * ey * dey)
    d2w = -(ap * (dex**2 + ex * d2ex) + at * (dey**2 + ey * d2ey))
    return dw, d2w


def mode_coefficients(config: ElectrodeConfig, beam: BeamSpec, n_max: int = 1):
    """Mode forces ``F_n`` (N) and curvature matrix ``W_lk`` (N/m).

    Both come from integrating ``dW/dy`` and ``d^2W/dy^2`` at ``y = 0``
    against the normalized mode shapes.  Index 0 belongs to mode 1.
    """
    n_max = int(n_max)
    length = beam.length
    probe = np.linspace(0.0, 1.0, 4001)
    dw, d2w = _w_derivatives(config, probe * length)
    scale_f = max(np.max(np.abs(dw)), 1e-300)
    scale_w = max(np.max(np.abs(d2w)), 1e-300)
    idx = range(1, n_max + 1)

    def integrand(s):
        dws, d2ws = _w_derivatives(config, s * length)
        phi = np.array([mode_shape(n, s) for n in idx])
        f = phi * (dws / scale_f)
        w = phi[:, None, :] * phi[None, :, :] * (d2ws / scale_w)
        return np.concatenate([f, w.reshape(n_max * n_max, -1)])

    vals = integrate_unit(integrand, tol=1e-10, start_panels=16)
    forces = vals[:n_max] * scale_f * length
    curv = vals[n_max:].reshape(n_max, n_max) * scale_w * length
    return forces, 0.5 * (curv + curv.T)


@dataclass(frozen=True)
class TunedMode:
    """Fundamental mode after electrostatic softening.

    Attributes
    ----------
    omega : float
        Softened angular frequency ``omega_m`` (rad/s).
    omega0 : float
        Bare frequency ``omega_m,0`` (rad/s).
    zeta : float
        Softening factor ``omega_m,0 / omega_m``.
    lam : float
        Nonlinearity per phonon ``zeta^2 lambda_0`` (rad/s).
    lam0 : float
        Bare nonlinearity (rad/s).
    x_zpm : float
        Zero-point amplitude of the softened mode (m).
    x_zpm0 : float
        Zero-point amplitude of the bare mode (m).
    effective_mass : float
        ``m*`` (kg).
    w00 : float
        Static curvature ``W00`` (N/m), non-positive.
    static_force : float
        Static electrode force ``F0`` (N).
    """

    omega: float
    omega0: float
    zeta: float
    lam: float
    lam0: float
    x_zpm: float
    x_zpm0: float
    effective_mass: float
    w00: float
    static_force: float = 0.0

    @property
    def lam_rwa(self) -> float:
        """``lambda' = 6 lambda``."""
        return 6.0 * self.lam

    @property
    def omega_rwa(self) -> float:
        """``omega_m' = omega_m + 2 lambda'``."""
        return self.omega + 2.0 * self.lam_rwa


def soften(duffing: DuffingParams, w00: float, static_force: float = 0.0) -> TunedMode:
    """Apply a static curvature ``W00 <= 0`` to the Duffing mode.

    ``omega_m^2 = omega_m,0^2 - |W00| / m*``, and the nonlinearity grows as
    ``zeta^2``.  Raises ``ValueError`` beyond the buckling threshold.
    """
    if w00 > 0:
        raise ValueError("W00 must be non-positive for softening")
    m = duffing.effective_mass
    omega_sq = duffing.omega0**2 - abs(w00) / m
    if omega_sq <= 0:
        raise ValueError(f"|W00|/m* = {abs(w00) / m:.4g} s^-2 reaches omega0^2 = "
                         f"{duffing.omega0**2:.4g} s^-2: the beam buckles")
    omega = np.sqrt(omega_sq)
    zeta = duffing.omega0 / omega
    return TunedMode(omega=float(omega), omega0=duffing.omega0, zeta=float(zeta),
                     lam=float(zeta**2 * duffing.lambda0), lam0=duffing.lambda0,
                     x_zpm=float(duffing.x_zpm * np.sqrt(zeta)), x_zpm0=duffing.x_zpm,
                     effective_mass=m, w00=float(w00), static_force=float(static_force))


def soften_to_frequency(duffing: DuffingParams, omega: float,
                        static_force: float = 0.0) -> TunedMode:
    """Soften to a target angular frequency ``0 < omega <= omega_m,0``."""
    if not 0 < omega <= duffing.omega0:
        raise ValueError("target frequency must lie in (0, omega_m,0]")
    w00 = -duffing.effective_mass * (duffing.omega0**2 - omega**2)
    return soften(duffing, w00, static_force)


def tuning_sweep(duffing: DuffingParams, w00_values) -> list[dict]:
    """Tuning curve rows ``(W00, f_m, zeta, lambda/2pi)`` for a sweep of curvatures."""
    rows = []
    for w in np.asarray(w00_values, dtype=float):
        t = soften(duffing, float(w))
        rows.append({"w00_n_per_m": float(w), "frequency_hz": t.omega / TWO_PI,
                     "zeta": t.zeta, "lambda_hz": t.lam / TWO_PI,
                     "lambda_rwa_hz": t.lam_rwa / TWO_PI})
    return rows


def compensation_force(g0_list, n_photons) -> float:
    """Static force ``F0 = -hbar sum_i G0_i |alpha_i|^2`` (N).

    Parameters
    ----------
    g0_list : sequence of float
        Frequency pulls per metre in angular units (rad s^-1 m^-1).
    n_photons : sequence of float
        Mean intracavity photon numbers ``|alpha_i|^2``.
    """
    g0 = np.atleast_1d(np.asarray(g0_list, dtype=float))
    n = np.atleast_1d(np.asarray(n_photons, dtype=float))
    if g0.shape != n.shape:
        raise ValueError("one photon number per cavity mode is required")
    return float(-HBAR * np.sum(g0 * n))


def _field_noise_rate(x_zpm, alpha, e_field, s_e):
    return 4.0 * (x_zpm / HBAR) ** 2 * (alpha * e_field) ** 2 * s_e


def johnson_decoherence(temperature: float, resistance: float, x_zpm: float,
                        alpha: float, e_field: float, length_scale: float) -> float:
    """Order-of-magnitude Johnson-noise decoherence rate (1/s).

    ``Gamma ~ 4 (x_zpm/hbar)^2 alpha^2 E^2 S_E`` with
    ``S_E ~ 4 k_B T R_e / a^2``, where ``a`` is the electrode-to-tube
    distance over which the field acts.  The result is an upper estimate,
    not a precise rate.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if resistance < 0:
        raise ValueError("resistance must be non-negative")
    s_e = 4.0 * K_B * temperature * resistance / length_scale**2
    return float(_field_noise_rate(x_zpm, alpha, e_field, s_e))


def one_over_f_spectral_density(s_ref: float, omega_ref: float, t_ref: float,
                                omega: float, temperature: float) -> float:
    """Scale a measured field-noise density with ``S_E ~ T / omega``."""
    for name, v in (("omega_ref", omega_ref), ("t_ref", t_ref), ("omega", omega),
                    ("temperature", temperature)):
        if v <= 0:
            raise ValueError(f"{name} must be positive")
    if s_ref < 0:
        raise ValueError("reference density must be non-negative")
    return s_ref * (temperature / t_ref) * (omega_ref / omega)


def one_over_f_decoherence(s_ref: float, omega_ref: float, t_ref: float,
                           omega: float, temperature: float, x_zpm: float,
                           alpha: float, e_field: float) -> float:
    """Order-of-magnitude decoherence rate from 1/f field noise (1/s)."""
    s_e = one_over_f_spectral_density(s_ref, omega_ref, t_ref, omega, temperature)
    return float(_field_noise_rate(x_zpm, alpha, e_field, s_e))
