"""Evanescent-field optomechanical coupling to a toroid rim.

The rim is modeled locally as a straight dielectric waveguide of radius
``a_c`` carrying a TE01 mode well above cutoff.  Outside the rim the
azimuthal field decays as ``sqrt(a_c/r) exp(-kappa_perp (r - a_c))``;
a polarizable rod held at distance ``d`` then pulls the cavity
frequency by ``G0`` per metre of displacement.

``G0`` is evaluated in angular units (rad s^-1 m^-1) because every
factor in its closed form is angular; the ``/2pi`` value is reported
alongside for comparison with tabulated figures.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize, special

from .constants import C_LIGHT, EPS0, HBAR, TWO_PI, bessel_x11, bessel_xstar

__all__ = [
    "REF_RADIUS_FACTOR",
    "CavityGeometry",
    "FieldStructure",
    "Placement",
    "DriveCoupling",
    "CutoffError",
    "field_structure",
    "evanescent_amplitude",
    "internal_amplitude",
    "mode_normalization",
    "correction_factor",
    "optimize_placement",
    "coupling_g0",
    "g0_sensitivity",
    "linearize_drive",
    "linearize_drives",
    "power_for_coupling",
]

#: Ratio between the rim radius used here and the alternative convention.
REF_RADIUS_FACTOR = 1.44
#: Smallest accepted value of (n k a / x11)^2 for the above-cutoff model.
CUTOFF_MARGIN = 10.0


class CutoffError(ValueError):
    """Raised when the waveguide approximation is not applicable."""


@dataclass(frozen=True)
class CavityGeometry:
    """Toroid and chip placement parameters.

    Attributes
    ----------
    wavelength : float
        Vacuum wavelength ``lambda_c`` (m).
    index : float
        Refractive index ``n_c``.
    rim_radius : float
        Minor radius ``a_c`` of the rim (m) in the stated convention.
    circumference : float
        Cavity round-trip length ``L_c`` (m).
    gap : float
        Chip-to-rim distance ``d`` (m).
    finesse : float
        Intrinsic finesse ``F_c``.
    kappa_ex_fraction : float
        ``kappa_ex / kappa``.
    ac_convention : {"paper", "ref"}
        With ``"ref"`` the given radius follows the alternative convention
        and is multiplied by 1.44 before use.
    """

    wavelength: float
    index: float
    rim_radius: float
    circumference: float
    gap: float
    finesse: float = 3e6
    kappa_ex_fraction: float = 0.5
    ac_convention: str = "paper"

    def __post_init__(self):
        if self.index <= 1:
            raise ValueError("refractive index must exceed 1")
        for name in ("wavelength", "rim_radius", "circumference", "finesse"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.gap <= 0:
            raise ValueError("chip-to-rim gap d must be positive")
        if not 0 < self.kappa_ex_fraction <= 1:
            raise ValueError("kappa_ex/kappa must lie in (0, 1]")
        if self.ac_convention not in ("paper", "ref"):
            raise ValueError("ac_convention must be 'paper' or 'ref'")

    @property
    def radius(self) -> float:
        """Rim radius in the convention used by all formulas here (m)."""
        if self.ac_convention == "ref":
            return self.rim_radius * REF_RADIUS_FACTOR
        return self.rim_radius

    @property
    def omega_c(self) -> float:
        return TWO_PI * C_LIGHT / self.wavelength

    @property
    def free_spectral_range(self) -> float:
        """Angular free spectral range ``2 pi c / (n_c L_c)`` (rad/s)."""
        return TWO_PI * C_LIGHT / (self.index * self.circumference)

    @property
    def linewidth(self) -> float:
        """Intrinsic angular linewidth ``FSR / F_c`` (rad/s)."""
        return self.free_spectral_range / self.finesse

    def with_convention(self, convention: str) -> "CavityGeometry":
        return replace(self, ac_convention=convention)


@dataclass(frozen=True)
class FieldStructure:
    """Derived wavevectors and field ratios of the TE01 rim mode."""

    k: float
    k_par: float
    kappa_perp: float
    gamma_t: float
    xi_tilde: float
    xi: float
    volume: float
    x11: float
    xstar: float
    j1_xstar: float
    radius: float
    index: float
    circumference: float
    omega_c: float

    @property
    def xi_definition(self) -> float:
        """``gamma_t |xi~| / (kappa_perp J1(x*))``, equal to ``xi`` by construction."""
        return self.gamma_t * abs(self.xi_tilde) / (self.kappa_perp * self.j1_xstar)

    @property
    def decay_length(self) -> float:
        return 1.0 / self.kappa_perp


def field_structure(geom: CavityGeometry) -> FieldStructure:
    """Evaluate the waveguide approximations for a cavity geometry."""
    a = geom.radius
    n = geom.index
    k = TWO_PI / geom.wavelength
    x11 = bessel_x11()
    xstar = bessel_xstar()
    margin = (n * k * a / x11) ** 2
    if margin < CUTOFF_MARGIN:
        raise CutoffError(f"above-cutoff condition (n_c k a_c / x11)^2 >> 1 fails: "
                          f"{margin:.3g} < {CUTOFF_MARGIN}")
    kappa = np.sqrt(n * n - 1.0) * k
    gamma_t = x11 / a
    if kappa <= gamma_t:
        raise CutoffError(f"evanescent decay kappa_perp = {kappa:.4g} 1/m does not exceed "
                          f"the internal wavevector gamma = {gamma_t:.4g} 1/m")
    j1s = float(special.j1(xstar))
    xi_tilde = float(special.j0(x11))
    xi = geom.wavelength * x11 * abs(xi_tilde) / (TWO_PI * a * np.sqrt(n * n - 1.0) * j1s)
    if not 0 < xi < 1:
        raise CutoffError(f"surface field ratio xi = {xi:.4g} is outside (0, 1)")
    volume = 0.5 * np.pi * a * a * geom.circumference
    return FieldStructure(k=k, k_par=n * k, kappa_perp=float(kappa), gamma_t=gamma_t,
                          xi_tilde=xi_tilde, xi=float(xi), volume=volume, x11=x11,
                          xstar=xstar, j1_xstar=j1s, radius=a, index=n,
                          circumference=geom.circumference, omega_c=geom.omega_c)


def evanescent_amplitude(fs: FieldStructure, r):
    """Normalized mode function ``u_phi(r)`` outside the rim (m^-3/2)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= fs.radius):
        raise ValueError("the evanescent form holds only for r > a_c")
    a = fs.radius
    out = (-fs.xi / (fs.index * np.sqrt(fs.volume)) * np.sqrt(a / r)
           * np.exp(-fs.kappa_perp * (r - a)))
    return float(out) if out.ndim == 0 else out


def internal_amplitude(fs: FieldStructure, r):
    """Leading-order mode function inside the rim, ``J1(gamma r)`` shaped."""
    r = np.asarray(r, dtype=float)
    out = special.j1(fs.gamma_t * r) / (fs.j1_xstar * fs.index * np.sqrt(fs.volume))
    return float(out) if out.ndim == 0 else out


def mode_normalization(fs: FieldStructure) -> dict:
    """Radial quadrature of ``int eps/eps0 |u|^2 dV`` for both field regions."""
    from scipy import integrate

    a, n = fs.radius, fs.index
    inner = integrate.quad(lambda r: n * n * internal_amplitude(fs, r) ** 2 * TWO_PI * r,
                           0.0, a, limit=200)[0] * fs.circumference
    tail = 40.0 / fs.kappa_perp
    outer = integrate.quad(lambda r: evanescent_amplitude(fs, r) ** 2 * TWO_PI * r,
                           a * (1 + 1e-12), a + tail, limit=200)[0] * fs.circumference
    return {"inside": inner, "outside": outer, "total": inner + outer}


def correction_factor(fs: FieldStructure, gap: float, theta: float, phi: float) -> float:
    """Alignment and placement factor ``C_corr(theta', phi)``.

    ``exp(-2K(sec phi - 1)) sin^2 theta' cos theta' cos^2 phi sin phi`` with
    ``K = kappa_perp (d + a_c)``.
    """
    if not abs(phi) < 0.5 * np.pi:
        raise ValueError("|phi| must be below pi/2")
    big_k = fs.kappa_perp * (gap + fs.radius)
    return float(np.exp(-2.0 * big_k * (1.0 / np.cos(phi) - 1.0))
                 * np.sin(theta) ** 2 * np.cos(theta) * np.cos(phi) ** 2 * np.sin(phi))


@dataclass(frozen=True)
class Placement:
    """Optimal orientation and offset of the rod relative to the rim.

    ``theta``/``phi`` maximize the full correction factor; the
    ``*_leading`` fields hold the leading-order asymptotics in
    ``1/(2 kappa_perp (d + a_c))``.
    """

    theta: float
    phi: float
    c_corr: float
    phi_leading: float
    c_corr_leading: float
    big_k: float


def optimize_placement(fs: FieldStructure, gap: float) -> Placement:
    """Maximize ``C_corr`` over ``theta'`` and ``phi``.

    The angular dependences factor.  ``sin^2 theta' cos theta'`` peaks at
    ``sin^2 theta' = 2/3`` exactly, and the ``phi`` factor is maximized
    numerically on ``(0, pi/2)``.
    """
    big_k = fs.kappa_perp * (gap + fs.radius)
    theta = float(np.arcsin(np.sqrt(2.0 / 3.0)))

    def neg_log(phi):
        return -(-2.0 * big_k * (1.0 / np.cos(phi) - 1.0) + 2.0 * np.log(np.cos(phi))
                 + np.log(np.sin(phi)))

    guess = 1.0 / np.sqrt(2.0 * big_k + 2.0)
    res = optimize.minimize_scalar(neg_log, bounds=(1e-6, min(1.5, 4.0 * guess)),
                                   method="bounded", options={"xatol": 1e-12})
    phi = float(res.x)
    phi_lead = float(1.0 / np.sqrt(2.0 * big_k))
    return Placement(theta=theta, phi=phi, c_corr=correction_factor(fs, gap, theta, phi),
                     phi_leading=phi_lead, c_corr_leading=float(0.17 / np.sqrt(big_k)),
                     big_k=float(big_k))


def coupling_g0(geom: CavityGeometry, alpha_par: float, length: float,
                placement: tuple | None = None, fs: FieldStructure | None = None,
                xi: float | None = None, volume: float | None = None,
                c_corr: float | None = None) -> float:
    """Angular frequency pull per metre ``G0`` (rad s^-1 m^-1).

    Parameters
    ----------
    geom : CavityGeometry
    alpha_par : float
        Axial polarizability per unit length of the rod (C m / V).
    length : float
        Rod length (m).
    placement : (theta', phi), optional
        Explicit orientation; the optimum is used when omitted.
    xi, volume, c_corr : float, optional
        Overrides for sensitivity studies.
    """
    fs = fs or field_structure(geom)
    if c_corr is None:
        if placement is None:
            c_corr = optimize_placement(fs, geom.gap).c_corr
        else:
            c_corr = correction_factor(fs, geom.gap, *placement)
    xi = fs.xi if xi is None else xi
    volume = fs.volume if volume is None else volume
    return float(fs.omega_c * alpha_par * fs.kappa_perp * length * xi**2
                 / (fs.index**2 * EPS0 * volume)
                 * np.exp(-2.0 * fs.kappa_perp * geom.gap) * c_corr)


def g0_sensitivity(geom: CavityGeometry, alpha_par: float, length: float,
                   reference: float, xi_quoted: float = 0.2,
                   area_quoted: float = 6e-12) -> list[dict]:
    """Break down how each modeling choice moves ``G0`` against a reference.

    Each row holds a label, the resulting ``G0`` and its ratio to
    ``reference``.  The rows swap one ingredient at a time: the quoted
    round ``xi`` instead of its closed form, the quoted mode area instead
    of ``0.5 pi a_c^2``, the leading-order ``C_corr``, the other rim-radius
    convention, and the ordinary-frequency (``/2pi``) reading.
    """
    fs = field_structure(geom)
    place = optimize_placement(fs, geom.gap)
    base = coupling_g0(geom, alpha_par, length, fs=fs)
    rows = [("model (closed-form xi, 0.5 pi a^2 L_c, optimal C_corr)", base)]
    rows.append((f"xi = {xi_quoted}", coupling_g0(geom, alpha_par, length, fs=fs,
                                                  xi=xi_quoted)))
    rows.append((f"V_c = L_c x {area_quoted * 1e12:g} um^2",
                 coupling_g0(geom, alpha_par, length, fs=fs,
                             volume=area_quoted * geom.circumference)))
    rows.append(("C_corr = 0.17/sqrt(K)", coupling_g0(geom, alpha_par, length, fs=fs,
                                                       c_corr=place.c_corr_leading)))
    rows.append(("quoted xi and area together",
                 coupling_g0(geom, alpha_par, length, fs=fs, xi=xi_quoted,
                             volume=area_quoted * geom.circumference)))
    other = "ref" if geom.ac_convention == "paper" else "paper"
    try:
        rows.append((f"a_c convention '{other}'",
                     coupling_g0(geom.with_convention(other), alpha_par, length)))
    except CutoffError as exc:
        rows.append((f"a_c convention '{other}' ({exc})", float("nan")))
    rows.append(("model divided by 2 pi", base / TWO_PI))
    return [{"variant": label, "g0": value, "ratio": value / reference}
            for label, value in rows]


@dataclass(frozen=True)
class DriveCoupling:
    """Linearized coupling of one laser drive.

    Attributes
    ----------
    alpha : complex
        Steady intracavity amplitude.
    rabi : float
        ``Omega`` with ``Omega/2 = sqrt(P kappa_ex / hbar omega_L)`` (rad/s).
    g : complex
        Linearized coupling ``2 alpha G0 x_zpm`` (rad/s).
    linear_ok : bool
        True when the estimated fluctuation occupation ``|g/kappa|^2`` is
        below one percent of ``|alpha|^2``.
    """

    alpha: complex
    rabi: float
    g: complex
    linear_ok: bool

    @property
    def photons(self) -> float:
        return abs(self.alpha) ** 2


def linearize_drive(g0: float, x_zpm: float, power: float, omega_laser: float,
                    detuning: float, kappa: float, kappa_ex: float) -> DriveCoupling:
    """Steady amplitude and linearized coupling for one drive.

    ``alpha = Omega / (2 Delta + i kappa)``, ``g = 2 alpha G0 x_zpm``.
    All rates are angular.
    """
    if kappa <= 0:
        raise ValueError("cavity linewidth must be positive")
    if power < 0:
        raise ValueError("power must be non-negative")
    rabi = 2.0 * np.sqrt(power * kappa_ex / (HBAR * omega_laser))
    alpha = rabi / (2.0 * detuning + 1j * kappa)
    g = 2.0 * alpha * g0 * x_zpm
    ok = bool(abs(g / kappa) ** 2 <= 0.01 * abs(alpha) ** 2) if power > 0 else True
    return DriveCoupling(alpha=complex(alpha), rabi=float(rabi), g=complex(g), linear_ok=ok)


def linearize_drives(g0: float, x_zpm: float, drives) -> list[DriveCoupling]:
    """Apply :func:`linearize_drive` to mappings with matching keyword names."""
    return [linearize_drive(g0, x_zpm, **d) for d in drives]


def power_for_coupling(g: float, g0: float, x_zpm: float, omega_laser: float,
                       detuning: float, kappa: float, kappa_ex: float) -> float:
    """Input power (W) that produces a linearized coupling of magnitude ``g``."""
    alpha = abs(g) / (2.0 * g0 * x_zpm)
    rabi = alpha * np.hypot(2.0 * detuning, kappa)
    return float((0.5 * rabi) ** 2 * HBAR * omega_laser / kappa_ex)
