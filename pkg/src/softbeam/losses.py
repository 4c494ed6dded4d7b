"""Cavity losses induced by thin electrodes near the rim.

Three channels are estimated as finesse bounds: s-wave scattering by a
slightly misaligned conducting wire, dipole scattering by the gap
between two wires, and ohmic absorption in transparent (nanotube)
electrodes.  Channel finesses add harmonically with the intrinsic one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .constants import ALPHA_FS
from .coupling import CavityGeometry, FieldStructure

__all__ = [
    "LOWER_BOUND",
    "ORDER_ESTIMATE",
    "ElectrodeLossConfig",
    "ChannelEstimate",
    "FinesseBudget",
    "scattering_integral_g",
    "scattering_integral_g_approx",
    "absorption_integral_j",
    "absorption_integral_j_approx",
    "scattering_finesse",
    "gap_finesse",
    "absorption_finesse",
    "combine",
    "intrinsic",
    "degrees",
]

LOWER_BOUND = "lower_bound"
ORDER_ESTIMATE = "order_estimate"
SMALL_ANGLE_LIMIT = 0.3
THIN_WIRE_LIMIT = 0.5


@dataclass(frozen=True)
class ElectrodeLossConfig:
    """Electrode wire parameters relevant for loss estimates.

    Attributes
    ----------
    radius : float
        Wire radius ``R'`` (m).
    theta : float
        Misalignment angle to the rim axis (rad).
    gap : float
        Gap ``D`` between the two wire tips (m).
    sigma_fraction : float
        2D conductivity in units of ``8 e^2 / h``.
    alpha_f : float
        Fine-structure constant.
    """

    radius: float
    theta: float
    gap: float = 40e-9
    sigma_fraction: float = 0.05
    alpha_f: float = ALPHA_FS

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("electrode radius R' must be positive")
        if abs(self.theta) >= SMALL_ANGLE_LIMIT:
            raise ValueError(f"misalignment |theta| must stay below {SMALL_ANGLE_LIMIT} rad")
        if self.gap <= 0:
            raise ValueError("electrode gap D must be positive")
        if self.sigma_fraction < 0:
            raise ValueError("conductivity fraction must be non-negative")

    def check_thin(self, k: float):
        if k * self.radius >= THIN_WIRE_LIMIT:
            raise ValueError(f"thin-wire condition k R' << 1 fails (k R' = {k * self.radius:.3g})")


@dataclass(frozen=True)
class ChannelEstimate:
    """One loss channel: finesse value, its qualifier and diagnostics."""

    name: str
    finesse: float
    qualifier: str
    diagnostics: dict


@dataclass(frozen=True)
class FinesseBudget:
    """Harmonic combination of channel finesses.

    Attributes
    ----------
    channels : tuple of ChannelEstimate
    combined : float
        ``1 / sum(1 / F_i)``.
    linewidth : float
        Angular cavity linewidth ``FSR / F`` (rad/s), or NaN when no
        geometry was given.
    """

    channels: tuple
    combined: float
    linewidth: float

    def by_name(self, name: str) -> ChannelEstimate:
        for ch in self.channels:
            if ch.name == name:
                return ch
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Named integrals
# ---------------------------------------------------------------------------

def scattering_integral_g(k: float, radius: float) -> float:
    """``G = 2 int_0^k dk' k / ((k^2 - k'^2) ln^2((k^2 - k'^2) R'^2))``.

    Evaluated with ``k - k' = k exp(-y)``, which maps the logarithmic
    endpoint onto a half line with algebraic decay.
    """
    def integrand(y):
        w = k * np.exp(-y)
        log_u = np.log(k) - y + np.log(2.0 * k - w) + 2.0 * np.log(radius)
        return 2.0 * k / ((2.0 * k - w) * log_u**2)

    return float(integrate.quad(integrand, 0.0, np.inf, limit=400)[0])


def scattering_integral_g_approx(k: float, radius: float) -> float:
    """Thin-wire estimate ``G ~ 1 / (2 |ln(2 k R')|)``."""
    return 1.0 / (2.0 * abs(np.log(2.0 * k * radius)))


def absorption_integral_j(big_k: float) -> float:
    """``J = int exp(-2K(sqrt(1+x^2) - 1)) / (1+x^2)^{3/2} dx`` over the real line."""
    val = integrate.quad(lambda x: np.exp(-2.0 * big_k * (np.sqrt(1.0 + x * x) - 1.0))
                         / (1.0 + x * x) ** 1.5, 0.0, np.inf, limit=200)[0]
    return float(2.0 * val)


def absorption_integral_j_approx(big_k: float) -> float:
    """Steepest-descents estimate ``J ~ sqrt(pi / K)``."""
    return float(np.sqrt(np.pi / big_k))


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------

def scattering_finesse(geom: CavityGeometry, fs: FieldStructure,
                       cfg: ElectrodeLossConfig) -> ChannelEstimate:
    """Lower bound on the finesse limited by s-wave scattering off one wire.

    ``F_s > 16 n (n^2-1)^{3/2} ln(lambda / 4 pi R') exp(4 pi (n-1)/|theta|)``.
    The unsimplified bound, which keeps the geometry dependence, is
    returned under ``diagnostics["unsimplified"]``.
    """
    n, a, d, lam = fs.index, fs.radius, geom.gap, geom.wavelength
    theta = abs(cfg.theta)
    if theta == 0:
        raise ValueError("scattering bound needs a non-zero misalignment")
    limit = np.sqrt((n - 1.0) / (n + 1.0))
    if theta >= limit:
        raise ValueError(f"|theta| < sqrt((n-1)/(n+1)) = {limit:.4f} fails")
    if d >= 0.1 * a:
        raise ValueError("d << a_c fails (d must be below a_c/10)")
    if a <= lam:
        raise ValueError("a_c > lambda_c fails")
    cfg.check_thin(fs.k)
    root = np.sqrt(n * n - 1.0)
    bound = 16.0 * n * root**3 * np.log(lam / (4.0 * np.pi * cfg.radius)) \
        * np.exp(4.0 * np.pi * (n - 1.0) / theta)
    k = fs.k
    inv = (np.exp(-2.0 * k * (d * root + (d + a) * (n - 1.0) / theta))
           / (n * (k * a * root) ** 3 * abs(np.log(2.0 * k * cfg.radius))))
    return ChannelEstimate("scattering", float(bound), LOWER_BOUND,
                           {"unsimplified": float(1.0 / inv),
                            "g_numeric": scattering_integral_g(k, cfg.radius),
                            "g_approx": scattering_integral_g_approx(k, cfg.radius)})


def gap_finesse(geom: CavityGeometry, fs: FieldStructure,
                cfg: ElectrodeLossConfig) -> ChannelEstimate:
    """Lower estimate of the finesse limited by dipole scattering at the gap.

    The gap is treated as a conducting sphere of radius ``D/2`` in the
    evanescent field at the optimal rod orientation
    (``cos^2 theta' = 1/3``).  Dividing circulating by scattered power
    gives

        F_g = 48 pi J2(x11)^2 n a^2 exp(2 kappa d) / (k^4 D^6 xi^2 J1(x*)^2 cos^2 theta'),

    which equals ``(12 / pi x11^2 cos^2 theta') n a^4 lambda^2 (n^2-1)
    exp(2 kappa d) / D^6``, about ``0.78 n a^4 lambda^2 (n^2-1) exp(2 kappa d) / D^6``.
    The closed form printed with an extra ``1/xi^2`` is reported as
    ``diagnostics["with_extra_xi2"]``.
    """
    if cfg.gap <= 2.0 * cfg.radius:
        raise ValueError("gap model requires D >> 2R' (got D <= 2R')")
    n, a, d, lam = fs.index, fs.radius, geom.gap, geom.wavelength
    cos2 = 1.0 / 3.0
    j2 = special.jv(2, fs.x11)
    value = (48.0 * np.pi * j2**2 * n * a * a * np.exp(2.0 * fs.kappa_perp * d)
             / (fs.k**4 * cfg.gap**6 * fs.xi**2 * fs.j1_xstar**2 * cos2))
    prefactor = 12.0 / (np.pi * fs.x11**2 * cos2)
    shape = n * a**4 * lam**2 * (n * n - 1.0) \
        * np.exp(4.0 * np.pi * d * np.sqrt(n * n - 1.0) / lam) / cfg.gap**6
    return ChannelEstimate("gap", float(value), LOWER_BOUND,
                           {"prefactor": float(prefactor),
                            "closed_form": float(prefactor * shape),
                            "with_extra_xi2": float(0.8 * shape / fs.xi**2)})


def absorption_finesse(geom: CavityGeometry, fs: FieldStructure,
                       cfg: ElectrodeLossConfig, numeric_j: bool = False) -> ChannelEstimate:
    """Finesse limited by absorption in transparent wire electrodes.

    With ``sigma = s 8 e^2/h`` and ``J ~ sqrt(pi / kappa a)``,

        F_a = sqrt(pi) n a (kappa a)^{5/2} exp(2 kappa d) / (16 alpha_F s R' x11^2 sin theta).

    ``numeric_j`` replaces the steepest-descents ``J`` by quadrature at
    ``K = kappa (d + a)``.  The variant without ``x11^2`` is kept as
    ``diagnostics["without_x11_sq"]``.
    """
    if cfg.theta <= 0:
        raise ValueError("absorption estimate needs theta > 0")
    if not 0 <= cfg.sigma_fraction <= 1:
        raise ValueError("conductivity fraction must lie in (0, 1]")
    n, a, d = fs.index, fs.radius, geom.gap
    ka = fs.kappa_perp * a
    j_factor = np.sqrt(np.pi / ka)
    if numeric_j:
        j_factor = absorption_integral_j(fs.kappa_perp * (d + a))
    if cfg.sigma_fraction == 0:
        value = np.inf
    else:
        value = (np.pi * n * a * ka**2 * np.exp(2.0 * fs.kappa_perp * d)
                 / (j_factor * 16.0 * cfg.alpha_f * cfg.sigma_fraction * cfg.radius
                    * fs.x11**2 * np.sin(cfg.theta)))
    return ChannelEstimate("absorption", float(value), ORDER_ESTIMATE,
                           {"without_x11_sq": float(value * fs.x11**2),
                            "j_used": float(j_factor)})


def combine(finesses, geom: CavityGeometry | None = None,
            names=None) -> FinesseBudget:
    """Combine channel finesses harmonically and derive the linewidth.

    ``finesses`` may hold floats or :class:`ChannelEstimate` objects.
    """
    channels = []
    for i, f in enumerate(finesses):
        if not isinstance(f, ChannelEstimate):
            name = names[i] if names else f"channel_{i}"
            f = ChannelEstimate(name, float(f), ORDER_ESTIMATE, {})
        if not f.finesse > 0:
            raise ValueError(f"finesse of {f.name} must be positive")
        channels.append(f)
    if not channels:
        raise ValueError("at least one channel is required")
    inv = sum(1.0 / ch.finesse for ch in channels)
    total = 1.0 / inv
    linewidth = geom.free_spectral_range / total if geom is not None else float("nan")
    return FinesseBudget(tuple(channels), float(total), float(linewidth))


def intrinsic(geom: CavityGeometry) -> ChannelEstimate:
    """The cavity's own finesse as a channel."""
    return ChannelEstimate("intrinsic", float(geom.finesse), ORDER_ESTIMATE, {})


def degrees(angle_deg: float) -> float:
    return float(np.deg2rad(angle_deg))



