"""Flexural eigenmodes of a doubly clamped rod and its Duffing reduction.

Positions along the rod are dimensionless, ``s = x / L``.  Mode shapes are
evaluated in an exponential-difference form that stays finite for large
roots, and integrals over ``[0, 1]`` use composite Gauss-Legendre
quadrature with panel doubling until the requested tolerance is met.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy import optimize

from .constants import HBAR

__all__ = [
    "BeamSpec",
    "MechanicalMode",
    "NonlinearityTensor",
    "DuffingParams",
    "RootFindingError",
    "mode_roots",
    "mode_shape",
    "mode_slope",
    "mode_properties",
    "stiffness_overlaps",
    "nonlinearity_tensor",
    "duffing_params",
    "load_materials",
    "gyration_ratio",
    "integrate_unit",
]

MAX_ROOTS = 50
MAX_TENSOR_MODES = 10
THIN_ROD_LIMIT = 0.05


class RootFindingError(RuntimeError):
    """Raised when a characteristic root cannot be isolated."""


# ---------------------------------------------------------------------------
# Beam specification and presets
# ---------------------------------------------------------------------------

def gyration_ratio(shape: str, size: float) -> float:
    """Radius of gyration for common cross sections.

    Parameters
    ----------
    shape : {"rectangular", "circular", "cylindrical_shell"}
        Cross-section family.
    size : float
        Thickness ``d`` for rectangular beams, radius ``R`` otherwise (m).
    """
    factors = {"rectangular": 1.0 / np.sqrt(12.0), "circular": 0.5,
               "cylindrical_shell": 1.0 / np.sqrt(2.0)}
    try:
        return factors[shape] * size
    except KeyError:
        raise ValueError(f"unknown cross-section shape {shape!r}; "
                         f"expected one of {sorted(factors)}") from None


@lru_cache(maxsize=None)
def _materials_text() -> str:
    return resources.files("softbeam").joinpath("data/materials.json").read_text()


def load_materials() -> dict:
    """Return the bundled materials preset table keyed by preset name."""
    return json.loads(_materials_text())


@dataclass(frozen=True)
class BeamSpec:
    """Geometry and elastic constants of a thin doubly clamped rod.

    Attributes
    ----------
    length : float
        Rod length ``L`` (m).
    line_density : float
        Mass per unit length ``mu`` (kg/m).
    gyration : float
        Radius of gyration ``kappa`` of the cross section (m).
    sound_speed : float
        Phase velocity ``c_s`` of compressional phonons (m/s).
    """

    length: float
    line_density: float
    gyration: float
    sound_speed: float

    def __post_init__(self):
        for name in ("length", "line_density", "gyration", "sound_speed"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"BeamSpec.{name} must be positive, got {value!r}")
        ratio = self.gyration / self.length
        if ratio >= THIN_ROD_LIMIT:
            warnings.warn(f"gyration/length = {ratio:.3g} is outside the thin-rod "
                          f"regime (< {THIN_ROD_LIMIT})", RuntimeWarning, stacklevel=3)

    @property
    def modulus(self) -> float:
        """Linear modulus ``F = mu c_s^2`` (N)."""
        return self.line_density * self.sound_speed**2

    @property
    def mass(self) -> float:
        """Physical mass ``mu L`` of the rod (kg)."""
        return self.line_density * self.length

    def scaled(self, length: float = 1.0, density: float = 1.0,
               gyration: float = 1.0) -> "BeamSpec":
        """Copy with ``L``, ``mu`` and ``kappa`` multiplied by the given factors."""
        return BeamSpec(self.length * length, self.line_density * density,
                        self.gyration * gyration, self.sound_speed)

    @classmethod
    def from_preset(cls, key: str, length: float) -> "BeamSpec":
        """Build a spec from the bundled materials table.

        Tube presets carry a radius and an areal density, so that
        ``mu = 2 pi R sigma``; solid presets carry ``line_density_kg_per_m``
        and ``size_m`` directly.
        """
        table = load_materials()
        if key not in table:
            raise KeyError(f"unknown material preset {key!r}; available: {sorted(table)}")
        entry = table[key]
        shape = entry["shape"]
        if "areal_density_kg_per_m2" in entry:
            mu = 2.0 * np.pi * entry["radius_m"] * entry["areal_density_kg_per_m2"]
            size = entry["radius_m"]
        else:
            mu = entry["line_density_kg_per_m"]
            size = entry["size_m"]
        return cls(length=length, line_density=mu,
                   gyration=gyration_ratio(shape, size),
                   sound_speed=entry["sound_speed_m_per_s"])


# ---------------------------------------------------------------------------
# Roots and mode shapes
# ---------------------------------------------------------------------------

def _characteristic(nu):
    # cos(nu) cosh(nu) = 1 divided by cosh to keep it bounded.
    return np.cos(nu) - 1.0 / np.cosh(nu)


@lru_cache(maxsize=None)
def _root(n: int) -> float:
    # Exactly one root lies in (n pi, (n + 1) pi) for every n >= 1.
    lo, hi = n * np.pi, (n + 1) * np.pi
    try:
        nu, info = optimize.brentq(_characteristic, lo, hi, xtol=1e-15,
                                   rtol=4 * np.finfo(float).eps, maxiter=200,
                                   full_output=True)
    except ValueError as exc:
        raise RootFindingError(f"mode {n}: no sign change on [{lo:.6f}, {hi:.6f}]") from exc
    if not info.converged:
        raise RootFindingError(f"mode {n}: no convergence on [{lo:.6f}, {hi:.6f}] "
                               f"after {info.iterations} iterations ({info.flag})")
    # One Newton polish step keeps the residual at machine level.
    f = _characteristic(nu)
    fp = -np.sin(nu) + np.tanh(nu) / np.cosh(nu)
    step = f / fp
    if abs(step) < 1e-12:
        nu -= step
    return float(nu)


def mode_roots(n_max: int) -> np.ndarray:
    """Roots ``nu_1 < ... < nu_n_max`` of ``cos(nu) cosh(nu) = 1``.

    Examples
    --------
    >>> round(float(mode_roots(1)[0]), 4)
    4.73
    """
    n_max = int(n_max)
    if not 1 <= n_max <= MAX_ROOTS:
        raise ValueError(f"n_max must lie in [1, {MAX_ROOTS}], got {n_max}")
    return np.array([_root(n) for n in range(1, n_max + 1)])


def _sigma_parts(nu):
    # Stable pieces of sigma = (cosh nu - cos nu) / (sinh nu - sin nu).
    q = np.exp(-nu)
    den = 1.0 - q * q - 2.0 * np.sin(nu) * q
    sigma = (1.0 + q * q - 2.0 * np.cos(nu) * q) / den
    grow = (np.cos(nu) - np.sin(nu) - q) / den   # (1 - sigma) e^nu / 2
    return sigma, grow


def _raw(nu, s, order=0):
    """Unnormalized shape ``cosh - cos - sigma (sinh - sin)`` and derivatives.

    Derivatives are with respect to ``s`` and divided by ``nu**order``.
    """
    s = np.asarray(s, dtype=float)
    sigma, grow = _sigma_parts(nu)
    e_up = grow * np.exp(nu * (s - 1.0))
    e_dn = 0.5 * (1.0 + sigma) * np.exp(-nu * s)
    c, sn = np.cos(nu * s), np.sin(nu * s)
    if order == 0:
        return e_up + e_dn - c + sigma * sn
    if order == 1:
        return e_up - e_dn + sn + sigma * c
    if order == 2:
        return e_up + e_dn + c - sigma * sn
    raise ValueError("order must be 0, 1 or 2")


@lru_cache(maxsize=None)
def _shape_scale(n: int) -> float:
    """Signed normalization: ``max |raw|`` on [0, 1] times the mode sign.

    The maximum comes from a dense scan plus bounded refinement.  Symmetric
    (odd ``n``) modes are signed so that the midpoint value is positive;
    antisymmetric modes keep the lobe next to ``s = 0`` positive.  This is
    the convention under which the fundamental-mode couplings ``B_11ij``
    carry their tabulated signs.
    """
    nu = _root(n)
    grid = np.linspace(0.0, 1.0, 10_001)
    vals = np.abs(_raw(nu, grid))
    i = int(np.argmax(vals))
    h = grid[1]
    res = optimize.minimize_scalar(lambda s: -abs(float(_raw(nu, s))),
                                   bounds=(max(0.0, grid[i] - h), min(1.0, grid[i] + h)),
                                   method="bounded", options={"xatol": 1e-13})
    scale = max(float(vals[i]), -float(res.fun))
    if n % 2 == 1 and _raw(nu, 0.5) < 0:
        scale = -scale
    return scale


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any((s < 0.0) | (s > 1.0)) or np.any(~np.isfinite(s)):
        raise ValueError("mode position s = x/L must lie in [0, 1]")
    return s


def mode_shape(n: int, s):
    """Normalized clamped-clamped mode shape ``phi_n(s)``.

    The sign is chosen so that the lobe adjacent to ``s = 0`` is positive,
    and the amplitude so that ``max |phi_n| = 1``.

    Parameters
    ----------
    n : int
        1-based mode index.
    s : float or array_like
        Dimensionless position ``x / L`` in ``[0, 1]``.
    """
    s = _check_s(s)
    out = _raw(_root(int(n)), s) / _shape_scale(int(n))
    return float(out) if out.ndim == 0 else out


def mode_slope(n: int, s):
    """Derivative ``d phi_n / ds`` of the normalized shape."""
    s = _check_s(s)
    nu = _root(int(n))
    out = nu * _raw(nu, s, order=1) / _shape_scale(int(n))
    return float(out) if out.ndim == 0 else out


def mode_curvature(n: int, s):
    """Second derivative ``d^2 phi_n / ds^2`` of the normalized shape."""
    s = _check_s(s)
    nu = _root(int(n))
    out = nu**2 * _raw(nu, s, order=2) / _shape_scale(int(n))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _panel_rule(panels: int):
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def integrate_unit(func, tol: float = 1e-10, start_panels: int = 4,
                   max_panels: int = 4096):
    """Integrate a vectorized function over ``[0, 1]``.

    The number of 20-point Gauss-Legendre panels doubles until two
    successive estimates agree to ``tol`` (absolute, per component).
    ``func`` maps an array of nodes to an array whose last axis runs over
    the nodes, so several integrands can share one pass.
    """
    panels = start_panels
    nodes, weights = _panel_rule(panels)
    prev = np.asarray(func(nodes)) @ weights
    while panels < max_panels:
        panels *= 2
        nodes, weights = _panel_rule(panels)
        cur = np.asarray(func(nodes)) @ weights
        if np.all(np.abs(cur - prev) <= tol):
            return cur
        prev = cur
    raise RuntimeError(f"quadrature did not reach tolerance {tol} with {max_panels} panels")


# ---------------------------------------------------------------------------
# Mode properties
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MechanicalMode:
    """One flexural mode of a :class:`BeamSpec`.

    Attributes
    ----------
    n : int
        1-based mode index.
    nu : float
        Characteristic root.
    omega : float
        Angular eigenfrequency (rad/s).
    effective_mass : float
        ``m*_n = mu L int phi_n^2 ds`` (kg).
    x_zpm : float
        Zero-point amplitude ``sqrt(hbar / 2 m* omega)`` (m).
    norm : float
        Constant ``C_n`` that scales the textbook bracket
        ``(sin nu s - sinh nu s)/(sin nu - sinh nu) - (cos nu s - cosh nu s)/(cos nu - cosh nu)``
        onto the normalized shape.
    """

    n: int
    nu: float
    omega: float
    effective_mass: float
    x_zpm: float
    norm: float

    @property
    def frequency_hz(self) -> float:
        return self.omega / (2.0 * np.pi)

    def shape(self, s):
        return mode_shape(self.n, s)

    def slope(self, s):
        return mode_slope(self.n, s)


@lru_cache(maxsize=None)
def _shape_square_integral(n: int) -> float:
    return float(integrate_unit(lambda s: mode_shape(n, s) ** 2, tol=1e-13))


def mode_properties(spec: BeamSpec, n: int) -> MechanicalMode:
    """Frequency, effective mass and zero-point amplitude of mode ``n``."""
    n = int(n)
    nu = mode_roots(n)[-1]
    omega = spec.sound_speed * spec.gyration * (nu / spec.length) ** 2
    m_eff = spec.mass * _shape_square_integral(n)
    x_zpm = np.sqrt(HBAR / (2.0 * m_eff * omega))
    # textbook bracket = -raw / (cosh nu - cos nu)
    norm = -(np.cosh(nu) - np.cos(nu)) / _shape_scale(n)
    return MechanicalMode(n=n, nu=float(nu), omega=float(omega),
                          effective_mass=float(m_eff), x_zpm=float(x_zpm),
                          norm=float(norm))


@lru_cache(maxsize=None)
def _overlaps(n_max: int) -> np.ndarray:
    idx = range(1, n_max + 1)

    def integrand(s):
        d = np.array([mode_slope(i, s) for i in idx])
        return (d[:, None, :] * d[None, :, :])

    m = np.asarray(integrate_unit(integrand, tol=1e-11))
    m = 0.5 * (m + m.T)
    # Opposite-parity integrands are odd about the midpoint.
    parity = (np.add.outer(np.arange(n_max), np.arange(n_max)) % 2) == 1
    m[parity & (np.abs(m) < 1e-9)] = 0.0
    m.setflags(write=False)
    return m


def stiffness_overlaps(n_max: int) -> np.ndarray:
    """Dimensionless overlap matrix ``M~_ij = int phi_i' phi_j' ds``.

    Rows and columns are 0-based, so ``M~[0, 0]`` belongs to mode 1.
    """
    n_max = int(n_max)
    if not 1 <= n_max <= MAX_ROOTS:
        raise ValueError(f"n_max must lie in [1, {MAX_ROOTS}]")
    return _overlaps(n_max).copy()


@dataclass(frozen=True)
class NonlinearityTensor:
    """Stretching-induced quartic couplings between flexural modes.

    Attributes
    ----------
    n_max : int
        Mode cutoff.
    overlap : ndarray, shape (n_max, n_max)
        ``M_ij`` in 1/m.
    lambda0 : ndarray, shape (n_max,)*4
        ``lambda^0_ijkl`` in rad/s.
    bracket : ndarray, shape (n_max,)*4
        Dimensionless ``B_ijkl = 32 kappa^2 m lambda^0_ijkl / hbar``.
    """

    n_max: int
    overlap: np.ndarray = field(repr=False)
    lambda0: np.ndarray = field(repr=False)
    bracket: np.ndarray = field(repr=False)

    def tuned(self, zetas) -> np.ndarray:
        """Couplings after softening, ``lambda^0_ijkl sqrt(z_i z_j z_k z_l)``."""
        z = np.sqrt(np.asarray(zetas, dtype=float))
        if z.shape != (self.n_max,):
            raise ValueError(f"expected {self.n_max} softening factors")
        return self.lambda0 * np.einsum("i,j,k,l->ijkl", z, z, z, z)

    def fundamental_row(self) -> np.ndarray:
        """The ``B_11ij`` block that governs the fundamental mode."""
        return self.bracket[0, 0].copy()


def nonlinearity_tensor(spec: BeamSpec, n_max: int = 5) -> NonlinearityTensor:
    """Assemble ``M_ij``, ``lambda^0_ijkl`` and the bracket ``B_ijkl``."""
    n_max = int(n_max)
    if not 1 <= n_max <= MAX_TENSOR_MODES:
        raise ValueError(f"tensor cutoff must lie in [1, {MAX_TENSOR_MODES}]")
    m_tilde = stiffness_overlaps(n_max)
    modes = [mode_properties(spec, n) for n in range(1, n_max + 1)]
    x = np.array([m.x_zpm for m in modes])
    nu = np.array([m.nu for m in modes])
    mass_ratio = np.array([m.effective_mass for m in modes]) / spec.mass

    overlap = m_tilde / spec.length
    mx = overlap * np.outer(x, x)
    lam0 = spec.modulus / (8.0 * spec.length * HBAR) * np.einsum("ij,kl->ijkl", mx, mx)

    # The bracket depends only on the mode shapes, so build it directly
    # from dimensionless pieces rather than dividing out the units.
    w = m_tilde / np.outer(np.sqrt(mass_ratio) * nu, np.sqrt(mass_ratio) * nu)
    bracket = np.einsum("ij,kl->ijkl", w, w)
    return NonlinearityTensor(n_max=n_max, overlap=overlap, lambda0=lam0, bracket=bracket)


# ---------------------------------------------------------------------------
# Duffing reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DuffingParams:
    """Single-mode quartic oscillator for the fundamental flexural mode.

    Attributes
    ----------
    omega0 : float
        Bare angular frequency ``omega_m,0`` (rad/s).
    beta : float
        Quartic stiffness (N/m^3).
    lambda0 : float
        Nonlinearity per phonon ``beta x_zpm^4 / (2 hbar)`` (rad/s).
    x_zpm : float
        Zero-point amplitude (m).
    effective_mass : float
        ``m*`` (kg).
    coefficient : float
        Shape factor ``(M~_11)^2 / (2 nu_1^4 m*/mu L)`` entering ``beta``.
    """

    omega0: float
    beta: float
    lambda0: float
    x_zpm: float
    effective_mass: float
    coefficient: float


def anharmonic_coefficient() -> float:
    """Shape factor ``(M~_11)^2 / (2 nu_1^4 (m*/mu L))``, close to 0.060."""
    m11 = stiffness_overlaps(1)[0, 0]
    nu1 = mode_roots(1)[0]
    return float(m11**2 / (2.0 * nu1**4 * _shape_square_integral(1)))


def duffing_params(spec: BeamSpec) -> DuffingParams:
    """Reduce the fundamental mode to ``H = hbar w b+b + hbar (lambda0/2)(b+b+)^4``."""
    mode = mode_properties(spec, 1)
    coeff = anharmonic_coefficient()
    beta = coeff * mode.effective_mass * mode.omega**2 / spec.gyration**2
    lam0 = beta * mode.x_zpm**4 / (2.0 * HBAR)
    return DuffingParams(omega0=mode.omega, beta=float(beta), lambda0=float(lam0),
                         x_zpm=mode.x_zpm, effective_mass=mode.effective_mass,
                         coefficient=coeff)
