"""Reduced rate model for a driven anharmonic resonator and its sidebands.

After the cavity fields are eliminated, every laser ``j`` drives the
transition ``m -> n`` of the mechanical eigenbasis at rate

    A_j^{nm} = |g_j|^2 X_nm^2 kappa_j / (4 (Delta_j - delta_nm)^2 + kappa_j^2),

and the thermal bath adds ``gamma nbar X_km^2`` upward and
``gamma (nbar + 1) X_lm^2`` downward.  Populations follow a closed
birth-death master matrix; coherences between levels ``n`` and ``m``
decay at the sum of the two levels' escape rates, which sets the width
of each Lorentzian in the probe spectrum.

All rates and frequencies are angular (rad/s or the caller's unit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .constants import HBAR, K_B
from .spectrum import AnharmonicSpectrum

__all__ = [
    "PROBE",
    "PREPARATION",
    "Drive",
    "DriveSet",
    "ThermalBath",
    "SteadyState",
    "Peak",
    "SpectrumResult",
    "ReducibleGeneratorError",
    "bose_occupation",
    "laser_rates",
    "thermal_rates",
    "rate_matrix",
    "generator",
    "steady_populations",
    "effective_linewidths",
    "spectrum_grid",
    "emission_spectrum",
]

PROBE = "probe"
PREPARATION = "preparation"


class ReducibleGeneratorError(RuntimeError):
    """Raised when the population rate graph has no unique steady state."""


def bose_occupation(omega: float, temperature: float) -> float:
    """Thermal occupation ``1 / (exp(hbar omega / k_B T) - 1)`` (omega in rad/s)."""
    if temperature <= 0:
        return 0.0
    return float(1.0 / np.expm1(HBAR * omega / (K_B * temperature)))


@dataclass(frozen=True)
class Drive:
    """One laser acting on the resonator through its own cavity mode.

    Attributes
    ----------
    detuning : float
        ``Delta = omega_L - omega_cavity``; positive is blue.
    coupling : float
        Linearized coupling magnitude ``|g_m|``.
    linewidth : float
        Cavity linewidth ``kappa``.
    role : {"probe", "preparation"}
    """

    detuning: float
    coupling: float
    linewidth: float
    role: str = PREPARATION

    def __post_init__(self):
        if not self.linewidth > 0:
            raise ValueError("cavity linewidth must be positive")
        if self.role not in (PROBE, PREPARATION):
            raise ValueError(f"role must be {PROBE!r} or {PREPARATION!r}")
        if self.role == PROBE and self.detuning != 0:
            raise ValueError("the probe laser sits at zero detuning")


@dataclass(frozen=True)
class DriveSet:
    """Ordered collection of drives; at most one probe."""

    drives: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "drives", tuple(self.drives))
        if sum(d.role == PROBE for d in self.drives) > 1:
            raise ValueError("at most one probe laser is allowed")

    def __iter__(self):
        return iter(self.drives)

    def __len__(self):
        return len(self.drives)

    @property
    def probe(self) -> Drive | None:
        for d in self.drives:
            if d.role == PROBE:
                return d
        return None

    @property
    def preparation(self) -> "DriveSet":
        return DriveSet(tuple(d for d in self.drives if d.role == PREPARATION))

    def scaled_probe(self, factor: float) -> "DriveSet":
        """Copy with the probe power multiplied by ``factor``."""
        out = []
        for d in self.drives:
            if d.role == PROBE:
                d = Drive(d.detuning, d.coupling * np.sqrt(factor), d.linewidth, PROBE)
            out.append(d)
        return DriveSet(tuple(out))


@dataclass(frozen=True)
class ThermalBath:
    """Mechanical bath with damping ``gamma`` and occupation ``nbar``."""

    damping: float
    nbar: float
    temperature: float = float("nan")

    def __post_init__(self):
        if not self.damping > 0:
            raise ValueError("mechanical damping must be positive")
        if self.nbar < 0:
            raise ValueError("thermal occupation must be non-negative")

    @classmethod
    def from_temperature(cls, omega: float, damping: float,
                         temperature: float) -> "ThermalBath":
        """Bath whose occupation follows the Bose law at ``omega``."""
        return cls(damping=damping, nbar=bose_occupation(omega, temperature),
                   temperature=temperature)

    @classmethod
    def from_quality(cls, omega: float, quality: float,
                     temperature: float) -> "ThermalBath":
        """Bath with ``gamma = omega / quality``."""
        return cls.from_temperature(omega, omega / quality, temperature)


def laser_rates(spec: AnharmonicSpectrum, drives) -> np.ndarray:
    """Rate tensor ``A[j, n, m]`` for transitions ``m -> n`` driven by laser ``j``."""
    drives = list(drives)
    x2 = spec.x**2
    delta = spec.delta
    out = np.zeros((len(drives),) + x2.shape)
    for j, d in enumerate(drives):
        out[j] = (d.coupling**2 * x2 * d.linewidth
                  / (4.0 * (d.detuning - delta) ** 2 + d.linewidth**2))
        np.fill_diagonal(out[j], 0.0)
    return out


def thermal_rates(spec: AnharmonicSpectrum, bath: ThermalBath) -> np.ndarray:
    """Bath transition rates ``T[n, m]`` for ``m -> n``."""
    x2 = spec.x**2
    k = spec.n_keep
    up = np.tril(np.ones((k, k)), -1)    # n > m
    down = np.triu(np.ones((k, k)), 1)   # n < m
    return bath.damping * (bath.nbar * up + (bath.nbar + 1.0) * down) * x2


def rate_matrix(spec: AnharmonicSpectrum, drives, bath: ThermalBath) -> np.ndarray:
    """Total transition rates ``R[n, m]`` for ``m -> n`` with zero diagonal."""
    rates = thermal_rates(spec, bath)
    a = laser_rates(spec, drives)
    # Fixed summation order keeps results independent of call context.
    for j in range(a.shape[0]):
        rates = rates + a[j]
    np.fill_diagonal(rates, 0.0)
    return rates


def generator(rates: np.ndarray) -> np.ndarray:
    """Population generator ``G = R - diag(sum_n R[n, m])``; columns sum to zero."""
    g = rates.copy()
    np.fill_diagonal(g, 0.0)
    g[np.diag_indices_from(g)] = -g.sum(axis=0)
    return g


@dataclass(frozen=True)
class SteadyState:
    """Stationary populations of the rate model.

    Attributes
    ----------
    populations : ndarray
        ``P_n`` in the energy eigenbasis, summing to one.
    generator : ndarray
        Population generator ``G`` with ``G P = 0``.
    rates : ndarray
        Transition rates ``R[n, m]`` for ``m -> n``.
    residual : float
        ``max |G P|`` of the solution.
    """

    populations: np.ndarray = field(repr=False)
    generator: np.ndarray = field(repr=False)
    rates: np.ndarray = field(repr=False)
    residual: float = 0.0

    @property
    def escape_rates(self) -> np.ndarray:
        """Total rate out of each level."""
        return self.rates.sum(axis=0)


def _check_irreducible(rates: np.ndarray, tol: float):
    graph = (rates > tol * max(rates.max(), 1e-300)).astype(float)
    count, labels = csgraph.connected_components(graph, directed=True,
                                                 connection="strong")
    if count != 1:
        groups = {}
        for level, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(level)
        raise ReducibleGeneratorError(
            f"rate graph splits into {count} strongly connected classes: "
            f"{sorted(groups.values())}")


def steady_populations(spec: AnharmonicSpectrum, drives, bath: ThermalBath,
                       rates: np.ndarray | None = None) -> SteadyState:
    """Solve ``G P = 0`` with ``sum P = 1`` by a direct linear solve."""
    if rates is None:
        rates = rate_matrix(spec, drives, bath)
    _check_irreducible(rates, 0.0)
    g = generator(rates)
    k = g.shape[0]
    lhs = g.copy()
    lhs[-1, :] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    p = np.linalg.solve(lhs, rhs)
    if np.min(p) < -1e-9:
        raise ReducibleGeneratorError(f"negative population {np.min(p):.3e} in solution")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return SteadyState(populations=p, generator=g, rates=rates,
                       residual=float(np.max(np.abs(g @ p))))


def effective_linewidths(spec: AnharmonicSpectrum, drives, bath: ThermalBath,
                         rates: np.ndarray | None = None) -> np.ndarray:
    """Coherence decay widths ``gamma_eff^{nm} = Gamma_n + Gamma_m``.

    ``Gamma_k`` is the total escape rate of level ``k`` through all lasers
    and the bath, which regroups the laser and thermal sums term by term.
    """
    if rates is None:
        rates = rate_matrix(spec, drives, bath)
    out = rates.sum(axis=0)
    return out[:, None] + out[None, :]


@dataclass(frozen=True)
class Peak:
    """One Lorentzian sideband line at ``omega - omega_L = delta_nm``."""

    n: int
    m: int
    position: float
    width: float
    weight: float


@dataclass(frozen=True)
class SpectrumResult:
    """Sampled probe-output spectrum and its peak decomposition."""

    offsets: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    peaks: tuple = ()

    def nearest_peaks(self) -> np.ndarray:
        """Index into ``peaks`` of the closest line for every grid point."""
        pos = np.array([p.position for p in self.peaks])
        return np.argmin(np.abs(self.offsets[:, None] - pos[None, :]), axis=1)


def _peak_list(spec, steady, probe, linewidths, kappa_ex_fraction):
    a0 = laser_rates(spec, [probe])[0]
    p = steady.populations
    delta = spec.delta
    peaks = []
    k = spec.n_keep
    for n in range(k):
        for m in range(k):
            if n == m or a0[n, m] == 0.0 or p[n] == 0.0:
                continue
            weight = kappa_ex_fraction * a0[n, m] * p[n]
            peaks.append(Peak(n=n, m=m, position=float(delta[n, m]),
                              width=float(linewidths[n, m]), weight=float(weight)))
    return peaks


def spectrum_grid(peaks, n_points: int = 4096, window: float | None = None,
                  refine: int = 64, span: float = 10.0,
                  min_relative_weight: float = 1e-4) -> np.ndarray:
    """Sorted evaluation grid with extra points around each peak.

    The base grid spans ``[-1.2 W, 1.2 W]``, where ``W`` is the largest
    offset among peaks carrying at least ``min_relative_weight`` of the
    strongest weight.  Each such peak adds ``refine`` points within
    ``span`` linewidths of its centre.
    """
    if n_points < 2:
        raise ValueError("the spectrum grid needs at least two points")
    if not peaks:
        raise ValueError("no spectral lines to sample")
    top = max(p.weight for p in peaks)
    strong = [p for p in peaks if p.weight >= min_relative_weight * top]
    if window is None:
        window = 1.2 * max(abs(p.position) for p in strong)
    parts = [np.linspace(-window, window, n_points)]
    for p in strong:
        if abs(p.position) <= window:
            parts.append(p.position + span * p.width * np.linspace(-1.0, 1.0, refine))
    grid = np.unique(np.concatenate(parts))
    return grid[(grid >= -window) & (grid <= window)]


def _evaluate(offsets, peaks, scale):
    acc = np.zeros_like(offsets)
    for p in peaks:
        acc = acc + scale * p.weight * p.width / (
            (offsets - p.position) ** 2 + 0.25 * p.width**2)
    return acc


def emission_spectrum(spec: AnharmonicSpectrum, steady: SteadyState, drives,
                      bath: ThermalBath, kappa_ex_fraction: float,
                      grid=None, partitions: int = 1, **grid_options) -> SpectrumResult:
    """Probe-output sideband spectrum as a sum of Lorentzians.

    ``S(w) = 1/(2 pi) sum_nm w_nm gamma_nm / ((w - w_L - delta_nm)^2 + gamma_nm^2/4)``
    with line weight ``w_nm = (kappa_ex/kappa) A_0^{nm} P_n``, so each term
    integrates to its weight.

    Parameters
    ----------
    grid : array_like, optional
        Offsets ``omega - omega_L``.  Built by :func:`spectrum_grid` when
        omitted.
    partitions : int
        Number of contiguous chunks evaluated independently.  The result
        does not depend on it.
    """
    drives = DriveSet(tuple(drives))
    probe = drives.probe
    if probe is None:
        raise ValueError("the emission spectrum needs a probe laser")
    rates = steady.rates
    widths = effective_linewidths(spec, drives, bath, rates=rates)
    peaks = _peak_list(spec, steady, probe, widths, kappa_ex_fraction)
    if grid is None:
        grid = spectrum_grid(peaks, **grid_options)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty frequency grid")
    chunks = np.array_split(grid, max(1, int(partitions)))
    values = np.concatenate([_evaluate(c, peaks, 1.0 / (2.0 * np.pi)) for c in chunks])
    return SpectrumResult(offsets=grid, values=values, peaks=tuple(peaks))
