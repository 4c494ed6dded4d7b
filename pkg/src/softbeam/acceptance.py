"""Acceptance criteria shared by the ``verify`` command and the test suite.

Every criterion returns a :class:`CriterionResult` made of named checks.
A criterion passes when all of its checks pass.  Criteria whose reference
value cannot be met by a faithful implementation are listed in
``KNOWN_GAPS`` together with the failing check names, so that reports can
separate documented discrepancies from regressions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .beam import (BeamSpec, anharmonic_coefficient, duffing_params, mode_properties,
                   mode_roots, nonlinearity_tensor)
from .constants import HBAR, TWO_PI, hz_to_rad
from .coupling import (CavityGeometry, coupling_g0, field_structure, g0_sensitivity,
                       optimize_placement)
from .dynamics import (Drive, ThermalBath, bose_occupation, effective_linewidths,
                       emission_spectrum, laser_rates, steady_populations)
from .electrostatics import (ANGSTROM_POLARIZABILITY, johnson_decoherence,
                             one_over_f_decoherence, soften_to_frequency)
from .liouvillian import build_system, fit_correlator_decay, full_liouvillian_steady
from .losses import (ElectrodeLossConfig, absorption_finesse, combine, gap_finesse,
                     intrinsic, scattering_finesse)
from .scenario import Model, bundled_scenario
from .spectrum import (AnharmonicSpectrum, build_hamiltonian, diagonalize,
                       position_matrix, rwa_spectrum)

__all__ = [
    "Check",
    "CriterionResult",
    "CRITERIA",
    "KNOWN_GAPS",
    "evaluate",
    "run_all",
    "format_line",
]

A3 = ANGSTROM_POLARIZABILITY

# Reference parameter set of the coupling and loss estimates.
REFERENCE_CAVITY = dict(wavelength=1.1e-6, index=1.44, rim_radius=2.0e-6,
                        circumference=1e-3, gap=50e-9)
REFERENCE_ALPHA_PAR = 143.0 * A3
REFERENCE_ALPHA_PERP = 10.9 * A3
REFERENCE_E_FIELD = 1.2e7
REFERENCE_LENGTH = 1e-6

# Oracle regime (dimensionless units with omega = 1).
ORACLE = dict(omega=1.0, lam=0.01, kappa=0.02, coupling=0.0015, damping=3e-5,
              nbar=0.3, n_mech=6, n_phot=4)

PREPARED_POPULATIONS = np.array([0.0391, 0.9137, 0.0430])

# criterion number -> names of checks expected to fail, with the reason.
KNOWN_GAPS = {
    9: ({"F_g within x2 of 3e9"},
        "the gap-scattering estimate derived from the stated dipole model gives "
        "1.0e10, a factor 3.4 above the quoted 3e9"),
    11: ({"first-group splitting = lambda' +- 3%", "populations within 0.02"},
         "exact diagonalization puts the fine-structure spacing 13.5% below the "
         "first-order value lambda' = 6 lambda, and no admissible detuning "
         "convention brings P1 within 0.02 of 0.9137"),
}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    checks: tuple
    report: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> set:
        return {c.name for c in self.checks if not c.passed}


def _within(value, target, tol, relative=False):
    dev = abs(value - target) / abs(target) if relative else abs(value - target)
    return dev <= tol


def _factor(value, target, factor):
    return target / factor <= value <= target * factor


def _reference_beam() -> BeamSpec:
    return BeamSpec.from_preset("cnt_10_0", REFERENCE_LENGTH)


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def criterion_1() -> CriterionResult:
    roots = mode_roots(10)
    resid = np.abs(np.cos(roots) * np.cosh(roots) - 1.0) / np.cosh(roots)
    return CriterionResult(1, "transcendental roots", (
        Check("nu_1 = 4.73 +- 0.005", _within(roots[0], 4.73, 0.005), f"nu_1 = {roots[0]:.6f}"),
        Check("residual < 1e-10 for n <= 10", bool(resid.max() < 1e-10),
              f"max residual = {resid.max():.2e}"),
    ))


def criterion_2() -> CriterionResult:
    beam = _reference_beam()
    ratio = mode_properties(beam, 1).effective_mass / beam.mass
    return CriterionResult(2, "effective mass", (
        Check("m*/(mu L) = 0.3965 +- 5e-4", _within(ratio, 0.3965, 5e-4),
              f"m*/(mu L) = {ratio:.6f}"),
    ))


def criterion_3() -> CriterionResult:
    c = anharmonic_coefficient()
    return CriterionResult(3, "anharmonicity coefficient", (
        Check("coefficient = 0.060 +- 0.001", _within(c, 0.060, 0.001), f"coefficient = {c:.6f}"),
    ))


def criterion_4() -> CriterionResult:
    d = duffing_params(_reference_beam())
    f0 = d.omega0 / TWO_PI
    lam_ordinary = d.lambda0 / TWO_PI
    lam_angular = d.lambda0
    ordinary_ok = _within(lam_ordinary, 2.24e3, 0.05, relative=True)
    angular_ok = _within(lam_angular, 2.24e3, 0.05, relative=True)
    return CriterionResult(4, "reference nanotube", (
        Check("omega_m,0/2pi = 20.6 MHz +- 1%", _within(f0, 20.6e6, 0.01, relative=True),
              f"f0 = {f0 / 1e6:.4f} MHz"),
        Check("lambda_0 = 2.24 kHz +- 5% (ordinary frequency)", ordinary_ok,
              f"lambda_0/2pi = {lam_ordinary:.1f} Hz"),
        Check("unit reading: only the ordinary-frequency reading matches",
              ordinary_ok and not angular_ok,
              f"angular value {lam_angular:.1f} rad/s would be off by "
              f"{lam_angular / 2.24e3:.2f}x"),
    ))


BRACKET_REFERENCE = {(1, 1): 0.3024, (1, 3): 0.1029, (1, 5): -0.0512, (2, 2): 0.4106,
           (2, 4): -0.0848, (3, 3): 0.4498, (3, 5): 0.0705, (4, 4): 0.4721,
           (5, 5): 0.486232}


def criterion_5() -> CriterionResult:
    table = nonlinearity_tensor(_reference_beam(), 5).fundamental_row()
    checks = []
    for (i, j), ref in BRACKET_REFERENCE.items():
        tol = 1e-5 if (i, j) == (5, 5) else 1e-3
        val = table[i - 1, j - 1]
        checks.append(Check(f"B_11{i}{j} = {ref}", abs(val - ref) <= tol, f"{val:.6f}"))
    parity = (np.add.outer(np.arange(5), np.arange(5)) % 2).astype(bool)
    odd_max = float(np.abs(table[parity]).max())
    checks.append(Check("opposite-parity entries < 1e-8", odd_max < 1e-8,
                        f"max |B| = {odd_max:.1e}"))
    return CriterionResult(5, "Bracket table", tuple(checks))


def criterion_6() -> CriterionResult:
    tuned = soften_to_frequency(duffing_params(_reference_beam()), hz_to_rad(5.23e6))
    lam_p = tuned.lam_rwa / TWO_PI
    return CriterionResult(6, "softening chain", (
        Check("lambda' = 209 kHz +- 2%", _within(lam_p, 209e3, 0.02, relative=True),
              f"zeta = {tuned.zeta:.4f}, lambda'/2pi = {lam_p / 1e3:.2f} kHz"),
    ))


def _absolute_levels(lam: float, n: int = 80, k: int = 6) -> np.ndarray:
    return np.linalg.eigvalsh(build_hamiltonian(1.0, lam, n))[:k]


def criterion_7() -> CriterionResult:
    from .spectrum import duffing_spectrum
    lam = 1e-3
    exact = duffing_spectrum(1.0, lam, n_keep=6).energies[1:6]
    rwa = rwa_spectrum(1.0, lam, 5)[1:6]
    dev = float(np.max(np.abs(exact - rwa) / rwa))
    h = 1e-6
    e0, e1, e2 = (_absolute_levels(x) - 0.0 for x in (0.0, h, 2 * h))
    slope = (4.0 * e1 - e2 - 3.0 * e0) / (2.0 * h)
    n = np.arange(6)
    expected = (6 * n**2 + 6 * n + 3) / 2.0
    slope_dev = float(np.max(np.abs(slope - expected) / expected))
    return CriterionResult(7, "spectrum diagonalization", (
        Check("E_1..E_5 within 1% of first-order levels", dev < 0.01,
              f"max relative deviation = {dev:.2e}"),
        Check("dE_n/dlambda = (6n^2+6n+3)/2 to 1e-4", slope_dev < 1e-4,
              f"max relative deviation = {slope_dev:.2e}"),
    ))


def _reference_geometry(convention: str = "paper") -> CavityGeometry:
    return CavityGeometry(**REFERENCE_CAVITY, ac_convention=convention)


def criterion_8() -> CriterionResult:
    geom = _reference_geometry()
    fs = field_structure(geom)
    place = optimize_placement(fs, geom.gap)
    g0 = coupling_g0(geom, REFERENCE_ALPHA_PAR, REFERENCE_LENGTH, fs=fs)
    rows = g0_sensitivity(geom, REFERENCE_ALPHA_PAR, REFERENCE_LENGTH, 1.02e10)
    return CriterionResult(8, "evanescent coupling", (
        Check("xi = 0.2 +- 15%", _within(fs.xi, 0.2, 0.15, relative=True), f"xi = {fs.xi:.4f}"),
        Check("1/kappa_perp = 0.17 um +- 5%",
              _within(fs.decay_length, 0.17e-6, 0.05, relative=True),
              f"1/kappa_perp = {fs.decay_length * 1e6:.4f} um"),
        Check("1/C_corr = 22 +- 2", _within(1.0 / place.c_corr, 22.0, 2.0),
              f"1/C_corr = {1.0 / place.c_corr:.2f} (leading order "
              f"{1.0 / place.c_corr_leading:.2f})"),
        Check("G0 within x2 of 1.02e10", _factor(g0, 1.02e10, 2.0),
              f"G0 = {g0:.3e} rad/(s m), ratio {g0 / 1.02e10:.2f}"),
        Check("sensitivity report", len(rows) >= 5 and all(np.isfinite(r["ratio"])
                                                            for r in rows[:5]),
              "; ".join(f"{r['variant']}: {r['ratio']:.2f}" for r in rows)),
    ), report={"sensitivity": rows})


def loss_budget():
    """Channel estimates and combined finesse at the reference placement."""
    geom = _reference_geometry()
    fs = field_structure(geom)
    scat = scattering_finesse(geom, fs, ElectrodeLossConfig(10e-9, np.deg2rad(10.0)))
    gap = gap_finesse(geom, fs, ElectrodeLossConfig(10e-9, np.deg2rad(10.0), gap=40e-9))
    absn = absorption_finesse(geom, fs, ElectrodeLossConfig(
        2.5e-9, np.deg2rad(3.0), sigma_fraction=0.05))
    return combine([intrinsic(geom), scat, gap, absn], geom=geom)


def criterion_9() -> CriterionResult:
    budget = loss_budget()
    f_s = budget.by_name("scattering").finesse
    f_g = budget.by_name("gap").finesse
    f_a = budget.by_name("absorption").finesse
    rel = (budget.combined - 3e6) / 3e6
    return CriterionResult(9, "loss bounds", (
        Check("F_s within x2 of 3e15", _factor(f_s, 3e15, 2.0), f"F_s = {f_s:.3e}"),
        Check("F_g within x2 of 3e9", _factor(f_g, 3e9, 2.0),
              f"F_g = {f_g:.3e} (ratio {f_g / 3e9:.2f})"),
        Check("F_a within x2 of 3e8", _factor(f_a, 3e8, 2.0), f"F_a = {f_a:.3e}"),
        Check("combined finesse within 1% of 3e6", abs(rel) < 0.01,
              f"F = {budget.combined:.4e} ({100 * rel:+.2f}%), kappa/2pi = "
              f"{budget.linewidth / TWO_PI / 1e3:.1f} kHz"),
    ))


def criterion_10() -> CriterionResult:
    d = duffing_params(_reference_beam())
    omega = hz_to_rad(5.23e6)
    nbar = bose_occupation(omega, 0.02)
    gamma_nbar = omega / 5e6 * nbar
    johnson = johnson_decoherence(0.02, 1.0, d.x_zpm, REFERENCE_ALPHA_PAR,
                                  REFERENCE_E_FIELD, 20e-9)
    flicker = one_over_f_decoherence(4.0, hz_to_rad(3.9e3), 300.0, omega, 0.02,
                                     d.x_zpm, REFERENCE_ALPHA_PAR, REFERENCE_E_FIELD)
    return CriterionResult(10, "noise estimators", (
        Check("nbar = 79 +- 1", _within(nbar, 79.0, 1.0), f"nbar = {nbar:.2f}"),
        Check("gamma nbar ~ 0.1 kHz", 50.0 <= gamma_nbar / TWO_PI <= 150.0,
              f"gamma nbar/2pi = {gamma_nbar / TWO_PI:.1f} Hz"),
        Check("Gamma_dU/R_e <~ 1e-2 Hz/Ohm", johnson <= 1e-2,
              f"Gamma_dU/R_e = {johnson:.2e} 1/(s Ohm)"),
        Check("Gamma_1/f <~ 0.15 Hz", flicker <= 0.15, f"Gamma_1/f = {flicker:.3f} 1/s"),
        Check("both below gamma nbar", max(johnson, flicker) < gamma_nbar / TWO_PI,
              f"ratio {max(johnson, flicker) / (gamma_nbar / TWO_PI):.1e}"),
    ))


@lru_cache(maxsize=1)
def fig4_model() -> Model:
    return Model(bundled_scenario("fig4"))


def _rwa_spectrum_like(spec: AnharmonicSpectrum, omega: float, lam: float):
    k = spec.n_keep
    return AnharmonicSpectrum(cutoff=k, energies=rwa_spectrum(omega, lam, k - 1),
                              x=position_matrix(k))


def detuning_convention_scan(model: Model | None = None) -> list[dict]:
    """Prepared-state populations for every admissible detuning convention.

    The scan covers exact and first-order level energies and every sign
    pattern of the three preparation detunings relative to the labelled
    transitions ``delta_10``, ``delta_12`` and ``delta_23``.
    """
    model = model or fig4_model()
    exact = model.spectrum
    tuned = model.tuned
    spectra = {"exact": exact, "first-order": _rwa_spectrum_like(exact, tuned.omega, tuned.lam)}
    targets = [(1, 0), (1, 2), (2, 3)]
    probe = model.drives.probe
    prep = list(model.drives.preparation)
    rows = []
    for (label, spec), signs in itertools.product(spectra.items(),
                                                 itertools.product((1, -1), repeat=3)):
        drives = [probe] + [Drive(s * spec.delta[n, m], d.coupling, d.linewidth)
                            for s, (n, m), d in zip(signs, targets, prep)]
        p = steady_populations(spec, drives, model.bath).populations
        rows.append({"levels": label, "signs": signs, "populations": p[:6].tolist(),
                     "max_deviation": float(np.max(np.abs(p[:3] - PREPARED_POPULATIONS)))})
    return rows


def _fig4_state():
    model = fig4_model()
    spec = model.spectrum
    steady = steady_populations(spec, model.drives, model.bath)
    return model, spec, steady


def criterion_11() -> CriterionResult:
    model, spec, steady = _fig4_state()
    p = steady.populations
    scan = detuning_convention_scan(model)
    best = min(scan, key=lambda r: r["max_deviation"])
    result = emission_spectrum(spec, steady, model.drives, model.bath,
                               model.geometry.kappa_ex_fraction)
    even_weight = sum(pk.weight for pk in result.peaks if (pk.n - pk.m) % 2 == 0)
    lam_p = model.tuned.lam_rwa
    split1 = spec.delta[2, 1] - spec.delta[1, 0]
    split2 = spec.delta[3, 2] - spec.delta[2, 1]
    probe = model.drives.probe
    a0 = laser_rates(spec, [probe])[0]
    gamma_nbar = model.bath.damping * model.bath.nbar
    return CriterionResult(11, "Prepared steady state", (
        Check("populations within 0.02",
              float(np.max(np.abs(p[:3] - PREPARED_POPULATIONS))) <= 0.02,
              f"P = {np.round(p[:4], 4).tolist()}; best of {len(scan)} conventions: "
              f"{best['levels']} levels, signs {best['signs']}, "
              f"max deviation {best['max_deviation']:.4f}"),
        Check("P1 >= 0.85", p[1] >= 0.85, f"P1 = {p[1]:.4f}"),
        Check("ordering P1 >> P2 >~ P0 >> P3",
              bool(p[1] >= 10 * p[2] and p[2] >= p[0] - 0.02 and p[0] >= 10 * p[3]),
              f"P1/P2 = {p[1] / p[2]:.1f}, P2 - P0 = {p[2] - p[0]:+.4f}, "
              f"P0/P3 = {p[0] / p[3]:.1f}"),
        Check("sidebands only at odd n-m", even_weight == 0.0 and bool(np.all(result.values >= 0)),
              f"{len(result.peaks)} lines, even-offset weight {even_weight:.1e}"),
        Check("first-group splitting = lambda' +- 3%",
              _within(split1, lam_p, 0.03, relative=True),
              f"delta_21 - delta_10 = {split1 / TWO_PI / 1e3:.2f} kHz, delta_32 - delta_21 = "
              f"{split2 / TWO_PI / 1e3:.2f} kHz, lambda' = {lam_p / TWO_PI / 1e3:.2f} kHz"),
        Check("probe is weak (A_0 <~ gamma nbar)", float(a0.max()) <= gamma_nbar,
              f"max A_0 / gamma nbar = {a0.max() / gamma_nbar:.2e}"),
    ), report={"convention_scan": scan})


def _oracle_pair(sign: int):
    o = ORACLE
    base = build_system(o["omega"], o["lam"], 0.0, o["coupling"], o["kappa"],
                        o["damping"], o["nbar"], o["n_mech"], o["n_phot"])
    detuning = sign * base.spectrum.delta[1, 0]
    system = build_system(o["omega"], o["lam"], detuning, o["coupling"], o["kappa"],
                          o["damping"], o["nbar"], o["n_mech"], o["n_phot"])
    full = full_liouvillian_steady(system)
    drives = [Drive(detuning, o["coupling"], o["kappa"])]
    bath = ThermalBath(o["damping"], o["nbar"])
    reduced = steady_populations(system.spectrum, drives, bath)
    return system, full, reduced, drives, bath


@lru_cache(maxsize=2)
def oracle_case(sign: int):
    """Full and reduced steady states for one laser on ``+-delta_10``."""
    return _oracle_pair(sign)


def criterion_12() -> CriterionResult:
    checks = []
    for sign, label in ((1, "heating"), (-1, "cooling")):
        system, full, reduced, drives, _ = oracle_case(sign)
        ratio = laser_rates(system.spectrum, drives).max() / ORACLE["kappa"]
        diff = float(np.max(np.abs(full.populations - reduced.populations)))
        checks.append(Check(f"{label}: A/kappa < 0.1", ratio < 0.1, f"A/kappa = {ratio:.2e}"))
        checks.append(Check(f"{label}: |P_full - P_reduced| < 1e-2", diff < 1e-2,
                            f"max difference = {diff:.2e}"))
        checks.append(Check(f"{label}: trace, Hermiticity, positivity within 1e-8",
                            full.trace_error < 1e-8 and full.hermiticity_error < 1e-8
                            and full.min_eigenvalue > -1e-8,
                            f"trace {full.trace_error:.1e}, herm {full.hermiticity_error:.1e}, "
                            f"min eig {full.min_eigenvalue:.1e}"))
    return CriterionResult(12, "oracle equivalence", tuple(checks))


def criterion_13() -> CriterionResult:
    system, full, _, drives, bath = oracle_case(1)
    widths = effective_linewidths(system.spectrum, drives, bath)
    checks = []
    t0 = 20.0 / ORACLE["kappa"]
    for n, m in ((1, 0), (2, 1), (3, 2)):
        fit = fit_correlator_decay(full, n, m, t0, t0 + 2.0 / widths[n, m], num=200)
        rel = fit.decay_rate / widths[n, m] - 1.0
        checks.append(Check(f"gamma_eff^{n}{m} from correlator within 5%", abs(rel) < 0.05,
                            f"fit/model - 1 = {rel:+.2e}, frequency error "
                            f"{fit.frequency / system.spectrum.delta[n, m] - 1.0:+.1e}"))
    model, spec, steady = _fig4_state()
    result = emission_spectrum(spec, steady, model.drives, model.bath,
                               model.geometry.kappa_ex_fraction)
    top = max(pk.weight for pk in result.peaks)
    shown = [pk for pk in result.peaks if pk.weight >= 1e-3 * top]
    spacing = abs(spec.delta[2, 1] - spec.delta[1, 0])
    widest = max(shown, key=lambda pk: pk.width)
    checks.append(Check("Prepared spectrum peaks: gamma_eff < peak distance / 3",
                        widest.width < spacing / 3.0,
                        f"{len(shown)} displayed lines, widest ({widest.n},{widest.m}) "
                        f"{widest.width / TWO_PI / 1e3:.1f} kHz vs "
                        f"{spacing / 3.0 / TWO_PI / 1e3:.1f} kHz"))
    return CriterionResult(13, "gamma_eff consistency", tuple(checks))


def _physical_bracket(spec: BeamSpec) -> np.ndarray:
    t = nonlinearity_tensor(spec, 5)
    return 32.0 * spec.gyration**2 * spec.mass * t.lambda0 / HBAR


def criterion_14() -> CriterionResult:
    base = _reference_beam()
    ref = _physical_bracket(base)
    scaled = [base.scaled(length=3.7, density=0.41, gyration=2.3),
              base.scaled(length=0.5, density=5.0, gyration=0.2)]
    diff = max(float(np.max(np.abs(_physical_bracket(s) - ref))) for s in scaled)
    model, spec, steady = _fig4_state()
    frac = model.geometry.kappa_ex_fraction
    runs = [emission_spectrum(spec, steady, model.drives, model.bath, frac, partitions=k)
            for k in (1, 1, 3, 16)]
    same = all(np.array_equal(r.values, runs[0].values) and
               np.array_equal(r.offsets, runs[0].offsets) for r in runs[1:])
    again = steady_populations(spec, model.drives, model.bath)
    return CriterionResult(14, "scale invariance and determinism", (
        Check("B_ijkl invariant to 1e-10 under (L, mu, kappa) rescaling", diff < 1e-10,
              f"max change = {diff:.1e}"),
        Check("spectrum identical across runs and partitionings", same,
              "partitions 1, 1, 3, 16"),
        Check("steady state identical across runs",
              bool(np.array_equal(again.populations, steady.populations)), ""),
    ))


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 15)}


def evaluate(number: int) -> CriterionResult:
    """Run one criterion by number."""
    if number not in CRITERIA:
        raise KeyError(f"unknown criterion {number}")
    return CRITERIA[number]()


def run_all(numbers=None) -> list[CriterionResult]:
    return [evaluate(k) for k in (numbers or sorted(CRITERIA))]


def format_line(result: CriterionResult) -> str:
    """One-line verdict with the details of each check."""
    status = "PASS" if result.passed else "FAIL"
    if not result.passed and result.number in KNOWN_GAPS:
        expected, _ = KNOWN_GAPS[result.number]
        if result.failing() <= expected:
            status = "FAIL (documented)"
    parts = "; ".join(f"{'ok' if c.passed else 'x'} {c.name} [{c.detail}]"
                      for c in result.checks)
    return f"[{status}] {result.number:2d} {result.title}: {parts}"
