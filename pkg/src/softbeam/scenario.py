"""Declarative scenario documents and their resolution into physical objects.

A scenario is a JSON document with the sections ``beam``, ``tuning``,
``electrodes``, ``cavity``, ``losses``, ``drives``, ``bath`` and ``run``.
Unknown keys are rejected.  Frequencies are given in Hz (ordinary
frequency) and converted to angular units on resolution.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .beam import BeamSpec, DuffingParams, duffing_params
from .constants import TWO_PI, hz_to_rad
from .coupling import CavityGeometry, coupling_g0, linearize_drive
from .dynamics import PREPARATION, PROBE, Drive, DriveSet, ThermalBath
from .electrostatics import (ANGSTROM_POLARIZABILITY, ElectrodeConfig, TunedMode,
                             mode_coefficients, soften, soften_to_frequency)
from .losses import ElectrodeLossConfig
from .spectrum import AnharmonicSpectrum, duffing_spectrum

__all__ = [
    "Scenario",
    "ScenarioError",
    "Model",
    "parse_scenario",
    "load_scenario",
    "bundled_scenario",
    "scenario_hash",
]


class ScenarioError(ValueError):
    """Raised for malformed or invalid scenario documents."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BeamSection(_Section):
    length_m: float = Field(gt=0)
    preset: Optional[str] = "cnt_10_0"
    line_density_kg_per_m: Optional[float] = Field(default=None, gt=0)
    gyration_m: Optional[float] = Field(default=None, gt=0)
    sound_speed_m_per_s: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _preset_or_explicit(self):
        explicit = (self.line_density_kg_per_m, self.gyration_m, self.sound_speed_m_per_s)
        if self.preset is None and any(v is None for v in explicit):
            raise ValueError("without a preset, line_density_kg_per_m, gyration_m and "
                             "sound_speed_m_per_s are all required")
        if self.preset is not None and any(v is not None for v in explicit):
            raise ValueError("give either a preset or explicit beam parameters, not both")
        return self


class TuningSection(_Section):
    target_frequency_hz: Optional[float] = Field(default=None, gt=0)
    w00_n_per_m: Optional[float] = Field(default=None, le=0)
    from_electrodes: bool = False
    sweep_points: int = Field(default=21, ge=2, le=10001)

    @model_validator(mode="after")
    def _one_source(self):
        chosen = [self.target_frequency_hz is not None, self.w00_n_per_m is not None,
                  self.from_electrodes]
        if sum(chosen) > 1:
            raise ValueError("choose at most one of target_frequency_hz, w00_n_per_m, "
                             "from_electrodes")
        return self


class ElectrodeSection(_Section):
    gap_m: float = Field(default=40e-9, gt=0)
    e_par_v_per_m: float = 1.2e7
    e_perp_v_per_m: float = 1.8e6
    alpha_par_a3: float = Field(default=143.0, gt=0)
    alpha_perp_a3: float = Field(default=10.9, ge=0)


class CavitySection(_Section):
    wavelength_m: float = Field(default=1.1e-6, gt=0)
    index: float = Field(default=1.44, gt=1)
    rim_radius_m: float = Field(default=2.0e-6, gt=0)
    circumference_m: float = Field(default=1e-3, gt=0)
    gap_m: float = Field(default=50e-9, gt=0)
    finesse: float = Field(default=3e6, gt=0)
    kappa_ex_fraction: float = Field(default=0.5, gt=0, le=1)
    ac_convention: Literal["paper", "ref"] = "paper"


class LossSection(_Section):
    scattering_radius_m: float = Field(default=10e-9, gt=0)
    scattering_theta_deg: float = 10.0
    absorption_radius_m: float = Field(default=2.5e-9, gt=0)
    absorption_theta_deg: float = 3.0
    sigma_fraction: float = Field(default=0.05, ge=0, le=1)
    electrode_gap_m: float = Field(default=40e-9, gt=0)


class DriveSection(_Section):
    role: Literal["probe", "preparation"] = "preparation"
    transition: Optional[tuple[int, int]] = None
    detuning_hz: Optional[float] = None
    coupling_hz: Optional[float] = Field(default=None, ge=0)
    power_w: Optional[float] = Field(default=None, ge=0)
    linewidth_hz: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _exactly_one_each(self):
        if (self.transition is None) == (self.detuning_hz is None):
            raise ValueError("give exactly one of transition or detuning_hz")
        if (self.coupling_hz is None) == (self.power_w is None):
            raise ValueError("give exactly one of coupling_hz or power_w")
        if self.transition is not None and min(self.transition) < 0:
            raise ValueError("transition levels must be non-negative")
        if self.role == "probe":
            if self.transition is not None or self.detuning_hz != 0:
                raise ValueError("the probe laser must have detuning_hz = 0")
        return self


class BathSection(_Section):
    temperature_k: float = Field(default=0.02, ge=0)
    quality_ratio: float = Field(default=5e6, gt=0)


class RunSection(_Section):
    fock_cutoff: int = Field(default=60, ge=8, le=1000)
    n_keep: int = Field(default=12, ge=2, le=60)
    n_max_modes: int = Field(default=5, ge=1, le=10)
    grid_points: int = Field(default=4096, ge=2, le=1_000_000)
    partitions: int = Field(default=1, ge=1, le=1024)


class Scenario(_Section):
    """Validated scenario document."""

    name: str = "scenario"
    beam: BeamSection
    tuning: TuningSection = TuningSection()
    electrodes: ElectrodeSection = ElectrodeSection()
    cavity: CavitySection = CavitySection()
    losses: LossSection = LossSection()
    drives: tuple[DriveSection, ...] = ()
    bath: BathSection = BathSection()
    run: RunSection = RunSection()

    @model_validator(mode="after")
    def _single_probe(self):
        if sum(d.role == "probe" for d in self.drives) > 1:
            raise ValueError("at most one probe laser is allowed")
        return self

    def with_overrides(self, **run_fields) -> "Scenario":
        """Copy with ``run`` fields replaced (validated)."""
        data = self.model_dump(mode="json")
        data["run"].update({k: v for k, v in run_fields.items() if v is not None})
        return parse_scenario(data)

    def with_ac_convention(self, convention: str | None) -> "Scenario":
        if convention is None:
            return self
        data = self.model_dump(mode="json")
        data["cavity"]["ac_convention"] = convention
        return parse_scenario(data)


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<document>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_scenario(document) -> Scenario:
    """Validate a scenario from a mapping or a JSON string.

    Raises
    ------
    ScenarioError
        With ``line:column`` for JSON syntax errors and dotted field paths
        for schema violations.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        scenario = Scenario.model_validate(document)
    except ValidationError as exc:
        raise ScenarioError(_format_errors(exc)) from exc
    return scenario


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        return parse_scenario(text)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def bundled_scenario(name: str = "fig4") -> Scenario:
    """Load one of the scenarios shipped with the package."""
    text = resources.files("softbeam").joinpath("data", f"{name}.scenario").read_text(
        encoding="utf-8")
    return parse_scenario(text)


def scenario_hash(scenario: Scenario) -> str:
    """SHA-256 of the canonical JSON form with defaults filled in."""
    canon = json.dumps(scenario.model_dump(mode="json"), sort_keys=True,
                       separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Model:
    """Physical objects derived from a scenario, computed on demand."""

    scenario: Scenario

    @cached_property
    def beam(self) -> BeamSpec:
        b = self.scenario.beam
        if b.preset is not None:
            return BeamSpec.from_preset(b.preset, b.length_m)
        return BeamSpec(length=b.length_m, line_density=b.line_density_kg_per_m,
                        gyration=b.gyration_m, sound_speed=b.sound_speed_m_per_s)

    @cached_property
    def duffing(self) -> DuffingParams:
        return duffing_params(self.beam)

    @cached_property
    def electrode_config(self) -> ElectrodeConfig:
        e = self.scenario.electrodes
        return ElectrodeConfig.from_fields(
            self.beam, e.gap_m, e.e_par_v_per_m, e.e_perp_v_per_m,
            e.alpha_par_a3 * ANGSTROM_POLARIZABILITY,
            e.alpha_perp_a3 * ANGSTROM_POLARIZABILITY)

    @cached_property
    def electrode_coefficients(self):
        """``(F_n, W_lk)`` of the configured electrodes."""
        return mode_coefficients(self.electrode_config, self.beam, 1)

    @cached_property
    def tuned(self) -> TunedMode:
        t = self.scenario.tuning
        if t.target_frequency_hz is not None:
            return soften_to_frequency(self.duffing, hz_to_rad(t.target_frequency_hz))
        if t.w00_n_per_m is not None:
            return soften(self.duffing, t.w00_n_per_m)
        if t.from_electrodes:
            forces, curv = self.electrode_coefficients
            return soften(self.duffing, float(curv[0, 0]), float(forces[0]))
        return soften(self.duffing, 0.0)

    @cached_property
    def spectrum(self) -> AnharmonicSpectrum:
        r = self.scenario.run
        return duffing_spectrum(self.tuned.omega, self.tuned.lam, n_keep=r.n_keep,
                                cutoff=r.fock_cutoff)

    @cached_property
    def geometry(self) -> CavityGeometry:
        c = self.scenario.cavity
        return CavityGeometry(wavelength=c.wavelength_m, index=c.index,
                              rim_radius=c.rim_radius_m, circumference=c.circumference_m,
                              gap=c.gap_m, finesse=c.finesse,
                              kappa_ex_fraction=c.kappa_ex_fraction,
                              ac_convention=c.ac_convention)

    @cached_property
    def g0(self) -> float:
        """Angular frequency pull per metre of the rod (rad s^-1 m^-1)."""
        alpha = self.scenario.electrodes.alpha_par_a3 * ANGSTROM_POLARIZABILITY
        return coupling_g0(self.geometry, alpha, self.beam.length)

    def loss_configs(self) -> tuple[ElectrodeLossConfig, ElectrodeLossConfig]:
        """Wire configurations for the scattering and absorption channels."""
        s = self.scenario.losses
        scat = ElectrodeLossConfig(radius=s.scattering_radius_m,
                                   theta=float(np.deg2rad(s.scattering_theta_deg)),
                                   gap=s.electrode_gap_m)
        absn = ElectrodeLossConfig(radius=s.absorption_radius_m,
                                   theta=float(np.deg2rad(s.absorption_theta_deg)),
                                   gap=s.electrode_gap_m, sigma_fraction=s.sigma_fraction)
        return scat, absn

    @cached_property
    def bath(self) -> ThermalBath:
        b = self.scenario.bath
        return ThermalBath.from_quality(self.tuned.omega, b.quality_ratio, b.temperature_k)

    def _detuning(self, d: DriveSection) -> float:
        if d.transition is None:
            return hz_to_rad(d.detuning_hz)
        n, m = d.transition
        if max(n, m) >= self.spectrum.n_keep:
            raise ScenarioError(f"transition {d.transition} exceeds the {self.spectrum.n_keep} "
                                "retained levels")
        return float(self.spectrum.delta[n, m])

    def _coupling(self, d: DriveSection, detuning: float, kappa: float) -> float:
        if d.coupling_hz is not None:
            return hz_to_rad(d.coupling_hz)
        geom = self.geometry
        lin = linearize_drive(self.g0, self.tuned.x_zpm, d.power_w,
                              geom.omega_c + detuning, detuning, kappa,
                              geom.kappa_ex_fraction * kappa)
        return float(abs(lin.g))

    @cached_property
    def drives(self) -> DriveSet:
        out = []
        for d in self.scenario.drives:
            kappa = hz_to_rad(d.linewidth_hz) if d.linewidth_hz else self.geometry.linewidth
            det = self._detuning(d)
            role = PROBE if d.role == "probe" else PREPARATION
            out.append(Drive(detuning=det, coupling=self._coupling(d, det, kappa),
                             linewidth=kappa, role=role))
        return DriveSet(tuple(out))

    def summary(self) -> dict:
        """Derived headline quantities in Hz for metadata echoes."""
        t = self.tuned
        return {"omega0_hz": t.omega0 / TWO_PI, "omega_hz": t.omega / TWO_PI,
                "zeta": t.zeta, "lambda_hz": t.lam / TWO_PI,
                "lambda_rwa_hz": t.lam_rwa / TWO_PI,
                "gamma_hz": self.bath.damping / TWO_PI, "nbar": self.bath.nbar}
