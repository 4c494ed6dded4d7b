"""Command-line entry point: ``softbeam <subcommand> [scenario] [options]``.

Every subcommand reads one scenario document and emits tables with a
metadata header (package version, scenario hash, column units).  Output
goes to standard output, or to ``<out>/<table>.<format>`` with ``--out``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .beam import RootFindingError, mode_properties, nonlinearity_tensor
from .constants import TWO_PI
from .coupling import CutoffError, field_structure, g0_sensitivity, optimize_placement
from .dynamics import (ReducibleGeneratorError, effective_linewidths, emission_spectrum,
                       steady_populations)
from .electrostatics import ANGSTROM_POLARIZABILITY, tuning_sweep
from .liouvillian import DegenerateSteadyStateError
from .losses import (ElectrodeLossConfig, absorption_finesse, combine, gap_finesse,
                     intrinsic, scattering_finesse)
from .scenario import (Model, ScenarioError, bundled_scenario, load_scenario,
                       scenario_hash)
from .spectrum import SpectrumConvergenceError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (SpectrumConvergenceError, RootFindingError, ReducibleGeneratorError,
                    DegenerateSteadyStateError, np.linalg.LinAlgError, FloatingPointError)


class Table:
    """Named table with column units."""

    def __init__(self, name: str, columns, units, rows):
        self.name = name
        self.columns = list(columns)
        self.units = list(units)
        self.rows = [list(r) for r in rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, (_plain(v) for v in r))) for r in self.rows]


def _plain(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def _fmt(value) -> str:
    value = _plain(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_modes(model: Model, args) -> list[Table]:
    beam = model.beam
    n_max = model.scenario.run.n_max_modes
    rows = []
    for n in range(1, n_max + 1):
        m = mode_properties(beam, n)
        rows.append([n, m.nu, m.frequency_hz, m.effective_mass, m.effective_mass / beam.mass,
                     m.x_zpm])
    modes = Table("modes", ["n", "nu", "frequency", "effective_mass", "mass_ratio", "x_zpm"],
                  ["1", "1", "Hz", "kg", "1", "m"], rows)
    table = nonlinearity_tensor(beam, n_max).fundamental_row()
    bracket = Table("bracket_11ij", ["i", "j", "B_11ij"], ["1", "1", "1"],
                    [[i + 1, j + 1, round(float(table[i, j]), 10)]
                     for i in range(n_max) for j in range(n_max)])
    d = model.duffing
    duffing = Table("duffing", ["omega0", "lambda0", "x_zpm", "effective_mass", "coefficient"],
                    ["Hz", "Hz", "m", "kg", "1"],
                    [[d.omega0 / TWO_PI, d.lambda0 / TWO_PI, d.x_zpm, d.effective_mass,
                      d.coefficient]])
    return [modes, bracket, duffing]


def cmd_tune(model: Model, args) -> list[Table]:
    tuned = model.tuned
    d = model.duffing
    end = tuned.w00 if tuned.w00 < 0 else -0.9 * d.effective_mass * d.omega0**2
    points = model.scenario.tuning.sweep_points
    rows = tuning_sweep(d, np.linspace(0.0, end, points))
    cols = ["w00_n_per_m", "frequency_hz", "zeta", "lambda_hz", "lambda_rwa_hz"]
    sweep = Table("tuning_sweep", ["w00", "frequency", "zeta", "lambda", "lambda_rwa"],
                  ["N/m", "Hz", "1", "Hz", "Hz"], [[r[c] for c in cols] for r in rows])
    point = Table("operating_point",
                  ["frequency", "zeta", "lambda", "lambda_rwa", "x_zpm", "w00"],
                  ["Hz", "1", "Hz", "Hz", "m", "N/m"],
                  [[tuned.omega / TWO_PI, tuned.zeta, tuned.lam / TWO_PI,
                    tuned.lam_rwa / TWO_PI, tuned.x_zpm, tuned.w00]])
    return [point, sweep]


def cmd_spectrum_levels(model: Model, args) -> list[Table]:
    spec = model.spectrum
    levels = Table("levels", ["n", "energy"], ["1", "Hz"],
                   [[n, e / TWO_PI] for n, e in enumerate(spec.energies)])
    rows = []
    for n in range(spec.n_keep):
        for m in range(spec.n_keep):
            if n != m:
                rows.append([n, m, spec.delta[n, m] / TWO_PI, spec.x[n, m]])
    trans = Table("transitions", ["n", "m", "delta", "x"], ["1", "1", "Hz", "x_zpm"], rows)
    return [levels, trans]


def cmd_couple(model: Model, args) -> list[Table]:
    geom = model.geometry
    fs = field_structure(geom)
    place = optimize_placement(fs, geom.gap)
    e = model.scenario.electrodes
    alpha = e.alpha_par_a3 * ANGSTROM_POLARIZABILITY
    summary = Table("coupling",
                    ["xi", "decay_length", "inverse_c_corr", "theta", "phi", "K", "G0"],
                    ["1", "m", "1", "rad", "rad", "1", "rad/(s m)"],
                    [[fs.xi, fs.decay_length, 1.0 / place.c_corr, place.theta, place.phi,
                      place.big_k, model.g0]])
    rows = g0_sensitivity(geom, alpha, model.beam.length, 1.02e10)
    sens = Table("g0_sensitivity", ["variant", "G0", "ratio_to_1.02e10"],
                 ["", "rad/(s m)", "1"], [[r["variant"], r["g0"], r["ratio"]] for r in rows])
    drives = Table("drives", ["role", "detuning", "coupling", "linewidth"],
                   ["", "Hz", "Hz", "Hz"],
                   [[d.role, d.detuning / TWO_PI, d.coupling / TWO_PI, d.linewidth / TWO_PI]
                    for d in model.drives])
    return [summary, sens, drives]


def cmd_losses(model: Model, args) -> list[Table]:
    geom = model.geometry
    fs = field_structure(geom)
    scat_cfg, abs_cfg = model.loss_configs()
    gap_cfg = ElectrodeLossConfig(radius=scat_cfg.radius, theta=scat_cfg.theta,
                                  gap=scat_cfg.gap)
    budget = combine([intrinsic(geom), scattering_finesse(geom, fs, scat_cfg),
                      gap_finesse(geom, fs, gap_cfg), absorption_finesse(geom, fs, abs_cfg)],
                     geom=geom)
    rows = [[ch.name, ch.finesse, ch.qualifier] for ch in budget.channels]
    channels = Table("channels", ["channel", "finesse", "qualifier"], ["", "1", ""], rows)
    total = Table("budget", ["combined_finesse", "linewidth"], ["1", "Hz"],
                  [[budget.combined, budget.linewidth / TWO_PI]])
    return [channels, total]


def _steady(model: Model):
    spec = model.spectrum
    steady = steady_populations(spec, model.drives, model.bath)
    return spec, steady


def cmd_steady(model: Model, args) -> list[Table]:
    spec, steady = _steady(model)
    widths = effective_linewidths(spec, model.drives, model.bath, rates=steady.rates)
    pops = Table("populations", ["n", "P"], ["1", "1"],
                 [[n, p] for n, p in enumerate(steady.populations)])
    k = spec.n_keep
    lw = Table("gamma_eff", ["n", "m", "gamma_eff", "delta"], ["1", "1", "Hz", "Hz"],
               [[n, m, widths[n, m] / TWO_PI, spec.delta[n, m] / TWO_PI]
                for n in range(k) for m in range(k) if n != m])
    export = {"P": steady.populations.tolist(),
              "gamma_eff": (widths / TWO_PI).tolist(),
              "delta": (spec.delta / TWO_PI).tolist()}
    pops.export = export
    return [pops, lw]


def cmd_emission(model: Model, args) -> list[Table]:
    spec, steady = _steady(model)
    run = model.scenario.run
    result = emission_spectrum(spec, steady, model.drives, model.bath,
                               model.geometry.kappa_ex_fraction, partitions=run.partitions,
                               n_points=run.grid_points)
    near = result.nearest_peaks()
    rows = [[w / TWO_PI, s, result.peaks[i].n, result.peaks[i].m]
            for w, s, i in zip(result.offsets, result.values, near)]
    spectrum_table = Table("emission_spectrum",
                           ["offset_hz", "S_value", "nearest_peak_n", "nearest_peak_m"],
                           ["Hz", "1 (rate per rad/s)", "1", "1"], rows)
    peaks = sorted(result.peaks, key=lambda p: (p.position, p.n, p.m))
    peak_table = Table("emission_peaks", ["n", "m", "position", "width", "weight"],
                       ["1", "1", "Hz", "Hz", "1/s"],
                       [[p.n, p.m, p.position / TWO_PI, p.width / TWO_PI, p.weight]
                        for p in peaks])
    return [spectrum_table, peak_table]


def cmd_verify(model: Model, args) -> list[Table]:
    from .acceptance import KNOWN_GAPS, format_line, run_all
    rows = []
    for res in run_all():
        line = format_line(res)
        print(line)
        documented = res.number in KNOWN_GAPS and res.failing() <= KNOWN_GAPS[res.number][0]
        rows.append([res.number, res.title, res.passed, documented])
    table = Table("verify", ["criterion", "title", "passed", "documented_gap"],
                  ["", "", "", ""], rows)
    table.failed = any(not r[2] and not r[3] for r in rows)
    return [table]


COMMANDS = {
    "modes": cmd_modes,
    "tune": cmd_tune,
    "spectrum-levels": cmd_spectrum_levels,
    "couple": cmd_couple,
    "losses": cmd_losses,
    "steady": cmd_steady,
    "emission": cmd_emission,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _metadata(model: Model, command: str) -> dict:
    return {
        "softbeam_version": __version__,
        "command": command,
        "scenario": model.scenario.name,
        "scenario_sha256": scenario_hash(model.scenario),
    }


def render_csv(model: Model, command: str, table: Table) -> str:
    """One table as CSV preceded by ``#`` metadata lines."""
    buf = io.StringIO()
    for key, value in _metadata(model, command).items():
        buf.write(f"# {key}: {value}\n")
    buf.write(f"# table: {table.name}\n")
    buf.write("# units: " + ", ".join(f"{c} [{u}]" for c, u in zip(table.columns, table.units))
              + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(model: Model, command: str, tables) -> str:
    """All tables of a command as one JSON document.

    The validated scenario, with defaults filled in, is echoed under
    ``"scenario"``.  Extra top-level keys come from table exports.
    """
    body = {"metadata": _metadata(model, command),
            "scenario": model.scenario.model_dump(mode="json"),
            "tables": {t.name: {"units": dict(zip(t.columns, t.units)), "rows": t.records()}
                       for t in tables}}
    for t in tables:
        body.update(getattr(t, "export", None) or {})
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def _resolve_scenario(args):
    source = args.scenario_path or args.scenario
    if source is None:
        return bundled_scenario("fig4")
    path = Path(source)
    if not path.exists():
        try:
            return bundled_scenario(path.stem if path.suffix == ".scenario" else source)
        except FileNotFoundError:
            raise ScenarioError(f"scenario file not found: {source}") from None
    return load_scenario(path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softbeam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"softbeam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("scenario_path", nargs="?", default=None,
                       help="scenario file (or the name of a bundled scenario)")
        p.add_argument("--scenario", default=None, help="scenario file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--fock-cutoff", type=int, default=None)
        p.add_argument("--ac-convention", choices=("paper", "ref"), default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = _resolve_scenario(args)
        scenario = scenario.with_overrides(fock_cutoff=args.fock_cutoff)
        scenario = scenario.with_ac_convention(args.ac_convention)
        model = Model(scenario)
        tables = COMMANDS[args.command](model, args)
    except (ScenarioError, CutoffError) as exc:
        print(f"error [validation]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        print(f"error [numerical]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error [validation]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "verify":
        return EXIT_NUMERICAL if tables[0].failed else EXIT_OK
    if args.format == "json":
        docs = {args.command: render_json(model, args.command, tables)}
    else:
        docs = {t.name: render_csv(model, args.command, t) for t in tables}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in docs.items():
            (out / f"{name}.{args.format}").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write("\n".join(docs.values()))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
