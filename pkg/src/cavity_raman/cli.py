"""Command line interface.

Subcommands: ``rates`` (closed-form summary), ``spectrum`` (emission
spectrum CSV), ``sweep-detuning`` and ``sweep-cavity`` (ratio pipelines
over a detuning grid), ``fit`` (standalone least-squares fits of data
files) and ``validate`` (internal consistency suite).

Exit codes: 0 success, 1 validation failure, 2 configuration or input
errors, 3 numerically unusable operating points, 4 fit failures.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np
import scipy.linalg

from . import fit as fit_mod
from . import liouvillian as lv
from . import oracle
from . import rates as rates_mod
from . import spectrum as spectrum_mod
from .errors import (
    CavityRamanError,
    ConfigError,
    DegenerateSpectrum,
    DomainError,
    FitError,
    NonUniqueSteadyState,
    ParseError,
    StiffnessFailure,
    UnstableLiouvillian,
    VanishingSpontaneous,
)
from .model import ModelParams

_PARAM_KEYS = tuple(f.name for f in fields(ModelParams))
_RUN_FLOAT_KEYS = (
    "gamma_bare",
    "nu0_thz",
    "grid_min",
    "grid_max",
    "sweep_start",
    "sweep_stop",
    "filter_center",
    "filter_width",
)
_RUN_INT_KEYS = ("grid_points", "sweep_count", "seed")
_RUN_STR_KEYS = ("rs_mode", "sweep_variable")


@dataclass(frozen=True)
class RunConfig:
    """Resolved runtime configuration: physics plus sweep and output knobs."""

    params: ModelParams
    gamma_bare: float = 0.0021
    nu0_thz: float = 406.8
    grid_min: float = -120.0
    grid_max: float = 40.0
    grid_points: int = 1601
    sweep_variable: str = "delta"
    sweep_start: float = 15.0
    sweep_stop: float = 95.0
    sweep_count: int = 9
    filter_center: float | None = None
    filter_width: float = 120.0
    rs_mode: str = "area"
    seed: int = 0

    def __post_init__(self):
        if self.grid_points < 16:
            raise ConfigError(f"grid_points must be at least 16, got {self.grid_points}")
        if not self.grid_min < self.grid_max:
            raise ConfigError(
                f"grid_min {self.grid_min} must lie below grid_max {self.grid_max}"
            )
        if self.sweep_count < 1:
            raise ConfigError(f"sweep_count must be positive, got {self.sweep_count}")
        if not self.sweep_start <= self.sweep_stop:
            raise ConfigError(
                f"sweep_start {self.sweep_start} must not exceed sweep_stop {self.sweep_stop}"
            )
        if self.sweep_variable not in ("delta", "delta_cavity"):
            raise ConfigError(f"unknown sweep variable {self.sweep_variable!r}")
        if self.rs_mode not in ("area", "amplitude"):
            raise ConfigError(f"rs_mode must be 'area' or 'amplitude', got {self.rs_mode!r}")
        if self.filter_width <= 0.0:
            raise ConfigError(f"filter_width must be positive, got {self.filter_width}")


def parse_config_file(path: str) -> dict[str, str]:
    """Read ``key = value`` lines; '#' starts a comment, blank lines ignored."""
    mapping: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"expected 'key = value', got {text!r}", line=lineno)
        key, _, value = text.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError("missing key before '='", line=lineno)
        if not value:
            raise ConfigError(f"missing value for required key {key!r}", line=lineno)
        if key in mapping:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        mapping[key] = value
    return mapping


def _convert(key: str, value: str) -> float | int | str:
    if key in _PARAM_KEYS or key in _RUN_FLOAT_KEYS:
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"key {key!r} needs a number, got {value!r}") from None
    if key in _RUN_INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"key {key!r} needs an integer, got {value!r}") from None
    if key in _RUN_STR_KEYS:
        return value
    raise ConfigError(f"unknown configuration key {key!r}")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file and command line flags, in that order."""
    values: dict[str, float | int | str] = {}
    if getattr(args, "config", None):
        for key, raw in parse_config_file(args.config).items():
            values[key] = _convert(key, raw)
    for key in _PARAM_KEYS + _RUN_FLOAT_KEYS + _RUN_INT_KEYS + _RUN_STR_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    params = ModelParams(**{k: values.pop(k) for k in list(values) if k in _PARAM_KEYS})
    return RunConfig(params=params, **values)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _header(command: str, config: RunConfig, extra: dict) -> list[str]:
    entries = {key: getattr(config.params, key) for key in _PARAM_KEYS}
    entries.update(extra)
    lines = [f"# cavity-raman {command}"]
    lines.extend(f"# {key} = {_fmt(entries[key])}" for key in sorted(entries))
    return lines


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _read_numeric_csv(path: str, min_cols: int, max_cols: int) -> np.ndarray:
    """Rows of comma separated floats; '#' lines and blank lines skipped."""
    rows: list[list[float]] = []
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    width = None
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        parts = [part.strip() for part in text.split(",")]
        if width is None:
            width = len(parts)
            if not min_cols <= width <= max_cols:
                raise ParseError(
                    f"expected {min_cols} to {max_cols} columns, found {width}",
                    line=lineno,
                )
        elif len(parts) != width:
            raise ParseError(
                f"inconsistent column count {len(parts)} (expected {width})",
                line=lineno,
            )
        try:
            rows.append([float(part) for part in parts])
        except ValueError:
            raise ParseError(f"non-numeric entry in {text!r}", line=lineno) from None
    if not rows:
        raise ParseError(f"no data rows in {path}")
    return np.asarray(rows, dtype=float)


def cmd_rates(config: RunConfig, out: str | None, as_json: bool) -> int:
    report = rates_mod.rate_report(config.params, config.gamma_bare)
    quality = rates_mod.quality_factor(config.nu0_thz, config.params.kappa)
    payload = {
        "omega_eff_GHz": report.omega_eff,
        "r_cavity_per_ns": report.r_cavity,
        "r_bare_per_ns": report.r_bare,
        "enhancement": report.enhancement,
        "purcell": report.purcell,
        "quality_factor": quality,
    }
    if as_json:
        _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", out)
    else:
        text = "".join(f"{key} = {_fmt(value)}\n" for key, value in payload.items())
        _emit(text, out)
    return 0


def cmd_spectrum(config: RunConfig, out: str | None, as_json: bool) -> int:
    grid = np.linspace(config.grid_min, config.grid_max, config.grid_points)
    spec = spectrum_mod.emission_spectrum(config.params, grid)
    window = None
    if config.filter_center is not None:
        window = spectrum_mod.FilterWindow(config.filter_center, config.filter_width)
        spec = spectrum_mod.apply_filter(spec, window)
    if as_json:
        payload = {
            "nu_lab_GHz": list(spec.freqs),
            "intensity_per_ns_per_GHz": list(spec.intensity),
            "frame": spec.frame,
            "filter_center": window.center if window else None,
            "filter_width": window.width if window else None,
        }
        _emit(json.dumps(payload, sort_keys=True) + "\n", out)
        return 0
    extra = {
        "grid_min": config.grid_min,
        "grid_max": config.grid_max,
        "grid_points": config.grid_points,
        "filter_center": config.filter_center if window else "none",
        "filter_width": config.filter_width if window else "none",
    }
    lines = _header("spectrum", config, extra)
    lines.append("# columns: nu_lab_GHz,intensity_per_ns_per_GHz")
    lines.extend(
        f"{_fmt(nu)},{_fmt(val)}" for nu, val in zip(spec.freqs, spec.intensity)
    )
    _emit("\n".join(lines) + "\n", out)
    return 0


def _sweep_grid(config: RunConfig) -> np.ndarray:
    return np.linspace(config.sweep_start, config.sweep_stop, config.sweep_count)


def _detuning_rows(config: RunConfig) -> list[tuple]:
    """Ratio pipeline over a laser-detuning grid, assembled in grid order."""
    grid = _sweep_grid(config)

    def at_point(index: int):
        value = float(grid[index])
        # Reserved: per-point seed for future stochastic extensions.
        _ = config.seed + index
        trial = replace(config.params, delta_laser=value, delta_cavity=value)
        try:
            point, (raman_fit, spont_fit) = fit_mod.predict_rs(trial, mode=config.rs_mode)
            return (
                value,
                point.ratio,
                point.ratio_err,
                raman_fit.peaks[0].center,
                spont_fit.peaks[0].center,
                0,
            )
        except VanishingSpontaneous as exc:
            if exc.point is not None:
                return (value, exc.point.ratio, exc.point.ratio_err, math.nan, math.nan, 1)
            return (value, math.nan, math.nan, math.nan, math.nan, 1)

    workers = min(8, config.sweep_count)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(at_point, range(config.sweep_count)))


def _cavity_rows(config: RunConfig) -> list[tuple]:
    """Line intensities over a cavity-detuning grid at fixed laser detuning."""
    grid = _sweep_grid(config)

    def at_point(index: int):
        value = float(grid[index])
        _ = config.seed + index
        trial = replace(config.params, delta_cavity=value)
        raman_fit, spont_fit = fit_mod.fit_emission_lines(trial)
        return (value, raman_fit.peaks[0].area, spont_fit.peaks[0].area)

    workers = min(8, config.sweep_count)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(at_point, range(config.sweep_count)))


def _cmd_sweep(config: RunConfig, out: str | None, as_json: bool, variable: str) -> int:
    if variable == "delta":
        command = "sweep-detuning"
        names = ("delta_GHz", "ratio", "ratio_err", "r_peak_GHz", "s_peak_GHz", "vanishing")
        rows = _detuning_rows(config)
        formatted = [
            ",".join(_fmt(float(v)) if i < 5 else str(v) for i, v in enumerate(row))
            for row in rows
        ]
    else:
        command = "sweep-cavity"
        names = ("delta_cavity_GHz", "raman_intensity", "spont_intensity")
        rows = _cavity_rows(config)
        formatted = [",".join(_fmt(float(v)) for v in row) for row in rows]
    if as_json:
        payload = [dict(zip(names, row)) for row in rows]
        _emit(json.dumps(payload, sort_keys=True) + "\n", out)
        return 0
    extra = {
        "sweep_start": config.sweep_start,
        "sweep_stop": config.sweep_stop,
        "sweep_count": config.sweep_count,
        "rs_mode": config.rs_mode,
        "seed": config.seed,
    }
    lines = _header(command, config, extra)
    lines.append("# columns: " + ",".join(names))
    lines.extend(formatted)
    _emit("\n".join(lines) + "\n", out)
    return 0


def cmd_fit(config: RunConfig, kind: str, path: str, out: str | None) -> int:
    if kind in ("lorentzian1", "lorentzian2"):
        data = _read_numeric_csv(path, 2, 3)
        errors = data[:, 2] if data.shape[1] == 3 else None
        result = fit_mod.fit_lorentzian(
            data[:, 0],
            data[:, 1],
            n_peaks=1 if kind == "lorentzian1" else 2,
            errors=errors,
        )
        payload = {
            "peaks": [
                {
                    "center": p.center,
                    "fwhm": p.fwhm,
                    "amplitude": p.amplitude,
                    "area": p.area,
                    "center_err": p.center_err,
                    "fwhm_err": p.fwhm_err,
                    "amplitude_err": p.amplitude_err,
                    "area_err": p.area_err,
                }
                for p in result.peaks
            ],
            "baseline": result.baseline,
            "baseline_err": result.baseline_err,
            "residual_rms": result.residual_rms,
        }
    elif kind == "exponential":
        data = _read_numeric_csv(path, 2, 3)
        errors = data[:, 2] if data.shape[1] == 3 else None
        result = fit_mod.fit_exponential(data[:, 0], data[:, 1], errors=errors)
        payload = {
            "tau": result.tau,
            "tau_err": result.tau_err,
            "amplitude": result.amplitude,
            "amplitude_err": result.amplitude_err,
            "baseline": result.baseline,
            "baseline_err": result.baseline_err,
            "residual_rms": result.residual_rms,
        }
    elif kind == "phonon-n":
        data = _read_numeric_csv(path, 2, 3)
        points = [
            fit_mod.RsPoint(
                delta=row[0],
                ratio=row[1],
                ratio_err=row[2] if data.shape[1] == 3 else 0.0,
            )
            for row in data
        ]
        result = fit_mod.fit_phonon_exponent(points, config.params, mode=config.rs_mode)
        payload = {
            "n": result.exponent,
            "n_err": result.exponent_err,
            "alpha": result.prefactor,
            "alpha_err": result.prefactor_err,
            "covariance": [list(row) for row in result.covariance],
        }
    else:
        raise ConfigError(f"unknown fit kind {kind!r}")
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", out)
    return 0


def _validation_checks(config: RunConfig) -> list[dict]:
    params = config.params
    checks: list[dict] = []

    def record(name: str, passed: bool, detail: str) -> None:
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    def run(name: str, thunk) -> None:
        try:
            passed, detail = thunk()
        except CavityRamanError as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        record(name, passed, detail)

    def regime_adiabatic():
        coupling = max(params.omega_drive / 2.0, params.g)
        return (
            params.adiabatic_valid,
            f"max(omega/2, g) = {coupling:.4g} GHz vs delta_laser/10 = "
            f"{params.delta_laser / 10.0:.4g} GHz",
        )

    def regime_truncation():
        return (
            params.truncation_valid,
            f"gamma_flip = {params.gamma_flip:.4g} GHz vs kappa/10 = "
            f"{params.kappa / 10.0:.4g} GHz",
        )

    def trace_preservation():
        gen = lv.build_liouvillian(params)
        probe = lv.vec(np.eye(4)).conj() @ gen
        worst = float(np.max(np.abs(probe)))
        scale = float(np.max(np.abs(gen)))
        return worst <= 1e-10 * scale, f"|Tr L rho| <= {worst:.3e} (scale {scale:.3e})"

    def steady_physical():
        gen = lv.build_liouvillian(params)
        rho = lv.steady_state(gen)
        lowest = float(np.min(np.linalg.eigvalsh(rho)))
        trace = float(np.trace(rho).real)
        ok = lowest >= -1e-9 and abs(trace - 1.0) <= 1e-9
        return ok, f"min eigenvalue {lowest:.3e}, trace {trace:.12f}"

    def sum_rule():
        lambdas, residues, photons = spectrum_mod.correlation_modes(params)
        gap = abs(complex(np.sum(residues)) - photons)
        return gap <= 1e-10, f"|sum residues - <n>| = {gap:.3e}"

    def truncation_distance():
        distance = oracle.truncation_error(params)
        return distance < 1e-3, f"trace distance {distance:.3e} (tolerance 1e-3)"

    def ladder_convergence():
        distance = oracle.ladder_convergence(params)
        return distance < 1e-9, f"n_max 3 vs 4 trace distance {distance:.3e}"

    def adiabatic_numeric():
        omega_eff = rates_mod.effective_rabi(
            params.omega_drive, params.g, params.delta_laser
        )
        if omega_eff == 0.0:
            return True, "no drive, nothing to compare"
        period = 1.0 / (2.0 * abs(omega_eff))
        grid = np.linspace(0.0, 1.2 * period, 400)
        report = oracle.adiabatic_error(
            params.omega_drive, params.g, params.delta_laser, grid
        )
        ok = report.max_population_error < 5e-3 and report.max_excited_population < 5e-3
        return ok, (
            f"population error {report.max_population_error:.3e}, "
            f"excited weight {report.max_excited_population:.3e}"
        )

    def bare_rate_consistency():
        # Scaled operating point: stiff detunings make the reference point
        # unintegrable at the pinned tolerances, the ratio is what matters.
        gamma, ratio = 0.2, 50.0
        delta = gamma * ratio
        omega = delta / 10.0
        target = rates_mod.raman_rate_bare_ideal(omega, delta, gamma)
        t_start = 30.0 / (2.0 * math.pi * gamma)
        horizon = t_start + 0.05 / target
        grid = np.linspace(t_start, horizon, 200)
        pops = oracle.bare_lambda_evolve(omega, delta, gamma, gamma, grid)
        decay = fit_mod.fit_exponential(grid, pops[:, 1])
        fitted = 1.0 / decay.tau
        gap = abs(fitted / target - 1.0)
        return gap < 0.02, f"fitted {fitted:.6e} vs closed form {target:.6e} (rel {gap:.2e})"

    def cavity_rate_consistency():
        # Cavity decay is the only open channel here so the transfer is a
        # clean single exponential at the closed-form rate.
        stripped = replace(
            params,
            gamma1=0.0,
            gamma2=0.0,
            gamma_flip=0.0,
            phonon_alpha1=0.0,
            phonon_alpha2=0.0,
        )
        target = rates_mod.raman_rate_cavity(
            params.omega_drive, params.g, params.delta_laser, params.kappa
        )
        if target == 0.0:
            return True, "no drive, nothing to compare"
        gen = lv.build_liouvillian(stripped)
        rho0 = np.zeros((4, 4), dtype=complex)
        rho0[0, 0] = 1.0
        grid = np.linspace(0.0, 0.5 / target, 120)
        trapped = _trap_population(gen, rho0, grid)
        decay = fit_mod.fit_exponential(grid, trapped)
        fitted = 1.0 / decay.tau
        gap = abs(fitted / target - 1.0)
        return gap < 0.05, f"fitted {fitted:.6e} vs closed form {target:.6e} (rel {gap:.2e})"

    run("adiabatic_regime", regime_adiabatic)
    run("truncation_regime", regime_truncation)
    run("trace_preservation", trace_preservation)
    run("steady_state_physical", steady_physical)
    run("spectrum_sum_rule", sum_rule)
    run("truncation_error", truncation_distance)
    run("ladder_convergence", ladder_convergence)
    run("adiabatic_elimination", adiabatic_numeric)
    run("bare_rate_consistency", bare_rate_consistency)
    run("cavity_rate_consistency", cavity_rate_consistency)
    return checks


def _trap_population(gen: np.ndarray, rho0: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """|g2,0> population on a uniform grid by repeated propagator steps."""
    step = scipy.linalg.expm(gen * float(grid[1] - grid[0]))
    state = lv.vec(rho0)
    values = np.empty(grid.size)
    for i in range(grid.size):
        if i:
            state = step @ state
        values[i] = lv.unvec(state)[1, 1].real
    return values


def cmd_validate(config: RunConfig, out: str | None, as_json: bool) -> int:
    checks = _validation_checks(config)
    all_passed = all(check["passed"] for check in checks)
    if as_json:
        _emit(json.dumps({"checks": checks, "passed": all_passed}, sort_keys=True, indent=2) + "\n", out)
    else:
        lines = []
        for check in checks:
            status = "PASS" if check["passed"] else "FAIL"
            lines.append(f"{status} {check['name']}: {check['detail']}")
        lines.append("validation " + ("passed" if all_passed else "FAILED"))
        _emit("\n".join(lines) + "\n", out)
    return 0 if all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a key = value configuration file")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")
    for key in _PARAM_KEYS + _RUN_FLOAT_KEYS:
        flags = [f"--{key.replace('_', '-')}"]
        if "_" in key:
            flags.append(f"--{key}")
        if key == "omega_drive":
            flags.append("--omega")
        common.add_argument(*flags, dest=key, type=float, default=None)
    for key in _RUN_INT_KEYS:
        flags = [f"--{key.replace('_', '-')}"]
        if "_" in key:
            flags.append(f"--{key}")
        common.add_argument(*flags, dest=key, type=int, default=None)
    common.add_argument("--rs-mode", "--rs_mode", dest="rs_mode", default=None)

    parser = argparse.ArgumentParser(
        prog="cavity-raman",
        description="Raman emission of a driven three-level emitter in a lossy cavity",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rates", parents=[common], help="closed-form rate summary")
    sub.add_parser("spectrum", parents=[common], help="steady-state emission spectrum")
    sub.add_parser("sweep-detuning", parents=[common], help="ratio vs shared detuning")
    sub.add_parser("sweep-cavity", parents=[common], help="ratio vs cavity detuning")
    fit_parser = sub.add_parser("fit", parents=[common], help="fit a data file")
    fit_parser.add_argument(
        "kind", choices=["lorentzian1", "lorentzian2", "exponential", "phonon-n"]
    )
    fit_parser.add_argument("input", help="CSV data file")
    sub.add_parser("validate", parents=[common], help="internal consistency checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == "rates":
            return cmd_rates(config, args.out, args.json)
        if args.command == "spectrum":
            return cmd_spectrum(config, args.out, args.json)
        if args.command == "sweep-detuning":
            return _cmd_sweep(config, args.out, args.json, "delta")
        if args.command == "sweep-cavity":
            return _cmd_sweep(config, args.out, args.json, "delta_cavity")
        if args.command == "fit":
            return cmd_fit(config, args.kind, args.input, args.out)
        if args.command == "validate":
            return cmd_validate(config, args.out, args.json)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        UnstableLiouvillian,
        NonUniqueSteadyState,
        DegenerateSpectrum,
        StiffnessFailure,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
