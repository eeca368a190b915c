"""Command-line front end: configure an experiment, run it, emit CSV/JSON rows.

Every run is fully determined by its configuration; seeds are never derived
from the clock, and repeated invocations write byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import analysis, fock
from .errors import ValidationError
from .gates import ANCILLA_PLUS
from .measurement import outcome_density
from .optics import apply_cross_kerr, build_parity_coupling_pair
from .states import ProbeMode, new_state

EXPERIMENTS = ("parity", "entangler", "entangler45", "cnot", "sweep", "validate-oracle")

CSV_HEADER = "experiment,alpha,theta,shots,seed,x0,xd,p_error_analytic,error_rate,error_ci,mean_fidelity"

_FIELDS = CSV_HEADER.split(",")

#: all probe amplitudes the oracle can certify (truncation stays tractable)
ORACLE_ALPHA_MAX = 3.0

_DEFAULTS = {"shots": 10_000, "seed": 42, "format": "csv"}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    alpha: float
    theta: float
    shots: int = _DEFAULTS["shots"]
    seed: int = _DEFAULTS["seed"]
    input_state: tuple[tuple[complex, complex], ...] | None = None
    sweep_alpha: tuple[float, ...] | None = None
    sweep_theta: tuple[float, ...] | None = None
    sweep_gate: str = "parity"
    output_path: str = "results.csv"
    output_format: str = _DEFAULTS["format"]


class ConfigError(ValidationError):
    """Configuration problem; maps to exit code 2."""


def _parse_pairs(text: str) -> tuple[tuple[complex, complex], ...]:
    """Parse 'c0,c1;c0,c1' into normalized amplitude pairs."""
    pairs = []
    for chunk in text.split(";"):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ConfigError(f"input: expected 'c0,c1' pairs, got {chunk!r}")
        try:
            c0, c1 = complex(parts[0]), complex(parts[1])
        except ValueError as exc:
            raise ConfigError(f"input: bad amplitude in {chunk!r}: {exc}") from exc
        nrm = math.sqrt(abs(c0) ** 2 + abs(c1) ** 2)
        if nrm == 0:
            raise ConfigError(f"input: zero amplitude pair {chunk!r}")
        pairs.append((c0 / nrm, c1 / nrm))
    return tuple(pairs)


def _parse_grid(text: str, key: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 'start:stop:count', got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    if count < 1:
        raise ConfigError(f"{key}: count must be >= 1")
    return tuple(float(v) for v in np.linspace(start, stop, count))


_FILE_KEYS = {
    "experiment": str,
    "alpha": float,
    "theta": float,
    "shots": int,
    "seed": int,
    "input": str,
    "grid_alpha": str,
    "grid_theta": str,
    "sweep_gate": str,
    "output": str,
    "format": str,
}


def _read_config_file(path: str) -> dict:
    values: dict = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path!r}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _FILE_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _FILE_KEYS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: {key}: {exc}") from exc
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrgate",
        description="Run weak-Kerr QND parity/entangler/CNOT experiments.",
    )
    parser.add_argument("--config", help="flat key = value config file; flags override it")
    parser.add_argument("--experiment", choices=EXPERIMENTS)
    parser.add_argument("--alpha", type=float, help="probe coherent amplitude")
    parser.add_argument("--theta", type=float, help="Kerr phase unit per photon, radians")
    parser.add_argument("--shots", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument(
        "--input", help="qubit amplitude pairs 'c0,c1;c0,c1' (renormalized; complex OK)"
    )
    parser.add_argument("--grid-alpha", help="sweep grid 'start:stop:count'")
    parser.add_argument("--grid-theta", help="sweep grid 'start:stop:count'")
    parser.add_argument("--sweep-gate", choices=analysis.EXPERIMENTS)
    parser.add_argument("--output", help="output file path")
    parser.add_argument("--format", choices=("csv", "json"))
    return parser


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    """Merge config file and flags (flags win) into a validated config."""
    args = _build_parser().parse_args(argv)
    values = _read_config_file(args.config) if args.config else {}
    for key, flag in (
        ("experiment", args.experiment),
        ("alpha", args.alpha),
        ("theta", args.theta),
        ("shots", args.shots),
        ("seed", args.seed),
        ("input", args.input),
        ("grid_alpha", args.grid_alpha),
        ("grid_theta", args.grid_theta),
        ("sweep_gate", args.sweep_gate),
        ("output", args.output),
        ("format", args.format),
    ):
        if flag is not None:
            values[key] = flag

    if "experiment" not in values:
        raise ConfigError("experiment: required (flag --experiment or config key)")
    if values["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {values['experiment']!r}")
    if "alpha" not in values or "theta" not in values:
        raise ConfigError("alpha, theta: both are required")

    config = ExperimentConfig(
        experiment=values["experiment"],
        alpha=float(values["alpha"]),
        theta=float(values["theta"]),
        shots=int(values.get("shots", _DEFAULTS["shots"])),
        seed=int(values.get("seed", _DEFAULTS["seed"])),
        input_state=_parse_pairs(values["input"]) if "input" in values else None,
        sweep_alpha=_parse_grid(values["grid_alpha"], "grid_alpha")
        if "grid_alpha" in values
        else None,
        sweep_theta=_parse_grid(values["grid_theta"], "grid_theta")
        if "grid_theta" in values
        else None,
        sweep_gate=values.get("sweep_gate", "parity"),
        output_path=values.get("output", "results.csv"),
        output_format=values.get("format", _DEFAULTS["format"]),
    )
    _validate_config(config)
    return config


def _validate_config(config: ExperimentConfig) -> None:
    if not (config.alpha >= 0 and math.isfinite(config.alpha)):
        raise ConfigError(f"alpha: must be finite and >= 0, got {config.alpha}")
    if not (0.0 <= config.theta <= math.pi):
        raise ConfigError(f"theta: must lie in [0, pi], got {config.theta}")
    if config.shots < 1:
        raise ConfigError(f"shots: must be >= 1, got {config.shots}")
    if config.output_format not in ("csv", "json"):
        raise ConfigError(f"format: must be csv or json, got {config.output_format!r}")
    if config.experiment == "sweep":
        if config.sweep_alpha is None or config.sweep_theta is None:
            raise ConfigError("grid_alpha, grid_theta: sweep needs both grids")
        if config.sweep_gate not in analysis.EXPERIMENTS:
            raise ConfigError(f"sweep_gate: unknown gate {config.sweep_gate!r}")
        for a in config.sweep_alpha:
            if not (a >= 0 and math.isfinite(a)):
                raise ConfigError(f"grid_alpha: bad value {a}")
        for t in config.sweep_theta:
            if not (0.0 <= t <= math.pi):
                raise ConfigError(f"grid_theta: value {t} outside [0, pi]")
    if config.experiment == "validate-oracle" and config.alpha > ORACLE_ALPHA_MAX:
        raise ConfigError(
            f"alpha: validate-oracle needs alpha <= {ORACLE_ALPHA_MAX} "
            "(Fock truncation stays tractable only at small amplitude)"
        )
    if config.input_state is not None and len(config.input_state) != 2:
        raise ConfigError("input: expected exactly two amplitude pairs")


_UNIFORM = (complex(ANCILLA_PLUS[0]), complex(ANCILLA_PLUS[1]))


def _row(experiment, alpha, theta, shots, seed, stats=None, fidelity=None, deviation=None):
    geo = analysis.geometry(alpha, theta)
    return {
        "experiment": experiment,
        "alpha": alpha,
        "theta": theta,
        "shots": shots,
        "seed": seed,
        "x0": geo.x0,
        "xd": geo.xd,
        "p_error_analytic": analysis.p_error(alpha, theta),
        "error_rate": stats.logical_error_rate if stats else deviation,
        "error_ci": stats.error_ci if stats else 0.0,
        "mean_fidelity": stats.mean_fidelity if stats else fidelity,
    }


def _validate_oracle(config: ExperimentConfig) -> tuple[dict, bool]:
    """Cross-check the branch model against the Fock oracle at one (alpha, theta).

    Runs the parity-detector circuit on a uniform input along both paths and
    reports the worst state-fidelity deficit and homodyne-density deviation.
    """
    probe = ProbeMode(config.alpha, config.theta)
    inputs = config.input_state or (_UNIFORM, _UNIFORM)
    state = new_state(list(inputs)).activate_probe(probe)
    n_trunc = fock.required_truncation(config.alpha) + 5

    embedded = fock.oracle_embed(state, n_trunc)
    for coupling in build_parity_coupling_pair(0, 1, 0, "computational"):
        state = apply_cross_kerr(state, coupling)
        embedded = fock.oracle_cross_kerr(embedded, coupling)
    re_embedded = fock.oracle_embed(state, n_trunc)
    state_fid = fock.oracle_fidelity(embedded, re_embedded)

    lo = 2.0 * config.alpha * math.cos(config.theta) - 10.0
    hi = 2.0 * config.alpha + 10.0
    grid = np.linspace(lo, hi, 2001)
    dev = float(np.max(np.abs(outcome_density(state, 0)(grid) - fock.oracle_homodyne_density(embedded)(grid))))

    row = _row(
        "validate-oracle",
        config.alpha,
        config.theta,
        config.shots,
        config.seed,
        fidelity=state_fid,
        deviation=dev,
    )
    ok = dev < 1e-6 and state_fid >= 1.0 - 1e-9
    return row, ok


def _format_value(key, value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _render_csv(rows: list[dict]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join(_format_value(k, row[k]) for k in _FIELDS))
    return "\n".join(lines) + "\n"


def _render_json(rows: list[dict]) -> str:
    # hand-rolled so floats keep the same 17-significant-digit form as the CSV
    parts = []
    for row in rows:
        fields = []
        for k in _FIELDS:
            v = row[k]
            rendered = _format_value(k, v) if isinstance(v, (int, float)) else json.dumps(v)
            fields.append(f'"{k}": {rendered}')
        parts.append("  {" + ", ".join(fields) + "}")
    return "[\n" + ",\n".join(parts) + "\n]\n"


def run(config: ExperimentConfig) -> int:
    """Execute a validated config; returns the process exit code."""
    start = time.perf_counter()
    rows: list[dict] = []
    ok = True
    if config.experiment == "validate-oracle":
        row, ok = _validate_oracle(config)
        rows.append(row)
    elif config.experiment == "sweep":
        inputs = config.input_state or (_UNIFORM, _UNIFORM)
        for alpha in config.sweep_alpha:
            for theta in config.sweep_theta:
                stats = analysis.run_shots(
                    config.sweep_gate, inputs, alpha, theta, config.shots, config.seed
                )
                rows.append(
                    _row(config.sweep_gate, alpha, theta, config.shots, config.seed, stats)
                )
    else:
        inputs = config.input_state or (_UNIFORM, _UNIFORM)
        stats = analysis.run_shots(
            config.experiment, inputs, config.alpha, config.theta, config.shots, config.seed
        )
        rows.append(
            _row(config.experiment, config.alpha, config.theta, config.shots, config.seed, stats)
        )

    text = _render_csv(rows) if config.output_format == "csv" else _render_json(rows)
    try:
        with open(config.output_path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {config.output_path!r}: {exc}", file=sys.stderr)
        return 1

    runtime = time.perf_counter() - start
    first = rows[0]
    print(
        f"{config.experiment}: p_error_analytic={first['p_error_analytic']:.3e} "
        f"empirical_error_rate={first['error_rate']:.3e} "
        f"rows={len(rows)} runtime={runtime:.2f}s"
    )
    if not ok:
        print("error: oracle validation outside tolerance", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure -> exit 1, per contract
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
