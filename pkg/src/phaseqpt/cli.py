"""Command-line front end: inspection, simulation, reconstruction, comparison.

Subcommands
-----------
physics     operating-point report for junction parameters
gate        print a named gate matrix as JSON
chi export  write a chi matrix as JSON plus plot-ready CSV grids
protocol show  describe a tomography protocol
simulate    draw one set of tomography counts
reconstruct run one simulate -> estimate pipeline and report the fidelity
compare     run a full two-protocol campaign and write CSV/JSON data files

Pipelines are configured by a strict JSON file (unknown keys rejected). All
outputs are plain JSON and CSV; exit code 0 on success, 2 on configuration
errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import NotCompletelyPositiveError, change_basis, depolarized_chi, pauli_basis
from .fidelity_stats import (
    CampaignConfig,
    compare_protocols,
    empirical_density,
    gx2_fit,
    run_campaign,
)
from .gates import Gate, cnot_via_sqiswap, gate_by_name, interaction_unitary
from .linalg import matrix_to_json
from .phase_qubit import PhaseQubitParams, physics_report
from .protocols import build_protocol, protocol_summary
from .tomography import mle_reconstruct, process_fidelity, simulate_counts

GATE_NAMES = ("sqiswap", "iswap", "cnot", "identity")
PROTOCOL_NAMES = ("standard", "tetrahedron")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    """Invalid experiment configuration; maps to exit code 2."""


@dataclass(frozen=True)
class ExperimentConfig:
    gate: str
    noise_kind: str
    noise_p: float
    protocol: str
    shots: int
    runs: int
    seed: int
    output_dir: str
    bins: int


_DEFAULTS = {
    "noise": "none",
    "protocol": "both",
    "runs": 200,
    "seed": 42,
    "output_dir": ".",
    "bins": 40,
}
_REQUIRED = ("gate", "shots")
_KNOWN_KEYS = set(_DEFAULTS) | set(_REQUIRED)


def _parse_noise(value) -> tuple[str, float]:
    if value == "none" or value == {"kind": "none"}:
        return "none", 0.0
    if isinstance(value, dict):
        extra = set(value) - {"kind", "p"}
        if extra:
            raise ConfigError(f"unknown noise keys: {', '.join(sorted(extra))}")
        kind = value.get("kind")
        if kind == "none":
            return "none", 0.0
        if kind != "depolarizing":
            raise ConfigError(
                f"unknown noise kind {kind!r} (valid: none, depolarizing)")
        if "p" not in value:
            raise ConfigError("depolarizing noise requires field 'p'")
        p = value["p"]
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0 <= p <= 1:
            raise ConfigError("p must lie in [0,1]")
        return "depolarizing", float(p)
    raise ConfigError(
        "noise must be \"none\" or {\"kind\": \"depolarizing\", \"p\": ...}")


def parse_config(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(obj) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in _REQUIRED:
        if key not in obj:
            raise ConfigError(f"missing required field '{key}'")
    merged = {**_DEFAULTS, **obj}

    gate = merged["gate"]
    if gate not in GATE_NAMES:
        raise ConfigError(
            f"unknown gate {gate!r} (valid: {', '.join(GATE_NAMES)})")
    protocol = merged["protocol"]
    if protocol not in PROTOCOL_NAMES + ("both",):
        raise ConfigError(
            f"unknown protocol {protocol!r} "
            f"(valid: {', '.join(PROTOCOL_NAMES + ('both',))})")
    noise_kind, noise_p = _parse_noise(merged["noise"])

    def positive_int(key):
        v = merged[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"{key} must be a positive integer")
        return v

    seed = merged["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    bins = merged["bins"]
    if not isinstance(bins, int) or isinstance(bins, bool) or bins < 2:
        raise ConfigError("bins must be an integer >= 2")

    return ExperimentConfig(
        gate=gate,
        noise_kind=noise_kind,
        noise_p=noise_p,
        protocol=protocol,
        shots=positive_int("shots"),
        runs=positive_int("runs"),
        seed=seed,
        output_dir=str(merged["output_dir"]),
        bins=bins,
    )


def load_config(path: str) -> ExperimentConfig:
    """Read and validate an experiment config file (strict schema)."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}") from exc
    return parse_config(obj)


def _json_out(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _gate_for_cli(name: str, gt: float | None) -> Gate:
    if name == "interaction":
        if gt is None:
            raise ConfigError("gate 'interaction' requires --gt")
        return interaction_unitary(gt)
    if name == "cnot_via_sqiswap":
        return cnot_via_sqiswap()
    if name in GATE_NAMES:
        return gate_by_name(name)
    raise ConfigError(
        f"unknown gate {name!r} "
        f"(valid: {', '.join(GATE_NAMES + ('interaction', 'cnot_via_sqiswap'))})")


def _cmd_physics(args) -> int:
    params = PhaseQubitParams(args.critical_current, args.bias_current,
                              args.capacitance)
    _json_out(physics_report(params, args.levels), args.out)
    return EXIT_OK


def _cmd_gate(args) -> int:
    gate = _gate_for_cli(args.name, args.gt)
    _json_out({"label": gate.label, "matrix": matrix_to_json(gate.matrix)},
              args.out)
    return EXIT_OK


def _write_chi_csv(path: Path, matrix: np.ndarray) -> None:
    d = matrix.shape[0]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["part", "row"] + [f"c{j}" for j in range(d)])
        for part, block in (("re", matrix.real), ("im", matrix.imag)):
            for i in range(d):
                writer.writerow([part, i] + [repr(float(x)) for x in block[i]])


def _cmd_chi_export(args) -> int:
    gate = gate_by_name(args.gate)
    chi = depolarized_chi(gate, args.noise_p)
    if args.basis == "pauli":
        chi = change_basis(chi, pauli_basis(2))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"chi_{args.gate}"
    _json_out({"S": chi.dim, "basis": chi.basis,
               "matrix": matrix_to_json(chi.matrix)},
              str(out_dir / f"{stem}.json"))
    # both display normalizations: unit trace and raw trace S
    _write_chi_csv(out_dir / f"{stem}_unit.csv", chi.matrix)
    _write_chi_csv(out_dir / f"{stem}_raw.csv", chi.matrix * chi.dim)
    print(f"wrote {stem}.json, {stem}_unit.csv, {stem}_raw.csv in {out_dir}")
    return EXIT_OK


def _cmd_protocol_show(args) -> int:
    protocol = build_protocol(args.name, args.qubits)
    _json_out(protocol_summary(protocol), args.out)
    return EXIT_OK


def _require_single_protocol(cfg: ExperimentConfig, command: str) -> str:
    if cfg.protocol == "both":
        raise ConfigError(
            f"{command} needs a single protocol (standard or tetrahedron); "
            "'both' is only valid for compare")
    return cfg.protocol


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    name = _require_single_protocol(cfg, "simulate")
    protocol = build_protocol(name, 2)
    chi = depolarized_chi(gate_by_name(cfg.gate), cfg.noise_p)
    counts = simulate_counts(chi, protocol, cfg.shots, cfg.seed)
    _json_out({
        "gate": cfg.gate,
        "noise_p": cfg.noise_p,
        "protocol": name,
        "shots": cfg.shots,
        "seed": cfg.seed,
        "shots_per_config": [int(x) for x in counts.shots_per_config],
        "counts": [int(x) for x in counts.counts],
    }, args.out)
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    cfg = load_config(args.config)
    name = _require_single_protocol(cfg, "reconstruct")
    protocol = build_protocol(name, 2)
    chi0 = depolarized_chi(gate_by_name(cfg.gate), cfg.noise_p)
    counts = simulate_counts(chi0, protocol, cfg.shots, cfg.seed)
    result = mle_reconstruct(counts, protocol)
    if args.strict and not result.converged:
        print("reconstruction did not converge (--strict)", file=sys.stderr)
        return EXIT_NUMERICAL
    fid = process_fidelity(result.chi_hat, chi0)
    payload = {
        "fidelity": fid,
        "dF": 1.0 - fid,
        "iterations": result.iterations,
        "converged": result.converged,
        "tp_residual": result.tp_residual,
    }
    if args.with_chi:
        payload["chi"] = matrix_to_json(result.chi_hat.matrix)
    _json_out(payload, args.out)
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = load_config(args.config)
    if cfg.protocol != "both":
        raise ConfigError("compare requires protocol \"both\"")
    campaign = CampaignConfig(
        gate=cfg.gate, noise_p=cfg.noise_p,
        protocols=PROTOCOL_NAMES, shots=cfg.shots, runs=cfg.runs,
        base_seed=cfg.seed)
    samples = run_campaign(campaign)
    std, tet = samples["standard"], samples["tetrahedron"]
    if args.strict and not all(s.converged for s in std + tet):
        print("at least one reconstruction did not converge (--strict)",
              file=sys.stderr)
        return EXIT_NUMERICAL

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with (out_dir / "samples.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run", "protocol", "F", "dF", "converged"])
        for name in PROTOCOL_NAMES:
            for s in samples[name]:
                writer.writerow([s.run_index, name, repr(s.fidelity),
                                 repr(s.dF), int(s.converged)])

    top = max(max(s.dF for s in std), max(s.dF for s in tet))
    centers, dens_std = empirical_density([s.dF for s in std], cfg.bins, upper=top)
    _, dens_tet = empirical_density([s.dF for s in tet], cfg.bins, upper=top)
    with (out_dir / "density.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_center", "density_std", "density_tet"])
        for c, a, b in zip(centers, dens_std, dens_tet):
            writer.writerow([repr(float(c)), repr(float(a)), repr(float(b))])

    report = compare_protocols(std, tet)
    fitted = gx2_fit([s.dF for s in tet], j_max=240)
    report["fitted_nu"] = fitted.effective_dof
    (out_dir / "summary.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote samples.csv, density.csv, summary.json in {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseqpt",
        description="Process-tomography simulation and estimation for "
                    "capacitively coupled phase qubits")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("physics", help="operating-point report")
    p.add_argument("--critical-current", type=float, required=True,
                   help="junction critical current, amperes")
    p.add_argument("--bias-current", type=float, required=True,
                   help="bias current, amperes")
    p.add_argument("--capacitance", type=float, required=True,
                   help="junction capacitance, farads")
    p.add_argument("--levels", type=int, default=3,
                   help="highest harmonic level index to report")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_physics)

    p = sub.add_parser("gate", help="print a gate matrix as JSON")
    p.add_argument("name", help="sqiswap | iswap | cnot | identity | "
                                "interaction | cnot_via_sqiswap")
    p.add_argument("--gt", type=float, default=None,
                   help="pulse phase for the interaction unitary, radians")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_gate)

    p = sub.add_parser("chi", help="chi-matrix tools")
    chi_sub = p.add_subparsers(dest="chi_command", required=True)
    pe = chi_sub.add_parser("export", help="write chi JSON and CSV grids")
    pe.add_argument("--gate", choices=GATE_NAMES, required=True)
    pe.add_argument("--noise-p", type=float, default=0.0,
                    help="depolarizing weight in [0,1]")
    pe.add_argument("--basis", choices=("natural", "pauli"), default="pauli")
    pe.add_argument("--out-dir", default=".")
    pe.set_defaults(func=_cmd_chi_export)

    p = sub.add_parser("protocol", help="protocol tools")
    proto_sub = p.add_subparsers(dest="protocol_command", required=True)
    ps = proto_sub.add_parser("show", help="describe a protocol")
    ps.add_argument("--name", choices=PROTOCOL_NAMES, required=True)
    ps.add_argument("--qubits", type=int, default=2, choices=(1, 2))
    ps.add_argument("--out", help="write JSON here instead of stdout")
    ps.set_defaults(func=_cmd_protocol_show)

    p = sub.add_parser("simulate", help="draw tomography counts")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reconstruct", help="simulate and estimate once")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--with-chi", action="store_true",
                   help="include the estimated chi matrix in the output")
    p.add_argument("--strict", action="store_true",
                   help="treat non-convergence as a failure (exit 3)")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("compare", help="two-protocol accuracy campaign")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--strict", action="store_true",
                   help="treat non-convergence as a failure (exit 3)")
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotCompletelyPositiveError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
