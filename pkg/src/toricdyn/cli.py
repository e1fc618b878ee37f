"""Command-line interface.

Subcommands: ground-state, quench-scan, lindblad-scan, validate.  Exit
codes: 0 success, 2 configuration error, 3 resource guard, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .errors import ConfigError, NumericalError, ResourceLimitError
from .groundstate import BETA_CRITICAL, GroundStateSpec, ground_state, log_partition_function, partition_function
from .lattice import build_lattice
from .loopgroup import magnetization_table
from .oracle import MAX_DENSE_SPINS
from .sweep import SweepConfig, run_sweep, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4


def _add_lattice_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lx", type=int, help="plaquette columns")
    p.add_argument("--ly", type=int, help="plaquette rows")


def _add_sweep_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    _add_lattice_args(p)
    p.add_argument("--beta0-min", type=float)
    p.add_argument("--beta0-max", type=float)
    p.add_argument("--beta0-step", type=float)
    p.add_argument("--ti", type=float, help="initial time")
    p.add_argument("--tf", type=float, help="final time")
    p.add_argument("--dt", type=float, help="time grid step")
    p.add_argument("--output", help="CSV output path")
    p.add_argument("--workers", type=int)
    p.add_argument("--dump-series", action="store_true", default=None,
                   help="also write series_<beta0>.csv per grid point")
    p.add_argument("--use-second-derivative", action="store_true", default=None,
                   help="locate the peak on the second difference instead")


_FLAG_TO_FIELD = {
    "lx": "lx", "ly": "ly",
    "beta0_min": "beta0_min", "beta0_max": "beta0_max", "beta0_step": "beta0_step",
    "ti": "t_initial", "tf": "t_final", "dt": "dt",
    "output": "output", "workers": "workers", "dump_series": "dump_series",
    "use_second_derivative": "use_second_derivative",
    "bath_k": "bath_k", "bath_ratio": "bath_ratio", "ode_dt": "ode_dt",
}


def _sweep_config(args, pipeline: str) -> SweepConfig:
    if args.config:
        cfg = SweepConfig.from_json(args.config)
    else:
        cfg = SweepConfig()
    overrides = {"pipeline": pipeline}
    for flag, fieldname in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[fieldname] = value
    merged = {**cfg.__dict__, **overrides}
    return SweepConfig(**merged)


def _cmd_ground_state(args) -> int:
    lat = build_lattice(args.lx or 2, args.ly or 2)
    beta = args.beta
    spec = GroundStateSpec(beta, lat)
    amps = ground_state(spec)
    mag = magnetization_table(lat)
    info = {
        "lattice": f"{lat.Lx}x{lat.Ly}",
        "n_spins": lat.N,
        "group_dim": lat.group_dim,
        "beta": beta,
        "beta_critical": BETA_CRITICAL,
        "log_partition_function": log_partition_function(spec),
        "partition_function": partition_function(spec),
        "norm": float(np.linalg.norm(amps)),
        "amplitude_identity": float(np.real(amps[0])),
        "magnetization_range": [int(mag.min()), int(mag.max())],
    }
    if lat.N <= MAX_DENSE_SPINS:
        from .groundstate import verify_ground_state

        report = verify_ground_state(spec)
        info["oracle_fidelity"] = report["fidelity"]
        info["oracle_energy"] = report["dense_energy"]
        info["ground_degeneracy"] = report["degeneracy"]
    print(json.dumps(info, indent=2))
    return EXIT_OK


def _cmd_scan(args, pipeline: str) -> int:
    cfg = _sweep_config(args, pipeline)
    result = run_sweep(cfg)
    summary = {
        "pipeline": pipeline,
        "points": len(result.betas),
        "failures": len(result.failures),
        "beta_star_ggm": result.beta_star_ggm,
        "beta_star_ln": result.beta_star_ln,
        "beta_critical": BETA_CRITICAL,
    }
    if cfg.output:
        files = write_outputs(result, cfg)
        summary["written"] = [str(f) for f in files[:2]]
    print(json.dumps(summary, indent=2))
    return EXIT_NUMERICAL if result.failures else EXIT_OK


def _cmd_validate(args) -> int:
    from .validate import format_table, run_validation

    checks = run_validation()
    print(format_table(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toricdyn",
        description="Quench dynamics of the nonlinearly perturbed toric code",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gs = sub.add_parser("ground-state", help="inspect an exact ground state")
    _add_lattice_args(p_gs)
    p_gs.add_argument("--beta", type=float, required=True, help="perturbation strength")

    p_quench = sub.add_parser("quench-scan", help="closed-system beta0 sweep")
    _add_sweep_args(p_quench)

    p_lind = sub.add_parser("lindblad-scan", help="dissipative beta0 sweep")
    _add_sweep_args(p_lind)
    p_lind.add_argument("--bath-k", type=float, help="bath coupling strength k")
    p_lind.add_argument("--bath-ratio", type=float, help="bath field over temperature B/T_E")
    p_lind.add_argument("--ode-dt", type=float, help="integrator step size")

    sub.add_parser("validate", help="run the oracle cross-check battery")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "ground-state":
            return _cmd_ground_state(args)
        if args.command == "quench-scan":
            return _cmd_scan(args, "closed")
        if args.command == "lindblad-scan":
            return _cmd_scan(args, "open")
        if args.command == "validate":
            return _cmd_validate(args)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
