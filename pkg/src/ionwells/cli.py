"""Command-line interface.

    ionwells [--config FILE] [--output-dir DIR] COMMAND [options]

Commands: couplings, sweep, gate-verify, budget, rwa, decohere.  The
config file (TOML or JSON) overrides the built-in defaults key by key;
unknown keys are rejected rather than ignored.  The output directory is
resolved as: --output-dir flag, else $IONWELLS_OUTPUT_DIR, else the
config's output.directory, else the working directory.

Exit codes: 0 success, 2 usage or config errors, 3 invalid parameter
values, 4 dimension guard tripped, 5 I/O failure.  Errors are printed
to stderr as "ionwells: error [category]: message" so scripts can grep
the bracketed category.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional

import numpy as np

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .constants import E_CHARGE, M_CA40_ION, CA40_QUBIT_WAVELENGTH
from . import qcore
from . import model
from . import dynamics
from . import gates
from . import experiments
from . import output as out_mod

DIM_GUARD = 2 ** 14

EXIT_CODES = {"usage": 2, "config": 2, "validation": 3, "dimension": 4, "io": 5}

DEFAULT_CONFIG = {
    "trap": {
        "separation": 40e-6,
        "nu1": 5.0e6,
        "nu2": 5.1e6,
        "ion_mass": M_CA40_ION,
        "ion_charge": E_CHARGE,
    },
    "laser": {
        "rabi_frequency": 1.0e7,
        "lamb_dicke": 0.1,
        "wavelength": CA40_QUBIT_WAVELENGTH,
        "detuning_in": 0.0,
        "phase": 0.0,
    },
    "simulation": {
        "fock_trunc": 5,
        "tol": 1e-9,
    },
    "sweep": {
        "delta_over_g": [0.0, 2.0, 5.0, 10.0],
        "gt_max": 10.0,
        "points": 1001,
        "fock_trunc": 2,
    },
    "gates": {
        "n_wells": 2,
        "fock_trunc": 3,
        "g_cm": 3.5e4,
        "t_v": 8e-6,
        "t_s": 50e-6,
    },
    "decoherence": {
        "gamma_ex": 1.0e3,
        "gamma_in": 1.0,
    },
    "rwa": {
        "eta_min": 0.01,
        "eta_max": 0.2,
        "n_eta": 8,
        "fock_trunc": 4,
        "points": 41,
    },
    "decohere": {
        "gamma_min": 10.0,
        "gamma_max": 1.0e4,
        "n_gamma": 7,
    },
    "output": {
        "directory": ".",
    },
}


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category
        self.exit_code = EXIT_CODES[category]


# ---------------------------------------------------------------------------
# Config handling


def load_config(path: str) -> dict:
    try:
        if path.endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        elif path.endswith(".toml"):
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        else:
            raise CliError("config", f"config file must end in .toml or .json: {path}")
    except CliError:
        raise
    except FileNotFoundError:
        raise CliError("config", f"config file not found: {path}") from None
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise CliError("config", f"could not parse {path}: {e}") from None
    if not isinstance(data, dict):
        raise CliError("config", f"config root must be a table/object, got {type(data).__name__}")
    return data


def _check_value(default, value, path: str):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise CliError("config", f"{path} must be a boolean, got {value!r}")
        return value
    if isinstance(default, (int, float)):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CliError("config", f"{path} must be a number, got {value!r}")
        return value
    if isinstance(default, str):
        if not isinstance(value, str):
            raise CliError("config", f"{path} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in value
        ):
            raise CliError("config", f"{path} must be a list of numbers, got {value!r}")
        return list(value)
    raise CliError("config", f"unsupported config value at {path}")


def _merge(base: dict, override: dict, prefix: str = "") -> dict:
    merged = {}
    for key, default in base.items():
        if key in override:
            value = override[key]
            path = prefix + key
            if isinstance(default, dict):
                if not isinstance(value, dict):
                    raise CliError("config", f"{path} must be a table/object")
                merged[key] = _merge(default, value, path + ".")
            else:
                merged[key] = _check_value(default, value, path)
        else:
            merged[key] = dict(default) if isinstance(default, dict) else default
    for key in override:
        if key not in base:
            raise CliError("config", f"unknown config key: {prefix + key}")
    return merged


def resolve_config(overrides: Optional[dict] = None) -> dict:
    return _merge(DEFAULT_CONFIG, overrides or {})


def _wrap_validation(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except qcore.DimensionError as e:
        raise CliError("dimension", str(e)) from None
    except ValueError as e:
        raise CliError("validation", str(e)) from None


def trap_from_config(cfg: dict) -> model.TrapArrayParams:
    t = cfg["trap"]
    return _wrap_validation(
        experiments.default_trap,
        separation=t["separation"], nu1=t["nu1"], nu2=t["nu2"],
        mass=t["ion_mass"], charge=t["ion_charge"],
    )


def laser_from_config(cfg: dict) -> model.LaserParams:
    l = cfg["laser"]
    return _wrap_validation(
        experiments.default_laser,
        rabi_frequency=l["rabi_frequency"], lamb_dicke=l["lamb_dicke"],
        wavelength=l["wavelength"], detuning_in=l["detuning_in"], phase=l["phase"],
    )


def decoherence_from_config(cfg: dict) -> dynamics.DecoherenceParams:
    d = cfg["decoherence"]
    return _wrap_validation(
        dynamics.DecoherenceParams, gamma_ex=d["gamma_ex"], gamma_in=d["gamma_in"]
    )


def _resolve_outdir(args, cfg: dict) -> str:
    if getattr(args, "output_dir", None):
        return args.output_dir
    env = os.environ.get("IONWELLS_OUTPUT_DIR")
    if env:
        return env
    return cfg["output"]["directory"]


# ---------------------------------------------------------------------------
# Commands


def _print_kv(key: str, value, unit: str = ""):
    if isinstance(value, float):
        text = f"{value:.12g}"
    else:
        text = str(value)
    suffix = f" {unit}" if unit else ""
    print(f"  {key} = {text}{suffix}")


def cmd_couplings(args, cfg: dict, outdir: str) -> int:
    trap = trap_from_config(cfg)
    laser = laser_from_config(cfg)
    deco = decoherence_from_config(cfg)
    report = _wrap_validation(experiments.feasibility_report, trap, laser, deco)
    der = report.couplings
    print("derived couplings (angular frequencies in rad/s)")
    _print_kv("K", der.K, "J")
    _print_kv("xi1", der.xi1, "m")
    _print_kv("xi2", der.xi2, "m")
    _print_kv("g", der.g)
    _print_kv("delta_ex", der.delta_ex)
    _print_kv("delta_in", der.delta_in)
    _print_kv("omega", der.omega)
    _print_kv("omega_tilde", der.omega_tilde)
    _print_kv("delta", der.delta)
    print("feasibility")
    _print_kv("required_rabi", report.required_rabi)
    _print_kv("required_power_w", report.required_power_w, "W")
    _print_kv("swap_time", report.swap_time, "s")
    _print_kv("g_over_gamma_ex", report.g_over_gamma_ex)
    _print_kv("g_over_gamma_in", report.g_over_gamma_in)
    _print_kv("ld_parameter", report.ld_parameter)
    _print_kv("ld_regime_ok", report.ld_regime_ok)
    if args.json:
        payload = {
            "command": "couplings",
            "config_hash": out_mod.config_hash(cfg),
            "report": report.as_dict(),
        }
        env = out_mod.write_json(os.path.join(outdir, args.json), payload)
        print(f"wrote {env.destination}")
    return 0


def cmd_sweep(args, cfg: dict, outdir: str) -> int:
    s = cfg["sweep"]
    points = args.points if args.points is not None else int(s["points"])
    gt_max = args.gt_max if args.gt_max is not None else float(s["gt_max"])
    trunc = args.trunc if args.trunc is not None else int(s["fock_trunc"])
    if trunc < 2:
        raise CliError("validation", f"fock truncation must be >= 2, got {trunc}")
    if points < 2:
        raise CliError("validation", f"points must be >= 2, got {points}")
    result = _wrap_validation(
        experiments.transfer_probability_sweep,
        tuple(float(r) for r in s["delta_over_g"]),
        gt_max=gt_max, points=points, fock_trunc=trunc, tol=float(cfg["simulation"]["tol"]),
    )
    meta = dict(result.metadata)
    meta["config_hash"] = out_mod.config_hash(cfg)
    path = os.path.join(outdir, args.out)
    env = out_mod.write_csv(path, result.columns, meta)
    print(f"wrote {env.destination}")
    return 0


def cmd_gate_verify(args, cfg: dict, outdir: str) -> int:
    gcfg = cfg["gates"]
    n = args.n if args.n is not None else int(gcfg["n_wells"])
    trunc = args.trunc if args.trunc is not None else int(gcfg["fock_trunc"])
    if n < 2:
        raise CliError("validation", f"gate verification needs n >= 2 wells, got {n}")
    if trunc < 2:
        raise CliError("validation", f"fock truncation must be >= 2, got {trunc}")
    total_dim = (2 * trunc) ** n
    if total_dim > DIM_GUARD:
        raise CliError(
            "dimension",
            f"register dimension {total_dim} = (2*{trunc})^{n} exceeds the guard {DIM_GUARD}",
        )
    register = _wrap_validation(gates.WellRegister, n, trunc)
    u = gates.compose_cnot(n, register)
    block = gates.computational_projection(register, u)
    fid = gates.gate_fidelity(block, gates.cnot_target().matrix)
    reset = gates.ancilla_reset_fidelity(register, u)
    print(f"n_wells = {n}, fock_trunc = {trunc}, dim = {total_dim}")
    _print_kv("gate_fidelity", fid)
    _print_kv("ancilla_reset_fidelity", reset)
    results: dict = {"n_wells": n, "fock_trunc": trunc, "dim": total_dim,
                     "gate_fidelity": fid, "ancilla_reset_fidelity": reset}
    if args.decohere:
        deco = decoherence_from_config(cfg)
        report = _wrap_validation(
            gates.noisy_cnot_report,
            n, register, deco,
            float(gcfg["g_cm"]), float(gcfg["t_v"]), float(gcfg["t_s"]),
        )
        print(f"decohered fidelities (gamma_ex = {deco.gamma_ex:g}, gamma_in = {deco.gamma_in:g})")
        for key in sorted(report):
            _print_kv(f"fidelity_{key}", report[key])
        results["decohered"] = report
    if args.json:
        payload = {"command": "gate-verify",
                   "config_hash": out_mod.config_hash(cfg), "results": results}
        env = out_mod.write_json(os.path.join(outdir, args.json), payload)
        print(f"wrote {env.destination}")
    return 0


def cmd_budget(args, cfg: dict, outdir: str) -> int:
    gcfg = cfg["gates"]
    deco = decoherence_from_config(cfg)
    n = args.n if args.n is not None else int(gcfg["n_wells"])
    budget = _wrap_validation(
        gates.timing_budget, n, float(gcfg["t_v"]), None, float(gcfg["t_s"]),
        g_cm=float(gcfg["g_cm"]),
    )
    cm_coherence = math.inf if deco.gamma_ex == 0 else 1.0 / deco.gamma_ex
    qubit_coherence = math.inf if deco.gamma_in == 0 else 1.0 / deco.gamma_in
    print(f"timing budget for n = {n} wells (g_cm = {gcfg['g_cm']:g} rad/s)")
    _print_kv("t_v", budget.t_v, "s")
    _print_kv("t_u", budget.t_u, "s")
    _print_kv("t_s", budget.t_s, "s")
    _print_kv("t_total", budget.t_total, "s")
    _print_kv("cm_coherence_time", cm_coherence, "s")
    _print_kv("qubit_coherence_time", qubit_coherence, "s")
    _print_kv("within_cm_coherence", budget.t_total < cm_coherence)
    _print_kv("within_qubit_coherence", budget.t_total < qubit_coherence)
    if args.json:
        payload = {
            "command": "budget",
            "config_hash": out_mod.config_hash(cfg),
            "results": {
                "n_wells": n,
                "t_v": budget.t_v,
                "t_u": budget.t_u,
                "t_s": budget.t_s,
                "t_total": budget.t_total,
                "cm_coherence_time": cm_coherence,
                "qubit_coherence_time": qubit_coherence,
                "within_cm_coherence": budget.t_total < cm_coherence,
                "within_qubit_coherence": budget.t_total < qubit_coherence,
            },
        }
        env = out_mod.write_json(os.path.join(outdir, args.json), payload)
        print(f"wrote {env.destination}")
    return 0


def cmd_rwa(args, cfg: dict, outdir: str) -> int:
    r = cfg["rwa"]
    n_eta = int(r["n_eta"])
    if n_eta < 2:
        raise CliError("validation", f"rwa.n_eta must be >= 2, got {n_eta}")
    if not 0 < r["eta_min"] < r["eta_max"] < 1:
        raise CliError(
            "validation",
            f"need 0 < eta_min < eta_max < 1, got {r['eta_min']!r}, {r['eta_max']!r}",
        )
    grid = np.geomspace(float(r["eta_min"]), float(r["eta_max"]), n_eta)
    trap = trap_from_config(cfg)
    result = _wrap_validation(
        experiments.rwa_error_sweep,
        grid, trap,
        rabi_frequency=float(cfg["laser"]["rabi_frequency"]),
        n_fock=int(r["fock_trunc"]), points=int(r["points"]),
        tol=float(cfg["simulation"]["tol"]),
    )
    meta = dict(result.metadata)
    meta["config_hash"] = out_mod.config_hash(cfg)
    env = out_mod.write_csv(os.path.join(outdir, args.out), result.columns, meta)
    _print_kv("slope_ld_gap", result.metadata["slope_ld_gap"])
    _print_kv("slope_peak_infidelity", result.metadata["slope_peak_infidelity"])
    print(f"wrote {env.destination}")
    return 0


def cmd_decohere(args, cfg: dict, outdir: str) -> int:
    d = cfg["decohere"]
    n_gamma = int(d["n_gamma"])
    if n_gamma < 2:
        raise CliError("validation", f"decohere.n_gamma must be >= 2, got {n_gamma}")
    if not 0 < d["gamma_min"] < d["gamma_max"]:
        raise CliError(
            "validation",
            f"need 0 < gamma_min < gamma_max, got {d['gamma_min']!r}, {d['gamma_max']!r}",
        )
    trap = trap_from_config(cfg)
    laser = laser_from_config(cfg)
    der = model.derive_couplings(trap, laser)
    grid = np.geomspace(float(d["gamma_min"]), float(d["gamma_max"]), n_gamma)
    result = _wrap_validation(
        experiments.decoherence_sweep, grid, g=der.g, delta=0.0,
    )
    meta = dict(result.metadata)
    meta["config_hash"] = out_mod.config_hash(cfg)
    env = out_mod.write_csv(os.path.join(outdir, args.out), result.columns, meta)
    print(f"wrote {env.destination}")
    return 0


COMMANDS = {
    "couplings": cmd_couplings,
    "sweep": cmd_sweep,
    "gate-verify": cmd_gate_verify,
    "budget": cmd_budget,
    "rwa": cmd_rwa,
    "decohere": cmd_decohere,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionwells",
        description="Laser-switched coupling and CNOT protocols between ions in separated wells.",
    )
    parser.add_argument("--config", help="TOML or JSON config file overriding the defaults")
    parser.add_argument("--output-dir", help="directory for output files "
                                             "(overrides $IONWELLS_OUTPUT_DIR and the config)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("couplings", help="print derived couplings and feasibility numbers")
    p.add_argument("--json", help="also write the report to this JSON file")

    p = sub.add_parser("sweep", help="transfer probability vs gt for several detunings (CSV)")
    p.add_argument("--out", default="transfer_sweep.csv", help="output CSV filename")
    p.add_argument("--points", type=int, default=None, help="samples along gt")
    p.add_argument("--gt-max", type=float, default=None, dest="gt_max")
    p.add_argument("--trunc", type=int, default=None, help="Fock truncation")

    p = sub.add_parser("gate-verify", help="compose the CNOT protocol and report fidelities")
    p.add_argument("--n", type=int, default=None, help="number of wells")
    p.add_argument("--trunc", type=int, default=None, help="CM Fock truncation")
    p.add_argument("--decohere", action="store_true",
                   help="also report fidelities with the configured decoherence rates")
    p.add_argument("--json", help="also write results to this JSON file")

    p = sub.add_parser("budget", help="protocol timing budget and coherence flags")
    p.add_argument("--n", type=int, default=None, help="number of wells")
    p.add_argument("--json", help="also write results to this JSON file")

    p = sub.add_parser("rwa", help="effective-model error vs Lamb-Dicke parameter (CSV)")
    p.add_argument("--out", default="rwa_sweep.csv", help="output CSV filename")

    p = sub.add_parser("decohere", help="swap fidelity vs damping rate (CSV)")
    p.add_argument("--out", default="decoherence_sweep.csv", help="output CSV filename")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = load_config(args.config) if args.config else None
        cfg = resolve_config(overrides)
        outdir = _resolve_outdir(args, cfg)
        return COMMANDS[args.command](args, cfg, outdir)
    except CliError as e:
        print(f"ionwells: error [{e.category}]: {e}", file=sys.stderr)
        return e.exit_code
    except qcore.DimensionError as e:
        print(f"ionwells: error [dimension]: {e}", file=sys.stderr)
        return EXIT_CODES["dimension"]
    except (qcore.SpaceMismatchError, qcore.StateValidationError, ValueError) as e:
        print(f"ionwells: error [validation]: {e}", file=sys.stderr)
        return EXIT_CODES["validation"]
    except OSError as e:
        print(f"ionwells: error [io]: {e}", file=sys.stderr)
        return EXIT_CODES["io"]


if __name__ == "__main__":
    sys.exit(main())
