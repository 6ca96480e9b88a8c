"""Command-line entry point: ``weberorr {transform,evolve,reconstruct,verify}``.

Every subcommand reads an optional JSON config (``--config``), applies the
overriding flags ``--r0``, ``--k``, ``--t`` and ``--out-dir``, and writes
its outputs plus ``report.json`` (which echoes the effective config) into
the output directory.

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
3 verification failure.  ``WOS_THREADS`` caps the number of worker threads.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import io as wio
from .quadrature import QuadratureError, RadialProfile, TransformParams

log = logging.getLogger("weberorr")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3

DEFAULTS: dict[str, Any] = {
    "r0": 1.0,
    "v_infinity": 0.0,
    "K_max": 16,
    "k": 0,
    "times": [0.0, 0.25, 1.0],
    "transform": {
        "lambda_max": None,
        "r_max": None,
        "panel_tol": 1e-10,
        "max_panels": 100000,
        "tail_tol": 1e-5,
    },
    "grid": {"n": 800, "r_max": 30.0, "spacing": "stretched", "first_step": 0.005},
    "input": None,
    "fixture": "bump",
    "out_dir": "weberorr-out",
    "spectrum_nodes": 2000,
    "strict": True,
    "reconstruct": {"mode": "noslip", "theta": 0.0},
    "tolerances": {
        "bessel_identity": 1e-10,
        "robin": 1e-10,
        "roundtrip": 1e-3,
        "moment": 1e-6,
        "oracle": 1e-3,
        "laplace": 1e-3,
        "boundary": 1e-6,
        "closed_form": 1e-10,
        "gauge": 1e-12,
    },
    "verify": {"properties": None, "roundtrip_k": [0, 1, 3]},
}

FIXTURES = ("bump", "compliant", "acceptance", "zero")


class ConfigError(ValueError):
    """Invalid configuration (exit code 1)."""


class VerificationFailure(RuntimeError):
    """A checked property did not hold (exit code 3)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{where}' must be an object")
            out[key] = _merge(base[key], value, where + ".")
        else:
            out[key] = value
    return out


def _positive(cfg: dict, *keys) -> None:
    for key in keys:
        node, name = cfg, key
        for part in key.split(".")[:-1]:
            node = node[part]
        name = key.split(".")[-1]
        v = node[name]
        if v is None:
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"config key '{key}' must be a positive number, got {v!r}")


def load_config(path: Optional[str], overrides: dict) -> dict:
    """Defaults, then the JSON file, then command-line overrides; validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _merge(cfg, user)
    cfg = _merge(cfg, {k: v for k, v in overrides.items() if v is not None})
    _positive(cfg, "r0", "K_max", "spectrum_nodes", "transform.panel_tol", "transform.max_panels",
              "transform.tail_tol", "transform.lambda_max", "transform.r_max", "grid.n", "grid.r_max",
              "grid.first_step")
    for key in cfg["tolerances"]:
        _positive(cfg, f"tolerances.{key}")
    if not isinstance(cfg["k"], int) or isinstance(cfg["k"], bool):
        raise ConfigError("config key 'k' must be an integer")
    if abs(cfg["k"]) > 64:
        raise ConfigError("|k| must not exceed 64")
    times = cfg["times"]
    if not isinstance(times, list) or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in times):
        raise ConfigError("config key 'times' must be a list of numbers")
    if any(t < 0 or not math.isfinite(t) for t in times):
        raise ConfigError("times must be finite and non-negative")
    if cfg["grid"]["spacing"] not in ("uniform", "stretched"):
        raise ConfigError("grid.spacing must be 'uniform' or 'stretched'")
    if cfg["grid"]["n"] < 5:
        raise ConfigError("grid.n must be at least 5")
    if cfg["grid"]["r_max"] <= cfg["r0"]:
        raise ConfigError("grid.r_max must exceed r0")
    if cfg["fixture"] not in FIXTURES:
        raise ConfigError(f"fixture must be one of {FIXTURES}")
    if cfg["reconstruct"]["mode"] not in ("noslip", "slip"):
        raise ConfigError("reconstruct.mode must be 'noslip' or 'slip'")
    if not isinstance(cfg["v_infinity"], (int, float)) or not math.isfinite(cfg["v_infinity"]):
        raise ConfigError("v_infinity must be a finite number")
    props = cfg["verify"]["properties"]
    if props is not None:
        from .verify import PROPERTIES

        if not isinstance(props, list) or any(p not in PROPERTIES for p in props):
            raise ConfigError(f"verify.properties must be a list drawn from {sorted(PROPERTIES)}")
    if cfg["transform"]["r_max"] is not None and cfg["transform"]["r_max"] <= cfg["r0"]:
        raise ConfigError("transform.r_max must exceed r0")
    return cfg


def transform_params(cfg: dict) -> TransformParams:
    t = cfg["transform"]
    return TransformParams.default(
        cfg["r0"],
        lambda_max=t["lambda_max"],
        r_max=t["r_max"],
        panel_tol=t["panel_tol"],
        max_panels=int(t["max_panels"]),
        tail_tol=t["tail_tol"],
    )


def _grid(cfg: dict) -> np.ndarray:
    from .fixtures import stretched_grid

    g, r0 = cfg["grid"], cfg["r0"]
    r_end = g["r_max"]
    if g["spacing"] == "uniform":
        return np.linspace(r0, r_end, int(g["n"]))
    return stretched_grid(r0, r_end, int(g["n"]), g["first_step"] * r0)


def _fixture_profile(cfg: dict, k: int, params: TransformParams) -> RadialProfile:
    from .fixtures import acceptance_profile, bump_profile, compliant_bump
    from .stokes import noslip_target

    r0, name = cfg["r0"], cfg["fixture"]
    if name == "acceptance":
        return acceptance_profile(r0, 40.0 * r0, 400)
    grid = _grid(cfg)
    if name == "zero":
        return RadialProfile.zeros(r0, grid)
    if name == "bump":
        return bump_profile(r0, grid, 3.0 * r0, 0.8 * r0)
    return compliant_bump(k, r0, grid, target=noslip_target(k, r0, cfg["v_infinity"]), params=params)


def _fixture_field(cfg: dict, params: TransformParams):
    """Real field with modes -k..k; the 'compliant' fixture satisfies no-slip."""
    from .stokes import VorticityField

    kk = abs(cfg["k"])
    modes = {}
    for k in range(0, kk + 1):
        prof = _fixture_profile(cfg, k, params)
        modes[k] = prof
        if k:
            modes[-k] = prof.conj()
    return VorticityField(cfg["r0"], modes)


def _threads() -> int:
    raw = os.environ.get("WOS_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"WOS_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"WOS_THREADS must be a positive integer, got {raw!r}")
    return n


def _load_input_profile(cfg: dict, params: TransformParams) -> RadialProfile:
    if cfg["input"] is None:
        return _fixture_profile(cfg, cfg["k"], params)
    prof = wio.read_profile(cfg["input"])
    if not math.isclose(prof.r0, cfg["r0"], rel_tol=1e-12):
        raise ConfigError(f"input profile starts at {prof.r0}, config r0={cfg['r0']}")
    return prof


def _load_input_field(cfg: dict, params: TransformParams):
    if cfg["input"] is None:
        return _fixture_field(cfg, params)
    field, _ = wio.read_field(cfg["input"])
    if not math.isclose(field.r0, cfg["r0"], rel_tol=1e-12):
        raise ConfigError(f"input field has r0={field.r0}, config r0={cfg['r0']}")
    return field


def cmd_transform(cfg: dict) -> dict:
    """Forward spectrum, roundtrip reconstruction and diagnostics for one mode."""
    from .weber_orr import KernelSpec, default_lambda_grid, forward, roundtrip

    params = transform_params(cfg)
    out = Path(cfg["out_dir"])
    f = _load_input_profile(cfg, params)
    k = abs(cfg["k"])
    spec = KernelSpec.associated(k, cfg["r0"])
    lam = default_lambda_grid(cfg["r0"], params, int(cfg["spectrum_nodes"]))
    spectrum = forward(spec, f, lam, params)
    wio.write_spectrum(out / "spectrum.csv", spectrum)
    rep = roundtrip(k, f, params)
    wio.write_profile(out / "roundtrip.csv", rep.reconstructed)
    wio.write_profile(out / "raw_inverse.csv", rep.raw)
    wio.write_profile(out / "correction.csv", rep.correction)
    tol = cfg["tolerances"]["roundtrip"]
    return {
        "command": "transform",
        "k": k,
        "moment": rep.moment,
        "raw_inverse_error": rep.raw_error,
        "roundtrip_error": rep.error,
        "correction_norm": rep.correction_norm,
        "correction_coefficient": 2.0 * max(k - 1, 0) * cfg["r0"] ** (2 * k - 2) * rep.moment if k >= 2 else 0.0,
        "spectral_cutoff": rep.cutoff,
        "tail_bound": rep.tail_bound,
        "roundtrip_within_tolerance": rep.error <= tol,
        "files": ["spectrum.csv", "roundtrip.csv", "raw_inverse.csv", "correction.csv"],
    }


def cmd_evolve(cfg: dict) -> dict:
    """Vorticity at each configured time; Robin residuals and moment drift per mode."""
    from .stokes import (
        StokesProblem,
        VorticityField,
        check_noslip_relations,
        evolve_mode_robin,
        invariant_moment,
        robin_residual,
        solve_stokes,
    )

    params = transform_params(cfg)
    out = Path(cfg["out_dir"])
    field0 = _load_input_field(cfg, params)
    problem = StokesProblem(cfg["r0"], float(cfg["v_infinity"]), field0, int(cfg["K_max"]))
    relations = check_noslip_relations(problem, params)
    times = [float(t) for t in cfg["times"]]
    if relations.ok:
        fields = solve_stokes(problem, times, params, workers=_threads())
    elif cfg["strict"]:
        raise VerificationFailure(
            f"no-slip relations violated (max residual {relations.max_residual:.3e}, "
            f"tolerance {relations.tolerance:.1e}); set strict=false to evolve with the residue term"
        )
    else:
        log.warning("no-slip relations violated; evolving each mode with its stationary residue term")
        fields = {
            t: VorticityField(cfg["r0"], {k: evolve_mode_robin(k, p, t, params) for k, p in field0.items()})
            for t in times
        }
    m0 = {k: invariant_moment(k, p, params) for k, p in field0.items()}
    per_time = []
    worst_drift = 0.0
    for t in times:
        fld = fields[t]
        name = f"t_{t:g}"
        wio.write_field(out / name, fld, int(cfg["K_max"]))
        modes = {}
        for k, p in fld.items():
            drift = abs(invariant_moment(k, p, params) - m0[k])
            worst_drift = max(worst_drift, drift / (1 + abs(m0[k])))
            scale = float(np.max(np.abs(p.values))) if len(p) else 0.0
            modes[k] = {
                "robin_residual": abs(robin_residual(k, p)),
                "max_abs": scale,
                "moment": invariant_moment(k, p, params),
                "moment_drift": drift,
            }
        per_time.append({"t": t, "directory": name, "modes": modes})
    return {
        "command": "evolve",
        "noslip_relations": relations.as_dict(),
        "max_relative_moment_drift": worst_drift,
        "moment_drift_within_tolerance": worst_drift <= cfg["tolerances"]["moment"],
        "times": per_time,
    }


def cmd_reconstruct(cfg: dict) -> dict:
    """Velocity modes from vorticity, with boundary values and div/curl residuals."""
    from .biot_savart import field_residuals, reconstruct_noslip, reconstruct_slip

    params = transform_params(cfg)
    out = Path(cfg["out_dir"])
    field0 = _load_input_field(cfg, params)
    mode = cfg["reconstruct"]["mode"]
    vinf = float(cfg["v_infinity"])
    if mode == "noslip":
        vel = reconstruct_noslip(field0, vinf, params)
    else:
        vel = reconstruct_slip(field0, vinf, float(cfg["reconstruct"]["theta"]), params)
    wio.write_velocity(out / "velocity", vel)
    bv = vel.boundary_values()
    radial_bv = {k: abs(vr.values[0]) for k, (vr, _) in vel.items()}
    res = field_residuals(vel, field0)
    tol = cfg["tolerances"]["boundary"]
    return {
        "command": "reconstruct",
        "mode": mode,
        "boundary_values": bv,
        "radial_boundary_values": radial_bv,
        "max_boundary_value": max(bv.values(), default=0.0),
        "boundary_within_tolerance": (max(bv.values(), default=0.0) if mode == "noslip"
                                      else max(radial_bv.values(), default=0.0)) <= tol,
        "residuals": res.as_dict(),
        "files": ["velocity/manifest.json"],
    }


def cmd_verify(cfg: dict) -> dict:
    """Run the property suite; the caller maps failures to exit code 3."""
    from .verify import PROPERTIES, VerifySettings, run_properties

    tol = cfg["tolerances"]
    settings = VerifySettings(
        r0=cfg["r0"],
        params=transform_params(cfg),
        bessel_identity_tol=tol["bessel_identity"],
        robin_tol=tol["robin"],
        roundtrip_tol=tol["roundtrip"],
        roundtrip_k=tuple(int(k) for k in cfg["verify"]["roundtrip_k"]),
        moment_tol=tol["moment"],
        oracle_tol=tol["oracle"],
        laplace_tol=tol["laplace"],
        boundary_tol=tol["boundary"],
        closed_form_tol=tol["closed_form"],
        gauge_tol=tol["gauge"],
    )
    names = cfg["verify"]["properties"]
    names = list(PROPERTIES) if names is None else names
    results = run_properties(names, settings)
    return {
        "command": "verify",
        "passed": all(r.passed for r in results),
        "properties": [r.as_dict() for r in results],
    }


COMMANDS = {
    "transform": cmd_transform,
    "evolve": cmd_evolve,
    "reconstruct": cmd_reconstruct,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weberorr", description="Weber-Orr transforms and exterior Stokes vorticity.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "transform": "forward transform and roundtrip diagnostics of one mode",
        "evolve": "evolve a vorticity field to the configured times",
        "reconstruct": "velocity modes from a vorticity field",
        "verify": "run the property suite",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--r0", type=float, help="disc radius")
        p.add_argument("--k", type=int, help="mode index")
        p.add_argument("--t", type=float, action="append", help="time (repeatable; replaces config times)")
        p.add_argument("--out-dir", help="output directory")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {"r0": args.r0, "k": args.k, "times": args.t, "out_dir": args.out_dir}
    try:
        cfg = load_config(args.config, overrides)
        _threads()
        report = COMMANDS[args.command](cfg)
    except (ConfigError, wio.FormatError) as exc:
        print(f"weberorr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationFailure as exc:
        print(f"weberorr: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (QuadratureError, ArithmeticError, np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
        print(f"weberorr: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    report["config"] = cfg
    path = wio.write_json(Path(cfg["out_dir"]) / "report.json", report)
    log.info("wrote %s", path)
    if args.command == "verify":
        for prop in report["properties"]:
            status = "PASS" if prop["passed"] else "FAIL"
            print(f"{status} {prop['name']}: measured {prop['measured']:.3e} (threshold {prop['threshold']:.1e})")
        if not report["passed"]:
            return EXIT_VERIFY
    else:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
