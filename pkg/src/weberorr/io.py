"""File formats: profile CSVs, field manifests and JSON reports.

* A profile is a CSV with header ``r,re,im`` (radial) or ``lambda,re,im``
  (spectral).
* A field is one profile CSV per mode plus ``manifest.json`` holding
  ``{"r0": ..., "K_max": ..., "modes": {"<k>": "<file>"}}``.
* Velocity modes use ``r,vr_re,vr_im,vphi_re,vphi_im``.

Every write goes to a temporary file in the target directory and is then
renamed into place.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .quadrature import RadialProfile, SpectralProfile

__all__ = [
    "FormatError",
    "atomic_write_text",
    "write_json",
    "read_json",
    "write_profile",
    "read_profile",
    "write_spectrum",
    "read_spectrum",
    "write_field",
    "read_field",
    "write_velocity",
]


class FormatError(ValueError):
    """An input file does not follow the expected format."""


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(float(obj.real)), _jsonable(float(obj.imag))]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, data: dict) -> Path:
    return atomic_write_text(path, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_columns(path, header: list[str], columns: list[np.ndarray]) -> Path:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*columns):
        writer.writerow([_fmt(v) for v in row])
    return atomic_write_text(path, buf.getvalue())


def _read_columns(path, header: list[str]) -> np.ndarray:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: empty file")
    got = [h.strip() for h in rows[0]]
    if got != header:
        raise FormatError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header) or data.shape[0] == 0:
        raise FormatError(f"{path}: expected {len(header)} columns and at least one row")
    return data


def write_profile(path, profile: RadialProfile) -> Path:
    return _write_columns(path, ["r", "re", "im"], [profile.nodes, profile.values.real, profile.values.imag])


def read_profile(path, r0: float | None = None) -> RadialProfile:
    data = _read_columns(path, ["r", "re", "im"])
    r0 = float(data[0, 0]) if r0 is None else r0
    try:
        return RadialProfile(r0, data[:, 0], data[:, 1] + 1j * data[:, 2])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_spectrum(path, spectrum: SpectralProfile) -> Path:
    return _write_columns(path, ["lambda", "re", "im"], [spectrum.lambdas, spectrum.values.real, spectrum.values.imag])


def read_spectrum(path) -> SpectralProfile:
    data = _read_columns(path, ["lambda", "re", "im"])
    try:
        return SpectralProfile(data[:, 0], data[:, 1] + 1j * data[:, 2])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_field(directory, field, K_max: int | None = None) -> Path:
    """Write a VorticityField as ``mode_<k>.csv`` files plus ``manifest.json``."""
    directory = Path(directory)
    modes = {}
    for k, prof in field.items():
        name = f"mode_{k}.csv"
        write_profile(directory / name, prof)
        modes[str(k)] = name
    manifest = {"r0": field.r0, "K_max": K_max if K_max is not None else field.k_max, "modes": modes}
    return write_json(directory / "manifest.json", manifest)


def read_field(manifest_path):
    """Read a field manifest; mode files are resolved relative to it."""
    from .stokes import VorticityField

    manifest_path = Path(manifest_path)
    data = read_json(manifest_path)
    if not isinstance(data, dict):
        raise FormatError(f"{manifest_path}: manifest must be a JSON object")
    unknown = set(data) - {"r0", "K_max", "modes"}
    if unknown:
        raise FormatError(f"{manifest_path}: unknown manifest keys {sorted(unknown)}")
    try:
        r0 = float(data["r0"])
        modes_map = data["modes"]
        K_max = int(data.get("K_max", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{manifest_path}: malformed manifest ({exc})") from exc
    modes = {}
    for key, name in modes_map.items():
        try:
            k = int(key)
        except ValueError as exc:
            raise FormatError(f"{manifest_path}: mode key {key!r} is not an integer") from exc
        modes[k] = read_profile(manifest_path.parent / name, r0)
    try:
        field = VorticityField(r0, modes)
    except ValueError as exc:
        raise FormatError(f"{manifest_path}: {exc}") from exc
    return field, K_max


def write_velocity(directory, velocity) -> Path:
    """Write VelocityModes as ``velocity_<k>.csv`` plus ``manifest.json``."""
    directory = Path(directory)
    modes = {}
    for k, (vr, vp) in velocity.items():
        name = f"velocity_{k}.csv"
        _write_columns(
            directory / name,
            ["r", "vr_re", "vr_im", "vphi_re", "vphi_im"],
            [vr.nodes, vr.values.real, vr.values.imag, vp.values.real, vp.values.imag],
        )
        modes[str(k)] = name
    return write_json(directory / "manifest.json", {"r0": velocity.r0, "modes": modes})
