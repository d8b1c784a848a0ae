"""File formats: density matrices, count tables, and plot-ready grids.

All structured artifacts are JSON with a mandatory ``format`` name and
``version`` field, sorted keys, and full-precision floats, so identical
inputs serialize byte-identically.  Density-matrix real parts additionally
export as a flat CSV grid for plotting.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .states import DensityMatrix
from .tomography import OUTCOMES, CountTable, tomography_settings

FORMAT_VERSION = 1
DENSITY_FORMAT = "entswap.density_matrix"
COUNTS_FORMAT = "entswap.count_table"

_BASIS_LABELS_2 = ("hh", "hv", "vh", "vv")


class FormatError(ValueError):
    """Raised when an artifact file is malformed; message carries context."""


def write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text)


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc


def _require(payload: dict, field: str, path) -> object:
    if field not in payload:
        raise FormatError(f"{path}: missing field {field!r}")
    return payload[field]


def _check_format(payload: dict, expected: str, path) -> None:
    fmt = _require(payload, "format", path)
    if fmt != expected:
        raise FormatError(f"{path}: format is {fmt!r}, expected {expected!r}")
    version = _require(payload, "version", path)
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version!r}")


def export_density_matrix(rho: DensityMatrix, path) -> None:
    """Write a density matrix as row-major (re, im) pairs at full precision."""
    entries = [[[float(z.real), float(z.imag)] for z in row] for row in rho.mat]
    write_json(
        path,
        {
            "format": DENSITY_FORMAT,
            "version": FORMAT_VERSION,
            "n_photons": rho.n_photons,
            "entries": entries,
        },
    )


def import_density_matrix(path) -> DensityMatrix:
    payload = _load_json(path)
    _check_format(payload, DENSITY_FORMAT, path)
    n = _require(payload, "n_photons", path)
    entries = _require(payload, "entries", path)
    dim = 2 ** int(n)
    if len(entries) != dim or any(len(row) != dim for row in entries):
        raise FormatError(f"{path}: entries are not a {dim}x{dim} grid")
    try:
        mat = np.array([[complex(re, im) for re, im in row] for row in entries])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: entries must be (re, im) pairs: {exc}") from exc
    try:
        return DensityMatrix(mat)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def export_count_table(table: CountTable, path) -> None:
    table.validate()
    settings = []
    for setting in tomography_settings():
        ta, ph, tb = setting.degrees
        settings.append(
            {
                "id": setting.id,
                "theta_a_deg": ta,
                "phi_deg": ph,
                "theta_b_deg": tb,
                "counts": {o: int(table.counts[(setting.id, o)]) for o in OUTCOMES},
            }
        )
    write_json(
        path,
        {
            "format": COUNTS_FORMAT,
            "version": FORMAT_VERSION,
            "flux_hz": float(table.flux),
            "integration_s": float(table.integration_time),
            "seed": table.seed,
            "conditioning": table.conditioning,
            "settings": settings,
        },
    )


def import_count_table(path) -> CountTable:
    payload = _load_json(path)
    _check_format(payload, COUNTS_FORMAT, path)
    flux = _require(payload, "flux_hz", path)
    integration = _require(payload, "integration_s", path)
    rows = _require(payload, "settings", path)
    counts = {}
    seen = set()
    for row in rows:
        if "id" not in row:
            raise FormatError(f"{path}: settings entry without an 'id' field")
        sid = row["id"]
        cells = row.get("counts")
        if not isinstance(cells, dict):
            raise FormatError(f"{path}: setting {sid} has no counts mapping")
        for outcome in OUTCOMES:
            if outcome not in cells:
                raise FormatError(f"{path}: setting {sid} is missing outcome {outcome!r}")
            value = cells[outcome]
            if not isinstance(value, int) or value < 0:
                raise FormatError(
                    f"{path}: setting {sid} outcome {outcome!r} must be a nonnegative integer"
                )
            counts[(sid, outcome)] = value
        seen.add(sid)
    expected_ids = {s.id for s in tomography_settings()}
    missing = sorted(expected_ids - seen)
    if missing:
        raise FormatError(f"{path}: missing setting {missing[0]}" if len(missing) == 1
                          else f"{path}: missing settings {missing}")
    unknown = sorted(seen - expected_ids)
    if unknown:
        raise FormatError(f"{path}: unknown settings {unknown}")
    table = CountTable(
        counts=counts,
        flux=float(flux),
        integration_time=float(integration),
        seed=payload.get("seed"),
        conditioning=payload.get("conditioning"),
    )
    try:
        table.validate()
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return table


def export_real_part_grid(rho: DensityMatrix, path) -> None:
    """CSV of the density-matrix real parts as a labeled 4x4 grid."""
    if rho.n_photons != 2:
        raise ValueError("grid export expects a 2-photon state")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["", *_BASIS_LABELS_2])
        for label, row in zip(_BASIS_LABELS_2, rho.mat):
            writer.writerow([label, *(repr(float(z.real)) for z in row)])
