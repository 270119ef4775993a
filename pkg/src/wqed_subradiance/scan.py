"""Parameter sweeps behind the command-line interface.

A scan is described by a YAML file (key-value sections); every mode expands
into independent grid cells whose results are assembled in grid order, so
output files are byte-identical for any worker count.  Data files carry no
timestamps; run metadata lives in a separate manifest.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .correlations import correlation_matrix, dimerization_score
from .driven import DriveConfig, incoherent_spectrum, resonance_grid
from .errors import ConfigError, DomainError, NumericalError
from .hosvd import hosvd, to_symmetric_tensor
from .lattice import ArrayConfig, enumerate_sector
from .serialize import fmt_float, rows_to_json_payload, write_csv, write_json
from .spectrum import diagonalize, min_decay_rate

MODES = (
    "decay-map",
    "decay-vs-k",
    "size-map",
    "hosvd-analyze",
    "entropy-map",
    "correlations",
    "driven-map",
    "driven-spectrum",
)
_DRIVEN_MODES = ("driven-map", "driven-spectrum")


@dataclass
class ScanSpec:
    mode: str
    n_atoms: int | None
    gamma_1d: float
    d_values: list[float]
    n_values: list[int]
    k_values: list[int]
    powers: list[float]
    detuning: dict | None
    phase_on_drive: bool
    amplitude_scale: float
    out_dir: Path
    fmt: str = "csv"
    workers: int = 1
    seed: int | None = None
    raw_config: dict = field(default_factory=dict)


@dataclass
class CellStatus:
    index: int
    params: dict
    status: str  # ok | skipped | error
    error: str | None = None


@dataclass
class RunManifest:
    mode: str
    version: str
    workers: int
    wall_time_s: float
    config: dict
    outputs: list[str]
    cells: list[CellStatus]
    success: bool


# ---------------------------------------------------------------- validation


def _expect(mapping, key, kind, location, default=None, required=False):
    if key not in mapping or mapping[key] is None:
        if required:
            raise ConfigError("missing required key", location=f"{location}.{key}")
        return default
    value = mapping[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigError("expected an integer", location=f"{location}.{key}")
    if not isinstance(value, kind):
        raise ConfigError(
            f"expected {kind.__name__}, got {type(value).__name__}",
            location=f"{location}.{key}",
        )
    return value


def _number_list(mapping, key, location, integer=False, required=False):
    if key not in mapping or mapping[key] is None:
        if required:
            raise ConfigError("missing required grid", location=f"{location}.{key}")
        return []
    value = mapping[key]
    if isinstance(value, dict):
        start = _expect(value, "start", float, f"{location}.{key}", required=True)
        stop = _expect(value, "stop", float, f"{location}.{key}", required=True)
        count = _expect(value, "count", int, f"{location}.{key}", required=True)
        if count < 1:
            raise ConfigError("count must be >= 1", location=f"{location}.{key}.count")
        values = np.linspace(start, stop, count).tolist()
    elif isinstance(value, list):
        values = value
    else:
        values = [value]
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError("expected a number", location=f"{location}.{key}[{i}]")
        out.append(int(v) if integer else float(v))
    if not out:
        raise ConfigError("grid must not be empty", location=f"{location}.{key}")
    return out


def parse_config_dict(data: dict, source: str = "config") -> ScanSpec:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", location=source)
    mode = _expect(data, "mode", str, source, required=True)
    if mode not in MODES:
        raise ConfigError(
            f"unknown mode {mode!r}; allowed modes: {', '.join(MODES)}", location="mode"
        )
    array = data.get("array", {})
    if not isinstance(array, dict):
        raise ConfigError("expected a mapping", location="array")
    n_atoms = _expect(array, "n_atoms", int, "array", required=(mode != "size-map"))
    gamma_1d = _expect(array, "gamma_1d", float, "array", default=1.0)
    if gamma_1d <= 0:
        raise ConfigError("gamma_1d must be positive", location="array.gamma_1d")

    grid = data.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("expected a mapping", location="grid")
    d_values = _number_list(grid, "d_over_lambda", "grid", required=True)
    for i, d in enumerate(d_values):
        if d < 0:
            raise ConfigError("d/lambda0 must be >= 0", location=f"grid.d_over_lambda[{i}]")
    single_d_modes = ("decay-vs-k", "size-map", "hosvd-analyze", "correlations", "driven-spectrum")
    if mode in single_d_modes and len(d_values) != 1:
        raise ConfigError(
            f"mode {mode} needs exactly one d_over_lambda value", location="grid.d_over_lambda"
        )

    k_required = mode in ("decay-map", "decay-vs-k", "size-map", "hosvd-analyze", "entropy-map", "correlations")
    k_values = _number_list(grid, "k", "grid", integer=True, required=k_required)
    n_values = _number_list(grid, "n_atoms", "grid", integer=True, required=(mode == "size-map"))
    if mode != "size-map":
        n_values = [n_atoms] if n_atoms else []
    for i, k in enumerate(k_values):
        if k < 1:
            raise ConfigError("k must be >= 1", location=f"grid.k[{i}]")
        if mode != "size-map" and n_atoms is not None and k > n_atoms:
            raise ConfigError(
                f"k={k} exceeds n_atoms={n_atoms}", location=f"grid.k[{i}]"
            )
    if mode == "size-map" and k_values and n_values and min(n_values) < 1:
        raise ConfigError("n_atoms must be >= 1", location="grid.n_atoms")

    drive = data.get("drive", {})
    if not isinstance(drive, dict):
        raise ConfigError("expected a mapping", location="drive")
    powers = _number_list(drive, "power", "drive", required=(mode in _DRIVEN_MODES))
    for i, p in enumerate(powers):
        if p < 0:
            raise ConfigError("power must be >= 0", location=f"drive.power[{i}]")
    detuning = None
    if mode in _DRIVEN_MODES:
        detuning = drive.get("detuning")
        if not isinstance(detuning, (dict, list)):
            raise ConfigError(
                "missing detuning grid (list or {start, stop, count} or "
                "{start, stop, coarse, refine_points, refine_span})",
                location="drive.detuning",
            )
        if n_atoms is not None and n_atoms > 5:
            raise ConfigError("driven modes need n_atoms <= 5", location="array.n_atoms")
    phase_on_drive = _expect(drive, "phase_on_drive", bool, "drive", default=True)
    amplitude_scale = _expect(drive, "amplitude_scale", float, "drive", default=1.0)

    output = data.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("expected a mapping", location="output")
    out_dir = Path(_expect(output, "directory", str, "output", default="out"))
    fmt = _expect(output, "format", str, "output", default="csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'", location="output.format")
    workers = _expect(data, "workers", int, source, default=1)
    if workers < 1:
        raise ConfigError("workers must be >= 1", location="workers")
    seed = _expect(data, "seed", int, source, default=None)

    return ScanSpec(
        mode=mode,
        n_atoms=n_atoms,
        gamma_1d=gamma_1d,
        d_values=d_values,
        n_values=n_values,
        k_values=k_values,
        powers=powers,
        detuning=detuning,
        phase_on_drive=phase_on_drive,
        amplitude_scale=amplitude_scale,
        out_dir=out_dir,
        fmt=fmt,
        workers=workers,
        seed=seed,
        raw_config=data,
    )


def validate_config(path) -> ScanSpec:
    """Parse and invariant-check a scan configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("file does not exist", location=str(path))
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"parse error: {exc.problem}", location=where) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse error: {exc}", location=str(path)) from exc
    return parse_config_dict(data, source=str(path))


# ------------------------------------------------------------------ workers
# module-level functions with picklable arguments so process pools can run them


def _cell_min_gamma(args):
    d, n, k, gamma_1d = args
    try:
        if k > n:
            return ("skipped", None)
        value = min_decay_rate(ArrayConfig.from_period(n, d, gamma_1d), k)
        return ("ok", value)
    except (DomainError, NumericalError) as exc:
        return ("error", str(exc))


def _cell_hosvd(args):
    d, n, k, gamma_1d = args
    try:
        config = ArrayConfig.from_period(n, d, gamma_1d)
        state = diagonalize(config, k)[0]
        basis = enumerate_sector(n, k)
        result = hosvd(to_symmetric_tensor(state, basis))
        return ("ok", result.to_json_dict())
    except (DomainError, NumericalError) as exc:
        return ("error", str(exc))


def _cell_entropy(args):
    status, payload = _cell_hosvd(args)
    if status != "ok":
        return (status, payload)
    return ("ok", payload["entropy"])


def _cell_correlations(args):
    d, n, k, gamma_1d = args
    try:
        config = ArrayConfig.from_period(n, d, gamma_1d)
        state = diagonalize(config, k)[0]
        basis = enumerate_sector(n, k)
        corr = correlation_matrix(state, basis)
        rows = list(corr.rows())
        scores = [dimerization_score(corr, offset) for offset in (0, 1)] if n % 2 == 0 else None
        return ("ok", (rows, scores))
    except (DomainError, NumericalError) as exc:
        return ("error", str(exc))


def _build_detuning_grid(spec_detuning, config: ArrayConfig) -> np.ndarray:
    if isinstance(spec_detuning, list):
        return np.array([float(v) for v in spec_detuning])
    keys = set(spec_detuning)
    if "count" in keys:
        return np.linspace(
            float(spec_detuning["start"]), float(spec_detuning["stop"]), int(spec_detuning["count"])
        )
    return resonance_grid(
        config,
        float(spec_detuning["start"]),
        float(spec_detuning["stop"]),
        coarse=int(spec_detuning.get("coarse", 401)),
        refine_points=int(spec_detuning.get("refine_points", 41)),
        refine_span=float(spec_detuning.get("refine_span", 8.0)),
    )


def _cell_driven(args):
    d, n, power, gamma_1d, detuning_spec, phase_on_drive, amplitude_scale, want_spectrum = args
    try:
        config = ArrayConfig.from_period(n, d, gamma_1d)
        grid = _build_detuning_grid(detuning_spec, config)
        drive = DriveConfig(
            power=power,
            detuning_grid=grid,
            phase_on_drive=phase_on_drive,
            amplitude_scale=amplitude_scale,
        )
        spectrum = incoherent_spectrum(config, drive)
        if want_spectrum:
            rows = [
                (
                    float(delta),
                    spectrum.reflection[i].real,
                    spectrum.reflection[i].imag,
                    spectrum.transmission[i].real,
                    spectrum.transmission[i].imag,
                    float(spectrum.incoherent[i]),
                )
                for i, delta in enumerate(spectrum.detunings)
            ]
            return ("ok", rows)
        return ("ok", spectrum.narrowest_fwhm)
    except (DomainError, NumericalError) as exc:
        return ("error", str(exc))


def _map_cells(fn, cells, workers):
    if workers <= 1 or len(cells) <= 1:
        return [fn(cell) for cell in cells]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells, chunksize=1))


# -------------------------------------------------------------------- modes


def _write_table(spec: ScanSpec, stem: str, header: list[str], rows) -> Path:
    rows = list(rows)
    if spec.fmt == "json":
        path = spec.out_dir / f"{stem}.json"
        write_json(path, rows_to_json_payload(header, rows))
    else:
        path = spec.out_dir / f"{stem}.csv"
        write_csv(path, header, rows)
    return path


def _run_decay_like(spec: ScanSpec, stem: str):
    cells = [
        (d, n, k, spec.gamma_1d)
        for d in spec.d_values
        for n in spec.n_values
        for k in spec.k_values
    ]
    results = _map_cells(_cell_min_gamma, cells, spec.workers)
    statuses, rows = [], []
    for i, ((d, n, k, _), (status, payload)) in enumerate(zip(cells, results)):
        statuses.append(
            CellStatus(
                index=i,
                params={"d_over_lambda": d, "n_atoms": n, "k": k},
                status=status,
                error=payload if status == "error" else None,
            )
        )
        if status == "ok":
            rows.append((d, k, n, payload))
    return [_write_table(spec, stem, ["d_over_lambda", "k", "n_atoms", "min_gamma"], rows)], statuses


def _run_hosvd_analyze(spec: ScanSpec):
    d = spec.d_values[0]
    cells = [(d, spec.n_atoms, k, spec.gamma_1d) for k in spec.k_values]
    results = _map_cells(_cell_hosvd, cells, spec.workers)
    outputs, statuses = [], []
    for i, ((_, _, k, _), (status, payload)) in enumerate(zip(cells, results)):
        statuses.append(
            CellStatus(
                index=i,
                params={"d_over_lambda": d, "n_atoms": spec.n_atoms, "k": k},
                status=status,
                error=payload if status == "error" else None,
            )
        )
        if status == "ok":
            path = spec.out_dir / f"hosvd_k{k}.json"
            write_json(path, payload)
            outputs.append(path)
    return outputs, statuses


def _run_entropy_map(spec: ScanSpec):
    cells = [
        (d, spec.n_atoms, k, spec.gamma_1d) for d in spec.d_values for k in spec.k_values
    ]
    results = _map_cells(_cell_entropy, cells, spec.workers)
    statuses, rows = [], []
    for i, ((d, _, k, _), (status, payload)) in enumerate(zip(cells, results)):
        statuses.append(
            CellStatus(
                index=i,
                params={"d_over_lambda": d, "n_atoms": spec.n_atoms, "k": k},
                status=status,
                error=payload if status == "error" else None,
            )
        )
        if status == "ok":
            rows.append((d, k, payload))
    return [_write_table(spec, "entropy_map", ["d_over_lambda", "k", "entropy"], rows)], statuses


def _run_correlations(spec: ScanSpec):
    d = spec.d_values[0]
    cells = [(d, spec.n_atoms, k, spec.gamma_1d) for k in spec.k_values]
    results = _map_cells(_cell_correlations, cells, spec.workers)
    outputs, statuses = [], []
    for i, ((_, _, k, _), (status, payload)) in enumerate(zip(cells, results)):
        params = {"d_over_lambda": d, "n_atoms": spec.n_atoms, "k": k}
        if status == "ok":
            rows, scores = payload
            outputs.append(_write_table(spec, f"correlations_k{k}", ["m", "n", "re", "im"], rows))
            if scores is not None:
                params["dimerization_score"] = float(fmt_float(max(scores)))
        statuses.append(
            CellStatus(
                index=i,
                params=params,
                status=status,
                error=payload if status == "error" else None,
            )
        )
    return outputs, statuses


def _run_driven_map(spec: ScanSpec):
    cells = [
        (
            d,
            spec.n_atoms,
            p,
            spec.gamma_1d,
            spec.detuning,
            spec.phase_on_drive,
            spec.amplitude_scale,
            False,
        )
        for p in spec.powers
        for d in spec.d_values
    ]
    results = _map_cells(_cell_driven, cells, spec.workers)
    statuses, rows = [], []
    for i, ((d, _, p, *_), (status, payload)) in enumerate(zip(cells, results)):
        statuses.append(
            CellStatus(
                index=i,
                params={"power": p, "d_over_lambda": d},
                status=status,
                error=payload if status == "error" else None,
            )
        )
        if status == "ok":
            found = payload is not None
            rows.append((p, d, payload if found else math.nan, found))
    header = ["power", "d_over_lambda", "narrowest_fwhm", "found"]
    return [_write_table(spec, "driven_map", header, rows)], statuses


def _run_driven_spectrum(spec: ScanSpec):
    d = spec.d_values[0]
    cells = [
        (
            d,
            spec.n_atoms,
            p,
            spec.gamma_1d,
            spec.detuning,
            spec.phase_on_drive,
            spec.amplitude_scale,
            True,
        )
        for p in spec.powers
    ]
    results = _map_cells(_cell_driven, cells, spec.workers)
    outputs, statuses = [], []
    header = ["detuning", "re_r", "im_r", "re_t", "im_t", "incoherent"]
    for i, ((_, _, p, *_), (status, payload)) in enumerate(zip(cells, results)):
        statuses.append(
            CellStatus(
                index=i,
                params={"power": p, "d_over_lambda": d, "index": i},
                status=status,
                error=payload if status == "error" else None,
            )
        )
        if status == "ok":
            outputs.append(_write_table(spec, f"spectrum_p{i:02d}", header, payload))
    return outputs, statuses


def run_scan(spec: ScanSpec) -> RunManifest:
    """Execute a validated scan; write data files and a run manifest."""
    start = time.perf_counter()
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    runners = {
        "decay-map": lambda: _run_decay_like(spec, "decay_map"),
        "decay-vs-k": lambda: _run_decay_like(spec, "decay_vs_k"),
        "size-map": lambda: _run_decay_like(spec, "size_map"),
        "hosvd-analyze": lambda: _run_hosvd_analyze(spec),
        "entropy-map": lambda: _run_entropy_map(spec),
        "correlations": lambda: _run_correlations(spec),
        "driven-map": lambda: _run_driven_map(spec),
        "driven-spectrum": lambda: _run_driven_spectrum(spec),
    }
    outputs, statuses = runners[spec.mode]()
    wall = time.perf_counter() - start
    success = all(c.status != "error" for c in statuses)
    manifest = RunManifest(
        mode=spec.mode,
        version=__version__,
        workers=spec.workers,
        wall_time_s=wall,
        config=spec.raw_config,
        outputs=[str(p) for p in outputs],
        cells=statuses,
        success=success,
    )
    write_json(
        spec.out_dir / "run_manifest.json",
        {
            "mode": manifest.mode,
            "version": manifest.version,
            "workers": manifest.workers,
            "wall_time_s": manifest.wall_time_s,
            "seed": spec.seed,
            "config": manifest.config,
            "outputs": manifest.outputs,
            "cells": [
                {
                    "index": c.index,
                    "params": c.params,
                    "status": c.status,
                    **({"error": c.error} if c.error else {}),
                }
                for c in manifest.cells
            ],
            "success": manifest.success,
        },
    )
    return manifest
