"""Run configuration files and result serialization (CSV and JSON)."""

from __future__ import annotations

import copy
import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytic import critical_disorder, inverse_localization_length
from .ensemble import EnsembleConfig, PhaseDiagramResult, PointRecord, SweepGrid
from .lattice import ModelError, ModelSpec, Variant
from .observables import WindingConfig

CSV_HEADER = (
    "axis1,axis2,nu_mean,nu_stderr,ipr_avg_obc,ipr_avg_pbc,ipr_mid,gap_mean,"
    "e_mid_re_1,e_mid_re_2,e_mid_re_3,e_mid_re_4,"
    "e_mid_im_1,e_mid_im_2,e_mid_im_3,e_mid_im_4,rejects,failed"
)
LOCLEN_HEADER = "axis1,axis2,inv_loc_length"

_MODEL_KEYS = {
    "variant", "t", "t_prime", "gamma", "nonreciprocal_form", "t_double_prime",
    "sigma_gamma", "Gamma", "W1", "W2", "L",
}
_ENSEMBLE_KEYS = {"n_realizations", "master_seed", "n_exclude", "tolerance", "max_rejects", "isolation", "periodic"}
_WINDING_KEYS = {"l"}
_GRID_KEYS = {"axis1", "axis2", "W1_ratio", "W2_ratio"}
_AXIS_KEYS = {"name", "values", "start", "stop", "num"}
_OUTPUT_KEYS = {"dir", "formats", "checkpoint", "resume", "threads", "loclen"}
_SECTIONS = {
    "model": _MODEL_KEYS,
    "ensemble": _ENSEMBLE_KEYS,
    "winding": _WINDING_KEYS,
    "grid": _GRID_KEYS,
    "output": _OUTPUT_KEYS,
}

# phase diagram defaults: the (gamma, W) plane at L = 100, l = 20, N_s = 200
DEFAULT_L = 100
DEFAULT_GRID = {
    "axis1": {"name": "gamma", "start": 0.0, "stop": 3.5, "num": 15},
    "axis2": {"name": "W", "start": 0.0, "stop": 6.0, "num": 31},
}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"
    formats: tuple[str, ...] = ("csv", "json")
    checkpoint: bool = True
    resume: bool = False
    threads: int = 1
    loclen: bool = True


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    ensemble: EnsembleConfig
    grid: SweepGrid
    winding: WindingConfig
    output: OutputConfig = field(default_factory=OutputConfig)
    document: dict = field(default_factory=dict, compare=False)


def _check_keys(where: str, data, allowed: set[str]) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return data


def _number(where: str, value, *, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite")
    return float(value)


def _axis(where: str, data) -> tuple[str, tuple[float, ...]]:
    data = _check_keys(where, data, _AXIS_KEYS)
    if "name" not in data:
        raise ConfigError(f"{where} needs a name")
    if "values" in data:
        if set(data) & {"start", "stop", "num"}:
            raise ConfigError(f"{where}: give either values or start/stop/num")
        values = data["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{where}.values must be a non-empty array")
        values = tuple(_number(f"{where}.values", v) for v in values)
    else:
        missing = {"start", "stop", "num"} - set(data)
        if missing:
            raise ConfigError(f"{where} needs values or start/stop/num (missing {', '.join(sorted(missing))})")
        num = _number(f"{where}.num", data["num"], integer=True)
        if num < 1:
            raise ConfigError(f"{where}.num must be >= 1")
        start, stop = _number(f"{where}.start", data["start"]), _number(f"{where}.stop", data["stop"])
        # round so that e.g. 0.1 steps come out as the shortest decimals
        values = tuple(float(v) for v in np.round(np.linspace(start, stop, num), 12))
    if list(values) != sorted(values):
        raise ConfigError(f"{where} values must be sorted ascending")
    return str(data["name"]), values


def parse_config(text: str, overrides: dict[str, object] | None = None) -> RunConfig:
    """Parse a JSON run configuration; missing keys take the phase-diagram defaults.

    ``overrides`` maps dotted ``section.key`` names to values applied on top of
    the document (command-line flags). Lengths ``L`` and ``l`` are in sites
    and must be even.
    """
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    _check_keys("config", doc, set(_SECTIONS))
    doc = copy.deepcopy(doc)
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in _SECTIONS or not key:
            raise ConfigError(f"override {dotted!r} must be section.key with section in {sorted(_SECTIONS)}")
        doc.setdefault(section, {})[key] = value
    sections = {name: _check_keys(name, doc.get(name, {}), keys) for name, keys in _SECTIONS.items()}

    model = dict(sections["model"])
    n_sites = _number("model.L", model.pop("L", DEFAULT_L), integer=True)
    if n_sites % 2 or n_sites < 8:
        raise ConfigError(f"model.L = {n_sites} must be an even number of sites >= 8")
    try:
        spec = ModelSpec(n_cells=n_sites // 2, **model)
    except (ModelError, TypeError) as exc:
        raise ConfigError(f"model: {exc}") from None

    ens = dict(sections["ensemble"])
    for key in ("n_realizations", "master_seed", "n_exclude", "max_rejects"):
        if key in ens:
            ens[key] = _number(f"ensemble.{key}", ens[key], integer=True)
    if "isolation" in ens and ens["isolation"] is not None:
        ens["isolation"] = _number("ensemble.isolation", ens["isolation"])
    if "periodic" in ens and not isinstance(ens["periodic"], bool):
        raise ConfigError("ensemble.periodic must be a boolean")
    try:
        ensemble = EnsembleConfig(**ens)
    except ValueError as exc:
        raise ConfigError(f"ensemble: {exc}") from None

    win = sections["winding"]
    if "l" in win:
        l_sites = _number("winding.l", win["l"], integer=True)
        try:
            winding = WindingConfig.from_lengths(n_sites, l_sites)
        except ValueError as exc:
            raise ConfigError(f"winding: {exc}") from None
    else:
        winding = WindingConfig.from_fraction(n_sites, 0.2)

    g = {**DEFAULT_GRID, **sections["grid"]}
    name1, values1 = _axis("grid.axis1", g["axis1"])
    name2, values2 = _axis("grid.axis2", g["axis2"])
    try:
        grid = SweepGrid(
            name1, values1, name2, values2, spec,
            W1_ratio=_number("grid.W1_ratio", g.get("W1_ratio", 1.0)),
            W2_ratio=_number("grid.W2_ratio", g.get("W2_ratio", 0.0)),
        )
        for _, v1, v2 in grid.points():
            grid.spec_at(v1, v2)
    except (ValueError, ModelError) as exc:
        raise ConfigError(f"grid: {exc}") from None

    out = dict(sections["output"])
    if "formats" in out:
        formats = out["formats"]
        if isinstance(formats, str):
            formats = [formats]
        if not formats or any(f not in ("csv", "json") for f in formats):
            raise ConfigError("output.formats must list 'csv' and/or 'json'")
        out["formats"] = tuple(formats)
    for key in ("checkpoint", "resume", "loclen"):
        if key in out and not isinstance(out[key], bool):
            raise ConfigError(f"output.{key} must be a boolean")
    if "threads" in out:
        out["threads"] = _number("output.threads", out["threads"], integer=True)
        if out["threads"] < 1:
            raise ConfigError("output.threads must be >= 1")
    if "dir" in out:
        out["dir"] = str(out["dir"])
    return RunConfig(spec, ensemble, grid, winding, OutputConfig(**out), doc)


def parse_override(item: str) -> tuple[str, object]:
    """``section.key=value`` with the value read as JSON, falling back to a string."""
    key, sep, raw = item.partition("=")
    if not sep:
        raise ConfigError(f"--set expects section.key=value, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _fmt(value: float) -> str:
    return repr(float(value))


def records_csv(records: list[PointRecord]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in records:
        row = [r.axis1, r.axis2, r.nu_mean, r.nu_stderr, r.ipr_avg_obc, r.ipr_avg_pbc, r.ipr_mid, r.gap_mean]
        cells = [_fmt(v) for v in row]
        cells += [_fmt(z.real) for z in r.e_mid] + [_fmt(z.imag) for z in r.e_mid]
        cells += [str(int(r.rejects)), "1" if r.failed else "0"]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def result_json(result: PhaseDiagramResult) -> str:
    body = {"manifest": result.manifest, "records": [r.to_dict() for r in result.records]}
    return json.dumps(_nan_to_null(body), indent=1, allow_nan=False)


def _nan_to_null(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_null(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_nan_to_null(v) for v in obj]
    return obj


def load_result_json(text: str) -> tuple[dict, list[PointRecord]]:
    data = json.loads(text)
    return data["manifest"], [PointRecord.from_dict(r) for r in data["records"]]


def spec_inverse_loclen(spec: ModelSpec) -> float:
    """Analytic zero-energy Lambda^-1 for a nonreciprocal spec; NaN where no Hermitian map exists."""
    if spec.variant is not Variant.NONRECIPROCAL:
        return math.nan
    product = spec.t_prime * (spec.t_prime + spec.nonreciprocal_shift())
    if product <= 0 or spec.t <= 0:
        return math.nan
    return inverse_localization_length(math.sqrt(product), spec.W1, spec.W2, spec.t)


def loclen_csv(grid: SweepGrid) -> str:
    lines = [LOCLEN_HEADER]
    for _, v1, v2 in grid.points():
        lines.append(f"{_fmt(v1)},{_fmt(v2)},{_fmt(spec_inverse_loclen(grid.spec_at(v1, v2)))}")
    return "\n".join(lines) + "\n"


def critical_csv(grid: SweepGrid) -> str | None:
    """Delocalization points W* per gamma when the grid is a (gamma, W) plane with W2 = 0."""
    if {grid.axis1, grid.axis2} != {"gamma", "W"} or grid.W2_ratio != 0 or grid.W1_ratio != 1:
        return None
    spec = grid.base_spec
    if spec.variant is not Variant.NONRECIPROCAL or spec.nonreciprocal_form.value != "linear" or spec.t != 1:
        return None
    gammas = grid.values1 if grid.axis1 == "gamma" else grid.values2
    lines = ["gamma,W_critical"]
    for g in gammas:
        if g <= -1:
            continue
        for root in critical_disorder(spec.t_prime, g):
            lines.append(f"{_fmt(g)},{_fmt(root)}")
    return "\n".join(lines) + "\n"


def emit_results(
    result: PhaseDiagramResult,
    out_dir: str | Path,
    formats: tuple[str, ...] = ("csv", "json"),
    *,
    loclen: bool = True,
    stem: str = "phase",
) -> list[Path]:
    """Write ``<stem>.csv`` / ``<stem>.json`` and, for nonreciprocal grids, the analytic companions."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out / f"{stem}.csv"
        path.write_text(records_csv(result.records), encoding="utf-8")
        written.append(path)
    if "json" in formats:
        path = out / f"{stem}.json"
        path.write_text(result_json(result), encoding="utf-8")
        written.append(path)
    if loclen and result.grid.base_spec.variant is Variant.NONRECIPROCAL:
        path = out / "loclen.csv"
        path.write_text(loclen_csv(result.grid), encoding="utf-8")
        written.append(path)
    return written


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    """Plain CSV with floats in shortest round-trip form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return path
