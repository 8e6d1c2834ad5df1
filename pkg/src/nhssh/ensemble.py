"""Disorder averaging at one parameter point and sweeps over two-parameter grids."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import platform
import struct
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy
from threadpoolctl import threadpool_limits

from . import __version__
from .lattice import Boundary, ModelSpec, build_hamiltonian, clean_realization, sample_disorder, working_frame
from .observables import WindingConfig, density_profile, ipr, spectral_observables, winding_number
from .spectral import DEFAULT_TOL, SpectralError, chiral_branches, decompose

log = logging.getLogger(__name__)

AXIS_NAMES = ("gamma", "Gamma", "t", "t_prime", "t_double_prime", "sigma_gamma", "W", "W1", "W2")
LINK_RATIOS = (0.0, 0.25, 0.5, 1.0)
EDGE_ISOLATION = 0.1


@dataclass(frozen=True)
class EnsembleConfig:
    n_realizations: int = 200
    master_seed: int = 20200101
    n_exclude: int = 2
    tolerance: float = DEFAULT_TOL
    max_rejects: int = 20
    # None: strict smallest-|E| exclusion; float: only pairs split off in energy
    isolation: float | None = EDGE_ISOLATION
    periodic: bool = True

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.max_rejects < 0:
            raise ValueError("max_rejects must be >= 0")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")


@dataclass(frozen=True)
class SweepGrid:
    """Two named axes over a base spec. Axis ``W`` sets W1 = W1_ratio W, W2 = W2_ratio W."""

    axis1: str
    values1: tuple[float, ...]
    axis2: str
    values2: tuple[float, ...]
    base_spec: ModelSpec = field(default_factory=ModelSpec)
    W1_ratio: float = 1.0
    W2_ratio: float = 0.0

    def __post_init__(self):
        for name in (self.axis1, self.axis2):
            if name not in AXIS_NAMES:
                raise ValueError(f"unknown axis {name!r}; choose from {', '.join(AXIS_NAMES)}")
        if self.axis1 == self.axis2:
            raise ValueError("axes must differ")
        object.__setattr__(self, "values1", tuple(float(v) for v in self.values1))
        object.__setattr__(self, "values2", tuple(float(v) for v in self.values2))
        for v in self.values1 + self.values2:
            if not math.isfinite(v):
                raise ValueError("axis values must be finite")
        if not self.values1 or not self.values2:
            raise ValueError("axes must be non-empty")
        if self.W1_ratio not in (0.0, 1.0) or self.W2_ratio not in LINK_RATIOS:
            raise ValueError(f"W1_ratio must be 0 or 1 and W2_ratio one of {LINK_RATIOS}")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.values1), len(self.values2)

    def points(self):
        """(flat index, axis1 value, axis2 value) in axis-major order."""
        n2 = len(self.values2)
        for i, v1 in enumerate(self.values1):
            for j, v2 in enumerate(self.values2):
                yield i * n2 + j, v1, v2

    def spec_at(self, v1: float, v2: float) -> ModelSpec:
        changes = {}
        for name, value in ((self.axis1, v1), (self.axis2, v2)):
            if name == "W":
                changes["W1"] = self.W1_ratio * value
                changes["W2"] = self.W2_ratio * value
            else:
                changes[name] = value
        return self.base_spec.with_(**changes)

    def to_dict(self) -> dict:
        return {
            "axis1": {"name": self.axis1, "values": list(self.values1)},
            "axis2": {"name": self.axis2, "values": list(self.values2)},
            "W1_ratio": self.W1_ratio,
            "W2_ratio": self.W2_ratio,
            "base_spec": self.base_spec.to_dict(),
        }


@dataclass
class PointRecord:
    index: int
    axis1: float
    axis2: float
    nu_mean: float
    nu_stderr: float
    ipr_avg_obc: float
    ipr_avg_pbc: float
    ipr_mid: float
    gap_mean: float
    e_mid: list[complex]
    max_abs_imag: float
    rejects: int
    failed: bool
    n_realizations: int
    density_mid: list[float] | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["e_mid"] = [[z.real, z.imag] for z in self.e_mid]
        if self.density_mid is None:
            del out["density_mid"]
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()}

    @classmethod
    def from_dict(cls, data: dict) -> PointRecord:
        data = dict(data)
        data["e_mid"] = [complex(_num(re), _num(im)) for re, im in data["e_mid"]]
        for key in ("axis1", "axis2", "nu_mean", "nu_stderr", "ipr_avg_obc", "ipr_avg_pbc", "ipr_mid",
                    "gap_mean", "max_abs_imag"):
            data[key] = _num(data[key])
        return cls(**data)


def _num(value) -> float:
    return math.nan if value is None else float(value)


@dataclass
class PhaseDiagramResult:
    grid: SweepGrid
    records: list[PointRecord]
    manifest: dict

    def table(self, attr: str) -> np.ndarray:
        """Grid-shaped array of one record attribute."""
        values = np.array([getattr(r, attr) for r in self.records], dtype=float)
        return values.reshape(self.grid.shape)


def derive_seed(master_seed: int, point_index: int, realization_index: int, reject_count: int = 0) -> int:
    """64-bit seed from a keyed BLAKE2b hash of the four non-negative inputs."""
    for value in (master_seed, point_index, realization_index, reject_count):
        if value < 0:
            raise ValueError("seed inputs must be non-negative")
    payload = struct.pack("<4Q", master_seed % 2**64, point_index, realization_index, reject_count)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8, person=b"nhssh-seed").digest(), "little")


def _failed_record(index, v1, v2, rejects, n_real) -> PointRecord:
    nan = math.nan
    return PointRecord(index, v1, v2, nan, nan, nan, nan, nan, nan, [complex(nan, nan)] * 4, nan,
                       rejects, True, n_real)


def run_point(
    spec: ModelSpec,
    cfg: EnsembleConfig,
    winding: WindingConfig,
    point_index: int = 0,
    *,
    axis_values: tuple[float, float] = (math.nan, math.nan),
    collect_density: bool = False,
) -> PointRecord:
    """Disorder-average every observable at one parameter point.

    The winding number, mid-spectrum energies, gap and IPRs come from the
    open chain; when ``cfg.periodic`` is set the same realization is also
    built with periodic boundaries for the spectrum-averaged IPR. A clean
    spec is evaluated once, since every realization is identical.
    """
    open_spec = spec.with_(boundary=Boundary.OPEN)
    periodic_spec = spec.with_(boundary=Boundary.PERIODIC)
    if winding.n_sites != spec.n_sites:
        raise ValueError(f"winding config is for {winding.n_sites} sites, spec has {spec.n_sites}")
    n_real = cfg.n_realizations
    n_eval = 1 if spec.is_clean else n_real
    half = spec.n_sites // 2

    nus, ipr_obc, ipr_pbc, ipr_mid, gaps, mids, imag = [], [], [], [], [], [], []
    density = np.zeros(spec.n_sites) if collect_density else None
    rejects = 0
    for s in range(n_eval):
        tries = 0
        while True:
            if spec.is_clean:
                real = clean_realization(spec)
            else:
                real = sample_disorder(spec, derive_seed(cfg.master_seed, point_index, s, tries))
            try:
                frame = working_frame(open_spec, build_hamiltonian(open_spec, real))
                D = decompose(frame.hamiltonian, cfg.tolerance)
                B = chiral_branches(D, cfg.n_exclude, isolation=cfg.isolation)
                nu = winding_number(D, B, frame.chiral, winding)
                if cfg.periodic:
                    pframe = working_frame(periodic_spec, build_hamiltonian(periodic_spec, real))
                    Dp = decompose(pframe.hamiltonian, biorthogonal=False).in_frame(pframe.to_sites)
            except (SpectralError, np.linalg.LinAlgError) as exc:
                rejects += 1
                tries += 1
                log.info("point %d realization %d rejected: %s", point_index, s, exc)
                if rejects > cfg.max_rejects or spec.is_clean:
                    return _failed_record(point_index, *axis_values, rejects, n_real)
                continue
            break
        D_sites = D.in_frame(frame.to_sites)
        per_state = ipr(D_sites)
        mid = spectral_observables(D, B)
        nus.append(nu)
        ipr_obc.append(float(np.mean(per_state)))
        ipr_mid.append(float(per_state[half - 1]))
        gaps.append(mid.numeric_gap)
        mids.append(mid.mid_energies)
        imag.append(float(np.max(np.abs(D.eigenvalues.imag))))
        ipr_pbc.append(ipr(Dp, "average") if cfg.periodic else math.nan)
        if collect_density:
            density += density_profile(D_sites, half - 1)

    nu_arr = np.array(nus)
    if spec.is_clean:
        # every realization is identical: the average is the single shot
        stderr = 0.0
    elif n_real > 1:
        stderr = float(np.std(nu_arr, ddof=1) / math.sqrt(n_real))
    else:
        stderr = math.nan
    return PointRecord(
        index=point_index,
        axis1=axis_values[0],
        axis2=axis_values[1],
        nu_mean=float(np.mean(nu_arr)),
        nu_stderr=stderr,
        ipr_avg_obc=float(np.mean(ipr_obc)),
        ipr_avg_pbc=float(np.mean(ipr_pbc)),
        ipr_mid=float(np.mean(ipr_mid)),
        gap_mean=float(np.mean(gaps)),
        e_mid=[complex(z) for z in np.mean(np.array(mids), axis=0)],
        max_abs_imag=max(imag),
        rejects=rejects,
        failed=False,
        n_realizations=n_real,
        density_mid=list(density / n_eval) if collect_density else None,
    )


WindingRule = Callable[[ModelSpec], WindingConfig]


def _as_rule(winding: WindingConfig | WindingRule) -> WindingRule:
    if isinstance(winding, WindingConfig):
        return lambda spec: winding
    return winding


def _point_task(args) -> PointRecord:
    grid, cfg, winding, index, v1, v2 = args
    with threadpool_limits(1):
        return run_point(grid.spec_at(v1, v2), cfg, winding, index, axis_values=(v1, v2))


def fingerprint(grid: SweepGrid, cfg: EnsembleConfig, windings: Sequence[WindingConfig]) -> str:
    payload = json.dumps(
        {"grid": grid.to_dict(), "ensemble": asdict(cfg), "winding": [asdict(w) for w in windings]},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def read_checkpoint(path: Path, expected_fingerprint: str) -> dict[int, PointRecord]:
    """Completed records keyed by point index; a torn final line is ignored."""
    done: dict[int, PointRecord] = {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        return done
    header = json.loads(lines[0])
    if header.get("fingerprint") != expected_fingerprint:
        raise ValueError(f"checkpoint {path} belongs to a different run configuration")
    for line in lines[1:]:
        try:
            rec = PointRecord.from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, TypeError):
            log.warning("ignoring incomplete checkpoint line in %s", path)
            continue
        done[rec.index] = rec
    return done


def run_sweep(
    grid: SweepGrid,
    cfg: EnsembleConfig,
    winding: WindingConfig | WindingRule,
    *,
    threads: int = 1,
    checkpoint: str | os.PathLike | None = None,
    resume: bool = False,
) -> PhaseDiagramResult:
    """Evaluate ``run_point`` over the whole grid.

    Every point draws its disorder from ``derive_seed(master, point_index, ...)``
    and BLAS runs single-threaded inside each task, so results do not depend
    on ``threads`` or on evaluation order. With ``checkpoint`` each finished
    point is appended as one JSON line; ``resume`` skips points already there.
    """
    start = time.time()
    rule = _as_rule(winding)
    points = list(grid.points())
    windings = [rule(grid.spec_at(v1, v2)) for _, v1, v2 in points]
    fp = fingerprint(grid, cfg, windings)

    done: dict[int, PointRecord] = {}
    ckpt = None
    if checkpoint is not None:
        path = Path(checkpoint)
        path.parent.mkdir(parents=True, exist_ok=True)
        if resume and path.exists():
            done = read_checkpoint(path, fp)
            ckpt = open(path, "a", encoding="utf-8")
            if path.stat().st_size and not path.read_bytes().endswith(b"\n"):
                ckpt.write("\n")
        else:
            ckpt = open(path, "w", encoding="utf-8")
            ckpt.write(json.dumps({"kind": "header", "fingerprint": fp}) + "\n")
            ckpt.flush()

    todo = [(grid, cfg, windings[i], i, v1, v2) for i, v1, v2 in points if i not in done]
    log.info("sweep: %d points, %d already done", len(points), len(done))

    def commit(rec: PointRecord):
        done[rec.index] = rec
        if ckpt is not None:
            ckpt.write(json.dumps(rec.to_dict()) + "\n")
            ckpt.flush()

    try:
        if threads <= 1 or len(todo) <= 1:
            for task in todo:
                commit(_point_task(task))
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(_point_task, task) for task in todo]
                for fut in as_completed(futures):
                    commit(fut.result())
    finally:
        if ckpt is not None:
            ckpt.close()

    records = [done[i] for i, _, _ in points]
    manifest = {
        "master_seed": cfg.master_seed,
        "grid": grid.to_dict(),
        "ensemble": asdict(cfg),
        "winding": [asdict(w) for w in windings[:1]],
        "fingerprint": fp,
        "versions": {
            "nhssh": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "threads": threads,
        "resumed_points": len(points) - len(todo),
        "wall_time_s": time.time() - start,
    }
    return PhaseDiagramResult(grid, records, manifest)
