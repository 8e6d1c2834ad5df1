"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line via conftest.

Tolerances are the pinned values; none are widened. Long-running criteria
share a cache of ensemble points, so the whole file takes roughly ten
minutes on one core.
"""

import functools
import json
import time

import numpy as np
import pytest

from nhssh.analytic import bulk_gap_formula, critical_disorder, mapped_params
from nhssh.cli import main as cli_main
from nhssh.ensemble import EnsembleConfig, run_point
from nhssh.lattice import (
    ModelSpec,
    Variant,
    build_hamiltonian,
    clean_realization,
    sample_disorder,
    similarity_transform,
    working_frame,
)
from nhssh.observables import WindingConfig, winding_number
from nhssh.spectral import chiral_branches, decompose

from conftest import ACCEPTANCE_LINES

MASTER_SEED = 20200101


def report(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"CRITERION {number}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")


@functools.lru_cache(maxsize=None)
def point(spec: ModelSpec, n_real: int, periodic: bool = False, density: bool = False, point_index: int = 0):
    cfg = EnsembleConfig(n_realizations=n_real, master_seed=MASTER_SEED, periodic=periodic)
    return run_point(spec, cfg, WindingConfig.from_fraction(spec.n_sites), point_index, collect_density=density)


def clean_nu(spec: ModelSpec, l_sites: int | None = None) -> float:
    frame = working_frame(spec, build_hamiltonian(spec, clean_realization(spec)))
    d = decompose(frame.hamiltonian)
    b = chiral_branches(d, 2, isolation=0.1)
    cfg = WindingConfig.from_fraction(spec.n_sites) if l_sites is None else WindingConfig.from_lengths(spec.n_sites, l_sites)
    return winding_number(d, b, frame.chiral, cfg)


def nonrec(**kw) -> ModelSpec:
    return ModelSpec(**{"n_cells": 50, **kw})


def test_criterion_01_dimerized_oracle():
    start = time.perf_counter()
    topo = clean_nu(nonrec(t=0.0, t_prime=1.0), 20)
    trivial = clean_nu(nonrec(t=1.0, t_prime=0.0), 20)
    elapsed = time.perf_counter() - start
    ok = abs(topo - 1) < 1e-10 and abs(trivial) < 1e-10 and elapsed < 1.0
    report(1, "dimerized oracle", ok, f"nu={topo!r}, {trivial!r}; {elapsed:.3f}s")
    assert ok


def test_criterion_02_clean_quantization():
    start = time.perf_counter()
    topo = {g: clean_nu(nonrec(t_prime=1.2, gamma=g), 20) for g in (0.0, 1.0, 3.0)}
    trivial = clean_nu(nonrec(t_prime=0.7), 20)
    elapsed = time.perf_counter() - start
    ok = all(abs(v - 1) < 1e-2 for v in topo.values()) and abs(trivial) < 1e-2 and elapsed < 10
    detail = ", ".join(f"gamma={g}: {v:.5f}" for g, v in topo.items()) + f"; t'=0.7: {trivial:.2e}; {elapsed:.2f}s"
    report(2, "clean quantization", ok, detail)
    assert ok


def test_criterion_03_gap_formula():
    devs = {}
    for g in (0.0, 0.5, 1.0, 2.0, 3.0, 3.5):
        spec = nonrec(t_prime=1.2, gamma=g)
        numeric = point(spec, 1).gap_mean
        formula = bulk_gap_formula(spec)
        devs[g] = abs(numeric - formula) / formula
    ok = all(v < 0.02 for v in devs.values())
    report(3, "gap vs mapped-hopping formula within 2%", ok,
           ", ".join(f"gamma={g}: {100 * v:.2f}%" for g, v in devs.items()))
    assert ok


def test_criterion_04_real_spectrum_and_zero_modes():
    imag, mids = {}, {}
    for w in (1.0, 3.0, 5.0):
        rec = point(nonrec(t_prime=1.2, gamma=1.0, W1=w), 20)
        imag[w] = rec.max_abs_imag
        mids[w] = max(abs(rec.e_mid[1]), abs(rec.e_mid[2]))
    ok_real = all(v < 1e-8 for v in imag.values())
    ok_zero = all(mids[w] < 1e-6 for w in (1.0, 3.0))
    detail = f"max|Im E|={max(imag.values()):.1e}; mean mid |E|: " + ", ".join(f"W={w}: {v:.1e}" for w, v in mids.items())
    report(4, "real spectrum and persistent zero modes", ok_real and ok_zero, detail)
    assert ok_real and ok_zero


def test_criterion_05_enhancement():
    nu = {(g, w): point(nonrec(gamma=g, W1=w), 200).nu_mean for g, w in ((0.0, 1.0), (0.0, 4.0), (3.0, 4.0))}
    ok = nu[0.0, 1.0] > 0.9 and nu[0.0, 4.0] < 0.5 and nu[3.0, 4.0] > 0.8
    report(5, "non-Hermitian enhancement", ok, ", ".join(f"nu(gamma={g}, W={w})={v:.3f}" for (g, w), v in nu.items()))
    assert ok


def test_criterion_06_nhtai():
    by_l = {n: point(ModelSpec(t_prime=0.7, gamma=0.6, W1=1.2, n_cells=n // 2), 50).nu_mean for n in (100, 200, 400)}
    clean = point(ModelSpec(t_prime=0.7, gamma=0.6, n_cells=200), 50).nu_mean
    strong = point(ModelSpec(t_prime=0.7, gamma=0.6, W1=5.0, n_cells=200), 50).nu_mean
    values = list(by_l.values())
    ok = by_l[400] > 0.85 and all(np.diff(values) > 0) and clean < 0.1 and strong < 0.3
    detail = ", ".join(f"L={n}: {v:.3f}" for n, v in by_l.items()) + f"; W=0: {clean:.2e}; W=5: {strong:.3f}"
    report(6, "disorder-induced topological phase", ok, detail)
    assert ok


def test_criterion_07_similarity_consistency():
    rng = np.random.default_rng(MASTER_SEED)
    worst_spec = worst_herm = 0.0
    for k in range(10):
        spec = nonrec(gamma=float(rng.uniform(0.05, 3.0)), W1=float(rng.uniform(0.0, 3.0)))
        h = build_hamiltonian(spec, sample_disorder(spec, k))
        ht = similarity_transform(h, spec.gamma).entries
        worst_herm = max(worst_herm, float(np.max(np.abs(ht - ht.conj().T))))
        e_h = decompose(h).eigenvalues
        e_t = np.sort(np.linalg.eigvalsh(ht))
        worst_spec = max(worst_spec, float(np.max(np.abs(e_h - e_t))))
    ok = worst_spec < 1e-8 and worst_herm < 1e-10
    report(7, "similarity consistency", ok, f"spectrum {worst_spec:.1e}, hermiticity {worst_herm:.1e}")
    assert ok


def crossings(ws, nus, level=0.5):
    out = []
    for (w0, n0), (w1, n1) in zip(zip(ws, nus), zip(ws[1:], nus[1:])):
        if (n0 - level) * (n1 - level) < 0:
            out.append(w0 + (level - n0) * (w1 - w0) / (n1 - n0))
    return out


def test_criterion_08_transition_matches_localization():
    ws = [round(0.2 * k, 10) for k in range(17)]
    worst, parts, ok = 0.0, [], True
    for g in (0.2, 0.6, 1.0):
        nus = [point(ModelSpec(t_prime=0.7, gamma=g, W1=w, n_cells=200), 50).nu_mean for w in ws]
        cross = crossings(ws, nus)
        roots = critical_disorder(0.7, g)
        for r in roots:
            dist = min((abs(r - c) for c in cross), default=np.inf)
            worst = max(worst, dist)
            ok = ok and dist <= 0.3
        parts.append(f"gamma={g}: W*={[round(r, 3) for r in roots]}, crossings={[round(c, 3) for c in cross]}")
    report(8, "delocalization points match the transition", ok, f"max distance {worst:.3f}; " + "; ".join(parts))
    assert ok


def test_criterion_09_skin_effect_and_ipr():
    ws = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    recs = {w: point(ModelSpec(t_prime=0.7, gamma=0.6, W1=w, n_cells=200), 50, periodic=True) for w in ws + [2.0]}
    obc = [recs[w].ipr_avg_obc for w in ws]
    ratio = recs[0.0].ipr_avg_obc / recs[0.0].ipr_avg_pbc
    interior_min = any(obc[i] < obc[i - 1] and obc[i] < obc[i + 1] for i in range(1, len(obc) - 1))
    rel2 = abs(recs[2.0].ipr_avg_obc - recs[2.0].ipr_avg_pbc) / recs[2.0].ipr_avg_pbc
    ok = ratio > 5 and interior_min and rel2 < 0.1
    detail = f"OBC/PBC at W=0: {ratio:.1f}; OBC IPR {[round(v, 4) for v in obc]}; W=2 rel diff {rel2:.3f}"
    report(9, "skin effect and non-monotonic IPR", ok, detail)
    assert ok


def test_criterion_10_gain_loss():
    imag = 0.0
    for tp in (0.5, 0.8, 1.2):
        for gamma_gl in (-1.9, -1.0, 0.5, 1.0, 1.5, 1.9):
            spec = ModelSpec(variant=Variant.GAIN_LOSS, t_prime=tp, Gamma=gamma_gl, n_cells=12)
            frame = working_frame(spec, build_hamiltonian(spec, clean_realization(spec)))
            imag = max(imag, float(np.max(np.abs(decompose(frame.hamiltonian).eigenvalues.imag))))
    phase = {}
    for tp, gamma_gl in ((0.8, 1.5), (1.2, 0.5), (0.5, 0.5)):
        spec = ModelSpec(variant=Variant.GAIN_LOSS, t_prime=tp, Gamma=gamma_gl, n_cells=12)
        expected = 1.0 if tp > mapped_params(spec).t_intra_eff else 0.0
        phase[tp, gamma_gl] = (clean_nu(spec), expected)
    disordered = point(ModelSpec(variant=Variant.GAIN_LOSS, t_prime=1.0, Gamma=1.0, W1=1.0), 200).nu_mean
    ok_phase = all(abs(v - e) < 1e-2 for v, e in phase.values())
    ok = imag < 1e-8 and ok_phase and disordered > 0.8
    detail = (f"max|Im E|={imag:.1e}; L=24 nu: "
              + ", ".join(f"(t'={tp}, G={g}) {v:.3f} vs {e:.0f}" for (tp, g), (v, e) in phase.items())
              + f"; disordered nu={disordered:.3f}")
    report(10, "gain/loss chain", ok, detail)
    assert ok


def test_criterion_11_random_nonreciprocity():
    nu = point(ModelSpec(variant=Variant.RANDOM_GAMMA, t_prime=0.7, sigma_gamma=1.5, W1=1.0), 200).nu_mean
    rec = point(ModelSpec(variant=Variant.RANDOM_GAMMA, t_prime=0.7, sigma_gamma=1.0), 200, density=True)
    peak = max(rec.density_mid)
    ok = nu > 0.7 and peak < 5 / 100
    report(11, "random non-reciprocity", ok, f"nu(sigma=1.5, W=1)={nu:.3f}; mid-state peak weight {peak:.4f} vs 0.05")
    assert ok


def test_criterion_12_determinism_and_resume(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "model": {"L": 40},
        "ensemble": {"n_realizations": 8},
        "grid": {"axis1": {"name": "gamma", "values": [0.0, 1.0]},
                 "axis2": {"name": "W", "values": [0.0, 1.0, 2.0, 3.0]}},
    }))
    full, part, wide = tmp_path / "full", tmp_path / "part", tmp_path / "wide"
    assert cli_main(["sweep", "--config", str(cfg), "--out", str(full)]) == 0
    lines = (full / "checkpoint.jsonl").read_text().splitlines()
    part.mkdir()
    # state after an interruption half way through the 8-point grid
    (part / "checkpoint.jsonl").write_text("\n".join(lines[:5]) + "\n")
    assert cli_main(["sweep", "--config", str(cfg), "--out", str(part), "--resume"]) == 0
    assert cli_main(["sweep", "--config", str(cfg), "--out", str(wide), "--threads", "8"]) == 0
    csv_full = (full / "phase.csv").read_bytes()
    same_resume = csv_full == (part / "phase.csv").read_bytes()
    same_threads = csv_full == (wide / "phase.csv").read_bytes()
    ok = same_resume and same_threads
    report(12, "determinism and resume", ok, f"resume identical={same_resume}, 1 vs 8 threads identical={same_threads}")
    assert ok


@pytest.fixture(autouse=True, scope="module")
def _clear_cache():
    yield
    point.cache_clear()
