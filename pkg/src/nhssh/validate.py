"""Fast invariant checks across every module, used by ``nhssh validate``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytic, ensemble
from .lattice import (
    Boundary,
    ModelSpec,
    Variant,
    build_hamiltonian,
    chiral_operator,
    clean_realization,
    gainloss_rotation,
    sample_disorder,
    similarity_transform,
    verify_symmetry,
)
from .observables import WindingConfig, ipr, winding_number
from .spectral import canonical_order, chiral_branches, decompose

SYMMETRY_TOL = 1e-12
SPECTRUM_TOL = 1e-8
ORACLE_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _chiral_symmetry() -> str:
    worst = 0.0
    specs = [
        ModelSpec(gamma=0.7, W1=2.0, W2=0.5),
        ModelSpec(variant=Variant.MODIFIED, t_double_prime=0.3, W1=1.0),
        ModelSpec(variant=Variant.RANDOM_GAMMA, sigma_gamma=1.0, W1=1.0),
        ModelSpec(variant=Variant.GAIN_LOSS, Gamma=0.8, W1=1.0, W2=0.3),
    ]
    for spec in specs:
        for boundary in Boundary:
            s = spec.with_(boundary=boundary, n_cells=12)
            h = build_hamiltonian(s, sample_disorder(s, 7))
            worst = max(worst, verify_symmetry(h, chiral_operator(s)))
    assert worst < SYMMETRY_TOL, f"residual {worst:.2e}"
    return f"max residual {worst:.1e}"


def _pt_symmetry() -> str:
    s = ModelSpec(variant=Variant.GAIN_LOSS, Gamma=1.3, W1=0.5, W2=0.5, n_cells=12)
    res = verify_symmetry(build_hamiltonian(s, sample_disorder(s, 3)), chiral_operator(s), "pt")
    assert res < SYMMETRY_TOL, f"residual {res:.2e}"
    return f"residual {res:.1e}"


def _dimerized_oracle() -> str:
    values = []
    for t, tp, expected in ((0.0, 1.0, 1.0), (1.0, 0.0, 0.0)):
        spec = ModelSpec(t=t, t_prime=tp, n_cells=50)
        d = decompose(build_hamiltonian(spec, clean_realization(spec)))
        nu = winding_number(d, chiral_branches(d, 2), chiral_operator(spec), WindingConfig.from_lengths(100, 20))
        assert abs(nu - expected) < ORACLE_TOL, f"nu = {nu} for t={t}, t'={tp}"
        values.append(nu)
    return f"nu = {values[0]:.12f}, {values[1]:.12f}"


def _similarity() -> str:
    rng = np.random.default_rng(11)
    worst_spec, worst_herm = 0.0, 0.0
    for k in range(5):
        spec = ModelSpec(gamma=float(rng.uniform(0.1, 2.0)), W1=float(rng.uniform(0, 3)), n_cells=20)
        h = build_hamiltonian(spec, sample_disorder(spec, k))
        ht = similarity_transform(h, spec.gamma)
        e1 = decompose(h).eigenvalues
        e2 = np.sort(np.linalg.eigvalsh(ht.entries))
        worst_spec = max(worst_spec, float(np.max(np.abs(e1 - e2))))
        worst_herm = max(worst_herm, float(np.max(np.abs(ht.entries - ht.entries.conj().T))))
    assert worst_spec < SPECTRUM_TOL and worst_herm < ORACLE_TOL, f"{worst_spec:.2e}, {worst_herm:.2e}"
    return f"spectrum {worst_spec:.1e}, hermiticity {worst_herm:.1e}"


def _gainloss_rotation() -> str:
    spec = ModelSpec(variant=Variant.GAIN_LOSS, Gamma=0.6, t_prime=0.9, n_cells=6)
    rotated = gainloss_rotation(build_hamiltonian(spec, clean_realization(spec))).entries
    intra = {complex(rotated[0, 1]), complex(rotated[1, 0])}
    expected = {complex(spec.t + spec.Gamma / 2), complex(spec.t - spec.Gamma / 2)}
    ok = all(min(abs(a - b) for b in expected) < SYMMETRY_TOL for a in intra)
    assert ok, f"intracell hoppings {intra}"
    return "intracell t +/- Gamma/2"


def _biorthogonality() -> str:
    spec = ModelSpec(gamma=3.0, W1=2.0, n_cells=100)
    d = decompose(build_hamiltonian(spec, sample_disorder(spec, 5)))
    assert d.biorth_residual < SPECTRUM_TOL, f"residual {d.biorth_residual:.2e}"
    right_norms = np.linalg.norm(d.right_vectors, axis=0)
    assert np.allclose(right_norms, 1.0), "right vectors not normalized"
    return f"residual {d.biorth_residual:.1e}, condition {d.condition:.1e}"


def _canonical_sort() -> str:
    e = np.array([1 + 1j, -1, 1 - 1j, 0.5, -1])
    order = canonical_order(e)
    assert list(order) == [1, 4, 3, 2, 0], f"order {list(order)}"
    return "ascending Re, then Im, then index"


def _ipr_limits() -> str:
    spec = ModelSpec(t=0.0, t_prime=1.0, n_cells=20)
    d = decompose(build_hamiltonian(spec, clean_realization(spec)))
    per_state = ipr(d)
    # dimerized bulk states live on two sites, the two edge states on one
    assert np.isclose(per_state.min(), 0.5) and np.isclose(per_state.max(), 1.0), "IPR bounds"
    return "dimer 1/2, edge 1"


def _clean_quantization() -> str:
    spec = ModelSpec(t_prime=1.2, gamma=1.0, n_cells=50)
    d = decompose(build_hamiltonian(spec, clean_realization(spec)))
    nu = winding_number(d, chiral_branches(d, 2), chiral_operator(spec), WindingConfig.from_lengths(100, 20))
    assert abs(nu - 1) < 1e-2, f"nu = {nu}"
    return f"nu = {nu:.4f}"


def _gap_formula() -> str:
    spec = ModelSpec(t_prime=1.2, gamma=1.0, n_cells=50)
    e = decompose(build_hamiltonian(spec, clean_realization(spec))).eigenvalues
    numeric = abs(e[51] - e[48])
    formula = analytic.bulk_gap_formula(spec)
    rel = abs(numeric - formula) / formula
    assert rel < 0.02, f"numeric {numeric:.4f} vs {formula:.4f}"
    return f"relative deviation {rel:.3f}"


def _localization_forms() -> str:
    worst = 0.0
    for w in (0.3, 1.0, 1.7, 4.0):
        a = analytic.localization_length(0.7, 0.6, w, 0.0)
        b = analytic.localization_length_w2zero(0.7, 0.6, w)
        worst = max(worst, abs(a - b))
    roots = analytic.critical_disorder(0.7, 0.6)
    assert worst < 1e-12 and len(roots) == 2, f"forms differ by {worst:.1e}, roots {roots}"
    return f"roots at gamma=0.6: {', '.join(f'{r:.3f}' for r in roots)}"


def _seed_derivation() -> str:
    a = ensemble.derive_seed(1, 2, 3, 0)
    assert a == ensemble.derive_seed(1, 2, 3, 0)
    seeds = {ensemble.derive_seed(1, 2, j, r) for j in range(200) for r in range(5)}
    assert len(seeds) == 1000, "seed collision"
    return "deterministic, 1000 distinct"


def _clean_point() -> str:
    spec = ModelSpec(t_prime=1.2, n_cells=20)
    rec = ensemble.run_point(spec, ensemble.EnsembleConfig(n_realizations=5), WindingConfig.from_lengths(40, 8))
    assert rec.rejects == 0 and rec.nu_stderr == 0.0 and not rec.failed, str(rec)
    return f"nu = {rec.nu_mean:.4f}, stderr 0"


CHECKS: list[tuple[str, Callable[[], str]]] = [
    ("chiral symmetry, all variants and boundaries", _chiral_symmetry),
    ("PT symmetry of the gain/loss chain", _pt_symmetry),
    ("gain/loss rotation to a nonreciprocal SSH chain", _gainloss_rotation),
    ("biorthogonality under a strong skin effect", _biorthogonality),
    ("canonical eigenvalue order", _canonical_sort),
    ("dimerized winding oracle", _dimerized_oracle),
    ("clean winding quantization", _clean_quantization),
    ("similarity transform preserves the spectrum", _similarity),
    ("IPR limits of the dimerized chain", _ipr_limits),
    ("clean gap against the mapped-hopping formula", _gap_formula),
    ("localization length forms and critical points", _localization_forms),
    ("seed derivation", _seed_derivation),
    ("clean ensemble point", _clean_point),
]


def run_checks() -> list[CheckResult]:
    results = []
    for name, check in CHECKS:
        try:
            detail = check()
            results.append(CheckResult(name, True, detail))
        except Exception as exc:  # report every failure, keep going
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    return results


def summary_ok(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)
