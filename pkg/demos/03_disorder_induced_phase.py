"""Disorder plus non-Hermiticity drive a clean trivial chain topological.

With t' = 0.7 the clean Hermitian chain is trivial. At gamma = 0.6 and
moderate disorder the winding number approaches one as the chain grows.
"""

from nhssh import EnsembleConfig, ModelSpec, WindingConfig, critical_disorder, run_point

gamma = 0.6
print("analytic delocalization points W* =", [round(w, 3) for w in critical_disorder(0.7, gamma)])

cfg = EnsembleConfig(n_realizations=30, periodic=False)
for n_sites in (100, 200):
    print(f"L = {n_sites}")
    for w in (0.0, 0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 3.0):
        spec = ModelSpec(t_prime=0.7, gamma=gamma, W1=w, n_cells=n_sites // 2)
        rec = run_point(spec, cfg, WindingConfig.from_fraction(n_sites))
        print(f"  W = {w:3.1f}  nu = {rec.nu_mean:6.3f}")

# nu rises between the two W* values and sharpens with L; the Hermitian chain
# (gamma = 0) at the same t' shows a much narrower window.
