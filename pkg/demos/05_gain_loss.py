"""The SSH chain with balanced gain and loss on its two sublattices.

Below the threshold |Gamma| = 2t the open chain keeps a real spectrum, and a
per-cell rotation maps it to an SSH chain with intracell hoppings t +/- Gamma/2.
Gain and loss therefore shrink the effective intracell hopping to
sqrt(t^2 - Gamma^2/4) and can make a trivial chain topological.
"""

import numpy as np

from nhssh import (
    ModelSpec,
    Variant,
    build_hamiltonian,
    chiral_branches,
    clean_realization,
    decompose,
    mapped_params,
    pt_threshold,
    winding_number,
    working_frame,
    WindingConfig,
)

print("PT threshold |Gamma| =", pt_threshold(1.0))
t_prime = 0.8
for gamma_gl in (0.0, 0.6, 1.2, 1.5, 1.9, 2.2):
    spec = ModelSpec(variant=Variant.GAIN_LOSS, t_prime=t_prime, Gamma=gamma_gl, n_cells=50)
    frame = working_frame(spec, build_hamiltonian(spec, clean_realization(spec)))
    d = decompose(frame.hamiltonian, max_condition=np.inf)
    max_imag = np.max(np.abs(d.eigenvalues.imag))
    mp = mapped_params(spec)
    line = f"Gamma = {gamma_gl:3.1f}  max|Im E| = {max_imag:8.2e}"
    if mp.valid:
        nu = winding_number(d, chiral_branches(d, 2, isolation=0.1), frame.chiral, WindingConfig.from_fraction(100))
        line += f"  t_eff = {mp.t_intra_eff:.3f}  nu = {nu:.3f}"
    else:
        line += "  PT broken"
    print(line)
