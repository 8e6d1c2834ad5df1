"""Skin effect of the open nonreciprocal chain and the similarity map that undoes it.

Run with ``python3 demos/01_skin_effect.py``. Prints numbers only.
"""

import numpy as np

from nhssh import (
    Boundary,
    ModelSpec,
    build_hamiltonian,
    clean_realization,
    decompose,
    ipr,
    similarity_transform,
)

# A clean chain with right hopping 1.6 times the left one.
spec = ModelSpec(t=1.0, t_prime=0.7, gamma=0.6, n_cells=100)
h_open = build_hamiltonian(spec, clean_realization(spec))
h_ring = build_hamiltonian(spec.with_(boundary=Boundary.PERIODIC), clean_realization(spec))

d_open = decompose(h_open)
d_ring = decompose(h_ring, biorthogonal=False)

# Open boundaries: every eigenvalue is real even though H is not Hermitian.
print("open chain   max |Im E| =", np.max(np.abs(d_open.eigenvalues.imag)))
# Periodic boundaries: the spectrum winds around an ellipse in the complex plane.
print("periodic     max |Im E| =", np.max(np.abs(d_ring.eigenvalues.imag)))

# Bulk states pile up on one edge of the open chain, so they are far more
# localized than the Bloch waves of the ring.
print("average IPR, open     :", ipr(d_open, "average"))
print("average IPR, periodic :", ipr(d_ring, "average"))

weight = np.abs(d_open.right_vectors) ** 2
centre = (weight * np.arange(spec.n_sites)[:, None]).sum(axis=0)
print("mean position of open-chain states (sites 0..199):", centre.mean().round(1))

# The diagonal rescaling S = diag(r^cell) with r = sqrt(1 + gamma) turns the
# open chain into a Hermitian SSH chain with intercell hopping t' sqrt(1 + gamma).
h_tilde = similarity_transform(h_open, spec.gamma).entries
print("hermiticity residual of S^-1 H S:", np.max(np.abs(h_tilde - h_tilde.conj().T)))
print("largest spectral difference   :",
      np.max(np.abs(d_open.eigenvalues.real - np.linalg.eigvalsh(h_tilde))))
print("mapped intercell hopping:", h_tilde[2, 1].real, "=", 0.7 * np.sqrt(1.6))
