"""Dense biorthogonal eigendecomposition and chiral branch selection."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lattice import ChiralOperator, HamiltonianMatrix

DEFAULT_TOL = 1e-8
MAX_CONDITION = 1e12
# eigenvalues closer than this are treated as tied by the canonical sort
SORT_DECIMALS = 10
AMBIGUOUS_BRANCH = 1e-12


class SpectralError(RuntimeError):
    """A realization whose decomposition cannot be trusted."""


class DecompositionError(SpectralError):
    pass


class BranchError(SpectralError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues with right eigenvectors (columns) and left eigenvectors (rows).

    ``right_vectors`` columns have unit 2-norm and ``left_vectors`` is their
    inverse, so ``left_vectors @ right_vectors == I``. The decomposition is
    computed in a gauge ``B = G^-1 H G`` with ``G = diag(gauge)``; residuals
    and the condition number refer to that gauge. ``left_vectors`` is None
    when only right eigenvectors were requested.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray | None
    gauge: np.ndarray
    biorth_residual: float
    recon_residual: float
    condition: float
    # unitary already applied to the eigenvectors; the gauge then no longer applies
    frame: np.ndarray | None = None

    @property
    def n_sites(self) -> int:
        return len(self.eigenvalues)

    def balanced(self) -> tuple[np.ndarray, np.ndarray]:
        """Right and left eigenvectors of the gauged matrix ``G^-1 H G``."""
        if self.left_vectors is None:
            raise DecompositionError("decomposition was computed without left eigenvectors")
        if self.frame is not None:
            raise DecompositionError("eigenvectors were moved out of the diagonalization frame")
        g = self.gauge
        return self.right_vectors / g[:, None], self.left_vectors * g[None, :]


    def in_frame(self, u: np.ndarray | None) -> SpectralDecomposition:
        """Eigenvectors expressed through the unitary ``u`` (identity when None)."""
        if u is None:
            return self
        left = None if self.left_vectors is None else self.left_vectors @ u.conj().T
        return replace(self, right_vectors=u @ self.right_vectors, left_vectors=left, frame=u)


def hopping_gauge(h: np.ndarray) -> np.ndarray:
    """Positive diagonal gauge that best equalises |B_xy| and |B_yx| for B = G^-1 h G.

    Solves, in least squares over every bond with both directions nonzero,
    ``log g_y - log g_x = 0.5 log |h_yx / h_xy|``. On an open chain the
    bonds form a tree, the solve is exact and skin-effect scaling is removed
    completely; loops (periodic wrap, longer-range bonds) get the best
    compromise. Eigenvalues are unaffected; conditioning is greatly improved.
    """
    n = h.shape[0]
    rows, cols = np.triu_indices(n, 1)
    fwd = np.abs(h[rows, cols])
    bwd = np.abs(h[cols, rows])
    mask = (fwd > 0) & (bwd > 0)
    if not mask.any():
        return np.ones(n)
    rows, cols = rows[mask], cols[mask]
    rhs = 0.5 * np.log(bwd[mask] / fwd[mask])
    incidence = np.zeros((len(rows), n))
    edge = np.arange(len(rows))
    incidence[edge, cols] = 1.0
    incidence[edge, rows] = -1.0
    log_g = np.linalg.lstsq(incidence, rhs, rcond=None)[0]
    return np.exp(log_g - log_g.mean())


def canonical_order(eigenvalues: np.ndarray) -> np.ndarray:
    """Ascending real part, then ascending imaginary part, then index."""
    re = np.round(eigenvalues.real, SORT_DECIMALS) + 0.0
    im = np.round(eigenvalues.imag, SORT_DECIMALS) + 0.0
    return np.lexsort((np.arange(len(eigenvalues)), im, re))


def decompose(
    H: HamiltonianMatrix | np.ndarray,
    tol: float = DEFAULT_TOL,
    *,
    biorthogonal: bool = True,
    max_condition: float = MAX_CONDITION,
) -> SpectralDecomposition:
    """Full eigendecomposition ``H = T diag(E) T^-1`` sorted canonically.

    Raises DecompositionError if the eigensolver fails or, when
    ``biorthogonal`` is set, if the right eigenvector matrix is too close to
    singular (biorthogonality or reconstruction residual above ``tol``, or
    condition number above ``max_condition``).
    """
    h = H.entries if isinstance(H, HamiltonianMatrix) else np.asarray(H, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DecompositionError("matrix must be square")
    if not np.all(np.isfinite(h)):
        raise DecompositionError("matrix has non-finite entries")

    g = hopping_gauge(h)
    b = h * g[None, :] / g[:, None]
    b_solve = b.real if not np.any(b.imag) else b
    try:
        evals, vecs = np.linalg.eig(b_solve)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigensolver failed: {exc}") from exc
    order = canonical_order(evals)
    evals = evals[order].astype(complex)
    t_b = vecs[:, order].astype(complex)

    right = t_b * g[:, None]
    norms = np.linalg.norm(right, axis=0)
    right /= norms[None, :]

    if not biorthogonal:
        return SpectralDecomposition(evals, right, None, g, np.nan, np.nan, np.nan)

    try:
        l_b = np.linalg.inv(t_b)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError("eigenvector matrix is singular (defective matrix)") from exc
    n = len(evals)
    biorth = float(np.max(np.abs(l_b @ t_b - np.eye(n))))
    recon = float(np.max(np.abs(b - (t_b * evals[None, :]) @ l_b)))
    cond = float(np.linalg.norm(t_b, 1) * np.linalg.norm(l_b, 1))
    scale = max(float(np.max(np.abs(b))), 1.0)
    if not np.isfinite(cond) or cond > max_condition:
        raise DecompositionError(f"eigenvector condition number {cond:.3g} exceeds {max_condition:.3g}")
    if biorth > tol:
        raise DecompositionError(f"biorthogonality residual {biorth:.3g} exceeds {tol:.3g}")
    if recon > tol * scale:
        raise DecompositionError(f"reconstruction residual {recon:.3g} exceeds {tol * scale:.3g}")

    left = (l_b * norms[:, None]) / g[None, :]
    return SpectralDecomposition(evals, right, left, g, biorth, recon, cond)


@dataclass(frozen=True)
class ChiralBranches:
    """Split of the non-excluded states into a "+" half; "-" partners are built as C|n+>."""

    plus_indices: np.ndarray
    excluded_indices: np.ndarray
    n_sites: int

    def minus_states(self, D: SpectralDecomposition, C: ChiralOperator) -> tuple[np.ndarray, np.ndarray]:
        """Chiral partners C|nR+> (columns) and <nL+|C^-1 (rows)."""
        right = C.matrix @ D.right_vectors[:, self.plus_indices]
        left = D.left_vectors[self.plus_indices, :] @ C.inverse
        return right, left


def chiral_branches(
    D: SpectralDecomposition, n_exclude: int = 2, *, isolation: float | None = None
) -> ChiralBranches:
    """Exclude the ``n_exclude`` states closest to E = 0, then pick the "+" branch.

    A state is "+" when Re E > 0; if |Re E| is below 1e-12 (relative to the
    spectral radius) the sign of Im E decides. Exclusion removes states at
    E = 0 first and then equal numbers from each branch, smallest |E| first,
    so a degenerate spectrum never loses two states of the same sign.

    With ``isolation`` set, a candidate +/- pair is only excluded when it is
    split off from the rest of the spectrum, ``|E| < isolation * |E_next|``
    with ``E_next`` the smallest |E| left after removing all candidates.
    Zero modes always pass; the lowest extended pair of a gapped trivial
    chain does not, so up to ``n_exclude`` states are removed.
    """
    n = D.n_sites
    if n_exclude < 0 or n_exclude % 2 or n_exclude >= n:
        raise BranchError(f"n_exclude must be even and in [0, {n}), got {n_exclude}")
    energies = D.eigenvalues
    mag = np.abs(energies)
    eps = AMBIGUOUS_BRANCH * max(float(np.max(mag)), 1.0)
    zero = mag < eps
    is_plus = np.where(np.abs(energies.real) > eps, energies.real > 0, energies.imag > 0)

    zeros = np.flatnonzero(zero)
    if len(zeros) > n_exclude:
        raise BranchError(f"{len(zeros)} states at E = 0 but only {n_exclude} excluded; branch is ambiguous")
    if len(zeros) % 2:
        raise BranchError("odd number of exact zero modes")
    k = (n_exclude - len(zeros)) // 2
    key = np.round(mag, 12)
    plus_all = np.flatnonzero(~zero & is_plus)
    minus_all = np.flatnonzero(~zero & ~is_plus)
    if len(plus_all) != len(minus_all):
        raise BranchError(f"{len(plus_all)} '+' vs {len(minus_all)} '-' states; spectrum is not chiral-paired")
    plus_sorted = plus_all[np.argsort(key[plus_all], kind="stable")]
    minus_sorted = minus_all[np.argsort(key[minus_all], kind="stable")]
    drop_plus, drop_minus = plus_sorted[:k], minus_sorted[:k]
    if isolation is not None and k and len(plus_sorted) > k:
        e_next = min(mag[plus_sorted[k]], mag[minus_sorted[k]])
        split_off = 0.5 * (mag[drop_plus] + mag[drop_minus]) < isolation * e_next
        drop_plus, drop_minus = drop_plus[split_off], drop_minus[split_off]
    excluded = np.sort(np.concatenate([zeros, drop_plus, drop_minus]))
    plus = np.sort(np.setdiff1d(plus_all, drop_plus))
    return ChiralBranches(plus, excluded, n)
