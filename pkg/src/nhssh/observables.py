"""Real-space winding number, participation ratios and mid-spectrum diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import ChiralOperator
from .spectral import ChiralBranches, SpectralDecomposition


@dataclass(frozen=True)
class WindingConfig:
    """Chain split into boundary intervals of ``l_sites`` around a middle of ``L_prime_sites``."""

    l_sites: int
    L_prime_sites: int

    def __post_init__(self):
        if self.l_sites < 0 or self.L_prime_sites < 2:
            raise ValueError("need l >= 0 and L' >= 2 sites")
        if self.l_sites % 2 or self.L_prime_sites % 2:
            raise ValueError(f"l={self.l_sites} and L'={self.L_prime_sites} must be even (whole cells)")

    @classmethod
    def from_lengths(cls, n_sites: int, l_sites: int) -> WindingConfig:
        return cls(l_sites, n_sites - 2 * l_sites)

    @classmethod
    def from_fraction(cls, n_sites: int, fraction: float = 0.2) -> WindingConfig:
        """l = fraction * L rounded down to whole cells."""
        l_sites = 2 * int(fraction * n_sites / 2 + 1e-9)
        return cls.from_lengths(n_sites, l_sites)

    @property
    def n_sites(self) -> int:
        return 2 * self.l_sites + self.L_prime_sites

    @property
    def middle(self) -> slice:
        return slice(self.l_sites, self.l_sites + self.L_prime_sites)


def flat_band_q(D: SpectralDecomposition, B: ChiralBranches, C: ChiralOperator) -> np.ndarray:
    """Q = sum_n (|nR+><nL+| - C|nR+><nL+|C^-1) in the gauge of ``D``.

    The diagonal gauge commutes with the cell coordinate and leaves every
    diagonal element of C Q [Q, X] unchanged, so the trace is gauge
    independent while the gauged Q stays well conditioned.
    """
    right_b, left_b = D.balanced()
    p = right_b[:, B.plus_indices] @ left_b[B.plus_indices, :]
    g = D.gauge
    if C.is_diagonal:
        c = np.real(np.diag(C.matrix))
        return p - np.outer(c, c) * p
    c_b = C.matrix * g[None, :] / g[:, None]
    c_b_inv = C.inverse * g[None, :] / g[:, None]
    return p - c_b @ p @ c_b_inv


def winding_number(
    D: SpectralDecomposition, B: ChiralBranches, C: ChiralOperator, cfg: WindingConfig
) -> float:
    """nu = Tr'(C Q [Q, X]) / (2 N'), trace over the 2N' sites of the middle N' cells.

    X is the unit-cell coordinate. Requires an open-chain decomposition.
    """
    n = D.n_sites
    if cfg.n_sites != n:
        raise ValueError(f"winding config covers {cfg.n_sites} sites, matrix has {n}")
    q = flat_band_q(D, B, C)
    x = (np.arange(n) // 2).astype(float)
    mid = cfg.middle
    g = D.gauge
    if C.is_diagonal:
        cq_mid = np.real(np.diag(C.matrix))[mid, None] * q[mid, :]
    else:
        cq_mid = (C.matrix[mid, :] * g[None, :] / g[mid, None]) @ q
    # (C Q [Q, X])_xx = sum_y (CQ)_xy Q_yx (X_x - X_y)
    dx = x[mid, None] - x[None, :]
    trace = np.sum(cq_mid * q[:, mid].T * dx)
    n_cells_mid = cfg.L_prime_sites // 2
    return float(trace.real / (2 * n_cells_mid))


def ipr(D: SpectralDecomposition, which: str = "per_state") -> np.ndarray | float:
    """Inverse participation ratio sum_x |psi_x|^4 of unit-norm right eigenvectors."""
    psi2 = np.abs(D.right_vectors) ** 2
    per_state = np.sum(psi2**2, axis=0)
    if which == "per_state":
        return per_state
    if which == "average":
        return float(np.mean(per_state))
    raise ValueError(f"unknown IPR mode {which!r}")


def density_profile(D: SpectralDecomposition, n: int) -> np.ndarray:
    """|psi_{n,x}|^2 of state ``n`` (0-based canonical index)."""
    if not 0 <= n < D.n_sites:
        raise IndexError(f"state {n} out of range for {D.n_sites} sites")
    return np.abs(D.right_vectors[:, n]) ** 2


@dataclass(frozen=True)
class MidSpectrum:
    mid_energies: np.ndarray
    numeric_gap: float
    edge_energies: np.ndarray


def spectral_observables(D: SpectralDecomposition, B: ChiralBranches | None = None) -> MidSpectrum:
    """Four central eigenvalues (1-based n = L/2-1 .. L/2+2) and E_g = |E_{L/2+2} - E_{L/2-1}|."""
    n = D.n_sites
    if n < 8:
        raise ValueError("need at least 8 sites")
    half = n // 2
    mid = D.eigenvalues[half - 2 : half + 2].copy()
    gap = float(abs(mid[3] - mid[0]))
    edge = D.eigenvalues[B.excluded_indices] if B is not None else np.zeros(0, dtype=complex)
    return MidSpectrum(mid, gap, edge)


@dataclass(frozen=True, eq=False)
class ObservableSet:
    winding: float
    ipr_per_state: np.ndarray
    mid_energies: np.ndarray
    numeric_gap: float
    density_mid: np.ndarray


def observe(
    D: SpectralDecomposition, B: ChiralBranches, C: ChiralOperator, cfg: WindingConfig
) -> ObservableSet:
    """Everything measured on one open-chain realization."""
    mid = spectral_observables(D, B)
    return ObservableSet(
        winding=winding_number(D, B, C, cfg),
        ipr_per_state=ipr(D),
        mid_energies=mid.mid_energies,
        numeric_gap=mid.numeric_gap,
        density_mid=density_profile(D, D.n_sites // 2 - 1),
    )
