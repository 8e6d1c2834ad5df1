"""SSH-type chains with disordered, nonreciprocal or gain/loss hoppings.

Sites are ordered A1, B1, A2, B2, ... so that site ``2*j`` is sublattice A of
cell ``j`` and site ``2*j + 1`` is sublattice B (0-based). All energies are in
units of the intracell hopping ``t``; nothing is rescaled internally.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class Variant(str, enum.Enum):
    NONRECIPROCAL = "nonreciprocal"
    MODIFIED = "modified"
    RANDOM_GAMMA = "random_gamma"
    GAIN_LOSS = "gain_loss"


class NonreciprocalForm(str, enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


class Boundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class ModelError(ValueError):
    """Invalid model parameters or mismatched inputs."""


_FLOAT_FIELDS = ("t", "t_prime", "gamma", "t_double_prime", "sigma_gamma", "Gamma", "W1", "W2")


@dataclass(frozen=True)
class ModelSpec:
    """Lattice variant plus every physical parameter.

    Fields that do not apply to ``variant`` are ignored by the builders but
    must still be finite.
    """

    variant: Variant = Variant.NONRECIPROCAL
    t: float = 1.0
    t_prime: float = 1.2
    gamma: float = 0.0
    nonreciprocal_form: NonreciprocalForm = NonreciprocalForm.LINEAR
    t_double_prime: float = 0.0
    sigma_gamma: float = 0.0
    Gamma: float = 0.0
    W1: float = 0.0
    W2: float = 0.0
    n_cells: int = 50
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        try:
            object.__setattr__(self, "variant", Variant(self.variant))
            object.__setattr__(self, "nonreciprocal_form", NonreciprocalForm(self.nonreciprocal_form))
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        except ValueError as exc:
            raise ModelError(str(exc)) from None
        for name in _FLOAT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ModelError(f"{name} must be a real number, got {value!r}")
            value = float(value)
            if not math.isfinite(value):
                raise ModelError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if isinstance(self.n_cells, bool) or int(self.n_cells) != self.n_cells:
            raise ModelError(f"n_cells must be an integer, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        if self.n_cells < 2:
            raise ModelError("n_cells must be >= 2")
        for name in ("W1", "W2", "sigma_gamma"):
            if getattr(self, name) < 0:
                raise ModelError(f"{name} must be >= 0")

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells

    @property
    def is_clean(self) -> bool:
        """True when the Hamiltonian does not depend on the disorder sample."""
        if self.W1 != 0 or self.W2 != 0:
            return False
        return not (self.variant is Variant.RANDOM_GAMMA and self.sigma_gamma > 0)

    def nonreciprocal_shift(self) -> float:
        """f(gamma): the amount by which right hopping exceeds left hopping."""
        if self.nonreciprocal_form is NonreciprocalForm.LINEAR:
            return self.t_prime * self.gamma
        return self.t_prime * (1.0 - self.gamma + self.gamma**2)

    def with_(self, **changes) -> ModelSpec:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.value if isinstance(value, enum.Enum) else value
        return out


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    omega: np.ndarray
    omega_prime: np.ndarray
    gamma_j: np.ndarray
    seed: int

    @property
    def n_cells(self) -> int:
        return len(self.omega)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    entries: np.ndarray
    boundary: Boundary
    variant: Variant
    n_cells: int

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells

    def with_entries(self, entries: np.ndarray) -> HamiltonianMatrix:
        entries = np.array(entries, dtype=complex)
        entries.flags.writeable = False
        return replace(self, entries=entries)


class ChiralKind(str, enum.Enum):
    SIGMA_Z = "sigma_z"
    SIGMA_Y = "sigma_y"


@dataclass(frozen=True, eq=False)
class ChiralOperator:
    kind: ChiralKind
    matrix: np.ndarray

    @property
    def is_diagonal(self) -> bool:
        return self.kind is ChiralKind.SIGMA_Z

    @property
    def inverse(self) -> np.ndarray:
        # C is unitary and Hermitian
        return self.matrix


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def sample_disorder(spec: ModelSpec, seed: int) -> DisorderRealization:
    """Draw omega, omega' ~ U[-1, 1] and, for RANDOM_GAMMA, gamma_j ~ N(0, sigma_gamma^2).

    The draw order is fixed so equal ``(spec, seed)`` give bit-identical samples.
    """
    seed = int(seed) % 2**64
    rng = np.random.default_rng(seed)
    n = spec.n_cells
    omega = rng.uniform(-1.0, 1.0, n)
    omega_prime = rng.uniform(-1.0, 1.0, n)
    if spec.variant is Variant.RANDOM_GAMMA:
        gamma_j = rng.normal(0.0, spec.sigma_gamma, n)
    else:
        gamma_j = np.zeros(0)
    return DisorderRealization(_frozen(omega), _frozen(omega_prime), _frozen(gamma_j), seed)


def clean_realization(spec: ModelSpec) -> DisorderRealization:
    """All-zero realization; equivalent to any sample when the spec is clean."""
    n = spec.n_cells
    gamma_j = np.zeros(n) if spec.variant is Variant.RANDOM_GAMMA else np.zeros(0)
    return DisorderRealization(_frozen(np.zeros(n)), _frozen(np.zeros(n)), _frozen(gamma_j), 0)


def _bond_cells(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Cell pairs (j, j+1) joined by intercell bonds; the wrap bond uses j = N-1."""
    n = spec.n_cells
    j = np.arange(n if spec.boundary is Boundary.PERIODIC else n - 1)
    return j, (j + 1) % n


def build_hamiltonian(spec: ModelSpec, real: DisorderRealization) -> HamiltonianMatrix:
    n = spec.n_cells
    if real.n_cells != n or len(real.omega_prime) != n:
        raise ModelError(f"realization has {real.n_cells} cells, spec has {n}")
    if spec.variant is Variant.RANDOM_GAMMA and len(real.gamma_j) != n:
        raise ModelError("RANDOM_GAMMA needs one gamma_j per cell")

    h = np.zeros((2 * n, 2 * n), dtype=complex)
    cells = np.arange(n)
    a, b = 2 * cells, 2 * cells + 1
    m = spec.t + spec.W1 * real.omega
    h[a, b] = m
    h[b, a] = m

    j, k = _bond_cells(spec)
    tl = spec.t_prime + spec.W2 * real.omega_prime[j]

    if spec.variant is Variant.GAIN_LOSS:
        h[a, a] = 0.5j * spec.Gamma
        h[b, b] = -0.5j * spec.Gamma
        half = 0.5 * tl
        # np.add.at so bonds that coincide for n_cells == 2 under PBC accumulate
        for rows, cols, vals in (
            (2 * k, 2 * j + 1, half),
            (2 * j + 1, 2 * k, half),
            (2 * j, 2 * k + 1, half),
            (2 * k + 1, 2 * j, half),
            (2 * k, 2 * j, 1j * half),
            (2 * j, 2 * k, -1j * half),
            (2 * k + 1, 2 * j + 1, -1j * half),
            (2 * j + 1, 2 * k + 1, 1j * half),
        ):
            np.add.at(h, (rows, cols), vals)
    else:
        if spec.variant is Variant.RANDOM_GAMMA:
            tr = tl + spec.t * real.gamma_j[j]
        else:
            tr = tl + spec.nonreciprocal_shift()
        np.add.at(h, (2 * k, 2 * j + 1), tr)
        np.add.at(h, (2 * j + 1, 2 * k), tl)
        if spec.variant is Variant.MODIFIED:
            np.add.at(h, (2 * k + 1, 2 * j), spec.t_double_prime)
            np.add.at(h, (2 * j, 2 * k + 1), spec.t_double_prime)

    return HamiltonianMatrix(_frozen(h), spec.boundary, spec.variant, n)


def chiral_operator(spec: ModelSpec) -> ChiralOperator:
    """sigma_z (x) I for the SSH variants, sigma_y (x) I for the gain/loss chain."""
    eye = np.eye(spec.n_cells)
    if spec.variant is Variant.GAIN_LOSS:
        return ChiralOperator(ChiralKind.SIGMA_Y, _frozen(np.kron(eye, SIGMA_Y)))
    return ChiralOperator(ChiralKind.SIGMA_Z, _frozen(np.kron(eye, SIGMA_Z)))


def parity_operator(n_cells: int) -> np.ndarray:
    return np.kron(np.eye(n_cells), SIGMA_X)


def verify_symmetry(H: HamiltonianMatrix, C: ChiralOperator, which: str = "chiral") -> float:
    """Max-norm residual of C H C^-1 + H (``"chiral"``) or P H* P - H (``"pt"``)."""
    h = H.entries
    if C.matrix.shape != h.shape:
        raise ModelError("chiral operator and Hamiltonian sizes differ")
    if which == "chiral":
        return float(np.max(np.abs(C.matrix @ h @ C.inverse + h)))
    if which == "pt":
        if H.variant is not Variant.GAIN_LOSS:
            raise ModelError("PT symmetry is only defined for the gain/loss chain")
        p = parity_operator(H.n_cells)
        return float(np.max(np.abs(p @ h.conj() @ p - h)))
    raise ValueError(f"unknown symmetry {which!r}")


def similarity_transform(H: HamiltonianMatrix, gamma: float) -> HamiltonianMatrix:
    """Return S^-1 H S with S = diag(1, 1, r, r, r^2, r^2, ...), r = sqrt(1 + gamma).

    For an open nonreciprocal chain with W2 = 0 the result is Hermitian with
    intercell hopping t' sqrt(1 + gamma). Other inputs are transformed as well;
    whether the output is Hermitian is for the caller to check.
    """
    if gamma <= -1:
        raise ModelError("similarity transform needs gamma > -1")
    if H.boundary is not Boundary.OPEN:
        raise ModelError("similarity transform is defined for open chains only")
    r = math.sqrt(1.0 + gamma)
    s = r ** (np.arange(H.n_sites) // 2).astype(float)
    return H.with_entries(H.entries * s[None, :] / s[:, None])


def _cell_rotation(n_cells: int) -> np.ndarray:
    return np.kron(np.eye(n_cells), (np.eye(2) + 1j * SIGMA_X) / math.sqrt(2.0))


def gainloss_rotation(H: HamiltonianMatrix) -> HamiltonianMatrix:
    """Return U H U^-1 with U = (I + i sigma_x)/sqrt(2) in every cell.

    Maps sigma_z to sigma_y; the clean chain becomes an SSH chain with
    nonreciprocal intracell hoppings t + Gamma/2 and t - Gamma/2.
    """
    if H.variant is not Variant.GAIN_LOSS:
        raise ModelError("rotation applies to the gain/loss chain only")
    u = _cell_rotation(H.n_cells)
    return H.with_entries(u @ H.entries @ u.conj().T)


@dataclass(frozen=True, eq=False)
class WorkingFrame:
    """Hamiltonian and chiral operator in the basis used for diagonalization.

    ``to_sites`` is the unitary taking working-frame vectors to site
    amplitudes, or None when the working frame is the site basis.
    """

    hamiltonian: HamiltonianMatrix
    chiral: ChiralOperator
    to_sites: np.ndarray | None


def working_frame(spec: ModelSpec, H: HamiltonianMatrix) -> WorkingFrame:
    """Site basis for the SSH variants; the per-cell rotated basis for gain/loss.

    The gain/loss chain has equal hopping magnitudes in both directions, so
    its skin effect is invisible to a diagonal rescaling until the rotation
    turns it into nonreciprocal intracell hopping t +/- Gamma/2. The rotation
    maps sigma_y to -sigma_z; the frame uses +sigma_z, the SSH orientation,
    so the topological phase carries winding +1. Unitaries acting within a
    cell commute with the cell coordinate and leave the winding trace intact.
    """
    if spec.variant is not Variant.GAIN_LOSS:
        return WorkingFrame(H, chiral_operator(spec), None)
    eye = np.eye(spec.n_cells)
    chiral = ChiralOperator(ChiralKind.SIGMA_Z, _frozen(np.kron(eye, SIGMA_Z)))
    u = _cell_rotation(spec.n_cells)
    return WorkingFrame(gainloss_rotation(H), chiral, _frozen(u.conj().T))
