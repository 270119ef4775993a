"""Higher-order singular value decomposition of sector eigenstates.

A k-excitation amplitude vector over site subsets extends to a fully
symmetric rank-k tensor that vanishes whenever two indices coincide.  Its
multilinear SVD factorizes it exactly into one unitary N x N factor (shared
by all modes, by symmetry) and an all-orthogonal core tensor; the Frobenius
norms of the core's mode slices generalize singular values and define an
entanglement entropy that counts the effective single-particle orbitals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, NumericalError
from .lattice import SectorBasis, enumerate_sector
from .spectrum import EigenState

HOSVD_TOL = 1e-10
MAX_DENSE_K = 5
MAX_DENSE_N = 12
DEGENERACY_RTOL = 0.05

ANSATZ_FERMIONIC = "fermionic"
ANSATZ_DIMERIZED = "dimerized"


@dataclass(frozen=True)
class SymmetricWavefunction:
    """Subset amplitudes of a k-excitation state plus symmetrization rules.

    The dense tensor entry for an index permutation of the subset
    {n1 < ... < nk} is ``amplitude / sqrt(k!)``, which makes the dense
    Frobenius norm equal the amplitude 2-norm.
    """

    n_atoms: int
    k: int
    amplitudes: np.ndarray
    basis: SectorBasis

    def to_dense(self) -> np.ndarray:
        if self.k > MAX_DENSE_K or self.n_atoms > MAX_DENSE_N:
            raise DomainError(
                f"dense tensor limited to k <= {MAX_DENSE_K}, N <= {MAX_DENSE_N}; "
                f"got k={self.k}, N={self.n_atoms}"
            )
        tensor = np.zeros((self.n_atoms,) * self.k, dtype=complex)
        scale = 1.0 / math.sqrt(math.factorial(self.k))
        import itertools

        for amp, subset in zip(self.amplitudes, self.basis.states):
            value = amp * scale
            for perm in itertools.permutations(subset):
                tensor[perm] = value
        return tensor


def to_symmetric_tensor(state: EigenState, basis: SectorBasis) -> SymmetricWavefunction:
    """Wrap a unit-norm eigenvector as a symmetric tensor."""
    norm = np.linalg.norm(state.amplitudes)
    if abs(norm - 1.0) > 1e-9:
        raise DomainError(f"state amplitudes must be unit norm, got {norm}")
    if len(state.amplitudes) != basis.dim:
        raise DomainError("amplitude vector does not match basis dimension")
    return SymmetricWavefunction(
        n_atoms=basis.n_atoms,
        k=basis.n_excitations,
        amplitudes=np.array(state.amplitudes, dtype=complex),
        basis=basis,
    )


@dataclass(frozen=True)
class HosvdResult:
    """Unitary factor, core tensor, mode singular values, and entropy."""

    factor: np.ndarray
    core: np.ndarray
    singular_values: np.ndarray
    entropy: float

    @property
    def n_atoms(self) -> int:
        return self.factor.shape[0]

    @property
    def k(self) -> int:
        return self.core.ndim

    def to_json_dict(self) -> dict:
        return {
            "lambda": [float(v) for v in self.singular_values],
            "entropy": float(self.entropy),
            "U": [[float(z.real), float(z.imag)] for z in self.factor.ravel()],
        }


def _contract_all_modes(tensor: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    # consumes the current first axis and appends the transformed one; after
    # ndim applications the axis order is restored
    out = tensor
    for _ in range(tensor.ndim):
        out = np.tensordot(out, matrix, axes=([0], [0]))
    return out


def _validate_hosvd(psi: np.ndarray, u: np.ndarray, core: np.ndarray, lam: np.ndarray):
    n = u.shape[0]
    gram = u.conj().T @ u
    if np.abs(gram - np.eye(n)).max() > HOSVD_TOL:
        raise NumericalError("HOSVD factor is not unitary to 1e-10")
    slice_gram = core.reshape(n, -1) @ core.reshape(n, -1).conj().T
    if np.abs(slice_gram - np.diag(np.diag(slice_gram))).max() > HOSVD_TOL:
        raise NumericalError("HOSVD core is not quasi-diagonal to 1e-10")
    rec = _contract_all_modes(core, u.T)
    if np.linalg.norm(rec - psi) > HOSVD_TOL:
        raise NumericalError("HOSVD reconstruction error exceeds 1e-10")
    if abs((lam**2).sum() - np.linalg.norm(psi) ** 2) > HOSVD_TOL:
        raise NumericalError("HOSVD weights do not sum to the state norm")


def hosvd(psi: SymmetricWavefunction) -> HosvdResult:
    """Numerically exact multilinear SVD of a symmetric wavefunction.

    The factor is taken from the left singular vectors of the mode-1
    unfolding (all unfoldings coincide by symmetry); the core is the state
    contracted with the conjugate factor on every index.  Columns carry a
    fixed phase gauge (largest-magnitude entry real positive).  Within
    degenerate blocks the columns are defined up to rotation; overlap
    diagnostics re-gauge them, see :func:`ansatz_overlap`.
    """
    if psi.k < 1:
        raise DomainError("hosvd requires at least one excitation")
    n = psi.n_atoms
    dense = psi.to_dense()
    unfolding = dense.reshape(n, -1)
    u, _, _ = np.linalg.svd(unfolding, full_matrices=True)
    # column phase gauge
    pivots = np.argmax(np.abs(u), axis=0)
    phases = np.exp(-1j * np.angle(u[pivots, np.arange(n)]))
    u = u * phases[None, :]
    core = _contract_all_modes(dense, u.conj())
    lam = np.linalg.norm(core.reshape(n, -1), axis=1)
    order = np.argsort(-lam, kind="stable")
    if not np.array_equal(order, np.arange(n)):
        u = u[:, order]
        lam = lam[order]
        core = core[np.ix_(*([order] * psi.k))]
    _validate_hosvd(dense, u, core, lam)
    weights = lam**2
    positive = weights[weights > 0]
    entropy = float(max(0.0, -(positive * np.log(positive)).sum()))
    return HosvdResult(factor=u, core=core, singular_values=lam, entropy=entropy)


def entanglement_entropy(result: HosvdResult) -> float:
    """Generalized entanglement entropy -sum(lambda^2 ln lambda^2)."""
    weights = result.singular_values**2
    total = weights.sum()
    if abs(total - 1.0) > 1e-10:
        raise DomainError(f"singular values must satisfy sum(lambda^2)=1, got {total}")
    positive = weights[weights > 0]
    return float(max(0.0, -(positive * np.log(positive)).sum()))


def fermionic_profiles(n_atoms: int) -> np.ndarray:
    """Standing-wave orbitals (-1)^n sin(pi*n*alpha/N), rows normalized."""
    sites = np.arange(1, n_atoms + 1)
    rows = []
    for alpha in range(1, n_atoms + 1):
        v = (-1.0) ** sites * np.sin(np.pi * sites * alpha / n_atoms)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            rows.append(v / norm)
    return np.array(rows)


def dimerized_profiles(n_atoms: int) -> np.ndarray:
    """Pair-antisymmetric orbitals with cos(2*pi*p*alpha/N) envelopes.

    Site pair p occupies sites (2p-1, 2p) with opposite signs; requires an
    even number of sites.
    """
    if n_atoms % 2:
        raise DomainError("dimerized profiles require an even number of atoms")
    rows = []
    for alpha in range(0, n_atoms // 2 + 1):
        v = np.zeros(n_atoms)
        for pair in range(1, n_atoms // 2 + 1):
            value = np.cos(2.0 * np.pi * pair * alpha / n_atoms)
            v[2 * pair - 2] = value
            v[2 * pair - 1] = -value
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            rows.append(v / norm)
    return np.array(rows)


def _assigned_overlaps(columns: np.ndarray, family: np.ndarray) -> np.ndarray:
    """Per-column best-assignment squared overlaps with the family rows."""
    overlap = np.abs(family.conj() @ columns) ** 2
    rows, cols = linear_sum_assignment(-overlap)
    out = np.zeros(columns.shape[1])
    for r, c in zip(rows, cols):
        out[c] = overlap[r, c]
    return out


def _degenerate_blocks(lam: np.ndarray, rtol: float) -> list[tuple[int, int]]:
    blocks, start = [], 0
    for i in range(1, len(lam)):
        if (lam[i - 1] - lam[i]) > rtol * max(lam[i - 1], 1e-300):
            blocks.append((start, i))
            start = i
    blocks.append((start, len(lam)))
    return blocks


def _procrustes(columns: np.ndarray, family: np.ndarray) -> np.ndarray:
    """Rotate columns (unitarily) to best align with assigned family rows."""
    overlap = np.abs(family.conj() @ columns) ** 2
    rows, cols = linear_sum_assignment(-overlap)
    target = np.zeros((columns.shape[0], columns.shape[1]), dtype=complex)
    for r, c in zip(rows, cols):
        target[:, c] = family[r]
    m = columns.conj().T @ target
    w, _, vh = np.linalg.svd(m)
    return columns @ (w @ vh)


def ansatz_overlap(
    result: HosvdResult,
    ansatz: str,
    block_rtol: float = DEGENERACY_RTOL,
) -> list[float]:
    """Squared overlaps of the k dominant factor columns with an analytic family.

    Columns inside a near-degenerate singular-value block (consecutive
    relative gaps below ``block_rtol``) are only defined up to rotation;
    each such block is first rotated toward whichever analytic family
    matches it best in aggregate, independently of ``ansatz``, so both
    families are evaluated in one common gauge.  Family vectors are paired
    with columns by maximal-overlap assignment.
    """
    n = result.n_atoms
    k = result.k
    if ansatz not in (ANSATZ_FERMIONIC, ANSATZ_DIMERIZED):
        raise DomainError(f"unknown ansatz {ansatz!r}; use 'fermionic' or 'dimerized'")
    if ansatz == ANSATZ_DIMERIZED and n % 2:
        raise DomainError("dimerized ansatz requires an even number of atoms")
    families = {ANSATZ_FERMIONIC: fermionic_profiles(n)}
    if n % 2 == 0:
        families[ANSATZ_DIMERIZED] = dimerized_profiles(n)
    columns = result.factor[:, :k].copy()
    lam = result.singular_values[:k]
    for a, b in _degenerate_blocks(lam, block_rtol):
        if b - a < 2:
            continue
        block = columns[:, a:b]
        totals = {
            name: _assigned_overlaps(block, fam).sum() for name, fam in families.items()
        }
        best = max(sorted(totals), key=lambda name: totals[name])
        columns[:, a:b] = _procrustes(block, families[best])
    return [float(v) for v in _assigned_overlaps(columns, families[ansatz])]


def hole_transform(state: EigenState, basis: SectorBasis) -> tuple[EigenState, SectorBasis]:
    """Re-express a k-excitation state as N-k holes in the inverted array.

    The amplitude on subset S moves to the complement N\\S, multiplied by
    the parity of the permutation that sorts the concatenation (S, N\\S).
    Applying the transform twice returns the state up to a global sign.
    """
    n = basis.n_atoms
    k = basis.n_excitations
    hole_basis = enumerate_sector(n, n - k)
    amplitudes = np.zeros(hole_basis.dim, dtype=complex)
    full = frozenset(range(n))
    for amp, subset in zip(state.amplitudes, basis.states):
        comp = tuple(sorted(full - set(subset)))
        # inversions between the sorted blocks: sum_i (s_i - i)
        inversions = sum(site - i for i, site in enumerate(subset))
        sign = -1.0 if inversions % 2 else 1.0
        amplitudes[hole_basis.index_of(comp)] = sign * amp
    hole_state = EigenState(
        epsilon=state.epsilon, gamma=state.gamma, amplitudes=amplitudes, k=n - k
    )
    return hole_state, hole_basis
