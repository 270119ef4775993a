"""Complex excitation spectra and decay-rate analysis of sector Hamiltonians.

Eigenproblem convention: H|psi> = k*eps|psi>, so ``epsilon`` is the energy
per excitation and ``gamma = -Im(eps)`` the per-excitation decay rate.  The
total decay rate of a k-excitation eigenstate is k*gamma; comparisons with
sums of single-excitation rates are made on the total scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DomainError, NumericalError
from .lattice import ArrayConfig, SectorHamiltonian, build_hamiltonian, enumerate_sector

RESIDUAL_TOL = 1e-9
GAMMA_FLOOR = -1e-12


@dataclass(frozen=True)
class EigenState:
    """One eigenpair of a sector Hamiltonian.

    ``amplitudes`` is the unit-norm right eigenvector over the sector basis,
    phase-fixed so its largest-magnitude component is real positive.
    """

    epsilon: complex
    gamma: float
    amplitudes: np.ndarray
    k: int


def _fingerprint(matrix: np.ndarray) -> str:
    import hashlib

    return hashlib.sha256(np.ascontiguousarray(matrix).tobytes()).hexdigest()[:16]


def diagonalize_sector(h: SectorHamiltonian) -> list[EigenState]:
    """All eigenpairs, sorted by ascending gamma then ascending Re(eps).

    Residuals ||H v - lambda v|| are checked against 1e-9; failure raises
    NumericalError carrying a fingerprint of the matrix.
    """
    k = h.basis.n_excitations
    scale = max(k, 1)
    try:
        values, vectors = linalg.eig(h.matrix)
    except linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericalError(
            f"eigensolver failed on sector matrix {_fingerprint(h.matrix)}"
        ) from exc
    states = []
    for i in range(len(values)):
        vec = vectors[:, i]
        vec = vec / np.linalg.norm(vec)
        residual = np.linalg.norm(h.matrix @ vec - values[i] * vec)
        if residual > RESIDUAL_TOL * max(1.0, abs(values[i])):
            raise NumericalError(
                f"eigenpair residual {residual:.2e} exceeds {RESIDUAL_TOL} "
                f"for sector matrix {_fingerprint(h.matrix)}"
            )
        # phase gauge: largest-|.| component real positive
        pivot = int(np.argmax(np.abs(vec)))
        phase = np.angle(vec[pivot])
        vec = vec * np.exp(-1j * phase)
        eps = values[i] / scale
        gamma = -eps.imag
        if gamma < GAMMA_FLOOR:
            raise NumericalError(
                f"negative decay rate {gamma:.3e} in sector matrix {_fingerprint(h.matrix)}"
            )
        states.append(EigenState(epsilon=eps, gamma=gamma, amplitudes=vec, k=k))
    states.sort(key=lambda s: (s.gamma, s.epsilon.real, int(np.argmax(np.abs(s.amplitudes)))))
    return states


def diagonalize(config: ArrayConfig, k: int) -> list[EigenState]:
    """Build and diagonalize the k-excitation sector of ``config``."""
    basis = enumerate_sector(config.n_atoms, k)
    return diagonalize_sector(build_hamiltonian(config, basis))


def most_subradiant_state(config: ArrayConfig, k: int) -> EigenState:
    return diagonalize(config, k)[0]


def sector_decay_rates(config: ArrayConfig, k: int) -> np.ndarray:
    """Per-excitation decay rates of the sector, ascending."""
    return np.array([s.gamma for s in diagonalize(config, k)])


def min_decay_rate(config: ArrayConfig, k: int) -> float:
    """Smallest per-excitation decay rate in the k-excitation sector."""
    if not 1 <= k <= config.n_atoms:
        raise DomainError(f"k must satisfy 1 <= k <= {config.n_atoms}, got {k}")
    gamma = min(s.gamma for s in diagonalize(config, k))
    return max(0.0, gamma)


@dataclass(frozen=True)
class SumRuleResult:
    """Antisymmetrized-product estimate of the most subradiant k-state decay.

    ``approx`` is the sum of the k smallest single-excitation rates and
    ``exact`` the smallest per-excitation rate of the k-sector, so the two
    live on different scales (total vs per excitation).  ``rel_error``
    compares them on the common total scale, symmetrically:
    |approx - k*exact| / min(approx, k*exact).
    """

    approx: float
    exact: float
    rel_error: float
    in_ansatz_regime: bool


def fermionic_sum_rule(config: ArrayConfig, k: int) -> SumRuleResult:
    """Compare min decay in sector k against the k smallest k=1 rates summed."""
    if not 1 <= k <= config.n_atoms:
        raise DomainError(f"k must satisfy 1 <= k <= {config.n_atoms}, got {k}")
    single = sector_decay_rates(config, 1)
    approx = float(np.sort(single)[:k].sum())
    exact = min_decay_rate(config, k)
    total = k * exact
    if approx == total:
        rel = 0.0
    else:
        denom = min(approx, total)
        rel = abs(approx - total) / denom if denom > 0 else math.inf
    return SumRuleResult(
        approx=approx,
        exact=exact,
        rel_error=rel,
        in_ansatz_regime=(2 * k <= config.n_atoms),
    )


def darkness_bound(n_atoms: int, k: int) -> bool:
    """Whether the sector can host dark states: C(N,k) > C(N,k-1).

    Decay into the (k-1)-sector imposes C(N,k-1) conditions on C(N,k)
    amplitudes; once k exceeds N/2 the conditions outnumber the unknowns.
    """
    if not 0 <= k <= n_atoms:
        raise DomainError(f"k must satisfy 0 <= k <= {n_atoms}, got {k}")
    below = math.comb(n_atoms, k - 1) if k >= 1 else 0
    return math.comb(n_atoms, k) > below


@dataclass(frozen=True)
class ScalingFit:
    exponent_n: float
    exponent_d: float


def scaling_fit(n_range, d_range, gamma_1d: float = 1.0) -> ScalingFit:
    """Log-log power-law exponents of the k=1 minimum decay rate.

    The exponent in N is fitted at the smallest period of ``d_range`` and
    the exponent in d/lambda0 at the largest N of ``n_range``.  Both axes
    need at least two points.
    """
    n_values = [int(n) for n in n_range]
    d_values = [float(d) for d in d_range]
    if len(n_values) < 2 or len(d_values) < 2:
        raise DomainError("scaling_fit needs at least two N values and two d values")
    if min(n_values) < 4:
        raise DomainError(f"N must be >= 4 in the fit range, got {min(n_values)}")
    if max(d_values) > 0.1:
        raise DomainError(
            f"d/lambda0 must stay within the small-period regime (<= 0.1), got {max(d_values)}"
        )
    d_small = min(d_values)
    n_large = max(n_values)
    g_vs_n = [
        min_decay_rate(ArrayConfig.from_period(n, d_small, gamma_1d), 1) for n in n_values
    ]
    g_vs_d = [
        min_decay_rate(ArrayConfig.from_period(n_large, d, gamma_1d), 1) for d in d_values
    ]
    exp_n = np.polyfit(np.log(n_values), np.log(g_vs_n), 1)[0]
    exp_d = np.polyfit(np.log(d_values), np.log(g_vs_d), 1)[0]
    return ScalingFit(exponent_n=float(exp_n), exponent_d=float(exp_d))


@dataclass(frozen=True)
class DecayMap:
    """Minimum per-excitation decay rate on a (d, N, k) grid.

    ``min_gamma[i, j, l]`` corresponds to ``d_over_lambda[i]``,
    ``n_values[j]``, ``k_values[l]``; cells with k > N hold NaN and are
    skipped on export.
    """

    d_over_lambda: np.ndarray
    n_values: np.ndarray
    k_values: np.ndarray
    min_gamma: np.ndarray

    def __post_init__(self):
        finite = self.min_gamma[np.isfinite(self.min_gamma)]
        if finite.size and finite.min() < 0:
            raise NumericalError("decay map contains negative rates")

    def rows(self):
        """Yield (d_over_lambda, k, N, min_gamma) in deterministic order."""
        for i, d in enumerate(self.d_over_lambda):
            for j, n in enumerate(self.n_values):
                for l, k in enumerate(self.k_values):
                    value = self.min_gamma[i, j, l]
                    if np.isfinite(value):
                        yield float(d), int(k), int(n), float(value)


def _decay_cell(args):
    d, n, k, gamma_1d = args
    if k > n:
        return math.nan
    return min_decay_rate(ArrayConfig.from_period(n, d, gamma_1d), k)


def compute_decay_map(d_values, n_values, k_values, gamma_1d: float = 1.0, workers: int = 1) -> DecayMap:
    """Evaluate the minimum decay rate over the product grid."""
    d_arr = np.array([float(d) for d in d_values])
    n_arr = np.array([int(n) for n in n_values])
    k_arr = np.array([int(k) for k in k_values])
    cells = [
        (float(d), int(n), int(k), gamma_1d) for d in d_arr for n in n_arr for k in k_arr
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_decay_cell, cells))
    else:
        values = [_decay_cell(c) for c in cells]
    grid = np.array(values).reshape(len(d_arr), len(n_arr), len(k_arr))
    return DecayMap(d_over_lambda=d_arr, n_values=n_arr, k_values=k_arr, min_gamma=grid)
