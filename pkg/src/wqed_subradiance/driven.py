"""Driven-dissipative steady states and incoherent scattering spectra.

The waveguide-coupled array is pumped coherently from the left.  In the
frame rotating at the drive frequency the generator splits into a Hermitian
part (sin-coupling plus detuning plus drive) and a collective dissipator
with kernel Gamma_nm = 2*gamma_1d*cos(phase*(m-n)); together they reproduce
the effective non-Hermitian sector Hamiltonian.  Coherent reflection and
transmission follow from input-output relations; whatever photon flux is
missing from them, I = 1 - |r|^2 - |t|^2, was scattered incoherently.

Conventions: the drive amplitude is ``amplitude_scale*gamma_1d*sqrt(power)``
and phases are referenced to the first atom, fixing the single-atom linear
limit to r = -i*gamma/(delta + i*gamma).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .errors import DomainError, NumericalError
from .lattice import ArrayConfig
from .spectrum import diagonalize

MAX_DRIVEN_ATOMS = 5
STEADY_TOL = 1e-9
PEAK_FLOOR = 1e-9
INCOHERENT_SLACK = 1e-8


@dataclass(frozen=True)
class DriveConfig:
    """Coherent pump: normalized power, detuning grid, and phase options."""

    power: float
    detuning_grid: np.ndarray
    phase_on_drive: bool = True
    amplitude_scale: float = 1.0

    def __post_init__(self):
        if self.power < 0:
            raise DomainError(f"power must be non-negative, got {self.power}")
        grid = np.asarray(self.detuning_grid, dtype=float)
        if grid.ndim != 1 or len(grid) == 0:
            raise DomainError("detuning grid must be a non-empty 1-D array")
        if len(grid) > 1 and not (np.diff(grid) > 0).all():
            raise DomainError("detuning grid must be strictly increasing")
        object.__setattr__(self, "detuning_grid", grid)

    def amplitude(self, gamma_1d: float) -> float:
        return self.amplitude_scale * gamma_1d * np.sqrt(self.power)


@dataclass(frozen=True)
class ScatteringSpectrum:
    """Coherent amplitudes and incoherent fraction over a detuning grid."""

    detunings: np.ndarray
    reflection: np.ndarray
    transmission: np.ndarray
    incoherent: np.ndarray
    narrowest_fwhm: float | None


@lru_cache(maxsize=8)
def _lowering_ops(n_atoms: int) -> tuple[np.ndarray, ...]:
    """Site lowering operators in the 2^N product basis (do not mutate)."""
    sigma = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    identity = np.eye(2, dtype=complex)
    ops = []
    for j in range(n_atoms):
        op = np.array([[1.0]], dtype=complex)
        for site in range(n_atoms):
            op = np.kron(op, sigma if site == j else identity)
        ops.append(op)
    return tuple(ops)


def _commutator_super(h: np.ndarray) -> np.ndarray:
    # row-major vec: vec(A rho B) = kron(A, B.T) vec(rho)
    dim = h.shape[0]
    eye = np.eye(dim)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


@lru_cache(maxsize=8)
def _liouvillian_pieces(config: ArrayConfig, phase_on_drive: bool):
    """Static, per-unit-drive, and per-unit-detuning superoperator pieces."""
    n = config.n_atoms
    gamma = config.gamma_1d
    phi = config.phase
    ops = _lowering_ops(n)
    dim = 2**n
    eye = np.eye(dim)

    sites = np.arange(n)
    decay_kernel = 2.0 * gamma * np.cos(phi * (sites[:, None] - sites[None, :]))
    if linalg.eigvalsh(decay_kernel).min() < -1e-9 * 2.0 * gamma * n:
        raise NumericalError("collective decay kernel is not positive semidefinite")

    h_coherent = np.zeros((dim, dim), dtype=complex)
    for a in range(n):
        for b in range(n):
            if a != b:
                h_coherent += gamma * np.sin(phi * abs(a - b)) * (ops[a].conj().T @ ops[b])
    l_static = _commutator_super(h_coherent)
    for a in range(n):
        for b in range(n):
            jump = ops[b]
            excite = ops[a].conj().T
            rate_op = excite @ jump
            l_static += decay_kernel[a, b] * (
                np.kron(jump, excite.T)
                - 0.5 * np.kron(rate_op, eye)
                - 0.5 * np.kron(eye, rate_op.T)
            )

    h_drive = np.zeros((dim, dim), dtype=complex)
    for j, op in enumerate(ops):
        ph = np.exp(1j * phi * j) if phase_on_drive else 1.0
        h_drive -= ph * op.conj().T + np.conj(ph) * op
    l_drive = _commutator_super(h_drive)

    number_op = sum(op.conj().T @ op for op in ops)
    l_detuning = _commutator_super(-number_op)
    return l_static, l_drive, l_detuning


def _solve_steady(liouvillian: np.ndarray, dim: int) -> np.ndarray:
    """Unique trace-one kernel vector of the generator."""
    m = liouvillian.copy()
    m[0, :] = 0.0
    m[0, np.arange(0, dim * dim, dim + 1)] = 1.0
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    try:
        vec = np.linalg.solve(m, rhs)
        residual = np.abs(liouvillian @ vec).max()
    except np.linalg.LinAlgError:
        vec, residual = None, np.inf
    if vec is None or residual > STEADY_TOL:
        # degenerate or ill-conditioned generator: inspect the kernel
        null = linalg.null_space(liouvillian, rcond=1e-10)
        if null.shape[1] != 1:
            raise NumericalError(
                f"steady state is not unique: generator kernel dimension {null.shape[1]}"
            )
        vec = null[:, 0]
        trace = vec[np.arange(0, dim * dim, dim + 1)].sum()
        vec = vec / trace
    return vec.reshape(dim, dim)


def steady_state(config: ArrayConfig, drive: DriveConfig, detuning: float) -> np.ndarray:
    """Steady-state density matrix in the rotating frame at the drive frequency."""
    if config.n_atoms > MAX_DRIVEN_ATOMS:
        raise DomainError(
            f"master-equation solver limited to N <= {MAX_DRIVEN_ATOMS}, got {config.n_atoms}"
        )
    l_static, l_drive, l_detuning = _liouvillian_pieces(config, drive.phase_on_drive)
    amp = drive.amplitude(config.gamma_1d)
    liouvillian = l_static + amp * l_drive + float(detuning) * l_detuning
    dim = 2**config.n_atoms
    rho = _solve_steady(liouvillian, dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    if np.abs(liouvillian @ rho.reshape(-1)).max() > STEADY_TOL:
        raise NumericalError("steady-state generator residual exceeds 1e-9")
    if np.linalg.eigvalsh(rho).min() < -1e-9:
        raise NumericalError("steady state is not positive semidefinite")
    return rho


def occupations(config: ArrayConfig, rho: np.ndarray) -> np.ndarray:
    """Per-site excited-state populations <sigma^dag_j sigma_j>."""
    ops = _lowering_ops(config.n_atoms)
    return np.array([np.trace(rho @ op.conj().T @ op).real for op in ops])


def transfer_matrix_amplitudes(
    config: ArrayConfig, detuning: float
) -> tuple[complex, complex]:
    """Linear (single-photon) reflection and transmission via 2x2 transfer matrices.

    Independent of the master-equation route; the transmission phase is
    referenced to the plane of the last atom.
    """
    gamma = config.gamma_1d
    r_atom = -1j * gamma / (detuning + 1j * gamma)
    t_atom = 1.0 + r_atom
    if t_atom == 0:
        # exact resonance: each atom is a perfect mirror, the first one wins
        return complex(r_atom), 0j
    m_atom = np.array(
        [[t_atom**2 - r_atom**2, r_atom], [-r_atom, 1.0]], dtype=complex
    ) / t_atom
    m_free = np.diag([np.exp(1j * config.phase), np.exp(-1j * config.phase)])
    m_total = m_atom.copy()
    for _ in range(config.n_atoms - 1):
        m_total = m_atom @ m_free @ m_total
    t = 1.0 / m_total[1, 1]
    r = -m_total[1, 0] / m_total[1, 1]
    return complex(r), complex(t)


def coherent_amplitudes(
    config: ArrayConfig, drive: DriveConfig, rho: np.ndarray, detuning: float
) -> tuple[complex, complex]:
    """Input-output reflection and transmission from the steady state.

    At zero power the amplitudes are ill-defined through the expectation
    values and fall back to the linear transfer-matrix result (with the
    transmission phase moved to the input reference plane).
    """
    n = config.n_atoms
    gamma = config.gamma_1d
    phi = config.phase
    amp_in = drive.amplitude(gamma)
    if amp_in == 0.0:
        r, t = transfer_matrix_amplitudes(config, detuning)
        return r, t * np.exp(-1j * phi * (n - 1))
    ops = _lowering_ops(n)
    coherences = np.array([np.trace(rho @ op) for op in ops])
    phases = np.exp(1j * phi * np.arange(n))
    t = 1.0 + 1j * gamma / amp_in * np.sum(np.conj(phases) * coherences)
    r = 1j * gamma / amp_in * np.sum(phases * coherences)
    return complex(r), complex(t)


def incoherent_spectrum(config: ArrayConfig, drive: DriveConfig) -> ScatteringSpectrum:
    """Sweep the detuning grid and collect r, t, and I = 1 - |r|^2 - |t|^2."""
    grid = drive.detuning_grid
    reflection = np.empty(len(grid), dtype=complex)
    transmission = np.empty(len(grid), dtype=complex)
    incoherent = np.empty(len(grid))
    for i, delta in enumerate(grid):
        rho = steady_state(config, drive, delta)
        r, t = coherent_amplitudes(config, drive, rho, delta)
        reflection[i] = r
        transmission[i] = t
        incoherent[i] = 1.0 - abs(r) ** 2 - abs(t) ** 2
    # with the drive phases suppressed the input field is not the physical
    # left-propagating mode and flux bookkeeping (hence I in [0, 1]) breaks
    if drive.phase_on_drive and (
        incoherent.min() < -INCOHERENT_SLACK or incoherent.max() > 1.0 + INCOHERENT_SLACK
    ):
        raise NumericalError("incoherent fraction left [0, 1] beyond the allowed slack")
    spectrum = ScatteringSpectrum(
        detunings=grid,
        reflection=reflection,
        transmission=transmission,
        incoherent=incoherent,
        narrowest_fwhm=None,
    )
    return ScatteringSpectrum(
        detunings=grid,
        reflection=reflection,
        transmission=transmission,
        incoherent=incoherent,
        narrowest_fwhm=narrowest_linewidth(spectrum),
    )


def narrowest_linewidth(spectrum: ScatteringSpectrum) -> float | None:
    """Smallest full width at half maximum among incoherent peaks.

    Peaks are strict interior local maxima above a 1e-9 floor; each width
    comes from linearly interpolated half-height crossings.  Peaks whose
    half level is never crossed inside the grid are not measurable and are
    skipped; returns None when no measurable peak exists.  The caller is
    responsible for a grid fine enough (steps below ~FWHM/5) to resolve the
    narrowest expected feature.
    """
    x = spectrum.detunings
    y = spectrum.incoherent
    best = None
    for i in range(1, len(y) - 1):
        if not (y[i] > y[i - 1] and y[i] > y[i + 1] and y[i] > PEAK_FLOOR):
            continue
        half = y[i] / 2.0
        left = right = None
        for j in range(i, 0, -1):
            if y[j - 1] <= half:
                left = np.interp(half, [y[j - 1], y[j]], [x[j - 1], x[j]])
                break
        for j in range(i, len(y) - 1):
            if y[j + 1] <= half:
                right = np.interp(half, [y[j + 1], y[j]], [x[j + 1], x[j]])
                break
        if left is None or right is None:
            continue
        width = float(right - left)
        if best is None or width < best:
            best = width
    return best


def resonance_grid(
    config: ArrayConfig,
    start: float,
    stop: float,
    coarse: int = 401,
    refine_points: int = 41,
    refine_span: float = 8.0,
) -> np.ndarray:
    """Detuning grid refined around every single-excitation resonance.

    Windows of half-width ``refine_span`` times each mode's decay rate are
    overlaid on a uniform grid, so narrow subradiant features stay resolved
    without a globally fine mesh.
    """
    if not stop > start:
        raise DomainError("grid needs stop > start")
    pieces = [np.linspace(start, stop, coarse)]
    for state in diagonalize(config, 1):
        width = max(refine_span * state.gamma, 1e-3 * config.gamma_1d)
        pieces.append(np.linspace(state.epsilon.real - width, state.epsilon.real + width, refine_points))
    grid = np.unique(np.concatenate(pieces))
    return grid[(grid >= start) & (grid <= stop)]
