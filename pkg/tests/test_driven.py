import numpy as np
import pytest

from wqed_subradiance import (
    ArrayConfig,
    DomainError,
    DriveConfig,
    ScatteringSpectrum,
    coherent_amplitudes,
    diagonalize,
    incoherent_spectrum,
    narrowest_linewidth,
    occupations,
    resonance_grid,
    steady_state,
    transfer_matrix_amplitudes,
)
from oracles import two_level_population


def _drive(power, grid=None, **kwargs):
    if grid is None:
        grid = np.array([0.0])
    return DriveConfig(power=power, detuning_grid=np.asarray(grid, dtype=float), **kwargs)


def test_drive_config_validation():
    with pytest.raises(DomainError):
        _drive(-1.0)
    with pytest.raises(DomainError):
        DriveConfig(power=1.0, detuning_grid=np.array([0.0, 0.0]))
    with pytest.raises(DomainError):
        DriveConfig(power=1.0, detuning_grid=np.array([[0.0]]))


def test_atom_count_guard():
    config = ArrayConfig.from_period(6, 0.05)
    with pytest.raises(DomainError):
        steady_state(config, _drive(0.1), 0.0)


def test_zero_power_gives_ground_state():
    config = ArrayConfig.from_period(3, 0.05)
    rho = steady_state(config, _drive(0.0), -0.4)
    expected = np.zeros((8, 8))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(rho, expected, atol=1e-12)


def test_steady_state_is_physical():
    config = ArrayConfig.from_period(4, 0.05)
    rho = steady_state(config, _drive(0.5), -0.2)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-9


def test_single_atom_weak_drive_linear_response():
    config = ArrayConfig.from_period(1, 0.05)
    power = 1e-4
    rho = steady_state(config, _drive(power), 0.0)
    population = occupations(config, rho)[0]
    omega = np.sqrt(power)
    assert population == pytest.approx(two_level_population(omega, 1.0, 0.0), abs=1e-12)
    assert population == pytest.approx(power, rel=5e-4)  # leading order omega^2/gamma^2


def test_single_atom_saturation():
    config = ArrayConfig.from_period(1, 0.05)
    power = 25.0
    rho = steady_state(config, _drive(power), 0.0)
    population = occupations(config, rho)[0]
    assert population == pytest.approx(two_level_population(np.sqrt(power), 1.0, 0.0), abs=1e-10)
    assert 0.45 < population < 0.5


def test_single_atom_linear_reflection_transmission():
    config = ArrayConfig.from_period(1, 0.05)
    delta = 0.7
    drive = _drive(1e-8)
    rho = steady_state(config, drive, delta)
    r, t = coherent_amplitudes(config, drive, rho, delta)
    assert r == pytest.approx(-1j / (delta + 1j), abs=1e-7)
    assert t == pytest.approx(delta / (delta + 1j), abs=1e-7)


def test_elastic_unitarity_in_linear_limit():
    config = ArrayConfig.from_period(3, 0.12)
    drive = _drive(1e-8)
    for delta in (-2.0, -0.5, 0.3, 1.7):
        rho = steady_state(config, drive, delta)
        r, t = coherent_amplitudes(config, drive, rho, delta)
        assert abs(r) ** 2 + abs(t) ** 2 == pytest.approx(1.0, abs=1e-6)


def test_transfer_matrix_single_atom_formulas():
    config = ArrayConfig.from_period(1, 0.3)
    for delta in (-1.2, 0.4, 2.5):
        r, t = transfer_matrix_amplitudes(config, delta)
        assert r == pytest.approx(-1j / (delta + 1j), abs=1e-12)
        assert t == pytest.approx(delta / (delta + 1j), abs=1e-12)
    r0, t0 = transfer_matrix_amplitudes(config, 0.0)
    assert r0 == pytest.approx(-1.0, abs=1e-12)
    assert t0 == 0.0


def test_transfer_matrix_is_lossless():
    config = ArrayConfig.from_period(4, 0.05)
    for delta in np.linspace(-3, 3, 21):
        r, t = transfer_matrix_amplitudes(config, delta)
        assert abs(r) ** 2 + abs(t) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_zero_power_amplitudes_fall_back_to_transfer_matrix():
    config = ArrayConfig.from_period(2, 0.05)
    drive = _drive(0.0)
    rho = steady_state(config, drive, 0.9)
    r, t = coherent_amplitudes(config, drive, rho, 0.9)
    r_tm, t_tm = transfer_matrix_amplitudes(config, 0.9)
    assert r == pytest.approx(r_tm, abs=1e-12)
    assert abs(t) == pytest.approx(abs(t_tm), abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_linear_limit_matches_transfer_matrix_generic_grid(n):
    """Away from the ultranarrow resonances the P=1e-6 response is linear."""
    config = ArrayConfig.from_period(n, 0.05)
    grid = np.linspace(-25.0, 5.0, 121)
    drive = _drive(1e-6, grid)
    spectrum = incoherent_spectrum(config, drive)
    for i, delta in enumerate(grid):
        r_tm, t_tm = transfer_matrix_amplitudes(config, delta)
        assert abs(abs(spectrum.reflection[i]) - abs(r_tm)) < 1e-4
        assert abs(abs(spectrum.transmission[i]) - abs(t_tm)) < 1e-4


def test_five_atom_steady_state_physical():
    config = ArrayConfig.from_period(5, 0.05)
    rho = steady_state(config, _drive(0.2), -0.3)
    assert rho.shape == (32, 32)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-9
    assert occupations(config, rho).max() <= 0.5 + 1e-6


def test_deep_linear_limit_matches_even_on_resonance():
    config = ArrayConfig.from_period(4, 0.05)
    grid = resonance_grid(config, -1.0, 0.5, coarse=41, refine_points=15)
    drive = _drive(1e-10, grid)
    spectrum = incoherent_spectrum(config, drive)
    assert spectrum.incoherent.max() < 1e-6
    for i, delta in enumerate(grid):
        r_tm, t_tm = transfer_matrix_amplitudes(config, delta)
        assert abs(abs(spectrum.reflection[i]) - abs(r_tm)) < 1e-6
        assert abs(abs(spectrum.transmission[i]) - abs(t_tm)) < 1e-6


def test_incoherent_fraction_bounds():
    config = ArrayConfig.from_period(3, 0.05)
    drive = _drive(0.3, np.linspace(-3, 2, 41))
    spectrum = incoherent_spectrum(config, drive)
    assert spectrum.incoherent.min() >= -1e-8
    assert spectrum.incoherent.max() <= 1 + 1e-8


def test_zero_power_spectrum_is_elastic():
    config = ArrayConfig.from_period(3, 0.05)
    spectrum = incoherent_spectrum(config, _drive(0.0, np.linspace(-2, 2, 31)))
    assert np.abs(spectrum.incoherent).max() < 1e-12
    assert spectrum.narrowest_fwhm is None


def test_occupations_stay_below_half_under_waveguide_drive():
    config = ArrayConfig.from_period(4, 0.05)
    for power in (0.01, 0.1, 1.0, 10.0):
        for delta in (-0.32, -0.19, 0.0, 1.44):
            rho = steady_state(config, _drive(power), delta)
            assert occupations(config, rho).max() <= 0.5 + 1e-6


def _lorentzian_spectrum(width, grid):
    values = 0.8 * width**2 / (grid**2 + width**2)
    return ScatteringSpectrum(
        detunings=grid,
        reflection=np.zeros(len(grid), dtype=complex),
        transmission=np.zeros(len(grid), dtype=complex),
        incoherent=values,
        narrowest_fwhm=None,
    )


def test_linewidth_of_synthetic_lorentzian():
    grid = np.linspace(-10, 10, 4001)
    fwhm = narrowest_linewidth(_lorentzian_spectrum(0.7, grid))
    assert fwhm == pytest.approx(1.4, rel=1e-3)


def test_linewidth_flat_spectrum_none():
    grid = np.linspace(-5, 5, 101)
    spectrum = _lorentzian_spectrum(1.0, grid)
    flat = ScatteringSpectrum(
        detunings=grid,
        reflection=spectrum.reflection,
        transmission=spectrum.transmission,
        incoherent=np.full(101, 0.3),
        narrowest_fwhm=None,
    )
    assert narrowest_linewidth(flat) is None


def test_linewidth_ignores_subfloor_noise():
    grid = np.linspace(-5, 5, 101)
    tiny = _lorentzian_spectrum(1.0, grid)
    noisy = ScatteringSpectrum(
        detunings=grid,
        reflection=tiny.reflection,
        transmission=tiny.transmission,
        incoherent=1e-12 * np.cos(grid) ** 2,
        narrowest_fwhm=None,
    )
    assert narrowest_linewidth(noisy) is None


def test_low_power_linewidth_tracks_most_subradiant_mode():
    config = ArrayConfig.from_period(4, 0.05)
    grid = resonance_grid(config, -25.0, 5.0, coarse=201, refine_points=31)
    spectrum = incoherent_spectrum(config, _drive(1e-3, grid))
    gamma_min = min(s.gamma for s in diagonalize(config, 1))
    assert spectrum.narrowest_fwhm is not None
    assert abs(spectrum.narrowest_fwhm - 2 * gamma_min) / (2 * gamma_min) < 0.5


def test_power_broadening_monotone_and_threshold():
    config = ArrayConfig.from_period(4, 0.05)
    grid = resonance_grid(config, -25.0, 5.0, coarse=201, refine_points=31)
    widths = []
    for power in (0.01, 0.1, 1.0, 10.0):
        spectrum = incoherent_spectrum(config, _drive(power, grid))
        widths.append(
            spectrum.narrowest_fwhm if spectrum.narrowest_fwhm is not None else np.inf
        )
    finite = [w for w in widths if np.isfinite(w)]
    assert all(a <= b * (1 + 1e-9) for a, b in zip(finite, finite[1:]))
    assert widths[-1] > 1.0  # no feature narrower than the single-atom rate survives


def test_incoherent_peaks_sit_on_subradiant_resonances():
    config = ArrayConfig.from_period(4, 0.05)
    grid = resonance_grid(config, -25.0, 5.0, coarse=201, refine_points=31)
    spectrum = incoherent_spectrum(config, _drive(1e-3, grid))
    y = spectrum.incoherent
    peaks = [
        grid[i]
        for i in range(1, len(grid) - 1)
        if y[i] > y[i - 1] and y[i] > y[i + 1] and y[i] > 1e-9
    ]
    modes = sorted(diagonalize(config, 1), key=lambda s: s.gamma)[:2]
    for mode in modes:
        position = mode.epsilon.real
        step = np.diff(grid)[np.searchsorted(grid, position) - 1]
        assert any(abs(p - position) <= step for p in peaks)


def test_phaseless_drive_variant_runs():
    config = ArrayConfig.from_period(4, 0.05)
    grid = np.linspace(-1.0, 0.2, 25)
    spectrum = incoherent_spectrum(
        config, _drive(0.01, grid, phase_on_drive=False)
    )
    assert np.isfinite(spectrum.incoherent).all()


def test_resonance_grid_strictly_increasing_and_bounded():
    config = ArrayConfig.from_period(4, 0.05)
    grid = resonance_grid(config, -5.0, 2.0)
    assert (np.diff(grid) > 0).all()
    assert grid[0] >= -5.0 and grid[-1] <= 2.0
    with pytest.raises(DomainError):
        resonance_grid(config, 1.0, -1.0)
