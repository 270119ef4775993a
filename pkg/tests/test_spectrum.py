import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wqed_subradiance import (
    ArrayConfig,
    DomainError,
    build_hamiltonian,
    compute_decay_map,
    darkness_bound,
    diagonalize,
    diagonalize_sector,
    enumerate_sector,
    fermionic_sum_rule,
    min_decay_rate,
    most_subradiant_state,
    scaling_fit,
    sector_decay_rates,
)
from oracles import full_space_hamiltonian, project_to_sector


def test_dicke_limit_two_atoms():
    config = ArrayConfig(n_atoms=2, phase=0.0)
    rates = sector_decay_rates(config, 1)
    np.testing.assert_allclose(rates, [0.0, 2.0], atol=1e-12)
    assert min_decay_rate(config, 1) == pytest.approx(0.0, abs=1e-15)


def test_two_atoms_double_excitation_sector():
    config = ArrayConfig(n_atoms=2, phase=0.456)
    states = diagonalize(config, 2)
    assert len(states) == 1
    assert states[0].epsilon == pytest.approx(-1j, abs=1e-12)
    assert states[0].gamma == pytest.approx(1.0, abs=1e-12)


def test_eigenstates_unit_norm_residual_and_gauge():
    config = ArrayConfig.from_period(7, 0.13)
    basis = enumerate_sector(7, 3)
    ham = build_hamiltonian(config, basis)
    for state in diagonalize_sector(ham):
        v = state.amplitudes
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        residual = np.linalg.norm(ham.matrix @ v - 3 * state.epsilon * v)
        assert residual < 1e-9
        pivot = v[np.argmax(np.abs(v))]
        assert abs(pivot.imag) < 1e-12 and pivot.real > 0


def test_sorting_ascending_gamma():
    config = ArrayConfig.from_period(8, 0.07)
    for k in (1, 2, 3):
        gammas = [s.gamma for s in diagonalize(config, k)]
        assert gammas == sorted(gammas)


def test_trace_preservation():
    config = ArrayConfig.from_period(7, 0.11, gamma_1d=1.7)
    for k in (1, 2, 3, 4):
        ham = build_hamiltonian(config, enumerate_sector(7, k))
        states = diagonalize_sector(ham)
        total = sum(s.epsilon * k for s in states)
        expected = -1j * 1.7 * k * math.comb(7, k)
        assert abs(total - expected) < 1e-9 * abs(expected)


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=15, deadline=None)
def test_eigenvalue_set_invariant_under_basis_permutation(seed):
    config = ArrayConfig.from_period(6, 0.09)
    h = build_hamiltonian(config, enumerate_sector(6, 2)).matrix
    rng = np.random.default_rng(seed)
    perm = rng.permutation(h.shape[0])
    hp = h[np.ix_(perm, perm)]
    ev = np.sort_complex(np.linalg.eigvals(h))
    evp = np.sort_complex(np.linalg.eigvals(hp))
    np.testing.assert_allclose(ev, evp, atol=1e-9)


@pytest.fixture(scope="module")
def oracle_n10():
    return full_space_hamiltonian(10, 2 * math.pi * 0.05)


def test_min_decay_n10_k2_vs_full_space_oracle(oracle_n10):
    basis = enumerate_sector(10, 2)
    projected = project_to_sector(oracle_n10, 10, basis.states)
    oracle_min = np.sort(-np.linalg.eigvals(projected).imag / 2)[0]
    config = ArrayConfig.from_period(10, 0.05)
    assert min_decay_rate(config, 2) == pytest.approx(oracle_min, abs=1e-10)
    # the two smallest single-excitation rates nearly account for it (total scale)
    single = sector_decay_rates(config, 1)
    total = 2 * min_decay_rate(config, 2)
    assert abs(single[:2].sum() - total) / total < 0.25


def test_min_decay_domain():
    config = ArrayConfig.from_period(4, 0.05)
    with pytest.raises(DomainError):
        min_decay_rate(config, 0)
    with pytest.raises(DomainError):
        min_decay_rate(config, 5)


def test_half_filling_rates_n10(oracle_n10):
    """Frozen oracle values for the f=1/2 transition at d=0.05."""
    config = ArrayConfig.from_period(10, 0.05)
    g5 = min_decay_rate(config, 5)
    g6 = min_decay_rate(config, 6)
    basis = enumerate_sector(10, 6)
    projected = project_to_sector(oracle_n10, 10, basis.states)
    oracle_g6 = np.sort(-np.linalg.eigvals(projected).imag / 6)[0]
    assert g6 == pytest.approx(oracle_g6, abs=1e-9)
    assert g5 == pytest.approx(0.051520167, abs=1e-6)
    assert g6 == pytest.approx(0.337018490, abs=1e-6)
    assert g6 > 0.1  # brighter than a tenth of the single-atom rate
    assert g6 / g5 == pytest.approx(6.541, abs=0.01)


def test_dimer_ansatz_rayleigh_quotient_n4():
    """The explicit two-dimer product state pins min gamma at small period."""
    config = ArrayConfig.from_period(4, 0.01)
    basis = enumerate_sector(4, 2)
    amps = np.zeros(basis.dim, dtype=complex)
    signs = {(0, 2): 0.5, (0, 3): -0.5, (1, 2): -0.5, (1, 3): 0.5}
    for subset, value in signs.items():
        amps[basis.index_of(subset)] = value
    h = build_hamiltonian(config, basis).matrix
    rayleigh_gamma = -(amps.conj() @ h @ amps).imag / 2
    exact = min_decay_rate(config, 2)
    assert abs(rayleigh_gamma - exact) / exact < 0.10


def test_sum_rule_k1_coincides():
    config = ArrayConfig.from_period(9, 0.08)
    result = fermionic_sum_rule(config, 1)
    assert result.rel_error == 0.0
    assert result.approx == pytest.approx(result.exact)
    assert result.in_ansatz_regime


def test_sum_rule_n10_frozen_values():
    """Oracle-computed accuracy of the antisymmetrized-product estimate."""
    config = ArrayConfig.from_period(10, 0.05)
    r2 = fermionic_sum_rule(config, 2)
    r3 = fermionic_sum_rule(config, 3)
    r6 = fermionic_sum_rule(config, 6)
    assert r2.rel_error == pytest.approx(0.2174, abs=2e-3)
    assert r3.rel_error == pytest.approx(0.6572, abs=2e-3)
    assert r6.rel_error == pytest.approx(40.458, abs=0.1)
    assert r2.in_ansatz_regime and r3.in_ansatz_regime and not r6.in_ansatz_regime
    # breakdown above half filling: off by more than a factor of two
    assert r6.rel_error > 1.0


def test_darkness_bound_examples():
    assert darkness_bound(10, 5) is True
    assert darkness_bound(10, 6) is False
    assert darkness_bound(4, 3) is False
    with pytest.raises(DomainError):
        darkness_bound(4, 5)


@given(st.integers(min_value=1, max_value=16), st.data())
def test_darkness_bound_matches_binomials(n, data):
    k = data.draw(st.integers(min_value=0, max_value=n))
    expected = math.comb(n, k) > (math.comb(n, k - 1) if k else 0)
    assert darkness_bound(n, k) is expected


def test_scaling_exponents():
    fit = scaling_fit(range(6, 17), [0.02, 0.05])
    assert fit.exponent_n == pytest.approx(-3.0, abs=0.3)
    fit2 = scaling_fit([8, 10], np.linspace(0.01, 0.08, 8))
    assert fit2.exponent_d == pytest.approx(2.0, abs=0.2)


def test_scaling_fit_domain_errors():
    with pytest.raises(DomainError):
        scaling_fit([10], [0.02, 0.04])
    with pytest.raises(DomainError):
        scaling_fit([6, 8], [0.02])
    with pytest.raises(DomainError):
        scaling_fit([6, 8], [0.05, 0.2])
    with pytest.raises(DomainError):
        scaling_fit([2, 3], [0.02, 0.04])


def test_half_wavelength_equivalent_to_small_period():
    a = min_decay_rate(ArrayConfig.from_period(10, 0.05), 1)
    b = min_decay_rate(ArrayConfig.from_period(10, 0.45), 1)
    assert abs(a - b) / a < 0.20
    assert a == pytest.approx(b, rel=1e-9)  # exact mirror identity of the model


def test_most_subradiant_state_matches_min():
    config = ArrayConfig.from_period(8, 0.05)
    state = most_subradiant_state(config, 3)
    assert state.gamma == pytest.approx(min_decay_rate(config, 3), abs=1e-12)


def test_decay_map_grid_and_rows():
    dm = compute_decay_map([0.05, 0.1], [4, 6], [1, 2, 5], gamma_1d=1.0)
    assert dm.min_gamma.shape == (2, 2, 3)
    assert np.isnan(dm.min_gamma[0, 0, 2])  # k=5 > N=4
    rows = list(dm.rows())
    assert len(rows) == 10  # 12 cells minus two invalid
    assert all(r[3] >= 0 for r in rows)
    d, k, n, value = rows[0]
    assert (d, k, n) == (0.05, 1, 4)
    assert value == pytest.approx(min_decay_rate(ArrayConfig.from_period(4, 0.05), 1))


def test_decay_map_parallel_matches_serial():
    serial = compute_decay_map([0.05], [6], [1, 2, 3], workers=1)
    parallel = compute_decay_map([0.05], [6], [1, 2, 3], workers=2)
    np.testing.assert_array_equal(serial.min_gamma, parallel.min_gamma)
