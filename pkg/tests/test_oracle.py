import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dicke2.errors import IterationLimit, Unclassified
from dicke2.oracle import (build_hamiltonian, diagonalize, oracle_spectrum, parity_classify,
                           parity_expectation, parity_operator)
from dicke2.params import ModelParams, Parity


def test_uncoupled_eigenvalues():
    sol = diagonalize(build_hamiltonian((0.5, 0.0), 1))
    np.testing.assert_allclose(sol.values, [-0.5, 0.0, 0.5, 0.5, 1.0, 1.5], atol=1e-14)


@pytest.mark.parametrize("g", [0.3, 0.6, 0.9])
def test_no_qubit_splitting_gives_displaced_ladders(g):
    spec = oracle_spectrum((0.0, g), 100, (-1.0, 3.0), check_convergence=False)
    expected = sorted([n - g * g for n in range(5) if -1 < n - g * g <= 3] * 2
                      + [float(n) for n in range(4)])
    np.testing.assert_allclose(spec.energies(), expected, atol=1e-9)


@given(st.floats(0.0, 2.0), st.floats(0.0, 1.5), st.integers(1, 40))
@settings(max_examples=30, deadline=None)
def test_trace_is_exact(delta, g, n_fock):
    H = build_hamiltonian((delta, g), n_fock)
    assert np.trace(H) == 3 * n_fock * (n_fock + 1) / 2
    assert np.array_equal(H, H.T)


@given(st.floats(0.0, 2.0), st.floats(0.01, 1.5))
@settings(max_examples=20, deadline=None)
def test_parity_commutes_exactly(delta, g):
    H = build_hamiltonian((delta, g), 30)
    P = parity_operator(30)
    assert np.array_equal(P @ H, H @ P)


def test_identity_and_two_by_two():
    assert np.all(diagonalize(np.eye(5)).values == 1.0)
    A = np.zeros((4, 4))
    A[1, 2] = A[2, 1] = 1.0
    for method in ("eigh", "jacobi"):
        np.testing.assert_allclose(diagonalize(A, method).values, [-1, 0, 0, 1], atol=1e-15)


def test_jacobi_agrees_with_lapack():
    H = build_hamiltonian(ModelParams(0.5, 0.6), 10)
    a = diagonalize(H, "eigh")
    b = diagonalize(H, "jacobi")
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)
    assert b.sweeps > 0


def test_random_matrix_trace_and_residual():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(50, 50))
    A = M + M.T
    for method in ("eigh", "jacobi"):
        sol = diagonalize(A, method)
        assert sol.values.sum() == pytest.approx(np.trace(A), abs=1e-10)
        assert sol.residuals.max() <= 1e-10 * np.linalg.norm(A)


def test_jacobi_sweep_limit():
    rng = np.random.default_rng(4)
    M = rng.normal(size=(20, 20))
    with pytest.raises(IterationLimit):
        diagonalize(M + M.T, "jacobi", max_sweeps=1)


def test_rejects_asymmetric():
    with pytest.raises(ValueError):
        diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


def _ansatz(parity, n_fock, rng):
    n = np.arange(n_fock + 1)
    a = rng.normal(size=n.size)
    b = rng.normal(size=n.size)
    b[(n % 2 == 1) if parity is Parity.EVEN else (n % 2 == 0)] = 0.0
    v = np.concatenate([a, b, parity.sign * (-1.0) ** n * a])
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("parity", list(Parity))
def test_ansatz_vectors_classify(parity):
    v = _ansatz(parity, 20, np.random.default_rng(5))
    got, expectation = parity_classify(v, 20)
    assert got is parity
    assert expectation == pytest.approx(parity.sign, abs=1e-14)


def test_mixed_vector_is_unclassified():
    rng = np.random.default_rng(6)
    v = _ansatz(Parity.EVEN, 20, rng) + _ansatz(Parity.ODD, 20, rng)
    with pytest.raises(Unclassified):
        parity_classify(v / np.linalg.norm(v), 20)


def test_classified_levels_in_trusted_window():
    spec = oracle_spectrum(ModelParams(0.5, 0.6), 100, (-0.35, 4.0))
    assert spec.unclassified == 0
    assert len(spec.energies("even")) + len(spec.energies("odd")) == len(spec.levels)
    for lv in spec.levels:
        assert abs(lv.expectation) >= 0.999


def test_self_convergence_80_vs_100():
    a = oracle_spectrum(ModelParams(0.5, 0.6), 100, (-0.35, 4.0), check_convergence=False)
    b = oracle_spectrum(ModelParams(0.5, 0.6), 80, (-0.35, 4.0), check_convergence=False)
    for parity in Parity:
        np.testing.assert_allclose(a.energies(parity), b.energies(parity), atol=1e-10)
    assert oracle_spectrum(ModelParams(1.0, 1.0), 100, (-1.0, 4.0)).max_shift < 1e-10


def test_weak_coupling_lowest_levels():
    spec = oracle_spectrum((0.5, 0.01), 40, (-1.0, 0.9), check_convergence=False)
    np.testing.assert_allclose(spec.energies()[:3], [-0.5, 0.0, 0.5], atol=1e-3)


def test_singlet_levels_not_in_block():
    spec = oracle_spectrum(ModelParams(0.7, 0.45), 100, (-1.0, 5.0), check_convergence=False)
    E = spec.energies()
    assert np.min(np.abs(E[:, None] - np.arange(6)[None, :])) > 1e-6


def test_window_above_trusted_limit():
    with pytest.raises(ValueError):
        oracle_spectrum(ModelParams(0.5, 0.6), 20, (-1.0, 12.0))


def test_parity_expectation_of_basis_state():
    v = np.zeros(3 * 11)
    v[11 + 3] = 1.0  # middle row, n = 3
    assert parity_expectation(v, 10) == -1.0
