import numpy as np
import pytest

from mhrev import (
    InvalidKernel,
    NonPositiveStationary,
    NotStationary,
    ProbabilityVector,
    RateGenerator,
    ReducibleChain,
    SignedKernel,
    StochasticKernel,
    adjoint,
    is_irreducible,
    is_reversible,
    kernel_power,
    stationarity_residual,
    stationary_distribution,
    time_reversal,
    triangle,
    weighted_inner_product,
    winning_streak,
)
from mhrev.errors import DimensionMismatch

from _chains import chains


def test_probability_vector_rejects_zero_and_bad_sum():
    with pytest.raises(InvalidKernel):
        ProbabilityVector([0.5, 0.5, 0.0])
    with pytest.raises(InvalidKernel):
        ProbabilityVector([0.5, 0.6])
    v = ProbabilityVector([0.25, 0.75])
    assert v.min == 0.25 and len(v) == 2


def test_kernel_types_validate():
    with pytest.raises(InvalidKernel):
        StochasticKernel([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(InvalidKernel):
        StochasticKernel([[1.1, -0.1], [0.5, 0.5]])
    with pytest.raises(InvalidKernel):
        StochasticKernel([[1.0, 0.0, 0.0]])
    # signed kernels allow a negative diagonal but not a negative off-diagonal
    SignedKernel([[-0.5, 1.5], [0.5, 0.5]])
    with pytest.raises(InvalidKernel):
        SignedKernel([[1.5, -0.5], [0.5, 0.5]])
    with pytest.raises(InvalidKernel):
        SignedKernel([[-1.5, 2.5], [0.5, 0.5]])
    RateGenerator([[-2.0, 2.0], [1.0, -1.0]])
    with pytest.raises(InvalidKernel):
        RateGenerator([[-2.0, 1.0], [1.0, -1.0]])


def test_kernels_are_read_only():
    P = triangle()
    with pytest.raises(ValueError):
        P.matrix[0, 0] = 1.0


def test_irreducibility():
    assert is_irreducible(triangle())
    assert not is_irreducible(np.array([[1.0, 0.0], [0.5, 0.5]]))
    with pytest.raises(ReducibleChain):
        stationary_distribution(np.array([[1.0, 0.0], [0.5, 0.5]]))


def test_triangle_stationary():
    pi = stationary_distribution(triangle())
    np.testing.assert_allclose(np.asarray(pi), [0.2, 0.4, 0.4], atol=1e-15)


def test_stationary_matches_linear_solve_oracle():
    for P, _ in chains(1, 50):
        A = np.asarray(P)
        n = A.shape[0]
        # independent oracle: replace one balance equation by normalisation
        M = np.vstack([(A.T - np.eye(n))[:-1], np.ones(n)])
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        oracle = np.linalg.solve(M, rhs)
        pi = stationary_distribution(P)
        np.testing.assert_allclose(np.asarray(pi), oracle, atol=1e-12)
        assert stationarity_residual(P, pi) < 1e-13


def test_tiny_stationary_mass_is_kept():
    # pi(m-1) = 2^-m for the winning streak, far below any absolute tolerance
    P = winning_streak(50)
    pi = np.asarray(stationary_distribution(P))
    assert pi[-1] == pytest.approx(2.0 ** -50, rel=1e-10)
    with pytest.raises(NonPositiveStationary):
        stationary_distribution(P, min_mass=1e-12)


def test_generator_stationary():
    G = RateGenerator([[-1.0, 1.0, 0.0], [2.0, -3.0, 1.0], [0.0, 2.0, -2.0]])
    pi = np.asarray(stationary_distribution(G))
    np.testing.assert_allclose(pi @ np.asarray(G), 0.0, atol=1e-14)


def test_adjoint_and_time_reversal():
    for P, rng in chains(2, 30):
        pi = np.asarray(stationary_distribution(P))
        Ps = np.asarray(time_reversal(P, pi))
        A = np.asarray(P)
        np.testing.assert_allclose(pi[:, None] * Ps, (pi[:, None] * A).T, atol=1e-14)
        f, g = rng.standard_normal(A.shape[0]), rng.standard_normal(A.shape[0])
        lhs = weighted_inner_product(A @ f, g, pi)
        rhs = weighted_inner_product(f, adjoint(A, pi) @ g, pi)
        assert lhs == pytest.approx(rhs, abs=1e-12)
        np.testing.assert_allclose(np.asarray(time_reversal(Ps, pi)), A, atol=1e-13)


def test_time_reversal_requires_stationarity():
    with pytest.raises(NotStationary):
        time_reversal(triangle(), [1 / 3, 1 / 3, 1 / 3])
    with pytest.raises(DimensionMismatch):
        adjoint(triangle(), [0.5, 0.5])


def test_reversibility():
    P = triangle()
    pi = stationary_distribution(P)
    assert not is_reversible(P, pi)
    S = np.array([[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]])
    assert is_reversible(S, stationary_distribution(S))


def test_kernel_power_matches_repeated_product():
    P = triangle()
    np.testing.assert_allclose(np.asarray(kernel_power(P, 7)), np.linalg.matrix_power(np.asarray(P), 7), atol=1e-15)
    with pytest.raises(ValueError):
        kernel_power(P, 0)
