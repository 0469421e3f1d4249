import numpy as np
import pytest

from mhrev import (
    DimensionMismatch,
    ReconstructionMismatch,
    expansion_apply,
    pseudospectral_reconstruct,
    pseudospectral_reconstruct_reversal,
    stationary_distribution,
    time_reversal,
    triangle,
)
import mhrev.expansion as ex

from _chains import chains


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_reconstruction_of_powers(n):
    for P, _ in chains(10 + n, 40):
        pi = stationary_distribution(P)
        Pn = np.linalg.matrix_power(np.asarray(P), n)
        np.testing.assert_allclose(np.asarray(pseudospectral_reconstruct(P, pi, n, tol=1e-9)), Pn, atol=1e-9)
        Psn = np.linalg.matrix_power(np.asarray(time_reversal(P, pi)), n)
        np.testing.assert_allclose(np.asarray(pseudospectral_reconstruct_reversal(P, pi, n, tol=1e-9)), Psn, atol=1e-9)


def test_jacobi_path_reconstructs_too():
    P = triangle()
    pi = stationary_distribution(P)
    out = pseudospectral_reconstruct(P, pi, 2, method="jacobi", tol=1e-9)
    np.testing.assert_allclose(np.asarray(out), np.linalg.matrix_power(np.asarray(P), 2), atol=1e-12)


def test_expansion_apply_matches_matrix_vector_product():
    for P, rng in chains(20, 20):
        pi = stationary_distribution(P)
        f = rng.standard_normal(P.n)
        for n in (1, 3):
            expected = np.linalg.matrix_power(np.asarray(P), n) @ f
            np.testing.assert_allclose(expansion_apply(P, pi, n, f), expected, atol=1e-10)


def test_expansion_apply_shape_check():
    P = triangle()
    with pytest.raises(DimensionMismatch):
        expansion_apply(P, stationary_distribution(P), 1, [1.0, 2.0])


def test_mismatch_is_reported(monkeypatch):
    P = triangle()
    pi = stationary_distribution(P)
    real = ex._assemble
    monkeypatch.setattr(ex, "_assemble", lambda *a, **k: real(*a, **k) + 1e-3)
    with pytest.raises(ReconstructionMismatch):
        pseudospectral_reconstruct(P, pi, 1)
