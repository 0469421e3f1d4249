import math

import numpy as np
import pytest

from mhrev import (
    GWI,
    MM1,
    BadParams,
    Ehrenfest,
    MMInfinity,
    TooLarge,
    asymmetric_cycle,
    birth_death_generator,
    cyclic_vortex,
    dhn_sampler,
    is_irreducible,
    is_reversible,
    stationary_distribution,
    torus_walk,
    upward_skip_free,
    winning_streak,
)
from mhrev.models import dhn_labels


def test_cycle_is_doubly_stochastic():
    P = np.asarray(asymmetric_cycle(6, 0.8))
    np.testing.assert_allclose(P.sum(axis=0), 1.0)
    np.testing.assert_allclose(np.asarray(stationary_distribution(P)), np.full(6, 1 / 6), atol=1e-15)
    with pytest.raises(BadParams):
        asymmetric_cycle(2, 0.5)
    with pytest.raises(BadParams):
        asymmetric_cycle(5, 1.0)


def test_torus_reduces_to_cycle_and_is_capped():
    np.testing.assert_allclose(np.asarray(torus_walk(5, 1, 0.7)), np.asarray(asymmetric_cycle(5, 0.7)))
    T = np.asarray(torus_walk(4, 2, 0.7))
    assert T.shape == (16, 16)
    # from (0, 0) the walk reaches (0, 1), (0, 3), (1, 0), (3, 0)
    assert T[0, 1] == pytest.approx(0.35) and T[0, 3] == pytest.approx(0.15)
    assert T[0, 4] == pytest.approx(0.35) and T[0, 12] == pytest.approx(0.15)
    with pytest.raises(TooLarge):
        torus_walk(20, 3, 0.7)


def test_dhn_sampler_structure():
    m = 3
    P = np.asarray(dhn_sampler(m))
    labels = dhn_labels(m)
    assert labels == [-2, -1, 0, 1, 2, 3]
    idx = {lab: i for i, lab in enumerate(labels)}
    assert P[idx[1], idx[2]] == pytest.approx(2 / 3)
    assert P[idx[1], idx[-1]] == pytest.approx(1 / 3)
    # m + 1 wraps to -(m - 1); -m is m
    assert P[idx[3], idx[-2]] == pytest.approx(2 / 3)
    assert P[idx[3], idx[3]] == pytest.approx(1 / 3)
    pi = np.asarray(stationary_distribution(P))
    np.testing.assert_allclose(pi, np.full(2 * m, 1 / (2 * m)), atol=1e-14)
    assert is_irreducible(P)


def test_winning_streak_stationary_law():
    m = 6
    P = winning_streak(m)
    pi = np.asarray(stationary_distribution(P))
    expected = [2.0 ** -(i + 1) for i in range(m)] + [2.0 ** -m]
    np.testing.assert_allclose(pi, expected, atol=1e-15)


def test_skip_free_moves_up_one_level():
    P = np.asarray(upward_skip_free())
    assert np.all(np.triu(P, 2) == 0)
    assert not is_reversible(P, stationary_distribution(P))


@pytest.mark.parametrize("model", [Ehrenfest(5, 0.3), MM1(1.0, 2.0, 40), MMInfinity(2.0, 30), GWI(0.4, 1.5, 60)])
def test_birth_death_generator_is_reversible(model):
    G, pi = birth_death_generator(model)
    A, p = np.asarray(G), np.asarray(pi)
    np.testing.assert_allclose(A.sum(axis=1), 0.0, atol=1e-12)
    F = p[:, None] * A
    np.testing.assert_allclose(F, F.T, atol=1e-12)
    np.testing.assert_allclose(p, np.asarray(stationary_distribution(G)), atol=1e-10)


def test_birth_death_closed_form_laws():
    _, pi = birth_death_generator(Ehrenfest(4, 0.3))
    binom = [math.comb(4, i) * 0.3 ** i * 0.7 ** (4 - i) for i in range(5)]
    np.testing.assert_allclose(np.asarray(pi), binom, atol=1e-15)
    _, pi = birth_death_generator(MM1(1.0, 2.0, 30))
    geo = np.array([0.5 ** i for i in range(31)])
    np.testing.assert_allclose(np.asarray(pi), geo / geo.sum(), atol=1e-15)
    assert MM1(1.0, 2.0, 30).tail_mass() == pytest.approx(0.5 ** 31)


def test_model_parameter_checks():
    with pytest.raises(BadParams):
        MM1(2.0, 1.0)
    with pytest.raises(BadParams):
        Ehrenfest(0)
    with pytest.raises(BadParams):
        GWI(1.5, 1.0)
    with pytest.raises(BadParams):
        MMInfinity(-1.0)


def test_vortex_preserves_pi_and_is_divergence_free():
    for model, n in ((Ehrenfest(4, 0.5), 4), (MM1(1.0, 2.0, 30), 5)):
        G, pi = birth_death_generator(model)
        V = np.asarray(cyclic_vortex(n, pi))
        p = np.asarray(pi)
        np.testing.assert_allclose(p @ V, 0.0, atol=1e-10)
        np.testing.assert_allclose(V.sum(axis=1), 0.0, atol=1e-10)
        assert np.all(V[n:] == 0)
    with pytest.raises(BadParams):
        cyclic_vortex(9, [0.5, 0.5])
