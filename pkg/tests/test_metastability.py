import itertools

import numpy as np
import pytest

from mhrev import (
    AssumptionViolated,
    DegenerateSet,
    InvariantViolation,
    Partition,
    TooLarge,
    cheeger_bounds,
    conductance,
    conductance_profile,
    flow,
    leakage,
    leakage_bounds,
    metastability_bounds,
    partition_metastability,
    stationary_distribution,
    triangle,
    upward_skip_free,
)
from mhrev.metastability import all_subsets, psi_vector

from _chains import chains


def _brute_k_way(P, pi, k):
    """min over k disjoint non-empty sets of the largest conductance, by enumeration."""
    n = len(pi)
    best = np.inf
    # assign every state to one of k sets or to none (label k)
    for labels in itertools.product(range(k + 1), repeat=n):
        blocks = [[x for x in range(n) if labels[x] == j] for j in range(k)]
        if any(not b for b in blocks):
            continue
        best = min(best, max(conductance(P, pi, b) for b in blocks))
    return best


def test_partition_validation():
    Partition([[0, 1], [2]], 3)
    with pytest.raises(ValueError):
        Partition([[0, 1], [1, 2]], 3)
    with pytest.raises(ValueError):
        Partition([[0], [2]], 3)
    with pytest.raises(ValueError):
        Partition([[0, 1, 2], []], 3)


def test_flow_and_metastability_basics():
    P = upward_skip_free()
    pi = stationary_distribution(P)
    assert partition_metastability(P, pi, [[0, 1, 2, 3]]) == pytest.approx(1.0)
    total = sum(flow(P, pi, [a], [b]) * pi[a] for a in range(4) for b in range(4))
    assert total == pytest.approx(1.0)
    assert conductance(P, pi, [0, 1]) == pytest.approx(1.0 - flow(P, pi, [0, 1], [0, 1]))


def test_skip_free_partition_values():
    P = upward_skip_free()
    pi = stationary_distribution(P)
    assert partition_metastability(P, pi, [[0, 1], [2, 3]]) == pytest.approx(1.48, abs=1e-2)
    assert partition_metastability(P, pi, [[0, 1, 2], [3]]) == pytest.approx(1.28, abs=1e-2)
    b = metastability_bounds(P, pi, [[0, 1], [2, 3]])
    assert b.upper == pytest.approx(1.74, abs=1e-2)
    assert b.lower <= b.value <= b.upper
    assert b.a == pytest.approx(min(b.diagnostics["spectrum_second"]))


def test_metastability_sandwich_on_random_chains():
    used = 0
    for P, rng in chains(40, 150):
        pi = stationary_distribution(P)
        n = P.n
        k = int(rng.integers(2, min(4, n) + 1))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
        rng.shuffle(labels)
        D = [np.flatnonzero(labels == j).tolist() for j in range(k)]
        try:
            b = metastability_bounds(P, pi, D)
        except AssumptionViolated:
            continue
        assert b.lower - 1e-9 <= b.value <= b.upper + 1e-9
        assert all(-1e-12 <= r <= 1 + 1e-12 for r in b.rho)
        used += 1
    assert used > 50


def test_metastability_rejects_bad_band():
    P = upward_skip_free()
    pi = stationary_distribution(P)
    with pytest.raises(AssumptionViolated):
        metastability_bounds(P, pi, [[0, 1], [2, 3]], a=-1.5)
    with pytest.raises(AssumptionViolated):
        metastability_bounds(P, pi, [[0, 1], [2, 3]], a=0.0)


def test_leakage_definition_and_degenerate_sets():
    P = upward_skip_free()
    pi = np.asarray(stationary_distribution(P))
    A = [0, 1]
    a = np.array([1.0, 1.0, 0.0, 0.0])
    # second form: mass leaving A from the normalised indicator
    alt = np.sum((np.asarray(P) @ (a / (pi @ a)))[2:] * pi[2:]) / (1 - pi @ a)
    assert leakage(P, pi, A, 1) == pytest.approx(alt)
    with pytest.raises(DegenerateSet):
        leakage(P, pi, [0, 1, 2, 3], 1)
    psi = psi_vector(pi, A)
    assert pi @ psi == pytest.approx(0.0, abs=1e-15)
    assert pi @ (psi * psi) == pytest.approx(1.0)


def test_leakage_lower_bound_always_holds():
    used = 0
    for P, rng in chains(41, 120):
        pi = stationary_distribution(P)
        A = rng.choice(P.n, size=int(rng.integers(1, P.n)), replace=False).tolist()
        for t in (1, 2):
            try:
                lb = leakage_bounds(P, pi, A, t, strict=False)
            except AssumptionViolated:
                continue
            assert lb.lower_holds
            if lb.upper_certified:
                assert lb.upper_holds
            used += 1
    assert used > 50


def test_leakage_strict_mode(monkeypatch):
    import mhrev.metastability as ms

    # lazy reversible chain: M2 = P has nonnegative spectrum, so the upper bound is certified
    S = np.array([[0.7, 0.3, 0.0], [0.15, 0.7, 0.15], [0.0, 0.3, 0.7]])
    pi = stationary_distribution(S)
    lb = leakage_bounds(S, pi, [0], 1)
    assert lb.upper_certified and lb.lower_holds and lb.upper_holds
    monkeypatch.setattr(ms, "leakage", lambda *a, **k: 10.0)
    with pytest.raises(InvariantViolation):
        leakage_bounds(S, pi, [0], 1)
    monkeypatch.setattr(ms, "leakage", lambda *a, **k: -1.0)
    with pytest.raises(InvariantViolation):
        leakage_bounds(S, pi, [0], 1)


def test_two_way_conductance_matches_enumeration():
    for P, _ in chains(42, 40):
        pi = np.asarray(stationary_distribution(P))
        brute = min(
            max(conductance(P, pi, A), conductance(P, pi, [x for x in range(P.n) if x not in A]))
            for A in all_subsets(P.n)
        )
        assert conductance_profile(P, pi, 2) == pytest.approx(brute, abs=1e-12)
        assert conductance_profile(P, pi, 2) == pytest.approx(_brute_k_way(P, pi, 2), abs=1e-12)


def test_k_way_expansion_matches_enumeration():
    for P, _ in chains(43, 25, lo=3, hi=6):
        pi = stationary_distribution(P)
        for k in (3, min(4, P.n)):
            assert conductance_profile(P, pi, k) == pytest.approx(_brute_k_way(P, pi, k), abs=1e-12)


def test_cheeger_lower_bound():
    for P, _ in chains(44, 60, lo=3, hi=8):
        pi = stationary_distribution(P)
        for k in (2, 3):
            ch = cheeger_bounds(P, pi, k)
            assert ch.lower <= conductance_profile(P, pi, k) + 1e-12
            assert ch.advisory_upper


def test_caps():
    P = triangle()
    pi = stationary_distribution(P)
    with pytest.raises(ValueError):
        conductance_profile(P, pi, 4)
    with pytest.raises(TooLarge):
        conductance_profile(P, pi, 3, capk=2)
