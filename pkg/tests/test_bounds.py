import math

import numpy as np
import pytest

from mhrev import (
    GWI,
    MM1,
    BadTruncation,
    Ehrenfest,
    MMInfinity,
    ZeroGap,
    asymptotic_variance,
    asymptotic_variance_bound,
    closed_form_gap_bounds,
    exact_mixing_profile,
    exact_sum_variance,
    heterogeneous_variance_bound,
    mh_spectral_gap,
    mixing_time_bound,
    operator_norm_bound_check,
    reversible_mixing_time_bound,
    stationary_distribution,
    time_reversal,
    tv_cross_bounds_check,
    tv_distance,
    variance_bound,
    vortex_gap_bounds,
    winning_streak,
)
from mhrev.reproduce import hand_table_bounds

from _chains import chains


def _cov_oracle(P, pi, fs):
    # Cov(f_i(X_i), f_j(X_j)) = sum_x pi(x) f_i(x) (P^{j-i} f_j)(x) - E f_i E f_j, built from scratch
    A, p = np.asarray(P), np.asarray(pi)
    n = len(fs)
    C = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            a, b = (i, j) if i <= j else (j, i)
            Pk = np.linalg.matrix_power(A, b - a)
            C[i, j] = p @ (fs[a] * (Pk @ fs[b])) - (p @ fs[a]) * (p @ fs[b])
    return C


def test_tv_distance():
    assert tv_distance([0.5, 0.5], [1.0, 0.0]) == pytest.approx(0.5)
    assert tv_distance([0.2, 0.8], [0.2, 0.8]) == 0.0


def test_mixing_profile_of_winning_streak_reversal():
    m = 6
    P = winning_streak(m)
    pi = stationary_distribution(P)
    prof = exact_mixing_profile(time_reversal(P, pi), pi, m + 2)
    assert prof[m] == pytest.approx(0.0, abs=1e-14)
    assert prof[m - 1] > 1e-3
    assert prof.mixing_time(1e-12) == m
    assert prof.monotone


def test_mixing_time_bound_dominates_exact_mixing_time():
    checked = 0
    for P, _ in chains(30, 40):
        pi = stationary_distribution(P)
        scan = mh_spectral_gap(P, pi, 40)
        if scan.gamma_MH <= 0:
            continue
        bound = mixing_time_bound(scan, pi, 0.25)
        t = exact_mixing_profile(P, pi, int(math.ceil(bound)) + 1).mixing_time(0.25)
        assert t is not None and t <= bound
        checked += 1
    assert checked > 20


def test_mixing_bound_errors():
    class Flat:
        gamma_MH = 0.0
        t_star = 0
    with pytest.raises(ZeroGap):
        mixing_time_bound(Flat(), [0.5, 0.5], 0.25)
    with pytest.raises(ValueError):
        mixing_time_bound(Flat(), [0.5, 0.5], 1.5)
    with pytest.raises(ZeroGap):
        reversible_mixing_time_bound(0.0, [0.5, 0.5], 0.25)
    assert reversible_mixing_time_bound(0.5, [0.5, 0.5], 0.25) == pytest.approx(2 * math.log(8))


def test_tv_cross_bounds():
    for P, _ in chains(31, 60):
        pi = stationary_distribution(P)
        for n in (1, 2, 3):
            assert tv_cross_bounds_check(P, pi, n).minimum >= -1e-10


def test_operator_norm_inequality():
    for P, _ in chains(32, 60):
        lhs, rhs = operator_norm_bound_check(P, stationary_distribution(P))
        assert lhs <= rhs + 1e-10


def test_sum_variance_matches_covariance_oracle():
    for P, rng in chains(33, 30):
        pi = stationary_distribution(P)
        fs = [rng.standard_normal(P.n) for _ in range(5)]
        assert exact_sum_variance(P, pi, fs) == pytest.approx(_cov_oracle(P, pi, fs).sum(), abs=1e-10)


def test_variance_bounds_hold():
    used = 0
    for P, rng in chains(34, 60):
        pi = stationary_distribution(P)
        scan = mh_spectral_gap(P, pi, 30)
        if scan.gamma_MH <= 0:
            continue
        f = rng.standard_normal(P.n)
        for n in (1, 4, 10):
            bound, exact = variance_bound(P, pi, scan, f, n)
            assert exact == pytest.approx(_cov_oracle(P, pi, [f] * n).sum(), abs=1e-10)
            assert exact <= bound + 1e-9
        fs = [rng.standard_normal(P.n) for _ in range(6)]
        bound, exact = heterogeneous_variance_bound(P, pi, scan, fs)
        assert exact <= bound + 1e-9
        used += 1
    assert used > 30


def test_asymptotic_variance_matches_lag_sum():
    for P, rng in chains(35, 20, lazy=True):
        pi = np.asarray(stationary_distribution(P))
        f = rng.standard_normal(P.n)
        f0 = f - pi @ f
        A = np.asarray(P)
        total, h = pi @ (f0 * f0), f0.copy()
        for _ in range(5000):
            h = A @ h
            total += 2 * (pi @ (f0 * h))
        assert asymptotic_variance(P, pi, f) == pytest.approx(total, rel=1e-8, abs=1e-10)


def test_asymptotic_variance_bound_holds():
    for P, rng in chains(36, 30):
        pi = stationary_distribution(P)
        scan = mh_spectral_gap(P, pi, 30)
        if scan.gamma_MH <= 0:
            continue
        bound, gap = asymptotic_variance_bound(P, pi, scan, rng.standard_normal(P.n))
        assert gap <= bound + 1e-9


CASES = [(Ehrenfest(4, 0.5), 4), (Ehrenfest(6, 0.3), 5), (MM1(1.0, 2.0, 60), 4), (MMInfinity(3.0, 40), 4), (GWI(0.5, 2.0, 80), 4)]


@pytest.mark.parametrize("model,n", CASES)
def test_closed_form_bounds_against_hand_arithmetic(model, n):
    lo, hi = hand_table_bounds(model, n)
    tb = closed_form_gap_bounds(model, n)
    assert tb.lower == pytest.approx(lo, rel=1e-12)
    assert tb.upper == pytest.approx(hi, rel=1e-12)


def test_ehrenfest_closed_form_value():
    # 1 + 2 (1 - cos(pi/2)) 2^4
    assert closed_form_gap_bounds(Ehrenfest(4, 0.5), 4).upper == pytest.approx(33.0)


@pytest.mark.parametrize("model,n", CASES)
def test_vortex_gap_sandwich(model, n):
    rep = vortex_gap_bounds(model, n)
    assert rep.gamma_bd <= rep.gamma_exact + 1e-9
    assert rep.gamma_exact <= rep.upper + 1e-9
    assert rep.table.lower <= rep.gamma_exact + 1e-9


def test_vortex_rejects_coarse_truncation():
    with pytest.raises(BadTruncation):
        vortex_gap_bounds(MM1(1.0, 1.1, 10), 4)
