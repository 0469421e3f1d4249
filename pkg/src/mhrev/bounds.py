"""Mixing, total-variation, operator-norm and variance bounds with exact baselines.

Every bound is returned next to the exact quantity it controls, computed by
brute force from matrix powers, so callers can inspect the slack directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BadTruncation, InvariantViolation, SingularResolvent, ZeroGap
from .kernels import adjoint, as_matrix, as_vector
from .models import GWI, MM1, Ehrenfest, MMInfinity, birth_death_generator, cyclic_vortex
from .reversiblize import generator_mh_pair, mh_pair
from .spectra import mean_zero_eigenvalues, self_adjoint_spectrum

VARIANCE_TOL = 1e-9
TRUNCATION_TOL = 1e-8


def tv_distance(mu, nu) -> float:
    """Half the l1 distance; signed rows (as in M2) are allowed."""
    return 0.5 * float(np.abs(as_vector(mu) - as_vector(nu)).sum())


@dataclass(frozen=True)
class MixingProfile:
    distances: tuple  # d(1), ..., d(n_max)
    monotone: bool

    def __getitem__(self, n: int) -> float:
        return self.distances[n - 1]

    def mixing_time(self, eps: float) -> int | None:
        """Smallest n with d(n) <= eps, or None if not reached within the profile."""
        for n, d in enumerate(self.distances, start=1):
            if d <= eps:
                return n
        return None


def exact_mixing_profile(P, pi, n_max: int) -> MixingProfile:
    """Worst-start total variation distance d(n) = max_x ||P^n(x, .) - pi||_TV."""
    A, p = as_matrix(P), as_vector(pi)
    Pn = np.eye(A.shape[0])
    out = []
    for _ in range(n_max):
        Pn = Pn @ A
        out.append(0.5 * float(np.abs(Pn - p[None, :]).sum(axis=1).max()))
    mono = all(b <= a + 1e-12 for a, b in zip(out, out[1:]))
    return MixingProfile(tuple(out), mono)


def mixing_time_bound(scan, pi, eps: float) -> float:
    """t* + log(1 / (eps pi_min)) / gamma_MH."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    if scan.gamma_MH <= 0:
        raise ZeroGap("MH-spectral gap is zero; no mixing bound")
    pmin = float(as_vector(pi).min())
    return scan.t_star + math.log(1.0 / (eps * pmin)) / scan.gamma_MH


def reversible_mixing_time_bound(gamma_star: float, pi, eps: float) -> float:
    """log(1 / (eps pi_min)) / gamma*, the classical reversible bound."""
    if gamma_star <= 0:
        raise ZeroGap("absolute spectral gap is zero")
    return math.log(1.0 / (eps * float(as_vector(pi).min()))) / gamma_star


class CrossSlacks(NamedTuple):
    p_by_m: float
    pstar_by_m: float
    m1_by_p: float
    m2_by_p: float

    @property
    def minimum(self) -> float:
        return min(self)


def tv_cross_bounds_check(P, pi, n: int) -> CrossSlacks:
    """Minimal slack over x of the four TV comparisons between P^n, P*^n, M1(P^n), M2(P^n).

    Constants are 3/2, 3/2, 2 and 3 respectively.
    """
    p = as_vector(pi)
    Pn = np.linalg.matrix_power(as_matrix(P), n)
    Psn = adjoint(Pn, p)
    m1, m2 = (np.asarray(m) for m in mh_pair(Pn, p))

    def rows(K):
        return 0.5 * np.abs(K - p[None, :]).sum(axis=1)

    dp, ds, d1, d2 = rows(Pn), rows(Psn), rows(m1), rows(m2)
    return CrossSlacks(
        float((1.5 * d1 + 1.5 * d2 - dp).min()),
        float((1.5 * d1 + 1.5 * d2 - ds).min()),
        float((2 * dp + 2 * ds - d1).min()),
        float((3 * dp + 3 * ds - d2).min()),
    )


def _l20_norm(K, pi) -> float:
    w = mean_zero_eigenvalues(K, pi)
    return float(max(abs(w[0]), abs(w[-1])))


def operator_norm_bound_check(P, pi, tol: float = 1e-10) -> tuple[float, float]:
    """||P|| on mean-zero functions against ||M1|| + ||M2|| + |lambda(M1(P^2))|^(1/2) + |lambda(M2(P^2))|^(1/2)."""
    A, p = as_matrix(P), as_vector(pi)
    PsP = adjoint(A, p) @ A
    lhs = math.sqrt(max(float(mean_zero_eigenvalues(PsP, p)[-1]), 0.0))
    m1, m2 = mh_pair(A, p)
    q1, q2 = mh_pair(A @ A, p)
    rhs = (
        _l20_norm(m1, p)
        + _l20_norm(m2, p)
        + math.sqrt(abs(float(mean_zero_eigenvalues(q1, p)[0])))
        + math.sqrt(abs(float(mean_zero_eigenvalues(q2, p)[0])))
    )
    if lhs > rhs + tol:
        raise InvariantViolation(f"operator-norm bound violated: {lhs:.17g} > {rhs:.17g}")
    return lhs, rhs


def _centered(f, p):
    f = as_vector(f)
    return f - float(f @ p)


def _autocovariances(A, p, f0, g0, lags: int) -> np.ndarray:
    # c[l] = <f0, P^l g0>_pi for l = 0..lags
    out = np.empty(lags + 1)
    h = g0.copy()
    for lag in range(lags + 1):
        out[lag] = float(np.sum(f0 * h * p))
        h = A @ h
    return out


def exact_sum_variance(P, pi, fs) -> float:
    """Var_pi(sum_i f_i(X_i)) for a stationary chain, from lagged covariances."""
    A, p = as_matrix(P), as_vector(pi)
    cs = [_centered(f, p) for f in fs]
    n = len(cs)
    total = 0.0
    # E[f_i(X_i) f_j(X_j)] = <f_i, P^{j-i} f_j>_pi for i <= j
    powers = [cs[j] for j in range(n)]
    for lag in range(n):
        for i in range(n - lag):
            term = float(np.sum(cs[i] * powers[i + lag] * p))
            total += term if lag == 0 else 2.0 * term
        powers = [A @ v for v in powers]
    return total


def _bound_factor(scan) -> float:
    if scan.gamma_MH <= 0:
        raise ZeroGap("MH-spectral gap is zero; variance bound is infinite")
    return len(scan.C_complement) + 2.0 / scan.gamma_MH


def variance_bound(P, pi, scan, f, n: int, tol: float = VARIANCE_TOL) -> tuple[float, float]:
    """(n V_f (|C^c| + 2 / gamma_MH), exact Var_pi(sum_{i<=n} f(X_i)))."""
    factor = _bound_factor(scan)
    A, p = as_matrix(P), as_vector(pi)
    f0 = _centered(f, p)
    vf = float(np.sum(f0 * f0 * p))
    c = _autocovariances(A, p, f0, f0, n - 1)
    lags = np.arange(1, n)
    exact = n * c[0] + 2.0 * float(np.sum((n - lags) * c[1:]))
    bound = n * vf * factor
    if exact > bound + tol:
        raise InvariantViolation(f"variance bound violated: exact {exact:.17g} > bound {bound:.17g}")
    return bound, exact


def heterogeneous_variance_bound(P, pi, scan, fs, tol: float = VARIANCE_TOL) -> tuple[float, float]:
    """(sum_i Var_pi(f_i) (|C^c| + 2 / gamma_MH), exact Var_pi(sum_i f_i(X_i)))."""
    factor = _bound_factor(scan)
    p = as_vector(pi)
    vs = [float(np.sum(_centered(f, p) ** 2 * p)) for f in fs]
    exact = exact_sum_variance(P, pi, fs)
    bound = sum(vs) * factor
    if exact > bound + tol:
        raise InvariantViolation(f"variance bound violated: exact {exact:.17g} > bound {bound:.17g}")
    return bound, exact


def asymptotic_variance(P, pi, f, max_cond: float = 1e12) -> float:
    """sigma^2 = <f0, f0> + 2 <f0, (I - (P - Pi))^{-1} (P - Pi) f0>, Pi = 1 pi^T."""
    A, p = as_matrix(P), as_vector(pi)
    f0 = _centered(f, p)
    N = A.shape[0]
    M = np.eye(N) - A + np.ones((N, 1)) * p[None, :]
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > max_cond:
        raise SingularResolvent(f"I - (P - Pi) is numerically singular (condition {cond:.3e})")
    rhs = A @ f0
    h = np.linalg.solve(M, rhs)
    resid = np.abs(M @ h - rhs).max()
    if resid > 1e-12 * max(1.0, np.abs(rhs).max()):
        raise SingularResolvent(f"resolvent solve residual {resid:.3e}")
    return float(np.sum(f0 * f0 * p) + 2.0 * np.sum(f0 * h * p))


def _stabilization_horizon(A, p, cap: int = 20_000) -> int:
    R = A - np.ones((A.shape[0], 1)) * p[None, :]
    Rn = np.eye(A.shape[0])
    for n in range(1, cap + 1):
        Rn = Rn @ R
        if np.abs(Rn).max() < 1e-12:
            return n
    return cap


def asymptotic_variance_bound(P, pi, scan, f, n: int | None = None, tol: float = VARIANCE_TOL) -> tuple[float, float]:
    """(4 V_f (1 + |C^c| + 4 beta^(|C^c|+1) / gamma)^2, max_{m<=n} |Var_m - m sigma^2|).

    The default horizon n is where (P - Pi)^n drops below 1e-12 entrywise.
    """
    if scan.gamma_MH <= 0:
        raise ZeroGap("MH-spectral gap is zero; asymptotic variance bound is infinite")
    A, p = as_matrix(P), as_vector(pi)
    f0 = _centered(f, p)
    vf = float(np.sum(f0 * f0 * p))
    sigma2 = asymptotic_variance(A, p, f0)
    if n is None:
        n = _stabilization_horizon(A, p)
    c = _autocovariances(A, p, f0, f0, n)
    # Var_m = m c0 + 2 sum_{l<m} (m - l) c_l = m c0 + 2 m S1(m-1) - 2 S2(m-1)
    lags = np.arange(n + 1)
    S1 = np.cumsum(c[1:])
    S2 = np.cumsum(lags[1:] * c[1:])
    m = np.arange(1, n + 1)
    var = m * c[0] + 2.0 * m * np.concatenate(([0.0], S1[:-1])) - 2.0 * np.concatenate(([0.0], S2[:-1]))
    gap = float(np.abs(var - m * sigma2).max())
    cc = len(scan.C_complement)
    bound = 4.0 * vf * (1.0 + cc + 4.0 * scan.beta_MH ** (cc + 1) / scan.gamma_MH) ** 2
    if gap > bound + tol:
        raise InvariantViolation(f"asymptotic variance bound violated: {gap:.17g} > {bound:.17g}")
    return bound, gap


# vortex-perturbed birth-death chains ----------------------------------------


class TableBounds(NamedTuple):
    lower: float
    upper: float


def closed_form_gap_bounds(model, n: int) -> TableBounds:
    """Closed-form two-sided gap bounds for a birth-death family with an n-cycle vortex.

    These describe the untruncated chain; the truncation level plays no role.
    """
    w = 1.0 - math.cos(2.0 * math.pi / n)
    if isinstance(model, Ehrenfest):
        p = model.p
        return TableBounds(1.0, 1.0 + 2.0 * w * max(p ** (-n), (1.0 - p) ** (-n)))
    if isinstance(model, MM1):
        lam, mu = model.lam, model.mu
        low = (math.sqrt(mu) - math.sqrt(lam)) ** 2
        return TableBounds(low, low + 2.0 / (1.0 - lam / mu) * (mu / lam) ** (n - 1) * w)
    if isinstance(model, MMInfinity):
        lam = model.lam
        worst = max(math.factorial(i) * lam ** (-i) for i in range(n + 1))
        return TableBounds(1.0, 1.0 + 2.0 * w * math.exp(lam) * worst)
    if isinstance(model, GWI):
        lam, r = model.lam, model.r
        worst = max(
            math.exp(math.lgamma(r) + math.lgamma(i + 1) - math.lgamma(r + i)) * (1.0 - lam) ** (-r) * lam ** (-i)
            for i in range(n + 1)
        )
        return TableBounds(1.0 - lam, 1.0 - lam + 2.0 * w * worst)
    raise TypeError(f"no closed-form bounds for {type(model).__name__}")


@dataclass(frozen=True)
class VortexGapReport:
    lower: float        # gap of the reversible birth-death part on the truncated chain
    upper: float        # gap of -M2(G) on the truncated chain (Peskun upper bound)
    gamma_exact: float  # gap of -(G + G*)/2 on the truncated chain
    gamma_bd: float
    table: TableBounds  # closed-form bounds for the untruncated chain
    upper_holds: bool   # advisory: gamma_exact <= table.upper
    tail_mass: float


def vortex_gap_bounds(model, n: int, tol: float = 1e-9, truncation_tol: float = TRUNCATION_TOL) -> VortexGapReport:
    """Gap bounds for G = G_BD + V against the exact gap on the truncated chain.

    The lower bounds gamma(G_BD) <= gamma(G) and table.lower <= gamma(G) are
    asserted; the closed-form upper bound is reported through ``upper_holds``
    only, since it is stated for the untruncated chain.
    """
    tail = model.tail_mass()
    if tail > truncation_tol:
        raise BadTruncation(f"truncation discards stationary mass {tail:.3e} > {truncation_tol:.1e}")
    G, pi = birth_death_generator(model)
    V = cyclic_vortex(n, pi)
    GBD = np.asarray(G)
    m1, m2 = generator_mh_pair(G, V, pi)
    Gfull = GBD + np.asarray(V)
    additive = 0.5 * (Gfull + adjoint(Gfull, pi))
    gamma_exact = float(mean_zero_eigenvalues(-additive, pi)[0])
    gamma_bd = self_adjoint_spectrum(m1, pi).gamma
    # <M2(G) f, f> <= <G f, f> for every f, so the gap of M2(G) bounds gamma(G) above
    gamma_m2 = float(mean_zero_eigenvalues(-np.asarray(m2), pi)[0])
    table = closed_form_gap_bounds(model, n)
    if gamma_exact < gamma_bd - tol:
        raise InvariantViolation(f"gamma(G) = {gamma_exact:.17g} below gamma(G_BD) = {gamma_bd:.17g}")
    if gamma_exact > gamma_m2 + tol:
        raise InvariantViolation(f"gamma(G) = {gamma_exact:.17g} above gamma(M2(G)) = {gamma_m2:.17g}")
    if gamma_exact < table.lower - tol:
        raise InvariantViolation(f"gamma(G) = {gamma_exact:.17g} below closed-form lower bound {table.lower:.17g}")
    return VortexGapReport(
        lower=gamma_bd,
        upper=gamma_m2,
        gamma_exact=gamma_exact,
        gamma_bd=gamma_bd,
        table=table,
        upper_holds=bool(gamma_exact <= table.upper + tol),
        tail_mass=tail,
    )
