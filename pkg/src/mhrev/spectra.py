"""Spectra of pi-self-adjoint operators and the gap quantities built from them.

A pi-self-adjoint matrix ``K`` is similar to the symmetric matrix
``S = D^{1/2} K D^{-1/2}`` with ``D = diag(pi)``, so its spectrum is real and
any symmetric eigensolver applies. Quantities on the mean-zero subspace are
computed by compressing ``S`` onto the orthogonal complement of ``sqrt(pi)``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvariantViolation, NoConvergence, NotSelfAdjoint, PreconditionViolated
from .kernels import (
    RateGenerator,
    adjoint,
    as_matrix,
    as_vector,
    is_irreducible,
    time_reversal,
)

SELF_ADJOINT_TOL = 1e-8
#: strict inequalities defining the set C are tested as value < 1 - tol
MEMBERSHIP_TOL = 1e-9
#: eigenvalue magnitudes below this are snapped to zero before taking k-th roots
ZERO_TOL = 1e-12
CONFIDENCE_TOL = 1e-6


def jacobi_eigh(S, tol: float = 1e-13, max_sweeps: int = 100):
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Returns ``(w, V)`` with ``w`` ascending and orthonormal columns in ``V``.
    Stops once the off-diagonal Frobenius norm falls below ``tol * ||S||_F``.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if n < 2 or scale == 0.0:
        return np.diag(A).copy(), V
    target = tol * scale
    for _ in range(max_sweeps):
        # summed directly; ||A||^2 - ||diag A||^2 cancels catastrophically near convergence
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off < target:
            w = np.diag(A).copy()
            order = np.argsort(w, kind="stable")
            return w[order], V[:, order]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p].copy(), A[q].copy()
                A[p] = c * rp - s * rq
                A[q] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def _eigh(S, method: str):
    if method == "lapack":
        return np.linalg.eigh(S)
    if method == "jacobi":
        return jacobi_eigh(S)
    raise ValueError(f"unknown eigensolver {method!r}")


def symmetrize(K, pi, tol: float = SELF_ADJOINT_TOL) -> np.ndarray:
    """D^{1/2} K D^{-1/2}, after checking that K is pi-self-adjoint."""
    A, p = as_matrix(K), as_vector(pi)
    s = np.sqrt(p)
    S = s[:, None] * A / s[None, :]
    asym = np.abs(S - S.T).max() if S.size else 0.0
    if asym > tol * max(1.0, np.abs(S).max()):
        raise NotSelfAdjoint(f"operator is not pi-self-adjoint (asymmetry {asym:.3e})")
    return 0.5 * (S + S.T)


def _complement_basis(pi) -> np.ndarray:
    # Householder reflector sending e_0 to sqrt(pi); its other columns span L2_0
    u = np.sqrt(as_vector(pi))
    v = u.copy()
    v[0] -= 1.0
    nv = v @ v
    H = np.eye(u.shape[0])
    if nv > 0:
        H -= 2.0 * np.outer(v, v) / nv
    return H[:, 1:]


def mean_zero_eigenvalues(K, pi, method: str = "lapack", symmetric=None) -> np.ndarray:
    """Eigenvalues of K restricted to pi-mean-zero functions, ascending."""
    S = symmetrize(K, pi) if symmetric is None else symmetric
    Q = _complement_basis(pi)
    C = Q.T @ S @ Q
    return _eigh(0.5 * (C + C.T), method)[0]


@dataclass(frozen=True)
class SpectrumReport:
    """Spectrum of a pi-self-adjoint operator.

    For a kernel, ``lambda_min`` and ``lambda_max_sub`` are the extreme
    eigenvalues on mean-zero functions, ``gamma = 1 - lambda_max_sub`` and
    ``gamma_star = 1 - beta``. For a rate generator ``G`` the report describes
    ``-G``: eigenvalues are nonnegative, ``gamma`` is the smallest eigenvalue on
    mean-zero functions and ``gamma_star`` is undefined (nan).
    """

    eigenvalues: tuple
    lambda_min: float
    lambda_max_sub: float
    beta: float
    gamma: float
    gamma_star: float
    generator: bool = False


def self_adjoint_spectrum(K, pi, method: str = "lapack") -> SpectrumReport:
    generator = isinstance(K, RateGenerator)
    A = -as_matrix(K) if generator else as_matrix(K)
    S = symmetrize(A, pi)
    full = _eigh(S, method)[0][::-1]
    sub = mean_zero_eigenvalues(A, pi, method, symmetric=S)
    lam = float(sub[0]) if sub.size else 0.0
    Lam = float(sub[-1]) if sub.size else 0.0
    beta = max(abs(lam), Lam)
    if generator:
        return SpectrumReport(tuple(full.tolist()), lam, Lam, beta, lam, float("nan"), True)
    return SpectrumReport(tuple(full.tolist()), lam, Lam, beta, 1.0 - Lam, 1.0 - beta)


def self_adjoint_eigh(K, pi, method: str = "lapack"):
    """Eigenvalues (descending) and pi-orthonormal eigenvectors as columns.

    Each eigenvector is signed so that its largest-magnitude entry is positive.
    """
    p = as_vector(pi)
    w, V = _eigh(symmetrize(K, p), method)
    w, V = w[::-1], V[:, ::-1]
    phi = V / np.sqrt(p)[:, None]
    idx = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[idx, np.arange(phi.shape[1])])
    signs[signs == 0] = 1.0
    return w, phi * signs[None, :]


def right_spectral_gap(P, pi, method: str = "lapack") -> float:
    """1 - Lambda((P + P*) / 2)."""
    A = as_matrix(P)
    R = 0.5 * (A + adjoint(A, pi))
    return float(1.0 - mean_zero_eigenvalues(R, pi, method)[-1])


class PseudoSpectralGap(NamedTuple):
    value: float
    k: int


def pseudo_spectral_gap(P, pi, n_max: int = 100) -> PseudoSpectralGap:
    """max over k <= n_max of gamma(P*^k P^k) / k, with the maximizing k."""
    scan = mh_spectral_gap(P, pi, n_max)
    return PseudoSpectralGap(scan.gamma_ps, scan.ps_argmax)


@dataclass(frozen=True)
class GapRecord:
    k: int
    Lambda_M1: float
    lambda_M2: float
    Lambda_M1_root: float
    abs_lambda_M2_root: float
    ps_term: float
    in_C: bool

    @property
    def mh_term(self) -> float:
        return max(self.Lambda_M1_root, self.abs_lambda_M2_root)


@dataclass(frozen=True)
class GapScanResult:
    n_max: int
    per_k: tuple
    C_complement: frozenset
    t_star: int
    beta_MH: float
    gamma_MH: float
    gamma_ps: float
    ps_argmax: int
    converged: bool
    tol: float = MEMBERSHIP_TOL
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def beta_argmax(self) -> int | None:
        inside = [r for r in self.per_k if r.in_C]
        if not inside:
            return None
        return max(inside, key=lambda r: r.mh_term).k


def _root(value: float, k: int, zero_tol: float) -> float:
    if abs(value) <= zero_tol:
        return 0.0
    return float(np.copysign(abs(value) ** (1.0 / k), value))


def _scan_one(k: int, Pk: np.ndarray, pi: np.ndarray, tol: float, zero_tol: float) -> GapRecord:
    Pks = adjoint(Pk, pi)
    m1 = np.minimum(Pk, Pks)
    np.fill_diagonal(m1, 0.0)
    np.fill_diagonal(m1, 1.0 - m1.sum(axis=1))
    m2 = Pk + Pks - m1
    Q = _complement_basis(pi)
    s = np.sqrt(pi)

    def sub(K):
        S = s[:, None] * K / s[None, :]
        C = Q.T @ (0.5 * (S + S.T)) @ Q
        return np.linalg.eigvalsh(0.5 * (C + C.T))

    Lam1 = float(sub(m1)[-1])
    lam2 = float(sub(m2)[0])
    Lps = float(sub(Pks @ Pk)[-1])
    in_C = abs(lam2) < 1.0 - tol and Lam1 < 1.0 - tol
    return GapRecord(
        k=k,
        Lambda_M1=Lam1,
        lambda_M2=lam2,
        Lambda_M1_root=_root(Lam1, k, zero_tol),
        abs_lambda_M2_root=_root(abs(lam2), k, zero_tol),
        ps_term=(1.0 - Lps) / k,
        in_C=in_C,
    )


def _worker_count(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("MHREV_THREADS")
    return max(1, int(env)) if env else 1


def mh_spectral_gap(
    P,
    pi,
    n_max: int = 100,
    tol: float = MEMBERSHIP_TOL,
    zero_tol: float = ZERO_TOL,
    workers: int | None = None,
) -> GapScanResult:
    """Scan k = 1..n_max for the MH-spectral gap and the pseudo-spectral gap.

    ``M1(P^k)`` and ``M2(P^k)`` are built afresh from ``P^k`` at each step.
    Eigenvalues within ``zero_tol`` of zero are snapped to zero before taking
    k-th roots, since a root of rounding noise is far from zero. Independent
    steps may run on ``workers`` threads (default from ``MHREV_THREADS``);
    records are always assembled in index order.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    A, p = as_matrix(P), as_vector(pi)
    time_reversal(A, p)  # stationarity check
    nthreads = _worker_count(workers)
    records = []
    Pk = A.copy()
    batch = max(1, 4 * nthreads)
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        k = 1
        while k <= n_max:
            mats = []
            for j in range(k, min(n_max, k + batch - 1) + 1):
                mats.append((j, Pk))
                if j < n_max:
                    Pk = Pk @ A
                    Pk = Pk / Pk.sum(axis=1, keepdims=True)
            if nthreads == 1:
                records.extend(_scan_one(j, M, p, tol, zero_tol) for j, M in mats)
            else:
                records.extend(pool.map(lambda jm: _scan_one(jm[0], jm[1], p, tol, zero_tol), mats))
            k += len(mats)
    Pn = mats[-1][1]
    converged = bool(np.abs(Pn - p[None, :]).max() < CONFIDENCE_TOL)
    comp = frozenset(r.k for r in records if not r.in_C)
    inside = [r.mh_term for r in records if r.in_C]
    beta = max(inside) if inside else 1.0
    beta = min(max(beta, 0.0), 1.0)
    ps = [r.ps_term for r in records]
    arg = int(np.argmax(ps))
    return GapScanResult(
        n_max=n_max,
        per_k=tuple(records),
        C_complement=comp,
        t_star=max(comp) if comp else 0,
        beta_MH=beta,
        gamma_MH=1.0 - beta,
        gamma_ps=float(min(max(ps[arg], 0.0), 1.0)),
        ps_argmax=arg + 1,
        converged=converged,
        tol=tol,
    )


class WeylSandwich(NamedTuple):
    L: float
    U: float
    gamma_lower: float
    gamma_upper: float
    gamma: float


def _full_spectra(P, pi, method="lapack"):
    from .reversiblize import mh_pair

    m1, m2 = mh_pair(P, pi)
    A = as_matrix(P)
    e1 = _eigh(symmetrize(m1, pi), method)[0][::-1]
    e2 = _eigh(symmetrize(m2, pi), method)[0][::-1]
    es = _eigh(symmetrize(A + adjoint(A, pi), pi), method)[0][::-1]
    return e1, e2, es


def weyl_min_slack(P, pi, method: str = "lapack") -> float:
    """Smallest slack over every Weyl inequality for P + P* = M1 + M2.

    Upper: lambda_i(P+P*) <= lambda_j(M1) + lambda_k(M2) whenever i + 1 = j + k.
    Lower: lambda_i(P+P*) >= lambda_l(M1) + lambda_m(M2) whenever i + n = l + m.
    Indices are 1-based over eigenvalues in descending order.
    """
    e1, e2, es = _full_spectra(P, pi, method)
    n = es.shape[0]
    J, K = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    total = e1[:, None] + e2[None, :]
    worst = np.inf
    for i in range(1, n + 1):
        up = total[J + K == i + 1]
        if up.size:
            worst = min(worst, float(up.min() - es[i - 1]))
        lo = total[J + K == i + n]
        if lo.size:
            worst = min(worst, float(es[i - 1] - lo.max()))
    return worst


def weyl_sandwich(P, pi, method: str = "lapack", tol: float = 1e-10) -> WeylSandwich:
    """Bounds on the right spectral gap from the spectra of M1 and M2.

    L is the largest lambda_l(M1) + lambda_m(M2) over l + m = n + 2 and U the
    smaller of lambda_1(M1) + lambda_2(M2) and lambda_2(M1) + lambda_1(M2).
    Then 1 - U/2 <= gamma(P) <= 1 - L/2.
    """
    e1, e2, es = _full_spectra(P, pi, method)
    n = es.shape[0]
    if n < 2:
        raise ValueError("need at least two states")
    L = max(e1[l - 1] + e2[n + 2 - l - 1] for l in range(2, n + 1))
    U = min(e1[0] + e2[1], e1[1] + e2[0])
    lam2 = es[1]
    if lam2 > U + tol or lam2 < L - tol:
        raise InvariantViolation(f"Weyl inequality violated: L={L:.17g}, lambda_2(P+P*)={lam2:.17g}, U={U:.17g}")
    gamma = right_spectral_gap(P, pi, method)
    return WeylSandwich(float(L), float(U), float(1.0 - U / 2.0), float(1.0 - L / 2.0), gamma)


def lazy_contraction_check(P, pi, tol: float = 1e-10) -> bool:
    """Whether the smallest eigenvalue of M2(P) is at least -1 for a lazy ergodic P."""
    from .reversiblize import mh_second

    A = as_matrix(P)
    d = np.diag(A)
    if np.any(d < 0.5 - 1e-12):
        x = int(np.argmin(d))
        raise PreconditionViolated(f"kernel is not lazy: P({x},{x}) = {d[x]:.17g} < 1/2")
    if not is_irreducible(A):
        raise PreconditionViolated("kernel is not irreducible")
    w = _eigh(symmetrize(mh_second(A, pi), pi), "lapack")[0]
    return bool(w[0] >= -1.0 - tol)
