"""Metastability, leakage and conductance with spectral bounds through M1 and M2.

Sets of states are given as iterables of indices. ``Q(A, B)`` is the
probability of landing in ``B`` after one step started from pi restricted to
``A``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolated, DegenerateSet, InvariantViolation, TooLarge
from .kernels import as_matrix, as_vector, kernel_power
from .reversiblize import mh_pair
from .spectra import self_adjoint_eigh

BOUND_TOL = 1e-9
SPLIT_TOL = 1e-10
CAP_BIPARTITION = 14
CAP_MULTIWAY = 10


def _indicator(A, n: int) -> np.ndarray:
    v = np.zeros(n)
    v[list(A)] = 1.0
    return v


class Partition:
    """Disjoint non-empty blocks covering the states 0..n-1."""

    __slots__ = ("blocks", "n")

    def __init__(self, blocks, n: int):
        blocks = tuple(frozenset(int(x) for x in b) for b in blocks)
        seen: set = set()
        for b in blocks:
            if not b:
                raise ValueError("partition blocks must be non-empty")
            if seen & b:
                raise ValueError(f"blocks overlap on {sorted(seen & b)}")
            seen |= b
        if seen != set(range(n)):
            missing = sorted(set(range(n)) - seen)
            extra = sorted(seen - set(range(n)))
            raise ValueError(f"blocks do not cover 0..{n - 1} exactly (missing {missing}, extra {extra})")
        self.blocks = blocks
        self.n = n

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __repr__(self) -> str:
        return f"Partition({[sorted(b) for b in self.blocks]!r})"


def _as_partition(D, n: int) -> Partition:
    return D if isinstance(D, Partition) else Partition(D, n)


def flow(P, pi, A, B) -> float:
    """Q(A, B) = <P 1_A, 1_B>_pi / pi(A), and 0 when pi(A) = 0."""
    M, p = as_matrix(P), as_vector(pi)
    a, b = _indicator(A, p.shape[0]), _indicator(B, p.shape[0])
    mass = float(a @ p)
    if mass <= 0:
        return 0.0
    return float((a * p) @ M @ b) / mass


def partition_metastability(P, pi, D) -> float:
    """m(D) = sum_i Q(A_i, A_i)."""
    D = _as_partition(D, as_vector(pi).shape[0])
    return float(sum(flow(P, pi, A, A) for A in D))


def conductance(P, pi, A) -> float:
    """Phi(A) = Q(A, A^c) = 1 - Q(A, A)."""
    return 1.0 - flow(P, pi, A, A)


@dataclass(frozen=True)
class MetastabilityBounds:
    lower: float
    upper: float
    value: float
    rho: tuple          # rho_2, ..., rho_n
    a: float
    c: float
    lambda_first: tuple  # dominant eigenvalues of M1
    lambda_second: tuple  # dominant eigenvalues of M2
    diagnostics: dict = field(default_factory=dict, compare=False)


def metastability_bounds(P, pi, D, a: float | None = None, tol: float = BOUND_TOL) -> MetastabilityBounds:
    """Two-sided spectral bounds on m(D) from the dominant spectra of M1 and M2.

    ``1 + sum_j rho_j lambda_j(M2) + c <= m(D) <= 1 + sum_j lambda_j(M1)`` over
    j = 2..|D|, where rho_j is the squared pi-norm of the projection of the j-th
    eigenvector of M2 onto the block indicators and ``c = a sum_j (1 - rho_j)``.
    The lower bound needs ``M2 - a I`` positive semidefinite off the dominant
    eigenspace, so ``a`` defaults to the smallest eigenvalue of M2.
    """
    p = as_vector(pi)
    N = p.shape[0]
    D = _as_partition(D, N)
    k = len(D)
    m1, m2 = mh_pair(P, p)
    w1, _ = self_adjoint_eigh(m1, p)
    w2, phi2 = self_adjoint_eigh(m2, p)
    if a is None:
        a = float(w2[-1])
    if a <= -1.0:
        raise AssumptionViolated(f"band floor a = {a:.17g} must exceed -1")
    if k < N and a >= w2[k - 1] - SPLIT_TOL:
        raise AssumptionViolated(
            f"no spectral split: a = {a:.17g} is not below the dominant eigenvalue {w2[k - 1]:.17g}"
        )
    if k < N and a > w2[-1] + SPLIT_TOL:
        raise AssumptionViolated(f"a = {a:.17g} exceeds the smallest eigenvalue {w2[-1]:.17g} of M2")
    # chi_i = 1_{A_i} / sqrt(pi(A_i)) is a pi-orthonormal basis of the block span
    chi = np.column_stack([_indicator(A, N) / np.sqrt(p[list(A)].sum()) for A in D])
    coeff = chi.T @ (phi2[:, :k] * p[:, None])  # <chi_i, phi_j>_pi
    rho = np.sum(coeff ** 2, axis=0)[1:]
    c = a * float(np.sum(1.0 - rho)) + 0.0
    lower = 1.0 + float(np.sum(rho * w2[1:k])) + c
    upper = 1.0 + float(np.sum(w1[1:k]))
    value = partition_metastability(P, p, D)
    if not (lower - tol <= value <= upper + tol):
        raise InvariantViolation(f"metastability {value:.17g} outside [{lower:.17g}, {upper:.17g}]")
    return MetastabilityBounds(
        lower=lower,
        upper=upper,
        value=value,
        rho=tuple(rho.tolist()),
        a=a,
        c=c,
        lambda_first=tuple(w1[:k].tolist()),
        lambda_second=tuple(w2[:k].tolist()),
        diagnostics={"spectrum_first": w1.tolist(), "spectrum_second": w2.tolist()},
    )


def leakage(P, pi, A, t: int = 1) -> float:
    """l(A, t) = ||1_A - P^t 1_A||_{L1(pi)} / (2 pi(A) (1 - pi(A)))."""
    p = as_vector(pi)
    a = _indicator(A, p.shape[0])
    mass = float(a @ p)
    if mass <= 0.0 or mass >= 1.0 - 1e-15:
        raise DegenerateSet(f"leakage needs 0 < pi(A) < 1, got {mass:.17g}")
    Pt = as_matrix(kernel_power(P, t))
    return float(np.sum(np.abs(a - Pt @ a) * p)) / (2.0 * mass * (1.0 - mass))


def psi_vector(pi, A) -> np.ndarray:
    """sqrt(pi(B)/pi(A)) 1_A - sqrt(pi(A)/pi(B)) 1_B for B the complement of A."""
    p = as_vector(pi)
    a = _indicator(A, p.shape[0])
    ma = float(a @ p)
    mb = 1.0 - ma
    if ma <= 0.0 or mb <= 0.0:
        raise DegenerateSet(f"psi needs 0 < pi(A) < 1, got {ma:.17g}")
    return np.sqrt(mb / ma) * a - np.sqrt(ma / mb) * (1.0 - a)


@dataclass(frozen=True)
class LeakageBounds:
    lower: float
    upper: float
    value: float
    gamma_A: float
    upper_certified: bool  # non-dominant spectrum of M2(P^t) is nonnegative

    @property
    def lower_holds(self) -> bool:
        return self.lower - BOUND_TOL <= self.value

    @property
    def upper_holds(self) -> bool:
        return self.value <= self.upper + BOUND_TOL


def _check_two_split(w, label):
    if w.shape[0] >= 2 and w[0] - w[1] < SPLIT_TOL:
        raise AssumptionViolated(f"{label}: top eigenvalue is not simple")
    if w.shape[0] >= 3 and w[1] - w[2] < SPLIT_TOL:
        raise AssumptionViolated(f"{label}: second eigenvalue is not separated from the rest")
    if w[-1] <= -1.0:
        raise AssumptionViolated(f"{label}: smallest eigenvalue {w[-1]:.17g} is not above -1")


def leakage_bounds(P, pi, A, t: int = 1, strict: bool = True) -> LeakageBounds:
    """1 - lambda_2(M1(P^t)) <= l(A, t) <= 1 - gamma_A^2 lambda_2(M2(P^t)).

    ``gamma_A`` is the pi-inner product of ``psi_vector(pi, A)`` with the second
    eigenvector of M2(P^t). The upper bound rests on M2(P^t) being positive
    semidefinite below its two dominant eigenvalues; ``upper_certified`` reports
    whether that holds. With ``strict`` the lower bound is always enforced and
    the upper bound whenever it is certified.
    """
    p = as_vector(pi)
    Pt = kernel_power(P, t)
    m1, m2 = mh_pair(Pt, p)
    w1, _ = self_adjoint_eigh(m1, p)
    w2, phi2 = self_adjoint_eigh(m2, p)
    _check_two_split(w1, "M1(P^t)")
    _check_two_split(w2, "M2(P^t)")
    psi = psi_vector(p, A)
    gA = float(np.sum(psi * phi2[:, 1] * p))
    lower = 1.0 - float(w1[1])
    upper = 1.0 - gA ** 2 * float(w2[1])
    value = leakage(Pt, p, A, 1)
    certified = bool(w2.shape[0] < 3 or w2[-1] >= -SPLIT_TOL)
    out = LeakageBounds(lower, upper, value, gA, certified)
    if strict:
        if not out.lower_holds:
            raise InvariantViolation(f"leakage {value:.17g} below lower bound {lower:.17g}")
        if certified and not out.upper_holds:
            raise InvariantViolation(f"leakage {value:.17g} above certified upper bound {upper:.17g}")
    return out


def _subset_conductances(P, pi):
    M, p = as_matrix(P), as_vector(pi)
    N = p.shape[0]
    masks = np.arange(1, 2 ** N - 1)
    B = ((masks[:, None] >> np.arange(N)[None, :]) & 1).astype(float)
    mass = B @ p
    F = p[:, None] * M
    inside = np.einsum("sx,xy,sy->s", B, F, B)
    return masks, mass, 1.0 - inside / mass


def conductance_profile(P, pi, k: int = 2, cap2: int = CAP_BIPARTITION, capk: int = CAP_MULTIWAY) -> float:
    """k-way expansion: min over k disjoint non-empty sets of the largest conductance.

    For k = 2 this equals min over A with 0 < pi(A) <= 1/2 of Phi(A), since
    stationarity gives pi(A) Phi(A) = pi(A^c) Phi(A^c). For k >= 3 the sets need
    not cover the state space.
    """
    N = as_vector(pi).shape[0]
    if not (2 <= k <= N):
        raise ValueError(f"k must lie in [2, {N}], got {k}")
    if k == 2:
        if N > cap2:
            raise TooLarge(f"{N} states exceeds the bipartition cap {cap2}")
        masks, mass, phi = _subset_conductances(P, pi)
        return float(phi[mass <= 0.5 + 1e-15].min())
    if N > capk:
        raise TooLarge(f"{N} states exceeds the k-way cap {capk}")
    masks, _, phi = _subset_conductances(P, pi)
    full = (1 << N) - 1
    value = np.full(full + 1, np.inf)
    value[masks] = phi
    value[full] = 0.0  # Phi of the whole space
    levels = np.unique(value[1:])

    def feasible(tau):
        good = (value <= tau).tolist()
        # pack[mask] = most disjoint good sets inside mask
        pack = [0] * (full + 1)
        for mask in range(1, full + 1):
            low = mask & -mask
            best = pack[mask ^ low]
            rest = mask ^ low
            sub = rest
            while True:
                s = sub | low
                if good[s]:
                    cand = 1 + pack[mask ^ s]
                    if cand > best:
                        best = cand
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            pack[mask] = best
        return pack[full] >= k

    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


@dataclass(frozen=True)
class CheegerBounds:
    lower: float
    upper: float
    constant: float
    advisory_upper: bool = True


def cheeger_bounds(P, pi, k: int, constant: float = 1.0) -> CheegerBounds:
    """(1 - lambda_k(M1)) / 2 and constant * k^4 * sqrt(1 - lambda_k(M2)).

    Only the lower bound is a guaranteed inequality; the constant in the upper
    bound is unspecified, so it is reported as advisory.
    """
    p = as_vector(pi)
    m1, m2 = mh_pair(P, p)
    w1, _ = self_adjoint_eigh(m1, p)
    w2, _ = self_adjoint_eigh(m2, p)
    if not (1 <= k <= p.shape[0]):
        raise ValueError(f"k must lie in [1, {p.shape[0]}]")
    lower = max(0.0, (1.0 - float(w1[k - 1])) / 2.0)
    upper = constant * k ** 4 * float(np.sqrt(max(1.0 - float(w2[k - 1]), 0.0)))
    return CheegerBounds(lower, upper, constant)


def all_subsets(n: int):
    """Non-empty proper subsets of 0..n-1 as tuples."""
    for r in range(1, n):
        yield from itertools.combinations(range(n), r)
