"""The two Metropolis-Hastings reversiblizations and their relatives.

For a kernel ``P`` with stationary ``pi`` and time reversal ``P*``:

* ``M1`` keeps ``min(p, p*)`` off the diagonal and puts the rejected mass on
  the diagonal. It is the Metropolis kernel with proposal ``P`` and target pi.
* ``M2`` keeps ``max(p, p*)`` off the diagonal. Its diagonal is whatever makes
  ``M1 + M2 = P + P*``, so it may be negative.
"""
from __future__ import annotations

import numpy as np

from .errors import NotReversibleBase, NotStationary
from .kernels import (
    SOLVE_TOL,
    RateGenerator,
    SignedKernel,
    StochasticKernel,
    adjoint,
    as_matrix,
    as_vector,
    kernel_power,
    stationary_distribution,
    time_reversal,
)

#: ties p == p* closer than this are treated as equal when forming A_x
TIE_TOL = 1e-14


def _pi_or_solve(P, pi):
    return stationary_distribution(P) if pi is None else pi


def _first_offdiag(A: np.ndarray, As: np.ndarray) -> np.ndarray:
    m1 = np.minimum(A, As)
    np.fill_diagonal(m1, 0.0)
    return m1


def mh_first(P, pi=None) -> StochasticKernel:
    """First MH kernel: off-diagonal min(p, p*), diagonal absorbs the rejections."""
    pi = _pi_or_solve(P, pi)
    A = as_matrix(P)
    As = as_matrix(time_reversal(P, pi))
    m1 = _first_offdiag(A, As)
    np.fill_diagonal(m1, 1.0 - m1.sum(axis=1))
    return StochasticKernel(m1)


def mh_second(P, pi=None) -> SignedKernel:
    """Second MH kernel: off-diagonal max(p, p*), computed as p + p* - m1."""
    return mh_pair(P, pi)[1]


def mh_pair(P, pi=None) -> tuple[StochasticKernel, SignedKernel]:
    """Both MH kernels from a single time reversal."""
    pi = _pi_or_solve(P, pi)
    A = as_matrix(P)
    As = as_matrix(time_reversal(P, pi))
    m1 = _first_offdiag(A, As)
    np.fill_diagonal(m1, 1.0 - m1.sum(axis=1))
    m2 = A + As - m1
    return StochasticKernel(m1), SignedKernel(m2)


def acceptance_region(P, pi, x: int) -> frozenset:
    """States y with p*(x, y) < p(x, y), i.e. where the Metropolis step may reject."""
    A = as_matrix(P)
    As = as_matrix(time_reversal(P, pi))
    diff = A[x] - As[x]
    diff[x] = 0.0
    return frozenset(int(y) for y in np.flatnonzero(diff > TIE_TOL))


def acceptance_mask(P, pi) -> np.ndarray:
    """Boolean matrix whose row x is the indicator of A_x."""
    A = as_matrix(P)
    mask = (A - as_matrix(time_reversal(P, pi))) > TIE_TOL
    np.fill_diagonal(mask, False)
    return mask


def additive_reversiblization(P, pi=None) -> StochasticKernel:
    pi = _pi_or_solve(P, pi)
    S = 0.5 * (as_matrix(P) + as_matrix(time_reversal(P, pi)))
    return StochasticKernel(S)


def multiplicative_reversiblization(P, k: int = 1, pi=None) -> StochasticKernel:
    """P*^k P^k."""
    if k < 1:
        raise ValueError("multiplicative_reversiblization needs k >= 1")
    pi = _pi_or_solve(P, pi)
    Pk = kernel_power(P, k)
    Psk = time_reversal(Pk, pi)
    out = as_matrix(Psk) @ as_matrix(Pk)
    out /= out.sum(axis=1, keepdims=True)
    return StochasticKernel(out)


def generator_mh_pair(GBD, V, pi) -> tuple[RateGenerator, RateGenerator]:
    """MH pair of the vortex-perturbed generator G = GBD + V.

    The birth-death part is pi-reversible, so the first MH generator is GBD and
    the second is GBD + V + V*.
    """
    B, W, p = as_matrix(GBD), as_matrix(V), as_vector(pi)
    scale = max(1.0, np.abs(B).max(), np.abs(W).max())
    resid = np.abs(p @ (B + W)).max() / scale
    if resid > SOLVE_TOL:
        raise NotStationary(f"pi is not stationary for GBD + V (residual {resid:.3e})")
    flow = p[:, None] * B
    asym = np.abs(flow - flow.T).max()
    if asym > SOLVE_TOL:
        raise NotReversibleBase(f"GBD violates detailed balance by {asym:.3e}")
    Ws = adjoint(W, p)
    return RateGenerator(B), RateGenerator(B + W + Ws)
