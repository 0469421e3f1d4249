"""Finite-state kernels, stationary distributions and the pi-weighted inner product.

States are indexed ``0..n-1``. Every type wraps a read-only numpy array and
exposes it through ``__array__`` so instances can be handed straight to numpy.
All operations accept either a typed instance or a plain array-like.
"""
from __future__ import annotations

import warnings
from collections import deque

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidKernel,
    NonPositiveStationary,
    NotStationary,
    ReducibleChain,
)

#: tolerance for structural invariants (row sums, symmetry of constructions)
STRUCT_TOL = 1e-12
#: tolerance for solved quantities (stationarity residuals)
SOLVE_TOL = 1e-10
#: above this size the stationary solve switches to power iteration
POWER_ITERATION_THRESHOLD = 2000


def _readonly(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise InvalidKernel(f"expected a {ndim}-d array, got shape {arr.shape}")
    if ndim == 2 and arr.shape[0] != arr.shape[1]:
        raise InvalidKernel(f"matrix must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidKernel("entries must be finite")
    arr.setflags(write=False)
    return arr


class ProbabilityVector:
    """Strictly positive probability vector over a finite state space."""

    __slots__ = ("values",)

    def __init__(self, values, tol: float = STRUCT_TOL):
        v = _readonly(values, 1)
        if np.any(v <= 0):
            bad = int(np.argmin(v))
            raise InvalidKernel(f"ProbabilityVector: entry {bad} is not strictly positive ({v[bad]:.17g})")
        if abs(v.sum() - 1.0) > tol:
            raise InvalidKernel(f"ProbabilityVector: entries sum to {v.sum():.17g}, not 1")
        self.values = v

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, idx):
        return self.values[idx]

    def __repr__(self) -> str:
        return f"ProbabilityVector({self.values.tolist()!r})"

    @property
    def min(self) -> float:
        return float(self.values.min())


class _SquareMatrix:
    __slots__ = ("matrix",)
    kind = "matrix"

    def __init__(self, matrix, tol: float = STRUCT_TOL):
        self.matrix = _readonly(matrix, 2)
        self._validate(tol)

    def _validate(self, tol: float) -> None:  # pragma: no cover - overridden
        pass

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __getitem__(self, idx):
        return self.matrix[idx]

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.matrix.tolist()!r})"

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def _offdiag(self) -> np.ndarray:
        return self.matrix[~np.eye(self.n, dtype=bool)]


class StochasticKernel(_SquareMatrix):
    """Row-stochastic nonnegative matrix."""

    kind = "stochastic"

    def _validate(self, tol):
        m = self.matrix
        if np.any(m < -tol):
            x, y = np.unravel_index(np.argmin(m), m.shape)
            raise InvalidKernel(f"StochasticKernel: entry ({x},{y}) is negative ({m[x, y]:.17g})")
        drift = np.abs(m.sum(axis=1) - 1.0)
        if np.any(drift > tol):
            x = int(np.argmax(drift))
            raise InvalidKernel(f"StochasticKernel: row {x} sums to {m[x].sum():.17g}, not 1")


class SignedKernel(_SquareMatrix):
    """Unit row sums, nonnegative off-diagonal, diagonal bounded below by -1."""

    kind = "signed"

    def _validate(self, tol):
        m = self.matrix
        if self.n > 1 and np.any(self._offdiag() < -tol):
            raise InvalidKernel("SignedKernel: negative off-diagonal entry")
        drift = np.abs(m.sum(axis=1) - 1.0)
        if np.any(drift > tol):
            x = int(np.argmax(drift))
            raise InvalidKernel(f"SignedKernel: row {x} sums to {m[x].sum():.17g}, not 1")
        if np.any(np.diag(m) < -1.0 - tol):
            x = int(np.argmin(np.diag(m)))
            raise InvalidKernel(f"SignedKernel: diagonal entry {x} is below -1 ({m[x, x]:.17g})")


class RateGenerator(_SquareMatrix):
    """Zero row sums and nonnegative off-diagonal rates."""

    kind = "generator"

    def _validate(self, tol):
        m = self.matrix
        if self.n > 1 and np.any(self._offdiag() < -tol):
            raise InvalidKernel("RateGenerator: negative off-diagonal rate")
        scale = np.maximum(1.0, np.abs(m).max(axis=1))
        drift = np.abs(m.sum(axis=1)) / scale
        if np.any(drift > tol):
            x = int(np.argmax(drift))
            raise InvalidKernel(f"RateGenerator: row {x} sums to {m[x].sum():.17g}, not 0")


def as_matrix(K) -> np.ndarray:
    return np.asarray(K, dtype=float)


def as_vector(pi) -> np.ndarray:
    return np.asarray(pi, dtype=float)


def is_irreducible(K) -> bool:
    """Strong connectivity of the support graph, by breadth-first reachability."""
    adj = as_matrix(K).copy()
    np.fill_diagonal(adj, 0.0)
    adj = adj > 0
    n = adj.shape[0]

    def reach(a):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for y in np.flatnonzero(a[x] & ~seen):
                seen[y] = True
                queue.append(y)
        return seen.all()

    return reach(adj) and reach(adj.T)


def _gth(A: np.ndarray) -> np.ndarray:
    # Grassmann-Taksar-Heyman elimination; touches only off-diagonal entries,
    # so it also serves rate generators and keeps entrywise relative accuracy.
    A = A.copy()
    n = A.shape[0]
    for i in range(n - 1):
        scale = A[i, i + 1:].sum()
        A[i + 1:, i] /= scale
        A[i + 1:, i + 1:] += np.outer(A[i + 1:, i], A[i, i + 1:])
    x = np.zeros(n)
    x[-1] = 1.0
    for i in range(n - 2, -1, -1):
        x[i] = x[i + 1:] @ A[i + 1:, i]
    return x / x.sum()


def _power_iteration(P: np.ndarray, tol: float = 1e-15, max_iter: int = 200_000) -> np.ndarray:
    lazy = 0.5 * (P + np.eye(P.shape[0]))
    x = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        nxt = x @ lazy
        nxt /= nxt.sum()
        if np.abs(nxt - x).max() < tol:
            return nxt
        x = nxt
    return x


def stationary_distribution(K, tol: float = SOLVE_TOL, min_mass: float = 0.0) -> ProbabilityVector:
    """Stationary distribution of an irreducible kernel or rate generator.

    Parameters
    ----------
    K : StochasticKernel, RateGenerator or array_like
        Generators are recognised by type or by zero row sums.
    tol : float
        Bound on the max-norm residual of the balance equations.
    min_mass : float
        Entries at or below this value raise ``NonPositiveStationary``.
    """
    A = as_matrix(K)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidKernel("kernel must be a square matrix")
    if not is_irreducible(A):
        raise ReducibleChain("chain is not irreducible (support graph is not strongly connected)")
    generator = isinstance(K, RateGenerator) or (
        not isinstance(K, StochasticKernel) and np.allclose(A.sum(axis=1), 0.0, atol=1e-9)
    )
    n = A.shape[0]
    if n == 1:
        return ProbabilityVector([1.0])
    if n > POWER_ITERATION_THRESHOLD and not generator:
        pi = _power_iteration(A)
    else:
        pi = _gth(A)
    if np.any(pi <= min_mass) or not np.all(np.isfinite(pi)):
        raise NonPositiveStationary(f"stationary mass {pi.min():.17g} at state {int(np.argmin(pi))}")
    if generator:
        scale = max(1.0, np.abs(A).max())
        resid = np.abs(pi @ A).max() / scale
    else:
        resid = np.abs(pi @ A - pi).max()
    if resid > tol:
        raise NotStationary(f"stationary solve residual {resid:.3e} exceeds {tol:.1e}")
    return ProbabilityVector(pi)


def stationarity_residual(K, pi) -> float:
    A, p = as_matrix(K), as_vector(pi)
    if A.shape[0] != p.shape[0]:
        raise DimensionMismatch(f"kernel has {A.shape[0]} states, pi has {p.shape[0]}")
    return float(np.abs(p @ A - p).max())


def adjoint(K, pi) -> np.ndarray:
    """pi-adjoint K*(x, y) = pi(y) K(y, x) / pi(x); works for any square matrix."""
    A, p = as_matrix(K), as_vector(pi)
    if A.shape[0] != p.shape[0]:
        raise DimensionMismatch(f"kernel has {A.shape[0]} states, pi has {p.shape[0]}")
    return (A.T * p[None, :]) / p[:, None]


def time_reversal(P, pi, tol: float = SOLVE_TOL) -> StochasticKernel:
    resid = stationarity_residual(P, pi)
    if resid > tol:
        raise NotStationary(f"||pi P - pi||_inf = {resid:.3e} exceeds {tol:.1e}")
    Ps = adjoint(P, pi)
    # row sums are pi P / pi, exact up to the stationarity residual
    Ps /= Ps.sum(axis=1, keepdims=True)
    return StochasticKernel(Ps)


def kernel_power(P, n: int) -> StochasticKernel:
    if n < 1:
        raise ValueError("kernel_power needs n >= 1")
    A = as_matrix(P)
    out = A.copy()
    for _ in range(n - 1):
        out = out @ A
    drift = np.abs(out.sum(axis=1) - 1.0).max()
    if drift > STRUCT_TOL:
        warnings.warn(f"row-sum drift {drift:.2e} in P^{n}; rows renormalised", RuntimeWarning, stacklevel=2)
        out /= out.sum(axis=1, keepdims=True)
    return StochasticKernel(out)


def is_reversible(P, pi, tol: float = SOLVE_TOL) -> bool:
    A, p = as_matrix(P), as_vector(pi)
    flow = p[:, None] * A
    return bool(np.abs(flow - flow.T).max() <= tol)


def weighted_inner_product(f, g, pi) -> float:
    """<f, g>_pi = sum_x f(x) g(x) pi(x)."""
    f, g, p = as_vector(f), as_vector(g), as_vector(pi)
    if not (f.shape == g.shape == p.shape):
        raise DimensionMismatch(f"shapes {f.shape}, {g.shape}, {p.shape} differ")
    return float(np.sum(f * g * p))
