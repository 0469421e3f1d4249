"""Constructors for the chains used throughout the examples and tests."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, TooLarge
from .kernels import ProbabilityVector, RateGenerator, StochasticKernel, as_vector

TORUS_MAX_STATES = 4096


def _check_prob(p, name="p"):
    if not (0.0 < p < 1.0):
        raise BadParams(f"{name} must lie strictly between 0 and 1, got {p:.17g}")


def asymmetric_cycle(n: int, p: float) -> StochasticKernel:
    """Walk on Z/n stepping +1 with probability p and -1 with probability 1 - p."""
    if n < 3:
        raise BadParams(f"cycle needs n >= 3, got {n}")
    _check_prob(p)
    P = np.zeros((n, n))
    idx = np.arange(n)
    P[idx, (idx + 1) % n] += p
    P[idx, (idx - 1) % n] += 1.0 - p
    return StochasticKernel(P)


def torus_walk(n: int, d: int, p: float, max_states: int = TORUS_MAX_STATES) -> StochasticKernel:
    """Pick one of d coordinates uniformly and move it as the asymmetric cycle walk."""
    if d < 1:
        raise BadParams(f"torus dimension must be >= 1, got {d}")
    if n ** d > max_states:
        raise TooLarge(f"torus has {n ** d} states, cap is {max_states}")
    C = np.asarray(asymmetric_cycle(n, p))
    eye = np.eye(n)
    total = np.zeros((n ** d, n ** d))
    for axis in range(d):
        term = np.ones((1, 1))
        for j in range(d):
            term = np.kron(term, C if j == axis else eye)
        total += term
    return StochasticKernel(total / d)


def triangle() -> StochasticKernel:
    return StochasticKernel([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0]])


def dhn_labels(m: int) -> list[int]:
    return list(range(-(m - 1), m + 1))


def dhn_sampler(m: int) -> StochasticKernel:
    """Lifted sampler on labels -(m-1)..m: i -> i+1 w.p. 1 - 1/m, i -> -i w.p. 1/m.

    Label i sits at index i + m - 1; arithmetic on labels is modulo 2m, so m + 1
    wraps to -(m-1) and -m is identified with m.
    """
    if m < 2:
        raise BadParams(f"sampler needs m >= 2, got {m}")
    size = 2 * m
    P = np.zeros((size, size))

    def index(label):
        return (label + m - 1) % size

    for label in dhn_labels(m):
        x = index(label)
        P[x, index(label + 1)] += 1.0 - 1.0 / m
        P[x, index(-label)] += 1.0 / m
    return StochasticKernel(P)


def winning_streak(m: int) -> StochasticKernel:
    """States 0..m; from i go to 0 or to min(i+1, m) with probability 1/2 each."""
    if m < 2:
        raise BadParams(f"winning streak needs m >= 2, got {m}")
    P = np.zeros((m + 1, m + 1))
    P[:, 0] = 0.5
    for i in range(m):
        P[i, i + 1] += 0.5
    P[m, m] += 0.5
    return StochasticKernel(P)


def upward_skip_free() -> StochasticKernel:
    """Four-state chain that moves up at most one level per step."""
    return StochasticKernel(
        [
            [0.5, 0.5, 0.0, 0.0],
            [0.2, 0.6, 0.2, 0.0],
            [0.1, 0.3, 0.5, 0.1],
            [0.1, 0.2, 0.4, 0.3],
        ]
    )


def cyclic_vortex(n: int, pi) -> RateGenerator:
    """Divergence-free rotation on states 0..n-1: V(i, i+1 mod n) = -V(i, i) = 1/pi(i)."""
    p = as_vector(pi)
    N = p.shape[0]
    if n < 2 or n > N:
        raise BadParams(f"vortex dimension must be in [2, {N}], got {n}")
    V = np.zeros((N, N))
    for i in range(n):
        V[i, i] -= 1.0 / p[i]
        V[i, (i + 1) % n] += 1.0 / p[i]
    return RateGenerator(V)


# birth-death families -------------------------------------------------------


@dataclass(frozen=True)
class Ehrenfest:
    """Urn on {0..n}: b_i = p(n - i), d_i = (1 - p) i, binomial(n, p) stationary."""

    n: int
    p: float = 0.5
    name = "ehrenfest"

    def __post_init__(self):
        if self.n < 1:
            raise BadParams("Ehrenfest needs n >= 1")
        _check_prob(self.p)

    @property
    def size(self) -> int:
        return self.n + 1

    def birth(self, i):
        return self.p * (self.n - i)

    def death(self, i):
        return (1.0 - self.p) * i

    def log_weight(self, i):
        return (
            math.lgamma(self.n + 1) - math.lgamma(i + 1) - math.lgamma(self.n - i + 1)
            + i * math.log(self.p) + (self.n - i) * math.log1p(-self.p)
        )

    def tail_mass(self) -> float:
        return 0.0

    def gap(self) -> float:
        return 1.0


@dataclass(frozen=True)
class MM1:
    """Single-server queue truncated to {0..trunc}; geometric stationary law with ratio lam/mu."""

    lam: float
    mu: float
    trunc: int = 60
    name = "mm1"

    def __post_init__(self):
        if not (0 < self.lam < self.mu):
            raise BadParams(f"M/M/1 needs 0 < lam < mu, got lam={self.lam:.17g}, mu={self.mu:.17g}")
        if self.trunc < 1:
            raise BadParams("truncation must be >= 1")

    @property
    def size(self) -> int:
        return self.trunc + 1

    def birth(self, i):
        return self.lam if i < self.trunc else 0.0

    def death(self, i):
        return self.mu if i > 0 else 0.0

    def log_weight(self, i):
        return i * math.log(self.lam / self.mu)

    def tail_mass(self) -> float:
        return (self.lam / self.mu) ** (self.trunc + 1)

    def gap(self) -> float:
        return (math.sqrt(self.mu) - math.sqrt(self.lam)) ** 2


@dataclass(frozen=True)
class MMInfinity:
    """Infinite-server queue truncated to {0..trunc}; Poisson(lam) stationary law."""

    lam: float
    trunc: int = 40
    name = "mminf"

    def __post_init__(self):
        if self.lam <= 0:
            raise BadParams("M/M/inf needs lam > 0")
        if self.trunc < 1:
            raise BadParams("truncation must be >= 1")

    @property
    def size(self) -> int:
        return self.trunc + 1

    def birth(self, i):
        return self.lam if i < self.trunc else 0.0

    def death(self, i):
        return float(i)

    def log_weight(self, i):
        return -self.lam + i * math.log(self.lam) - math.lgamma(i + 1)

    def tail_mass(self) -> float:
        return _tail(self.log_weight, self.trunc + 1)

    def gap(self) -> float:
        return 1.0


@dataclass(frozen=True)
class GWI:
    """Galton-Watson with immigration: b_i = lam (r + i), d_i = i; negative binomial law."""

    lam: float
    r: float
    trunc: int = 80
    name = "gwi"

    def __post_init__(self):
        _check_prob(self.lam, "lam")
        if self.r <= 0:
            raise BadParams("GWI needs r > 0")
        if self.trunc < 1:
            raise BadParams("truncation must be >= 1")

    @property
    def size(self) -> int:
        return self.trunc + 1

    def birth(self, i):
        return self.lam * (self.r + i) if i < self.trunc else 0.0

    def death(self, i):
        return float(i)

    def log_weight(self, i):
        return (
            math.lgamma(self.r + i) - math.lgamma(self.r) - math.lgamma(i + 1)
            + self.r * math.log1p(-self.lam) + i * math.log(self.lam)
        )

    def tail_mass(self) -> float:
        return _tail(self.log_weight, self.trunc + 1)

    def gap(self) -> float:
        return 1.0 - self.lam


def _tail(log_weight, start: int, max_terms: int = 100_000) -> float:
    total = 0.0
    for i in range(start, start + max_terms):
        term = math.exp(log_weight(i))
        total += term
        if i > start and term < 1e-18 * max(total, 1e-300):
            break
    return total


def birth_death_generator(spec) -> tuple[RateGenerator, ProbabilityVector]:
    """Tridiagonal generator of a (truncated) birth-death family and its stationary law.

    The top state only moves down, and pi is renormalised over the window.
    """
    N = spec.size
    G = np.zeros((N, N))
    for i in range(N):
        if i + 1 < N:
            G[i, i + 1] = spec.birth(i)
        if i > 0:
            G[i, i - 1] = spec.death(i)
        G[i, i] = -G[i].sum()
    logw = np.array([spec.log_weight(i) for i in range(N)])
    w = np.exp(logw - logw.max())
    return RateGenerator(G), ProbabilityVector(w / w.sum())
