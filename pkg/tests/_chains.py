"""Random chain generators shared by the test modules."""
import numpy as np

from mhrev import StochasticKernel


def random_chain(rng, n, density=None, lazy=False):
    """Irreducible random kernel on n states; a random cycle guarantees irreducibility."""
    if density is None:
        density = rng.uniform(0.3, 1.0)
    W = rng.random((n, n)) * (rng.random((n, n)) < density)
    perm = rng.permutation(n)
    for i in range(n):
        W[perm[i], perm[(i + 1) % n]] += rng.uniform(0.1, 1.0)
    P = W / W.sum(axis=1, keepdims=True)
    if lazy:
        P = 0.5 * (np.eye(n) + P)
    return StochasticKernel(P)


def chains(seed, count, lo=3, hi=8, **kw):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield random_chain(rng, int(rng.integers(lo, hi + 1)), **kw), rng
