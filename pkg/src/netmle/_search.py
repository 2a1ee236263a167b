"""Block statistics and exhaustive labeling enumeration shared by fit and oracleref."""
import numpy as np
from scipy.special import xlogy

from .errors import BudgetExceededError

ENUMERATION_BUDGET = 2_000_000
_CHUNK_CELLS = 1 << 21


def check_budget(n, k, budget=ENUMERATION_BUDGET):
    total = k**n
    if total > budget:
        raise BudgetExceededError(
            f"exhaustive search over k^n = {k}^{n} = {total} labelings exceeds budget {budget}"
        )
    return total


def packed_block_sums(values, labels, k):
    """Sum packed pair values into a symmetric ``k x k`` block matrix.

    Off-diagonal cells sum pairs with one endpoint in each block; diagonal
    cells sum within-block pairs ``i < j``.
    """
    n = labels.size
    i, j = np.triu_indices(n, 1)
    a, b = labels[i], labels[j]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    flat = np.bincount(lo * k + hi, weights=values, minlength=k * k).reshape(k, k)
    return flat + np.triu(flat, 1).T


def batched_block_sums(dense, onehot):
    """Block sums for a batch of labelings.

    ``dense`` is an ``(n, n)`` symmetric zero-diagonal matrix and
    ``onehot`` a ``(B, n, k)`` indicator array. Returns ``(B, k, k)``.
    """
    out = np.einsum("bia,ij,bjc->bac", onehot, dense, onehot, optimize=True)
    k = onehot.shape[2]
    r = np.arange(k)
    out[:, r, r] *= 0.5
    return out


def labeling_chunks(n, k):
    """Yield all labelings in ``[k]^n`` in lexicographic order, as 2-D chunks."""
    total = k**n
    chunk = max(1, _CHUNK_CELLS // max(1, n * k))
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        t = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield start, (t[:, None] // powers[None, :]) % k


def kl_block_cost(s1, s0, q):
    """``-(s1 log q + s0 log(1 - q))`` with ``0 log 0 = 0``."""
    return -(xlogy(s1, q) + xlogy(s0, 1.0 - q))


def ls_block_cost(s1, s0, q):
    """Squared residual of binary data: ``s1 (1 - q)^2 + s0 q^2``."""
    return s1 * (1.0 - q) ** 2 + s0 * q * q


def upper_sum(cells):
    """Sum the ``a <= b`` cells over the trailing two axes."""
    k = cells.shape[-1]
    mask = np.triu(np.ones((k, k), dtype=bool))
    return cells[..., mask].sum(axis=-1)


def exhaustive_argmin(n, k, batch_cost, budget=ENUMERATION_BUDGET, rel_tol=1e-12):
    """Return ``(labels, cost)`` of the lexicographically first minimiser.

    ``batch_cost`` maps a ``(B, n)`` label array to ``(B,)`` costs. Costs
    within ``rel_tol`` (relative) of the minimum count as ties, so label
    permutations that differ only by rounding resolve to the smallest
    labeling.
    """
    check_budget(n, k, budget)
    costs = np.empty(k**n)
    for start, labels in labeling_chunks(n, k):
        costs[start:start + len(labels)] = batch_cost(labels)
    best = costs.min()
    idx = int(np.flatnonzero(costs <= best + rel_tol * max(1.0, abs(best)))[0])
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx // powers) % k, float(costs[idx])


def onehot(labels, k):
    labels = np.asarray(labels)
    return (labels[..., None] == np.arange(k)).astype(float)
