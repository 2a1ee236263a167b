"""Core matrix types, Bernoulli KL divergences and weighted norms.

All matrices in this package are symmetric with a zero diagonal and are
stored as their packed strict upper triangle, row-major over ``i < j``.
Nodes and block labels are 0-based in Python; the text formats written
by the CLI use 1-based labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import rel_entr

from .errors import DimensionError, DivergenceInfiniteError, DomainError

# absolute tolerance for "p = q" style equality checks
EQ_TOL = 1e-12


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i, j, n):
    """Packed index of pair ``(i, j)``, ``i != j``; works on arrays."""
    i, j = np.minimum(i, j), np.maximum(i, j)
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


def _n_from_pairs(m: int) -> int:
    n = int(round((1 + math.sqrt(1 + 8 * m)) / 2))
    if n_pairs(n) != m:
        raise DimensionError(f"{m} entries is not a triangular count")
    return n


@dataclass(frozen=True, eq=False)
class SymZeroDiagMatrix:
    """Symmetric ``n x n`` matrix with zero diagonal, packed upper triangle.

    ``upper[pair_index(i, j, n)]`` holds entry ``(i, j) == (j, i)``. The
    array is copied and made read-only on construction.
    """

    n: int
    upper: np.ndarray

    def __post_init__(self):
        if int(self.n) < 2:
            raise DomainError(f"node count must be >= 2, got {self.n}")
        upper = np.array(self.upper, dtype=float).reshape(-1)
        if upper.size != n_pairs(self.n):
            raise DimensionError(
                f"expected {n_pairs(self.n)} packed entries for n={self.n}, got {upper.size}"
            )
        upper.flags.writeable = False
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "upper", upper)

    @classmethod
    def constant(cls, n, value):
        return cls(n, np.full(n_pairs(n), float(value)))

    @classmethod
    def from_dense(cls, dense, check_symmetric=True):
        dense = np.asarray(dense, dtype=float)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {dense.shape}")
        if check_symmetric:
            if not np.array_equal(dense, dense.T):
                raise DomainError("matrix is not symmetric")
            if np.any(np.diag(dense) != 0):
                raise DomainError("matrix has a nonzero diagonal")
        n = dense.shape[0]
        return cls(n, dense[np.triu_indices(n, 1)])

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, 1)
        out[iu] = self.upper
        out[iu[::-1]] = self.upper
        return out

    def pairs(self):
        """Row and column index arrays of the packed entries."""
        return np.triu_indices(self.n, 1)

    def __getitem__(self, ij):
        i, j = ij
        if i == j:
            return 0.0
        return float(self.upper[pair_index(i, j, self.n)])

    def __len__(self):
        return self.upper.size

    def __eq__(self, other):
        if not isinstance(other, SymZeroDiagMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.upper, other.upper)

    __hash__ = None

    def __repr__(self):
        return f"SymZeroDiagMatrix(n={self.n}, upper={self.upper!r})"

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.upper)))

    def is_probability(self) -> bool:
        return bool(np.all((self.upper >= 0) & (self.upper <= 1)))

    def is_binary(self) -> bool:
        return bool(np.all((self.upper == 0) | (self.upper == 1)))

    def with_upper(self, upper):
        return SymZeroDiagMatrix(self.n, upper)


@dataclass(frozen=True, eq=False)
class Labeling:
    """Community assignment ``z: [n] -> [k]`` with 0-based labels.

    Labels need not be surjective onto ``range(k)``.
    """

    labels: np.ndarray
    k: int

    def __post_init__(self):
        if int(self.k) < 1:
            raise DomainError(f"block count must be >= 1, got {self.k}")
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise DomainError(f"labels must lie in [0, {self.k - 1}]")
        labels.flags.writeable = False
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.size

    def __eq__(self, other):
        if not isinstance(other, Labeling):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.labels, other.labels)

    __hash__ = None

    def __repr__(self):
        return f"Labeling(labels={self.labels.tolist()}, k={self.k})"

    def permuted(self, perm):
        """Relabel block ``a`` as ``perm[a]``."""
        return Labeling(np.asarray(perm)[self.labels], self.k)


@dataclass(frozen=True, eq=False)
class BlockModel:
    q: np.ndarray
    z: Labeling

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        k = self.z.k
        if q.shape != (k, k):
            raise DimensionError(f"q must be {k}x{k}, got {q.shape}")
        if not np.array_equal(q, q.T):
            raise DomainError("block matrix q is not symmetric")
        if np.any((q < 0) | (q > 1)):
            raise DomainError("block probabilities must lie in [0, 1]")
        q.flags.writeable = False
        object.__setattr__(self, "q", q)

    @property
    def k(self):
        return self.z.k

    def theta(self) -> SymZeroDiagMatrix:
        n = self.z.n
        i, j = np.triu_indices(n, 1)
        lab = self.z.labels
        return SymZeroDiagMatrix(n, self.q[lab[i], lab[j]])

    def permuted(self, perm):
        """Relabel blocks by ``perm`` and conjugate ``q`` accordingly."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return BlockModel(self.q[np.ix_(inv, inv)], self.z.permuted(perm))


def _check_same_n(*mats):
    ns = {m.n for m in mats}
    if len(ns) != 1:
        raise DimensionError(f"node counts differ: {sorted(ns)}")


def bernoulli_kl(q: float, qp: float) -> float:
    """KL divergence of Bernoulli(q) from Bernoulli(qp), with 0 log 0 = 0.

    Raises DivergenceInfiniteError when ``qp`` is 0 or 1 and differs
    from ``q``.
    """
    if not (0.0 <= qp <= 1.0):
        raise DomainError(f"reference probability {qp} outside [0, 1]")
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"probability {q} outside [0, 1]")
    if qp in (0.0, 1.0):
        if q == qp:
            return 0.0
        raise DivergenceInfiniteError(f"K({q}, {qp}) is infinite")
    return float(rel_entr(q, qp) + rel_entr(1.0 - q, 1.0 - qp))


def kl_terms(p, q):
    """Elementwise Bernoulli KL on arrays; may contain ``inf``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return rel_entr(p, q) + rel_entr(1.0 - p, 1.0 - q)


def kl_weighted(p: SymZeroDiagMatrix, q: SymZeroDiagMatrix, w: SymZeroDiagMatrix) -> float:
    """Weighted divergence ``sum_{i<j} w_ij K(p_ij, q_ij)``."""
    _check_same_n(p, q, w)
    if np.any((w.upper < 0) | (w.upper > 1)):
        raise DomainError("weights must lie in [0, 1]")
    if np.any((q.upper < 0) | (q.upper > 1)) or np.any((p.upper < 0) | (p.upper > 1)):
        raise DomainError("probability matrices must have entries in [0, 1]")
    active = w.upper > 0
    terms = kl_terms(p.upper[active], q.upper[active])
    bad = ~np.isfinite(terms)
    if bad.any():
        idx = np.flatnonzero(active)[np.argmax(bad)]
        i, j = (a[idx] for a in np.triu_indices(p.n, 1))
        raise DivergenceInfiniteError(
            f"infinite divergence at pair ({i}, {j}): K({p.upper[idx]}, {q.upper[idx]})",
            pair=(int(i), int(j)),
        )
    return float(np.dot(w.upper[active], terms))


def kl_full(p: SymZeroDiagMatrix, q: SymZeroDiagMatrix) -> float:
    """Unweighted divergence ``K(p, q)``."""
    return kl_weighted(p, q, SymZeroDiagMatrix.constant(p.n, 1.0))


def frob_weighted(a: SymZeroDiagMatrix, b: SymZeroDiagMatrix, w: SymZeroDiagMatrix) -> float:
    """Squared weighted Frobenius distance ``sum_{i<j} w_ij (a_ij - b_ij)^2``."""
    _check_same_n(a, b, w)
    if np.any((w.upper < 0) | (w.upper > 1)):
        raise DomainError("weights must lie in [0, 1]")
    d = a.upper - b.upper
    return float(np.dot(w.upper, d * d))


def frob(a: SymZeroDiagMatrix, b: SymZeroDiagMatrix) -> float:
    d = a.upper - b.upper
    return float(np.dot(d, d))


# -- "symtri v1" text format ------------------------------------------------

def format_symtri(m: SymZeroDiagMatrix) -> str:
    lines = [str(m.n)]
    lines.extend(format(float(v), ".17g") for v in m.upper)
    return "\n".join(lines) + "\n"


def parse_symtri(text: str) -> SymZeroDiagMatrix:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty symtri document")
    try:
        n = int(rows[0])
    except ValueError:
        raise ValueError(f"symtri header must be the node count, got {rows[0]!r}") from None
    values = [float(v) for v in rows[1:]]
    if len(values) != n_pairs(n):
        raise DimensionError(f"symtri: expected {n_pairs(n)} entries for n={n}, got {len(values)}")
    return SymZeroDiagMatrix(n, values)


def write_symtri(m: SymZeroDiagMatrix, path) -> None:
    Path(path).write_text(format_symtri(m))


def read_symtri(path) -> SymZeroDiagMatrix:
    return parse_symtri(Path(path).read_text())
