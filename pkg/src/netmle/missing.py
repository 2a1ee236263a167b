"""Missing-observation designs: sampling probabilities, masks and hold-out pair sets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DimensionError, DomainError
from .genmodel import bernoulli_matrix
from .netcore import Labeling, SymZeroDiagMatrix, n_pairs


@dataclass(frozen=True, eq=False)
class SamplingDesign:
    """How pairs are observed.

    kind ``uniform`` observes each pair with probability ``p``; ``dyad``
    with probability ``P[z(i), z(j)]``; ``explicit`` carries ``pi``.
    """

    kind: str
    p: float | None = None
    P: np.ndarray | None = None
    z: Labeling | None = None
    pi: SymZeroDiagMatrix | None = None

    def __post_init__(self):
        if self.kind == "uniform":
            if self.p is None or not (0.0 <= self.p <= 1.0):
                raise DomainError(f"uniform design needs p in [0, 1], got {self.p}")
        elif self.kind == "dyad":
            P = np.array(self.P, dtype=float)
            if self.z is None or P.shape != (self.z.k, self.z.k):
                raise DimensionError("dyad design needs a k x k matrix P matching z")
            if not np.array_equal(P, P.T) or np.any((P < 0) | (P > 1)):
                raise DomainError("dyad probabilities must be symmetric and in [0, 1]")
            object.__setattr__(self, "P", P)
        elif self.kind == "explicit":
            if self.pi is None or not self.pi.is_probability():
                raise DomainError("explicit design needs a probability matrix pi")
        else:
            raise DomainError(f"unknown design kind {self.kind!r}")


def uniform_design(p):
    return SamplingDesign("uniform", p=float(p))


def dyad_design(P, z: Labeling):
    return SamplingDesign("dyad", P=P, z=z)


def explicit_design(pi: SymZeroDiagMatrix):
    return SamplingDesign("explicit", pi=pi)


def design_to_pi(d: SamplingDesign, n: int) -> SymZeroDiagMatrix:
    if d.kind == "uniform":
        return SymZeroDiagMatrix.constant(n, d.p)
    if d.kind == "dyad":
        if d.z.n != n:
            raise DimensionError(f"labeling has {d.z.n} nodes, expected {n}")
        i, j = np.triu_indices(n, 1)
        lab = d.z.labels
        return SymZeroDiagMatrix(n, d.P[lab[i], lab[j]])
    if d.pi.n != n:
        raise DimensionError(f"explicit pi has {d.pi.n} nodes, expected {n}")
    return d.pi


def sample_mask(pi: SymZeroDiagMatrix, seed: int) -> SymZeroDiagMatrix:
    """Independent ``Bernoulli(Pi_ij)`` observation indicators."""
    return bernoulli_matrix(pi, seed, rng.MASK)


def mask_exo_centered(n: int, sampled_nodes) -> SymZeroDiagMatrix:
    """Observe pair ``(i, j)`` iff ``i`` or ``j`` is a sampled node.

    Entries of this mask are dependent through the node set, unlike the
    independent-entry designs above.
    """
    nodes = np.asarray(sorted(set(int(v) for v in sampled_nodes)), dtype=np.int64)
    if nodes.size and (nodes[0] < 0 or nodes[-1] >= n):
        raise DomainError(f"sampled nodes must lie in [0, {n - 1}]")
    member = np.zeros(n, dtype=bool)
    member[nodes] = True
    i, j = np.triu_indices(n, 1)
    return SymZeroDiagMatrix(n, (member[i] | member[j]).astype(float))


def sample_omega(n: int, seed: int) -> np.ndarray:
    """Uniform random set of exactly ``n`` distinct pairs, as an ``(n, 2)`` array.

    Rows are ``(i, j)`` with ``i < j``, sorted lexicographically.
    """
    if n < 4:
        raise DomainError(f"hold-out set of n pairs needs n >= 4, got {n}")
    idx = rng.stream(seed, rng.OMEGA).choice(n_pairs(n), size=n, replace=False)
    idx.sort()
    i, j = np.triu_indices(n, 1)
    return np.column_stack([i[idx], j[idx]])
