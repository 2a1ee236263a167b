"""Generative models: block models, graphons, latent positions, adjacency sampling."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import DomainError
from .netcore import BlockModel, Labeling, SymZeroDiagMatrix, n_pairs


@dataclass(frozen=True, eq=False)
class Graphon:
    """Symmetric function ``W: [0,1]^2 -> [0,1]`` with optional regularity metadata.

    ``kind`` is ``"step"`` (block matrix ``q`` with sorted interior cut
    points ``breaks``) or ``"affine"`` (``W(x, y) = c0 + c1 (x + y) / 2``).
    ``c_inf`` is the infimum of ``W``; ``holder_alpha`` and ``holder_m``
    are Hölder parameters, ``None`` when unknown.

    Step bins are right-open, ``[cut_{a-1}, cut_a)``, with the last bin
    closed at 1.
    """

    kind: str
    q: np.ndarray | None = None
    breaks: np.ndarray | None = None
    c0: float = 0.0
    c1: float = 0.0
    c_inf: float = 0.0
    holder_alpha: float | None = None
    holder_m: float | None = None
    name: str = ""
    params: dict = field(default_factory=dict)

    @property
    def sup(self) -> float:
        if self.kind == "step":
            return float(self.q.max())
        return float(max(self.c0, self.c0 + self.c1))

    @property
    def k(self) -> int:
        return self.q.shape[0] if self.kind == "step" else 0

    def bins(self, x, left_limit=False):
        """0-based step bin of each coordinate.

        With ``left_limit`` a point sitting on a cut is assigned to the bin
        on its left, i.e. the bin whose value is the left limit ``W(x-)``.
        """
        x = np.asarray(x, dtype=float)
        side = "left" if left_limit else "right"
        return np.minimum(np.searchsorted(self.breaks, x, side=side), self.k - 1)

    def __call__(self, x, y, left_limit=False):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "step":
            return self.q[self.bins(x, left_limit), self.bins(y, left_limit)]
        return self.c0 + self.c1 * (x + y) / 2.0


def step_graphon(q, breaks=None, holder_alpha=None, holder_m=None, name="step") -> Graphon:
    """Step graphon with block values ``q``; equal-width bins by default."""
    q = np.array(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DomainError(f"step graphon needs a square block matrix, got shape {q.shape}")
    if not np.array_equal(q, q.T):
        raise DomainError("step graphon block matrix must be symmetric")
    if np.any((q < 0) | (q > 1)):
        raise DomainError("step graphon values must lie in [0, 1]")
    k = q.shape[0]
    if breaks is None:
        breaks = np.arange(1, k) / k
    breaks = np.array(breaks, dtype=float).reshape(-1)
    if breaks.size != k - 1:
        raise DomainError(f"need {k - 1} cut points for {k} blocks, got {breaks.size}")
    if breaks.size and (np.any(np.diff(breaks) <= 0) or breaks[0] <= 0 or breaks[-1] >= 1):
        raise DomainError("cut points must be strictly increasing inside (0, 1)")
    if k == 1 and holder_alpha is None:
        # constant function: Hölder with M = 0 for every alpha
        holder_alpha, holder_m = 1.0, 0.0
    q.flags.writeable = False
    breaks.flags.writeable = False
    return Graphon(
        "step", q=q, breaks=breaks, c_inf=float(q.min()),
        holder_alpha=holder_alpha, holder_m=holder_m, name=name,
        params={"q": q.tolist(), "breaks": breaks.tolist()},
    )


def constant_graphon(c) -> Graphon:
    return step_graphon([[c]], name="constant")


def planted_partition_graphon(k, p, q) -> Graphon:
    """Step graphon with block matrix ``(p - q) I + q 1 1^T`` on equal bins."""
    if k < 1:
        raise DomainError("k must be >= 1")
    mat = (p - q) * np.eye(k) + q * np.ones((k, k))
    return step_graphon(mat, name="planted")


def affine_graphon(c0, c1) -> Graphon:
    """``W(x, y) = c0 + c1 (x + y) / 2``, Lipschitz with ``alpha = 1, M = |c1| / 2``."""
    lo, hi = min(c0, c0 + c1), max(c0, c0 + c1)
    if lo < 0 or hi > 1:
        raise DomainError(f"affine graphon ({c0}, {c1}) leaves [0, 1]")
    return Graphon(
        "affine", c0=float(c0), c1=float(c1), c_inf=float(lo),
        holder_alpha=1.0, holder_m=abs(c1) / 2.0, name="affine",
        params={"c0": float(c0), "c1": float(c1)},
    )


BUILTIN_GRAPHONS = {
    "step": lambda **kw: step_graphon(kw["q"], kw.get("breaks")),
    "constant": lambda **kw: constant_graphon(kw["c"]),
    "planted": lambda **kw: planted_partition_graphon(int(kw["k"]), kw["p"], kw["q"]),
    "affine": lambda **kw: affine_graphon(kw["c0"], kw["c1"]),
}


def make_graphon(kind: str, params: dict) -> Graphon:
    try:
        factory = BUILTIN_GRAPHONS[kind]
    except KeyError:
        raise DomainError(
            f"unknown graphon kind {kind!r}; expected one of {sorted(BUILTIN_GRAPHONS)}"
        ) from None
    try:
        return factory(**params)
    except KeyError as exc:
        raise DomainError(f"graphon {kind!r} is missing parameter {exc.args[0]!r}") from None


@dataclass(frozen=True, eq=False)
class LatentPositions:
    zeta: np.ndarray

    def __post_init__(self):
        zeta = np.array(self.zeta, dtype=float).reshape(-1)
        if np.any((zeta < 0) | (zeta > 1)):
            raise DomainError("latent positions must lie in [0, 1]")
        zeta.flags.writeable = False
        object.__setattr__(self, "zeta", zeta)

    @property
    def n(self):
        return self.zeta.size


def theta_from_blockmodel(bm: BlockModel) -> SymZeroDiagMatrix:
    return bm.theta()


def theta_from_graphon(w: Graphon, rho: float, zeta: LatentPositions) -> SymZeroDiagMatrix:
    """``Theta_ij = rho * W(zeta_i, zeta_j)``."""
    if not (0.0 < rho <= 1.0):
        raise DomainError(f"sparsity rho must lie in (0, 1], got {rho}")
    if rho * w.sup > 1.0:
        raise DomainError(f"rho * sup W = {rho * w.sup} exceeds 1")
    i, j = np.triu_indices(zeta.n, 1)
    z = zeta.zeta
    return SymZeroDiagMatrix(zeta.n, rho * w(z[i], z[j]))


def step_labeling(w: Graphon, zeta: LatentPositions) -> Labeling:
    """Labeling induced by binning latent positions into the step graphon's bins."""
    if w.kind != "step":
        raise DomainError("binning labeling needs a step graphon")
    return Labeling(w.bins(zeta.zeta), w.k)


def sample_zeta(n: int, seed: int) -> LatentPositions:
    if n < 2:
        raise DomainError(f"need n >= 2 latent positions, got {n}")
    return LatentPositions(rng.stream(seed, rng.LATENT).random(n))


def grid_zeta(n: int) -> LatentPositions:
    """Deterministic equally spaced positions ``(i + 1/2) / n``.

    Pushed through a step graphon they give a balanced block model.
    """
    if n < 2:
        raise DomainError(f"need n >= 2 latent positions, got {n}")
    return LatentPositions((np.arange(n) + 0.5) / n)


def bernoulli_matrix(p: SymZeroDiagMatrix, seed: int, tag: int) -> SymZeroDiagMatrix:
    if not p.is_probability():
        raise DomainError("Bernoulli parameters must lie in [0, 1]")
    u = rng.stream(seed, tag).random(n_pairs(p.n))
    return p.with_upper((u < p.upper).astype(float))


def sample_adjacency(theta: SymZeroDiagMatrix, seed: int) -> SymZeroDiagMatrix:
    """Independent ``Bernoulli(Theta_ij)`` edges for ``i < j``."""
    return bernoulli_matrix(theta, seed, rng.ADJACENCY)
