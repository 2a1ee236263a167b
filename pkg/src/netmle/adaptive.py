"""Data-driven clamp bounds, the small-entry threshold rule, the bandwidth rule for k,
and the binned block approximation of a Hölder graphon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateSampleError, DimensionError, DomainError
from .fit import FitConfig, FitResult, fit_exact, fit_local_search
from .genmodel import Graphon, LatentPositions
from .netcore import Labeling, SymZeroDiagMatrix, pair_index

# the clamp interval must stay inside (0, 1)
RHO_CAP = 1.0 - 1e-6


@dataclass(frozen=True, eq=False)
class SparsityEstimate:
    d_hat: float
    rho_hat: float
    gamma_hat: float
    omega: np.ndarray


@dataclass(frozen=True, eq=False)
class BlockApproximation:
    theta_bc: SymZeroDiagMatrix
    z_star: Labeling
    kl_bound_rhs: float


def _omega_index(omega, n):
    omega = np.asarray(omega, dtype=np.int64).reshape(-1, 2)
    i, j = omega[:, 0], omega[:, 1]
    if np.any(i == j) or np.any((omega < 0) | (omega >= n)):
        raise DomainError("hold-out pairs must be distinct nodes in range")
    idx = pair_index(i, j, n)
    if np.unique(idx).size != idx.size:
        raise DomainError("hold-out pairs must be distinct")
    return idx


def estimate_sparsity(a: SymZeroDiagMatrix, omega, n: int) -> SparsityEstimate:
    """Average of ``A`` over the ``n`` hold-out pairs, inflated and deflated by ``log(n)^{1/5}``."""
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    if a.n != n:
        raise DimensionError(f"adjacency has {a.n} nodes, expected {n}")
    idx = _omega_index(omega, n)
    if idx.size != n:
        raise DomainError(f"hold-out set must have exactly n={n} pairs, got {idx.size}")
    d_hat = float(a.upper[idx].sum()) / n
    if d_hat == 0.0:
        raise DegenerateSampleError("no edge observed on the hold-out pairs; bounds would be 0")
    f = math.log(n) ** 0.2
    return SparsityEstimate(d_hat, f * d_hat, d_hat / f, np.asarray(omega).reshape(-1, 2))


def fit_adaptive(a, omega, k: int, x: SymZeroDiagMatrix | None = None, *, restarts=10,
                 max_sweeps=100, seed=0, objective="kl", exact=False) -> FitResult:
    """Restricted MLE with estimated bounds, fitted on the pairs outside ``omega``.

    ``x`` defaults to full observation. The estimate is stored under
    ``diagnostics["sparsity"]``; ``rho_hat`` is capped just below 1.
    """
    n = a.n
    est = estimate_sparsity(a, omega, n)
    x = SymZeroDiagMatrix.constant(n, 1.0) if x is None else x
    keep = x.upper.copy()
    keep[_omega_index(omega, n)] = 0.0
    rho = min(est.rho_hat, RHO_CAP)
    gamma = min(est.gamma_hat, rho)
    cfg = FitConfig(k, gamma, rho, restarts=restarts, max_sweeps=max_sweeps, seed=seed,
                    objective=objective)
    fitter = fit_exact if exact else fit_local_search
    res = fitter(a, x.with_upper(keep), cfg)
    return replace(res, diagnostics={**res.diagnostics, "sparsity": est,
                                     "gamma": gamma, "rho": rho})


def gamma_tradeoff(n: int, k: int, rho: float) -> float:
    """Lower clamp ``n^{-2/3} rho^{2/3} (k^2 + n log k)^{1/3}``."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if k < 2:
        raise DomainError(f"the threshold rule needs k >= 2 (log k > 0), got {k}")
    if not (0.0 < rho < 1.0):
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    return n ** (-2.0 / 3.0) * rho ** (2.0 / 3.0) * (k * k + n * math.log(k)) ** (1.0 / 3.0)


def choose_k(n: int, rho: float, alpha: float) -> int:
    """Bias-variance choice ``ceil(n^{1/(1+a)} rho^{1/(2+2a)})`` with ``a = min(alpha, 1)``."""
    if n < 2 or not (0.0 < rho < 1.0) or alpha <= 0:
        raise DomainError(f"need n >= 2, rho in (0, 1), alpha > 0; got {n}, {rho}, {alpha}")
    a = min(alpha, 1.0)
    return max(1, math.ceil(n ** (1.0 / (1.0 + a)) * rho ** (1.0 / (2.0 + 2.0 * a))))


def bin_labels(zeta: LatentPositions, k: int) -> Labeling:
    """Equal-width bins ``[a/k, (a+1)/k)``, last bin closed at 1."""
    return Labeling(np.minimum(np.floor(zeta.zeta * k).astype(np.int64), k - 1), k)


def graphon_block_approx(w: Graphon, rho: float, zeta: LatentPositions, k: int) -> BlockApproximation:
    """Binned ``k``-block approximation and its KL bound.

    Node ``i`` in bin ``a`` (1-based) is represented by the point ``a / k``;
    step graphons are evaluated by their left limit there, so bins aligned
    with the steps reproduce the graphon exactly.
    """
    if w.c_inf <= 0:
        raise DomainError("the block approximation bound needs inf W > 0")
    if w.holder_alpha is None or w.holder_m is None:
        raise DomainError("the block approximation bound needs known Hölder parameters")
    if not (0.0 < rho <= 1.0 - w.c_inf):
        raise DomainError(f"rho must lie in (0, 1 - inf W], got {rho}")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    z = bin_labels(zeta, k)
    rep = (z.labels + 1) / k
    i, j = np.triu_indices(zeta.n, 1)
    theta_bc = SymZeroDiagMatrix(zeta.n, rho * w(rep[i], rep[j], left_limit=True))
    a = min(w.holder_alpha, 1.0)
    n = zeta.n
    rhs = 4.0 * n * n * rho * w.holder_m**2 / (w.c_inf * (1.0 - rho)) * k ** (-2.0 * a)
    return BlockApproximation(theta_bc, z, rhs)
