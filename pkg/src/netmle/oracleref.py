"""Oracle approximations of the true probability matrix and executable lemma checks.

The oracle ``theta_tilde`` is the block-constant matrix closest to
``theta_star`` in ``Pi``-weighted Bernoulli KL, with block values free in
``[0, 1]`` (no clamping, unlike the estimator).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _search, rng
from .errors import DimensionError, DomainError
from .netcore import (
    EQ_TOL, BlockModel, Labeling, SymZeroDiagMatrix, frob_weighted, kl_terms, kl_weighted,
)


@dataclass(frozen=True, eq=False)
class OracleResult:
    theta_tilde: SymZeroDiagMatrix
    model: BlockModel
    kl_to_truth: float


@dataclass(frozen=True, eq=False)
class ThresholdedOracle:
    theta_tilde_s: SymZeroDiagMatrix
    model: BlockModel
    n_s: int
    gamma: float


@dataclass(frozen=True)
class LemmaReport:
    lhs: float
    rhs: float
    holds: bool


def _weighted_means(s1, w, unweighted_sum, counts, fallback):
    with np.errstate(divide="ignore", invalid="ignore"):
        plain = np.where(counts > 0, unweighted_sum / np.where(counts > 0, counts, 1), fallback)
        return np.where(w > 0, s1 / np.where(w > 0, w, 1.0), plain)


def oracle_block_q(theta_star: SymZeroDiagMatrix, pi: SymZeroDiagMatrix, z: Labeling) -> np.ndarray:
    """``Pi``-weighted block means of ``theta_star``: the weighted-KL barycentres.

    A block pair with zero total weight takes the unweighted mean of its
    entries; a block pair with no node pairs at all takes the global
    weighted mean (its value never enters any matrix).
    """
    if theta_star.n != pi.n or z.n != pi.n:
        raise DimensionError("theta_star, pi and z must share n")
    lab, k = z.labels, z.k
    s1 = _search.packed_block_sums(pi.upper * theta_star.upper, lab, k)
    w = _search.packed_block_sums(pi.upper, lab, k)
    raw = _search.packed_block_sums(theta_star.upper, lab, k)
    counts = _search.packed_block_sums(np.ones_like(pi.upper), lab, k)
    tot = pi.upper.sum()
    fallback = (pi.upper @ theta_star.upper) / tot if tot > 0 else theta_star.upper.mean()
    return np.clip(_weighted_means(s1, w, raw, counts, fallback), 0.0, 1.0)


def oracle_theta_tilde(theta_star, pi, k: int, budget: int = _search.ENUMERATION_BUDGET) -> OracleResult:
    """Exhaustive weighted-KL projection of ``theta_star`` onto ``k``-block matrices."""
    if theta_star.n != pi.n:
        raise DimensionError("theta_star and pi must share n")
    n = theta_star.n
    _search.check_budget(n, k, budget)
    s1_d = SymZeroDiagMatrix(n, pi.upper * theta_star.upper).dense()
    s0_d = SymZeroDiagMatrix(n, pi.upper * (1.0 - theta_star.upper)).dense()

    def batch_cost(labels):
        oh = _search.onehot(labels, k)
        s1 = _search.batched_block_sums(s1_d, oh)
        s0 = _search.batched_block_sums(s0_d, oh)
        w = s1 + s0
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(w > 0, s1 / np.where(w > 0, w, 1.0), 0.5)
        return _search.upper_sum(_search.kl_block_cost(s1, s0, q))

    labels, _ = _search.exhaustive_argmin(n, k, batch_cost, budget)
    z = Labeling(labels, k)
    bm = BlockModel(oracle_block_q(theta_star, pi, z), z)
    tilde = bm.theta()
    return OracleResult(tilde, bm, kl_weighted(theta_star, tilde, pi))


def threshold_oracle(oracle: OracleResult, gamma: float) -> ThresholdedOracle:
    """Lift oracle block values to at least ``gamma`` and count the lifted pairs."""
    if not (0.0 < gamma <= 0.5):
        raise DomainError(f"threshold gamma must lie in (0, 1/2], got {gamma}")
    bm = oracle.model
    lifted = BlockModel(np.maximum(bm.q, gamma), bm.z)
    n_s = int(np.count_nonzero(oracle.theta_tilde.upper < gamma))
    return ThresholdedOracle(lifted.theta(), lifted, n_s, float(gamma))


def check_threshold_lemma(theta_star, pi, oracle: OracleResult, thresholded: ThresholdedOracle,
                          gamma: float) -> LemmaReport:
    """Excess divergence from lifting small oracle entries is at most ``2 gamma n_s``."""
    if not (0.0 < gamma <= 0.5):
        raise DomainError(f"threshold gamma must lie in (0, 1/2], got {gamma}")
    lhs = (kl_weighted(theta_star, thresholded.theta_tilde_s, pi)
           - kl_weighted(theta_star, oracle.theta_tilde, pi))
    rhs = 2.0 * gamma * thresholded.n_s
    return LemmaReport(lhs, rhs, bool(lhs <= rhs + EQ_TOL))


def check_kl_frobenius(theta, theta_p, pi) -> LemmaReport:
    """Weighted squared distance against ``8 max(|theta|_inf, |theta'|_inf) K_Pi``."""
    for m in (theta, theta_p):
        if np.any((m.upper <= 0) | (m.upper >= 1)):
            raise DomainError("both matrices must have entries strictly inside (0, 1)")
    lhs = frob_weighted(theta, theta_p, pi)
    rhs = 8.0 * max(theta.max_abs(), theta_p.max_abs()) * kl_weighted(theta, theta_p, pi)
    return LemmaReport(lhs, rhs, bool(lhs <= rhs + EQ_TOL))


def pointwise_kl_gap(q, qp):
    """``K(q, q') - (q - q')^2 / (8 max(q, q'))`` elementwise; nonnegative on (0,1)^2."""
    q = np.asarray(q, dtype=float)
    qp = np.asarray(qp, dtype=float)
    return kl_terms(q, qp) - (q - qp) ** 2 / (8.0 * np.maximum(q, qp))


def random_audit_instance(n, seed):
    """Random ``(theta_star, pi)`` with entries spread over (0, 1), small values included."""
    gen = rng.stream(seed, 0x55)
    m = n * (n - 1) // 2
    theta = gen.uniform(1e-3, 1.0 - 1e-3, size=m) ** gen.uniform(1.0, 3.0)
    pi = gen.uniform(0.0, 1.0, size=m)
    return SymZeroDiagMatrix(n, theta), SymZeroDiagMatrix(n, pi)


def run_audit(trials, n, k, seed, gamma=0.1, lemmas=("kl_frobenius", "threshold")):
    """Evaluate the lemma checkers on ``trials`` random instances.

    Returns a list of dicts ``{trial, lemma, lhs, rhs, holds}``.
    """
    rows = []
    for t in range(trials):
        s = rng.derive_seed(seed, t)
        theta_star, pi = random_audit_instance(n, s)
        if "kl_frobenius" in lemmas:
            other, _ = random_audit_instance(n, rng.derive_seed(s, 1))
            rep = check_kl_frobenius(theta_star, other, pi)
            rows.append({"trial": t, "lemma": "kl_frobenius", "lhs": rep.lhs, "rhs": rep.rhs,
                         "holds": rep.holds})
        if "threshold" in lemmas:
            orc = oracle_theta_tilde(theta_star, pi, k)
            thr = threshold_oracle(orc, gamma)
            rep = check_threshold_lemma(theta_star, pi, orc, thr, gamma)
            rows.append({"trial": t, "lemma": "threshold", "lhs": rep.lhs, "rhs": rep.rhs,
                         "holds": rep.holds})
    return rows
