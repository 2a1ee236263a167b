"""Block-model estimators: profile likelihood, exact and local-search restricted MLE,
and the least-squares competitor.

All estimators minimise, over labelings ``z`` and block matrices ``Q`` with
entries in ``[gamma, rho]``, either the observed Bernoulli KL criterion
``sum_{i<j} X_ij K(A_ij, Q_{z(i) z(j)})`` or the observed squared error.
For a fixed labeling both are minimised by the clamped block means.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _search, rng
from .errors import DimensionError, DomainError
from .netcore import BlockModel, Labeling, SymZeroDiagMatrix, kl_weighted

OBJECTIVES = ("kl", "ls")
# strict-improvement margin for local moves; guards against rounding churn
_MOVE_TOL = 1e-12


@dataclass(frozen=True)
class FitConfig:
    k: int
    gamma: float
    rho: float
    restarts: int = 10
    max_sweeps: int = 100
    seed: int = 0
    objective: str = "kl"

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if not (0.0 < self.gamma <= self.rho < 1.0):
            raise DomainError(
                f"bounds must satisfy 0 < gamma <= rho < 1, got gamma={self.gamma}, rho={self.rho}"
            )
        if self.restarts < 1 or self.max_sweeps < 1:
            raise DomainError("restarts and max_sweeps must be >= 1")
        if self.objective not in OBJECTIVES:
            raise DomainError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")


@dataclass(frozen=True, eq=False)
class FitResult:
    model: BlockModel
    theta_hat: SymZeroDiagMatrix
    objective_value: float
    n_restarts_used: int
    n_sweeps: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def _check_inputs(a, x):
    if a.n != x.n:
        raise DimensionError(f"adjacency has {a.n} nodes, mask has {x.n}")
    if not a.is_binary() or not x.is_binary():
        raise DomainError("adjacency and mask must be {0,1}-valued")


def block_sums(a: SymZeroDiagMatrix, x: SymZeroDiagMatrix, z: Labeling):
    """Observed edge counts ``E`` and observed pair counts ``M`` per block pair."""
    if z.n != a.n:
        raise DimensionError(f"labeling has {z.n} nodes, matrices have {a.n}")
    xa = x.upper * a.upper
    return (_search.packed_block_sums(xa, z.labels, z.k),
            _search.packed_block_sums(x.upper, z.labels, z.k))


def _clamped_mean(s1, m, gamma, rho, clamp=True):
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(m > 0, s1 / np.where(m > 0, m, 1.0), 0.5 * (gamma + rho))
    return np.clip(q, gamma, rho) if clamp else q


def profile_q(a, x, z: Labeling, gamma: float, rho: float, clamp: bool = True) -> np.ndarray:
    """Observed block means ``sum X A / sum X``, clamped to ``[gamma, rho]``.

    Block pairs with no observed pair get the midpoint ``(gamma + rho) / 2``.
    With ``clamp=False`` the raw means are returned (the fallback still
    applies to unobserved blocks).
    """
    if not (0.0 < gamma <= rho < 1.0):
        raise DomainError(f"bounds must satisfy 0 < gamma <= rho < 1, got {gamma}, {rho}")
    e, m = block_sums(a, x, z)
    return _clamped_mean(e, m, gamma, rho, clamp)


def objective(a, x, bm: BlockModel, objective: str = "kl") -> float:
    """Observed criterion of block model ``bm`` on data ``(a, x)``."""
    theta = bm.theta()
    if objective == "kl":
        return kl_weighted(a, theta, x)
    if objective == "ls":
        d = a.upper - theta.upper
        return float(np.dot(x.upper, d * d))
    raise DomainError(f"objective must be one of {OBJECTIVES}, got {objective!r}")


def _cost_fn(name):
    return _search.kl_block_cost if name == "kl" else _search.ls_block_cost


def _result(a, x, labels, cfg, **extra):
    z = Labeling(labels, cfg.k)
    bm = BlockModel(profile_q(a, x, z, cfg.gamma, cfg.rho), z)
    return FitResult(
        model=bm,
        theta_hat=bm.theta(),
        objective_value=objective(a, x, bm, cfg.objective),
        **extra,
    )


def fit_exact(a, x, cfg: FitConfig, budget: int = _search.ENUMERATION_BUDGET) -> FitResult:
    """Global minimiser by enumerating all ``k^n`` labelings.

    Ties go to the lexicographically smallest labeling. Raises
    BudgetExceededError when ``k^n > budget``.
    """
    _check_inputs(a, x)
    n, k = a.n, cfg.k
    _search.check_budget(n, k, budget)
    xa = SymZeroDiagMatrix(n, x.upper * a.upper).dense()
    xd = x.dense()
    cost = _cost_fn(cfg.objective)

    def batch_cost(labels):
        oh = _search.onehot(labels, k)
        e = _search.batched_block_sums(xa, oh)
        m = _search.batched_block_sums(xd, oh)
        q = _clamped_mean(e, m, cfg.gamma, cfg.rho)
        return _search.upper_sum(cost(e, m - e, q))

    labels, _ = _search.exhaustive_argmin(n, k, batch_cost, budget)
    return _result(a, x, labels, cfg, n_restarts_used=1, n_sweeps=0, converged=True,
                   diagnostics={"method": "exact", "n_labelings": k**n})


class _LocalState:
    """Incremental block statistics for single-node moves."""

    def __init__(self, xa, xd, labels, k, gamma, rho, cost):
        self.xa, self.xd = xa, xd
        self.k, self.gamma, self.rho, self.cost = k, gamma, rho, cost
        self.labels = labels.copy()
        oh = _search.onehot(labels, k)
        self.e = xa @ oh
        self.m = xd @ oh
        self.E = oh.T @ self.e
        self.M = oh.T @ self.m
        r = np.arange(k)
        self.E[r, r] *= 0.5
        self.M[r, r] *= 0.5
        self._mask = np.triu(np.ones((k, k), dtype=bool))

    def _total(self, e, m):
        q = _clamped_mean(e, m, self.gamma, self.rho)
        c = self.cost(e, m - e, q)
        return c[..., self._mask].sum(axis=-1)

    def total(self):
        return float(self._total(self.E, self.M))

    def _candidates(self, stat, vec, s):
        k = self.k
        base = stat.copy()
        base[s, :] -= vec
        base[:, s] -= vec
        base[s, s] += vec[s]
        r = np.arange(k)
        add = np.zeros((k, k, k))
        add[r, r, :] = vec
        add[r, :, r] += vec
        add[r, r, r] -= vec
        return base[None] + add

    def best_move(self, i):
        s = self.labels[i]
        et = self._candidates(self.E, self.e[i], s)
        mt = self._candidates(self.M, self.m[i], s)
        costs = self._total(et, mt)
        t = int(np.argmin(costs))
        if costs[t] < costs[s] - _MOVE_TOL * max(1.0, abs(costs[s])):
            return t, et[t], mt[t], float(costs[t])
        return None

    def apply(self, i, t, E, M):
        s = self.labels[i]
        self.labels[i] = t
        self.E, self.M = E, M
        self.e[:, s] -= self.xa[:, i]
        self.e[:, t] += self.xa[:, i]
        self.m[:, s] -= self.xd[:, i]
        self.m[:, t] += self.xd[:, i]


def _descend(state, gen, max_sweeps):
    """Greedy single-node descent; returns (trace, sweeps, converged)."""
    n = state.labels.size
    trace = [state.total()]
    for sweep in range(1, max_sweeps + 1):
        moved = False
        for i in gen.permutation(n):
            mv = state.best_move(i)
            if mv is not None:
                t, E, M, c = mv
                state.apply(i, t, E, M)
                trace.append(c)
                moved = True
        if not moved:
            return trace, sweep, True
    return trace, max_sweeps, False


def fit_local_search(a, x, cfg: FitConfig, init: Labeling | None = None) -> FitResult:
    """Multi-restart greedy label switching.

    Each restart starts from a uniform random labeling (the first restart
    from ``init`` when given) and sweeps the nodes in random order, moving
    each node to the block that most lowers the objective, until a sweep
    makes no move or ``max_sweeps`` is reached. The best restart wins; ties
    go to the lower restart index, so the result does not depend on
    scheduling.
    """
    _check_inputs(a, x)
    n, k = a.n, cfg.k
    if init is not None and (init.n != n or init.k != k):
        raise DimensionError("initial labeling does not match (n, k)")
    xa = SymZeroDiagMatrix(n, x.upper * a.upper).dense()
    xd = x.dense()
    cost = _cost_fn(cfg.objective)

    best = None
    initial = []
    for r in range(cfg.restarts):
        gen = rng.stream(cfg.seed, rng.FIT, r)
        z0 = gen.integers(0, k, size=n)
        if r == 0 and init is not None:
            z0 = init.labels.copy()
        state = _LocalState(xa, xd, z0, k, cfg.gamma, cfg.rho, cost)
        trace, sweeps, converged = _descend(state, gen, cfg.max_sweeps)
        initial.append(trace[0])
        if best is None or trace[-1] < best[1][-1]:
            best = (state.labels.copy(), trace, sweeps, converged, r)

    labels, trace, sweeps, converged, r = best
    return _result(
        a, x, labels, cfg, n_restarts_used=cfg.restarts, n_sweeps=sweeps, converged=converged,
        diagnostics={"method": "local", "best_restart": r, "trace": trace,
                     "initial_objectives": initial},
    )


def fit_least_squares(a, x, cfg: FitConfig, exact: bool = False) -> FitResult:
    """Same search as the likelihood estimator, on the squared-error criterion."""
    cfg = replace(cfg, objective="ls")
    return fit_exact(a, x, cfg) if exact else fit_local_search(a, x, cfg)


def fit(a, x, cfg: FitConfig, exact: bool = False) -> FitResult:
    return fit_exact(a, x, cfg) if exact else fit_local_search(a, x, cfg)


# -- "fitresult v1" text record ---------------------------------------------

def format_fit_result(res: FitResult) -> str:
    """Structured text: header, ``k``, 1-based labeling, ``q`` rows, objective, flags."""
    bm = res.model
    lines = [
        "fitresult v1",
        f"k {bm.k}",
        "labeling " + " ".join(str(int(v) + 1) for v in bm.z.labels),
    ]
    lines.extend("q " + " ".join(format(float(v), ".17g") for v in row) for row in bm.q)
    lines.append(f"objective {res.objective_value!r}")
    lines.append(f"restarts {res.n_restarts_used}")
    lines.append(f"sweeps {res.n_sweeps}")
    lines.append(f"converged {str(res.converged).lower()}")
    return "\n".join(lines) + "\n"


def parse_fit_result(text: str) -> dict:
    """Parse a ``fitresult v1`` record into a dict with a BlockModel under ``model``."""
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0] != ["fitresult", "v1"]:
        raise ValueError("not a 'fitresult v1' record")
    out, q = {}, []
    for key, *vals in rows[1:]:
        if key == "q":
            q.append([float(v) for v in vals])
        elif key == "labeling":
            out["labels"] = [int(v) - 1 for v in vals]
        elif key == "k":
            out["k"] = int(vals[0])
        elif key == "objective":
            out["objective"] = float(vals[0])
        elif key in ("restarts", "sweeps"):
            out[key] = int(vals[0])
        elif key == "converged":
            out["converged"] = vals[0] == "true"
    out["model"] = BlockModel(np.array(q), Labeling(out.pop("labels"), out["k"]))
    return out
