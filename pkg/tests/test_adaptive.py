import math

import numpy as np
import pytest

from _helpers import full
from netmle import rng
from netmle.adaptive import (
    RHO_CAP, bin_labels, choose_k, estimate_sparsity, fit_adaptive, gamma_tradeoff,
    graphon_block_approx,
)
from netmle.errors import DegenerateSampleError, DomainError
from netmle.fit import FitConfig, fit_local_search
from netmle.genmodel import (
    LatentPositions, affine_graphon, constant_graphon, planted_partition_graphon,
    sample_adjacency, sample_zeta, step_graphon, theta_from_blockmodel, theta_from_graphon,
)
from netmle.missing import sample_omega
from netmle.netcore import BlockModel, Labeling, SymZeroDiagMatrix, frob, kl_weighted, pair_index

LOG100_FIFTH = 1.3572165188988267


def adjacency_with_omega_edges(n, omega, count):
    up = np.zeros(n * (n - 1) // 2)
    up[pair_index(omega[:count, 0], omega[:count, 1], n)] = 1.0
    return SymZeroDiagMatrix(n, up)


class TestSparsity:
    def test_worked_example(self):
        om = sample_omega(100, 0)
        est = estimate_sparsity(adjacency_with_omega_edges(100, om, 12), om, 100)
        assert est.d_hat == pytest.approx(0.12, abs=1e-15)
        assert est.rho_hat == pytest.approx(0.12 * LOG100_FIFTH, rel=1e-14)
        assert est.gamma_hat == pytest.approx(0.12 / LOG100_FIFTH, rel=1e-14)
        assert est.rho_hat == pytest.approx(0.162866, abs=1e-6)
        assert est.gamma_hat == pytest.approx(0.088416, abs=1e-6)

    def test_all_ones(self):
        om = sample_omega(10, 1)
        assert estimate_sparsity(SymZeroDiagMatrix.constant(10, 1.0), om, 10).d_hat == 1.0

    def test_n3_ordering(self):
        om = np.array([[0, 1], [0, 2], [1, 2]])
        est = estimate_sparsity(adjacency_with_omega_edges(3, om, 1), om, 3)
        assert est.d_hat == pytest.approx(1 / 3)
        assert est.gamma_hat < est.d_hat < est.rho_hat

    def test_errors(self):
        om = sample_omega(10, 2)
        with pytest.raises(DegenerateSampleError):
            estimate_sparsity(SymZeroDiagMatrix.constant(10, 0.0), om, 10)
        with pytest.raises(DomainError):
            estimate_sparsity(SymZeroDiagMatrix.constant(10, 1.0), om[:5], 10)
        with pytest.raises(DomainError):
            estimate_sparsity(SymZeroDiagMatrix.constant(10, 1.0), np.vstack([om[:9], om[:1]]), 10)

    def test_bracket_ordering(self):
        for n in range(3, 200, 7):
            om = sample_omega(max(n, 4), n) if n >= 4 else np.array([[0, 1], [0, 2], [1, 2]])
            nn = max(n, 4) if n >= 4 else 3
            est = estimate_sparsity(SymZeroDiagMatrix.constant(nn, 0.5), om, nn)
            assert est.gamma_hat < est.rho_hat

    def test_concentration(self):
        n, rho = 500, 0.1
        w = affine_graphon(0.3, 0.5)
        ok = 0
        for t in range(200):
            s = rng.derive_seed(77, t)
            th = theta_from_graphon(w, rho, sample_zeta(n, s))
            a = sample_adjacency(th, s)
            om = sample_omega(n, s)
            d_hat = estimate_sparsity(a, om, n).d_hat
            ok += abs(d_hat - th.upper[pair_index(om[:, 0], om[:, 1], n)].mean()) <= 3 * math.sqrt(rho / n)
        assert ok >= 190


class TestFitAdaptive:
    def _planted(self, n, seed):
        th = theta_from_blockmodel(BlockModel([[0.9, 0.1], [0.1, 0.9]],
                                              Labeling([0] * (n // 2) + [1] * (n - n // 2), 2)))
        return sample_adjacency(th, seed)

    def test_clamp_and_determinism(self):
        a = self._planted(8, 3)
        om = sample_omega(8, 3)
        res = fit_adaptive(a, om, 2, seed=4)
        est = res.diagnostics["sparsity"]
        th = res.theta_hat.upper
        assert np.all((th >= est.gamma_hat) & (th <= est.rho_hat))
        again = fit_adaptive(a, om, 2, seed=4)
        assert again.model.z == res.model.z and again.objective_value == res.objective_value

    def test_rho_cap(self):
        a = SymZeroDiagMatrix.constant(6, 1.0)
        res = fit_adaptive(a, sample_omega(6, 0), 1, exact=True)
        assert res.diagnostics["rho"] == RHO_CAP

    def test_omega_excluded_from_fit(self):
        a = self._planted(10, 5)
        om = sample_omega(10, 5)
        res = fit_adaptive(a, om, 2, seed=1, exact=True)
        x = full(10).upper.copy()
        x[pair_index(om[:, 0], om[:, 1], 10)] = 0
        from netmle.fit import objective
        assert res.objective_value == pytest.approx(
            objective(a, SymZeroDiagMatrix(10, x), res.model), rel=1e-12)

    def test_comparable_to_known_bounds(self):
        n, rho = 64, 0.2
        w = constant_graphon(1.0)
        d = rho
        f = math.log(n) ** 0.2
        adaptive, known = [], []
        for t in range(50):
            s = rng.derive_seed(5, t)
            th = theta_from_graphon(w, rho, sample_zeta(n, s))
            a = sample_adjacency(th, s)
            res_a = fit_adaptive(a, sample_omega(n, s), 2, seed=s)
            res_k = fit_local_search(a, full(n), FitConfig(2, d / f, d * f, seed=s))
            adaptive.append(frob(th, res_a.theta_hat))
            known.append(frob(th, res_k.theta_hat))
        assert np.mean(adaptive) <= 2 * np.mean(known)


class TestTradeoffAndK:
    def test_gamma_example(self):
        assert gamma_tradeoff(100, 2, 0.1) == pytest.approx(0.041853365837125362, rel=1e-12)

    def test_gamma_limits(self):
        assert gamma_tradeoff(100, 3, 1e-12) < 1e-7
        assert gamma_tradeoff(100, 3, 0.2) / gamma_tradeoff(100, 3, 0.1) == pytest.approx(2 ** (2 / 3))
        with pytest.raises(DomainError):
            gamma_tradeoff(100, 1, 0.1)

    def test_choose_k_examples(self):
        assert choose_k(100, 0.1, 1.0) == 6
        assert choose_k(100, 0.01, 0.5) == 5
        assert choose_k(100, 0.1, 5.0) == choose_k(100, 0.1, 1.0)

    def test_choose_k_monotone(self):
        gen = np.random.default_rng(0)
        for _ in range(200):
            n = int(gen.integers(2, 5000))
            rho = float(gen.uniform(0.001, 0.99))
            alpha = float(gen.uniform(0.05, 2))
            k = choose_k(n, rho, alpha)
            assert k >= 1
            assert choose_k(n + int(gen.integers(1, 100)), rho, alpha) >= k
            assert choose_k(n, min(0.999, rho * 1.5), alpha) >= k


class TestBlockApprox:
    def test_last_bin_closed(self):
        assert bin_labels(LatentPositions([0.999, 1.0, 0.0, 0.25]), 4).labels.tolist() == [3, 3, 0, 1]

    def test_step_aligned_exact(self):
        w = step_graphon([[0.6, 0.3], [0.3, 0.5]], holder_alpha=1.0, holder_m=0.0)
        zeta = sample_zeta(20, 1)
        for k in (2, 4, 8):
            bc = graphon_block_approx(w, 0.4, zeta, k)
            assert bc.theta_bc == theta_from_graphon(w, 0.4, zeta)
            assert kl_weighted(theta_from_graphon(w, 0.4, zeta), bc.theta_bc, full(20)) == 0.0 <= bc.kl_bound_rhs

    def test_affine_example(self):
        w = affine_graphon(0.3, 0.5)
        zeta = sample_zeta(30, 2)
        bc = graphon_block_approx(w, 0.1, zeta, 5)
        th = theta_from_graphon(w, 0.1, zeta)
        assert kl_weighted(th, bc.theta_bc, full(30)) <= bc.kl_bound_rhs

    def test_bound_random_configurations(self):
        gen = np.random.default_rng(3)
        for t in range(500):
            c0 = float(gen.uniform(0.01, 0.5))
            c1 = float(gen.uniform(-c0 + 1e-3, 1 - c0))
            w = affine_graphon(c0, c1)
            n, k = int(gen.integers(2, 51)), int(gen.integers(1, 11))
            rho = float(gen.uniform(0.01, min(0.5, 1 - w.c_inf)))
            zeta = sample_zeta(n, t)
            bc = graphon_block_approx(w, rho, zeta, k)
            th = theta_from_graphon(w, rho, zeta)
            assert kl_weighted(th, bc.theta_bc, full(n)) <= bc.kl_bound_rhs

    def test_refusals(self):
        zeta = sample_zeta(5, 0)
        with pytest.raises(DomainError):
            graphon_block_approx(affine_graphon(0.0, 0.5), 0.1, zeta, 2)
        with pytest.raises(DomainError):
            graphon_block_approx(planted_partition_graphon(2, 0.5, 0.2), 0.1, zeta, 2)
        with pytest.raises(DomainError):
            graphon_block_approx(affine_graphon(0.3, 0.5), 0.9, zeta, 2)
