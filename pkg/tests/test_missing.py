import numpy as np
import pytest

from netmle.errors import DimensionError, DomainError
from netmle.genmodel import sample_adjacency
from netmle.missing import (
    design_to_pi, dyad_design, explicit_design, mask_exo_centered, sample_mask, sample_omega,
    uniform_design,
)
from netmle.netcore import Labeling, SymZeroDiagMatrix


def test_uniform_pi():
    assert np.all(design_to_pi(uniform_design(1.0), 5).upper == 1.0)
    assert np.all(design_to_pi(uniform_design(0.5), 3).upper == 0.5)


def test_dyad_pi():
    P = [[0.9, 0.5], [0.5, 0.2]]
    pi = design_to_pi(dyad_design(P, Labeling([0, 1], 2)), 2)
    assert pi[0, 1] == 0.5
    pi = design_to_pi(dyad_design(P, Labeling([0, 0, 1], 2)), 3)
    assert pi.upper.tolist() == [0.9, 0.5, 0.5]


def test_dyad_dimension():
    with pytest.raises(DimensionError):
        design_to_pi(dyad_design([[0.5]], Labeling([0, 0], 1)), 3)


def test_explicit_passthrough():
    pi = SymZeroDiagMatrix(3, [0.1, 0.2, 0.3])
    assert design_to_pi(explicit_design(pi), 3) is pi


def test_uniform_domain():
    with pytest.raises(DomainError):
        uniform_design(1.5)


def test_sample_mask_extremes_and_frequency():
    assert np.all(sample_mask(SymZeroDiagMatrix.constant(10, 1.0), 3).upper == 1)
    assert np.all(sample_mask(SymZeroDiagMatrix.constant(10, 0.0), 3).upper == 0)
    x = sample_mask(SymZeroDiagMatrix.constant(200, 0.7), 3)
    assert abs(x.upper.mean() - 0.7) <= 0.01


def test_mask_independent_of_adjacency_stream():
    # identical seeds, different domain tags: entries must be uncorrelated
    half = SymZeroDiagMatrix.constant(20, 0.5)
    a_vals, x_vals = [], []
    for seed in range(10_000 // 190 + 1):
        a_vals.append(sample_adjacency(half, seed).upper)
        x_vals.append(sample_mask(half, seed).upper)
    a_vals, x_vals = np.concatenate(a_vals), np.concatenate(x_vals)
    assert a_vals.size >= 10_000
    assert abs(np.corrcoef(a_vals, x_vals)[0, 1]) <= 0.03


def test_exo_centered_examples():
    assert np.all(mask_exo_centered(4, range(4)).upper == 1)
    assert np.all(mask_exo_centered(4, []).upper == 0)
    x = mask_exo_centered(4, [0])
    assert [x[0, 1], x[0, 2], x[0, 3]] == [1, 1, 1]
    assert [x[1, 2], x[1, 3], x[2, 3]] == [0, 0, 0]


def test_exo_centered_complement_formula():
    gen = np.random.default_rng(0)
    for _ in range(50):
        n = int(gen.integers(2, 12))
        s = np.flatnonzero(gen.random(n) < 0.3)
        out = np.ones(n, dtype=bool)
        out[s] = False
        expected = 1 - np.outer(out, out).astype(float)
        np.fill_diagonal(expected, 0)
        assert np.array_equal(mask_exo_centered(n, s).dense(), expected)


def test_exo_centered_out_of_range():
    with pytest.raises(DomainError):
        mask_exo_centered(4, [4])


def test_omega_shape_and_distinct():
    om = sample_omega(10, 1)
    assert om.shape == (10, 2)
    assert np.all(om[:, 0] < om[:, 1])
    assert len({tuple(r) for r in om}) == 10
    assert np.array_equal(om, sample_omega(10, 1))
    with pytest.raises(DomainError):
        sample_omega(3, 0)


def test_omega_inclusion_frequency():
    n, draws = 10, 10_000
    counts = np.zeros((n, n))
    for s in range(draws):
        om = sample_omega(n, s)
        counts[om[:, 0], om[:, 1]] += 1
    freq = counts[np.triu_indices(n, 1)] / draws
    assert np.all(np.abs(freq - 2 / (n - 1)) <= 0.02)


def test_uniform_design_matches_iid_scheme():
    pi = design_to_pi(uniform_design(0.3), 120)
    x = sample_mask(pi, 11)
    # i.i.d. Bernoulli(p): binomial z-score of the total count stays moderate
    m = x.upper.size
    z = (x.upper.sum() - 0.3 * m) / np.sqrt(m * 0.3 * 0.7)
    assert abs(z) < 4
