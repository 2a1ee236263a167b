import numpy as np

from netmle.netcore import SymZeroDiagMatrix, n_pairs


def planted6():
    """Two planted triangles on six nodes: ones inside blocks, zeros across."""
    lab = np.array([0, 0, 0, 1, 1, 1])
    dense = (lab[:, None] == lab[None, :]).astype(float)
    np.fill_diagonal(dense, 0)
    return SymZeroDiagMatrix.from_dense(dense), lab


def full(n):
    return SymZeroDiagMatrix.constant(n, 1.0)


def random_data(gen, n, p_edge=0.5, p_obs=1.0):
    m = n_pairs(n)
    a = SymZeroDiagMatrix(n, (gen.random(m) < p_edge).astype(float))
    x = SymZeroDiagMatrix(n, (gen.random(m) < p_obs).astype(float))
    return a, x
