"""Maximum likelihood estimation of connection probabilities in sparse networks
observed with missing entries, with simulators, oracles and a Monte-Carlo harness.
"""
from .errors import (
    BudgetExceededError, ConfigError, DegenerateSampleError, DimensionError,
    DivergenceInfiniteError, DomainError, NetMLEError,
)
from .netcore import (
    BlockModel, Labeling, SymZeroDiagMatrix, bernoulli_kl, frob_weighted, kl_weighted,
    read_symtri, write_symtri,
)
from .genmodel import (
    Graphon, LatentPositions, affine_graphon, constant_graphon, planted_partition_graphon,
    sample_adjacency, sample_zeta, step_graphon, theta_from_blockmodel, theta_from_graphon,
)
from .missing import (
    SamplingDesign, design_to_pi, mask_exo_centered, sample_mask, sample_omega,
)
from .fit import (
    FitConfig, FitResult, fit_exact, fit_least_squares, fit_local_search, objective, profile_q,
)
from .oracleref import (
    OracleResult, ThresholdedOracle, check_kl_frobenius, check_threshold_lemma, oracle_block_q,
    oracle_theta_tilde, threshold_oracle,
)
from .adaptive import (
    SparsityEstimate, choose_k, estimate_sparsity, fit_adaptive, gamma_tradeoff,
    graphon_block_approx,
)

__version__ = "0.1.0"
