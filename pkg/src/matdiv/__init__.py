"""matdiv: diversity of random task-matrix families and in-context learning.

The library samples matrix families induced by finite-difference and
finite-element discretizations of Schrodinger-type operators with random
potentials, decides and estimates centralizer triviality ("diversity"),
evaluates closed-form lower bounds on the triviality probability, and
trains/evaluates a one-layer linear-attention model on the induced linear
systems.  The ``matdiv`` console script wraps the sweep protocols.
"""

from .bounds import (
    AssumptionReport,
    BoundResult,
    SparsityReport,
    bound_fd,
    bound_fd2,
    bound_fem,
    bound_main,
    bound_thm2,
    cosine_basis,
    cosine_enumeration,
    verify_assumption_main,
    verify_claim_sparsity,
)
from .centralizer import (
    CentralizerReport,
    DiversityEstimate,
    commutator_operator,
    estimate_diversity_probability,
    is_trivial_centralizer,
    stacked_commutant_dim,
    stacked_commutator_matrix,
)
from .errors import ConfigError, DivergenceError, DomainError, MatdivError, NumericError, SizingError
from .icl import (
    EvalReport,
    Prompt,
    TrainConfig,
    TransformerParams,
    empirical_risk,
    evaluate,
    load_params,
    ood_suite,
    sample_prompt,
    save_params,
    tf_forward,
    train,
)
from .linalg import (
    DEFAULT_TOLERANCE,
    Tolerance,
    kron,
    nullspace_basis,
    numerical_rank,
    restrict_to_subspace,
)
from .matrixio import read_matrix, write_matrix
from .operators import (
    PotentialSpec,
    TaskDistribution,
    deterministic_part,
    fd_laplacian_1d,
    fd_laplacian_nd,
    fem_laplacian_1d,
    fem_potential_matrix,
    lognormal_field_eval,
    sample_fd_potential,
    sample_task_matrices,
    sample_task_matrix,
)
from .rng import RngStream

__version__ = "0.1.0"
