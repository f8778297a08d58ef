"""Centralizer triviality tests and Monte Carlo diversity estimation.

A set of d x d matrices has trivial centralizer when the only matrices
commuting with every member are the scalar multiples of the identity.
Equivalently, the common kernel of the commutation operators
``X -> A X - X A`` is one-dimensional.  :func:`is_trivial_centralizer`
computes that kernel by incremental intersection, which keeps memory at
O(d**4) independent of the set size; :func:`stacked_commutant_dim` is the
direct reference route through one stacked N*d**2 x d**2 matrix and is kept
as an independent cross-check of the incremental path.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import DEFAULT_TOLERANCE, Tolerance, as_matrix, kron, nullspace_basis, numerical_rank, restrict_to_subspace
from .operators import TaskDistribution, deterministic_part, sample_task_matrices
from .rng import RngStream


@dataclass(frozen=True)
class CentralizerReport:
    d: int
    n_matrices: int
    commutant_dim: int
    trivial: bool
    tolerance: Tolerance
    augmented: bool = False


@dataclass(frozen=True)
class DiversityEstimate:
    N: int
    trials: int
    successes: int
    p_hat: float
    stderr: float


def commutator_operator(a) -> np.ndarray:
    """The d**2 x d**2 matrix sending Vec(X) to Vec(A X - X A).

    Under column-stacking Vec this is ``I (x) A - A^T (x) I``; its kernel is
    exactly the set of vectorized matrices commuting with ``a``.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DomainError(f"commutator_operator requires a square matrix, got {a.shape}")
    eye = np.eye(a.shape[0])
    return kron(eye, a) - kron(a.T, eye)


def _validate_set(mats) -> int:
    if not mats:
        raise DomainError("the matrix set must be nonempty")
    d = None
    for m in mats:
        m = np.asarray(m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"set members must be square, got shape {m.shape}")
        if d is None:
            d = m.shape[0]
        elif m.shape[0] != d:
            raise DomainError(f"set members differ in size: {d} vs {m.shape[0]}")
    return d


def stacked_commutator_matrix(mats) -> np.ndarray:
    """All commutation operators stacked vertically (N*d**2 x d**2)."""
    _validate_set(mats)
    return np.vstack([commutator_operator(m) for m in mats])


def stacked_commutant_dim(mats, tol: Tolerance = DEFAULT_TOLERANCE) -> int:
    """Common-kernel dimension via one rank computation on the stacked matrix."""
    d = _validate_set(mats)
    return d * d - numerical_rank(stacked_commutator_matrix(mats), tol)


def is_trivial_centralizer(mats, tol: Tolerance = DEFAULT_TOLERANCE, augmented: bool = False) -> CentralizerReport:
    """Decide triviality by intersecting commutation-operator kernels.

    Starts from the kernel of the first operator and restricts each further
    operator to the running intersection.  The result (dimension and flag)
    matches ranking the fully stacked matrix.  Intersection stops once the
    dimension reaches 1: every kernel contains Vec(I), so a one-dimensional
    intersection is exactly span{Vec(I)} and cannot shrink further.
    """
    d = _validate_set(mats)
    basis = nullspace_basis(commutator_operator(mats[0]), tol)
    for m in mats[1:]:
        if basis.shape[1] <= 1:
            break
        restricted = restrict_to_subspace(commutator_operator(m), basis)
        basis = basis @ nullspace_basis(restricted, tol)
    dim = basis.shape[1]
    return CentralizerReport(
        d=d,
        n_matrices=len(mats),
        commutant_dim=dim,
        trivial=dim == 1,
        tolerance=tol,
        augmented=augmented,
    )


def _trial_is_trivial(dist: TaskDistribution, N: int, augment: bool, rng: RngStream, tol: Tolerance) -> bool:
    mats = sample_task_matrices(dist, N, rng)
    if augment:
        # Intersection order does not affect the result; the deterministic
        # part goes first because its kernel prunes fastest.
        mats = [deterministic_part(dist)] + mats
    return is_trivial_centralizer(mats, tol, augmented=augment).trivial


def estimate_diversity_probability(
    dist: TaskDistribution,
    N: int,
    trials: int,
    augment_with_k: bool = False,
    rng: RngStream = RngStream(0),
    tol: Tolerance = DEFAULT_TOLERANCE,
    threads: int = 1,
) -> DiversityEstimate:
    """Monte Carlo estimate of the probability that N samples are trivial.

    Each trial draws N iid task matrices (optionally augmented with the
    deterministic part) and tests triviality.  Trial ``t`` owns the
    substream ``rng.offset(t)``, so the estimate occupies stream indices
    ``[rng.stream, rng.stream + trials)`` and is reproducible regardless of
    ``threads``.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    outcomes_for = lambda t: _trial_is_trivial(dist, N, augment_with_k, rng.offset(t), tol)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            successes = sum(pool.map(outcomes_for, range(trials)))
    else:
        successes = sum(outcomes_for(t) for t in range(trials))
    p_hat = successes / trials
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / trials)
    return DiversityEstimate(N=N, trials=trials, successes=int(successes), p_hat=p_hat, stderr=stderr)
