"""Discretized Schrodinger-type operators and the task matrices they induce.

Two discretization routes are provided.  The finite-difference (FD) route
lives on a uniform grid with 1/M spacing per axis and supports any spatial
dimension D; its random potential is a diagonal matrix.  The finite-element
(FEM) route projects onto piecewise-linear hat functions on a uniform mesh
of M points in one dimension; its random potential is the tridiagonal
Galerkin matrix of a piecewise-constant coefficient.

A task matrix is the fixed part (see :func:`deterministic_part`) plus one
sampled potential matrix; :func:`sample_task_matrix` draws one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, SizingError
from .linalg import MAX_ELEMENTS, kron
from .rng import RngStream

__all__ = [
    "BERNOULLI_POINT",
    "PIECEWISE_BERNOULLI",
    "SEPARABLE_SUM",
    "LOGNORMAL_FIELD",
    "POTENTIAL_KINDS",
    "PotentialSpec",
    "TaskDistribution",
    "fd_laplacian_1d",
    "fd_laplacian_nd",
    "fem_laplacian_1d",
    "fem_potential_matrix",
    "deterministic_part",
    "sample_fd_potential",
    "sample_task_matrix",
    "sample_task_matrices",
    "lognormal_field_eval",
]

FD = "FD"
FEM = "FEM"

BERNOULLI_POINT = "BernoulliPoint"
PIECEWISE_BERNOULLI = "PiecewiseConstantBernoulli"
SEPARABLE_SUM = "SeparableSum"
LOGNORMAL_FIELD = "LognormalField"

BERNOULLI_KINDS = frozenset({BERNOULLI_POINT, PIECEWISE_BERNOULLI, SEPARABLE_SUM})
POTENTIAL_KINDS = BERNOULLI_KINDS | {LOGNORMAL_FIELD}


@dataclass(frozen=True)
class PotentialSpec:
    """The law of the random potential.

    Bernoulli kinds draw independent values equal to ``a`` with probability
    ``p`` and ``b`` with probability ``1 - p`` at each evaluation site
    (grid points for FD, mesh subintervals for FEM).  ``SeparableSum``
    additionally sums ``terms`` independent separable products when D > 1.
    ``LognormalField`` evaluates ``exp(g(x))`` for a truncated random sine
    series ``g``; see :func:`lognormal_field_eval`.

    ``a == b`` is permitted as a deliberately degenerate potential (the
    sampled matrices become deterministic), which is useful for variance
    checks.
    """

    kind: str
    p: float | None = None
    a: float | None = None
    b: float | None = None
    terms: int | None = None
    alpha: float | None = None
    beta: float | None = None
    truncation: int | None = None

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.kind in BERNOULLI_KINDS:
            if self.p is None or not 0.0 < self.p < 1.0:
                raise DomainError("Bernoulli potentials need 0 < p < 1")
            if self.a is None or self.b is None or not 0.0 < self.a <= self.b:
                raise DomainError("Bernoulli potentials need 0 < a <= b")
            if self.kind == SEPARABLE_SUM:
                if self.terms is None:
                    object.__setattr__(self, "terms", 1)
                if self.terms < 1:
                    raise DomainError("terms must be a positive integer")
            elif self.terms is not None:
                raise DomainError(f"terms is only meaningful for {SEPARABLE_SUM}")
        else:
            if self.alpha is None or self.alpha < 0:
                raise DomainError("lognormal potentials need alpha >= 0")
            if self.beta is None or self.beta <= 0:
                raise DomainError("lognormal potentials need beta > 0")
            if self.truncation is not None and self.truncation < 1:
                raise DomainError("truncation must be >= 1")

    @classmethod
    def bernoulli_point(cls, p, a=1.0, b=2.0):
        return cls(kind=BERNOULLI_POINT, p=p, a=a, b=b)

    @classmethod
    def piecewise_bernoulli(cls, p, a=1.0, b=2.0):
        return cls(kind=PIECEWISE_BERNOULLI, p=p, a=a, b=b)

    @classmethod
    def separable_sum(cls, p, a=1.0, b=2.0, terms=1):
        return cls(kind=SEPARABLE_SUM, p=p, a=a, b=b, terms=terms)

    @classmethod
    def lognormal_field(cls, alpha, beta, truncation=None):
        return cls(kind=LOGNORMAL_FIELD, alpha=alpha, beta=beta, truncation=truncation)


@dataclass(frozen=True)
class TaskDistribution:
    """A matrix law: discretization method, grid size M, dimension D, potential."""

    method: str
    M: int
    D: int
    potential: PotentialSpec

    def __post_init__(self):
        if self.method not in (FD, FEM):
            raise DomainError(f"method must be {FD!r} or {FEM!r}, got {self.method!r}")
        if self.method == FEM:
            if self.D != 1:
                raise DomainError("the FEM construction is one-dimensional only")
            if self.M < 3:
                raise DomainError("FEM requires M >= 3")
        else:
            if self.M < 2:
                raise DomainError("FD requires M >= 2")
            if self.D < 1:
                raise DomainError("D must be >= 1")
            if float(self.M) ** (2 * self.D) > MAX_ELEMENTS:
                raise SizingError(f"M**D = {self.M}**{self.D} is beyond the size budget")
        if self.potential.kind == LOGNORMAL_FIELD and self.D != 1:
            raise DomainError("lognormal potentials are supported in one dimension only")
        if self.potential.kind == SEPARABLE_SUM and self.method != FD:
            raise DomainError("separable-sum potentials are defined for the FD method only")

    @property
    def d(self) -> int:
        """System size: M**D for FD, M for FEM."""
        return self.M**self.D if self.method == FD else self.M


def fd_laplacian_1d(M: int) -> np.ndarray:
    """Second-difference matrix on M grid points: M**2 * tridiag(1, -2, 1)."""
    if M < 2:
        raise DomainError("fd_laplacian_1d requires M >= 2")
    t = -2.0 * np.eye(M) + np.eye(M, k=1) + np.eye(M, k=-1)
    return float(M) ** 2 * t


def fd_laplacian_nd(M: int, D: int) -> np.ndarray:
    """Kronecker-sum extension of :func:`fd_laplacian_1d` to a D-dimensional grid.

    Returns ``sum_i I_{M**(i-1)} (x) L1 (x) I_{M**(D-i)}`` of size M**D, where
    ``L1 = fd_laplacian_1d(M)``.  Symmetric; equals ``fd_laplacian_1d(M)``
    when D is 1.
    """
    if D < 1:
        raise DomainError("fd_laplacian_nd requires D >= 1")
    if float(M) ** (2 * D) > MAX_ELEMENTS:
        raise SizingError(f"fd_laplacian_nd({M}, {D}) is beyond the size budget")
    l1 = fd_laplacian_1d(M)
    total = np.zeros((M**D, M**D))
    for i in range(1, D + 1):
        total += kron(kron(np.eye(M ** (i - 1)), l1), np.eye(M ** (D - i)))
    return total


def fem_laplacian_1d(M: int) -> np.ndarray:
    """Stiffness matrix of the hat basis on a uniform mesh of M points.

    Interior rows follow ``(M - 1) * tridiag(-1, 2, -1)``; the two boundary
    rows come from the half hats supported on a single subinterval, giving
    corner entries ``M - 1``.  Symmetric positive semidefinite.
    """
    if M < 3:
        raise DomainError("fem_laplacian_1d requires M >= 3")
    h_inv = float(M - 1)
    s = 2.0 * np.eye(M) - np.eye(M, k=1) - np.eye(M, k=-1)
    s[0, 0] = 1.0
    s[-1, -1] = 1.0
    return h_inv * s


def fem_potential_matrix(values, M: int) -> np.ndarray:
    """Galerkin matrix of multiplication by a piecewise-constant coefficient.

    ``values`` holds one coefficient per mesh subinterval (length M - 1).
    The result is tridiagonal with prefactor ``1 / (6 (M - 1))``: corner
    diagonal entries ``2 v_1`` and ``2 v_{M-1}``, interior diagonal entries
    ``2 (v_{k-1} + v_k)``, and off-diagonal entries ``v_k``.  Every entry
    agrees with quadrature of the hat-function products against the
    coefficient, which is the shape the standard mass matrix takes when all
    values are 1.
    """
    if M < 3:
        raise DomainError("fem_potential_matrix requires M >= 3")
    v = np.asarray(values, dtype=float)
    if v.shape != (M - 1,):
        raise DomainError(f"expected {M - 1} subinterval values, got shape {v.shape}")
    out = np.zeros((M, M))
    diag = np.zeros(M)
    diag[0] = 2.0 * v[0]
    diag[-1] = 2.0 * v[-1]
    diag[1:-1] = 2.0 * (v[:-1] + v[1:])
    out[np.arange(M), np.arange(M)] = diag
    out[np.arange(M - 1), np.arange(1, M)] = v
    out[np.arange(1, M), np.arange(M - 1)] = v
    return out / (6.0 * (M - 1))


@lru_cache(maxsize=64)
def _fixed_part(method: str, M: int, D: int) -> np.ndarray:
    k = -fd_laplacian_nd(M, D) if method == FD else -fem_laplacian_1d(M)
    k.setflags(write=False)
    return k


def deterministic_part(dist: TaskDistribution) -> np.ndarray:
    """The fixed summand shared by every sample of ``dist``."""
    return _fixed_part(dist.method, dist.M, dist.D).copy()


def _field_exponent(xs, alpha: float, beta: float, draws) -> np.ndarray:
    """sum_i draws[i] * (i**2 pi**2 + alpha)**(-beta/2) * sin(i pi x), vectorized in x."""
    draws = np.asarray(draws, dtype=float)
    i = np.arange(1, draws.size + 1, dtype=float)
    coeff = draws * (i**2 * math.pi**2 + alpha) ** (-beta / 2.0)
    return np.sin(np.outer(np.asarray(xs, dtype=float), i * math.pi)) @ coeff


def lognormal_field_eval(x: float, alpha: float, beta: float, truncation: int, draws) -> float:
    """Evaluate the lognormal random field exp(g(x)) for given series draws.

    ``g(x) = sum_{i=1}^{truncation} draws[i] (i**2 pi**2 + alpha)**(-beta/2) sin(i pi x)``,
    so the result is strictly positive, and equals 1 at x = 0 and x = 1.
    """
    if truncation < 1:
        raise DomainError("truncation must be >= 1")
    draws = np.asarray(draws, dtype=float)
    if draws.size < truncation:
        raise DomainError(f"need at least {truncation} draws, got {draws.size}")
    return float(np.exp(_field_exponent([x], alpha, beta, draws[:truncation])[0]))


def _bernoulli_values(gen: np.random.Generator, spec: PotentialSpec, size: int) -> np.ndarray:
    # value a with probability p, b with probability 1 - p
    return np.where(gen.random(size) < spec.p, spec.a, spec.b)


def _fd_potential_diagonal(dist: TaskDistribution, gen: np.random.Generator) -> np.ndarray:
    spec = dist.potential
    M, D = dist.M, dist.D
    if spec.kind == LOGNORMAL_FIELD:
        xs = np.arange(1, M + 1, dtype=float) / M
        trunc = spec.truncation if spec.truncation is not None else M
        return np.exp(_field_exponent(xs, spec.alpha, spec.beta, gen.standard_normal(trunc)))
    terms = spec.terms if spec.kind == SEPARABLE_SUM else 1
    total = np.zeros(M**D)
    for _ in range(terms):
        diag = _bernoulli_values(gen, spec, M)
        for _ in range(D - 1):
            diag = np.kron(diag, _bernoulli_values(gen, spec, M))
        total += diag
    return total


def _fem_potential_values(dist: TaskDistribution, gen: np.random.Generator) -> np.ndarray:
    spec = dist.potential
    n = dist.M - 1
    if spec.kind == LOGNORMAL_FIELD:
        midpoints = (np.arange(1, n + 1, dtype=float) - 0.5) / n
        trunc = spec.truncation if spec.truncation is not None else dist.M
        return np.exp(_field_exponent(midpoints, spec.alpha, spec.beta, gen.standard_normal(trunc)))
    return _bernoulli_values(gen, spec, n)


def sample_fd_potential(dist: TaskDistribution, rng: RngStream) -> np.ndarray:
    """Draw one diagonal FD potential matrix.

    For D = 1 the diagonal holds independent point values of the potential.
    For D > 1 it is a sum of ``terms`` Kronecker products of independent
    per-axis diagonals (a single product unless the kind is SeparableSum).
    """
    if dist.method != FD:
        raise DomainError("sample_fd_potential requires an FD distribution")
    return np.diag(_fd_potential_diagonal(dist, rng.generator()))


def _sample_task(dist: TaskDistribution, gen: np.random.Generator) -> np.ndarray:
    fixed = _fixed_part(dist.method, dist.M, dist.D)
    if dist.method == FD:
        v = np.diag(_fd_potential_diagonal(dist, gen))
    else:
        v = fem_potential_matrix(_fem_potential_values(dist, gen), dist.M)
    return fixed + v


def sample_task_matrix(dist: TaskDistribution, rng: RngStream) -> np.ndarray:
    """Draw one task matrix: deterministic_part(dist) plus a sampled potential."""
    return _sample_task(dist, rng.generator())


def sample_task_matrices(dist: TaskDistribution, count: int, rng: RngStream) -> list[np.ndarray]:
    """Draw ``count`` independent task matrices from a single substream."""
    if count < 1:
        raise DomainError("count must be >= 1")
    gen = rng.generator()
    return [_sample_task(dist, gen) for _ in range(count)]
