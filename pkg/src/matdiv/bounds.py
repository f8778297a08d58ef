"""Closed-form lower bounds on the trivial-centralizer probability, plus
numerical verification of the sparsity and bilinear-form facts they rest on.

Every evaluator returns a :class:`BoundResult` carrying both the raw bound
value (which may be negative in the vacuous regime) and its clamp to
[0, 1], so parameter sweeps stay plottable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import kron
from .operators import BERNOULLI_KINDS, FD, TaskDistribution, sample_fd_potential
from .rng import RngStream

__all__ = [
    "BoundResult",
    "bound_main",
    "bound_thm2",
    "bound_fd",
    "bound_fd2",
    "bound_fem",
    "SparsityReport",
    "verify_claim_sparsity",
    "AssumptionReport",
    "verify_assumption_main",
    "cosine_basis",
    "cosine_enumeration",
]

#: Entries of the cosine profile vectors below this magnitude count as zero.
SPARSITY_ZERO_TOL = 1e-12

#: A bilinear form counts as zero when |form| <= this times the largest
#: potential entry (forms are sums of at most d products of O(b) entries).
BILINEAR_ZERO_REL_TOL = 1e-10

THM_MAIN = "ThmMain"
THM_2 = "Thm2"
THM_FD = "ThmFD"
THM_FD2 = "ThmFD2"
THM_FEM = "ThmFEM"


@dataclass(frozen=True)
class BoundResult:
    theorem: str
    raw_value: float
    clamped: float
    constants: dict


def _result(theorem: str, raw: float, constants: dict) -> BoundResult:
    return BoundResult(theorem=theorem, raw_value=raw, clamped=min(1.0, max(0.0, raw)), constants=constants)


def bound_main(d: int, c: float, N: int) -> BoundResult:
    """Augmented-set bound 1 - (d - 1) c**N for a generic perturbation law."""
    if d < 2:
        raise DomainError("bound_main requires d >= 2")
    if not 0.0 < c < 1.0:
        raise DomainError("bound_main requires 0 < c < 1")
    if N < 1:
        raise DomainError("bound_main requires N >= 1")
    raw = 1.0 - (d - 1) * c**N
    return _result(THM_MAIN, raw, {"c": c, "base": c, "exponent": N})


def bound_thm2(d: int, c_V: float, N: int) -> BoundResult:
    """Vanilla-set bound 1 - d (d - 1) c_V**floor(N/2) for diagonal perturbations.

    Odd N uses floor(N/2): the pairing argument behind the bound discards
    the last sample.
    """
    if d < 2:
        raise DomainError("bound_thm2 requires d >= 2")
    if not 0.0 < c_V < 1.0:
        raise DomainError("bound_thm2 requires 0 < c_V < 1")
    if N < 2:
        raise DomainError("bound_thm2 requires N >= 2")
    e = N // 2
    raw = 1.0 - d * (d - 1) * c_V**e
    return _result(THM_2, raw, {"c_V": c_V, "base": c_V, "exponent": e})


def bound_fd(M: int, D: int, p: float, N: int) -> BoundResult:
    """Augmented-set bound for the FD family: 1 - (M**D - 1) c**N.

    The constant is c = 1 / sqrt(1 + (2/3) M p (1 - p)) in one dimension
    (valid for any M >= 2) and twice that for D >= 2, which requires
    M >= 9 / (2 p (1 - p)).
    """
    if not 0.0 < p < 1.0:
        raise DomainError("bound_fd requires 0 < p < 1")
    if N < 1:
        raise DomainError("bound_fd requires N >= 1")
    if D < 1:
        raise DomainError("bound_fd requires D >= 1")
    root = math.sqrt(1.0 + (2.0 / 3.0) * M * p * (1.0 - p))
    if D == 1:
        if M < 2:
            raise DomainError("bound_fd requires M >= 2")
        c = 1.0 / root
    else:
        threshold = 9.0 / (2.0 * p * (1.0 - p))
        if M < threshold:
            raise DomainError(f"bound_fd with D >= 2 requires M >= 9/(2p(1-p)) = {threshold:.6g}, got M = {M}")
        c = 2.0 / root
    raw = 1.0 - (M**D - 1) * c**N
    return _result(THM_FD, raw, {"c": c, "base": c, "exponent": N})


def bound_fd2(M: int, p: float, N: int) -> BoundResult:
    """Vanilla-set FD bound 1 - M (M - 1) (1 - 2 p**2 (1-p)**2)**floor(N/2)."""
    if M < 2:
        raise DomainError("bound_fd2 requires M >= 2")
    if not 0.0 < p < 1.0:
        raise DomainError("bound_fd2 requires 0 < p < 1")
    if N < 2:
        raise DomainError("bound_fd2 requires N >= 2")
    c_v = 1.0 - 2.0 * p**2 * (1.0 - p) ** 2
    e = N // 2
    raw = 1.0 - M * (M - 1) * c_v**e
    return _result(THM_FD2, raw, {"c_V": c_v, "base": c_v, "exponent": e})


def bound_fem(M: int, p: float, N: int) -> BoundResult:
    """Augmented-set FEM bound 1 - (M - 1) c**N with c = 1/sqrt(1 + 2 p (1-p))."""
    if M < 5:
        raise DomainError("bound_fem requires M >= 5")
    if not 0.0 < p < 1.0:
        raise DomainError("bound_fem requires 0 < p < 1")
    if N < 1:
        raise DomainError("bound_fem requires N >= 1")
    c = 1.0 / math.sqrt(1.0 + 2.0 * p * (1.0 - p))
    raw = 1.0 - (M - 1) * c**N
    return _result(THM_FEM, raw, {"c": c, "base": c, "exponent": N})


def cosine_profile(M: int, k: int) -> np.ndarray:
    """Entrywise product cos(2 pi k j / M) cos(2 pi (k+1) j / M), j = 0..M-1."""
    j = np.arange(M, dtype=float)
    return np.cos(2.0 * math.pi * k * j / M) * np.cos(2.0 * math.pi * (k + 1) * j / M)


@dataclass(frozen=True)
class SparsityReport:
    M: int
    min_support: int
    argmin_k: int
    required: int
    passed: bool
    supports: tuple


def verify_claim_sparsity(M: int) -> SparsityReport:
    """Count nonzero entries of each cosine profile vector and compare to ceil(M/3).

    ``passed`` means the minimum support over k = 1..M-1 meets the ceil(M/3)
    floor.  The count is reported honestly: for M = 8 the k = 1 profile has
    support 2 (nonzero only at j = 0 and j = 4), so the floor is not met
    there, while every other M up to at least 64 clears it.
    """
    if M < 2:
        raise DomainError("verify_claim_sparsity requires M >= 2")
    supports = []
    for k in range(1, M):
        w = cosine_profile(M, k)
        supports.append(int(np.count_nonzero(np.abs(w) > SPARSITY_ZERO_TOL)))
    min_support = min(supports)
    argmin_k = supports.index(min_support) + 1
    required = -(-M // 3)
    return SparsityReport(
        M=M,
        min_support=min_support,
        argmin_k=argmin_k,
        required=required,
        passed=min_support >= required,
        supports=tuple(supports),
    )


def cosine_basis(M: int) -> np.ndarray:
    """Unit-normalized cosine vectors as columns, k = 1..M.

    Column k is proportional to (cos(2 pi k j / M))_{j=0..M-1}.  Note these
    vectors are not an orthogonal basis in general (column M - k repeats
    column k when M is odd); they are used here only as the fixed vector
    enumeration that the bilinear-form check is stated in.
    """
    if M < 2:
        raise DomainError("cosine_basis requires M >= 2")
    j = np.arange(M, dtype=float)[:, None]
    k = np.arange(1, M + 1, dtype=float)[None, :]
    u = np.cos(2.0 * math.pi * j * k / M)
    return u / np.linalg.norm(u, axis=0, keepdims=True)


def cosine_enumeration(M: int, D: int) -> np.ndarray:
    """Tensor-product extension of :func:`cosine_basis` to a D-dimensional grid.

    Level D is built from level D-1 by appending one 1-D factor on the
    right, with the 1-D index varying slowest:
    column ``(l-1) M**(D-1) + j`` is ``level_{D-1}[j] (x) u_l``.
    """
    if D < 1:
        raise DomainError("cosine_enumeration requires D >= 1")
    u = cosine_basis(M)
    level = u
    for _ in range(D - 1):
        # kron(level, u) orders columns with the new 1-D index fastest; the
        # enumeration wants it slowest.
        inner = level.shape[1]
        order = np.arange(inner * M).reshape(inner, M).T.reshape(-1)
        level = kron(level, u)[:, order]
    return level


@dataclass(frozen=True)
class AssumptionReport:
    M: int
    D: int
    trials: int
    zero_probabilities: tuple
    max_probability: float
    argmax_k: int
    stderr: float
    theoretical_c: float | None
    violates: bool


def verify_assumption_main(dist: TaskDistribution, trials: int, rng: RngStream) -> AssumptionReport:
    """Monte Carlo check of the consecutive bilinear-form zero probabilities.

    For the cosine enumeration u_1, ..., u_d this estimates
    P(u_k^T V u_{k+1} = 0) for every consecutive pair, using the zero test
    |form| <= BILINEAR_ZERO_REL_TOL * max|V|, and reports the maximum
    against the theoretical constant of the FD bound (available for
    Bernoulli potentials; None otherwise).  Trial t draws its potential
    from ``rng.offset(t)``, occupying stream indices
    ``[rng.stream, rng.stream + trials)``.

    ``violates`` flags estimates statistically above the theoretical
    constant (max - 3 stderr > c), e.g. for the degenerate a == b potential
    where most consecutive forms vanish identically.
    """
    if dist.method != FD:
        raise DomainError("verify_assumption_main requires an FD distribution")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    enum = cosine_enumeration(dist.M, dist.D)
    profiles = (enum[:, :-1] * enum[:, 1:]).T  # row k-1 holds u_k * u_{k+1} entrywise
    counts = np.zeros(profiles.shape[0])
    for t in range(trials):
        diag = np.diagonal(sample_fd_potential(dist, rng.offset(t)))
        scale = float(np.abs(diag).max())
        forms = profiles @ diag
        counts += np.abs(forms) <= BILINEAR_ZERO_REL_TOL * scale
    probs = counts / trials
    argmax = int(np.argmax(probs))
    p_max = float(probs[argmax])
    stderr = math.sqrt(p_max * (1.0 - p_max) / trials)
    spec = dist.potential
    if spec.kind in BERNOULLI_KINDS:
        root = math.sqrt(1.0 + (2.0 / 3.0) * dist.M * spec.p * (1.0 - spec.p))
        theoretical = (1.0 if dist.D == 1 else 2.0) / root
    else:
        theoretical = None
    violates = theoretical is not None and p_max - 3.0 * stderr > theoretical
    return AssumptionReport(
        M=dist.M,
        D=dist.D,
        trials=trials,
        zero_probabilities=tuple(float(p) for p in probs),
        max_probability=p_max,
        argmax_k=argmax + 1,
        stderr=stderr,
        theoretical_c=theoretical,
        violates=violates,
    )
