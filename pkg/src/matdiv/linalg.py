"""Dense real linear-algebra primitives.

Kronecker products, SVD-based numerical rank and nullspace bases, and
restriction of an operator to a subspace with a given orthonormal basis.
All functions take and return plain two-dimensional float64 numpy arrays
and treat them as immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, SizingError

#: Default relative rank threshold, 2**-40 (about 9.1e-13).  The matrices
#: built elsewhere in this library carry entries of order M**2, so the
#: default cutoff is relative rather than absolute.
DEFAULT_RELATIVE_TOL = 2.0**-40

#: Cap on the entry count of any constructed matrix (about 1 GiB of float64).
MAX_ELEMENTS = 2**27


@dataclass(frozen=True)
class Tolerance:
    """Thresholding rule deciding which singular values count as zero.

    A singular value s of a matrix with largest singular value smax and
    shape (r, c) is treated as zero when
    ``s <= max(absolute, relative * smax * max(r, c))``.
    """

    relative: float = DEFAULT_RELATIVE_TOL
    absolute: float = 0.0

    def __post_init__(self):
        if self.relative < 0 or self.absolute < 0:
            raise DomainError("tolerance components must be nonnegative")
        if self.relative == 0 and self.absolute == 0:
            raise DomainError("relative and absolute tolerance cannot both be zero")

    def threshold(self, sigma_max: float, max_dim: int) -> float:
        return max(self.absolute, self.relative * sigma_max * max_dim)


DEFAULT_TOLERANCE = Tolerance()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a C-contiguous float64 2-D array with finite entries."""
    m = np.ascontiguousarray(a, dtype=float)
    if m.ndim != 2:
        raise DomainError(f"{name} must be two-dimensional, got shape {m.shape}")
    if m.size and not np.isfinite(m).all():
        raise DomainError(f"{name} contains non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product: entry ((i*br + k), (j*bc + l)) equals a[i, j] * b[k, l]."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows * cols > MAX_ELEMENTS:
        raise SizingError(f"kron result {rows}x{cols} exceeds the {MAX_ELEMENTS}-entry budget")
    return np.kron(a, b)


def _singular_values(m: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericError(f"singular-value iteration failed: {exc}") from exc


def numerical_rank(m, tol: Tolerance = DEFAULT_TOLERANCE) -> int:
    """Count of singular values above the tolerance threshold."""
    m = as_matrix(m)
    if m.size == 0:
        raise DomainError("numerical_rank requires a nonempty matrix")
    s = _singular_values(m)
    cut = tol.threshold(float(s[0]), max(m.shape))
    return int(np.count_nonzero(s > cut))


def nullspace_basis(m, tol: Tolerance = DEFAULT_TOLERANCE) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of ``m``.

    Uses the same singular-value thresholding as :func:`numerical_rank`, so
    the returned matrix has ``m.shape[1] - numerical_rank(m, tol)`` columns.
    """
    m = as_matrix(m)
    if m.size == 0:
        raise DomainError("nullspace_basis requires a nonempty matrix")
    try:
        _, s, vh = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericError(f"singular-value iteration failed: {exc}") from exc
    cut = tol.threshold(float(s[0]) if s.size else 0.0, max(m.shape))
    rank = int(np.count_nonzero(s > cut))
    return np.ascontiguousarray(vh[rank:].T)


def restrict_to_subspace(m, basis) -> np.ndarray:
    """Express ``m`` on the subspace spanned by the orthonormal columns of ``basis``.

    The kernel of the returned matrix, mapped through ``basis``, equals the
    kernel of ``m`` intersected with the span of ``basis``.
    """
    m = as_matrix(m, "m")
    basis = as_matrix(basis, "basis")
    if m.shape[1] != basis.shape[0]:
        raise SizingError(
            f"cannot restrict {m.shape[0]}x{m.shape[1]} operator to a basis of {basis.shape[0]}-vectors"
        )
    k = basis.shape[1]
    if k and not np.allclose(basis.T @ basis, np.eye(k), atol=1e-8):
        raise DomainError("basis columns must be orthonormal")
    return m @ basis
