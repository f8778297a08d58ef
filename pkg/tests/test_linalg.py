import numpy as np
import pytest

from matdiv.errors import DomainError, SizingError
from matdiv.linalg import (
    DEFAULT_TOLERANCE,
    Tolerance,
    kron,
    nullspace_basis,
    numerical_rank,
    restrict_to_subspace,
)


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))


def test_kron_hand_expansion():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    want = np.array(
        [
            [0.0, 1.0, 0.0, 2.0],
            [1.0, 0.0, 2.0, 0.0],
            [0.0, 3.0, 0.0, 4.0],
            [3.0, 0.0, 4.0, 0.0],
        ]
    )
    assert np.array_equal(kron(a, b), want)


def test_kron_scalar_case():
    m = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(kron(np.array([[2.0]]), m), 2.0 * m)


def test_kron_sizing_guard():
    big = np.zeros((20_000, 1))
    with pytest.raises(SizingError):
        kron(big, big)


def test_kron_associative_on_integer_matrices():
    gen = np.random.Generator(np.random.PCG64(0))
    for _ in range(10):
        a, b, c = (gen.integers(-3, 4, (2, 3)).astype(float) for _ in range(3))
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_kron_mixed_product_property():
    gen = np.random.Generator(np.random.PCG64(1))
    for _ in range(10):
        a, c = (np.where(gen.random((4, 4)) < 0.5, -1.0, 1.0) for _ in range(2))
        b, d = (np.where(gen.random((3, 3)) < 0.5, -1.0, 1.0) for _ in range(2))
        left = kron(a, b) @ kron(c, d)
        right = kron(a @ c, b @ d)
        assert np.abs(left - right).max() <= 1e-12 * max(1.0, np.abs(right).max())


def test_rank_examples():
    assert numerical_rank(np.eye(5)) == 5
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1


def test_rank_transpose_invariance():
    gen = np.random.Generator(np.random.PCG64(2))
    for _ in range(10):
        m = gen.standard_normal((4, 7)) @ gen.standard_normal((7, 6))
        assert numerical_rank(m) == numerical_rank(m.T)


def test_rank_empty_rejected():
    with pytest.raises(DomainError):
        numerical_rank(np.zeros((0, 3)))


def test_nullspace_examples():
    assert nullspace_basis(np.eye(3)).shape == (3, 0)

    b = nullspace_basis(np.zeros((2, 2)))
    assert b.shape == (2, 2)
    assert np.allclose(b.T @ b, np.eye(2), atol=1e-14)

    v = nullspace_basis(np.array([[1.0, 1.0]]))
    assert v.shape == (2, 1)
    expect = np.array([1.0, -1.0]) / np.sqrt(2.0)
    assert min(np.abs(v[:, 0] - expect).max(), np.abs(v[:, 0] + expect).max()) < 1e-14


def test_rank_nullity_and_residual():
    gen = np.random.Generator(np.random.PCG64(3))
    for _ in range(15):
        rows, cols = int(gen.integers(2, 8)), int(gen.integers(2, 8))
        inner = int(gen.integers(1, 6))
        m = gen.standard_normal((rows, inner)) @ gen.standard_normal((inner, cols))
        rank = numerical_rank(m)
        basis = nullspace_basis(m)
        assert rank + basis.shape[1] == cols
        if basis.shape[1]:
            sigma_max = np.linalg.norm(m, 2)
            tol = DEFAULT_TOLERANCE
            cap = 10.0 * tol.absolute + 10.0 * tol.relative * sigma_max
            assert np.linalg.norm(m @ basis, axis=0).max() <= cap


def test_restrict_examples():
    m = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert np.array_equal(restrict_to_subspace(m, np.eye(2)), m)

    coord = np.array([[1.0], [0.0]])
    assert np.array_equal(restrict_to_subspace(m, coord), coord)

    ones = np.ones((2, 2))
    kernel_dir = np.array([[1.0], [-1.0]]) / np.sqrt(2.0)
    assert np.abs(restrict_to_subspace(ones, kernel_dir)).max() < 1e-15


def test_restrict_validations():
    with pytest.raises(SizingError):
        restrict_to_subspace(np.eye(2), np.eye(3))
    with pytest.raises(DomainError):
        restrict_to_subspace(np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_tolerance_validation():
    with pytest.raises(DomainError):
        Tolerance(relative=-1.0)
    with pytest.raises(DomainError):
        Tolerance(relative=0.0, absolute=0.0)
    assert Tolerance(relative=0.0, absolute=1e-9).threshold(10.0, 4) == 1e-9


def test_nonfinite_rejected():
    with pytest.raises(DomainError):
        numerical_rank(np.array([[np.nan, 0.0], [0.0, 1.0]]))
