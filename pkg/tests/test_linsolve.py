import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import gauss_solve
from skillq.errors import DomainError, SingularSystemError
from skillq.linsolve import (
    SparseSystem,
    TridiagonalSystem,
    solve_sparse,
    solve_tridiagonal,
)
from skillq.multi_level import MultiMeasureSpec, ReservationVector, assemble_transform_system


def tridiagonal_dense(system: TridiagonalSystem) -> np.ndarray:
    n = system.n
    mat = np.zeros((n, n), dtype=complex)
    mat[np.arange(n), np.arange(n)] = system.diag
    mat[np.arange(1, n), np.arange(n - 1)] = system.lower
    mat[np.arange(n - 1), np.arange(1, n)] = system.upper
    return mat


def test_identity_tridiagonal():
    rhs = np.array([1, 2, 3, 4], dtype=complex)
    system = TridiagonalSystem(np.zeros(3), np.ones(4), np.zeros(3), rhs)
    assert np.allclose(solve_tridiagonal(system), rhs)


def test_two_by_two_by_hand():
    system = TridiagonalSystem([1.0], [2.0, 2.0], [1.0], [3.0, 3.0])
    assert solve_tridiagonal(system) == pytest.approx(np.array([1.0, 1.0]))


def _random_dd_tridiagonal(rng, n):
    lower = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
    upper = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
    diag = np.zeros(n, dtype=complex)
    diag[0] = 1 + abs(upper[0]) + rng.random()
    diag[-1] = 1 + abs(lower[-1]) + rng.random()
    for i in range(1, n - 1):
        diag[i] = 1 + abs(lower[i - 1]) + abs(upper[i]) + rng.random()
    rhs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return TridiagonalSystem(lower, diag, upper, rhs)


def test_random_system_matches_dense_oracle():
    rng = np.random.default_rng(42)
    system = _random_dd_tridiagonal(rng, 50)
    x = solve_tridiagonal(system)
    expected = gauss_solve(tridiagonal_dense(system), system.rhs)
    assert np.max(np.abs(x - expected)) / np.max(np.abs(expected)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 30))
def test_residual_contract_holds(seed, n):
    rng = np.random.default_rng(seed)
    system = _random_dd_tridiagonal(rng, n) if n > 1 else TridiagonalSystem(
        np.zeros(0), np.array([2.0 + 1j]), np.zeros(0), np.array([1.0])
    )
    x = solve_tridiagonal(system)
    resid = tridiagonal_dense(system) @ x - system.rhs
    assert np.max(np.abs(resid)) / max(1.0, np.max(np.abs(system.rhs))) <= 1e-12


def test_rhs_scaling_linearity():
    rng = np.random.default_rng(3)
    system = _random_dd_tridiagonal(rng, 20)
    x = solve_tridiagonal(system)
    scaled = TridiagonalSystem(system.lower, system.diag, system.upper, 3.5 * system.rhs)
    assert np.allclose(solve_tridiagonal(scaled), 3.5 * x, rtol=1e-10)


def test_zero_pivot_reports_row():
    system = TridiagonalSystem([1.0], [0.0, 1.0], [1.0], [1.0, 1.0])
    with pytest.raises(SingularSystemError) as err:
        solve_tridiagonal(system)
    assert err.value.row == 0


def test_tridiagonal_shape_validation():
    with pytest.raises(DomainError):
        TridiagonalSystem([1.0, 2.0], [1.0, 1.0], [1.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        TridiagonalSystem([1.0], [1.0, 1.0], [1.0], [1.0])
    with pytest.raises(DomainError):
        TridiagonalSystem(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0))


def test_sparse_identity():
    system = SparseSystem.from_entries(
        5, [(i, i, 1.0) for i in range(5)], np.arange(1, 6, dtype=complex)
    )
    assert np.allclose(solve_sparse(system), np.arange(1, 6))


def test_sparse_agrees_with_tridiagonal():
    rng = np.random.default_rng(11)
    tri = _random_dd_tridiagonal(rng, 25)
    entries = [(i, i, tri.diag[i]) for i in range(25)]
    entries += [(i + 1, i, tri.lower[i]) for i in range(24)]
    entries += [(i, i + 1, tri.upper[i]) for i in range(24)]
    sparse = SparseSystem.from_entries(25, entries, tri.rhs)
    assert np.max(np.abs(solve_sparse(sparse) - solve_tridiagonal(tri))) < 1e-12


def test_transform_system_matches_dense_oracle(example1):
    # Example-1 rates at a capacity small enough for a dense solve.
    import dataclasses

    params = dataclasses.replace(example1, ell=4)
    spec = MultiMeasureSpec.abandonment_cost(params)
    system = assemble_transform_system(params, ReservationVector(0, 0, 0), spec, 1.0 + 0j)
    dense = np.zeros((system.n, system.n), dtype=complex)
    dense[system.rows, system.cols] = system.values
    expected = gauss_solve(dense, system.rhs)
    x = solve_sparse(system)
    assert np.max(np.abs(x - expected)) / np.max(np.abs(expected)) < 1e-8


def test_sparse_residual_and_scaling(example1):
    import dataclasses

    params = dataclasses.replace(example1, ell=3)
    spec = MultiMeasureSpec.abandonments()
    system = assemble_transform_system(params, ReservationVector(1, 1, 0), spec, 0.5 + 2j)
    x = solve_sparse(system)
    resid = system.matrix() @ x - system.rhs
    assert np.max(np.abs(resid)) / max(1.0, np.max(np.abs(system.rhs))) <= 1e-10
    scaled = SparseSystem(system.n, system.rows, system.cols, system.values, 4.0 * system.rhs)
    assert np.max(np.abs(solve_sparse(scaled) - 4.0 * x)) <= 1e-10 * max(1.0, np.max(np.abs(x)))


def test_sparse_validation_errors():
    with pytest.raises(DomainError):  # duplicate entry
        SparseSystem.from_entries(2, [(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)], [1.0, 1.0])
    with pytest.raises(DomainError):  # missing diagonal
        SparseSystem.from_entries(2, [(0, 0, 1.0), (0, 1, 2.0)], [1.0, 1.0])
    with pytest.raises(DomainError):  # index out of range
        SparseSystem.from_entries(2, [(0, 0, 1.0), (1, 2, 1.0)], [1.0, 1.0])
    with pytest.raises(DomainError):
        SparseSystem.from_entries(0, [], [])


def test_sparse_singular_structure():
    system = SparseSystem.from_entries(
        2, [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], [1.0, 2.0]
    )
    with pytest.raises(SingularSystemError):
        solve_sparse(system)


def test_sparse_transpose_solve():
    rng = np.random.default_rng(5)
    n = 12
    dense = np.diag(4.0 + rng.random(n) + 0j)
    for _ in range(20):
        i, j = rng.integers(0, n, 2)
        if i != j:
            dense[i, j] = rng.standard_normal() * 0.3
    rhs = rng.standard_normal(n).astype(complex)
    entries = [(i, j, dense[i, j]) for i in range(n) for j in range(n) if dense[i, j] != 0]
    system = SparseSystem.from_entries(n, entries, rhs)
    x = solve_sparse(system, transpose=True)
    assert np.max(np.abs(dense.T @ x - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(rhs)))
