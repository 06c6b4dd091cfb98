"""Exhaustive search over reservation vectors.

The feasible grid {0..k2} x {0..k3} x {0..k4} never exceeds a few dozen
vectors for the staffing levels this model targets, so the optimum is
found by evaluating every vector; rows are produced in lexicographic
order and evaluations may run in parallel.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

from .errors import DomainError
from .inversion import DEFAULT_EULER, EulerParams
from .multi_level import (
    EMPTY_STATE,
    MultiLevelParams,
    ReservationVector,
    State,
    TransientModel,
    abandonment_proportion,
)


class TableRow(NamedTuple):
    n: ReservationVector
    value: float


def reservation_grid(params: MultiLevelParams) -> list[ReservationVector]:
    """Every feasible reservation vector, lexicographically ordered."""
    _, k2, k3, k4 = params.k
    return [
        ReservationVector(n2, n3, n4)
        for n2 in range(k2 + 1)
        for n3 in range(k3 + 1)
        for n4 in range(k4 + 1)
    ]


def evaluate_all(
    params: MultiLevelParams,
    state: State = EMPTY_STATE,
    t: float = 60.0,
    euler: EulerParams = DEFAULT_EULER,
    weighted: bool = True,
    threads: int = 1,
) -> list[TableRow]:
    """Abandonment proportion for every reservation vector."""
    if not t > 0:
        raise DomainError(f"horizon must be positive, got {t}")
    grid = reservation_grid(params)

    def one(n: ReservationVector) -> TableRow:
        model = TransientModel(params, n)
        value = abandonment_proportion(
            params, n, state, t, euler, weighted=weighted, model=model
        )
        return TableRow(n, value)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, grid))
    return [one(n) for n in grid]


def best(table: list[TableRow]) -> TableRow:
    """Global minimum; ties go to the lexicographically smallest vector."""
    if not table:
        raise DomainError("cannot take the best row of an empty table")
    return min(table, key=lambda row: (row.value, row.n.astuple()))
