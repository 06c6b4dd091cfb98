"""Discrete-event simulation of the four-level call centre.

Serves two purposes: an independent check on the transform-based
analysis (reservation policy), and the evaluation of two routing
policies whose state is non-Markovian — global FCFS across levels, and
delayed transfer, where a caller becomes eligible for one-level-up
agents only ``y`` time units after arrival.  Global FCFS is exactly
delayed transfer with y = 0 and shares its code path.

Two interchangeable engines exist: a compiled Cython core and a pure
Python fallback, selected at import (override with the environment
variable SKILLQ_SIM_BACKEND=compiled|python).  They are bit-identical:
replication r of seed s draws from the counter-based Philox stream
keyed by (s, r), so results are reproducible and replications are
independent and parallelizable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from ..errors import DomainError
from ..multi_level import EMPTY_STATE, MultiLevelParams, ReservationVector, State, in_state_space

_BACKEND_ENV = "SKILLQ_SIM_BACKEND"


def _load_backend(name: str):
    if name == "python":
        from . import _engine_py

        return _engine_py, "python"
    if name in ("compiled", "cython"):
        from . import _engine_cy

        return _engine_cy, "compiled"
    if name == "auto":
        try:
            from . import _engine_cy

            return _engine_cy, "compiled"
        except ImportError:
            from . import _engine_py

            return _engine_py, "python"
    raise DomainError(f"unknown simulator backend {name!r}")


_engine, _backend = _load_backend(os.environ.get(_BACKEND_ENV, "auto"))


def backend_name() -> str:
    """Name of the engine selected at import: 'compiled' or 'python'."""
    return _backend


def get_engine(backend: str | None = None):
    """Resolve an engine module (None keeps the import-time choice)."""
    if backend is None:
        return _engine
    return _load_backend(backend)[0]


@dataclass(frozen=True)
class Reservation:
    """Route per the reservation vector; the analytically tractable policy."""

    n: ReservationVector


@dataclass(frozen=True)
class GlobalFCFS:
    """Freed agents take the earliest-arrived waiter across their two levels."""


@dataclass(frozen=True)
class DelayedTransfer:
    """Global FCFS, but up-level eligibility starts y time units after arrival."""

    y: float

    def __post_init__(self) -> None:
        if self.y < 0:
            raise DomainError(f"transfer delay must be nonnegative, got {self.y}")


Policy = Union[Reservation, GlobalFCFS, DelayedTransfer]


class EngineInputs(NamedTuple):
    """Flat, engine-friendly view of a SimConfig."""

    lam: np.ndarray
    mu: np.ndarray
    mu_up: np.ndarray
    theta: np.ndarray
    k: np.ndarray
    n_up: np.ndarray
    ell: int
    mode: int
    y: float
    init: np.ndarray
    horizon: float


@dataclass(frozen=True)
class SimConfig:
    params: MultiLevelParams
    policy: Policy
    horizon: float
    replications: int = 2000
    seed: int = 0
    initial: State = EMPTY_STATE

    def __post_init__(self) -> None:
        if not self.horizon > 0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        if self.replications < 1:
            raise DomainError("need at least one replication")
        a, a1, b, b1, c, c1, d = self.initial
        k = self.params.k
        if min(self.initial) < 0 or a1 > a or b1 > b or c1 > c:
            raise DomainError(f"invalid initial state {tuple(self.initial)}")
        if a + b + c + d > self.params.ell:
            raise DomainError("initial state exceeds the line capacity")
        if a1 > k[1] or b1 > k[2] or c1 > k[3]:
            raise DomainError("initial up-level service counts exceed agent counts")
        if isinstance(self.policy, Reservation) and not in_state_space(
            self.initial, self.params, self.policy.n
        ):
            raise DomainError(
                f"initial state {tuple(self.initial)} is infeasible under the reservation vector"
            )


def _to_inputs(config: SimConfig) -> EngineInputs:
    params = config.params
    if isinstance(config.policy, Reservation):
        mode, y = 0, 0.0
        n = config.policy.n
        n_up = np.array([0, n.n2, n.n3, n.n4], dtype=np.int64)
    else:
        mode = 1
        y = config.policy.y if isinstance(config.policy, DelayedTransfer) else 0.0
        n_up = np.zeros(4, dtype=np.int64)
    mu_up = np.zeros(4)
    mu_up[:3] = params.mu_up
    return EngineInputs(
        lam=np.asarray(params.lam, dtype=float),
        mu=np.asarray(params.mu, dtype=float),
        mu_up=mu_up,
        theta=np.asarray(params.theta, dtype=float),
        k=np.asarray(params.k, dtype=np.int64),
        n_up=n_up,
        ell=int(params.ell),
        mode=mode,
        y=float(y),
        init=np.asarray(tuple(config.initial), dtype=np.int64),
        horizon=float(config.horizon),
    )


@dataclass(frozen=True)
class ReplicationResult:
    """Raw tallies of one replication (plus visited states when traced)."""

    abandoned: tuple[int, int, int, int]
    blocked: tuple[int, int, int, int]
    services: tuple[int, int, int, int]
    states: list[tuple[int, ...]] | None = None


def simulate_once(
    config: SimConfig,
    replication_index: int,
    backend: str | None = None,
    trace: bool = False,
) -> ReplicationResult:
    """One replication; deterministic given (seed, replication_index).

    ``trace=True`` also returns every visited (a, a1, b, b1, c, c1, d)
    configuration, which the validity audit maps back into the state
    space.
    """
    if replication_index < 0:
        raise DomainError("replication index must be nonnegative")
    inp = _to_inputs(config)
    engine = get_engine(backend)
    if trace:
        tallies, states = engine.run_traced(inp, config.seed, replication_index)
        return ReplicationResult(
            abandoned=tuple(tallies[0:4]),
            blocked=tuple(tallies[4:8]),
            services=tuple(tallies[8:12]),
            states=states,
        )
    out = np.zeros((1, 12), dtype=np.int64)
    engine.run_batch(inp, config.seed, replication_index, 1, out)
    row = out[0]
    return ReplicationResult(
        abandoned=tuple(int(v) for v in row[0:4]),
        blocked=tuple(int(v) for v in row[4:8]),
        services=tuple(int(v) for v in row[8:12]),
    )


@dataclass(frozen=True)
class SimResult:
    """Replication averages with 95% confidence half-widths.

    Per-level abandonment proportions divide by the level's own offered
    load lam_i * horizon; the total proportion and its gamma-weighted
    variant divide by the overall offered load sum(lam) * horizon,
    matching the analytic normalization.
    """

    replications: int
    abandoned_mean: np.ndarray
    abandoned_hw: np.ndarray
    abandoned_total_mean: float
    abandoned_total_hw: float
    blocked_mean: np.ndarray
    blocked_hw: np.ndarray
    blocked_total_mean: float
    blocked_total_hw: float
    services_total_mean: float
    services_total_hw: float
    cost_mean: np.ndarray
    cost_hw: np.ndarray
    cost_total_mean: float
    cost_total_hw: float
    proportion_mean: np.ndarray
    proportion_hw: np.ndarray
    proportion_total_mean: float
    proportion_total_hw: float
    proportion_raw_total_mean: float
    proportion_raw_total_hw: float


def _mean_hw(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = values.shape[0]
    mean = values.mean(axis=0)
    if n < 2:
        return mean, np.zeros_like(mean)
    hw = 1.96 * values.std(axis=0, ddof=1) / math.sqrt(n)
    return mean, hw


def simulate_many(
    config: SimConfig, backend: str | None = None, threads: int = 1
) -> SimResult:
    """Run all replications and aggregate.

    Aggregation is by replication index, so the result is independent
    of the thread count and of completion order.
    """
    inp = _to_inputs(config)
    engine = get_engine(backend)
    reps = config.replications
    out = np.zeros((reps, 12), dtype=np.int64)
    if threads > 1 and reps > 1:
        chunk = max(1, (reps + threads - 1) // threads)
        ranges = [(start, min(chunk, reps - start)) for start in range(0, reps, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(engine.run_batch, inp, config.seed, start, count, out[start : start + count])
                for start, count in ranges
            ]
            for fut in futures:
                fut.result()
    else:
        engine.run_batch(inp, config.seed, 0, reps, out)

    abandoned = out[:, 0:4].astype(float)
    blocked = out[:, 4:8].astype(float)
    services = out[:, 8:12].astype(float)
    gamma = np.asarray(config.params.gamma, dtype=float)
    beta = config.params.beta
    cost = abandoned * gamma + blocked * beta
    offered_total = config.params.total_arrival_rate * config.horizon
    offered_level = np.asarray(config.params.lam, dtype=float) * config.horizon

    ab_mean, ab_hw = _mean_hw(abandoned)
    ab_tot_mean, ab_tot_hw = _mean_hw(abandoned.sum(axis=1))
    bl_mean, bl_hw = _mean_hw(blocked)
    bl_tot_mean, bl_tot_hw = _mean_hw(blocked.sum(axis=1))
    sv_tot_mean, sv_tot_hw = _mean_hw(services.sum(axis=1))
    cost_mean, cost_hw = _mean_hw(cost)
    cost_tot_mean, cost_tot_hw = _mean_hw(cost.sum(axis=1))

    with np.errstate(divide="ignore", invalid="ignore"):
        prop_mean = np.where(offered_level > 0, ab_mean / offered_level, np.nan)
        prop_hw = np.where(offered_level > 0, ab_hw / offered_level, np.nan)
    if offered_total > 0:
        prop_tot_mean = cost_tot_mean / offered_total
        prop_tot_hw = cost_tot_hw / offered_total
        prop_raw_mean = ab_tot_mean / offered_total
        prop_raw_hw = ab_tot_hw / offered_total
    else:
        prop_tot_mean = prop_tot_hw = prop_raw_mean = prop_raw_hw = math.nan

    return SimResult(
        replications=reps,
        abandoned_mean=ab_mean,
        abandoned_hw=ab_hw,
        abandoned_total_mean=float(ab_tot_mean),
        abandoned_total_hw=float(ab_tot_hw),
        blocked_mean=bl_mean,
        blocked_hw=bl_hw,
        blocked_total_mean=float(bl_tot_mean),
        blocked_total_hw=float(bl_tot_hw),
        services_total_mean=float(sv_tot_mean),
        services_total_hw=float(sv_tot_hw),
        cost_mean=cost_mean,
        cost_hw=cost_hw,
        cost_total_mean=float(cost_tot_mean),
        cost_total_hw=float(cost_tot_hw),
        proportion_mean=prop_mean,
        proportion_hw=prop_hw,
        proportion_total_mean=float(prop_tot_mean),
        proportion_total_hw=float(prop_tot_hw),
        proportion_raw_total_mean=float(prop_raw_mean),
        proportion_raw_total_hw=float(prop_raw_hw),
    )


__all__ = [
    "DelayedTransfer",
    "EngineInputs",
    "GlobalFCFS",
    "Policy",
    "ReplicationResult",
    "Reservation",
    "SimConfig",
    "SimResult",
    "available_backends",
    "backend_name",
    "get_engine",
    "simulate_many",
    "simulate_once",
]


def available_backends() -> list[str]:
    """Engines importable in this installation."""
    found = []
    for name in ("compiled", "python"):
        try:
            _load_backend(name)
        except ImportError:
            continue
        found.append(name)
    return found
