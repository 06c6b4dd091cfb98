"""Four-level skills-based routing under a reservation policy.

Levels are numbered 1..4.  A level-i agent serves level-i calls at rate
mu[i] and level-(i-1) calls at rate mu_up[i-1]; the reservation vector
(n2, n3, n4) withholds that many level-i agents from taking level-(i-1)
overflow.  The state (a, a1, b, b1, c, c1, d) carries the per-level
caller counts a, b, c, d together with a1/b1/c1, the level-1/2/3
callers currently served one level up.

The module enumerates the feasible state space, produces the exact
transition catalogue out of any state, assembles the per-abscissa
linear systems for the cumulative measures (cost of abandonments and
losses, total waiting time, services) and for the time-dependent state
distribution, and evaluates them by numerical inversion.

Every routing test here is an availability comparison in which agents
serving their own level count as busy; the feasibility bounds and the
transition indicators use the same pool-load forms, which is what makes
the state space closed under the catalogue.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, NumericalError
from .inversion import DEFAULT_EULER, EulerParams, nodes_and_weights
from .linsolve import SparseSystem, solve_sparse
from .single_level import MeasureKind

DIST_TOL = 1e-5


class State(NamedTuple):
    """(a, a1, b, b1, c, c1, d) — counts per level plus served-one-up splits."""

    a: int
    a1: int
    b: int
    b1: int
    c: int
    c1: int
    d: int


EMPTY_STATE = State(0, 0, 0, 0, 0, 0, 0)


@dataclass(frozen=True)
class MultiLevelParams:
    """Rates, staffing and costs for the four-level model.

    ``lam``/``mu``/``theta``/``gamma``/``k`` have one entry per level;
    ``mu_up[i]`` is the service rate of a level-(i+1) call... served by a
    level-(i+2) agent — i.e. entry i covers level i+1 overflow, so only
    three entries exist.  ``ell`` is the shared line capacity and
    ``beta`` the cost per blocked caller.
    """

    lam: tuple[float, float, float, float]
    mu: tuple[float, float, float, float]
    mu_up: tuple[float, float, float]
    theta: tuple[float, float, float, float]
    k: tuple[int, int, int, int]
    gamma: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    ell: int = 10
    beta: float = 0.0

    def __post_init__(self) -> None:
        for name, width in (("lam", 4), ("mu", 4), ("mu_up", 3), ("theta", 4), ("k", 4), ("gamma", 4)):
            value = tuple(getattr(self, name))
            if len(value) != width:
                raise DomainError(f"{name} must have {width} entries")
            if any(v < 0 for v in value):
                raise DomainError(f"{name} entries must be nonnegative")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        if self.ell < 0:
            raise DomainError("ell must be nonnegative")
        if self.beta < 0:
            raise DomainError("beta must be nonnegative")

    @property
    def total_arrival_rate(self) -> float:
        return float(sum(self.lam))


@dataclass(frozen=True)
class ReservationVector:
    """How many level-2/3/4 agents are withheld from overflow work."""

    n2: int
    n3: int
    n4: int

    def __post_init__(self) -> None:
        if min(self.n2, self.n3, self.n4) < 0:
            raise DomainError("reservation counts must be nonnegative")

    def astuple(self) -> tuple[int, int, int]:
        return (self.n2, self.n3, self.n4)


def _check_reservation(params: MultiLevelParams, n: ReservationVector) -> None:
    for value, cap, name in zip(n.astuple(), params.k[1:], ("n2", "n3", "n4")):
        if value > cap:
            raise DomainError(f"{name}={value} exceeds the agent count {cap}")


def in_state_space(state: State, params: MultiLevelParams, n: ReservationVector) -> bool:
    """Membership test against the feasibility constraints.

    Upper bounds: a caller count served one level up cannot exceed the
    unreserved up-level agents or the callers themselves.  Lower
    bounds: a state may not pair waiting callers with more than the
    reserved number of free agents one level up — the policy would
    have assigned them.  Availability counts agents serving their own
    level as busy, so the tests compare pool loads (b - b1, c - c1, d),
    which is also what keeps every transition target feasible.
    """
    a, a1, b, b1, c, c1, d = state
    if min(state) < 0:
        return False
    if a + b + c + d > params.ell:
        return False
    k1, k2, k3, k4 = params.k
    if not a1 <= min(k2 - n.n2, a):
        return False
    if not b1 <= min(k3 - n.n3, b):
        return False
    if not c1 <= min(k4 - n.n4, c):
        return False
    if a1 < a - k1 and a1 < k2 - n.n2 - (b - b1):
        return False
    if b1 < b - (k2 - a1) and b1 < k3 - n.n3 - (c - c1):
        return False
    if c1 < c - (k3 - b1) and c1 < k4 - n.n4 - d:
        return False
    return True


class StateSpace:
    """All feasible states in lexicographic order, with a dense index."""

    def __init__(self, params: MultiLevelParams, n: ReservationVector):
        _check_reservation(params, n)
        self.params = params
        self.n = n
        k1, k2, k3, k4 = params.k
        ell = params.ell
        states: list[State] = []
        for a in range(ell + 1):
            for a1 in range(min(k2 - n.n2, a) + 1):
                for b in range(ell - a + 1):
                    for b1 in range(min(k3 - n.n3, b) + 1):
                        if a1 < a - k1 and a1 < k2 - n.n2 - (b - b1):
                            continue
                        for c in range(ell - a - b + 1):
                            for c1 in range(min(k4 - n.n4, c) + 1):
                                if b1 < b - (k2 - a1) and b1 < k3 - n.n3 - (c - c1):
                                    continue
                                for d in range(ell - a - b - c + 1):
                                    if c1 < c - (k3 - b1) and c1 < k4 - n.n4 - d:
                                        continue
                                    states.append(State(a, a1, b, b1, c, c1, d))
        self.states = states
        self._index = {state: i for i, state in enumerate(states)}
        self.array = np.array(states, dtype=np.int32).reshape(len(states), 7)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[State]:
        return iter(self.states)

    def __getitem__(self, i: int) -> State:
        return self.states[i]

    def __contains__(self, state: State) -> bool:
        return State(*state) in self._index

    def index(self, state: State) -> int:
        try:
            return self._index[State(*state)]
        except KeyError:
            raise DomainError(f"state {tuple(state)} is not feasible") from None


def enumerate_states(params: MultiLevelParams, n: ReservationVector) -> StateSpace:
    return StateSpace(params, n)


class Transition(NamedTuple):
    target: State
    rate: float
    cost: float


def queue_lengths(state: State, params: MultiLevelParams) -> tuple[int, int, int, int]:
    """Waiting callers per level, read off the state."""
    a, a1, b, b1, c, c1, d = state
    k1, k2, k3, k4 = params.k
    return (
        max(0, a - (k1 + a1)),
        max(0, b - (k2 - a1 + b1)),
        max(0, c - (k3 - b1 + c1)),
        max(0, d - (k4 - c1)),
    )


def service_rates(state: State, params: MultiLevelParams) -> tuple[float, float, float, float]:
    """Total service-completion rate per caller level."""
    a, a1, b, b1, c, c1, d = state
    k1, k2, k3, k4 = params.k
    mu, mu_up = params.mu, params.mu_up
    return (
        min(k1, a - a1) * mu[0] + a1 * mu_up[0],
        min(b - b1, k2 - a1) * mu[1] + b1 * mu_up[1],
        min(c - c1, k3 - b1) * mu[2] + c1 * mu_up[2],
        min(d, k4 - c1) * mu[3],
    )


def transitions(
    state: State,
    params: MultiLevelParams,
    n: ReservationVector,
    validate: bool = True,
) -> list[Transition]:
    """The full transition catalogue out of ``state``.

    Four arrivals (gated by spare capacity; blocked arrivals are not
    transitions — blocking cost enters the transform source instead),
    seven services with their reassignment indicators, four
    abandonments carrying their per-level cost.  Zero-rate entries are
    omitted.
    """
    if validate:
        _check_reservation(params, n)
        if not in_state_space(state, params, n):
            raise DomainError(f"state {tuple(state)} is not feasible")
    a, a1, b, b1, c, c1, d = state
    k1, k2, k3, k4 = params.k
    n2, n3, n4 = n.astuple()
    lam, mu, mu_up, theta, gamma = params.lam, params.mu, params.mu_up, params.theta, params.gamma
    out: list[Transition] = []

    # Arrivals overflow one level up when every agent of the caller's
    # own pool is busy (pool load >= agents left for that pool) and
    # strictly more than the reserved number of up-level agents are
    # free.  Both tests count agents serving their own level as busy,
    # e.g. b - b1 >= k2 - a1 and c - c1 < k3 - n3 - b1.
    if a + b + c + d < params.ell:
        if lam[0] > 0:
            inc = 1 if (a - a1 >= k1 and b - b1 < k2 - n2 - a1) else 0
            out.append(Transition(State(a + 1, a1 + inc, b, b1, c, c1, d), lam[0], 0.0))
        if lam[1] > 0:
            inc = 1 if (b - b1 >= k2 - a1 and c - c1 < k3 - n3 - b1) else 0
            out.append(Transition(State(a, a1, b + 1, b1 + inc, c, c1, d), lam[1], 0.0))
        if lam[2] > 0:
            inc = 1 if (c - c1 >= k3 - b1 and d < k4 - n4 - c1) else 0
            out.append(Transition(State(a, a1, b, b1, c + 1, c1 + inc, d), lam[2], 0.0))
        if lam[3] > 0:
            out.append(Transition(State(a, a1, b, b1, c, c1, d + 1), lam[3], 0.0))

    rate = min(k1, a - a1) * mu[0]
    if rate > 0:
        out.append(Transition(State(a - 1, a1, b, b1, c, c1, d), rate, 0.0))

    # Hand-offs at service completions: a freed up-level agent takes a
    # waiter from one level down when such waiters exist (pool load
    # strictly above the pool's agents, e.g. a - a1 > k1), none of its
    # own level wait, and at least the reserved number of agents stay
    # free afterwards.  The two last conditions combine into one
    # pool-load inequality, e.g. b - b1 <= k2 - n2 - a1 (free agents,
    # counting the one just freed, exceed n2).  On states where waiters
    # coexist only with exactly-reserved free agents the inequality is
    # the boundary equality; writing it as an inequality also covers
    # initial states with callers parked one level up and keeps every
    # transition target inside the feasible set.
    rate = a1 * mu_up[0]
    if rate > 0:
        keep = 1 if (a - a1 > k1 and b - b1 <= k2 - n2 - a1) else 0
        out.append(Transition(State(a - 1, a1 - 1 + keep, b, b1, c, c1, d), rate, 0.0))

    rate = min(b - b1, k2 - a1) * mu[1]
    if rate > 0:
        take = 1 if (a - a1 > k1 and b - b1 <= k2 - n2 - a1) else 0
        out.append(Transition(State(a, a1 + take, b - 1, b1, c, c1, d), rate, 0.0))

    rate = b1 * mu_up[1]
    if rate > 0:
        keep = 1 if (b - b1 > k2 - a1 and c - c1 <= k3 - n3 - b1) else 0
        out.append(Transition(State(a, a1, b - 1, b1 - 1 + keep, c, c1, d), rate, 0.0))

    rate = min(c - c1, k3 - b1) * mu[2]
    if rate > 0:
        take = 1 if (b - b1 > k2 - a1 and c - c1 <= k3 - n3 - b1) else 0
        out.append(Transition(State(a, a1, b, b1 + take, c - 1, c1, d), rate, 0.0))

    rate = c1 * mu_up[2]
    if rate > 0:
        keep = 1 if (c - c1 > k3 - b1 and d <= k4 - n4 - c1) else 0
        out.append(Transition(State(a, a1, b, b1, c - 1, c1 - 1 + keep, d), rate, 0.0))

    rate = min(d, k4 - c1) * mu[3]
    if rate > 0:
        take = 1 if (c - c1 > k3 - b1 and d <= k4 - n4 - c1) else 0
        out.append(Transition(State(a, a1, b, b1, c, c1 + take, d - 1), rate, 0.0))

    queues = queue_lengths(state, params)
    targets = (
        State(a - 1, a1, b, b1, c, c1, d),
        State(a, a1, b - 1, b1, c, c1, d),
        State(a, a1, b, b1, c - 1, c1, d),
        State(a, a1, b, b1, c, c1, d - 1),
    )
    for level in range(4):
        rate = queues[level] * theta[level]
        if rate > 0:
            out.append(Transition(targets[level], rate, gamma[level]))
    return out


@dataclass(frozen=True)
class MultiMeasureSpec:
    """Which cumulative quantity to compute and with what weights.

    For COST the level weights multiply abandonments and ``block_cost``
    each blocked caller; for WAITING/SERVICES they select and weight
    the per-level queue lengths / service-completion rates.
    """

    kind: MeasureKind
    level_weights: tuple[float, float, float, float]
    block_cost: float = 0.0

    def __post_init__(self) -> None:
        weights = tuple(self.level_weights)
        if len(weights) != 4 or any(w < 0 for w in weights):
            raise DomainError("level_weights must be four nonnegative numbers")
        object.__setattr__(self, "level_weights", weights)
        if self.block_cost < 0:
            raise DomainError("block_cost must be nonnegative")

    @classmethod
    def abandonment_cost(cls, params: MultiLevelParams) -> "MultiMeasureSpec":
        """The model's own cost structure: gamma-weighted abandonments plus blocking."""
        return cls(MeasureKind.COST, params.gamma, params.beta)

    @classmethod
    def abandonments(cls) -> "MultiMeasureSpec":
        return cls(MeasureKind.COST, (1.0, 1.0, 1.0, 1.0), 0.0)

    @classmethod
    def blocked(cls) -> "MultiMeasureSpec":
        return cls(MeasureKind.COST, (0.0, 0.0, 0.0, 0.0), 1.0)

    @classmethod
    def waiting(cls, weights: Sequence[float] = (1.0, 1.0, 1.0, 1.0)) -> "MultiMeasureSpec":
        return cls(MeasureKind.WAITING, tuple(weights), 0.0)

    @classmethod
    def services(cls, weights: Sequence[float] = (1.0, 1.0, 1.0, 1.0)) -> "MultiMeasureSpec":
        return cls(MeasureKind.SERVICES, tuple(weights), 0.0)


class TransientModel:
    """State space plus generator data, reused across abscissas and specs.

    The per-abscissa matrix is s*I + diag(outflow) - rates, identical
    for every measure; only the source vector changes.  Building the
    coordinate arrays once makes the 27-abscissa inversion sweep cheap.
    """

    def __init__(self, params: MultiLevelParams, n: ReservationVector, space: StateSpace | None = None):
        self.params = params
        self.n = n
        self.space = space if space is not None else enumerate_states(params, n)
        if space is not None and (space.params != params or space.n != n):
            raise DomainError("state space was built for different parameters")
        self._build()

    def _build(self) -> None:
        params, n, space = self.params, self.n, self.space
        nstates = len(space)
        rows: list[int] = []
        cols: list[int] = []
        rates: list[float] = []
        outflow = np.zeros(nstates)
        for i, state in enumerate(space):
            for tr in transitions(state, params, n, validate=False):
                rows.append(i)
                cols.append(space.index(tr.target))
                rates.append(tr.rate)
                outflow[i] += tr.rate
        # Coalesce parallel transitions (service and abandonment can share
        # a target) so the coordinate form has unique (row, col) entries.
        rows_arr = np.asarray(rows, dtype=np.int64)
        cols_arr = np.asarray(cols, dtype=np.int64)
        keys = rows_arr * nstates + cols_arr
        uniq, inverse = np.unique(keys, return_inverse=True)
        summed = np.zeros(uniq.size)
        np.add.at(summed, inverse, np.asarray(rates))
        self._off_rows = uniq // nstates
        self._off_cols = uniq % nstates
        self._off_rates = summed
        self._outflow = outflow

        arr = space.array
        a, a1, b, b1 = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
        c, c1, d = arr[:, 4], arr[:, 5], arr[:, 6]
        k1, k2, k3, k4 = params.k
        self._queues = np.stack(
            [
                np.maximum(0, a - (k1 + a1)),
                np.maximum(0, b - (k2 - a1 + b1)),
                np.maximum(0, c - (k3 - b1 + c1)),
                np.maximum(0, d - (k4 - c1)),
            ],
            axis=1,
        ).astype(float)
        self._service_rates = np.stack(
            [
                np.minimum(k1, a - a1) * params.mu[0] + a1 * params.mu_up[0],
                np.minimum(b - b1, k2 - a1) * params.mu[1] + b1 * params.mu_up[1],
                np.minimum(c - c1, k3 - b1) * params.mu[2] + c1 * params.mu_up[2],
                np.minimum(d, k4 - c1) * params.mu[3],
            ],
            axis=1,
        )
        self._abandon_rates = self._queues * np.asarray(params.theta)
        self._full = (a + b + c + d == params.ell).astype(float)

    def source(self, spec: MultiMeasureSpec) -> np.ndarray:
        """Per-state accrual rate of the measure (the 1/s numerator source)."""
        w = np.asarray(spec.level_weights)
        if spec.kind is MeasureKind.COST:
            return self._abandon_rates @ w + self._full * (
                self.params.total_arrival_rate * spec.block_cost
            )
        if spec.kind is MeasureKind.WAITING:
            return self._queues @ w
        if spec.kind is MeasureKind.SERVICES:
            return self._service_rates @ w
        raise DomainError(f"unknown measure kind {spec.kind!r}")

    def system(self, spec: MultiMeasureSpec, s: complex) -> SparseSystem:
        """The coordinate-form linear system for the measure transform at s."""
        if not complex(s).real > 0:
            raise DomainError(f"transform abscissa needs Re(s) > 0, got {s}")
        nstates = len(self.space)
        diag_idx = np.arange(nstates, dtype=np.int64)
        rows = np.concatenate([self._off_rows, diag_idx])
        cols = np.concatenate([self._off_cols, diag_idx])
        values = np.concatenate([-self._off_rates.astype(complex), self._outflow + s])
        return SparseSystem(nstates, rows, cols, values, self.source(spec) / s)

    def transform_values(self, spec: MultiMeasureSpec, s: complex) -> np.ndarray:
        """Measure transform at s, one complex value per initial state."""
        return solve_sparse(self.system(spec, s))

    def expected_measure(
        self, spec: MultiMeasureSpec, state: State, t: float, euler: EulerParams = DEFAULT_EULER
    ) -> float:
        """Cumulative measure over (0, t) from ``state``; exactly 0 at t=0."""
        idx = self.space.index(state)
        if t < 0:
            raise DomainError(f"horizon must be nonnegative, got {t}")
        if t == 0:
            return 0.0
        s_nodes, weights = nodes_and_weights(t, euler)
        total = 0.0
        for sk, wk in zip(s_nodes, weights):
            total += wk * self.transform_values(spec, complex(sk))[idx].real
        return total

    def distribution(
        self, state: State, t: float, euler: EulerParams = DEFAULT_EULER
    ) -> np.ndarray:
        """State distribution at time t, started from ``state``.

        Uses the transposed measure matrices with an impulse right-hand
        side, clips stray negatives and renormalizes; a total deviating
        from 1 by more than 1e-5 raises NumericalError.
        """
        idx = self.space.index(state)
        nstates = len(self.space)
        if t < 0:
            raise DomainError(f"time must be nonnegative, got {t}")
        probs = np.zeros(nstates)
        if t == 0:
            probs[idx] = 1.0
            return probs
        impulse = np.zeros(nstates)
        impulse[idx] = 1.0
        spec = MultiMeasureSpec.abandonments()
        s_nodes, weights = nodes_and_weights(t, euler)
        for sk, wk in zip(s_nodes, weights):
            system = self.system(spec, complex(sk))
            system = SparseSystem(nstates, system.rows, system.cols, system.values, impulse)
            probs += wk * solve_sparse(system, transpose=True).real
        total = probs.sum()
        if abs(total - 1.0) > DIST_TOL or probs.min() < -DIST_TOL:
            raise NumericalError(
                f"state distribution failed sanity check (sum={total!r}, min={probs.min()!r})"
            )
        probs = np.clip(probs, 0.0, 1.0)
        return probs / probs.sum()


def assemble_transform_system(
    params: MultiLevelParams,
    n: ReservationVector,
    spec: MultiMeasureSpec,
    s: complex,
    space: StateSpace | None = None,
) -> SparseSystem:
    """One-shot assembly of the measure-transform system at abscissa s."""
    return TransientModel(params, n, space).system(spec, s)


def expected_measure(
    params: MultiLevelParams,
    n: ReservationVector,
    spec: MultiMeasureSpec,
    state: State,
    t: float,
    euler: EulerParams = DEFAULT_EULER,
) -> float:
    return TransientModel(params, n).expected_measure(spec, state, t, euler)


def transition_distribution(
    params: MultiLevelParams,
    n: ReservationVector,
    state: State,
    t: float,
    euler: EulerParams = DEFAULT_EULER,
) -> np.ndarray:
    return TransientModel(params, n).distribution(state, t, euler)


def abandonment_proportion(
    params: MultiLevelParams,
    n: ReservationVector,
    state: State = EMPTY_STATE,
    t: float = 60.0,
    euler: EulerParams = DEFAULT_EULER,
    weighted: bool = True,
    model: TransientModel | None = None,
) -> float:
    """Expected abandonment cost over (0, t) per expected offered call.

    The numerator is the gamma-weighted abandonment cost (``weighted=False``
    counts plain abandonments instead); the denominator is the offered
    load sum(lam) * t.  Blocking cost is excluded from the numerator.
    """
    total_rate = params.total_arrival_rate
    if total_rate <= 0 or t <= 0:
        raise DomainError("abandonment proportion needs sum(lam) > 0 and t > 0")
    spec = (
        MultiMeasureSpec(MeasureKind.COST, params.gamma, 0.0)
        if weighted
        else MultiMeasureSpec.abandonments()
    )
    if model is None:
        model = TransientModel(params, n)
    return model.expected_measure(spec, state, t, euler) / (total_rate * t)
