"""One query type, one agent class: the finite-line Erlang-A model.

The state is the number of callers in the system, 0..ell.  Cumulative
measures over (0, t) — cost of abandonments and losses, total waiting
time, completed services — satisfy one tridiagonal linear system per
Laplace abscissa; the systems differ only in their source term.  The
time-dependent state distribution comes from the transposed generator
resolvent, and schedules with piecewise-constant parameters are chained
through it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegenerateRatesError, DomainError, NumericalError
from .inversion import DEFAULT_EULER, EulerParams, nodes_and_weights
from .linsolve import TridiagonalSystem, solve_tridiagonal

PROB_TOL = 1e-6


@dataclass(frozen=True)
class SingleLevelParams:
    """Arrival/service/abandonment rates, staffing and costs.

    ``lam`` is the Poisson arrival rate, ``mu`` the service rate per
    busy agent, ``theta`` the abandonment rate per waiting caller,
    ``k`` the agent count, ``ell`` the number of lines (system
    capacity), ``beta`` the cost per blocked caller and ``gamma`` the
    cost per abandonment.
    """

    lam: float
    mu: float
    theta: float
    k: int
    ell: int
    beta: float = 0.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if min(self.lam, self.mu, self.theta) < 0:
            raise DomainError("rates must be nonnegative")
        if not (0 <= self.k <= self.ell):
            raise DomainError(f"need 0 <= k <= ell, got k={self.k}, ell={self.ell}")
        if min(self.beta, self.gamma) < 0:
            raise DomainError("costs must be nonnegative")


class MeasureKind(Enum):
    """Which cumulative quantity a transform system measures."""

    COST = "cost"          # abandonment cost + blocking cost
    WAITING = "waiting"    # total waiting time of all callers
    SERVICES = "services"  # completed services


def transition_rates(params: SingleLevelParams, a: int) -> tuple[float, float]:
    """Birth and death rates out of state ``a``."""
    if not 0 <= a <= params.ell:
        raise DomainError(f"state {a} outside 0..{params.ell}")
    up = params.lam if a < params.ell else 0.0
    down = min(a, params.k) * params.mu + max(0, a - params.k) * params.theta
    return up, down


def _death_rates(params: SingleLevelParams) -> np.ndarray:
    a = np.arange(params.ell + 1)
    return np.minimum(a, params.k) * params.mu + np.maximum(0, a - params.k) * params.theta


def _source(params: SingleLevelParams, kind: MeasureKind) -> np.ndarray:
    a = np.arange(params.ell + 1)
    queue = np.maximum(0, a - params.k)
    if kind is MeasureKind.COST:
        src = queue * params.theta * params.gamma
        src[params.ell] += params.lam * params.beta
        return src.astype(float)
    if kind is MeasureKind.WAITING:
        return queue.astype(float)
    if kind is MeasureKind.SERVICES:
        return (np.minimum(a, params.k) * params.mu).astype(float)
    raise DomainError(f"unknown measure kind {kind!r}")


def measure_transform(
    params: SingleLevelParams, kind: MeasureKind, s: complex
) -> np.ndarray:
    """Transform values of the cumulative measure, one per initial state.

    Row a reads (lam*1{a<ell} + min(a,k)mu + max(0,a-k)theta + s) X_a
    = lam*1{a<ell} X_{a+1} + (min(a,k)mu + max(0,a-k)theta) X_{a-1}
    + source_a / s.
    """
    if not complex(s).real > 0:
        raise DomainError(f"transform abscissa needs Re(s) > 0, got {s}")
    ell = params.ell
    down = _death_rates(params)
    births = np.full(ell + 1, params.lam)
    births[ell] = 0.0
    diag = births + down + s
    system = TridiagonalSystem(
        lower=-down[1:],
        diag=diag,
        upper=-births[:-1],
        rhs=_source(params, kind) / s,
    )
    return solve_tridiagonal(system)


def expected_measure(
    params: SingleLevelParams,
    kind: MeasureKind,
    a: int,
    t: float,
    euler: EulerParams = DEFAULT_EULER,
) -> float:
    """Cumulative measure over (0, t) starting from state ``a``.

    With kind=COST, gamma=1/beta=0 counts abandonments and gamma=0/beta=1
    counts blocked callers.  t=0 returns exactly 0.
    """
    if not 0 <= a <= params.ell:
        raise DomainError(f"initial state {a} outside 0..{params.ell}")
    if t < 0:
        raise DomainError(f"horizon must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    s_nodes, weights = nodes_and_weights(t, euler)
    total = 0.0
    for sk, wk in zip(s_nodes, weights):
        total += wk * measure_transform(params, kind, complex(sk))[a].real
    return total


def transition_probabilities(
    params: SingleLevelParams,
    i: int,
    t: float,
    euler: EulerParams = DEFAULT_EULER,
) -> np.ndarray:
    """Row i of the transition matrix P(t): P(state j at t | state i at 0).

    One tridiagonal solve per abscissa (impulse right-hand side on row
    i) yields the whole row.  Tiny negative excursions from the
    inversion are clipped and the row renormalized; a deviation of the
    row sum beyond 1e-6 raises NumericalError instead of being hidden.
    """
    ell = params.ell
    if not 0 <= i <= ell:
        raise DomainError(f"initial state {i} outside 0..{ell}")
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    probs = np.zeros(ell + 1)
    if t == 0:
        probs[i] = 1.0
        return probs
    down = _death_rates(params)
    births = np.full(ell + 1, params.lam)
    births[ell] = 0.0
    impulse = np.zeros(ell + 1)
    impulse[i] = 1.0
    s_nodes, weights = nodes_and_weights(t, euler)
    for sk, wk in zip(s_nodes, weights):
        system = TridiagonalSystem(
            lower=-births[:-1],
            diag=births + down + sk,
            upper=-down[1:],
            rhs=impulse,
        )
        probs += wk * solve_tridiagonal(system).real
    total = probs.sum()
    if abs(total - 1.0) > PROB_TOL or probs.min() < -PROB_TOL:
        raise NumericalError(
            f"transition probabilities failed sanity check (sum={total!r}, min={probs.min()!r})"
        )
    probs = np.clip(probs, 0.0, 1.0)
    return probs / probs.sum()


@dataclass(frozen=True)
class Segment:
    """One stretch of a schedule: constant parameters for ``duration``."""

    params: SingleLevelParams
    duration: float

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise DomainError(f"segment duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant parameters; capacity ell is fixed throughout."""

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise DomainError("schedule needs at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))
        ells = {seg.params.ell for seg in self.segments}
        if len(ells) != 1:
            raise DomainError("capacity ell must be constant across schedule segments")

    @property
    def ell(self) -> int:
        return self.segments[0].params.ell


def project_schedule(
    schedule: Schedule,
    initial: Sequence[float],
    kind: MeasureKind,
    euler: EulerParams = DEFAULT_EULER,
) -> tuple[float, np.ndarray]:
    """Accumulate a measure across segments, advancing the distribution.

    Returns (total over the whole schedule, state distribution at the
    end).  ``initial`` is a probability vector over 0..ell.
    """
    ell = schedule.ell
    dist = np.asarray(initial, dtype=float)
    if dist.shape != (ell + 1,):
        raise DomainError(f"initial distribution must have length {ell + 1}")
    if dist.min() < -PROB_TOL or abs(dist.sum() - 1.0) > PROB_TOL:
        raise DomainError("initial distribution must be a probability vector")
    dist = np.clip(dist, 0.0, None)
    dist = dist / dist.sum()

    total = 0.0
    for seg in schedule.segments:
        for a in range(ell + 1):
            if dist[a] > 0.0:
                total += dist[a] * expected_measure(seg.params, kind, a, seg.duration, euler)
        rows = [
            transition_probabilities(seg.params, a, seg.duration, euler)
            if dist[a] > 0.0
            else np.zeros(ell + 1)
            for a in range(ell + 1)
        ]
        dist = dist @ np.vstack(rows)
        dist = np.clip(dist, 0.0, None)
        dist = dist / dist.sum()
    return total, dist


def tagged_wait(params: SingleLevelParams, a: int) -> float:
    """Expected wait of a tagged caller with ``a`` others ahead.

    Zero when a < k (service starts immediately); otherwise the caller
    must wait for a+1-k departures ahead of them.  The closed form
    (a+1-k) / (k mu + (a+1-k) theta) and the step-by-step recursion are
    both evaluated in exact rational arithmetic and must agree.
    """
    if a < 0:
        raise DomainError(f"queue position must be nonnegative, got {a}")
    k = params.k
    if a < k:
        return 0.0
    mu = Fraction(params.mu)
    theta = Fraction(params.theta)
    denom = k * mu + (a + 1 - k) * theta
    if denom == 0:
        raise DegenerateRatesError(
            "k*mu + (a+1-k)*theta is zero: the tagged caller would wait forever"
        )
    closed = Fraction(a + 1 - k) / denom
    value = Fraction(0)
    for j in range(k, a + 1):
        step = k * mu + (j + 1 - k) * theta
        if step == 0:
            raise DegenerateRatesError(
                "k*mu + (a+1-k)*theta is zero: the tagged caller would wait forever"
            )
        value = (1 + (k * mu + (j - k) * theta) * value) / step
    if value != closed:
        raise NumericalError("tagged-wait recursion disagrees with its closed form")
    return float(closed)
