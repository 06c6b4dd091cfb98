"""Transient analysis and policy optimisation for skills-based routing.

Library layout:

- ``inversion``     Euler-summation Laplace inversion
- ``linsolve``      complex tridiagonal and sparse solvers
- ``single_level``  one query type / one agent class model
- ``multi_level``   the four-level reservation-policy model
- ``policy_search`` exhaustive optimisation over reservation vectors
- ``simulator``     discrete-event simulation (verification + extra policies)
- ``cli``           the ``skillq`` command-line front end
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateRatesError,
    DomainError,
    NumericalError,
    SingularSystemError,
    SkillqError,
    TransformEvaluationError,
)
from .inversion import DEFAULT_EULER, EulerParams, invert, invert_many
from .multi_level import (
    EMPTY_STATE,
    MultiLevelParams,
    MultiMeasureSpec,
    ReservationVector,
    State,
    StateSpace,
    TransientModel,
    abandonment_proportion,
    enumerate_states,
    transitions,
)
from .single_level import (
    MeasureKind,
    Schedule,
    Segment,
    SingleLevelParams,
    expected_measure,
    project_schedule,
    tagged_wait,
    transition_probabilities,
    transition_rates,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DEFAULT_EULER",
    "DegenerateRatesError",
    "DomainError",
    "EMPTY_STATE",
    "EulerParams",
    "MeasureKind",
    "MultiLevelParams",
    "MultiMeasureSpec",
    "NumericalError",
    "ReservationVector",
    "Schedule",
    "Segment",
    "SingleLevelParams",
    "SingularSystemError",
    "SkillqError",
    "State",
    "StateSpace",
    "TransformEvaluationError",
    "TransientModel",
    "abandonment_proportion",
    "enumerate_states",
    "expected_measure",
    "invert",
    "invert_many",
    "project_schedule",
    "tagged_wait",
    "transition_probabilities",
    "transition_rates",
    "transitions",
]
