import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    cumulative_reward,
    distribution_at,
    single_level_generator,
    single_level_rewards,
)
from skillq.errors import DegenerateRatesError, DomainError
from skillq.single_level import (
    MeasureKind,
    Schedule,
    Segment,
    SingleLevelParams,
    expected_measure,
    measure_transform,
    project_schedule,
    tagged_wait,
    transition_probabilities,
    transition_rates,
)

BASE = SingleLevelParams(lam=1.0, mu=2 / 3, theta=2.0, k=3, ell=10)
SMALL = SingleLevelParams(lam=1.0, mu=1.0, theta=1.0, k=1, ell=2, gamma=1.0, beta=0.0)


class TestTransitionRates:
    def test_empty_system(self):
        assert transition_rates(BASE, 0) == (1.0, 0.0)

    def test_full_system_boundary(self):
        up, down = transition_rates(BASE, 10)
        assert up == 0.0
        assert down == pytest.approx(3 * (2 / 3) + 7 * 2)

    def test_below_agent_count(self):
        assert transition_rates(BASE, 2) == (1.0, pytest.approx(4 / 3))

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            transition_rates(BASE, -1)
        with pytest.raises(DomainError):
            transition_rates(BASE, 11)


class TestMeasureTransform:
    def test_no_abandonment_source_gives_zero(self):
        params = SingleLevelParams(lam=1.0, mu=1.0, theta=0.0, k=2, ell=5, beta=0.0, gamma=1.0)
        values = measure_transform(params, MeasureKind.COST, 1.0 + 0.5j)
        assert np.max(np.abs(values)) == 0.0

    def test_no_arrivals_no_services_from_empty(self):
        params = SingleLevelParams(lam=0.0, mu=1.0, theta=0.5, k=2, ell=4)
        values = measure_transform(params, MeasureKind.SERVICES, 2.0)
        assert values[0] == 0.0

    def test_three_state_system_hand_value(self):
        # dense elimination of the 3x3 system at s=1 gives A0 = 1/11
        values = measure_transform(SMALL, MeasureKind.COST, 1.0)
        assert values[0] == pytest.approx(1 / 11, rel=1e-12)

    def test_requires_positive_real_part(self):
        with pytest.raises(DomainError):
            measure_transform(SMALL, MeasureKind.COST, -1.0 + 2j)


def _oracle_measure(params, kind, a, t):
    q = single_level_generator(params.lam, params.mu, params.theta, params.k, params.ell)
    abandon, blocked, waiting, services = single_level_rewards(
        params.lam, params.mu, params.theta, params.k, params.ell
    )
    if kind is MeasureKind.COST:
        rates = params.gamma * abandon + params.beta * blocked
    elif kind is MeasureKind.WAITING:
        rates = waiting
    else:
        rates = services
    return cumulative_reward(q, rates, a, t)


class TestExpectedMeasure:
    def test_zero_horizon(self):
        assert expected_measure(BASE, MeasureKind.COST, 4, 0.0) == 0.0

    def test_abandonments_match_ode_oracle(self):
        value = expected_measure(SMALL, MeasureKind.COST, 0, 1.0)
        assert value == pytest.approx(_oracle_measure(SMALL, MeasureKind.COST, 0, 1.0), abs=1e-5)

    def test_blocking_reward_matches_ode_oracle(self):
        params = dataclasses.replace(SMALL, gamma=0.0, beta=1.0)
        value = expected_measure(params, MeasureKind.COST, 2, 1.0)
        assert value == pytest.approx(_oracle_measure(params, MeasureKind.COST, 2, 1.0), abs=1e-5)

    @pytest.mark.parametrize("kind", list(MeasureKind))
    def test_all_measures_all_states_small_instance(self, kind):
        params = SingleLevelParams(lam=0.9, mu=0.8, theta=0.6, k=2, ell=4, gamma=1.3, beta=0.7)
        for a in range(params.ell + 1):
            for t in (0.5, 2.0, 7.0):
                value = expected_measure(params, kind, a, t)
                assert value == pytest.approx(_oracle_measure(params, kind, a, t), abs=1e-5)

    def test_monotone_in_horizon(self):
        for kind in MeasureKind:
            values = [expected_measure(BASE, kind, 5, t) for t in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0)]
            assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_proportionality_abandonments_vs_waiting(self):
        # with beta=0, gamma=1 the abandonment count is theta times the waiting time
        params = SingleLevelParams(lam=1.2, mu=0.7, theta=0.9, k=2, ell=6, gamma=1.0, beta=0.0)
        for a in range(params.ell + 1):
            for t in (0.5, 3.0, 12.0):
                ab = expected_measure(params, MeasureKind.COST, a, t)
                wait = expected_measure(params, MeasureKind.WAITING, a, t)
                assert ab == pytest.approx(params.theta * wait, rel=1e-6, abs=1e-12)

    def test_conservation_identity(self):
        # a + lam*t - blocked = E[N_t] + services + abandonments
        params = SingleLevelParams(lam=1.1, mu=0.9, theta=0.8, k=2, ell=5)
        for a in (0, 2, 5):
            for t in (1.0, 4.0):
                blocked = expected_measure(
                    dataclasses.replace(params, gamma=0.0, beta=1.0), MeasureKind.COST, a, t
                )
                abandoned = expected_measure(
                    dataclasses.replace(params, gamma=1.0, beta=0.0), MeasureKind.COST, a, t
                )
                services = expected_measure(params, MeasureKind.SERVICES, a, t)
                probs = transition_probabilities(params, a, t)
                mean_n = float(np.arange(params.ell + 1) @ probs)
                lhs = a + params.lam * t - blocked
                rhs = mean_n + services + abandoned
                assert lhs == pytest.approx(rhs, abs=1e-5)


class TestTransitionProbabilities:
    def test_time_zero_is_indicator(self):
        probs = transition_probabilities(BASE, 3, 0.0)
        expected = np.zeros(11)
        expected[3] = 1.0
        assert np.array_equal(probs, expected)

    def test_pure_death_analytic(self):
        params = SingleLevelParams(lam=0.0, mu=0.7, theta=0.0, k=2, ell=3)
        for t in (0.3, 1.0, 2.5):
            probs = transition_probabilities(params, 1, t)
            assert probs[0] == pytest.approx(1 - math.exp(-0.7 * t), abs=1e-6)
            assert probs[1] == pytest.approx(math.exp(-0.7 * t), abs=1e-6)

    def test_long_run_matches_stationary_distribution(self):
        params = SingleLevelParams(lam=1.0, mu=1.0, theta=1.0, k=1, ell=2)
        pi = np.array([1.0, 1.0, 0.5])  # birth-death balance: pi_j+1 = pi_j * lam/down_{j+1}
        pi /= pi.sum()
        for i in range(3):
            probs = transition_probabilities(params, i, 50.0)
            assert np.max(np.abs(probs - pi)) < 1e-4

    def test_rows_are_distributions(self):
        for i in range(BASE.ell + 1):
            for t in (0.1, 1.0, 10.0):
                probs = transition_probabilities(BASE, i, t)
                assert probs.min() >= 0.0
                assert probs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_matches_matrix_exponential(self):
        params = SingleLevelParams(lam=0.8, mu=0.9, theta=0.7, k=2, ell=4)
        q = single_level_generator(params.lam, params.mu, params.theta, params.k, params.ell)
        for i in (0, 2, 4):
            probs = transition_probabilities(params, i, 1.7)
            assert np.max(np.abs(probs - distribution_at(q, i, 1.7))) < 1e-6


class TestSchedule:
    def test_single_segment_degenerates_to_expected_measure(self):
        initial = np.zeros(BASE.ell + 1)
        initial[4] = 1.0
        schedule = Schedule((Segment(BASE, 2.0),))
        total, _ = project_schedule(schedule, initial, MeasureKind.COST)
        assert total == pytest.approx(expected_measure(BASE, MeasureKind.COST, 4, 2.0), rel=1e-9)

    def test_semigroup_split(self):
        initial = np.zeros(BASE.ell + 1)
        initial[2] = 1.0
        whole = Schedule((Segment(BASE, 4.0),))
        halves = Schedule((Segment(BASE, 2.0), Segment(BASE, 2.0)))
        total_whole, final_whole = project_schedule(whole, initial, MeasureKind.COST)
        total_halves, final_halves = project_schedule(halves, initial, MeasureKind.COST)
        assert total_halves == pytest.approx(total_whole, abs=1e-5)
        assert np.max(np.abs(final_whole - final_halves)) < 1e-5

    def test_dead_segment_contributes_nothing(self):
        quiet = SingleLevelParams(lam=0.0, mu=0.5, theta=0.0, k=3, ell=10)
        initial = np.zeros(11)
        initial[6] = 1.0
        schedule = Schedule((Segment(quiet, 3.0),))
        total, _ = project_schedule(schedule, initial, MeasureKind.COST)
        assert total == 0.0

    def test_varying_parameters_match_oracle(self):
        day = SingleLevelParams(lam=1.4, mu=0.9, theta=0.8, k=3, ell=4)
        night = SingleLevelParams(lam=0.4, mu=0.9, theta=0.8, k=1, ell=4)
        initial = np.zeros(5)
        initial[1] = 1.0
        schedule = Schedule((Segment(day, 2.0), Segment(night, 3.0)))
        total, final = project_schedule(schedule, initial, MeasureKind.COST)

        q_day = single_level_generator(day.lam, day.mu, day.theta, day.k, day.ell)
        q_night = single_level_generator(night.lam, night.mu, night.theta, night.k, night.ell)
        ab_day = single_level_rewards(day.lam, day.mu, day.theta, day.k, day.ell)[0]
        ab_night = single_level_rewards(night.lam, night.mu, night.theta, night.k, night.ell)[0]
        expected_total = cumulative_reward(q_day, ab_day, 1, 2.0)
        mid = distribution_at(q_day, 1, 2.0)
        expected_total += sum(mid[a] * cumulative_reward(q_night, ab_night, a, 3.0) for a in range(5))
        assert total == pytest.approx(expected_total, abs=1e-5)
        expected_final = mid @ np.vstack([distribution_at(q_night, a, 3.0) for a in range(5)])
        assert np.max(np.abs(final - expected_final)) < 1e-5

    def test_capacity_must_stay_fixed(self):
        other = dataclasses.replace(BASE, ell=8, k=3)
        with pytest.raises(DomainError):
            Schedule((Segment(BASE, 1.0), Segment(other, 1.0)))

    def test_rejects_bad_initial(self):
        schedule = Schedule((Segment(BASE, 1.0),))
        with pytest.raises(DomainError):
            project_schedule(schedule, np.zeros(BASE.ell + 1), MeasureKind.COST)
        with pytest.raises(DomainError):
            project_schedule(schedule, np.ones(3), MeasureKind.COST)


class TestTaggedWait:
    def test_ahead_shorter_than_agents(self):
        params = SingleLevelParams(lam=1.0, mu=1.0, theta=0.5, k=2, ell=10)
        assert tagged_wait(params, 1) == 0.0

    def test_recursion_example(self):
        params = SingleLevelParams(lam=1.0, mu=1.0, theta=0.5, k=2, ell=10)
        assert tagged_wait(params, 3) == pytest.approx(2 / 3)

    def test_no_abandonment_is_pure_service_wait(self):
        params = SingleLevelParams(lam=1.0, mu=1.0, theta=0.0, k=1, ell=10)
        assert tagged_wait(params, 4) == pytest.approx(4.0)

    @settings(max_examples=60, deadline=None)
    @given(
        mu=st.fractions(min_value="1/10", max_value=5),
        theta=st.fractions(min_value=0, max_value=5),
        k=st.integers(1, 6),
        ahead=st.integers(0, 25),
    )
    def test_closed_form_equals_recursion(self, mu, theta, k, ahead):
        # tagged_wait itself asserts exact rational equality of both routes
        from fractions import Fraction

        params = SingleLevelParams(lam=1.0, mu=float(mu), theta=float(theta), k=k, ell=30)
        value = tagged_wait(params, ahead)
        if ahead < k:
            assert value == 0.0
        else:
            exact = Fraction(ahead + 1 - k) / (
                k * Fraction(params.mu) + (ahead + 1 - k) * Fraction(params.theta)
            )
            assert value == float(exact)

    def test_degenerate_rates(self):
        params = SingleLevelParams(lam=1.0, mu=0.0, theta=0.0, k=2, ell=10)
        with pytest.raises(DegenerateRatesError):
            tagged_wait(params, 5)

    def test_negative_position_rejected(self):
        with pytest.raises(DomainError):
            tagged_wait(BASE, -1)


def test_params_validation():
    with pytest.raises(DomainError):
        SingleLevelParams(lam=-1.0, mu=1.0, theta=1.0, k=1, ell=2)
    with pytest.raises(DomainError):
        SingleLevelParams(lam=1.0, mu=1.0, theta=1.0, k=3, ell=2)
    with pytest.raises(DomainError):
        SingleLevelParams(lam=1.0, mu=1.0, theta=1.0, k=1, ell=2, beta=-0.1)
