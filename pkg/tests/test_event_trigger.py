import numpy as np
import pytest

from src.errors import EmptyLog, InvalidParameters, NonMonotoneTime
from src.trigger.event_trigger import (
    EventMonitor,
    TriggerPolicy,
    inter_event_stats,
    min_inter_event_time,
    min_inter_event_time_quadrature,
)


class TestTriggerPolicy:
    def test_fires_when_deviation_exceeds_threshold(self):
        policy = TriggerPolicy(sigma=(0.5, 0.5))
        assert policy.should_trigger(1, g_now=2.0, e_now=1.5)

    def test_boundary_does_not_fire(self):
        policy = TriggerPolicy(sigma=(0.5, 0.5))
        assert not policy.should_trigger(1, g_now=2.0, e_now=1.0)
        assert not policy.should_trigger(2, g_now=-2.0, e_now=-1.0)

    def test_zero_gradient_with_deviation_fires(self):
        policy = TriggerPolicy(sigma=(0.85, 0.95))
        assert policy.should_trigger(2, g_now=0.0, e_now=1e-9)
        assert not policy.should_trigger(2, g_now=0.0, e_now=0.0)

    def test_sigma_bar(self):
        assert TriggerPolicy(sigma=(0.85, 0.95)).sigma_bar == 0.95

    @pytest.mark.parametrize("sigma", [(0.0, 0.5), (0.5, 1.0), (1.5, 0.5)])
    def test_invalid_sigma(self, sigma):
        with pytest.raises(InvalidParameters):
            TriggerPolicy(sigma=sigma)

    def test_scaled(self):
        scaled = TriggerPolicy(sigma=(0.8, 0.6)).scaled(0.5)
        assert scaled.sigma == pytest.approx((0.4, 0.3))


class TestEventMonitor:
    def test_initial_event(self):
        monitor = EventMonitor(1, held_gradient=3.0)
        assert monitor.event_times == [0.0]
        assert monitor.deviation(1.0) == 2.0

    def test_on_trigger_updates_hold(self):
        monitor = EventMonitor(2, held_gradient=3.0)
        monitor.on_trigger(0.5, 1.0)
        assert monitor.held_gradient == 1.0
        assert monitor.last_event_time == 0.5
        assert monitor.deviation(1.0) == 0.0

    def test_rejects_non_increasing_time(self):
        monitor = EventMonitor(1, held_gradient=0.0)
        monitor.on_trigger(0.5, 1.0)
        with pytest.raises(NonMonotoneTime):
            monitor.on_trigger(0.5, 2.0)
        with pytest.raises(NonMonotoneTime):
            monitor.on_trigger(0.1, 2.0)


class TestMinInterEventTime:
    def test_unit_case(self):
        assert min_inter_event_time(0.5, 1.0) == pytest.approx(1.0 / 3.0)

    def test_boundary_sigma(self):
        assert min_inter_event_time(1.0, 2.0) == pytest.approx(0.25)

    def test_benchmark_sigma_bar(self):
        assert min_inter_event_time(0.95, 1.0) == pytest.approx(0.48718, abs=5e-6)

    def test_increasing_in_sigma_bar(self):
        sigma_bar = np.linspace(0.001, 1.0, 200)
        tau = np.array([min_inter_event_time(s, 3.0) for s in sigma_bar])
        assert np.all(np.diff(tau) > 0)
        assert tau[0] < 1e-3

    def test_closed_form_matches_quadrature(self):
        rng = np.random.default_rng(42)
        for sigma_bar, hk_norm in zip(rng.uniform(0.01, 1.0, 100), rng.uniform(0.1, 100.0, 100)):
            closed = min_inter_event_time(sigma_bar, hk_norm)
            numeric = min_inter_event_time_quadrature(sigma_bar, hk_norm)
            assert abs(closed - numeric) <= 1e-9

    @pytest.mark.parametrize("sigma_bar,hk_norm", [(0.0, 1.0), (1.5, 1.0), (0.5, 0.0)])
    def test_invalid_inputs(self, sigma_bar, hk_norm):
        with pytest.raises(InvalidParameters):
            min_inter_event_time(sigma_bar, hk_norm)


class TestInterEventStats:
    def test_gaps(self):
        stats = inter_event_stats([0.0, 1.0, 3.0])
        assert stats.count == 3
        assert stats.min_gap == 1.0
        assert stats.mean_gap == 1.5

    def test_single_event(self):
        stats = inter_event_stats([0.0])
        assert stats.count == 1
        assert stats.min_gap is None
        assert stats.mean_gap is None

    def test_empty(self):
        with pytest.raises(EmptyLog):
            inter_event_stats([])
