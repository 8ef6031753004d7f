"""
Tests for the Prometheus metrics registry.
"""

import pytest

from majority import metrics


class TestMetrics:
    """Counters and text exposition of the isolated registry."""

    def test_record_trials(self, metric_value):
        before = {
            name: metric_value(name)
            for name in ("majority_trials_total", "majority_rounds_total", "majority_graphs_sampled_total")
        }
        metrics.record_trials(trials=4, rounds=3, graphs_per_trial=3)
        assert metric_value("majority_trials_total") == before["majority_trials_total"] + 4
        assert metric_value("majority_rounds_total") == before["majority_rounds_total"] + 12
        assert metric_value("majority_graphs_sampled_total") == before["majority_graphs_sampled_total"] + 12

    @pytest.mark.sanity
    def test_render_exposition_format(self):
        metrics.last_p_hat.set(0.25)
        text = metrics.render().decode("utf-8")
        assert "# HELP majority_trials_total Protocol executions completed" in text
        assert "# TYPE majority_verify_cases_total counter" in text
        assert "majority_last_p_hat 0.25" in text

    def test_labelled_counters(self, metric_value):
        labels = {"suite": "metrics-test", "outcome": "failed"}
        metrics.verify_cases_total.labels(**labels).inc(2)
        assert metric_value("majority_verify_cases_total", labels) == 2.0

    def test_write_metrics(self, tmp_path):
        path = tmp_path / "majority.prom"
        metrics.write_metrics(path)
        assert "# TYPE majority_bound_evaluations_total counter" in path.read_text()

    def test_default_registry_untouched(self):
        from prometheus_client import REGISTRY
        assert REGISTRY.get_sample_value("majority_trials_total") is None
