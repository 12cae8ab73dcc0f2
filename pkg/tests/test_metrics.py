"""Tests for the metrics module."""
import time
from unittest.mock import patch

import pytest

from asg1_iga import metrics as metrics_module
from asg1_iga.cli_io import example_path
from asg1_iga.metrics import MetricsCollector, StageMetrics, TimedOperation, get_metrics
from asg1_iga.pipeline import build_basis, load_problem


class TestStageMetrics:
    """Tests for StageMetrics dataclass."""

    def test_default_values(self):
        """Test an empty stage."""
        metrics = StageMetrics()
        assert metrics.runs == 0
        assert metrics.mean_ms == 0.0
        assert metrics.median_ms == 0.0
        assert metrics.ms_per_function is None

    def test_mean_and_median(self):
        """Test mean over all runs and median over the retained durations."""
        metrics = StageMetrics(runs=4, total_ms=40.0)
        metrics.durations.extend([1.0, 4.0, 30.0, 5.0])
        assert metrics.mean_ms == 10.0
        assert metrics.median_ms == 4.5

    def test_ms_per_function(self):
        """Test time per function uses the reported sizes."""
        assert StageMetrics(runs=2, total_ms=50.0, total_size=100).ms_per_function == 0.5


class TestMetricsCollector:
    """Tests for MetricsCollector class."""

    def setup_method(self):
        """Reset singleton before each test."""
        MetricsCollector._instance = None

    def test_singleton(self):
        """Test get_metrics returns one instance."""
        assert get_metrics() is get_metrics()

    def test_record_stage(self):
        """Test stage timings and sizes are aggregated."""
        collector = MetricsCollector()
        collector.record_stage("basis", 10.0, True, size=23)
        collector.record_stage("basis", 30.0, False, size=107)
        stage = collector.get_summary()["stages"]["basis"]
        assert stage["runs"] == 2
        assert stage["failures"] == 1
        assert stage["mean_ms"] == 20.0
        assert stage["slowest_ms"] == 30.0
        assert stage["largest_size"] == 107
        assert stage["ms_per_function"] == pytest.approx(40.0 / 130, abs=1e-4)

    def test_stage_without_size(self):
        """Test stages that report no size have no per-function time."""
        collector = MetricsCollector()
        collector.record_stage("gluing", 2.0, True)
        stage = collector.get_summary()["stages"]["gluing"]
        assert stage["largest_size"] == 0
        assert stage["ms_per_function"] is None

    def test_cache_hit_rate(self):
        """Test the cache hit rate."""
        collector = MetricsCollector()
        collector.record_cache_hit()
        collector.record_cache_hit()
        collector.record_cache_miss()
        cache = collector.get_summary()["cache"]
        assert cache["hits"] == 2
        assert cache["hit_rate"] == pytest.approx(2 / 3)

    def test_history_window(self, monkeypatch):
        """Test only the most recent durations are kept."""
        monkeypatch.setattr(metrics_module, "HISTORY_LENGTH", 5)
        collector = MetricsCollector()
        for elapsed in range(10):
            collector.record_stage("mass", float(elapsed), True)
        assert list(collector._stages["mass"].durations) == [5.0, 6.0, 7.0, 8.0, 9.0]
        assert collector._stages["mass"].runs == 10

    @patch.dict("os.environ", {"ASG1_METRICS_ENABLED": "false"})
    def test_disabled(self):
        """Test nothing is recorded when disabled."""
        collector = MetricsCollector()
        collector.record_stage("gluing", 1.0, True)
        collector.record_cache_hit()
        summary = collector.get_summary()
        assert summary["stages"] == {}
        assert summary["cache"]["hits"] == 0

    def test_format_summary(self):
        """Test the text table lists stages, sizes and cache counts."""
        collector = MetricsCollector()
        collector.record_stage("condition", 12.5, True, size=57)
        text = collector.format_summary()
        assert "condition" in text
        assert "n=57" in text
        assert "cache hits=0 misses=0" in text

    def test_reset(self):
        """Test reset clears everything."""
        collector = MetricsCollector()
        collector.record_stage("verify", 1.0, True)
        collector.record_cache_miss()
        collector.reset()
        summary = collector.get_summary()
        assert summary["stages"] == {}
        assert summary["cache"]["misses"] == 0


class TestTimedOperation:
    """Tests for TimedOperation context manager."""

    def setup_method(self):
        MetricsCollector._instance = None

    def test_records_success(self):
        """Test a successful stage is recorded."""
        with TimedOperation("matrices"):
            time.sleep(0.01)
        stage = get_metrics().get_summary()["stages"]["matrices"]
        assert stage["runs"] == 1
        assert stage["failures"] == 0
        assert stage["slowest_ms"] >= 5

    def test_size_set_inside_block(self):
        """Test a size assigned inside the block is recorded."""
        with TimedOperation("basis") as timer:
            timer.size = 42
        assert get_metrics().get_summary()["stages"]["basis"]["largest_size"] == 42

    def test_records_failure_and_reraises(self):
        """Test a failing stage is recorded and the exception propagates."""
        with pytest.raises(ValueError):
            with TimedOperation("gluing"):
                raise ValueError("boom")
        assert get_metrics().get_summary()["stages"]["gluing"]["failures"] == 1

    def test_pipeline_reports_basis_size(self):
        """Test building the example basis records its function count."""
        build_basis(load_problem(example_path(), k=0))
        assert get_metrics().get_summary()["stages"]["basis"]["largest_size"] == 23
