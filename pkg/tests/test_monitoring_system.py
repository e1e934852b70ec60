"""
Unit tests for run logging and stage metrics.
"""
import logging

import pytest

from src.monitoring.logger import SimulationLogger, get_simulation_logger
from src.monitoring.metrics_collector import MetricsCollector, StageMetrics, get_metrics_collector


class TestMetricsCollector:
    """Test suite for MetricsCollector."""

    def setup_method(self):
        """Set up an empty collector."""
        self.collector = MetricsCollector()

    def test_collect_metric(self):
        """Test that metrics are stored as given."""
        self.collector.collect_metric(StageMetrics(stage='synthesize', processing_time_ms=1500, success=True))

        assert len(self.collector.metrics) == 1
        assert self.collector.metrics[0].stage == 'synthesize'
        assert self.collector.metrics[0].processing_time_ms == 1500

    def test_summary_per_stage(self):
        """Test that counts, failures, error rate and mean time are per stage."""
        for time_ms, success in ((100, True), (300, False), (200, True), (400, False)):
            self.collector.collect_metric(StageMetrics(stage='analyze', processing_time_ms=time_ms, success=success))
        self.collector.collect_metric(StageMetrics(stage='write', processing_time_ms=10, success=True))

        summary = self.collector.summary()

        assert summary['analyze']['count'] == 4
        assert summary['analyze']['failures'] == 2
        assert summary['analyze']['error_rate'] == pytest.approx(0.5)
        assert summary['analyze']['avg_time_ms'] == pytest.approx(250.0)
        assert summary['write']['error_rate'] == 0.0

    def test_empty_summary(self):
        """Test that an empty collector summarizes to nothing."""
        assert self.collector.summary() == {}

    def test_reset(self):
        """Test that reset drops all metrics."""
        self.collector.collect_metric(StageMetrics(stage='write', processing_time_ms=1, success=True))

        self.collector.reset()

        assert self.collector.metrics == []

    def test_to_dict(self):
        """Test that a metric serializes with its error message and timestamp."""
        metric = StageMetrics(stage='load', processing_time_ms=3, success=False, error_message='bad magic')

        data = metric.to_dict()

        assert data['error_message'] == 'bad magic'
        assert data['timestamp']

    def test_global_collector_is_shared(self):
        """Test that the global getter returns one instance."""
        assert get_metrics_collector() is get_metrics_collector()


class TestSimulationLogger:
    """Test suite for SimulationLogger."""

    def setup_method(self):
        """Set up a logger at DEBUG."""
        self.sim_logger = SimulationLogger('nvhet.monitoring_test', level='DEBUG')

    def test_stage_messages(self, caplog):
        """Test that stage messages use key=value fields."""
        with caplog.at_level(logging.DEBUG, logger='nvhet.monitoring_test'):
            self.sim_logger.log_stage_start('synthesize', 'run1')
            self.sim_logger.log_stage_complete('synthesize', 'run1', 12, True, {'samples': 400})

        messages = [record.getMessage() for record in caplog.records]
        assert messages[0] == "Stage started | stage=synthesize | run_id=run1"
        assert "status=SUCCESS" in messages[1]
        assert messages[1].endswith("| samples=400")

    def test_failures_are_errors(self, caplog):
        """Test that failed stages and errors log at ERROR."""
        with caplog.at_level(logging.DEBUG, logger='nvhet.monitoring_test'):
            self.sim_logger.log_stage_complete('load', 'run2', 1, False)
            self.sim_logger.log_error('load', 'run2', 'bad magic', {'exit_code': 4})
            self.sim_logger.log_run_complete('run2', 5, False)

        assert all(record.levelno == logging.ERROR for record in caplog.records)
        assert "exit_code=4" in caplog.records[1].getMessage()

    def test_run_lifecycle(self, caplog):
        """Test that run start and completion carry the command, seed and outputs."""
        with caplog.at_level(logging.DEBUG, logger='nvhet.monitoring_test'):
            self.sim_logger.log_run_start('run3', 'simulate', 7, {'format': 'csv'})
            self.sim_logger.log_run_complete('run3', 250, True, outputs=3)

        start, done = (record.getMessage() for record in caplog.records)
        assert "command=simulate | seed=7 | format=csv" in start
        assert "outputs=3" in done

    def test_threshold_warning(self, caplog):
        """Test that threshold crossings log at WARNING."""
        with caplog.at_level(logging.DEBUG, logger='nvhet.monitoring_test'):
            self.sim_logger.log_threshold_warning('run4', 'snr', 0.5, 1.0)

        assert caplog.records[0].levelno == logging.WARNING
        assert "quantity=snr | value=0.5 | threshold=1" in caplog.records[0].getMessage()

    def test_log_file(self, tmp_path):
        """Test that a log file receives DEBUG output."""
        log_file = tmp_path / 'logs' / 'run.log'
        sim_logger = SimulationLogger('nvhet.file_test', log_file=str(log_file), level='WARNING')

        sim_logger.log_stage_start('write', 'run5')
        for handler in sim_logger.logger.handlers:
            handler.flush()

        assert "stage=write" in log_file.read_text()

    def test_global_logger_is_shared(self):
        """Test that the global getter returns one instance."""
        assert get_simulation_logger() is get_simulation_logger()
