"""
Run monitoring: structured logging and per-stage metrics.
"""

from .metrics_collector import (
    MetricsCollector,
    StageMetrics,
    get_metrics_collector
)
from .logger import (
    SimulationLogger,
    get_simulation_logger
)

__all__ = [
    # Metrics
    'MetricsCollector',
    'StageMetrics',
    'get_metrics_collector',

    # Logging
    'SimulationLogger',
    'get_simulation_logger',
]
