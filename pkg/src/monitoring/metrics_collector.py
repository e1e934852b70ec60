"""Per-stage timing and outcome metrics for simulation runs."""
import logging
from collections import defaultdict
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from typing import Dict, List, Optional, Any

logger = logging.getLogger(__name__)


@dataclass
class StageMetrics:
    """Outcome of one orchestrator stage."""
    stage: str
    processing_time_ms: int
    success: bool
    error_message: Optional[str] = None
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class MetricsCollector:
    """Collects stage metrics in memory and summarizes them per stage."""

    def __init__(self):
        self.metrics: List[StageMetrics] = []

    def collect_metric(self, metric: StageMetrics) -> None:
        self.metrics.append(metric)
        logger.debug(f"Collected metric for stage {metric.stage}: success={metric.success}")

    def summary(self) -> Dict[str, Dict[str, float]]:
        """
        Per-stage counts, failure rate and mean processing time.

        Returns:
            Mapping stage -> {'count', 'failures', 'error_rate', 'avg_time_ms'}
        """
        grouped: Dict[str, List[StageMetrics]] = defaultdict(list)
        for metric in self.metrics:
            grouped[metric.stage].append(metric)
        result = {}
        for stage, items in grouped.items():
            failures = sum(1 for item in items if not item.success)
            result[stage] = {
                'count': len(items),
                'failures': failures,
                'error_rate': failures / len(items),
                'avg_time_ms': sum(item.processing_time_ms for item in items) / len(items),
            }
        return result

    def reset(self) -> None:
        self.metrics.clear()


# Global metrics collector instance
_metrics_collector = None


def get_metrics_collector() -> MetricsCollector:
    global _metrics_collector
    if _metrics_collector is None:
        _metrics_collector = MetricsCollector()
    return _metrics_collector
