"""
Timing of verification checks and other long numerical runs.
Tracks durations and flags slow or failing operations.
"""

import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

from solvegeo.config.settings import Config

logger = logging.getLogger(__name__)

SLOW_OPERATION_SECONDS = 60.0


@dataclass
class PerformanceMetric:
    """Performance metric data class"""
    operation: str
    start_time: float
    end_time: float
    duration: float
    success: bool
    error: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)


class PerformanceMonitor:
    """Collects one metric per tracked operation"""

    def __init__(self):
        self.metrics: List[PerformanceMetric] = []

    @contextmanager
    def track_operation(self, operation_name: str, metadata: Dict[str, Any] = None):
        """Context manager to track operation performance"""
        start_time = time.time()
        success, error = True, None
        try:
            yield
        except Exception as e:
            success, error = False, str(e)
            raise
        finally:
            end_time = time.time()
            duration = end_time - start_time
            self.metrics.append(PerformanceMetric(
                operation=operation_name,
                start_time=start_time,
                end_time=end_time,
                duration=duration,
                success=success,
                error=error,
                metadata=metadata or {},
            ))
            if success:
                logger.info(f"✅ {operation_name} completed in {duration:.2f}s")
            else:
                logger.error(f"❌ {operation_name} failed after {duration:.2f}s: {error}")

    def get_summary(self) -> Dict[str, Any]:
        """Get performance summary"""
        if not self.metrics:
            return {"message": "No metrics recorded"}

        operation_stats: Dict[str, Dict[str, float]] = {}
        for metric in self.metrics:
            stats = operation_stats.setdefault(metric.operation, {
                'count': 0,
                'total_duration': 0.0,
                'error_count': 0,
                'max_duration': 0.0,
            })
            stats['count'] += 1
            stats['total_duration'] += metric.duration
            stats['max_duration'] = max(stats['max_duration'], metric.duration)
            if not metric.success:
                stats['error_count'] += 1

        total_duration = sum(m.duration for m in self.metrics)
        failed = [m.operation for m in self.metrics if not m.success]
        return {
            'summary': {
                'total_operations': len(self.metrics),
                'failed_operations': len(failed),
                'total_duration': f"{total_duration:.2f}s",
            },
            'operation_stats': operation_stats,
            'bottlenecks': self._identify_bottlenecks(),
        }

    def _identify_bottlenecks(self) -> List[Dict[str, Any]]:
        slow = [m for m in self.metrics if m.duration > SLOW_OPERATION_SECONDS]
        if not slow:
            return []
        return [{
            'type': 'slow_operations',
            'description': f"{len(slow)} operations took more than {SLOW_OPERATION_SECONDS:.0f} seconds",
            'operations': [{'name': m.operation, 'duration': f"{m.duration:.2f}s"} for m in slow],
        }]

    def save_report(self, filename: str = None) -> str:
        """Save performance report to the output directory"""
        if not filename:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            filename = f"performance_report_{timestamp}.json"

        report = {
            'timestamp': datetime.now().isoformat(),
            'summary': self.get_summary(),
            'detailed_metrics': [
                {
                    'operation': m.operation,
                    'duration': m.duration,
                    'success': m.success,
                    'error': m.error,
                    'metadata': m.metadata,
                }
                for m in self.metrics
            ],
        }
        output_dir = Config.get_output_dir()
        os.makedirs(output_dir, exist_ok=True)
        filepath = os.path.join(output_dir, filename)
        with open(filepath, 'w') as f:
            json.dump(report, f, indent=2, default=str)
        logger.info(f"Performance report saved to {filepath}")
        return filepath
