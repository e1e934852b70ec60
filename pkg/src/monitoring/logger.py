"""Structured logging for simulation runs."""
import logging
import sys
from pathlib import Path
from typing import Optional, Dict, Any


def _format_metadata(metadata: Optional[Dict[str, Any]]) -> str:
    if not metadata:
        return ""
    return " | " + " | ".join(f"{k}={v}" for k, v in metadata.items())


class SimulationLogger:
    """
    Logger for run orchestration with ``key=value | key=value`` messages.

    Console output goes to stdout; an optional log file receives DEBUG
    and above.
    """

    def __init__(self, name: str, log_file: Optional[str] = None, level: str = "INFO"):
        """
        Initialize the simulation logger.

        Args:
            name: Logger name
            log_file: Optional log file path
            level: Console log level name
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.DEBUG if log_file else getattr(logging, level.upper(), logging.INFO))

        # Remove existing handlers to avoid duplicates
        self.logger.handlers.clear()

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(getattr(logging, level.upper(), logging.INFO))
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if log_file:
            log_path = Path(log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def log_run_start(self, run_id: str, command: str, seed: Optional[int] = None,
                      metadata: Optional[Dict[str, Any]] = None) -> None:
        self.logger.info(
            f"Run started | run_id={run_id} | command={command} | seed={seed}"
            + _format_metadata(metadata)
        )

    def log_stage_start(self, stage: str, run_id: str) -> None:
        self.logger.info(f"Stage started | stage={stage} | run_id={run_id}")

    def log_stage_complete(
        self,
        stage: str,
        run_id: str,
        processing_time_ms: int,
        success: bool,
        metadata: Optional[Dict[str, Any]] = None
    ) -> None:
        """
        Log the completion of a run stage.

        Args:
            stage: Stage name
            run_id: Run identifier
            processing_time_ms: Wall-clock time of the stage
            success: Whether the stage succeeded
            metadata: Optional additional key=value pairs
        """
        status = "SUCCESS" if success else "FAILED"
        message = (
            f"Stage completed | stage={stage} | run_id={run_id} | "
            f"status={status} | processing_time_ms={processing_time_ms}"
            + _format_metadata(metadata)
        )
        if success:
            self.logger.info(message)
        else:
            self.logger.error(message)

    def log_error(self, stage: str, run_id: str, error: str,
                  metadata: Optional[Dict[str, Any]] = None) -> None:
        self.logger.error(
            f"Error | stage={stage} | run_id={run_id} | error={error}" + _format_metadata(metadata)
        )

    def log_run_complete(self, run_id: str, total_time_ms: int, success: bool,
                         outputs: int = 0) -> None:
        status = "SUCCESS" if success else "FAILED"
        message = (
            f"Run completed | run_id={run_id} | status={status} | "
            f"total_time_ms={total_time_ms} | outputs={outputs}"
        )
        if success:
            self.logger.info(message)
        else:
            self.logger.error(message)

    def log_threshold_warning(self, run_id: str, quantity: str, value: float, threshold: float) -> None:
        """Log a derived quantity that crossed a sanity threshold, e.g. an SNR below detection."""
        self.logger.warning(
            f"Threshold crossed | run_id={run_id} | quantity={quantity} | "
            f"value={value:.4g} | threshold={threshold:.4g}"
        )


# Global logger instance
_simulation_logger = None


def get_simulation_logger(log_file: Optional[str] = None, level: str = "INFO") -> SimulationLogger:
    """
    Get the global simulation logger instance.

    Args:
        log_file: Optional log file path (used on first call only)
        level: Console level (used on first call only)

    Returns:
        SimulationLogger instance
    """
    global _simulation_logger
    if _simulation_logger is None:
        _simulation_logger = SimulationLogger('nvhet', log_file, level)
    return _simulation_logger
