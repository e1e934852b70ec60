"""Environment configuration for simulation runs."""
import os
from dataclasses import dataclass
from typing import Dict, Any, Optional

from dotenv import load_dotenv

load_dotenv()


@dataclass
class PathConfig:
    """Preset and output locations."""
    preset_dir: str = "./presets"
    output_dir: str = "./runs"


@dataclass
class ExecutionConfig:
    """Worker pool and chunking."""
    threads: int = 1
    chunk_samples: int = 1 << 20


@dataclass
class LoggingConfig:
    """Log level and optional log file."""
    level: str = "INFO"
    log_file: Optional[str] = None


class Config:
    """Main configuration class."""

    def __init__(self):
        self.paths = PathConfig(
            preset_dir=os.getenv('NVHET_PRESET_DIR', './presets'),
            output_dir=os.getenv('NVHET_OUTPUT_DIR', './runs')
        )

        self.execution = ExecutionConfig(
            threads=max(1, int(os.getenv('NVHET_THREADS', '1'))),
            chunk_samples=max(1, int(os.getenv('NVHET_CHUNK_SAMPLES', str(1 << 20))))
        )

        self.logging = LoggingConfig(
            level=os.getenv('NVHET_LOG_LEVEL', 'INFO').upper(),
            log_file=os.getenv('NVHET_LOG_FILE') or None
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            'paths': self.paths.__dict__,
            'execution': self.execution.__dict__,
            'logging': self.logging.__dict__
        }


# Global configuration instance
config = Config()
