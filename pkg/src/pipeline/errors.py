"""Run-level errors and their process exit codes."""


class PipelineError(Exception):
    """Base class for errors surfaced by the run orchestrator."""
    exit_code = 1


class ScenarioConfigError(PipelineError):
    """Scenario document failed schema validation."""
    exit_code = 2

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NumericalFailure(PipelineError):
    """Integration, aliasing, calibration or fitting failure."""
    exit_code = 3


class ArtifactIOError(PipelineError):
    """Reading or writing a run artifact failed."""
    exit_code = 4
