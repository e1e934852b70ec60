# Run orchestration module
from .config import Config, config
from .errors import PipelineError, ScenarioConfigError, NumericalFailure, ArtifactIOError
from .scenario_config import (
    ScenarioConfig,
    AnalysisSection,
    parse_scenario,
    load_scenario,
    load_analysis,
    dump_scenario,
    scenario_json_schema,
    set_by_path,
    with_seed,
)
from .orchestrator import (
    RunOrchestrator,
    RunInputs,
    TraceAnalysis,
    SimulationResult,
    AnalysisResult,
    SweepResult,
    ReplayResult,
    analyze_trace,
    build_run_inputs,
    operating_point_from_scenario,
    translate_error,
)

__all__ = [
    'Config',
    'config',
    'PipelineError',
    'ScenarioConfigError',
    'NumericalFailure',
    'ArtifactIOError',
    'ScenarioConfig',
    'AnalysisSection',
    'parse_scenario',
    'load_scenario',
    'load_analysis',
    'dump_scenario',
    'scenario_json_schema',
    'set_by_path',
    'with_seed',
    'RunOrchestrator',
    'RunInputs',
    'TraceAnalysis',
    'SimulationResult',
    'AnalysisResult',
    'SweepResult',
    'ReplayResult',
    'analyze_trace',
    'build_run_inputs',
    'operating_point_from_scenario',
    'translate_error',
]
