"""Run orchestrator: simulate, analyze, sweep and report with per-stage metrics."""
import json
import logging
import math
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .. import __version__
from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.rates import pump_rate
from ..dynamics.scenario import DriveScenario
from ..dynamics.integrator import StepSizeError
from ..dynamics.oscillation import SettlingError
from ..synthesis.detector import DetectorModel
from ..synthesis.trace_synthesizer import AliasingError, synthesize_trace, direct_detection_drop
from ..synthesis.calibration import NoiseFloorError, calibrate_noise_to_sensitivity
from ..analysis.spectrum import amplitude_spectrum
from ..analysis.peaks import PeakEstimate, peak_snr, find_peaks
from ..analysis.fitting import DegenerateDataError, exponential_rate_fit
from ..analysis.linewidth import LinewidthEstimate, beat_linewidth
from ..analysis.disambiguation import disambiguate_frequency
from ..sensing.operating_point import OperatingPoint
from ..sensing.snr import sensitivity_report, format_report, rows_to_csv
from ..sensing.grid_planner import plan_reference_grid
from ..repository.models import Spectrum, TimeTrace
from ..repository.artifact_store import (
    TraceFormatError,
    RunManifest,
    write_trace,
    read_trace,
    write_text,
    write_manifest,
    read_manifest,
    file_digest,
)
from ..monitoring.logger import SimulationLogger, get_simulation_logger
from ..monitoring.metrics_collector import MetricsCollector, StageMetrics, get_metrics_collector
from .config import config
from .errors import PipelineError, ScenarioConfigError, NumericalFailure, ArtifactIOError
from .scenario_config import (
    ScenarioConfig,
    AnalysisSection,
    dump_scenario,
    parse_scenario,
    set_by_path,
    with_seed,
)

logger = logging.getLogger(__name__)

NUMERICAL_ERRORS = (
    StepSizeError,
    SettlingError,
    AliasingError,
    NoiseFloorError,
    DegenerateDataError,
    ArithmeticError,
    np.linalg.LinAlgError,
)

# Baseline window in bins when the analysis does not set noise_span_hz
DEFAULT_NOISE_BINS = 200
# Settling time of a gated segment in units of its relaxation time
SETTLE_TIME_CONSTANTS = 5.0


def translate_error(error: Exception) -> PipelineError:
    """Map a library exception onto the run-level error carrying its exit code."""
    if isinstance(error, PipelineError):
        return error
    if isinstance(error, (TraceFormatError, OSError)):
        return ArtifactIOError(str(error))
    if isinstance(error, NUMERICAL_ERRORS):
        return NumericalFailure(str(error))
    if isinstance(error, ValueError):
        return ScenarioConfigError(str(error))
    return PipelineError(f"{type(error).__name__}: {error}")


@dataclass(frozen=True)
class RunInputs:
    """Domain objects resolved from a scenario document."""
    params: NVEnsembleParams
    constants: PhysicalConstants
    drive: DriveScenario
    detector: DetectorModel
    beat_hz: float


@dataclass
class TraceAnalysis:
    """Everything the analysis stage extracted from one trace."""
    trace_samples: int
    sample_rate: float
    spectrum: Spectrum
    peaks: List[PeakEstimate]
    beat: Optional[PeakEstimate] = None
    linewidth: Optional[LinewidthEstimate] = None
    exponential_rates: List[float] = field(default_factory=list)
    candidates: Optional[List[float]] = None

    def report_text(self) -> str:
        """Key=value lines for scripts."""
        lines = [
            f"samples={self.trace_samples}",
            f"sample_rate_hz={self.sample_rate:.10g}",
            f"duration_s={self.spectrum.duration:.10g}",
            f"window={self.spectrum.window}",
            f"resolution_hz={self.spectrum.resolution:.6g}",
            f"peaks_found={len(self.peaks)}",
        ]
        if self.beat is not None:
            lines += [
                f"peak_frequency_hz={self.beat.frequency:.10g}",
                f"peak_amplitude_v={self.beat.amplitude:.6g}",
                f"snr={self.beat.snr:.6g}",
            ]
        if self.linewidth is not None:
            lines += [
                f"fwhm_hz={self.linewidth.fwhm:.6g}",
                f"fwhm_times_duration={self.linewidth.fwhm_times_duration:.6g}",
            ]
        for index, rate in enumerate(self.exponential_rates):
            lines.append(f"exp_rate_{index}_hz={rate:.6g}")
        if self.candidates is not None:
            lines.append("candidates_hz=" + ";".join(f"{c:.10g}" for c in self.candidates))
            unique = f"{self.candidates[0]:.10g}" if len(self.candidates) == 1 else "none"
            lines.append(f"unique_frequency_hz={unique}")
        return "\n".join(lines) + "\n"

    def peaks_csv(self) -> str:
        rows = [{'frequency_hz': p.frequency, 'amplitude_v': p.amplitude, 'snr': p.snr} for p in self.peaks]
        return rows_to_csv(rows) or "frequency_hz,amplitude_v,snr\n"


@dataclass
class SimulationResult:
    run_id: str
    trace: TimeTrace
    outputs: List[Path]
    manifest_path: Path


@dataclass
class AnalysisResult:
    run_id: str
    analysis: TraceAnalysis
    outputs: List[Path]
    manifest_path: Path


@dataclass
class SweepResult:
    run_id: str
    rows: List[Dict[str, Any]]
    table_path: Path
    manifest_path: Path


@dataclass
class ReplayResult:
    manifest_path: Path
    mismatched: List[str]

    @property
    def matches(self) -> bool:
        return not self.mismatched


def operating_point_from_scenario(scenario: ScenarioConfig) -> Tuple[OperatingPoint, float]:
    """
    Operating point and signal amplitude implied by a scenario's tones.

    The weakest tone is the signal; it beats against the nearest of the
    remaining tones, all of which count as active reference channels.

    Raises:
        ValueError: If the scenario has fewer than two tones
    """
    drive = scenario.to_scenario()
    if drive.signal_index is None:
        raise ValueError("an operating point needs a reference tone and a signal tone")
    signal = drive.tones[drive.signal_index]
    references = [tone for index, tone in enumerate(drive.tones) if index != drive.signal_index]
    nearest = min(references, key=lambda tone: abs(tone.frequency - signal.frequency))
    op_point = OperatingPoint(
        laser_power=scenario.laser.power_w,
        reference_b=nearest.amplitude_b,
        delta=abs(nearest.frequency - signal.frequency),
        channels=len(references),
        total_time=scenario.run.duration_s,
    )
    return op_point, signal.amplitude_b


def build_run_inputs(scenario: ScenarioConfig) -> RunInputs:
    """
    Resolve and check the domain objects of a scenario, calibrating the
    laser noise when the detector asks for a target sensitivity.
    """
    params = scenario.to_params()
    constants = scenario.to_constants()
    drive = scenario.to_scenario()
    drive.validate(params)
    detector = scenario.to_detector()
    beat = 0.0
    if drive.signal_index is not None:
        op_point, _ = operating_point_from_scenario(scenario)
        beat = op_point.delta
        target = scenario.detector.calibrate_sensitivity_t_per_rt_hz
        if target is not None:
            detector = calibrate_noise_to_sensitivity(detector, params, target, op_point, constants)
    elif scenario.detector.calibrate_sensitivity_t_per_rt_hz is not None:
        raise ValueError("noise calibration needs a reference tone and a signal tone")
    return RunInputs(params=params, constants=constants, drive=drive, detector=detector, beat_hz=beat)


def analyze_trace(trace: TimeTrace, analysis: AnalysisSection, beat_hz: Optional[float] = None) -> TraceAnalysis:
    """
    Run the requested analysis pipeline on one trace.

    The beat frequency comes from the analysis request, else from
    ``beat_hz`` (usually the trace metadata); without one no beat peak
    is measured.
    """
    spectrum = amplitude_spectrum(trace, window=analysis.window)
    peaks = find_peaks(spectrum, threshold_snr=analysis.peak_threshold_snr,
                       max_frequency=analysis.max_frequency_hz)
    result = TraceAnalysis(trace_samples=trace.samples.size, sample_rate=trace.sample_rate,
                           spectrum=spectrum, peaks=peaks)

    beat = analysis.beat_hz if analysis.beat_hz is not None else beat_hz
    if beat:
        noise_span = analysis.noise_span_hz or DEFAULT_NOISE_BINS * spectrum.resolution
        result.beat = peak_snr(spectrum, beat, analysis.signal_span_hz, noise_span)
        if analysis.linewidth:
            result.linewidth = beat_linewidth(trace, result.beat.frequency, window=analysis.window)
            result.beat = replace(result.beat, fwhm=result.linewidth.fwhm)
    result.exponential_rates = [
        exponential_rate_fit(trace, segment.start_s, segment.stop_s) for segment in analysis.exponential_fits
    ]
    if analysis.disambiguation is not None:
        request = analysis.disambiguation
        result.candidates = disambiguate_frequency(
            analysis.to_measurements(), tuple(request.band_hz), request.tolerance_hz
        )
    return result


def _new_run_id() -> str:
    return uuid.uuid4().hex[:12]


def _digests(paths: Sequence[Path], root: Path) -> Dict[str, str]:
    return {str(path.relative_to(root)): file_digest(path) for path in paths}


class RunOrchestrator:
    """
    Drives the command workflows as timed stages:
    1. configure (scenario -> domain objects)
    2. synthesize (rate equations + detector noise)
    3. analyze (spectrum, peaks, fits, disambiguation)
    4. write (artifacts and an atomic manifest)
    """

    def __init__(
        self,
        threads: Optional[int] = None,
        chunk_samples: Optional[int] = None,
        sim_logger: Optional[SimulationLogger] = None,
        metrics: Optional[MetricsCollector] = None
    ):
        """
        Initialize the orchestrator.

        Args:
            threads: Sweep worker count (defaults to NVHET_THREADS)
            chunk_samples: Noise chunk length (defaults to NVHET_CHUNK_SAMPLES)
            sim_logger: Structured run logger
            metrics: Stage metrics sink
        """
        self.threads = max(1, threads or config.execution.threads)
        self.chunk_samples = chunk_samples or config.execution.chunk_samples
        self.sim_logger = sim_logger or get_simulation_logger(config.logging.log_file, config.logging.level)
        self.metrics = metrics or get_metrics_collector()

    def _stage(self, run_id: str, stage: str, function, *args, **kwargs):
        """Execute one stage, recording its metrics and translating its errors."""
        self.sim_logger.log_stage_start(stage, run_id)
        start_time = time.time()
        try:
            result = function(*args, **kwargs)
        except Exception as e:
            processing_time_ms = int((time.time() - start_time) * 1000)
            error = translate_error(e)
            self.metrics.collect_metric(StageMetrics(
                stage=stage, processing_time_ms=processing_time_ms, success=False, error_message=str(error)
            ))
            self.sim_logger.log_error(stage, run_id, str(error), {'exit_code': error.exit_code})
            self.sim_logger.log_stage_complete(stage, run_id, processing_time_ms, False)
            if error is e:
                raise
            raise error from e
        processing_time_ms = int((time.time() - start_time) * 1000)
        self.metrics.collect_metric(StageMetrics(stage=stage, processing_time_ms=processing_time_ms, success=True))
        self.sim_logger.log_stage_complete(stage, run_id, processing_time_ms, True)
        return result

    def _run(self, command: str, seed: Optional[int], body, metadata: Optional[Dict[str, Any]] = None):
        run_id = _new_run_id()
        start_time = time.time()
        self.sim_logger.log_run_start(run_id, command, seed, metadata)
        try:
            result = body(run_id, start_time)
        except Exception as e:
            self.sim_logger.log_run_complete(run_id, int((time.time() - start_time) * 1000), False)
            error = translate_error(e)
            if error is e:
                raise
            raise error from e
        outputs = len(getattr(result, 'outputs', None) or getattr(result, 'rows', None) or [])
        self.sim_logger.log_run_complete(run_id, int((time.time() - start_time) * 1000), True, outputs)
        return result

    def _synthesize(self, run_id: str, scenario: ScenarioConfig) -> Tuple[TimeTrace, RunInputs]:
        inputs = self._stage(run_id, 'configure', build_run_inputs, scenario)
        trace = self._stage(
            run_id, 'synthesize', synthesize_trace,
            inputs.drive, inputs.params, inputs.detector,
            seed=scenario.run.seed,
            constants=inputs.constants,
            chunk_samples=self.chunk_samples,
            simplified_envelope=scenario.run.simplified_envelope,
        )
        metadata = dict(trace.metadata)
        metadata['beat_hz'] = inputs.beat_hz
        trace = TimeTrace(trace.sample_rate, trace.samples, trace.seed, trace.fingerprint, metadata)
        return trace, inputs

    def _write_manifest(self, run_id: str, out_dir: Path, manifest: RunManifest) -> Path:
        return self._stage(run_id, 'manifest', write_manifest, manifest, out_dir)

    def simulate(
        self,
        scenario: ScenarioConfig,
        out_dir: Union[str, Path],
        seed: Optional[int] = None,
        fmt: str = 'csv'
    ) -> SimulationResult:
        """
        Synthesize the trace of a scenario and store it with its manifest.

        Args:
            scenario: Validated scenario document
            out_dir: Output directory
            seed: Overrides run.seed when given
            fmt: Trace format, 'csv' or 'binary'

        Returns:
            SimulationResult

        Raises:
            ScenarioConfigError, NumericalFailure, ArtifactIOError
        """
        if seed is not None:
            scenario = with_seed(scenario, seed)
        out_dir = Path(out_dir)

        def body(run_id: str, start_time: float) -> SimulationResult:
            trace, _ = self._synthesize(run_id, scenario)

            def write() -> List[Path]:
                paths = write_trace(trace, out_dir, fmt)
                paths.append(write_text(out_dir / 'scenario.json', dump_scenario(scenario)))
                return paths

            outputs = self._stage(run_id, 'write', write)
            manifest = RunManifest(
                command='simulate',
                config=scenario.model_dump(mode='json'),
                seed=scenario.run.seed,
                version=__version__,
                outputs=_digests(outputs, out_dir),
                wall_clock_s=time.time() - start_time,
                arguments={'format': fmt},
            )
            manifest_path = self._write_manifest(run_id, out_dir, manifest)
            return SimulationResult(run_id, trace, outputs, manifest_path)

        return self._run('simulate', scenario.run.seed, body, {'format': fmt, 'out': out_dir})

    def analyze(
        self,
        trace_path: Union[str, Path],
        analysis: Optional[AnalysisSection],
        out_dir: Union[str, Path]
    ) -> AnalysisResult:
        """
        Analyze a stored trace: spectrum, peaks, optional linewidth,
        exponential fits and frequency disambiguation.

        Writes spectrum.csv, peaks.csv, report.txt and manifest.json.
        """
        trace_path = Path(trace_path)
        analysis = analysis or AnalysisSection()
        out_dir = Path(out_dir)

        def body(run_id: str, start_time: float) -> AnalysisResult:
            trace = self._stage(run_id, 'load', read_trace, trace_path)
            stored_beat = trace.metadata.get('beat_hz')
            beat = float(stored_beat) if stored_beat else None
            result = self._stage(run_id, 'analyze', analyze_trace, trace, analysis, beat)
            if result.beat is not None and math.isfinite(result.beat.snr) and result.beat.snr < 1.0:
                self.sim_logger.log_threshold_warning(run_id, 'snr', result.beat.snr, 1.0)

            def write() -> List[Path]:
                return [
                    result.spectrum.to_csv(out_dir / 'spectrum.csv'),
                    write_text(out_dir / 'peaks.csv', result.peaks_csv()),
                    write_text(out_dir / 'report.txt', result.report_text()),
                ]

            outputs = self._stage(run_id, 'write', write)
            manifest = RunManifest(
                command='analyze',
                config=analysis.model_dump(mode='json'),
                seed=trace.seed,
                version=__version__,
                outputs=_digests(outputs, out_dir),
                wall_clock_s=time.time() - start_time,
                arguments={'trace': str(trace_path.resolve()), 'trace_sha256': file_digest(trace_path)},
            )
            manifest_path = self._write_manifest(run_id, out_dir, manifest)
            return AnalysisResult(run_id, result, outputs, manifest_path)

        return self._run('analyze', None, body, {'trace': trace_path})

    def _sweep_point(
        self,
        run_id: str,
        scenario: ScenarioConfig,
        parameter: str,
        value: float,
        index: int,
        seed: int,
        points_dir: Path
    ) -> Path:
        point = with_seed(set_by_path(scenario, parameter, value), seed)
        trace, inputs = self._synthesize(run_id, point)
        analysis = self._stage(run_id, 'analyze', analyze_trace, trace, point.analysis or AnalysisSection(),
                               inputs.beat_hz or None)
        beat = analysis.beat
        row: Dict[str, Any] = {
            'index': index,
            parameter: value,
            'seed': seed,
            'beat_hz': inputs.beat_hz,
            'peak_frequency_hz': beat.frequency if beat else math.nan,
            'amplitude_v': beat.amplitude if beat else math.nan,
            'snr': beat.snr if beat else math.nan,
            'fwhm_hz': analysis.linewidth.fwhm if analysis.linewidth else math.nan,
            'direct_drop_v': self._direct_drop(point, inputs, trace),
            'mean_v': float(np.mean(trace.samples)),
        }
        return self._stage(run_id, 'write', write_text, points_dir / f"point_{index:04d}.json",
                           json.dumps(row, sort_keys=True) + "\n")

    @staticmethod
    def _direct_drop(point: ScenarioConfig, inputs: RunInputs, trace: TimeTrace) -> float:
        """Microwave-off minus settled microwave-on voltage over the first gating window."""
        if not point.run.gating_s:
            return math.nan
        gate_on, gate_off = sorted(point.run.gating_s)[0]
        if gate_on <= 0:
            return math.nan
        decay = (pump_rate(inputs.drive.laser_power, inputs.params) + inputs.params.gamma1
                 + inputs.drive.mean_relaxation(inputs.params, inputs.constants))
        return direct_detection_drop(trace, gate_on, SETTLE_TIME_CONSTANTS / decay, gate_off)

    def sweep(
        self,
        scenario: ScenarioConfig,
        parameter: str,
        values: Sequence[float],
        out_dir: Union[str, Path],
        seed: Optional[int] = None
    ) -> SweepResult:
        """
        Simulate and analyze the scenario once per parameter value.

        Points run on a thread pool; point i uses seed + i and writes
        points/point_i.json, which are merged by index into sweep.csv.

        Args:
            scenario: Base scenario
            parameter: Dotted key, e.g. 'tones.1.b_tesla' or 'run.duration_s'
            values: Parameter values, at least two distinct
            out_dir: Output directory
            seed: Base seed (defaults to run.seed)

        Raises:
            ScenarioConfigError: Unknown parameter or degenerate range
        """
        values = [float(v) for v in values]
        if len(values) < 2 or len(set(values)) < 2:
            raise ScenarioConfigError(f"degenerate sweep range {values}", path=parameter)
        base_seed = scenario.run.seed if seed is None else seed
        scenario = with_seed(scenario, base_seed)
        out_dir = Path(out_dir)
        points_dir = out_dir / 'points'

        def body(run_id: str, start_time: float) -> SweepResult:
            self._stage(run_id, 'configure', set_by_path, scenario, parameter, values[0])
            points_dir.mkdir(parents=True, exist_ok=True)
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                futures = [
                    pool.submit(self._sweep_point, run_id, scenario, parameter, value, index,
                                base_seed + index, points_dir)
                    for index, value in enumerate(values)
                ]
                point_paths = [future.result() for future in futures]

            def merge() -> Tuple[List[Dict[str, Any]], Path]:
                rows = [json.loads(path.read_text(encoding='utf-8')) for path in point_paths]
                rows.sort(key=lambda row: row['index'])
                return rows, write_text(out_dir / 'sweep.csv', rows_to_csv(rows))

            rows, table_path = self._stage(run_id, 'merge', merge)
            manifest = RunManifest(
                command='sweep',
                config=scenario.model_dump(mode='json'),
                seed=base_seed,
                version=__version__,
                outputs=_digests([table_path] + point_paths, out_dir),
                wall_clock_s=time.time() - start_time,
                arguments={'parameter': parameter, 'values': values, 'threads': self.threads},
            )
            manifest_path = self._write_manifest(run_id, out_dir, manifest)
            return SweepResult(run_id, rows, table_path, manifest_path)

        return self._run('sweep', base_seed, body, {'parameter': parameter, 'points': len(values)})

    def report(
        self,
        params: NVEnsembleParams,
        op_point: OperatingPoint,
        constants: Optional[PhysicalConstants] = None,
        signal_b: float = 1e-12,
        detector: Optional[DetectorModel] = None,
        band: Optional[float] = None,
        m_max: int = 240,
        spacing: float = 2000.0
    ) -> str:
        """Sensitivity report text, with a reference-grid plan when a band is given."""

        def build() -> str:
            text = format_report(sensitivity_report(params, op_point, constants, signal_b, detector))
            if band is not None:
                plan = plan_reference_grid(band, params, m_max, spacing)
                text += (
                    f"grid_channels={plan.channels}\n"
                    f"grid_spacing_hz={plan.spacing:.6g}\n"
                    f"grid_penalty={plan.sensitivity_penalty:.6g}\n"
                    f"grid_exceeds_linewidth={str(plan.exceeds_linewidth).lower()}\n"
                )
            return text

        return self._run('report', None, lambda run_id, _: self._stage(run_id, 'report', build))

    def replay(self, manifest_path: Union[str, Path], out_dir: Union[str, Path]) -> ReplayResult:
        """
        Re-run the command recorded in a manifest and compare output digests.

        Raises:
            ScenarioConfigError: If the manifest records an unknown command
        """
        run_id = _new_run_id()
        recorded = self._stage(run_id, 'load', read_manifest, manifest_path)
        out_dir = Path(out_dir)
        if recorded.command == 'simulate':
            scenario = self._stage(run_id, 'configure', parse_scenario, recorded.config)
            result = self.simulate(scenario, out_dir, fmt=recorded.arguments.get('format', 'csv'))
        elif recorded.command == 'sweep':
            scenario = self._stage(run_id, 'configure', parse_scenario, recorded.config)
            result = self.sweep(scenario, recorded.arguments['parameter'], recorded.arguments['values'], out_dir)
        elif recorded.command == 'analyze':
            analysis = AnalysisSection.model_validate(recorded.config)
            result = self.analyze(recorded.arguments['trace'], analysis, out_dir)
        else:
            raise ScenarioConfigError(f"cannot replay command '{recorded.command}'", path="command")
        fresh = read_manifest(result.manifest_path)
        mismatched = sorted(
            name for name, digest in recorded.outputs.items() if fresh.outputs.get(name) != digest
        )
        if mismatched:
            logger.warning(f"Replay differs from manifest | manifest={manifest_path} | files={mismatched}")
        return ReplayResult(manifest_path=Path(manifest_path), mismatched=mismatched)
