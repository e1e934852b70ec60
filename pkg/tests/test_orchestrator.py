"""
Tests for the run orchestrator: simulate, analyze, sweep, report and replay
workflows with their artifacts, metrics and error mapping.
"""
import json

import numpy as np
import pytest

from src.dynamics.integrator import StepSizeError
from src.analysis.fitting import DegenerateDataError, power_law_fit
from src.monitoring.logger import SimulationLogger
from src.monitoring.metrics_collector import MetricsCollector
from src.physics.constants import ensemble_preset
from src.physics.rates import pump_rate
from src.pipeline.errors import ArtifactIOError, NumericalFailure, PipelineError, ScenarioConfigError
from src.pipeline.orchestrator import (
    RunOrchestrator,
    build_run_inputs,
    operating_point_from_scenario,
    translate_error,
)
from src.pipeline.scenario_config import AnalysisSection, load_scenario, parse_scenario
from src.repository.artifact_store import RunManifest, TraceFormatError, read_manifest, write_manifest
from src.sensing.operating_point import OperatingPoint

LINE = 2903900000.0


def _two_tone_document(signal_b=2.2e-8, duration=0.2):
    return {
        "ensemble": {"preset": "linewidth"},
        "laser": {"power_w": 0.8},
        "tones": [
            {"b_tesla": 2.2e-7, "frequency_hz": LINE + 480.0},
            {"b_tesla": signal_b, "frequency_hz": LINE},
        ],
        "detector": {"shot_noise": False},
        "run": {"duration_s": duration, "seed": 3, "sample_rate_hz": 4000.0, "line_center_hz": LINE},
    }


@pytest.fixture
def orchestrator():
    return RunOrchestrator(
        threads=2,
        chunk_samples=1000,
        sim_logger=SimulationLogger('nvhet.test', level='WARNING'),
        metrics=MetricsCollector(),
    )


class TestErrorTranslation:
    """Test suite for mapping library errors onto exit codes."""

    def test_mapping(self):
        """Test that each error family maps to its exit code."""
        assert translate_error(StepSizeError(1e-3, 1e-4)).exit_code == 3
        assert translate_error(DegenerateDataError("flat")).exit_code == 3
        assert translate_error(FloatingPointError("overflow")).exit_code == 3
        assert translate_error(TraceFormatError("bad magic")).exit_code == 4
        assert translate_error(FileNotFoundError("missing")).exit_code == 4
        assert translate_error(ValueError("bad value")).exit_code == 2
        assert translate_error(RuntimeError("boom")).exit_code == 1

    def test_pipeline_errors_pass_through(self):
        """Test that run-level errors are returned unchanged."""
        error = ScenarioConfigError("no such key", path="run.x")

        assert translate_error(error) is error

    def test_error_types(self):
        """Test that translated errors have the run-level types."""
        assert isinstance(translate_error(TraceFormatError("x")), ArtifactIOError)
        assert isinstance(translate_error(ArithmeticError("x")), NumericalFailure)
        assert isinstance(translate_error(RuntimeError("x")), PipelineError)


class TestRunInputs:
    """Test suite for resolving scenarios into domain objects."""

    def test_operating_point(self):
        """Test that the weakest tone is the signal and the beat is the tone spacing."""
        op_point, signal_b = operating_point_from_scenario(parse_scenario(_two_tone_document()))

        assert signal_b == 2.2e-8
        assert op_point.reference_b == 2.2e-7
        assert op_point.delta == pytest.approx(480.0)
        assert op_point.channels == 1
        assert op_point.total_time == 0.2

    def test_operating_point_needs_two_tones(self, preset_dir):
        """Test that a single-tone scenario has no operating point."""
        with pytest.raises(ValueError):
            operating_point_from_scenario(load_scenario("gated_single_tone", preset_dir))

    def test_build_run_inputs(self):
        """Test that inputs carry the beat frequency."""
        inputs = build_run_inputs(parse_scenario(_two_tone_document()))

        assert inputs.beat_hz == pytest.approx(480.0)
        assert inputs.detector.sample_rate == 4000.0

    def test_calibration_needs_signal(self, preset_dir):
        """Test that noise calibration without a signal tone is rejected."""
        scenario = load_scenario("zero_tone", preset_dir)
        document = json.loads(scenario.model_dump_json())
        document["detector"]["calibrate_sensitivity_t_per_rt_hz"] = 1e-10

        with pytest.raises(ValueError):
            build_run_inputs(parse_scenario(document))

    def test_calibrated_detector(self):
        """Test that a sensitivity target sets the laser noise fraction."""
        document = _two_tone_document()
        document["detector"]["calibrate_sensitivity_t_per_rt_hz"] = 1e-10

        inputs = build_run_inputs(parse_scenario(document))

        assert inputs.detector.laser_noise_fraction > 0


class TestSimulate:
    """Test suite for the simulate workflow."""

    def test_artifacts(self, orchestrator, preset_dir, tmp_path):
        """Test that simulate writes the trace, sidecar, scenario and manifest."""
        scenario = load_scenario("zero_tone", preset_dir)

        result = orchestrator.simulate(scenario, tmp_path)

        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ['manifest.json', 'scenario.json', 'trace.csv', 'trace.csv.meta']
        assert result.trace.samples.size == 2000
        manifest = read_manifest(result.manifest_path)
        assert manifest.command == 'simulate'
        assert set(manifest.outputs) == {'trace.csv', 'trace.csv.meta', 'scenario.json'}
        assert manifest.arguments == {'format': 'csv'}

    def test_zero_tone_is_flat(self, orchestrator, preset_dir, tmp_path):
        """Test that without microwaves and noise the trace sits at equilibrium."""
        scenario = load_scenario("zero_tone", preset_dir)

        result = orchestrator.simulate(scenario, tmp_path)

        assert np.ptp(result.trace.samples[200:]) < 1e-9 * np.mean(result.trace.samples)

    def test_seed_override(self, orchestrator, preset_dir, tmp_path):
        """Test that an explicit seed replaces run.seed in the manifest and scenario."""
        scenario = load_scenario("zero_tone", preset_dir)

        result = orchestrator.simulate(scenario, tmp_path, seed=42, fmt='binary')

        assert read_manifest(result.manifest_path).seed == 42
        assert json.loads((tmp_path / 'scenario.json').read_text())['run']['seed'] == 42
        assert (tmp_path / 'trace.bin').is_file()

    def test_stage_metrics(self, orchestrator, preset_dir, tmp_path):
        """Test that every stage is recorded once and succeeds."""
        orchestrator.simulate(load_scenario("zero_tone", preset_dir), tmp_path)

        summary = orchestrator.metrics.summary()

        for stage in ('configure', 'synthesize', 'write', 'manifest'):
            assert summary[stage]['count'] == 1
            assert summary[stage]['failures'] == 0

    def test_aliasing_is_numerical_failure(self, orchestrator, tmp_path):
        """Test that a beat above Nyquist fails with exit code 3 and is recorded."""
        document = _two_tone_document()
        document["run"]["sample_rate_hz"] = 800.0

        with pytest.raises(NumericalFailure) as exc_info:
            orchestrator.simulate(parse_scenario(document), tmp_path)

        assert exc_info.value.exit_code == 3
        assert orchestrator.metrics.summary()['synthesize']['failures'] == 1
        assert not (tmp_path / 'manifest.json').exists()

    def test_off_resonant_is_config_error(self, orchestrator, tmp_path):
        """Test that tones far outside the line need the explicit flag."""
        document = _two_tone_document()
        document["tones"][0]["frequency_hz"] = LINE + 5e6

        with pytest.raises(ScenarioConfigError):
            orchestrator.simulate(parse_scenario(document), tmp_path)


class TestAnalyze:
    """Test suite for the analyze workflow."""

    def test_beat_from_metadata(self, orchestrator, tmp_path):
        """Test that the stored beat frequency selects the measured peak."""
        simulated = orchestrator.simulate(parse_scenario(_two_tone_document()), tmp_path / 'sim')

        result = orchestrator.analyze(simulated.outputs[0], None, tmp_path / 'ana')

        assert result.analysis.beat.frequency == pytest.approx(480.0)
        assert result.analysis.beat.amplitude > 0
        names = sorted(p.name for p in (tmp_path / 'ana').iterdir())
        assert names == ['manifest.json', 'peaks.csv', 'report.txt', 'spectrum.csv']
        report = (tmp_path / 'ana' / 'report.txt').read_text()
        assert 'peak_frequency_hz=480' in report
        assert 'samples=800' in report

    def test_analyze_manifest(self, orchestrator, tmp_path):
        """Test that the manifest records the trace path and digest."""
        simulated = orchestrator.simulate(parse_scenario(_two_tone_document()), tmp_path / 'sim')

        result = orchestrator.analyze(simulated.outputs[0], AnalysisSection(window='hann'), tmp_path / 'ana')

        manifest = read_manifest(result.manifest_path)
        assert manifest.command == 'analyze'
        assert manifest.config['window'] == 'hann'
        assert len(manifest.arguments['trace_sha256']) == 64

    def test_exponential_fits(self, orchestrator, preset_dir, tmp_path):
        """Test that the gated preset yields the revival rate after the gate."""
        scenario = load_scenario("gated_single_tone", preset_dir)
        simulated = orchestrator.simulate(scenario, tmp_path / 'sim')

        result = orchestrator.analyze(simulated.outputs[0], scenario.analysis, tmp_path / 'ana')

        params = ensemble_preset('linewidth')
        revival, turn_on = result.analysis.exponential_rates[1], result.analysis.exponential_rates[0]
        assert revival == pytest.approx(pump_rate(0.8, params) + params.gamma1, rel=0.05)
        assert turn_on > revival

    def test_disambiguation_report(self, orchestrator, preset_dir, tmp_path):
        """Test that a two-grid request reports its unique candidate."""
        simulated = orchestrator.simulate(load_scenario("zero_tone", preset_dir), tmp_path / 'sim')
        analysis = AnalysisSection.model_validate({
            "disambiguation": {
                "measurements": [
                    {"spacing_hz": 2000.0, "measured_beat_hz": 700.0},
                    {"spacing_hz": 2300.0, "measured_beat_hz": 500.0},
                ],
                "band_hz": [33000.0, 50000.0],
            }
        })

        result = orchestrator.analyze(simulated.outputs[0], analysis, tmp_path / 'ana')

        assert result.analysis.candidates == [pytest.approx(37300.0)]
        assert 'unique_frequency_hz=37300' in result.analysis.report_text()

    def test_missing_trace(self, orchestrator, tmp_path):
        """Test that a missing trace file is an I/O error."""
        with pytest.raises(ArtifactIOError) as exc_info:
            orchestrator.analyze(tmp_path / 'missing.csv', None, tmp_path / 'ana')

        assert exc_info.value.exit_code == 4


class TestSweep:
    """Test suite for the sweep workflow."""

    def test_points_merged_in_order(self, orchestrator, tmp_path):
        """Test that per-point files are merged by index into sweep.csv."""
        scenario = parse_scenario(_two_tone_document(duration=0.1))

        result = orchestrator.sweep(scenario, 'tones.1.b_tesla', [1e-8, 2e-8], tmp_path)

        assert [row['index'] for row in result.rows] == [0, 1]
        assert [row['seed'] for row in result.rows] == [3, 4]
        assert result.rows[1]['amplitude_v'] / result.rows[0]['amplitude_v'] == pytest.approx(2.0, rel=0.05)
        header = result.table_path.read_text().splitlines()[0]
        assert 'tones.1.b_tesla' in header
        assert sorted(p.name for p in (tmp_path / 'points').iterdir()) == ['point_0000.json', 'point_0001.json']
        manifest = read_manifest(result.manifest_path)
        assert manifest.arguments['parameter'] == 'tones.1.b_tesla'
        assert 'points/point_0001.json' in manifest.outputs

    def test_degenerate_range(self, orchestrator, tmp_path):
        """Test that a sweep needs at least two distinct values."""
        scenario = parse_scenario(_two_tone_document())

        for values in ([1e-8], [1e-8, 1e-8]):
            with pytest.raises(ScenarioConfigError):
                orchestrator.sweep(scenario, 'tones.1.b_tesla', values, tmp_path)

    def test_unknown_parameter(self, orchestrator, tmp_path):
        """Test that an unknown dotted key fails before any point runs."""
        scenario = parse_scenario(_two_tone_document())

        with pytest.raises(ScenarioConfigError) as exc_info:
            orchestrator.sweep(scenario, 'tones.1.bogus', [1.0, 2.0], tmp_path)

        assert exc_info.value.path == 'tones.1.bogus'
        assert not (tmp_path / 'points').exists()

    def test_direct_drop_column(self, orchestrator, preset_dir, tmp_path):
        """Test that gated sweeps report a direct-detection drop that grows with power."""
        scenario = load_scenario("direct_detection", preset_dir)

        result = orchestrator.sweep(scenario, 'tones.0.b_tesla', [1e-8, 2e-8], tmp_path)

        drops = [row['direct_drop_v'] for row in result.rows]
        assert drops[0] > 0
        assert drops[1] / drops[0] == pytest.approx(4.0, rel=0.05)

    def test_amplitude_linear_in_signal_field(self, orchestrator, tmp_path):
        """Test that a signal-field sweep gives a beat amplitude with log-log slope one."""
        scenario = parse_scenario(_two_tone_document())
        values = [1e-10, 3e-10, 1e-9, 3e-9, 1e-8]

        result = orchestrator.sweep(scenario, 'tones.1.b_tesla', values, tmp_path)

        exponent, _ = power_law_fit(values, [row['amplitude_v'] for row in result.rows])
        assert exponent == pytest.approx(1.0, abs=0.02)

    def test_reference_field_has_interior_optimum(self, orchestrator, tmp_path):
        """Test that the beat amplitude peaks at an interior reference field."""
        scenario = parse_scenario(_two_tone_document(signal_b=2.2e-9))
        values = [3e-8, 1e-7, 2.5e-7, 6e-7, 2e-6]

        result = orchestrator.sweep(scenario, 'tones.0.b_tesla', values, tmp_path)

        amplitudes = [row['amplitude_v'] for row in result.rows]
        best = int(np.argmax(amplitudes))
        assert 0 < best < len(values) - 1
        assert amplitudes[best] > 2.0 * max(amplitudes[0], amplitudes[-1])

    def test_linewidth_inverse_in_duration(self, orchestrator, tmp_path):
        """Test that a duration sweep gives a beat FWHM scaling as one over the record length."""
        document = _two_tone_document()
        document["analysis"] = {"linewidth": True}
        scenario = parse_scenario(document)
        values = [0.5, 1.0, 2.0, 4.0]

        result = orchestrator.sweep(scenario, 'run.duration_s', values, tmp_path)

        exponent, _ = power_law_fit(values, [row['fwhm_hz'] for row in result.rows])
        assert exponent == pytest.approx(-1.0, abs=0.05)


class TestReport:
    """Test suite for the analytic report."""

    def test_report_text(self, orchestrator):
        """Test that the report has the sensitivity keys."""
        text = orchestrator.report(ensemble_preset('linewidth'), OperatingPoint(0.8, 220e-9, 480.0))

        keys = [line.split('=')[0] for line in text.splitlines()]
        assert keys[:4] == ['snr', 'signal_b_tesla', 'b_min_tesla', 'bandwidth_hz']
        assert 'grid_channels' not in keys

    def test_report_with_grid(self, orchestrator):
        """Test that a band adds the reference-grid plan."""
        text = orchestrator.report(ensemble_preset('linewidth'), OperatingPoint(0.8, 220e-9, 480.0), band=17000.0)

        assert 'grid_channels=9' in text
        assert 'grid_exceeds_linewidth=false' in text


class TestReplay:
    """Test suite for manifest replay."""

    def test_simulate_replay_identical(self, orchestrator, tmp_path):
        """Test that replaying a simulation reproduces every output byte for byte."""
        first = orchestrator.simulate(parse_scenario(_two_tone_document(duration=0.1)), tmp_path / 'a')

        result = orchestrator.replay(first.manifest_path, tmp_path / 'b')

        assert result.matches
        assert (tmp_path / 'b' / 'trace.csv').read_bytes() == (tmp_path / 'a' / 'trace.csv').read_bytes()

    def test_analyze_replay_identical(self, orchestrator, tmp_path):
        """Test that replaying an analysis reproduces its outputs."""
        simulated = orchestrator.simulate(parse_scenario(_two_tone_document(duration=0.1)), tmp_path / 'sim')
        analyzed = orchestrator.analyze(simulated.outputs[0], None, tmp_path / 'a')

        assert orchestrator.replay(analyzed.manifest_path, tmp_path / 'b').matches

    def test_tampered_manifest(self, orchestrator, tmp_path):
        """Test that a changed digest is reported as a mismatch."""
        first = orchestrator.simulate(parse_scenario(_two_tone_document(duration=0.1)), tmp_path / 'a')
        manifest = read_manifest(first.manifest_path)
        manifest.outputs['trace.csv'] = '0' * 64
        write_manifest(manifest, tmp_path / 'a')

        result = orchestrator.replay(tmp_path / 'a', tmp_path / 'b')

        assert not result.matches
        assert result.mismatched == ['trace.csv']

    def test_unknown_command(self, orchestrator, tmp_path):
        """Test that a manifest of a non-replayable command is rejected."""
        write_manifest(RunManifest(command='report', config={}, seed=None, version='1.0.0'), tmp_path)

        with pytest.raises(ScenarioConfigError):
            orchestrator.replay(tmp_path, tmp_path / 'out')
