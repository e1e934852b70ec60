"""
End-to-end checks of the simulated magnetometer against its analytic
behavior: dynamic range, bandwidth, sensitivity calibration, linewidth
scaling, channel penalty, saturation constants and frequency recovery.

Runs over 1000 s of simulated time are marked slow.
"""
import math

import numpy as np
import pytest

from src.physics import ensemble_preset, relaxation_from_field, bandwidth_3db, pump_rate
from src.physics.tones import MicrowaveTone, ReferenceGrid
from src.dynamics.scenario import DriveScenario, GatingSchedule, dual_tone_scenario
from src.synthesis import DetectorModel
from src.synthesis.trace_synthesizer import synthesize_trace, direct_detection_drop
from src.analysis.spectrum import amplitude_spectrum
from src.analysis.peaks import peak_snr
from src.analysis.fitting import power_law_fit
from src.analysis.linewidth import beat_linewidth
from src.analysis.disambiguation import GridMeasurement, disambiguate_frequency
from src.sensing import SATURATION_COEFF, OperatingPoint, analytic_snr, multichannel_snr
from src.pipeline.orchestrator import build_run_inputs, analyze_trace
from src.pipeline.scenario_config import load_scenario, set_by_path

LINE = 2903900000.0
REFERENCE_B = 220e-9


def _bin_amplitude(trace, frequency):
    spectrum = amplitude_spectrum(trace)
    return float(spectrum.amplitudes[np.argmin(np.abs(spectrum.bin_frequencies - frequency))])


def _noiseless(sample_rate):
    return DetectorModel(sample_rate=sample_rate).noiseless()


class TestDynamicRange:
    """Test suite for amplitude scaling over five decades of signal field."""

    def setup_method(self):
        """Set up the linewidth-preset ensemble and the signal fields."""
        self.params = ensemble_preset('linewidth')
        self.fields = np.logspace(-12, -7, 6)

    def test_heterodyne_amplitude_is_linear(self):
        """Test that the beat amplitude grows with slope 1 in log-log."""
        amplitudes = []
        for signal_b in self.fields:
            scenario = dual_tone_scenario(signal_b, REFERENCE_B, 480.0, 0.8, 0.5, line_center=LINE)
            trace = synthesize_trace(scenario, self.params, _noiseless(4000.0))
            amplitudes.append(_bin_amplitude(trace, 480.0))

        exponent, _ = power_law_fit(self.fields, amplitudes)

        assert exponent == pytest.approx(1.0, abs=0.02)

    def test_direct_detection_is_quadratic(self):
        """Test that the gated direct-detection drop grows with slope 2 in log-log."""
        settle = 5.0 / (pump_rate(0.8, self.params) + self.params.gamma1)
        drops = []
        for signal_b in self.fields:
            scenario = DriveScenario(
                tones=(MicrowaveTone(signal_b, LINE, 0.0),),
                laser_power=0.8,
                duration=0.1,
                line_center=LINE,
                gating=GatingSchedule(((0.03, 0.1),)),
            )
            trace = synthesize_trace(scenario, self.params, _noiseless(2000.0))
            drops.append(direct_detection_drop(trace, 0.03, settle, 0.1))

        exponent, _ = power_law_fit(self.fields, drops)

        assert exponent == pytest.approx(2.0, abs=0.05)


class TestBandwidth:
    """Test suite for the response roll-off with beat frequency."""

    def test_half_amplitude_crossing(self):
        """Test that the simulated amplitude halves at sqrt(3) times the total decay rate."""
        params = ensemble_preset('linewidth')
        deltas = np.array([2.0, 20.0, 40.0, 60.0, 80.0, 90.0, 100.0, 110.0, 120.0, 140.0, 160.0, 200.0])
        amplitudes = []
        for delta in deltas:
            scenario = dual_tone_scenario(1e-9, REFERENCE_B, delta, 0.8, 1.0, line_center=LINE)
            trace = synthesize_trace(scenario, params, _noiseless(2000.0))
            amplitudes.append(_bin_amplitude(trace, delta))
        ratio = np.array(amplitudes) / amplitudes[0]

        crossing = float(np.interp(0.5, ratio[::-1], deltas[::-1]))

        expected = bandwidth_3db(
            pump_rate(0.8, params), params.gamma1, relaxation_from_field(REFERENCE_B, params)
        )
        assert expected == pytest.approx(106.1, rel=1e-3)
        assert crossing == pytest.approx(expected, rel=0.1)


class TestSaturationConstants:
    """Test suite for the closed-form optimum SNR."""

    def setup_method(self):
        """Set up an ensemble without intrinsic relaxation."""
        self.params = ensemble_preset('linewidth').with_overrides(gamma1=0.0)
        self.gamma_g = relaxation_from_field(1e-12, self.params)
        self.gamma_big_g = relaxation_from_field(REFERENCE_B, self.params)

    def _point(self, channels):
        laser_power = 3.0 * channels * self.gamma_big_g / self.params.pump_coeff
        return OperatingPoint(laser_power, REFERENCE_B, 0.0, channels=channels, total_time=10.0)

    def test_single_channel_optimum(self):
        """Test the optimum SNR against the closed form."""
        expected = SATURATION_COEFF * self.params.contrast * math.sqrt(
            self.params.n_nv * self.params.collection_k * self.gamma_g * 10.0
        )

        assert analytic_snr(self.params, self._point(1), self.gamma_g) == pytest.approx(expected, rel=1e-12)

    def test_multichannel_optimum_scales(self):
        """Test that the saturated SNR times sqrt(m) does not depend on m."""
        scaled = [multichannel_snr(self.params, self._point(m), self.gamma_g) * math.sqrt(m)
                  for m in (1, 4, 16, 240)]

        for value in scaled[1:]:
            assert value == pytest.approx(scaled[0], rel=1e-10)


class TestChannelPenalty:
    """Test suite for the simulated sensitivity cost of extra reference tones."""

    def _snr(self, channels, spacing=2000.0, sample_rate=64000.0):
        params = ensemble_preset('linewidth')
        center = LINE + 480.0 + 0.5 * spacing * (channels - 1)
        grid = ReferenceGrid(center, spacing, channels)
        tones = [MicrowaveTone(1e-9, LINE, 0.0)] + grid.tones(REFERENCE_B / math.sqrt(channels))
        scenario = DriveScenario(tones=tuple(tones), laser_power=0.8, duration=1.0, line_center=LINE)
        detector = DetectorModel(
            sample_rate=sample_rate, electronic_noise_density=0.0, laser_noise_fraction=0.0, shot_noise=True
        )
        trace = synthesize_trace(scenario, params, detector, seed=channels)
        return peak_snr(amplitude_spectrum(trace), 480.0, 0.0, 1000.0).snr

    def test_penalty_is_sqrt_channels(self):
        """Test that with the total reference power fixed, SNR falls as sqrt(m)."""
        snrs = {m: self._snr(m) for m in (1, 4, 16)}

        assert snrs[1] / snrs[4] == pytest.approx(2.0, rel=0.1)
        assert snrs[1] / snrs[16] == pytest.approx(4.0, rel=0.1)


class TestFrequencyRecovery:
    """Test suite for two-grid frequency disambiguation."""

    BAND = (10_000.0, 200_000.0)
    TOLERANCE = 1e-6

    @staticmethod
    def _scan_oracle(measurements, band, tolerance):
        """Every alias of the first grid that matches an alias of the second."""
        alias_sets = []
        for m in measurements:
            k = np.arange(math.floor((band[0] - m.offset) / m.spacing) - 1,
                          math.ceil((band[1] - m.offset) / m.spacing) + 2)
            tones = m.offset + k * m.spacing
            aliases = np.concatenate([tones - m.measured_beat, tones + m.measured_beat])
            alias_sets.append(aliases[(aliases >= band[0]) & (aliases <= band[1])])
        first, second = alias_sets
        matched = (np.abs(first[:, None] - second[None, :]) <= tolerance).any(axis=1)
        return np.unique(np.round(first[matched], 3))

    def test_random_frequencies_recovered(self):
        """Test unique correct recovery of 1000 random frequencies with coprime grids."""
        rng = np.random.default_rng(20240101)
        truths = rng.uniform(self.BAND[0], self.BAND[1], 1000)

        for truth in truths:
            measurements = [GridMeasurement.observe(truth, 2000.0), GridMeasurement.observe(truth, 2001.0)]
            result = disambiguate_frequency(measurements, self.BAND, self.TOLERANCE)
            oracle = self._scan_oracle(measurements, self.BAND, self.TOLERANCE)

            assert len(result) == 1, truth
            assert result[0] == pytest.approx(truth, abs=1e-6)
            assert oracle.tolist() == [pytest.approx(truth, abs=1e-3)]


@pytest.mark.slow
class TestCalibratedSensitivity:
    """Test suite for a long record with noise calibrated to a target sensitivity."""

    def test_snr_matches_target(self, preset_dir):
        """Test that 6.81 pT over 1000 s at 8.9 pT/sqrt(Hz) gives SNR 24.2."""
        scenario = load_scenario("calibrated_sensitivity", preset_dir)
        inputs = build_run_inputs(scenario)
        trace = synthesize_trace(inputs.drive, inputs.params, inputs.detector, seed=scenario.run.seed,
                                 constants=inputs.constants)

        analysis = analyze_trace(trace, scenario.analysis, inputs.beat_hz)

        expected = 6.81e-12 * math.sqrt(1000.0) / 8.9e-12
        assert expected == pytest.approx(24.2, rel=1e-2)
        assert analysis.beat.snr == pytest.approx(expected, rel=0.15)


@pytest.mark.slow
class TestLinewidthScaling:
    """Test suite for the beat linewidth against record length."""

    def test_fwhm_inverse_in_duration(self, preset_dir):
        """Test that the fitted FWHM scales as 1/T and is about 0.1 mHz at 10^4 s."""
        base = load_scenario("linewidth", preset_dir)
        durations = [100.0, 1000.0, 10000.0]
        widths = []
        for duration in durations:
            inputs = build_run_inputs(set_by_path(base, 'run.duration_s', duration))
            trace = synthesize_trace(inputs.drive, inputs.params, inputs.detector, constants=inputs.constants)
            widths.append(beat_linewidth(trace, 480.0).fwhm)
            del trace

        exponent, _ = power_law_fit(durations, widths)

        assert exponent == pytest.approx(-1.0, abs=0.05)
        assert 0.08e-3 <= widths[-1] <= 0.12e-3
