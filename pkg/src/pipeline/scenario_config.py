"""Scenario documents: schema, loading, serialization and conversion to domain objects."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..physics.constants import NVEnsembleParams, PhysicalConstants, ensemble_preset
from ..physics.tones import MicrowaveTone, ReferenceGrid
from ..dynamics.scenario import DriveScenario, GatingSchedule
from ..synthesis.detector import DetectorModel
from ..analysis.disambiguation import GridMeasurement
from .config import config
from .errors import ScenarioConfigError, ArtifactIOError

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EnsembleSection(_Section):
    preset: Optional[str] = None
    gamma1_hz: Optional[float] = Field(default=None, ge=0)
    gamma2_hz: Optional[float] = Field(default=None, gt=0)
    contrast: Optional[float] = Field(default=None, gt=0, lt=1)
    n_nv: Optional[float] = Field(default=None, ge=1)
    collection_k: Optional[float] = Field(default=None, gt=0)
    pump_coeff_hz_per_w: Optional[float] = Field(default=None, gt=0)

    @field_validator('preset')
    @classmethod
    def _check_preset(cls, name):
        if name is not None:
            ensemble_preset(name)
        return name


class ConstantsSection(_Section):
    gamma_nv_hz_per_t: float = Field(default=2.803e10, gt=0)
    d_zfs_hz: float = Field(default=2.87e9, gt=0)
    a_hf_hz: float = Field(default=2.16e6, gt=0)


class LaserSection(_Section):
    power_w: float = Field(default=0.8, ge=0)


class ToneSection(_Section):
    b_tesla: float = Field(ge=0)
    frequency_hz: float = Field(gt=0)
    phase_rad: float = 0.0


class GridSection(_Section):
    center_hz: float = Field(gt=0)
    spacing_hz: float = Field(gt=0)
    channels: int = Field(default=1, ge=1)
    offset_hz: float = 0.0
    b_tesla: float = Field(gt=0)


class DetectorSection(_Section):
    volts_per_photon_rate_v_s: float = Field(default=5e-17, gt=0)
    electronic_noise_v_per_rt_hz: float = Field(default=0.0, ge=0)
    laser_noise_fraction_per_rt_hz: float = Field(default=0.0, ge=0)
    laser_noise_exponent: float = Field(default=1.0, ge=0, le=2)
    laser_noise_corner_hz: float = Field(default=100.0, gt=0)
    shot_noise: bool = True
    calibrate_sensitivity_t_per_rt_hz: Optional[float] = Field(default=None, gt=0)


class RunSection(_Section):
    duration_s: float = Field(gt=0)
    seed: int = Field(default=0, ge=0)
    sample_rate_hz: float = Field(default=2000.0, gt=0)
    gating_s: Optional[List[Tuple[float, float]]] = None
    initial_p0: Optional[float] = Field(default=None, ge=0, le=1)
    line_center_hz: Optional[float] = Field(default=None, gt=0)
    allow_off_resonant: bool = False
    simplified_envelope: bool = False

    @field_validator('gating_s')
    @classmethod
    def _check_windows(cls, windows):
        if windows is not None:
            for start, stop in windows:
                if not 0 <= start < stop:
                    raise ValueError(f"gating window must satisfy 0 <= start < stop, got ({start}, {stop})")
        return windows


class MeasurementSection(_Section):
    spacing_hz: float = Field(gt=0)
    offset_hz: float = 0.0
    measured_beat_hz: float = Field(ge=0)
    uncertainty_hz: float = Field(default=0.0, ge=0)


class DisambiguationSection(_Section):
    measurements: List[MeasurementSection]
    band_hz: Tuple[float, float]
    tolerance_hz: float = Field(default=1.0, ge=0)


class ExponentialSection(_Section):
    start_s: float = Field(ge=0)
    stop_s: Optional[float] = None


class AnalysisSection(_Section):
    window: str = "rectangular"
    beat_hz: Optional[float] = Field(default=None, ge=0)
    signal_span_hz: float = Field(default=0.0, ge=0)
    noise_span_hz: Optional[float] = Field(default=None, gt=0)
    peak_threshold_snr: float = Field(default=5.0, ge=0)
    max_frequency_hz: Optional[float] = Field(default=None, gt=0)
    linewidth: bool = False
    exponential_fits: List[ExponentialSection] = Field(default_factory=list)
    disambiguation: Optional[DisambiguationSection] = None

    @field_validator('window')
    @classmethod
    def _check_window(cls, window):
        if window not in ('rectangular', 'hann'):
            raise ValueError(f"window must be 'rectangular' or 'hann', got '{window}'")
        return window

    def to_measurements(self) -> List[GridMeasurement]:
        if self.disambiguation is None:
            return []
        return [
            GridMeasurement(m.spacing_hz, m.offset_hz, m.measured_beat_hz, m.uncertainty_hz)
            for m in self.disambiguation.measurements
        ]


class ScenarioConfig(_Section):
    """Root scenario document."""
    ensemble: EnsembleSection = Field(default_factory=EnsembleSection)
    constants: ConstantsSection = Field(default_factory=ConstantsSection)
    laser: LaserSection = Field(default_factory=LaserSection)
    tones: List[ToneSection] = Field(default_factory=list)
    grid: Optional[GridSection] = None
    detector: DetectorSection = Field(default_factory=DetectorSection)
    run: RunSection
    analysis: Optional[AnalysisSection] = None

    def to_params(self) -> NVEnsembleParams:
        base = ensemble_preset(self.ensemble.preset) if self.ensemble.preset else NVEnsembleParams()
        overrides = {
            'gamma1': self.ensemble.gamma1_hz,
            'gamma2': self.ensemble.gamma2_hz,
            'contrast': self.ensemble.contrast,
            'n_nv': self.ensemble.n_nv,
            'collection_k': self.ensemble.collection_k,
            'pump_coeff': self.ensemble.pump_coeff_hz_per_w,
        }
        return base.with_overrides(**{k: v for k, v in overrides.items() if v is not None})

    def to_constants(self) -> PhysicalConstants:
        return PhysicalConstants(
            gamma_nv=self.constants.gamma_nv_hz_per_t,
            d_zfs=self.constants.d_zfs_hz,
            a_hf=self.constants.a_hf_hz,
        )

    def to_tones(self) -> List[MicrowaveTone]:
        tones = [MicrowaveTone(t.b_tesla, t.frequency_hz, t.phase_rad) for t in self.tones]
        if self.grid is not None:
            grid = ReferenceGrid(self.grid.center_hz, self.grid.spacing_hz, self.grid.channels, self.grid.offset_hz)
            tones.extend(grid.tones(self.grid.b_tesla))
        return tones

    def to_scenario(self) -> DriveScenario:
        gating = GatingSchedule(tuple(self.run.gating_s)) if self.run.gating_s is not None else None
        return DriveScenario(
            tones=tuple(self.to_tones()),
            laser_power=self.laser.power_w,
            duration=self.run.duration_s,
            initial_p0=self.run.initial_p0,
            line_center=self.run.line_center_hz,
            gating=gating,
            allow_off_resonant=self.run.allow_off_resonant,
        )

    def to_detector(self) -> DetectorModel:
        d = self.detector
        return DetectorModel(
            volts_per_photon_rate=d.volts_per_photon_rate_v_s,
            electronic_noise_density=d.electronic_noise_v_per_rt_hz,
            laser_noise_fraction=d.laser_noise_fraction_per_rt_hz,
            laser_noise_exponent=d.laser_noise_exponent,
            laser_noise_corner=d.laser_noise_corner_hz,
            sample_rate=self.run.sample_rate_hz,
            shot_noise=d.shot_noise,
        )


def _error_path(error: ValidationError) -> Tuple[str, str]:
    first = error.errors()[0]
    return ".".join(str(part) for part in first['loc']), first['msg']


def parse_scenario(document: Union[str, Dict[str, Any]]) -> ScenarioConfig:
    """
    Validate a scenario document given as JSON text or a mapping.

    Raises:
        ScenarioConfigError: With the dotted path of the first offending key
    """
    try:
        data = json.loads(document) if isinstance(document, str) else document
    except json.JSONDecodeError as e:
        raise ScenarioConfigError(f"invalid JSON: {e}") from e
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        path, message = _error_path(e)
        raise ScenarioConfigError(message, path=path) from e


def resolve_scenario_path(path_or_name: Union[str, Path], preset_dir: Optional[str] = None) -> Path:
    """A file path as given, else a preset name looked up in the preset directory."""
    candidate = Path(path_or_name)
    if candidate.is_file():
        return candidate
    directory = Path(preset_dir or config.paths.preset_dir)
    for name in (str(path_or_name), f"{path_or_name}.json"):
        preset = directory / name
        if preset.is_file():
            return preset
    raise ScenarioConfigError(f"no scenario file or preset named '{path_or_name}' (preset dir {directory})")


def load_scenario(path_or_name: Union[str, Path], preset_dir: Optional[str] = None) -> ScenarioConfig:
    """
    Load and validate a scenario from a JSON file or a named preset.

    Raises:
        ScenarioConfigError: On unknown presets or schema violations
        ArtifactIOError: If the file cannot be read
    """
    path = resolve_scenario_path(path_or_name, preset_dir)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ArtifactIOError(f"cannot read scenario {path}: {e}") from e
    scenario = parse_scenario(text)
    logger.debug(f"Loaded scenario | path={path} | tones={len(scenario.tones)}")
    return scenario


def dump_scenario(scenario: ScenarioConfig) -> str:
    """Serialize to JSON text; parse_scenario(dump_scenario(s)) == s."""
    return json.dumps(scenario.model_dump(mode='json', exclude_none=True), indent=2, sort_keys=True) + "\n"


def scenario_json_schema() -> Dict[str, Any]:
    return ScenarioConfig.model_json_schema()


def set_by_path(scenario: ScenarioConfig, dotted_path: str, value: Any) -> ScenarioConfig:
    """
    Copy of the scenario with one key replaced, e.g. 'tones.1.b_tesla'.

    Raises:
        ScenarioConfigError: If the path does not exist or the result is invalid
    """
    data = scenario.model_dump(mode='json')
    node: Any = data
    parts = dotted_path.split('.')
    for part in parts[:-1]:
        try:
            node = node[int(part)] if isinstance(node, list) else node[part]
        except (KeyError, IndexError, ValueError, TypeError):
            raise ScenarioConfigError("no such key", path=dotted_path) from None
    last = parts[-1]
    if isinstance(node, list):
        try:
            node[int(last)] = value
        except (IndexError, ValueError):
            raise ScenarioConfigError("no such key", path=dotted_path) from None
    elif isinstance(node, dict) and last in node:
        node[last] = value
    else:
        raise ScenarioConfigError("no such key", path=dotted_path)
    return parse_scenario(data)


def load_analysis(path: Union[str, Path]) -> AnalysisSection:
    """
    Read an analysis request: either a bare analysis section or a full
    scenario document carrying one.

    Raises:
        ScenarioConfigError: On schema violations or a scenario without analysis
        ArtifactIOError: If the file cannot be read
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ArtifactIOError(f"cannot read analysis request {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioConfigError(f"invalid JSON: {e}") from e
    if isinstance(data, dict) and 'run' in data:
        scenario = parse_scenario(data)
        if scenario.analysis is None:
            raise ScenarioConfigError("scenario has no analysis section", path="analysis")
        return scenario.analysis
    try:
        return AnalysisSection.model_validate(data)
    except ValidationError as e:
        error_path, message = _error_path(e)
        raise ScenarioConfigError(message, path=f"analysis.{error_path}" if error_path else "analysis") from e


def with_seed(scenario: ScenarioConfig, seed: int) -> ScenarioConfig:
    """Copy of the scenario with run.seed replaced."""
    if seed < 0:
        raise ScenarioConfigError(f"seed must be >= 0, got {seed}", path="run.seed")
    return scenario.model_copy(update={'run': scenario.run.model_copy(update={'seed': int(seed)})})
