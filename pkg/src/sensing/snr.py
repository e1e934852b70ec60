"""Analytic signal-to-noise ratio, saturation bounds and sensitivity reports."""
import csv
import io
import logging
import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional, Sequence

from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.rates import relaxation_from_field
from ..physics.populations import bandwidth_3db
from ..synthesis.detector import DetectorModel
from ..synthesis.calibration import detector_sensitivity
from .operating_point import OperatingPoint

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
SATURATION_COEFF = 3.0 * math.sqrt(3.0) / 32.0
SWEEP_PARAMETERS = ('laser_power', 'reference_b', 'delta', 'channels', 'total_time')


@dataclass(frozen=True)
class SensitivityReport:
    """Figures of merit at one operating point."""
    snr: float
    b_min: float
    bandwidth: float
    bandwidth_angular: float
    saturation_gap: float
    channels: int
    channel_penalty: float
    signal_b: float
    shot_noise_limit: float
    noise_limited_sensitivity: Optional[float] = None

    def __post_init__(self):
        if not self.b_min > 0:
            raise ValueError(f"b_min must be > 0, got {self.b_min}")
        if not self.snr >= 0:
            raise ValueError(f"snr must be >= 0, got {self.snr}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _snr(params: NVEnsembleParams, gamma_p: float, gamma_big_g: float, gamma_g: float,
         delta: float, total_time: float, channels: int) -> float:
    total = gamma_p + params.gamma1 + channels * gamma_big_g
    if total == 0:
        return 0.0
    numerator = (gamma_p ** 1.5 * math.sqrt(gamma_big_g) * params.contrast
                 * math.sqrt(params.n_nv * params.collection_k * gamma_g * total_time))
    return numerator / (2.0 * total * math.hypot(total, TWO_PI * delta))


def analytic_snr(params: NVEnsembleParams, op_point: OperatingPoint, gamma_g: float,
                 constants: Optional[PhysicalConstants] = None) -> float:
    """
    Shot-noise SNR of the beat peak for a single reference tone.

    SNR = gamma_p^1.5 * gamma_G^0.5 * C * sqrt(n K gamma_g t) / (2 S sqrt(S^2 + omega^2)),
    S = gamma_p + gamma1 + gamma_G, omega = 2*pi*delta. Valid for gamma_g << gamma_G.

    Raises:
        ValueError: If gamma_g is negative
    """
    if not gamma_g >= 0:
        raise ValueError(f"gamma_g must be >= 0, got {gamma_g}")
    gamma_p, gamma_big_g = op_point.rates(params, constants)
    return _snr(params, gamma_p, gamma_big_g, gamma_g, op_point.delta, op_point.total_time, 1)


def multichannel_snr(params: NVEnsembleParams, op_point: OperatingPoint, gamma_g: float,
                     constants: Optional[PhysicalConstants] = None) -> float:
    """Shot-noise SNR with ``op_point.channels`` references, each adding gamma_G to the decay."""
    if not gamma_g >= 0:
        raise ValueError(f"gamma_g must be >= 0, got {gamma_g}")
    gamma_p, gamma_big_g = op_point.rates(params, constants)
    return _snr(params, gamma_p, gamma_big_g, gamma_g, op_point.delta, op_point.total_time, op_point.channels)


def saturation_bound(params: NVEnsembleParams, gamma_g: float, total_time: float, channels: int = 1) -> float:
    """Largest reachable SNR, (3*sqrt(3)/(32*sqrt(m))) * C * sqrt(n K gamma_g t)."""
    return (SATURATION_COEFF / math.sqrt(channels) * params.contrast
            * math.sqrt(params.n_nv * params.collection_k * gamma_g * total_time))


def shot_noise_sensitivity(params: NVEnsembleParams, total_time: float,
                           constants: Optional[PhysicalConstants] = None) -> float:
    """
    Smallest field detectable at the saturation point, in tesla.

    Setting the saturated SNR to one gives the Rabi threshold
    g = (32 / (3*sqrt(3)*C)) * sqrt(gamma2 / (n K t)), converted to field
    through b = sqrt(2) * g / gamma_nv.
    """
    if not total_time > 0:
        raise ValueError(f"total_time must be > 0, got {total_time}")
    constants = constants or PhysicalConstants()
    g_min = math.sqrt(params.gamma2 / (params.n_nv * params.collection_k * total_time)) / (SATURATION_COEFF * params.contrast)
    return math.sqrt(2.0) * g_min / constants.gamma_nv


def sensitivity_report(
    params: NVEnsembleParams,
    op_point: OperatingPoint,
    constants: Optional[PhysicalConstants] = None,
    signal_b: float = 1e-12,
    detector: Optional[DetectorModel] = None
) -> SensitivityReport:
    """
    Evaluate SNR, minimum detectable field, bandwidth and saturation gap.

    b_min is the field that gives SNR = 1 over ``op_point.total_time``.
    With a detector the noise-limited sensitivity (T/sqrt(Hz)) is added.
    """
    if not signal_b > 0:
        raise ValueError(f"signal_b must be > 0, got {signal_b}")
    constants = constants or PhysicalConstants()
    gamma_p, gamma_big_g = op_point.rates(params, constants)
    gamma_g = relaxation_from_field(signal_b, params, constants)
    snr = multichannel_snr(params, op_point, gamma_g, constants)
    if snr <= 0:
        raise ValueError("operating point has no heterodyne response")
    bound = saturation_bound(params, gamma_g, op_point.total_time, op_point.channels)
    total = gamma_p + params.gamma1 + op_point.channels * gamma_big_g
    noise_limited = None
    if detector is not None:
        noise_limited = detector_sensitivity(detector, params, op_point, constants)
    report = SensitivityReport(
        snr=snr,
        b_min=signal_b / snr,
        bandwidth=bandwidth_3db(gamma_p, params.gamma1, op_point.channels * gamma_big_g),
        bandwidth_angular=math.sqrt(3.0) * total,
        saturation_gap=snr / bound,
        channels=op_point.channels,
        channel_penalty=math.sqrt(op_point.channels),
        signal_b=signal_b,
        shot_noise_limit=shot_noise_sensitivity(params, op_point.total_time, constants),
        noise_limited_sensitivity=noise_limited,
    )
    logger.debug(f"Sensitivity report | snr={snr:.4g} | b_min={report.b_min:.4g} | gap={report.saturation_gap:.3f}")
    return report


def format_report(report: SensitivityReport) -> str:
    """Key=value lines with units in the keys."""
    lines = [
        f"snr={report.snr:.6g}",
        f"signal_b_tesla={report.signal_b:.6g}",
        f"b_min_tesla={report.b_min:.6g}",
        f"bandwidth_hz={report.bandwidth:.6g}",
        f"bandwidth_rad_s={report.bandwidth_angular:.6g}",
        f"saturation_gap={report.saturation_gap:.6g}",
        f"channels={report.channels}",
        f"channel_penalty={report.channel_penalty:.6g}",
        f"shot_noise_limit_tesla={report.shot_noise_limit:.6g}",
    ]
    if report.noise_limited_sensitivity is not None:
        lines.append(f"sensitivity_t_per_rt_hz={report.noise_limited_sensitivity:.6g}")
    return "\n".join(lines) + "\n"


def sweep_table(
    params: NVEnsembleParams,
    base: OperatingPoint,
    parameter: str,
    values: Sequence[float],
    constants: Optional[PhysicalConstants] = None,
    signal_b: float = 1e-12
) -> List[Dict[str, float]]:
    """
    Rows of (parameter value, snr, b_min, bandwidth) across one operating-point coordinate.

    Raises:
        ValueError: If the parameter is not an operating-point field
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"parameter must be one of {SWEEP_PARAMETERS}, got '{parameter}'")
    rows = []
    for value in values:
        value = int(value) if parameter == 'channels' else float(value)
        report = sensitivity_report(params, base.with_changes(**{parameter: value}), constants, signal_b)
        rows.append({parameter: value, 'snr': report.snr, 'b_min': report.b_min, 'bandwidth': report.bandwidth})
    return rows


def rows_to_csv(rows: List[Dict[str, Any]]) -> str:
    if not rows:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()), lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: repr(value) if isinstance(value, float) else value for key, value in row.items()})
    return buffer.getvalue()
