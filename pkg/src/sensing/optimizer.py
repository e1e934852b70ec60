"""Operating-point optimization by coordinate grid scans with golden-section refinement."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.rates import relaxation_from_field
from ..synthesis.detector import DetectorModel, mean_fluorescence_rate, signal_voltage, expected_snr
from .operating_point import OperatingPoint
from .snr import multichannel_snr

logger = logging.getLogger(__name__)

OBJECTIVES = ('shot_noise', 'detector_noise')
FREE_COORDINATES = ('laser_power', 'reference_b', 'delta')
# Ranges wider than this ratio are scanned on a log scale
LOG_SCAN_RATIO = 10.0

Objective = Callable[[NVEnsembleParams, OperatingPoint], float]


@dataclass(frozen=True)
class OptimizationConstraints:
    """
    Box constraints; a coordinate with equal bounds is held fixed.

    ``signal_b`` sets the signal field used to evaluate the objective; the
    argmax does not depend on it.
    """
    laser_power: Tuple[float, float] = (0.05, 2.0)
    reference_b: Tuple[float, float] = (1e-8, 2e-6)
    delta: Tuple[float, float] = (1.0, 2000.0)
    channels: int = 1
    total_time: float = 1.0
    signal_b: float = 1e-12

    def validate(self) -> None:
        errors = []
        for name in FREE_COORDINATES:
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                errors.append(f"{name} bounds must be finite with low <= high, got ({lo}, {hi})")
            elif name != 'delta' and not lo > 0:
                errors.append(f"{name} lower bound must be > 0, got {lo}")
            elif name == 'delta' and lo < 0:
                errors.append(f"delta lower bound must be >= 0, got {lo}")
        if self.channels < 1:
            errors.append(f"channels must be >= 1, got {self.channels}")
        if not self.total_time > 0:
            errors.append(f"total_time must be > 0, got {self.total_time}")
        if not self.signal_b > 0:
            errors.append(f"signal_b must be > 0, got {self.signal_b}")
        if errors:
            raise ValueError("Empty feasible box:\n  - " + "\n  - ".join(errors))


@dataclass
class OptimizationResult:
    op_point: OperatingPoint
    objective_value: float
    evaluations: int


def shot_noise_objective(constants: Optional[PhysicalConstants], signal_b: float) -> Objective:
    def objective(params: NVEnsembleParams, op: OperatingPoint) -> float:
        gamma_g = relaxation_from_field(signal_b, params, constants)
        return multichannel_snr(params, op, gamma_g, constants)
    return objective


def detector_noise_objective(detector: DetectorModel, constants: Optional[PhysicalConstants],
                             signal_b: float) -> Objective:
    """Expected SNR under the detector's shot, laser and electronic noise."""
    def objective(params: NVEnsembleParams, op: OperatingPoint) -> float:
        gamma_p, gamma_big_g = op.rates(params, constants)
        gamma_g = relaxation_from_field(signal_b, params, constants)
        amplitude = signal_voltage(detector, params, gamma_p, gamma_big_g, gamma_g, op.delta, op.channels)
        mean_rate = mean_fluorescence_rate(params, gamma_p, op.channels * gamma_big_g)
        return expected_snr(amplitude, detector, mean_rate, op.delta, op.total_time)
    return objective


def _scan_grid(lo: float, hi: float, points: int) -> Tuple[np.ndarray, bool]:
    if lo > 0 and hi / lo > LOG_SCAN_RATIO:
        return np.linspace(math.log(lo), math.log(hi), points), True
    return np.linspace(lo, hi, points), False


def optimize_operating_point(
    params: NVEnsembleParams,
    constraints: Optional[OptimizationConstraints] = None,
    objective: Union[str, Objective] = 'shot_noise',
    detector: Optional[DetectorModel] = None,
    constants: Optional[PhysicalConstants] = None,
    grid_points: int = 41,
    sweeps: int = 4
) -> OptimizationResult:
    """
    Maximize an SNR objective over laser power, reference field and beat frequency.

    Each sweep visits the free coordinates in a fixed order, scans a
    coarse grid (log-spaced for wide ranges) and refines the best interior
    grid point with golden-section search; edge optima stay on the bound.

    Args:
        params: Ensemble parameters
        constraints: Box constraints (defaults when omitted)
        objective: 'shot_noise', 'detector_noise' or a callable(params, op_point)
        detector: Detector model, required for 'detector_noise'
        constants: Physical constants
        grid_points: Coarse grid size per coordinate
        sweeps: Number of coordinate sweeps

    Returns:
        OptimizationResult

    Raises:
        ValueError: On an empty feasible box, an unknown objective or a
            missing detector
    """
    constraints = constraints or OptimizationConstraints()
    constraints.validate()
    if callable(objective):
        evaluate = objective
    elif objective == 'shot_noise':
        evaluate = shot_noise_objective(constants, constraints.signal_b)
    elif objective == 'detector_noise':
        if detector is None:
            raise ValueError("objective 'detector_noise' requires a detector model")
        evaluate = detector_noise_objective(detector, constants, constraints.signal_b)
    else:
        raise ValueError(f"objective must be one of {OBJECTIVES} or a callable, got '{objective}'")

    point = {}
    for name in FREE_COORDINATES:
        lo, hi = getattr(constraints, name)
        point[name] = math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
    evaluations = 0

    def score(values: Dict[str, float]) -> float:
        nonlocal evaluations
        evaluations += 1
        op = OperatingPoint(channels=constraints.channels, total_time=constraints.total_time, **values)
        return float(evaluate(params, op))

    best = score(point)
    for _ in range(sweeps):
        for name in FREE_COORDINATES:
            lo, hi = getattr(constraints, name)
            if lo == hi:
                point[name] = lo
                continue
            grid, logscale = _scan_grid(lo, hi, grid_points)

            def at(u: float) -> float:
                x = math.exp(u) if logscale else u
                return min(max(x, lo), hi)

            values = [score({**point, name: at(u)}) for u in grid]
            index = int(np.argmax(values))
            chosen, chosen_value = at(grid[index]), values[index]
            if 0 < index < grid.size - 1:
                try:
                    refined = minimize_scalar(
                        lambda u: -score({**point, name: at(u)}),
                        bracket=(grid[index - 1], grid[index], grid[index + 1]),
                        method='golden',
                    )
                    if -refined.fun >= chosen_value:
                        chosen, chosen_value = at(refined.x), -refined.fun
                except ValueError as error:
                    logger.debug(f"Golden-section refinement failed, keeping grid optimum | "
                                 f"coordinate={name} | error={error}")
            point[name] = chosen
            best = chosen_value

    op_point = OperatingPoint(channels=constraints.channels, total_time=constraints.total_time, **point)
    logger.info(
        f"Optimized operating point | laser_power={op_point.laser_power:.4g} | "
        f"reference_b={op_point.reference_b:.4g} | delta={op_point.delta:.4g} | "
        f"objective={best:.4g} | evaluations={evaluations}"
    )
    return OptimizationResult(op_point=op_point, objective_value=best, evaluations=evaluations)
