"""
Figures of merit and design tools: SNR, saturation, sensitivity,
operating-point optimization and reference-grid planning.
"""
from .operating_point import OperatingPoint
from .snr import (
    SATURATION_COEFF,
    SWEEP_PARAMETERS,
    SensitivityReport,
    analytic_snr,
    multichannel_snr,
    saturation_bound,
    shot_noise_sensitivity,
    sensitivity_report,
    format_report,
    sweep_table,
    rows_to_csv,
)
from .optimizer import (
    OBJECTIVES,
    OptimizationConstraints,
    OptimizationResult,
    optimize_operating_point,
)
from .grid_planner import GridPlanError, GridPlan, plan_reference_grid

__all__ = [
    'OperatingPoint',
    'SATURATION_COEFF',
    'SWEEP_PARAMETERS',
    'SensitivityReport',
    'analytic_snr',
    'multichannel_snr',
    'saturation_bound',
    'shot_noise_sensitivity',
    'sensitivity_report',
    'format_report',
    'sweep_table',
    'rows_to_csv',
    'OBJECTIVES',
    'OptimizationConstraints',
    'OptimizationResult',
    'optimize_operating_point',
    'GridPlanError',
    'GridPlan',
    'plan_reference_grid',
]
