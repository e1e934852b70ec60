"""Time-domain population dynamics under multi-tone microwave drive."""
from .scenario import (
    RESONANCE_WINDOW,
    GatingSchedule,
    DriveScenario,
    dual_tone_scenario,
    tone_offsets,
)
from .envelope import interference_envelope, complex_envelope, instantaneous_relaxation
from .integrator import (
    StepSizeError,
    step_bound,
    rk4_affine_coefficients,
    solve_affine_recurrence,
    initial_population,
    integrate_rate_equations,
)
from .oscillation import SettlingError, OscillationFit, steady_state_oscillation

__all__ = [
    'RESONANCE_WINDOW',
    'GatingSchedule',
    'DriveScenario',
    'dual_tone_scenario',
    'tone_offsets',
    'interference_envelope',
    'complex_envelope',
    'instantaneous_relaxation',
    'StepSizeError',
    'step_bound',
    'rk4_affine_coefficients',
    'solve_affine_recurrence',
    'initial_population',
    'integrate_rate_equations',
    'SettlingError',
    'OscillationFit',
    'steady_state_oscillation',
]
