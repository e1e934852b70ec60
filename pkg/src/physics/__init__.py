"""
Closed-form physics of the optically pumped, microwave-driven NV two-level system.
"""
from .constants import PhysicalConstants, NVEnsembleParams, ENSEMBLE_PRESETS, ensemble_preset
from .tones import MicrowaveTone, ReferenceGrid
from .rates import (
    DerivedRates,
    rabi_frequency,
    field_from_rabi,
    induced_relaxation,
    pump_rate,
    relaxation_from_field,
    derive_rates,
)
from .populations import (
    HeterodyneResponse,
    equilibrium_population,
    transient_population,
    heterodyne_response,
    heterodyne_amplitude,
    bandwidth_3db,
    direct_detection_contrast,
)
from .odmr import odmr_spectrum

__all__ = [
    'PhysicalConstants',
    'NVEnsembleParams',
    'ENSEMBLE_PRESETS',
    'ensemble_preset',
    'MicrowaveTone',
    'ReferenceGrid',
    'DerivedRates',
    'rabi_frequency',
    'field_from_rabi',
    'induced_relaxation',
    'pump_rate',
    'relaxation_from_field',
    'derive_rates',
    'HeterodyneResponse',
    'equilibrium_population',
    'transient_population',
    'heterodyne_response',
    'heterodyne_amplitude',
    'bandwidth_3db',
    'direct_detection_contrast',
    'odmr_spectrum',
]
