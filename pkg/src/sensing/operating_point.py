"""Operating point of the heterodyne magnetometer."""
from dataclasses import dataclass, replace, asdict
from typing import Dict, Any, Optional, Tuple

from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.rates import pump_rate, relaxation_from_field


@dataclass(frozen=True)
class OperatingPoint:
    """
    Laser power (W), reference amplitude (T), beat frequency (Hz), active
    reference channels and total measurement time (s).
    """
    laser_power: float
    reference_b: float
    delta: float
    channels: int = 1
    total_time: float = 1.0

    def __post_init__(self):
        errors = []
        if not self.laser_power > 0:
            errors.append(f"laser_power must be > 0, got {self.laser_power}")
        if not self.reference_b > 0:
            errors.append(f"reference_b must be > 0, got {self.reference_b}")
        if not self.delta >= 0:
            errors.append(f"delta must be >= 0, got {self.delta}")
        if self.channels < 1:
            errors.append(f"channels must be >= 1, got {self.channels}")
        if not self.total_time > 0:
            errors.append(f"total_time must be > 0, got {self.total_time}")
        if errors:
            raise ValueError("Invalid operating point:\n  - " + "\n  - ".join(errors))

    def with_changes(self, **changes) -> 'OperatingPoint':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def rates(self, params: NVEnsembleParams,
              constants: Optional[PhysicalConstants] = None) -> Tuple[float, float]:
        """(gamma_p, gamma_G) at this operating point."""
        return pump_rate(self.laser_power, params), relaxation_from_field(self.reference_b, params, constants)
