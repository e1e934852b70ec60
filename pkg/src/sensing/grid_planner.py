"""Planning reference-tone grids that extend the detection bandwidth."""
import logging
import math
from dataclasses import dataclass

from ..physics.constants import NVEnsembleParams
from ..physics.tones import ReferenceGrid

logger = logging.getLogger(__name__)


class GridPlanError(ValueError):
    """Raised when a band cannot be covered within the channel budget."""

    def __init__(self, band: float, spacing: float, required: int, m_max: int):
        self.required_channels = required
        super().__init__(
            f"band {band:g} Hz at spacing {spacing:g} Hz requires {required} channels, "
            f"more than m_max={m_max}"
        )


@dataclass(frozen=True)
class GridPlan:
    grid: ReferenceGrid
    coverage_radius: float
    sensitivity_penalty: float
    exceeds_linewidth: bool

    @property
    def channels(self) -> int:
        return self.grid.channels

    @property
    def spacing(self) -> float:
        return self.grid.spacing


def plan_reference_grid(
    band: float,
    params: NVEnsembleParams,
    m_max: int,
    spacing: float = 2000.0,
    center: float = 0.0
) -> GridPlan:
    """
    Smallest comb of the given spacing whose tones cover a band.

    Every tone covers beats up to spacing/2, so m = ceil(band / spacing)
    channels are needed; the sensitivity penalty of m active references
    is sqrt(m). Bands wider than the ODMR linewidth (2*gamma2) are
    accepted with a warning because the outer tones fall off resonance.

    Raises:
        ValueError: If band or spacing is not positive
        GridPlanError: If more than m_max channels are needed
    """
    if not band > 0:
        raise ValueError(f"band must be > 0, got {band}")
    if not spacing > 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    required = max(1, math.ceil(band / spacing - 1e-12))
    if required > m_max:
        raise GridPlanError(band, spacing, required, m_max)

    exceeds = band > params.odmr_fwhm
    if exceeds:
        logger.warning(
            f"Band exceeds the ODMR linewidth | band={band:g} | odmr_fwhm={params.odmr_fwhm:g} | "
            f"outer channels lose responsivity"
        )
    plan = GridPlan(
        grid=ReferenceGrid(center=center, spacing=spacing, channels=required),
        coverage_radius=0.5 * spacing,
        sensitivity_penalty=math.sqrt(required),
        exceeds_linewidth=exceeds,
    )
    logger.debug(f"Planned reference grid | channels={required} | spacing={spacing:g} | penalty={plan.sensitivity_penalty:.3f}")
    return plan
