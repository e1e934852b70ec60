"""Fixed-step fourth-order Runge-Kutta integration of the two-level rate equation."""
import logging
import math
from typing import Optional

import numpy as np

from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.rates import pump_rate
from ..physics.populations import equilibrium_population
from ..repository.models import PopulationTrajectory
from .scenario import DriveScenario
from .envelope import instantaneous_relaxation

logger = logging.getLogger(__name__)

STEP_SAFETY = 20.0
MAX_STEPS = 1e9
# Largest number of e-folds folded into one cumulative-product block
BLOCK_DECAY = 40.0
DEFAULT_CHUNK_STEPS = 1 << 18


class StepSizeError(ValueError):
    """Raised when the requested step exceeds the integration bound."""

    def __init__(self, step: float, bound: float):
        self.step = step
        self.bound = bound
        super().__init__(f"integration step {step:.6g} s exceeds the bound {bound:.6g} s")


def step_bound(scenario: DriveScenario, params: NVEnsembleParams,
               constants: Optional[PhysicalConstants] = None) -> float:
    """
    Largest admissible step, 1 / (20 * max(beat frequency, summed rates)).

    The summed rate uses the peak envelope (all tones in phase).
    """
    constants = constants or PhysicalConstants()
    peak_b = sum(tone.amplitude_b for tone in scenario.tones)
    peak_relaxation = constants.gamma_nv ** 2 * peak_b ** 2 / (2.0 * params.gamma2)
    rate_sum = pump_rate(scenario.laser_power, params) + params.gamma1 + peak_relaxation
    fastest = max(scenario.max_beat_frequency, rate_sum)
    if fastest <= 0:
        raise ValueError("scenario has no dynamics: all rates and beat frequencies are zero")
    return 1.0 / (STEP_SAFETY * fastest)


def rk4_affine_coefficients(rate_start, rate_mid, rate_end, gamma_p: float, step: float):
    """
    Per-step affine map y -> M*y + c of one classical RK4 step.

    The rate equation P0' = (gamma/2 + gamma_p) - (gamma + gamma_p)*P0 is
    affine in P0, so each RK4 stage is affine too and the four stages
    collapse to one multiplier and one offset per step.
    """
    half = 0.5 * step
    a0, b0 = 0.5 * rate_start + gamma_p, rate_start + gamma_p
    am, bm = 0.5 * rate_mid + gamma_p, rate_mid + gamma_p
    a1, b1 = 0.5 * rate_end + gamma_p, rate_end + gamma_p

    alpha1, beta1 = a0, -b0
    alpha2, beta2 = am - bm * half * alpha1, -bm * (1.0 + half * beta1)
    alpha3, beta3 = am - bm * half * alpha2, -bm * (1.0 + half * beta2)
    alpha4, beta4 = a1 - b1 * step * alpha3, -b1 * (1.0 + step * beta3)

    multiplier = 1.0 + step / 6.0 * (beta1 + 2.0 * beta2 + 2.0 * beta3 + beta4)
    offset = step / 6.0 * (alpha1 + 2.0 * alpha2 + 2.0 * alpha3 + alpha4)
    return multiplier, offset


def solve_affine_recurrence(multiplier: np.ndarray, offset: np.ndarray, y0: float) -> np.ndarray:
    """
    Values y[1..n] of y[k+1] = multiplier[k]*y[k] + offset[k].

    Evaluated with cumulative products over blocks of bounded total decay.
    """
    if np.any(multiplier <= 0):
        raise ValueError("non-positive RK4 multiplier: step too large for the relaxation rate")
    n = multiplier.size
    out = np.empty(n)
    cumulative_decay = np.cumsum(-np.log(multiplier))
    start = 0
    y = y0
    while start < n:
        base = cumulative_decay[start - 1] if start else 0.0
        end = int(np.searchsorted(cumulative_decay, base + BLOCK_DECAY, side='right'))
        end = min(max(end, start + 1), n)
        products = np.cumprod(multiplier[start:end])
        out[start:end] = products * (y + np.cumsum(offset[start:end] / products))
        y = out[end - 1]
        start = end
    return out


def initial_population(scenario: DriveScenario, params: NVEnsembleParams,
                       constants: Optional[PhysicalConstants] = None) -> float:
    """Explicit initial P0, else the equilibrium under the time-averaged relaxation at t=0."""
    if scenario.initial_p0 is not None:
        return scenario.initial_p0
    gamma_p = pump_rate(scenario.laser_power, params)
    gamma_mw = scenario.mean_relaxation(params, constants) if bool(scenario.microwave_on(0.0)) else 0.0
    if gamma_p + params.gamma1 + gamma_mw == 0:
        return 0.5
    return equilibrium_population(gamma_p, params.gamma1, gamma_mw)


def integrate_rate_equations(
    scenario: DriveScenario,
    params: NVEnsembleParams,
    step: Optional[float] = None,
    constants: Optional[PhysicalConstants] = None,
    output_interval: Optional[float] = None,
    simplified_envelope: bool = False,
    chunk_steps: int = DEFAULT_CHUNK_STEPS
) -> PopulationTrajectory:
    """
    Integrate P0(t) under the scenario's time-dependent relaxation.

    Args:
        scenario: Tones, laser power, duration and gating
        params: Ensemble parameters
        step: Integration step in s; chosen from the bound when omitted
        constants: Physical constants
        output_interval: Spacing of reported samples in s, an integer
            multiple of the step (defaults to the step)
        simplified_envelope: Use the first-order two-tone relaxation form
        chunk_steps: Steps evaluated per vectorized chunk

    Returns:
        PopulationTrajectory sampled every ``output_interval``

    Raises:
        StepSizeError: If ``step`` exceeds the bound
        ValueError: On inconsistent step/output_interval or too many steps
    """
    constants = constants or PhysicalConstants()
    scenario.validate(params)
    bound = step_bound(scenario, params, constants)

    if step is None:
        interval = bound if output_interval is None else output_interval
        substeps = max(1, math.ceil(interval / bound * (1.0 - 1e-12)))
        step = interval / substeps
    else:
        if step > bound * (1.0 + 1e-9):
            raise StepSizeError(step, bound)
        interval = step if output_interval is None else output_interval
        substeps = max(1, int(round(interval / step)))
        if abs(substeps * step - interval) > 1e-9 * interval:
            raise ValueError(f"output_interval {interval} must be an integer multiple of step {step}")

    n_out = max(2, int(round(scenario.duration / interval)))
    total_steps = (n_out - 1) * substeps
    if total_steps > MAX_STEPS:
        raise ValueError(f"scenario needs {total_steps} steps, more than the limit {MAX_STEPS:.0e}")

    gamma_p = pump_rate(scenario.laser_power, params)
    frame = scenario.frame_frequency

    def relaxation(t: np.ndarray) -> np.ndarray:
        induced = instantaneous_relaxation(
            scenario.tones, params.gamma2, t, constants,
            simplified=simplified_envelope, frame_frequency=frame
        )
        return params.gamma1 + induced * scenario.microwave_on(t)

    values = np.empty(n_out)
    values[0] = initial_population(scenario, params, constants)
    y = values[0]
    outputs_per_chunk = max(1, chunk_steps // substeps)
    k = 1
    while k < n_out:
        n_chunk = min(outputs_per_chunk, n_out - k)
        n_steps = n_chunk * substeps
        first = (k - 1) * substeps
        half_times = (2 * first + np.arange(2 * n_steps + 1)) * (0.5 * step)
        rate = relaxation(half_times)
        multiplier, offset = rk4_affine_coefficients(rate[0:-1:2], rate[1::2], rate[2::2], gamma_p, step)
        ys = solve_affine_recurrence(multiplier, offset, y)
        values[k:k + n_chunk] = ys[substeps - 1::substeps]
        y = ys[-1]
        k += n_chunk

    if np.any(values < -1e-9) or np.any(values > 1.0 + 1e-9):
        raise ArithmeticError("population left [0, 1]; integration is unstable")
    np.clip(values, 0.0, 1.0, out=values)

    logger.debug(
        f"Integrated rate equations | steps={total_steps} | step_s={step:.3g} | "
        f"substeps={substeps} | tones={len(scenario.tones)}"
    )
    return PopulationTrajectory(
        times=np.arange(n_out) * interval,
        p0_values=values,
        step=step,
        method="rk4",
        substeps=substeps,
    )
