"""
Curve fitting: an in-repo Levenberg-Marquardt solver and the model fits built on it.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.rates import pump_rate, rabi_frequency
from ..physics.populations import heterodyne_amplitude
from ..repository.models import TimeTrace

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 500
TOLERANCE = 1e-10
JACOBIAN_STEP = 1e-6
MAX_DAMPING = 1e16
# Largest cosine between the residual and a Jacobian column accepted as stationary
GRADIENT_TOLERANCE = 1e-3
# Residual norm, relative to the data norm, treated as an exact fit
ROUNDING_FLOOR = 1e-10
MIN_RESPONSIVITY_POINTS = 5


class DegenerateDataError(ValueError):
    """Raised when data cannot constrain the requested fit."""


@dataclass
class FitResult:
    """Outcome of a least-squares fit."""
    parameters: np.ndarray
    covariance: Optional[np.ndarray]
    residual_norm: float
    iterations: int
    converged: bool
    message: str = ""
    parameter_names: Tuple[str, ...] = ()

    @property
    def stderr(self) -> np.ndarray:
        if self.covariance is None:
            return np.full(len(self.parameters), np.nan)
        return np.sqrt(np.abs(np.diag(self.covariance)))

    def named(self) -> dict:
        names = self.parameter_names or tuple(f"p{i}" for i in range(len(self.parameters)))
        return {name: float(value) for name, value in zip(names, self.parameters)}


@dataclass(frozen=True)
class LorentzianPeak:
    center: float
    fwhm: float
    height: float     # negative for dips


@dataclass
class LorentzianFit:
    peaks: List[LorentzianPeak]
    offset: float
    result: FitResult


@dataclass(frozen=True)
class ResponsivityFit:
    gamma2: float
    gamma2_stderr: float
    scale: float
    result: FitResult


def _numeric_jacobian(model: Callable, x: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Central differences with step 1e-6 * max(|p|, 1) per parameter."""
    jacobian = np.empty((x.size, params.size))
    for j in range(params.size):
        step = JACOBIAN_STEP * max(abs(params[j]), 1.0)
        upper = params.copy()
        lower = params.copy()
        upper[j] += step
        lower[j] -= step
        jacobian[:, j] = (model(x, upper) - model(x, lower)) / (2.0 * step)
    return jacobian


def _gradient_cosine(jacobian: np.ndarray, r: np.ndarray, gradient: np.ndarray) -> float:
    """Largest |J_j . r| / (|J_j| |r|); zero at a stationary point."""
    r_norm = float(np.linalg.norm(r))
    if r_norm == 0.0:
        return 0.0
    column_norms = np.linalg.norm(jacobian, axis=0)
    active = column_norms > 0
    if not np.any(active):
        return 0.0
    return float(np.max(np.abs(gradient[active]) / (column_norms[active] * r_norm)))


def levenberg_marquardt(
    model: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x,
    y,
    initial,
    weights=None,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = TOLERANCE,
    parameter_names: Sequence[str] = ()
) -> FitResult:
    """
    Damped Gauss-Newton minimization of sum(w * (y - model(x, p))^2).

    Iteration stops when an accepted step changes the residual sum of
    squares by less than ``tolerance`` relative, when the damping grows
    past any useful value (no downhill step left), or after
    ``max_iterations``. A stall counts as converged only if the residual is
    at rounding level or orthogonal to every Jacobian column within
    ``GRADIENT_TOLERANCE``; other stalls and the cap report
    ``converged=False``. The best parameters found are returned either way.

    Args:
        model: Callable model(x, params) -> predictions
        x: Independent variable
        y: Observations
        initial: Starting parameters
        weights: Optional per-point weights
        max_iterations: Iteration cap
        tolerance: Relative cost-change stopping threshold
        parameter_names: Names reported by :meth:`FitResult.named`

    Returns:
        FitResult with covariance scaled by the reduced chi-square
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    params = np.array(initial, dtype=float)
    sqrt_w = np.ones_like(y) if weights is None else np.sqrt(np.asarray(weights, dtype=float))
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"x and y must have equal length, got {x.shape[0]} and {y.shape[0]}")

    def residuals(p):
        return sqrt_w * (y - model(x, p))

    r = residuals(params)
    cost = float(r @ r)
    damping = 1e-3
    converged = False
    message = f"reached {max_iterations} iterations"
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        jacobian = sqrt_w[:, None] * _numeric_jacobian(model, x, params)
        normal = jacobian.T @ jacobian
        gradient = jacobian.T @ r
        diagonal = np.diag(normal).copy()
        diagonal[diagonal == 0] = 1.0
        improved = False
        while damping < MAX_DAMPING:
            try:
                delta = np.linalg.solve(normal + damping * np.diag(diagonal), gradient)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            trial = params + delta
            trial_r = residuals(trial)
            trial_cost = float(trial_r @ trial_r)
            if np.isfinite(trial_cost) and trial_cost <= cost:
                improved = True
                break
            damping *= 10.0
        if not improved:
            cosine = _gradient_cosine(jacobian, r, gradient)
            exact = math.sqrt(cost) <= ROUNDING_FLOOR * float(np.linalg.norm(sqrt_w * y))
            converged = exact or cosine <= GRADIENT_TOLERANCE
            message = (
                "no further decrease of the residual"
                if converged else f"stalled with gradient cosine {cosine:.3g} above tolerance"
            )
            break
        change = cost - trial_cost
        params, r, previous_cost, cost = trial, trial_r, cost, trial_cost
        damping = max(damping / 10.0, 1e-12)
        if cost == 0 or change <= tolerance * previous_cost:
            converged = True
            message = "relative residual change below tolerance"
            break

    jacobian = sqrt_w[:, None] * _numeric_jacobian(model, x, params)
    dof = y.size - params.size
    covariance = None
    if dof > 0:
        covariance = np.linalg.pinv(jacobian.T @ jacobian) * (cost / dof)
    if not converged:
        logger.warning(f"Fit did not converge | iterations={iteration} | residual_norm={math.sqrt(cost):.4g}")
    return FitResult(
        parameters=params,
        covariance=covariance,
        residual_norm=math.sqrt(cost),
        iterations=iteration,
        converged=converged,
        message=message,
        parameter_names=tuple(parameter_names),
    )


def lorentzian(x, center: float, fwhm: float, height: float):
    return height / (1.0 + ((np.asarray(x, dtype=float) - center) / (0.5 * fwhm)) ** 2)


def _multi_lorentzian(x, params):
    offset = params[0]
    total = np.full(x.shape, offset, dtype=float)
    for k in range(1, len(params), 3):
        total += lorentzian(x, params[k], params[k + 1], params[k + 2])
    return total


def _seed_lorentzians(x: np.ndarray, y: np.ndarray, n_peaks: int) -> List[Tuple[float, float, float]]:
    baseline = float(np.median(y))
    deviation = y - baseline
    sign = -1.0 if abs(deviation.min()) > abs(deviation.max()) else 1.0
    indices, _ = signal.find_peaks(sign * deviation)
    if indices.size < n_peaks:
        raise DegenerateDataError(f"found {indices.size} extrema, fewer than the {n_peaks} peaks requested")
    strongest = indices[np.argsort(sign * deviation[indices])[::-1][:n_peaks]]
    strongest = np.sort(strongest)
    widths, _, _, _ = signal.peak_widths(sign * deviation, strongest, rel_height=0.5)
    spacing = float(np.mean(np.diff(x)))
    return [(float(x[i]), float(max(w, 1.0) * spacing), float(deviation[i])) for i, w in zip(strongest, widths)]


def lorentzian_multifit(x, y, n_peaks: int, init: Optional[Sequence[Tuple[float, float, float]]] = None,
                        offset: Optional[float] = None) -> LorentzianFit:
    """
    Fit a sum of Lorentzians plus a constant offset.

    The abscissa and ordinate are shifted and scaled to order one before
    fitting and the parameters are mapped back afterwards.

    Args:
        x: Abscissa, e.g. frequency
        y: Data
        n_peaks: Number of Lorentzians
        init: Optional (center, fwhm, height) guesses; seeded from local
            extrema when omitted
        offset: Optional offset guess (defaults to the data median)

    Returns:
        LorentzianFit with peaks sorted by center

    Raises:
        DegenerateDataError: If n_peaks < 1 or the data are too short
    """
    if n_peaks < 1:
        raise DegenerateDataError(f"n_peaks must be >= 1, got {n_peaks}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3 * n_peaks + 1:
        raise DegenerateDataError(f"{x.size} points cannot constrain {3 * n_peaks + 1} parameters")
    if init is None:
        init = _seed_lorentzians(x, y, n_peaks)
    if len(init) != n_peaks:
        raise ValueError(f"expected {n_peaks} initial guesses, got {len(init)}")
    offset = float(np.median(y)) if offset is None else offset

    x_shift, x_scale = float(np.mean(x)), float(np.ptp(x)) or 1.0
    y_scale = float(np.max(np.abs(y - offset))) or 1.0
    u = (x - x_shift) / x_scale
    v = (y - offset) / y_scale
    start = [0.0]
    for center, fwhm, height in init:
        start += [(center - x_shift) / x_scale, fwhm / x_scale, height / y_scale]

    names = ['offset'] + [f"{kind}_{i}" for i in range(n_peaks) for kind in ('center', 'fwhm', 'height')]
    scaled = levenberg_marquardt(_multi_lorentzian, u, v, start, parameter_names=names)

    p = scaled.parameters
    peaks = [
        LorentzianPeak(
            center=float(p[k] * x_scale + x_shift),
            fwhm=float(abs(p[k + 1]) * x_scale),
            height=float(p[k + 2] * y_scale),
        )
        for k in range(1, len(p), 3)
    ]
    peaks.sort(key=lambda peak: peak.center)
    unscale = np.array([y_scale] + [x_scale, x_scale, y_scale] * n_peaks)
    unshift = np.array([offset] + [x_shift, 0.0, 0.0] * n_peaks)
    covariance = None
    if scaled.covariance is not None:
        covariance = scaled.covariance * np.outer(unscale, unscale)
    result = FitResult(
        parameters=p * unscale + unshift,
        covariance=covariance,
        residual_norm=scaled.residual_norm * y_scale,
        iterations=scaled.iterations,
        converged=scaled.converged,
        message=scaled.message,
        parameter_names=tuple(names),
    )
    return LorentzianFit(peaks=peaks, offset=float(p[0] * y_scale + offset), result=result)


def _exponential(t, params):
    v_inf, dv, rate = params
    return v_inf + dv * np.exp(-rate * t)


def fit_exponential(times, values) -> FitResult:
    """
    Fit V(t) = V_inf + dV * exp(-r (t - t0)) with t0 the first sample time.

    Raises:
        DegenerateDataError: On short, flat or non-monotone data
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 4:
        raise DegenerateDataError(f"need at least 4 samples, got {t.size}")
    edge = max(1, t.size // 10)
    head, middle, tail = np.mean(v[:edge]), np.mean(v[t.size // 2 - edge // 2: t.size // 2 + edge // 2 + 1]), np.mean(v[-edge:])
    scale = max(np.max(np.abs(v)), 1e-300)
    if np.ptp(v) <= 1e-12 * scale:
        raise DegenerateDataError("segment is flat: no exponential to fit")
    if not (head > middle > tail or head < middle < tail):
        raise DegenerateDataError("segment is not monotone-trending")

    t0 = t - t[0]
    v_inf = float(tail)
    dv = float(v[0] - v_inf)
    crossed = np.nonzero(np.abs(v - v_inf) <= abs(dv) / math.e)[0]
    tau = t0[crossed[0]] if crossed.size and t0[crossed[0]] > 0 else 0.3 * t0[-1]
    return levenberg_marquardt(_exponential, t0, v, [v_inf, dv, 1.0 / tau],
                               parameter_names=('v_inf', 'dv', 'rate'))


def exponential_rate_fit(trace: TimeTrace, start: float = 0.0, stop: Optional[float] = None) -> float:
    """
    Relaxation rate of a trace segment, in s^-1.

    Args:
        trace: Photovoltage trace
        start: Segment start time, s
        stop: Segment end time, s (defaults to the end of the record)

    Raises:
        DegenerateDataError: On flat or non-monotone segments
    """
    times = trace.times
    stop = trace.duration if stop is None else stop
    mask = (times >= start) & (times < stop)
    result = fit_exponential(times[mask], trace.samples[mask])
    rate = float(result.parameters[2])
    if not rate > 0:
        raise DegenerateDataError(f"fitted rate is not positive: {rate}")
    logger.debug(f"Exponential fit | rate={rate:.6g} | converged={result.converged}")
    return rate


def power_law_fit(x, y) -> Tuple[float, float]:
    """
    Least-squares line in log-log space, y = prefactor * x^exponent.

    Raises:
        DegenerateDataError: On non-positive data or fewer than two points
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise DegenerateDataError(f"need at least two paired points, got {x.size} and {y.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DegenerateDataError("power-law fit requires strictly positive data")
    exponent, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(exponent), float(math.exp(intercept))


def responsivity_fit(
    reference_b,
    amplitudes,
    params: NVEnsembleParams,
    laser_power: float,
    signal_b: float,
    delta: float,
    constants: Optional[PhysicalConstants] = None,
    scale: float = 1.0,
    fit_scale: bool = False,
    gamma2_init: Optional[float] = None
) -> ResponsivityFit:
    """
    Fit the heterodyne amplitude against reference field with gamma2 free.

    The model is scale * A(B1) with A the closed-form heterodyne
    population amplitude and every rate except gamma2 held at ``params``.

    Args:
        reference_b: Reference amplitudes B1 in tesla
        amplitudes: Measured beat amplitudes (population units times ``scale``)
        params: Fixed ensemble parameters; gamma2 is the starting guess
        laser_power: Laser power in W
        signal_b: Signal amplitude b1 in tesla
        delta: Beat frequency in Hz
        constants: Physical constants
        scale: Amplitude units per unit population
        fit_scale: Also fit ``scale``
        gamma2_init: Starting gamma2 (defaults to params.gamma2)

    Returns:
        ResponsivityFit

    Raises:
        DegenerateDataError: With fewer than two points
    """
    constants = constants or PhysicalConstants()
    b = np.asarray(reference_b, dtype=float)
    a = np.asarray(amplitudes, dtype=float)
    n_free = 2 if fit_scale else 1
    if b.size <= n_free or b.size != a.size:
        raise DegenerateDataError(f"responsivity fit needs more than {n_free} paired points, got {b.size}")
    if b.size < MIN_RESPONSIVITY_POINTS:
        logger.warning(f"Responsivity fit weakly constrained | points={b.size} | recommended={MIN_RESPONSIVITY_POINTS}")
    peak = int(np.argmax(a))
    if peak in (0, a.size - 1):
        logger.warning("Responsivity data do not span a maximum | gamma2 weakly constrained")

    gamma_p = pump_rate(laser_power, params)
    g_ref = rabi_frequency(b, constants)
    g_sig = rabi_frequency(signal_b, constants)
    gamma2_0 = params.gamma2 if gamma2_init is None else gamma2_init

    def model(x, p):
        gamma2 = p[0] * gamma2_0
        amplitude_scale = p[1] if fit_scale else scale
        return amplitude_scale * heterodyne_amplitude(
            gamma_p, params.gamma1, g_ref ** 2 / gamma2, g_sig ** 2 / gamma2, delta
        )

    start = [1.0, scale] if fit_scale else [1.0]
    names = ('gamma2_ratio', 'scale') if fit_scale else ('gamma2_ratio',)
    result = levenberg_marquardt(model, b, a, start, parameter_names=names)
    gamma2 = float(result.parameters[0] * gamma2_0)
    stderr = float(result.stderr[0] * gamma2_0)
    fitted_scale = float(result.parameters[1]) if fit_scale else scale
    logger.info(f"Responsivity fit | gamma2={gamma2:.6g} | stderr={stderr:.3g} | converged={result.converged}")
    return ResponsivityFit(gamma2=gamma2, gamma2_stderr=stderr, scale=fitted_scale, result=result)


def fit_report(result: FitResult) -> str:
    """Key=value lines for script consumption."""
    lines = [
        f"converged={str(result.converged).lower()}",
        f"iterations={result.iterations}",
        f"residual_norm={result.residual_norm:.12g}",
        f"message={result.message}",
    ]
    for (name, value), err in zip(result.named().items(), result.stderr):
        lines.append(f"{name}={value:.12g}")
        lines.append(f"{name}_stderr={err:.6g}")
    return "\n".join(lines) + "\n"
