"""
Parameter extraction: reflection fits, noise thermometry and added-noise
back-out through the measurement chain
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np
from scipy import constants, optimize

from .errors import (
    FitError,
    IllConditionedError,
    MissingCalibrationError,
    ValidationError,
)
from .units import TWO_PI

HBAR: float = constants.hbar
BOLTZMANN: float = constants.k
# vacuum fluctuations, fixed
QUANTUM_NOISE: float = 0.5
MIN_OCCUPANCY_RATIO: float = 3.0
MIN_NOISE_POINTS: int = 4
MIN_SPAN_LINEWIDTHS: float = 3.0


class ParameterEstimate(NamedTuple):
    """value with its one-sigma standard error"""

    value: float
    stderr: float


def _as_increasing(name: str, values: np.ndarray) -> np.ndarray:
    array: np.ndarray = np.asarray(values, dtype=float)
    if array.ndim != 1 or array.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(array)):
        raise ValidationError(f"{name} must be finite")
    if np.any(np.diff(array) <= 0.0):
        raise ValidationError(f"{name} must be strictly increasing")
    return array


@dataclass(frozen=True)
class ReflectionTrace:
    """
    Measured S11 on a frequency grid in Hz, with optional per-point complex
    standard deviation
    """

    frequencies: np.ndarray
    s11: np.ndarray
    sigma: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "frequencies", _as_increasing("frequencies", self.frequencies)
        )
        samples: np.ndarray = np.asarray(self.s11, dtype=complex)
        if samples.shape != self.frequencies.shape:
            raise ValidationError(
                f"{samples.size} S11 samples for {self.frequencies.size} frequencies"
            )
        if not np.all(np.isfinite(samples)):
            raise ValidationError("S11 samples must be finite")
        object.__setattr__(self, "s11", samples)
        if self.sigma is not None:
            sigma: np.ndarray = np.asarray(self.sigma, dtype=float)
            if sigma.shape != samples.shape or np.any(sigma <= 0.0):
                raise ValidationError("sigma must be positive, one per sample")
            object.__setattr__(self, "sigma", sigma)


# pylint: disable-next=too-many-instance-attributes
@dataclass(frozen=True)
class NoiseTrace:
    """
    Output noise versus noise-source temperature

    `psd` is in quanta (W per Hz of detection bandwidth over ħω_s) at the
    output of the chain, that is G_sys times the source-referred noise.
    """

    temperatures: np.ndarray
    psd: np.ndarray
    bandwidth: float
    signal_frequency: float
    idler_frequency: float
    sigma: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        temperatures: np.ndarray = _as_increasing("temperatures", self.temperatures)
        if np.any(temperatures <= 0.0):
            raise ValidationError("temperatures must be strictly positive")
        object.__setattr__(self, "temperatures", temperatures)
        psd: np.ndarray = np.asarray(self.psd, dtype=float)
        if psd.shape != temperatures.shape or not np.all(np.isfinite(psd)):
            raise ValidationError("psd must be finite, one value per temperature")
        object.__setattr__(self, "psd", psd)
        for name in ("bandwidth", "signal_frequency", "idler_frequency"):
            value: float = getattr(self, name)
            if not value > 0.0:
                raise ValidationError(f"{name} must be positive, got {value!r}")
        if self.sigma is not None:
            sigma: np.ndarray = np.asarray(self.sigma, dtype=float)
            if sigma.shape != psd.shape or np.any(sigma <= 0.0):
                raise ValidationError("sigma must be positive, one per sample")
            object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class FieldSweep:
    """
    Output noise (quanta, as in NoiseTrace) at fixed source temperature
    versus in-plane magnetic field (T)
    """

    fields: np.ndarray
    psd: np.ndarray
    base_temperature: float
    signal_frequency: float
    idler_frequency: float

    def __post_init__(self) -> None:
        fields: np.ndarray = np.asarray(self.fields, dtype=float)
        psd: np.ndarray = np.asarray(self.psd, dtype=float)
        if fields.shape != psd.shape or fields.ndim != 1:
            raise ValidationError("fields and psd must be 1-D of equal length")
        if not self.base_temperature > 0.0:
            raise ValidationError("base_temperature must be positive")
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "psd", psd)


@dataclass(frozen=True)
class ReflectionFit:
    """
    Resonator parameters (rad/s) from a reflection fit
    """

    resonant_frequency: ParameterEstimate
    external_coupling_rate: ParameterEstimate
    intrinsic_loss_rate: ParameterEstimate
    residual_rms: float
    evaluations: int

    @property
    def total_decay_rate(self) -> float:
        """κ_ext + κ_int"""
        return self.external_coupling_rate.value + self.intrinsic_loss_rate.value

    @property
    def external_quality(self) -> float:
        """ω₀/κ_ext"""
        return self.resonant_frequency.value / self.external_coupling_rate.value

    @property
    def internal_quality(self) -> float:
        """ω₀/κ_int, infinite for a lossless fit"""
        if self.intrinsic_loss_rate.value == 0.0:
            return math.inf
        return self.resonant_frequency.value / self.intrinsic_loss_rate.value

    @property
    def loaded_quality(self) -> float:
        """ω₀/κ_tot"""
        return self.resonant_frequency.value / self.total_decay_rate

    @property
    def extinction_db(self) -> float:
        """depth of the on-resonance amplitude dip"""
        return reflection_extinction_db(
            self.external_coupling_rate.value, self.intrinsic_loss_rate.value
        )


@dataclass(frozen=True)
class NoiseFit:
    """
    Chain gain and source-referred added noise from a thermometry sweep
    """

    system_gain: ParameterEstimate
    added_noise: ParameterEstimate
    residual_rms: float
    signal_frequency: float
    idler_frequency: float

    @property
    def zero_temperature_output(self) -> ParameterEstimate:
        """S_out at T → 0: n_q + N_add"""
        return ParameterEstimate(
            QUANTUM_NOISE + self.added_noise.value, self.added_noise.stderr
        )


@dataclass(frozen=True)
class FieldPoint:
    """added noise at one field value"""

    magnetic_field: float
    added_noise: ParameterEstimate


@dataclass(frozen=True)
class CalibrationRecord:
    """
    Everything extracted for one device; any stage may be absent
    """

    reflection: Optional[ReflectionFit] = None
    noise: Optional[NoiseFit] = None
    nkpa_added_noise: Optional[ParameterEstimate] = None
    nkpa_band: Optional[Tuple[float, float]] = None
    field_sweep: Tuple[FieldPoint, ...] = ()
    diagnostics: Mapping[str, Any] = field(default_factory=dict)


def reflection_extinction_db(external: float, intrinsic: float) -> float:
    """
    −20·log10|S11(ω₀)|
    """
    depth: float = abs(external - intrinsic) / (external + intrinsic)
    if depth == 0.0:
        return math.inf
    return float(-20.0 * np.log10(depth))


def _reflection_model(
    params: np.ndarray, offsets: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    center, external, intrinsic = params
    den: np.ndarray = 1j * (offsets - center) + 0.5 * (external + intrinsic)
    return 1.0 - external / den, den


def _initial_reflection_guess(trace: ReflectionTrace) -> Tuple[float, float, float]:
    """
    (f₀, κ_ext/2π, κ_int/2π) in Hz from the dip location and the half-power
    width of |S11 − 1|
    """
    response: np.ndarray = np.abs(trace.s11 - 1.0)
    peak: int = int(np.argmax(response))
    inside: np.ndarray = np.flatnonzero(response >= response[peak] / math.sqrt(2.0))
    freqs: np.ndarray = trace.frequencies
    width: float = float(freqs[inside[-1]] - freqs[inside[0]])
    if width <= 0.0:
        width = float(freqs[min(peak + 1, freqs.size - 1)] - freqs[max(peak - 1, 0)])
    external: float = min(float(response[peak]), 2.0) * width / 2.0
    intrinsic: float = max(width - external, 1e-3 * width)
    return float(freqs[peak]), external, intrinsic


# pylint: disable-next=too-many-locals
def fit_reflection(
    trace: ReflectionTrace,
    initial_guess: Optional[Tuple[float, float, float]] = None,
) -> ReflectionFit:
    """
    Complex least-squares fit of S11 = 1 − κ_ext/(i(ω − ω₀) + κ_tot/2)

    `initial_guess` is (ω₀, κ_ext, κ_int) in rad/s. Weighting is
    inverse-variance when the trace carries sigma. A bounded trust-region
    solver with the analytic Jacobian keeps both rates non-negative.
    """
    if initial_guess is None:
        guess_hz: Tuple[float, float, float] = _initial_reflection_guess(trace)
    else:
        guess_hz = (
            initial_guess[0] / TWO_PI,
            initial_guess[1] / TWO_PI,
            initial_guess[2] / TWO_PI,
        )
    logging.debug("Reflection fit initial guess (Hz): %s", guess_hz)
    reference: float = guess_hz[0]
    scale: float = guess_hz[1] + guess_hz[2]
    if not scale > 0.0:
        raise ValidationError("Initial linewidth guess must be positive")
    offsets: np.ndarray = (trace.frequencies - reference) / scale
    weights: np.ndarray = (
        np.ones_like(offsets)
        if trace.sigma is None
        else 1.0 / (trace.sigma / math.sqrt(2.0))
    )

    def residuals(params: np.ndarray) -> np.ndarray:
        model, _ = _reflection_model(params, offsets)
        diff: np.ndarray = (model - trace.s11) * weights
        return np.concatenate([diff.real, diff.imag])

    def jacobian(params: np.ndarray) -> np.ndarray:
        _, den = _reflection_model(params, offsets)
        external: float = params[1]
        columns: List[np.ndarray] = [
            -1j * external / den**2,
            -1.0 / den + 0.5 * external / den**2,
            0.5 * external / den**2,
        ]
        jac: np.ndarray = np.stack([column * weights for column in columns], axis=1)
        return np.concatenate([jac.real, jac.imag])

    start: np.ndarray = np.array([0.0, guess_hz[1] / scale, guess_hz[2] / scale])
    result = optimize.least_squares(
        residuals,
        start,
        jac=jacobian,
        bounds=([-np.inf, 0.0, 0.0], [np.inf, np.inf, np.inf]),
        method="trf",
        ftol=1e-12,
        xtol=1e-12,
        gtol=1e-12,
        max_nfev=2000,
    )
    if not result.success:
        raise FitError(
            f"Reflection fit did not converge: {result.message}",
            diagnostics={"status": int(result.status), "nfev": int(result.nfev)},
        )

    dof: int = max(result.fun.size - result.x.size, 1)
    covariance: np.ndarray = np.linalg.pinv(result.jac.T @ result.jac)
    if trace.sigma is None:
        covariance = covariance * (2.0 * result.cost / dof)
    errors: np.ndarray = np.sqrt(np.clip(np.diag(covariance), 0.0, None)) * scale
    values: np.ndarray = result.x * scale
    values[0] += reference
    fit: ReflectionFit = ReflectionFit(
        resonant_frequency=ParameterEstimate(TWO_PI * values[0], TWO_PI * errors[0]),
        external_coupling_rate=ParameterEstimate(
            TWO_PI * values[1], TWO_PI * errors[1]
        ),
        intrinsic_loss_rate=ParameterEstimate(TWO_PI * values[2], TWO_PI * errors[2]),
        residual_rms=float(np.sqrt(2.0 * result.cost / result.fun.size)),
        evaluations=int(result.nfev),
    )
    linewidth: float = values[1] + values[2]
    span: Tuple[float, float] = (
        float(trace.frequencies[0]),
        float(trace.frequencies[-1]),
    )
    if not span[0] <= values[0] <= span[1]:
        logging.warning("Fitted resonance %.6e Hz lies outside the trace", values[0])
    elif span[1] - span[0] < MIN_SPAN_LINEWIDTHS * linewidth:
        logging.warning(
            "Trace spans %.2f linewidths; at least %.0f are needed for a reliable fit",
            (span[1] - span[0]) / linewidth,
            MIN_SPAN_LINEWIDTHS,
        )
    logging.info(
        "Reflection fit: f0 = %.9e Hz, κ_ext/2π = %.6e Hz, κ_int/2π = %.6e Hz",
        values[0],
        values[1],
        values[2],
    )
    return fit


def bose_einstein_occupancy(temperature: Any, frequency: Any) -> Any:
    """
    Mean thermal photon number 1/(exp(ħω/k_B T) − 1); vectorized
    """
    temperature_arr: np.ndarray = np.asarray(temperature, dtype=float)
    frequency_arr: np.ndarray = np.asarray(frequency, dtype=float)
    if np.any(temperature_arr <= 0.0):
        raise ValidationError("Temperature must be positive")
    if np.any(frequency_arr <= 0.0):
        raise ValidationError("Frequency must be positive")
    occupancy = 1.0 / np.expm1(HBAR * frequency_arr / (BOLTZMANN * temperature_arr))
    if np.ndim(occupancy) == 0:
        return float(occupancy)
    return occupancy


def _source_occupancy(
    temperature: Any, signal_frequency: float, idler_frequency: float
) -> Any:
    """thermal part of the source-referred noise, in signal quanta"""
    return (
        bose_einstein_occupancy(temperature, signal_frequency)
        + bose_einstein_occupancy(temperature, idler_frequency)
        * idler_frequency
        / signal_frequency
    )


def output_noise_quanta(
    temperature: Any,
    added_noise: float,
    signal_frequency: float,
    idler_frequency: float,
) -> Any:
    """
    Source-referred output noise S_out (quanta); tends to n_q + N_add at T → 0
    """
    return (
        _source_occupancy(temperature, signal_frequency, idler_frequency)
        + QUANTUM_NOISE
        + added_noise
    )


# pylint: disable-next=too-many-arguments
def noise_psd_model(
    temperature: Any,
    system_gain: float,
    added_noise: float,
    signal_frequency: float,
    idler_frequency: float,
    bandwidth: float,
) -> Any:
    """
    Detected noise power (W) from a thermal source at `temperature`, counting
    the source at both signal and idler frequencies
    """
    if not bandwidth > 0.0:
        raise ValidationError("Detection bandwidth must be positive")
    return (
        bandwidth
        * system_gain
        * HBAR
        * signal_frequency
        * output_noise_quanta(
            temperature, added_noise, signal_frequency, idler_frequency
        )
    )


def idler_frequency(pump1: float, pump2: float, signal: float) -> float:
    """ω_i = ω_p1 + ω_p2 − ω_s"""
    return pump1 + pump2 - signal


def fit_noise_thermometry(trace: NoiseTrace) -> NoiseFit:
    """
    Least-squares fit of (G_sys, N_add) to an output-noise temperature sweep
    """
    if trace.temperatures.size < MIN_NOISE_POINTS:
        raise IllConditionedError(
            f"{trace.temperatures.size} temperature points; "
            f"at least {MIN_NOISE_POINTS} are needed"
        )
    occupancy: np.ndarray = _source_occupancy(
        trace.temperatures, trace.signal_frequency, trace.idler_frequency
    )
    ratio: float = float(occupancy[-1] / occupancy[0])
    if ratio < MIN_OCCUPANCY_RATIO:
        raise IllConditionedError(
            f"Source occupancy only changes by a factor {ratio:.3f} over the sweep"
        )
    weights: np.ndarray = (
        np.ones_like(occupancy) if trace.sigma is None else 1.0 / trace.sigma
    )
    slope, intercept = np.polyfit(occupancy, trace.psd, 1)
    start: np.ndarray = np.array(
        [max(slope, 1e-12), max(intercept / max(slope, 1e-12) - QUANTUM_NOISE, 0.0)]
    )
    logging.debug("Noise fit initial guess G=%.6e N_add=%.6e", *start)

    def residuals(params: np.ndarray) -> np.ndarray:
        gain, added = params
        return (gain * (occupancy + QUANTUM_NOISE + added) - trace.psd) * weights

    def jacobian(params: np.ndarray) -> np.ndarray:
        gain, added = params
        return np.stack(
            [
                (occupancy + QUANTUM_NOISE + added) * weights,
                np.full_like(occupancy, gain) * weights,
            ],
            axis=1,
        )

    result = optimize.least_squares(
        residuals,
        start,
        jac=jacobian,
        bounds=([np.finfo(float).tiny, 0.0], [np.inf, np.inf]),
        method="trf",
        x_scale="jac",
        ftol=1e-12,
        xtol=1e-12,
        gtol=1e-12,
    )
    if not result.success:
        raise FitError(
            f"Noise fit did not converge: {result.message}",
            diagnostics={"status": int(result.status), "nfev": int(result.nfev)},
        )
    dof: int = max(result.fun.size - result.x.size, 1)
    covariance: np.ndarray = np.linalg.pinv(result.jac.T @ result.jac)
    if trace.sigma is None:
        covariance = covariance * (2.0 * result.cost / dof)
    errors: np.ndarray = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    fit: NoiseFit = NoiseFit(
        system_gain=ParameterEstimate(float(result.x[0]), float(errors[0])),
        added_noise=ParameterEstimate(float(result.x[1]), float(errors[1])),
        residual_rms=float(np.sqrt(2.0 * result.cost / result.fun.size)),
        signal_frequency=trace.signal_frequency,
        idler_frequency=trace.idler_frequency,
    )
    logging.info(
        "Noise fit: G_sys = %.6e ± %.2e, N_add = %.4f ± %.4f",
        fit.system_gain.value,
        fit.system_gain.stderr,
        fit.added_noise.value,
        fit.added_noise.stderr,
    )
    return fit


def _check_chain(gain: float, transmission: float) -> None:
    if not 0.0 < transmission <= 1.0:
        raise ValidationError(f"Transmission must lie in (0, 1], got {transmission!r}")
    if not gain > 1.0:
        raise ValidationError(f"Amplifier gain must exceed 1, got {gain!r}")


def nkpa_added_noise(
    added_noise: float,
    gain: float,
    system_noise: float,
    transmission: float,
    uncertainties: Optional[Mapping[str, float]] = None,
) -> ParameterEstimate:
    """
    Amplifier-referred added noise backed out of the chain value:
    λ(N_add + n_q) − N_sys/G − n_q

    `gain` is a power ratio. `uncertainties` may hold one-sigma errors keyed
    `added_noise`, `gain`, `system_noise`, `transmission`; they are
    propagated to first order.
    """
    _check_chain(gain, transmission)
    value: float = (
        transmission * (added_noise + QUANTUM_NOISE)
        - system_noise / gain
        - QUANTUM_NOISE
    )
    sensitivities: Dict[str, float] = {
        "added_noise": transmission,
        "gain": system_noise / gain**2,
        "system_noise": -1.0 / gain,
        "transmission": added_noise + QUANTUM_NOISE,
    }
    variance: float = 0.0
    for name, sigma in (uncertainties or {}).items():
        if name not in sensitivities:
            raise ValidationError(f"No uncertainty input named `{name}`")
        if sigma < 0.0:
            raise ValidationError(f"Uncertainty of {name} must be non-negative")
        variance += (sensitivities[name] * sigma) ** 2
    return ParameterEstimate(value, math.sqrt(variance))


def nkpa_noise_band(
    added_noise: float,
    gain: float,
    transmission_range: Tuple[float, float],
    system_noise_range: Tuple[float, float],
    points: int = 25,
) -> Tuple[float, float]:
    """
    (min, max) of the back-out over a grid of transmission and chain noise
    """
    transmissions, system_noises = np.meshgrid(
        np.linspace(*transmission_range, points),
        np.linspace(*system_noise_range, points),
    )
    _check_chain(gain, float(np.min(transmissions)))
    _check_chain(gain, float(np.max(transmissions)))
    values: np.ndarray = (
        transmissions * (added_noise + QUANTUM_NOISE)
        - system_noises / gain
        - QUANTUM_NOISE
    )
    return float(np.min(values)), float(np.max(values))


def field_sweep_reduction(
    sweep: FieldSweep, record: Optional[CalibrationRecord]
) -> List[FieldPoint]:
    """
    Added noise at each field from output noise at the base temperature,
    using the chain gain of a prior thermometry fit
    """
    if record is None or record.noise is None:
        raise MissingCalibrationError(
            "Field sweep reduction needs a noise-thermometry calibration"
        )
    gain: ParameterEstimate = record.noise.system_gain
    thermal: float = float(
        _source_occupancy(
            sweep.base_temperature, sweep.signal_frequency, sweep.idler_frequency
        )
    )
    points: List[FieldPoint] = []
    for field_value, psd in zip(sweep.fields, sweep.psd):
        added: float = psd / gain.value - thermal - QUANTUM_NOISE
        stderr: float = abs(psd / gain.value**2) * gain.stderr
        if added < 0.0:
            logging.warning(
                "Field %.4g T: negative added noise %.4f quanta; output is below "
                "the thermal and quantum floor for the calibrated gain",
                field_value,
                added,
            )
        points.append(FieldPoint(float(field_value), ParameterEstimate(added, stderr)))
    logging.info(
        "Field sweep: %d points, largest added noise %.4f quanta",
        len(points),
        max((p.added_noise.value for p in points), default=math.nan),
    )
    return points


def linewidth_change(before: ReflectionFit, after: ReflectionFit) -> float:
    """fractional change of κ_tot"""
    return (after.total_decay_rate - before.total_decay_rate) / before.total_decay_rate
