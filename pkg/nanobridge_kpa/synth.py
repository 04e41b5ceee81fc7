"""
Seeded synthetic measurements drawn from the package's own forward models
"""

import logging
import math
from typing import Sequence

import numpy as np

from .calibration import (
    FieldSweep,
    NoiseTrace,
    ReflectionTrace,
    output_noise_quanta,
)
from .errors import ValidationError
from .units import TWO_PI


def _check_noise(noise: float) -> None:
    if not (noise >= 0.0 and math.isfinite(noise)):
        raise ValidationError(f"Noise level must be non-negative, got {noise!r}")


def reflection_grid(
    resonant_frequency: float,
    total_decay_rate: float,
    linewidths: float = 3.0,
    points: int = 20001,
) -> np.ndarray:
    """
    Hz grid spanning ±`linewidths` κ_tot about the resonance
    """
    center: float = resonant_frequency / TWO_PI
    half_span: float = linewidths * total_decay_rate / TWO_PI
    return np.linspace(center - half_span, center + half_span, points)


# pylint: disable-next=too-many-arguments
def synthesize_reflection(
    resonant_frequency: float,
    external_coupling_rate: float,
    intrinsic_loss_rate: float,
    frequencies: np.ndarray,
    noise: float,
    rng: np.random.Generator,
) -> ReflectionTrace:
    """
    S11 on `frequencies` (Hz) with complex Gaussian noise of rms `noise`
    (split evenly between quadratures)
    """
    _check_noise(noise)
    grid: np.ndarray = np.asarray(frequencies, dtype=float)
    omega: np.ndarray = TWO_PI * grid
    clean: np.ndarray = 1.0 - external_coupling_rate / (
        1j * (omega - resonant_frequency)
        + 0.5 * (external_coupling_rate + intrinsic_loss_rate)
    )
    scale: float = noise / math.sqrt(2.0)
    jitter: np.ndarray = rng.normal(0.0, scale, grid.size) + 1j * rng.normal(
        0.0, scale, grid.size
    )
    logging.debug("Synthesized %d reflection points at noise %.3e", grid.size, noise)
    return ReflectionTrace(frequencies=grid, s11=clean + jitter)


# pylint: disable-next=too-many-arguments
def synthesize_noise_sweep(
    system_gain: float,
    added_noise: float,
    temperatures: Sequence[float],
    bandwidth: float,
    signal_frequency: float,
    idler_frequency: float,
    noise: float,
    rng: np.random.Generator,
) -> NoiseTrace:
    """
    Output noise versus source temperature with multiplicative Gaussian noise
    """
    _check_noise(noise)
    temps: np.ndarray = np.asarray(temperatures, dtype=float)
    clean: np.ndarray = system_gain * output_noise_quanta(
        temps, added_noise, signal_frequency, idler_frequency
    )
    psd: np.ndarray = clean * (1.0 + noise * rng.standard_normal(temps.size))
    return NoiseTrace(
        temperatures=temps,
        psd=psd,
        bandwidth=bandwidth,
        signal_frequency=signal_frequency,
        idler_frequency=idler_frequency,
    )


# pylint: disable-next=too-many-arguments
def synthesize_field_sweep(
    system_gain: float,
    added_noise: Sequence[float],
    fields: Sequence[float],
    base_temperature: float,
    signal_frequency: float,
    idler_frequency: float,
    noise: float,
    rng: np.random.Generator,
) -> FieldSweep:
    """
    Output noise at the base temperature for each field's added noise
    """
    _check_noise(noise)
    added: np.ndarray = np.asarray(added_noise, dtype=float)
    field_values: np.ndarray = np.asarray(fields, dtype=float)
    if added.shape != field_values.shape:
        raise ValidationError("One added-noise value is needed per field")
    clean: np.ndarray = system_gain * output_noise_quanta(
        base_temperature, added, signal_frequency, idler_frequency
    )
    psd: np.ndarray = clean * (1.0 + noise * rng.standard_normal(added.size))
    return FieldSweep(
        fields=field_values,
        psd=psd,
        base_temperature=base_temperature,
        signal_frequency=signal_frequency,
        idler_frequency=idler_frequency,
    )
