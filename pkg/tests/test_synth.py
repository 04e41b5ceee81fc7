"""
Unit tests for the synthetic measurement generators
"""

import math

import numpy as np
import pytest

from nanobridge_kpa.calibration import (
    FieldSweep,
    NoiseTrace,
    ReflectionTrace,
    output_noise_quanta,
)
from nanobridge_kpa.errors import ValidationError
from nanobridge_kpa.synth import (
    reflection_grid,
    synthesize_field_sweep,
    synthesize_noise_sweep,
    synthesize_reflection,
)
from nanobridge_kpa.testing import (
    PROTOTYPE_EXTERNAL_COUPLING_RATE,
    PROTOTYPE_INTRINSIC_LOSS_RATE,
    PROTOTYPE_RESONANT_FREQUENCY,
    PROTOTYPE_TOTAL_DECAY_RATE,
)
from nanobridge_kpa.units import TWO_PI

SIGNAL: float = PROTOTYPE_RESONANT_FREQUENCY


def _reflection(noise: float, seed: int, points: int = 2001) -> ReflectionTrace:
    return synthesize_reflection(
        PROTOTYPE_RESONANT_FREQUENCY,
        PROTOTYPE_EXTERNAL_COUPLING_RATE,
        PROTOTYPE_INTRINSIC_LOSS_RATE,
        reflection_grid(PROTOTYPE_RESONANT_FREQUENCY, PROTOTYPE_TOTAL_DECAY_RATE, points=points),
        noise,
        np.random.default_rng(seed),
    )


def test_reflection_grid() -> None:
    """
    Hz grid centered on the resonance spanning ±3 κ_tot by default
    """
    grid: np.ndarray = reflection_grid(PROTOTYPE_RESONANT_FREQUENCY, PROTOTYPE_TOTAL_DECAY_RATE)
    assert grid.size == 20001
    assert grid[10000] == pytest.approx(7.45e9)
    assert grid[-1] - grid[0] == pytest.approx(6.0 * 58.9e6)


def test_seed_determinism() -> None:
    """
    One seed, one trace; another seed, another trace
    """
    first: ReflectionTrace = _reflection(0.01, seed=3)
    again: ReflectionTrace = _reflection(0.01, seed=3)
    other: ReflectionTrace = _reflection(0.01, seed=4)
    assert np.array_equal(first.s11, again.s11)
    assert np.array_equal(first.frequencies, again.frequencies)
    assert not np.array_equal(first.s11, other.s11)


def test_zero_noise_is_the_model() -> None:
    """
    Without noise the generator returns the forward model
    """
    trace: ReflectionTrace = _reflection(0.0, seed=0)
    omega: np.ndarray = TWO_PI * trace.frequencies
    expected: np.ndarray = 1.0 - PROTOTYPE_EXTERNAL_COUPLING_RATE / (
        1j * (omega - PROTOTYPE_RESONANT_FREQUENCY) + 0.5 * PROTOTYPE_TOTAL_DECAY_RATE
    )
    np.testing.assert_allclose(trace.s11, expected, rtol=0.0, atol=1e-15)

    temperatures: np.ndarray = np.linspace(0.05, 0.6, 7)
    sweep: NoiseTrace = synthesize_noise_sweep(
        250.0, 0.6, temperatures, 1e6, SIGNAL, SIGNAL, 0.0, np.random.default_rng(0)
    )
    np.testing.assert_array_equal(
        sweep.psd, 250.0 * output_noise_quanta(temperatures, 0.6, SIGNAL, SIGNAL)
    )


def test_reflection_noise_statistics() -> None:
    """
    Sample rms of the complex noise matches the requested level within 3σ
    """
    noise: float = 0.02
    points: int = 20001
    noisy: ReflectionTrace = _reflection(noise, seed=11, points=points)
    clean: ReflectionTrace = _reflection(0.0, seed=11, points=points)
    jitter: np.ndarray = noisy.s11 - clean.s11
    rms: float = float(np.sqrt(np.mean(np.abs(jitter) ** 2)))
    # |z|² is exponential for complex Gaussian z, so the rms has relative sd 1/(2√N)
    assert abs(rms / noise - 1.0) < 3.0 / (2.0 * math.sqrt(points))
    # split evenly between quadratures
    assert np.std(jitter.real) == pytest.approx(np.std(jitter.imag), rel=0.05)


def test_noise_sweep_statistics() -> None:
    """
    Multiplicative noise has the requested relative standard deviation
    """
    noise: float = 0.01
    temperatures: np.ndarray = np.linspace(0.05, 0.6, 4000)
    sweep: NoiseTrace = synthesize_noise_sweep(
        1e3, 0.59, temperatures, 1e6, SIGNAL, SIGNAL, noise, np.random.default_rng(5)
    )
    clean: np.ndarray = 1e3 * output_noise_quanta(temperatures, 0.59, SIGNAL, SIGNAL)
    relative: np.ndarray = sweep.psd / clean - 1.0
    assert abs(float(np.std(relative)) / noise - 1.0) < 3.0 / math.sqrt(
        2.0 * temperatures.size
    )
    assert sweep.bandwidth == 1e6


def test_field_sweep() -> None:
    """
    One point per field at the base temperature
    """
    fields: np.ndarray = np.array([0.0, 0.2, 0.4])
    sweep: FieldSweep = synthesize_field_sweep(
        1e3,
        [0.59, 0.62, 0.68],
        fields,
        0.058,
        SIGNAL,
        SIGNAL,
        0.0,
        np.random.default_rng(0),
    )
    np.testing.assert_array_equal(sweep.fields, fields)
    assert sweep.psd[2] > sweep.psd[1] > sweep.psd[0]
    assert sweep.base_temperature == 0.058
    with pytest.raises(ValidationError):
        synthesize_field_sweep(
            1e3, [0.59], fields, 0.058, SIGNAL, SIGNAL, 0.0, np.random.default_rng(0)
        )


@pytest.mark.parametrize(
    "noise",
    [-0.01, math.nan, math.inf],
    ids=["negative", "nan", "inf"],
)
def test_noise_level_validation(noise: float) -> None:
    """
    The noise level must be a finite non-negative number
    """
    with pytest.raises(ValidationError):
        _reflection(noise, seed=0)
