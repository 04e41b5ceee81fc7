"""
Two-tone driven Kerr cavity: pump steady state and small-signal scattering

Conventions:
    * Frequencies and rates are angular (rad/s); powers are watts at the
      device input.
    * Intracavity amplitudes are normalized to photon number.
    * Reflection of a weak probe is S11(ω) = 1 − κ_ext / (i(ω − ω₀) + κ_tot/2).
    * The cross-Kerr term enters with a positive sign, K(|B|² + |C|²) δa†δa,
      so pumping pulls the signal resonance up by K(|B|² + |C|²). Each pump is
      pulled by (K/2)|own|² + K|other|².
    * ε = K|B||C| e^{i(φ₁+φ₂)} with φ₁, φ₂ the intracavity pump phases.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import constants, optimize

from .circuit import DerivedCircuit
from .errors import (
    CompressionRangeError,
    DivergentGainError,
    NoSolutionError,
    PumpUnstableError,
    ValidationError,
)
from .units import dbm_to_watts, power_ratio_to_db, watts_to_dbm

HBAR: float = constants.hbar

DEFAULT_GRID_POINTS: int = 2001
DEFAULT_RAMP_STEPS: int = 8
# Below-fold gain tolerance used by the gain solvers
GAIN_TOLERANCE_DB: float = 0.01
DEFAULT_PUMP_DETUNING_HZ: float = 133.5e6


@dataclass(frozen=True)
class DriveConfig:
    """
    Two pump tones at the device input
    """

    pump1_frequency: float
    pump2_frequency: float
    pump1_power: float
    pump2_power: float
    pump1_phase: float = 0.0
    pump2_phase: float = 0.0

    def __post_init__(self) -> None:
        for name in ("pump1_frequency", "pump2_frequency"):
            value: float = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValidationError(f"drive.{name} must be positive, got {value!r}")
        for name in ("pump1_power", "pump2_power"):
            value = getattr(self, name)
            if not (value >= 0.0 and math.isfinite(value)):
                raise ValidationError(
                    f"drive.{name} must be non-negative, got {value!r}"
                )

    @property
    def center_frequency(self) -> float:
        """(ω_p1 + ω_p2)/2"""
        return 0.5 * (self.pump1_frequency + self.pump2_frequency)

    @property
    def half_separation(self) -> float:
        """Δ = (ω_p1 − ω_p2)/2"""
        return 0.5 * (self.pump1_frequency - self.pump2_frequency)

    @property
    def total_power(self) -> float:
        """sum of both tones, W"""
        return self.pump1_power + self.pump2_power

    def scaled(self, level_db: float) -> "DriveConfig":
        """both tones changed by `level_db`"""
        factor: float = 10.0 ** (level_db / 10.0)
        return dataclasses.replace(
            self,
            pump1_power=self.pump1_power * factor,
            pump2_power=self.pump2_power * factor,
        )

    def shifted(self, offset: float) -> "DriveConfig":
        """both tones moved by `offset` rad/s"""
        return dataclasses.replace(
            self,
            pump1_frequency=self.pump1_frequency + offset,
            pump2_frequency=self.pump2_frequency + offset,
        )


# pylint: disable-next=too-many-instance-attributes
@dataclass(frozen=True)
class PumpState:
    """
    Solved intracavity pump amplitudes and the resulting small-signal
    parameters
    """

    amplitude_b: complex
    amplitude_c: complex
    cross_kerr_shift: float
    parametric_strength: complex
    effective_detuning: float
    center_frequency: float
    pump1_phase: float = 0.0
    pump2_phase: float = 0.0
    stable: bool = True

    @property
    def photons_b(self) -> float:
        """|B|²"""
        return abs(self.amplitude_b) ** 2

    @property
    def photons_c(self) -> float:
        """|C|²"""
        return abs(self.amplitude_c) ** 2


@dataclass(frozen=True)
class GainSpectrum:
    """
    Signal and idler scattering over a grid of absolute signal frequencies
    """

    frequencies: np.ndarray
    signal_scattering: np.ndarray
    idler_scattering: np.ndarray
    center_frequency: float

    @property
    def power_gain_db(self) -> np.ndarray:
        """20·log10|g_s|"""
        return 20.0 * np.log10(np.abs(self.signal_scattering))

    @property
    def detunings(self) -> np.ndarray:
        """grid relative to the gain center"""
        return self.frequencies - self.center_frequency


@dataclass(frozen=True)
class PhaseSweep:
    """
    Degenerate (signal = idler frequency) gain over a phase grid

    `phases` are Δφ = φ_probe − (φ₁+φ₂)/2 for `phase_sensitive_gain`, or the
    absolute probe phase for `probe_phase_gain`.
    """

    phases: np.ndarray
    gain_db: np.ndarray
    max_gain_db: float
    min_gain_db: float


def _pump_fluxes(drive: DriveConfig) -> Tuple[float, float]:
    return (
        drive.pump1_power / (HBAR * drive.pump1_frequency),
        drive.pump2_power / (HBAR * drive.pump2_frequency),
    )


def _pump_detunings(
    circuit: DerivedCircuit, drive: DriveConfig, photons: Tuple[float, float]
) -> Tuple[float, float]:
    """each pump's detuning from its own Kerr-pulled resonance"""
    kerr: float = circuit.kerr_coefficient
    n_b, n_c = photons
    omega: float = circuit.resonant_frequency
    return (
        drive.pump1_frequency - omega - kerr * (0.5 * n_b + n_c),
        drive.pump2_frequency - omega - kerr * (0.5 * n_c + n_b),
    )


def _pump_response(
    circuit: DerivedCircuit,
    drive: DriveConfig,
    fluxes: Tuple[float, float],
    photons: Tuple[float, float],
) -> Tuple[complex, complex]:
    half: float = 0.5 * circuit.total_decay_rate
    coupling: float = math.sqrt(circuit.external_coupling_rate)
    detuning_b, detuning_c = _pump_detunings(circuit, drive, photons)
    return (
        coupling * math.sqrt(fluxes[0]) / complex(half, detuning_b),
        coupling * math.sqrt(fluxes[1]) / complex(half, detuning_c),
    )


def _pump_jacobian(
    circuit: DerivedCircuit,
    drive: DriveConfig,
    amplitudes: Tuple[complex, complex],
) -> np.ndarray:
    """
    Linearization of the pump equations in the (B, B*, C, C*) basis; its
    eigenvalues are those of the real 4x4 Jacobian
    """
    kerr: float = circuit.kerr_coefficient
    half: float = 0.5 * circuit.total_decay_rate
    amp_b, amp_c = amplitudes
    detuning_b, detuning_c = _pump_detunings(
        circuit, drive, (abs(amp_b) ** 2, abs(amp_c) ** 2)
    )
    diag_b: complex = -(1j * detuning_b + half) + 0.5j * kerr * abs(amp_b) ** 2
    diag_c: complex = -(1j * detuning_c + half) + 0.5j * kerr * abs(amp_c) ** 2
    conj_b: complex = 0.5j * kerr * amp_b**2
    conj_c: complex = 0.5j * kerr * amp_c**2
    cross_bc: complex = 1j * kerr * amp_b * np.conj(amp_c)
    cross_bcs: complex = 1j * kerr * amp_b * amp_c
    cross_cb: complex = 1j * kerr * amp_c * np.conj(amp_b)
    cross_cbs: complex = 1j * kerr * amp_c * amp_b
    return np.array(
        [
            [diag_b, conj_b, cross_bc, cross_bcs],
            [np.conj(conj_b), np.conj(diag_b), np.conj(cross_bcs), np.conj(cross_bc)],
            [cross_cb, cross_cbs, diag_c, conj_c],
            [np.conj(cross_cbs), np.conj(cross_cb), np.conj(conj_c), np.conj(diag_c)],
        ],
        dtype=complex,
    )


# pylint: disable-next=too-many-arguments,too-many-locals
def _relax_photons(
    circuit: DerivedCircuit,
    drive: DriveConfig,
    fluxes: Tuple[float, float],
    start: Tuple[float, float],
    *,
    damping: float,
    tol: float,
    max_iterations: int,
) -> Tuple[float, float]:
    """
    Damped fixed-point iteration of n = κ_ext·flux / (detuning(n)² + κ²/4)
    """
    photons: Tuple[float, float] = start
    step: float = damping
    last_error: float = math.inf
    for _ in range(max_iterations):
        amp_b, amp_c = _pump_response(circuit, drive, fluxes, photons)
        target: Tuple[float, float] = (abs(amp_b) ** 2, abs(amp_c) ** 2)
        error: float = max(
            abs(target[0] - photons[0]) / max(target[0], 1e-300),
            abs(target[1] - photons[1]) / max(target[1], 1e-300),
        )
        if error < tol:
            return target
        if error > last_error:
            step = max(0.5 * step, 1e-3)
        last_error = error
        photons = (
            photons[0] + step * (target[0] - photons[0]),
            photons[1] + step * (target[1] - photons[1]),
        )
    raise PumpUnstableError(
        f"Pump steady state did not converge in {max_iterations} iterations "
        f"(last relative change {last_error:.3e})",
        last_iterate=photons,
    )


def _off_lower_branch(
    circuit: DerivedCircuit, drive: DriveConfig, photons: Tuple[float, float]
) -> bool:
    """
    Whether either pump sits beyond the fold of its own Duffing response

    With the other pump's pull frozen a pump at bare detuning d has turning
    points where its pulled detuning u solves 3u² - 2du + κ²/4 = 0; the
    low-power branch is u above the larger root.
    """
    kerr: float = circuit.kerr_coefficient
    quarter_kappa_sq: float = 0.25 * circuit.total_decay_rate**2
    pulled: Tuple[float, float] = _pump_detunings(circuit, drive, photons)
    for own, detuning in zip(photons, pulled):
        bare: float = detuning + 0.5 * kerr * own
        if kerr > 0.0:
            discriminant: float = bare**2 - 3.0 * quarter_kappa_sq
            if bare > 0.0 and discriminant > 0.0:
                if detuning < (bare + math.sqrt(discriminant)) / 3.0:
                    return True
        elif kerr < 0.0:
            discriminant = bare**2 - 3.0 * quarter_kappa_sq
            if bare < 0.0 and discriminant > 0.0:
                if detuning > (bare - math.sqrt(discriminant)) / 3.0:
                    return True
    return False


def _warn_on_close_pumps(circuit: DerivedCircuit, drive: DriveConfig) -> None:
    kappa: float = circuit.total_decay_rate
    for name, frequency in (
        ("pump1", drive.pump1_frequency),
        ("pump2", drive.pump2_frequency),
    ):
        if abs(frequency - circuit.resonant_frequency) <= kappa:
            logging.warning(
                "%s is within κ_tot of the resonance; the two-tone separation "
                "assumed by the pump model may not hold",
                name,
            )


# pylint: disable-next=too-many-locals
def pump_steady_state(
    circuit: DerivedCircuit,
    drive: DriveConfig,
    *,
    ramp_steps: int = DEFAULT_RAMP_STEPS,
    damping: float = 0.5,
    tol: float = 1e-13,
    max_iterations: int = 20000,
) -> PumpState:
    """
    Solve the classical pump amplitudes including self- and cross-Kerr pulls

    The drive power is ramped up from zero and each ramp step is relaxed from
    the previous one, which keeps the solution on the branch connected to the
    low-power response. Leaving that branch, non-convergence or an unstable
    linearization raises PumpUnstableError.
    """
    _warn_on_close_pumps(circuit, drive)
    center: float = drive.center_frequency
    phase_sum: float = drive.pump1_phase + drive.pump2_phase
    if drive.total_power == 0.0:
        return PumpState(
            amplitude_b=0j,
            amplitude_c=0j,
            cross_kerr_shift=0.0,
            parametric_strength=0j,
            effective_detuning=circuit.resonant_frequency - center,
            center_frequency=center,
            pump1_phase=drive.pump1_phase,
            pump2_phase=drive.pump2_phase,
        )
    fluxes: Tuple[float, float] = _pump_fluxes(drive)
    logging.debug(
        "Solving pump steady state for fluxes %.6e, %.6e photons/s", *fluxes
    )

    linear: Tuple[complex, complex] = _pump_response(circuit, drive, fluxes, (0.0, 0.0))
    photons: Tuple[float, float] = (abs(linear[0]) ** 2, abs(linear[1]) ** 2)
    if circuit.kerr_coefficient != 0.0:
        photons = (0.0, 0.0)
        previous_scale: float = 0.0
        for scale in np.linspace(1.0 / ramp_steps, 1.0, ramp_steps):
            step_fluxes: Tuple[float, float] = (
                fluxes[0] * scale,
                fluxes[1] * scale,
            )
            start: Tuple[float, float] = (
                (photons[0], photons[1])
                if previous_scale > 0.0
                else (
                    abs(linear[0]) ** 2 * scale,
                    abs(linear[1]) ** 2 * scale,
                )
            )
            solved: Tuple[float, float] = _relax_photons(
                circuit,
                drive,
                step_fluxes,
                start,
                damping=damping,
                tol=tol,
                max_iterations=max_iterations,
            )
            if _off_lower_branch(circuit, drive, solved):
                raise PumpUnstableError(
                    f"Pump left the low-power branch at {scale:.0%} of the drive "
                    "power; the drive is past the bistability fold",
                    last_iterate=solved,
                )
            photons = solved
            previous_scale = float(scale)

    amplitudes: Tuple[complex, complex] = _pump_response(
        circuit, drive, fluxes, photons
    )
    if circuit.kerr_coefficient != 0.0:
        growth: float = float(
            np.max(np.linalg.eigvals(_pump_jacobian(circuit, drive, amplitudes)).real)
        )
        if growth >= 0.0:
            raise PumpUnstableError(
                f"Pump steady state is unstable (growth rate {growth:.3e} 1/s)",
                last_iterate=photons,
            )

    n_b: float = abs(amplitudes[0]) ** 2
    n_c: float = abs(amplitudes[1]) ** 2
    shift: float = circuit.kerr_coefficient * (n_b + n_c)
    strength: complex = (
        circuit.kerr_coefficient * math.sqrt(n_b * n_c) * np.exp(1j * phase_sum)
    )
    state: PumpState = PumpState(
        amplitude_b=amplitudes[0],
        amplitude_c=amplitudes[1],
        cross_kerr_shift=shift,
        parametric_strength=complex(strength),
        effective_detuning=circuit.resonant_frequency - center + shift,
        center_frequency=center,
        pump1_phase=drive.pump1_phase,
        pump2_phase=drive.pump2_phase,
    )
    logging.debug(
        "Pump photons %.6e, %.6e; |ε| = %.6e rad/s; Δ_eff = %.6e rad/s",
        n_b,
        n_c,
        abs(strength),
        state.effective_detuning,
    )
    return state


def reflection_coefficient(
    circuit: DerivedCircuit, probe_frequency: np.ndarray
) -> np.ndarray:
    """
    Unpumped one-port reflection S11(ω)
    """
    omega: np.ndarray = np.asarray(probe_frequency, dtype=float)
    return 1.0 - circuit.external_coupling_rate / (
        1j * (omega - circuit.resonant_frequency) + 0.5 * circuit.total_decay_rate
    )


def parametric_threshold(circuit: DerivedCircuit, pump: PumpState) -> float:
    """
    |ε| at which the linearized signal mode starts to oscillate
    """
    return math.hypot(pump.effective_detuning, 0.5 * circuit.total_decay_rate)


def _check_below_threshold(circuit: DerivedCircuit, pump: PumpState) -> None:
    if not pump.stable:
        raise PumpUnstableError(
            "Pump state is marked unstable", last_iterate=(pump.photons_b, pump.photons_c)
        )
    threshold: float = parametric_threshold(circuit, pump)
    if abs(pump.parametric_strength) >= threshold:
        raise DivergentGainError(
            f"|ε| = {abs(pump.parametric_strength):.6e} rad/s is at or above the "
            f"parametric threshold {threshold:.6e} rad/s"
        )


def _scattering(
    circuit: DerivedCircuit, pump: PumpState, detuning: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    g_s(δ), g_i(δ) of the linearized Langevin equations at signal detuning δ
    from the gain center
    """
    half: float = 0.5 * circuit.total_decay_rate
    coupling: float = circuit.external_coupling_rate
    delta: float = pump.effective_detuning
    strength: complex = pump.parametric_strength
    det: np.ndarray = (half + 1j * (detuning - delta)) * (
        half + 1j * (detuning + delta)
    ) - abs(strength) ** 2
    signal: np.ndarray = 1.0 - coupling * (half + 1j * (detuning + delta)) / det
    idler: np.ndarray = -1j * np.conj(strength) * coupling / det
    return signal, idler


def default_grid(
    circuit: DerivedCircuit, pump: PumpState, points: int = DEFAULT_GRID_POINTS
) -> np.ndarray:
    """
    `points` frequencies over ±κ_tot around the gain center
    """
    kappa: float = circuit.total_decay_rate
    return pump.center_frequency + np.linspace(-kappa, kappa, points)


def gain_spectrum(
    circuit: DerivedCircuit, pump: PumpState, grid: Optional[np.ndarray] = None
) -> GainSpectrum:
    """
    Phase-preserving signal and idler scattering over absolute frequencies
    """
    _check_below_threshold(circuit, pump)
    frequencies: np.ndarray = (
        default_grid(circuit, pump) if grid is None else np.asarray(grid, dtype=float)
    )
    if frequencies.ndim != 1 or frequencies.size < 1:
        raise ValidationError("Frequency grid must be a non-empty 1-D array")
    if np.any(np.diff(frequencies) <= 0.0):
        raise ValidationError("Frequency grid must be strictly increasing")
    signal, idler = _scattering(circuit, pump, frequencies - pump.center_frequency)
    return GainSpectrum(
        frequencies=frequencies,
        signal_scattering=signal,
        idler_scattering=idler,
        center_frequency=pump.center_frequency,
    )


def _gain_at(circuit: DerivedCircuit, pump: PumpState, detuning: float) -> float:
    signal, _ = _scattering(circuit, pump, np.asarray([detuning]))
    return float(np.abs(signal[0]) ** 2)


def peak_gain(circuit: DerivedCircuit, pump: PumpState) -> Tuple[float, float]:
    """
    (detuning, gain dB) of the phase-preserving gain maximum
    """
    _check_below_threshold(circuit, pump)
    kappa: float = circuit.total_decay_rate
    coarse: np.ndarray = np.linspace(-2.0 * kappa, 2.0 * kappa, 4001)
    signal, _ = _scattering(circuit, pump, coarse)
    best: int = int(np.argmax(np.abs(signal)))
    spacing: float = coarse[1] - coarse[0]
    refined = optimize.minimize_scalar(
        lambda x: -_gain_at(circuit, pump, x),
        bounds=(coarse[best] - spacing, coarse[best] + spacing),
        method="bounded",
        options={"xatol": spacing * 1e-9},
    )
    detuning: float = float(refined.x)
    gain: float = _gain_at(circuit, pump, detuning)
    if gain < float(np.abs(signal[best]) ** 2):
        detuning = float(coarse[best])
        gain = float(np.abs(signal[best]) ** 2)
    return detuning, power_ratio_to_db(gain)


def bandwidth_3db(circuit: DerivedCircuit, pump: PumpState) -> float:
    """
    Full width (rad/s) of the gain lobe at half its peak power gain
    """
    center, peak_db = peak_gain(circuit, pump)
    half_gain: float = 10.0 ** (peak_db / 10.0) / 2.0
    kappa: float = circuit.total_decay_rate

    def excess(detuning: float) -> float:
        return _gain_at(circuit, pump, detuning) - half_gain

    edges: list = []
    for direction in (1.0, -1.0):
        span: float = kappa / 1000.0
        while excess(center + direction * span) > 0.0:
            span *= 2.0
            if span > 20.0 * kappa:
                raise NoSolutionError("Gain does not fall 3 dB within 20 κ_tot")
        edges.append(
            optimize.brentq(
                excess,
                center,
                center + direction * span,
                xtol=kappa * 1e-13,
                rtol=1e-14,
            )
        )
    return abs(edges[0] - edges[1])


def _degenerate_scattering(
    circuit: DerivedCircuit, pump: PumpState
) -> Tuple[complex, complex]:
    _check_below_threshold(circuit, pump)
    signal, idler = _scattering(circuit, pump, np.asarray([0.0]))
    return complex(signal[0]), complex(idler[0])


def probe_phase_gain(
    circuit: DerivedCircuit, pump: PumpState, probe_phases: np.ndarray
) -> PhaseSweep:
    """
    Gain of a probe at the gain center versus its absolute phase
    """
    signal, idler = _degenerate_scattering(circuit, pump)
    phases: np.ndarray = np.asarray(probe_phases, dtype=float)
    gain: np.ndarray = np.abs(signal + idler * np.exp(2j * phases)) ** 2
    return PhaseSweep(
        phases=phases,
        gain_db=10.0 * np.log10(gain),
        max_gain_db=power_ratio_to_db((abs(signal) + abs(idler)) ** 2),
        min_gain_db=power_ratio_to_db((abs(signal) - abs(idler)) ** 2),
    )


def phase_sensitive_gain(
    circuit: DerivedCircuit, pump: PumpState, relative_phases: np.ndarray
) -> PhaseSweep:
    """
    Degenerate gain versus Δφ = φ_probe − (φ₁+φ₂)/2
    """
    relative: np.ndarray = np.asarray(relative_phases, dtype=float)
    sweep: PhaseSweep = probe_phase_gain(
        circuit, pump, relative + 0.5 * (pump.pump1_phase + pump.pump2_phase)
    )
    return dataclasses.replace(sweep, phases=relative)


def ideal_added_noise(
    circuit: DerivedCircuit, pump: PumpState, detuning: float = 0.0
) -> float:
    """
    Input-referred added noise (quanta) with vacuum at the signal, idler and
    internal-loss ports
    """
    _check_below_threshold(circuit, pump)
    if circuit.external_coupling_rate <= 0.0:
        raise ValidationError("Added noise needs a non-zero external coupling rate")
    signal, idler = _scattering(circuit, pump, np.asarray([detuning]))
    g_s: complex = complex(signal[0])
    g_i: complex = complex(idler[0])
    loss: float = math.sqrt(circuit.intrinsic_loss_rate / circuit.external_coupling_rate)
    loss_signal: float = abs((g_s - 1.0) * loss) ** 2
    loss_idler: float = abs(g_i * loss) ** 2
    return (abs(g_i) ** 2 + loss_signal + loss_idler) / (2.0 * abs(g_s) ** 2)


def _signal_photons(
    circuit: DerivedCircuit, pump: PumpState, detuning: float, flux: float
) -> float:
    """
    Intracavity photons of a signal of `flux` photons/s with the signal's own
    cross-Kerr shift solved self-consistently
    """
    kerr: float = circuit.kerr_coefficient
    coupling: float = circuit.external_coupling_rate

    def occupation(photons: float) -> float:
        shifted: PumpState = dataclasses.replace(
            pump, effective_detuning=pump.effective_detuning + kerr * photons
        )
        signal, idler = _scattering(circuit, shifted, np.asarray([detuning]))
        return flux * float(abs(1.0 - signal[0]) ** 2 + abs(idler[0]) ** 2) / coupling

    upper: float = occupation(0.0)
    if upper == 0.0:
        return 0.0
    while upper - occupation(upper) < 0.0:
        upper *= 2.0
    return float(
        optimize.brentq(lambda n: n - occupation(n), 0.0, upper, xtol=1e-15 * upper)
    )


def compressed_gain_db(
    circuit: DerivedCircuit, pump: PumpState, signal_power: float, detuning: float = 0.0
) -> float:
    """
    Quasi-static gain of a signal of `signal_power` watts
    """
    _check_below_threshold(circuit, pump)
    flux: float = signal_power / (HBAR * (pump.center_frequency + detuning))
    photons: float = _signal_photons(circuit, pump, detuning, flux)
    shifted: PumpState = dataclasses.replace(
        pump,
        effective_detuning=pump.effective_detuning
        + circuit.kerr_coefficient * photons,
    )
    return power_ratio_to_db(_gain_at(circuit, shifted, detuning))


# pylint: disable-next=too-many-arguments
def compression_point(
    circuit: DerivedCircuit,
    pump: PumpState,
    small_signal_gain_db: Optional[float] = None,
    *,
    detuning: float = 0.0,
    power_range_dbm: Tuple[float, float] = (-200.0, -60.0),
) -> float:
    """
    Input-referred 1-dB compression power (W)

    The signal's intracavity photons add to the cross-Kerr detuning; the
    input power where the self-consistent gain is 1 dB below the small-signal
    gain is bisected.
    """
    small_signal: float = power_ratio_to_db(_gain_at(circuit, pump, detuning))
    if (
        small_signal_gain_db is not None
        and abs(small_signal - small_signal_gain_db) > 0.1
    ):
        raise ValidationError(
            f"Pump gives {small_signal:.3f} dB, not the requested "
            f"{small_signal_gain_db:.3f} dB small-signal gain"
        )

    def excess(level_dbm: float) -> float:
        return (
            compressed_gain_db(circuit, pump, dbm_to_watts(level_dbm), detuning)
            - small_signal
            + 1.0
        )

    low, high = power_range_dbm
    if excess(high) > 0.0:
        raise CompressionRangeError(
            f"Gain did not compress by 1 dB below {high:.1f} dBm input"
        )
    if excess(low) <= 0.0:
        raise CompressionRangeError(f"Gain is already compressed at {low:.1f} dBm")
    level: float = optimize.bisect(excess, low, high, xtol=1e-4)
    logging.info("1-dB compression at %.3f dBm input", level)
    return dbm_to_watts(level)


def kerr_compensated_drive(
    circuit: DerivedCircuit,
    tone_power: float,
    half_separation: float,
    phases: Tuple[float, float] = (0.0, 0.0),
    *,
    initial_center: Optional[float] = None,
) -> DriveConfig:
    """
    Equal-power pumps ±`half_separation` about a center that sits on the
    cross-Kerr shifted signal resonance (Δ_eff = 0)
    """

    def build(center: float) -> DriveConfig:
        return DriveConfig(
            pump1_frequency=center + half_separation,
            pump2_frequency=center - half_separation,
            pump1_power=tone_power,
            pump2_power=tone_power,
            pump1_phase=phases[0],
            pump2_phase=phases[1],
        )

    def residual(center: float) -> float:
        return pump_steady_state(circuit, build(center)).effective_detuning

    omega: float = circuit.resonant_frequency
    if tone_power == 0.0 or circuit.kerr_coefficient == 0.0:
        return build(omega)
    start: float = omega if initial_center is None else initial_center
    try:
        center: float = optimize.newton(
            residual,
            start,
            x1=start + residual(start),
            tol=circuit.total_decay_rate * 1e-10,
            maxiter=100,
        )
    except RuntimeError as err:
        raise NoSolutionError(
            "Could not center the pumps on the Kerr-shifted resonance"
        ) from err
    return build(float(center))


def _solve_level(
    gain_at: Callable[[float], float],
    target_db: float,
    start: float,
    *,
    step: float = 1.0,
    max_steps: int = 200,
) -> float:
    """
    Bracket and root-find the drive level (dB or dBm) at which `gain_at` hits
    `target_db`; above-threshold levels count as exceeding the target
    """

    def excess(level: float) -> float:
        try:
            return gain_at(level) - target_db
        except DivergentGainError:
            return 1e3

    low: float = start
    low_excess: float
    try:
        low_excess = excess(low)
    except PumpUnstableError as err:
        raise NoSolutionError("Pump unstable at the lowest drive level") from err
    if low_excess >= 0.0:
        raise NoSolutionError(
            f"Gain already {low_excess + target_db:.3f} dB at the starting level"
        )
    high: float = low
    for _ in range(max_steps):
        high = low + step
        try:
            high_excess: float = excess(high)
        except PumpUnstableError as err:
            raise NoSolutionError(
                f"Pump became unstable below {target_db:.2f} dB gain",
                bracket=(start, low),
            ) from err
        if high_excess >= 0.0:
            break
        low = high
    else:
        raise NoSolutionError(
            f"{target_db:.2f} dB gain not reached", bracket=(start, high)
        )
    return float(optimize.brentq(excess, low, high, xtol=1e-10, rtol=1e-14))


def _linear_power_estimate(
    circuit: DerivedCircuit, target_gain_db: float, half_separation: float
) -> float:
    """
    Tone power (W) reaching the target with Kerr pulls ignored, used to start
    the bracket
    """
    amplitude: float = math.sqrt(10.0 ** (target_gain_db / 10.0))
    ratio: float = math.sqrt(max((amplitude - 1.0) / (amplitude + 1.0), 1e-12))
    strength: float = ratio * 0.5 * circuit.total_decay_rate
    photons: float = strength / circuit.kerr_coefficient
    flux: float = (
        photons
        * (half_separation**2 + 0.25 * circuit.total_decay_rate**2)
        / circuit.external_coupling_rate
    )
    return flux * HBAR * circuit.resonant_frequency


def drive_for_gain(
    circuit: DerivedCircuit,
    target_gain_db: float,
    half_separation: float,
    phases: Tuple[float, float] = (0.0, 0.0),
) -> DriveConfig:
    """
    Kerr-compensated equal-power drive whose peak phase-preserving gain is
    `target_gain_db`
    """
    if circuit.kerr_coefficient <= 0.0:
        raise NoSolutionError("A linear resonator cannot provide gain")
    last_center: list = [None]

    def gain_at(level_dbm: float) -> float:
        drive: DriveConfig = kerr_compensated_drive(
            circuit,
            dbm_to_watts(level_dbm),
            half_separation,
            phases,
            initial_center=last_center[0],
        )
        last_center[0] = drive.center_frequency
        pump: PumpState = pump_steady_state(circuit, drive)
        return peak_gain(circuit, pump)[1]

    estimate: float = watts_to_dbm(
        _linear_power_estimate(circuit, target_gain_db, half_separation)
    )
    level: float = _solve_level(gain_at, target_gain_db, estimate - 10.0, step=1.0)
    drive: DriveConfig = kerr_compensated_drive(
        circuit, dbm_to_watts(level), half_separation, phases
    )
    logging.info(
        "%.2f dB gain needs %.3f dBm per tone (%.3f dBm total)",
        target_gain_db,
        level,
        watts_to_dbm(drive.total_power),
    )
    return drive


def power_adjustment_db(before: DriveConfig, after: DriveConfig) -> float:
    """change of total drive power in dB"""
    return power_ratio_to_db(after.total_power / before.total_power)


def retune_for_field_shift(
    circuit: DerivedCircuit,
    drive: DriveConfig,
    shifted_resonance: float,
    target_gain_db: float,
) -> DriveConfig:
    """
    Re-center both pumps on a shifted resonance and re-solve their common power
    for `target_gain_db`
    """
    shift: float = shifted_resonance - circuit.resonant_frequency
    if shift == 0.0:
        return drive
    shifted_circuit: DerivedCircuit = circuit.with_resonance(shifted_resonance)
    recentered: DriveConfig = drive.shifted(shift)

    def gain_at(level_db: float) -> float:
        pump: PumpState = pump_steady_state(shifted_circuit, recentered.scaled(level_db))
        return peak_gain(shifted_circuit, pump)[1]

    level: float = _solve_level(gain_at, target_gain_db, -10.0, step=0.5)
    retuned: DriveConfig = recentered.scaled(level)
    logging.info(
        "Resonance shift %.6e rad/s compensated with %.4f dB drive change",
        shift,
        level,
    )
    return retuned


def attenuator_heat_load(drive: DriveConfig, attenuation_db: float = 30.0) -> float:
    """
    Power (W) dissipated in an attenuator placed ahead of the device that
    delivers `drive`
    """
    incident: float = drive.total_power * 10.0 ** (attenuation_db / 10.0)
    return incident - drive.total_power


def describe_frequencies(values: Sequence[float]) -> str:
    """human-readable GHz list for log lines"""
    return ", ".join(f"{value / (2.0 * math.pi) / 1e9:.6f} GHz" for value in values)
