"""
Lumped-element circuit model of a nanobridge kinetic-inductance resonator

Maps film properties and bridge geometry to the resonator parameters and the
vacuum Kerr coefficient, and inverts that map for design.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import constants, optimize

from .errors import (
    DegenerateGeometryError,
    InconsistentSpecError,
    NoSolutionError,
    ValidationError,
)

HBAR: float = constants.hbar

ALPHA_SOURCES: Tuple[str, ...] = ("geometry", "file")
# Relative disagreement between the two Kerr forms tolerated before the device
# is declared inconsistent
KERR_CONSISTENCY_RTOL: float = 1e-12
# Declared and geometric participation ratios are both reported past this
ALPHA_DISAGREEMENT_RTOL: float = 1e-2
# Quoted reference K further than this factor from the model is flagged
KERR_REFERENCE_FACTOR: float = 1.5
# Relative K error accepted at the edges of the design current range
DESIGN_EDGE_RTOL: float = 1e-12


def _require_positive(owner: str, **values: float) -> None:
    for name, value in values.items():
        if not (value > 0.0 and math.isfinite(value)):
            raise ValidationError(f"{owner}.{name} must be positive, got {value!r}")


def _require_non_negative(owner: str, **values: float) -> None:
    for name, value in values.items():
        if not (value >= 0.0 and math.isfinite(value)):
            raise ValidationError(
                f"{owner}.{name} must be non-negative, got {value!r}"
            )


@dataclass(frozen=True)
class FilmProperties:
    """
    Superconducting film the bridge is patterned from

    `critical_current_density` is the calibrated scalar relating the effective
    bridge cross-section to its characteristic current I*.
    """

    sheet_inductance: float
    thickness: float
    dead_width_per_side: float
    critical_current_density: float

    def __post_init__(self) -> None:
        _require_positive(
            "film",
            sheet_inductance=self.sheet_inductance,
            thickness=self.thickness,
            critical_current_density=self.critical_current_density,
        )
        _require_non_negative("film", dead_width_per_side=self.dead_width_per_side)


@dataclass(frozen=True)
class NanobridgeGeometry:
    """
    Drawn bridge dimensions
    """

    width: float
    length: float

    def __post_init__(self) -> None:
        _require_positive("geometry", width=self.width, length=self.length)


@dataclass(frozen=True)
class LumpedCircuit:
    """
    Shunt capacitor, parasitic inductance and port/loss rates (rad/s)
    """

    shunt_capacitance: float
    parasitic_inductance: float
    external_coupling_rate: float
    intrinsic_loss_rate: float

    def __post_init__(self) -> None:
        _require_positive("circuit", shunt_capacitance=self.shunt_capacitance)
        _require_non_negative(
            "circuit",
            parasitic_inductance=self.parasitic_inductance,
            external_coupling_rate=self.external_coupling_rate,
            intrinsic_loss_rate=self.intrinsic_loss_rate,
        )
        if self.external_coupling_rate + self.intrinsic_loss_rate <= 0.0:
            raise ValidationError("circuit decay rates must not both be zero")


@dataclass(frozen=True)
class ReferenceValues:
    """
    Quoted figures a device document may carry for comparison only
    """

    kerr_coefficient: Optional[float] = None
    characteristic_current: Optional[float] = None
    resonant_frequency: Optional[float] = None


@dataclass(frozen=True)
class DeviceSpec:
    """
    One physical device
    """

    film: FilmProperties
    geometry: NanobridgeGeometry
    circuit: LumpedCircuit
    name: str = "device"
    participation_ratio: Optional[float] = None
    reference: ReferenceValues = ReferenceValues()

    def __post_init__(self) -> None:
        if self.participation_ratio is not None and not (
            0.0 < self.participation_ratio <= 1.0
        ):
            raise ValidationError(
                "participation_ratio must lie in (0, 1], got "
                f"{self.participation_ratio!r}"
            )


# pylint: disable-next=too-many-instance-attributes
@dataclass(frozen=True)
class DerivedCircuit:
    """
    Resonator quantities computed from a DeviceSpec

    `kerr_coefficient` is in rad/s. `kerr_coefficient_zero_point` is the same
    quantity evaluated through the zero-point current, kept for the
    consistency check and the report.
    """

    bridge_inductance: float
    total_inductance: float
    participation_ratio: float
    resonator_impedance: float
    resonant_frequency: float
    zero_point_current: float
    characteristic_current: float
    kerr_coefficient: float
    external_coupling_rate: float
    intrinsic_loss_rate: float
    kerr_coefficient_zero_point: float = math.nan
    participation_ratio_geometry: float = math.nan
    participation_ratio_declared: Optional[float] = None
    alpha_source: str = "geometry"

    @property
    def total_decay_rate(self) -> float:
        """κ_tot = κ_ext + κ_int"""
        return self.external_coupling_rate + self.intrinsic_loss_rate

    @property
    def implied_parasitic_inductance(self) -> float:
        """parasitic inductance consistent with the participation ratio used"""
        return self.total_inductance - self.bridge_inductance

    @property
    def alpha_disagrees(self) -> bool:
        """declared and geometric α differ by more than 1%"""
        if self.participation_ratio_declared is None:
            return False
        return bool(
            abs(self.participation_ratio_declared - self.participation_ratio_geometry)
            > ALPHA_DISAGREEMENT_RTOL * self.participation_ratio_geometry
        )

    def with_resonance(self, resonant_frequency: float) -> "DerivedCircuit":
        """
        Same device with its resonance moved, e.g. by an applied field
        """
        return dataclasses.replace(self, resonant_frequency=resonant_frequency)


@dataclass(frozen=True)
class DesignConstraints:
    """
    What stays fixed while the bridge is sized for a target Kerr coefficient

    The current limits bound the bridge cross-section the process can make.
    """

    shunt_capacitance: float
    parasitic_inductance: float
    min_characteristic_current: float = 2e-6
    max_characteristic_current: float = 10e-3

    def __post_init__(self) -> None:
        _require_positive(
            "constraints",
            shunt_capacitance=self.shunt_capacitance,
            min_characteristic_current=self.min_characteristic_current,
            max_characteristic_current=self.max_characteristic_current,
        )
        _require_non_negative(
            "constraints", parasitic_inductance=self.parasitic_inductance
        )
        if self.min_characteristic_current >= self.max_characteristic_current:
            raise ValidationError("constraints current range is empty")


def effective_width(geom: NanobridgeGeometry, film: FilmProperties) -> float:
    """
    Superconducting width left after removing the dead width on both edges
    """
    width: float = geom.width - 2.0 * film.dead_width_per_side
    if width <= 0.0:
        raise DegenerateGeometryError(
            f"Bridge width {geom.width:.3e} m leaves no superconducting core "
            f"after {film.dead_width_per_side:.3e} m dead width per side"
        )
    return width


def bridge_inductance(geom: NanobridgeGeometry, film: FilmProperties) -> float:
    """
    Kinetic inductance of the bridge: sheet inductance times squares
    """
    return film.sheet_inductance * geom.length / effective_width(geom, film)


def characteristic_current(geom: NanobridgeGeometry, film: FilmProperties) -> float:
    """
    I* from the effective cross-section and the calibrated current density
    """
    return film.critical_current_density * effective_width(geom, film) * film.thickness


def kerr_coefficient(
    resonant_frequency: Union[float, np.ndarray],
    impedance: float,
    participation_ratio: float,
    characteristic_current: Union[float, np.ndarray],
) -> Union[float, np.ndarray]:
    """
    Vacuum Kerr coefficient K = (3/2) ħ ω³ α / (Z I*²), in rad/s

    Accepts arrays for the frequency or the characteristic current.
    """
    return (
        1.5
        * HBAR
        * np.power(resonant_frequency, 3)
        * participation_ratio
        / (impedance * np.square(characteristic_current))
    )


def kerr_from_zero_point(
    bridge_inductance_: float, zero_point_current: float, characteristic_current_: float
) -> float:
    """
    K = 6 (L_k0 / I*²) I_zpf⁴ divided by ħ, in rad/s
    """
    return (
        6.0
        * bridge_inductance_
        * zero_point_current**4
        / characteristic_current_**2
        / HBAR
    )


def derive_circuit(spec: DeviceSpec, alpha_source: str = "geometry") -> DerivedCircuit:
    """
    Compute the resonator quantities of a device

    With `alpha_source="geometry"` the participation ratio comes from the bridge
    and parasitic inductances. With `alpha_source="file"` the declared ratio is
    used and the parasitic inductance it implies replaces the declared one.
    """
    if alpha_source not in ALPHA_SOURCES:
        raise ValidationError(
            f"alpha_source must be one of {ALPHA_SOURCES}, got `{alpha_source}`"
        )
    bridge: float = bridge_inductance(spec.geometry, spec.film)
    current: float = characteristic_current(spec.geometry, spec.film)
    alpha_geometry: float = bridge / (bridge + spec.circuit.parasitic_inductance)

    alpha: float
    total: float
    if alpha_source == "file":
        if spec.participation_ratio is None:
            raise ValidationError(
                "alpha_source `file` needs a declared participation_ratio"
            )
        alpha = spec.participation_ratio
        total = bridge / alpha
    else:
        alpha = alpha_geometry
        total = bridge + spec.circuit.parasitic_inductance
    if not 0.0 < alpha <= 1.0:
        raise InconsistentSpecError(f"participation ratio {alpha} outside (0, 1]")

    capacitance: float = spec.circuit.shunt_capacitance
    omega: float = 1.0 / math.sqrt(total * capacitance)
    impedance: float = math.sqrt(total / capacitance)
    zero_point: float = math.sqrt(alpha * HBAR * omega / (2.0 * bridge))
    kerr: float = float(kerr_coefficient(omega, impedance, alpha, current))
    kerr_zero_point: float = kerr_from_zero_point(bridge, zero_point, current)

    if abs(kerr - kerr_zero_point) > KERR_CONSISTENCY_RTOL * kerr:
        raise InconsistentSpecError(
            f"Kerr coefficient forms disagree: {kerr:.17g} vs {kerr_zero_point:.17g}"
        )
    if zero_point >= current:
        raise InconsistentSpecError(
            f"Zero-point current {zero_point:.3e} A is not below I* {current:.3e} A"
        )

    circuit: DerivedCircuit = DerivedCircuit(
        bridge_inductance=bridge,
        total_inductance=total,
        participation_ratio=alpha,
        resonator_impedance=impedance,
        resonant_frequency=omega,
        zero_point_current=zero_point,
        characteristic_current=current,
        kerr_coefficient=kerr,
        external_coupling_rate=spec.circuit.external_coupling_rate,
        intrinsic_loss_rate=spec.circuit.intrinsic_loss_rate,
        kerr_coefficient_zero_point=kerr_zero_point,
        participation_ratio_geometry=alpha_geometry,
        participation_ratio_declared=spec.participation_ratio,
        alpha_source=alpha_source,
    )
    if circuit.alpha_disagrees:
        logging.warning(
            "Declared participation ratio %.4f disagrees with geometry value %.4f",
            spec.participation_ratio,
            alpha_geometry,
        )
    logging.debug("Derived circuit for `%s`: %s", spec.name, circuit)
    return circuit


def kerr_reference_ratio(spec: DeviceSpec, circuit: DerivedCircuit) -> Optional[float]:
    """
    Model K over the quoted K, or None when nothing was quoted
    """
    if spec.reference.kerr_coefficient is None:
        return None
    return circuit.kerr_coefficient / spec.reference.kerr_coefficient


def kerr_reference_flagged(ratio: Optional[float]) -> bool:
    """whether a model/quoted K ratio is outside the tolerated factor"""
    if ratio is None:
        return False
    return not 1.0 / KERR_REFERENCE_FACTOR <= ratio <= KERR_REFERENCE_FACTOR


def kerr_scaling_sweep(circuit: DerivedCircuit, currents: np.ndarray) -> np.ndarray:
    """
    K over a grid of I* with the resonator frequency, impedance and α held
    """
    return np.asarray(
        kerr_coefficient(
            circuit.resonant_frequency,
            circuit.resonator_impedance,
            circuit.participation_ratio,
            np.asarray(currents, dtype=float),
        )
    )


def nonlinear_inductance(circuit: DerivedCircuit, current: float) -> float:
    """
    L_k(I) ≈ L_k0 [1 + (I/I*)²]
    """
    return circuit.bridge_inductance * (
        1.0 + (current / circuit.characteristic_current) ** 2
    )


def design_bridge_for_kerr(
    target_kerr: float,
    resonant_frequency: float,
    film: FilmProperties,
    constraints: DesignConstraints,
) -> NanobridgeGeometry:
    """
    Size a bridge so the derived circuit has Kerr coefficient `target_kerr`
    at `resonant_frequency` (both rad/s)

    The bridge inductance needed for the resonance is fixed by the capacitor and
    parasitic inductance; the width is bisected for K and the length follows to
    keep that inductance.
    """
    _require_positive("design", target_kerr=target_kerr)
    _require_positive("design", resonant_frequency=resonant_frequency)
    total: float = 1.0 / (resonant_frequency**2 * constraints.shunt_capacitance)
    bridge: float = total - constraints.parasitic_inductance
    if bridge <= 0.0:
        raise NoSolutionError(
            "Parasitic inductance alone already exceeds the inductance needed for "
            f"{resonant_frequency / (2 * math.pi):.6e} Hz"
        )
    alpha: float = bridge / total
    impedance: float = math.sqrt(total / constraints.shunt_capacitance)

    def width_for_current(current: float) -> float:
        return current / (film.critical_current_density * film.thickness) + (
            2.0 * film.dead_width_per_side
        )

    def log_kerr_error(width: float) -> float:
        geom: NanobridgeGeometry = NanobridgeGeometry(width=width, length=1.0)
        return math.log(
            kerr_coefficient(
                resonant_frequency,
                impedance,
                alpha,
                characteristic_current(geom, film),
            )
            / target_kerr
        )

    narrow: float = width_for_current(constraints.min_characteristic_current)
    wide: float = width_for_current(constraints.max_characteristic_current)
    narrow_error: float = log_kerr_error(narrow)
    wide_error: float = log_kerr_error(wide)
    if narrow_error < -DESIGN_EDGE_RTOL or wide_error > DESIGN_EDGE_RTOL:
        kerr_max: float = target_kerr * math.exp(narrow_error)
        kerr_min: float = target_kerr * math.exp(wide_error)
        raise NoSolutionError(
            f"Target K {target_kerr:.6e} rad/s outside achievable "
            f"[{kerr_min:.6e}, {kerr_max:.6e}] rad/s",
            bracket=(kerr_min, kerr_max),
        )

    width: float
    # a target at a current limit lands on the bracket edge
    if abs(narrow_error) <= DESIGN_EDGE_RTOL:
        width = narrow
    elif abs(wide_error) <= DESIGN_EDGE_RTOL:
        width = wide
    else:
        width = optimize.bisect(
            log_kerr_error, narrow, wide, xtol=1e-18, rtol=1e-13, maxiter=400
        )
    width_eff: float = width - 2.0 * film.dead_width_per_side
    length: float = bridge * width_eff / film.sheet_inductance
    logging.info(
        "Designed bridge %.4e m wide, %.4e m long for K = %.6e rad/s",
        width,
        length,
        target_kerr,
    )
    return NanobridgeGeometry(width=width, length=length)
