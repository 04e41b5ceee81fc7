"""
Unit table and conversions used at the input/output boundary

Everything inside the package is SI; angular frequencies and decay rates are
in rad/s. Documents and command-line flags carry human units and are converted
here.
"""

import math
from typing import Dict, Tuple

import numpy as np

from .errors import ValidationError

# unit -> (dimension, factor to SI)
UNITS: Dict[str, Tuple[str, float]] = {
    "Hz": ("frequency", 1.0),
    "kHz": ("frequency", 1e3),
    "MHz": ("frequency", 1e6),
    "GHz": ("frequency", 1e9),
    "rad/s": ("angular_frequency", 1.0),
    "H": ("inductance", 1.0),
    "nH": ("inductance", 1e-9),
    "pH": ("inductance", 1e-12),
    "H/sq": ("sheet_inductance", 1.0),
    "nH/sq": ("sheet_inductance", 1e-9),
    "pH/sq": ("sheet_inductance", 1e-12),
    "F": ("capacitance", 1.0),
    "pF": ("capacitance", 1e-12),
    "fF": ("capacitance", 1e-15),
    "m": ("length", 1.0),
    "um": ("length", 1e-6),
    "µm": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "A": ("current", 1.0),
    "mA": ("current", 1e-3),
    "uA": ("current", 1e-6),
    "µA": ("current", 1e-6),
    "A/m^2": ("current_density", 1.0),
    "W": ("power", 1.0),
    "dBm": ("power", math.nan),
    "K": ("temperature", 1.0),
    "mK": ("temperature", 1e-3),
    "T": ("field", 1.0),
    "mT": ("field", 1e-3),
    "Ohm": ("impedance", 1.0),
    "rad": ("angle", 1.0),
    "deg": ("angle", math.pi / 180.0),
    "1": ("dimensionless", 1.0),
}

TWO_PI: float = 2.0 * math.pi


def to_si(value: float, unit: str, dimension: str) -> float:
    """
    Convert `value` in `unit` to SI, checking it measures `dimension`

    Frequencies requested as `angular_frequency` may be given in any Hz unit,
    in which case the value is read as f = ω/2π.
    """
    try:
        unit_dimension, factor = UNITS[unit]
    except KeyError as err:
        raise ValidationError(f"Unknown unit `{unit}`") from err
    if unit == "dBm":
        if dimension != "power":
            raise ValidationError(f"Unit `{unit}` is not a {dimension} unit")
        return dbm_to_watts(value)
    if dimension == "angular_frequency" and unit_dimension == "frequency":
        return TWO_PI * value * factor
    if unit_dimension != dimension:
        raise ValidationError(f"Unit `{unit}` is not a {dimension} unit")
    return value * factor


def dbm_to_watts(power_dbm: float) -> float:
    """P[W] = 10^(dBm/10) × 1e-3"""
    return float(1e-3 * 10.0 ** (power_dbm / 10.0))


def watts_to_dbm(power: float) -> float:
    """
    Inverse of `dbm_to_watts`; zero power maps to -inf
    """
    if power <= 0.0:
        return -math.inf
    return float(10.0 * np.log10(power / 1e-3))


def db_to_power_ratio(gain_db: float) -> float:
    """power ratio from dB"""
    return float(10.0 ** (gain_db / 10.0))


def power_ratio_to_db(ratio: float) -> float:
    """dB from power ratio"""
    return float(10.0 * np.log10(ratio))
