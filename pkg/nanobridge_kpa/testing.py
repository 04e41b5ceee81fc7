"""
pytest plugin with shared fixtures for the package and for projects building
on it

Load with `pytest_plugins = ["nanobridge_kpa.testing"]`.
"""

import dataclasses
import json
import os
import shutil
from typing import Any, Dict

import numpy as np
import pytest

from .circuit import (
    DerivedCircuit,
    DeviceSpec,
    FilmProperties,
    LumpedCircuit,
    NanobridgeGeometry,
    ReferenceValues,
    derive_circuit,
)
from .units import TWO_PI

# Reference operating point of the prototype amplifier
PROTOTYPE_RESONANT_FREQUENCY: float = TWO_PI * 7.45e9
PROTOTYPE_TOTAL_DECAY_RATE: float = TWO_PI * 58.9e6
PROTOTYPE_INTERNAL_QUALITY: float = 4000.0
PROTOTYPE_INTRINSIC_LOSS_RATE: float = PROTOTYPE_RESONANT_FREQUENCY / PROTOTYPE_INTERNAL_QUALITY
PROTOTYPE_EXTERNAL_COUPLING_RATE: float = PROTOTYPE_TOTAL_DECAY_RATE - PROTOTYPE_INTRINSIC_LOSS_RATE
PROTOTYPE_IMPEDANCE: float = 88.7
PROTOTYPE_PARTICIPATION_RATIO: float = 0.584
PROTOTYPE_CHARACTERISTIC_CURRENT: float = 2e-6
PROTOTYPE_QUOTED_KERR: float = TWO_PI * 110e3
PROTOTYPE_PUMP_DETUNING: float = TWO_PI * 133.5e6
PROTOTYPE_FIELD_SHIFT: float = -TWO_PI * 26e6
PROTOTYPE_ADDED_NOISE: float = 0.59
PROTOTYPE_ADDED_NOISE_FIELD: float = 0.64
PROTOTYPE_SYSTEM_NOISE: float = 23.0
PROTOTYPE_TRANSMISSION: float = 0.95
PROTOTYPE_GAIN_DB: float = 26.0

DEVICE_DOCUMENT: str = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "devices",
    "nkpa_prototype.json",
)


def prototype_device_document() -> Dict[str, Any]:
    """
    JSON document describing the prototype device
    """
    return {
        "name": "nkpa-prototype",
        "film": {
            "sheet_inductance": {"value": 179, "unit": "pH/sq"},
            "thickness": {"value": 4, "unit": "nm"},
            "dead_width_per_side": {"value": 5, "unit": "nm"},
            "critical_current_density": {
                "value": 2e-6 / (13e-9 * 4e-9),
                "unit": "A/m^2",
            },
        },
        "geometry": {
            "width": {"value": 23, "unit": "nm"},
            "length": {"value": 140, "unit": "nm"},
        },
        "circuit": {
            "shunt_capacitance": {"value": 134.3, "unit": "fF"},
            "parasitic_inductance": {"value": 1.47, "unit": "nH"},
            "external_coupling_rate": {"value": 57.0375, "unit": "MHz"},
            "intrinsic_loss_rate": {"value": 1.8625, "unit": "MHz"},
        },
        "participation_ratio": PROTOTYPE_PARTICIPATION_RATIO,
        "reference": {
            "kerr_coefficient": {"value": 110, "unit": "kHz"},
            "characteristic_current": {"value": 2, "unit": "uA"},
            "resonant_frequency": {"value": 7.45, "unit": "GHz"},
        },
    }


@pytest.fixture(name="nkpa_prototype_device_spec", scope="function")
def fixture_nkpa_prototype_device_spec() -> DeviceSpec:
    """
    DeviceSpec of the prototype, in SI
    """
    return DeviceSpec(
        film=FilmProperties(
            sheet_inductance=179e-12,
            thickness=4e-9,
            dead_width_per_side=5e-9,
            critical_current_density=2e-6 / (13e-9 * 4e-9),
        ),
        geometry=NanobridgeGeometry(width=23e-9, length=140e-9),
        circuit=LumpedCircuit(
            shunt_capacitance=134.3e-15,
            parasitic_inductance=1.47e-9,
            external_coupling_rate=TWO_PI * 57.0375e6,
            intrinsic_loss_rate=TWO_PI * 1.8625e6,
        ),
        name="nkpa-prototype",
        participation_ratio=PROTOTYPE_PARTICIPATION_RATIO,
        reference=ReferenceValues(
            kerr_coefficient=PROTOTYPE_QUOTED_KERR,
            characteristic_current=PROTOTYPE_CHARACTERISTIC_CURRENT,
            resonant_frequency=PROTOTYPE_RESONANT_FREQUENCY,
        ),
    )


@pytest.fixture(name="nkpa_prototype_circuit", scope="function")
def fixture_nkpa_prototype_circuit(nkpa_prototype_device_spec: DeviceSpec) -> DerivedCircuit:
    """
    Derived circuit of the prototype with the geometric participation ratio
    """
    return derive_circuit(nkpa_prototype_device_spec)


@pytest.fixture(name="nkpa_lossless_circuit", scope="function")
def fixture_nkpa_lossless_circuit(nkpa_prototype_circuit: DerivedCircuit) -> DerivedCircuit:
    """
    Prototype with all of κ_tot moved to the port
    """
    return dataclasses.replace(
        nkpa_prototype_circuit,
        external_coupling_rate=PROTOTYPE_TOTAL_DECAY_RATE,
        intrinsic_loss_rate=0.0,
    )


@pytest.fixture(name="nkpa_device_file", scope="function")
def fixture_nkpa_device_file(tmp_path: Any) -> str:
    """
    Prototype device document written to a temp dir
    """
    path: str = str(tmp_path / "device.json")
    if os.path.exists(DEVICE_DOCUMENT):
        shutil.copyfile(DEVICE_DOCUMENT, path)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(prototype_device_document(), handle)
    return path


@pytest.fixture(name="nkpa_rng", scope="function")
def fixture_nkpa_rng() -> np.random.Generator:
    """
    Fixed-seed generator
    """
    return np.random.default_rng(20240611)
