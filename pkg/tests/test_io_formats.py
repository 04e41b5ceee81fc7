"""
Unit tests for device documents, trace files and result documents
"""

import copy
import json
import math
from typing import Any, Dict, Mapping

import numpy as np
import pytest

from nanobridge_kpa import io_formats
from nanobridge_kpa.calibration import (
    CalibrationRecord,
    FieldPoint,
    FieldSweep,
    NoiseFit,
    NoiseTrace,
    ParameterEstimate,
    ReflectionFit,
    ReflectionTrace,
)
from nanobridge_kpa.circuit import DeviceSpec
from nanobridge_kpa.dynamics import DriveConfig
from nanobridge_kpa.errors import TraceFormatError, ValidationError
from nanobridge_kpa.testing import (
    PROTOTYPE_PUMP_DETUNING,
    PROTOTYPE_RESONANT_FREQUENCY,
    prototype_device_document,
)
from nanobridge_kpa.units import TWO_PI

SIGNAL: float = PROTOTYPE_RESONANT_FREQUENCY + TWO_PI * 1e6
PUMP1: float = PROTOTYPE_RESONANT_FREQUENCY + PROTOTYPE_PUMP_DETUNING
PUMP2: float = PROTOTYPE_RESONANT_FREQUENCY - PROTOTYPE_PUMP_DETUNING


def _write(path: Any, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


def _write_json(path: Any, document: Any) -> str:
    return _write(path, json.dumps(document))


def _sample_record() -> CalibrationRecord:
    return CalibrationRecord(
        reflection=ReflectionFit(
            resonant_frequency=ParameterEstimate(TWO_PI * 7.45e9, 1e3),
            external_coupling_rate=ParameterEstimate(TWO_PI * 57e6, 2e4),
            intrinsic_loss_rate=ParameterEstimate(TWO_PI * 1.9e6, 3e4),
            residual_rms=0.007,
            evaluations=12,
        ),
        noise=NoiseFit(
            system_gain=ParameterEstimate(1e3, 4.0),
            added_noise=ParameterEstimate(0.59, 0.01),
            residual_rms=2.5,
            signal_frequency=SIGNAL,
            idler_frequency=SIGNAL,
        ),
        nkpa_added_noise=ParameterEstimate(0.4777, 0.01),
        nkpa_band=(0.440, 0.5155),
        field_sweep=(
            FieldPoint(0.0, ParameterEstimate(0.59, 0.01)),
            FieldPoint(0.427, ParameterEstimate(0.68, 0.02)),
        ),
        diagnostics={"span_linewidths": 6.0},
    )


def test_device_document(
    nkpa_device_file: str, nkpa_prototype_device_spec: DeviceSpec
) -> None:
    """
    The shipped prototype document parses to the prototype spec in SI
    """
    spec: DeviceSpec = io_formats.read_device_spec(nkpa_device_file)
    assert spec.name == nkpa_prototype_device_spec.name
    assert spec.participation_ratio == pytest.approx(0.584)
    for section in ("film", "geometry", "circuit", "reference"):
        parsed: Any = getattr(spec, section)
        expected: Any = getattr(nkpa_prototype_device_spec, section)
        for name in parsed.__dataclass_fields__:
            assert getattr(parsed, name) == pytest.approx(
                getattr(expected, name), rel=1e-12
            ), f"{section}.{name}"


def test_device_units_are_interchangeable() -> None:
    """
    Value/unit objects and bare SI numbers give the same spec
    """
    document: Dict[str, Any] = prototype_device_document()
    bare: Dict[str, Any] = copy.deepcopy(document)
    bare["film"]["thickness"] = 4e-9
    bare["geometry"]["length"] = {"value": 0.14, "unit": "um"}
    bare["circuit"]["shunt_capacitance"] = {"value": 0.1343, "unit": "pF"}
    bare["circuit"]["external_coupling_rate"] = {
        "value": TWO_PI * 57.0375e6,
        "unit": "rad/s",
    }
    first: DeviceSpec = io_formats.parse_device_spec(document)
    second: DeviceSpec = io_formats.parse_device_spec(bare)
    assert second.film.thickness == pytest.approx(first.film.thickness)
    assert second.geometry.length == pytest.approx(first.geometry.length)
    assert second.circuit.shunt_capacitance == pytest.approx(
        first.circuit.shunt_capacitance
    )
    assert second.circuit.external_coupling_rate == pytest.approx(
        first.circuit.external_coupling_rate
    )


def test_device_missing_field(tmp_path: Any) -> None:
    """
    A missing quantity is reported by its field path along with the file
    """
    document: Dict[str, Any] = prototype_device_document()
    del document["film"]["thickness"]
    path: str = _write_json(tmp_path / "device.json", document)
    with pytest.raises(TraceFormatError, match="missing field `film.thickness`") as err:
        io_formats.read_device_spec(path)
    assert err.value.path == path


@pytest.mark.parametrize(
    "section, name, value, match",
    [
        ("film", "thickness", {"value": 4, "unit": "GHz"}, "film.thickness"),
        ("film", "thickness", {"value": 4, "unit": "parsecs"}, "Unknown unit"),
        ("geometry", "width", "wide", "geometry.width"),
        ("geometry", "width", True, "geometry.width"),
    ],
    ids=["wrong-dimension", "unknown-unit", "string", "bool"],
)
def test_device_bad_quantity(section: str, name: str, value: Any, match: str) -> None:
    """
    Quantities must be numbers or value/unit objects of the right dimension
    """
    document: Dict[str, Any] = prototype_device_document()
    document[section][name] = value
    with pytest.raises(ValidationError, match=match):
        io_formats.parse_device_spec(document)


def test_device_invalid_json(tmp_path: Any) -> None:
    """
    JSON syntax errors carry the line number
    """
    path: str = _write(tmp_path / "device.json", '{\n  "film": {\n  oops\n}\n')
    with pytest.raises(TraceFormatError) as err:
        io_formats.read_device_spec(path)
    assert err.value.line == 3


@pytest.mark.parametrize(
    "option, rows",
    [
        ("# Hz S RI R 50", ["7.45e9 0.6 0.0", "7.46e9 0.0 0.6"]),
        ("# GHz S MA R 50", ["7.45 0.6 0", "7.46 0.6 90"]),
        ("# MHz S DB R 50", ["7450 -4.436974992327127 0", "7460 -4.436974992327127 90"]),
        ("", ["7.45 0.6 0", "7.46 0.6 90"]),
    ],
    ids=["ri-hz", "ma-ghz", "db-mhz", "default-ghz-ma"],
)
def test_touchstone_formats(tmp_path: Any, option: str, rows: list) -> None:
    """
    RI, MA and DB rows in any frequency unit read to the same trace
    """
    text: str = "! one-port\n" + (option + "\n" if option else "") + "\n".join(rows) + "\n"
    trace: ReflectionTrace = io_formats.read_touchstone_1port(
        _write(tmp_path / "trace.s1p", text)
    )
    np.testing.assert_allclose(trace.frequencies, [7.45e9, 7.46e9])
    np.testing.assert_allclose(trace.s11, [0.6, 0.6j], atol=1e-12)


@pytest.mark.parametrize(
    "text, line, match",
    [
        ("# GHz S MA R 50\n7.46 1 0\n7.45 1 0\n", 3, "strictly increasing"),
        ("# GHz S MA R 50\n7.45 1 0\n# Hz S RI R 50\n", 3, "option line"),
        ("# GHz S MA R 50\n7.45 1\n", 2, "3 columns"),
        ("# GHz S MA R 50\n7.45 one 0\n", 2, "non-numeric"),
        ("# GHz Y MA R 50\n7.45 1 0\n", 1, "unsupported option"),
    ],
    ids=["non-monotone", "late-option", "short-row", "non-numeric", "bad-option"],
)
def test_touchstone_errors(tmp_path: Any, text: str, line: int, match: str) -> None:
    """
    Malformed files name the offending line
    """
    path: str = _write(tmp_path / "trace.s1p", text)
    with pytest.raises(TraceFormatError, match=match) as err:
        io_formats.read_touchstone_1port(path)
    assert err.value.line == line
    assert f"{path}:{line}:" in str(err.value)


@pytest.mark.parametrize(
    "name, content, reader",
    [
        ("device.json", b'{\n"name": "\xff"}\n', io_formats.read_device_spec),
        ("trace.s1p", b"# Hz S RI R 50\n7.4e9 0.1 \xff\xfe\n", io_formats.read_touchstone_1port),
        ("trace.csv", b"freq_Hz,re,im\n7.4e9,0.1,\xff\xfe\n", io_formats.read_reflection_csv),
        ("drive.json", b'{"pump1_power": \n\xff}', io_formats.read_drive_config),
    ],
    ids=["device", "touchstone", "csv", "drive"],
)
def test_undecodable_bytes(
    tmp_path: Any, name: str, content: bytes, reader: Any
) -> None:
    """
    Bytes that are not UTF-8 are a format error on the line they appear
    """
    path: Any = tmp_path / name
    path.write_bytes(content)
    with pytest.raises(TraceFormatError, match="not UTF-8") as err:
        reader(str(path))
    assert err.value.line == 2
    assert err.value.path == str(path)


def test_touchstone_writer(tmp_path: Any) -> None:
    """
    Written files are Hz/RI and read back exactly
    """
    trace: ReflectionTrace = ReflectionTrace(
        frequencies=np.array([7.4e9, 7.45e9, 7.5e9]),
        s11=np.array([0.9 + 0.1j, -0.3 + 0.0j, 0.9 - 0.1j]),
    )
    path: str = str(tmp_path / "trace.s1p")
    io_formats.write_touchstone_1port(trace, path)
    with open(path, "r", encoding="utf-8") as handle:
        assert "# Hz S RI R 50" in handle.read()
    back: ReflectionTrace = io_formats.read_touchstone_1port(path)
    np.testing.assert_array_equal(back.frequencies, trace.frequencies)
    np.testing.assert_array_equal(back.s11, trace.s11)


def test_reflection_csv(tmp_path: Any) -> None:
    """
    CSV traces keep every bit of the samples and accept a sigma column
    """
    trace: ReflectionTrace = ReflectionTrace(
        frequencies=np.array([1.0e9, 1.1e9]),
        s11=np.array([0.1 / 3.0 + 0.2j, -1.0 / 7.0 + 0.0j]),
    )
    path: str = str(tmp_path / "trace.csv")
    io_formats.write_reflection_csv(trace, path)
    back: ReflectionTrace = io_formats.read_reflection_csv(path)
    np.testing.assert_array_equal(back.s11, trace.s11)

    with_sigma: str = _write(
        tmp_path / "sigma.csv", "freq_Hz,re,im,sigma\n1e9,0.1,0.2,0.01\n2e9,0.3,0.4,0.02\n"
    )
    assert io_formats.read_reflection_csv(with_sigma).sigma is not None

    missing: str = _write(tmp_path / "missing.csv", "freq_Hz,re\n1e9,0.1\n")
    with pytest.raises(TraceFormatError, match="missing column"):
        io_formats.read_reflection_csv(missing)


def test_noise_header_idler(tmp_path: Any) -> None:
    """
    The idler follows from the drive when it is not given, and must agree
    with it when it is
    """
    csv_path: str = _write(
        tmp_path / "noise.csv", "T_K,psd_quanta\n0.05,600\n0.3,800\n0.6,1100\n"
    )
    header: Dict[str, Any] = {
        "bandwidth": {"value": 1, "unit": "MHz"},
        "signal_frequency": {"value": SIGNAL, "unit": "rad/s"},
        "drive": {
            "pump1_frequency": {"value": PUMP1, "unit": "rad/s"},
            "pump2_frequency": {"value": PUMP2, "unit": "rad/s"},
        },
    }
    trace: NoiseTrace = io_formats.read_noise_trace(
        csv_path, _write_json(tmp_path / "header.json", header)
    )
    assert trace.bandwidth == 1e6
    assert trace.idler_frequency == pytest.approx(PUMP1 + PUMP2 - SIGNAL, rel=1e-12)

    header["idler_frequency"] = {"value": SIGNAL, "unit": "rad/s"}
    bad: str = _write_json(tmp_path / "bad.json", header)
    with pytest.raises(TraceFormatError, match="idler_frequency") as err:
        io_formats.read_noise_trace(csv_path, bad)
    assert err.value.path == bad

    del header["drive"]
    del header["idler_frequency"]
    plain: NoiseTrace = io_formats.read_noise_trace(
        csv_path, _write_json(tmp_path / "plain.json", header)
    )
    assert plain.idler_frequency == plain.signal_frequency


def test_noise_header_needs_bandwidth(tmp_path: Any) -> None:
    """
    bandwidth is required
    """
    csv_path: str = _write(tmp_path / "noise.csv", "T_K,psd_quanta\n0.05,600\n0.6,1100\n")
    header: str = _write_json(
        tmp_path / "header.json", {"signal_frequency": {"value": 7.45, "unit": "GHz"}}
    )
    with pytest.raises(TraceFormatError, match="missing field `bandwidth`"):
        io_formats.read_noise_trace(csv_path, header)


def test_field_sweep_files(tmp_path: Any) -> None:
    """
    Field sweeps round-trip and require the base temperature
    """
    sweep: FieldSweep = FieldSweep(
        fields=np.array([0.0, 0.2, 0.4]),
        psd=np.array([700.0, 720.0, 760.0]),
        base_temperature=0.058,
        signal_frequency=SIGNAL,
        idler_frequency=SIGNAL,
    )
    csv_path: str = str(tmp_path / "field.csv")
    header_path: str = str(tmp_path / "field.json")
    io_formats.write_field_sweep(sweep, csv_path, header_path, bandwidth=1e6)
    back: FieldSweep = io_formats.read_field_sweep(csv_path, header_path)
    np.testing.assert_array_equal(back.fields, sweep.fields)
    assert back.base_temperature == pytest.approx(0.058)

    with open(header_path, "r", encoding="utf-8") as handle:
        header: Dict[str, Any] = json.load(handle)
    del header["base_temperature"]
    stripped: str = _write_json(tmp_path / "stripped.json", header)
    with pytest.raises(TraceFormatError, match="base_temperature"):
        io_formats.read_field_sweep(csv_path, stripped)


def test_drive_document(tmp_path: Any) -> None:
    """
    Drive documents accept human units and default the phases to zero
    """
    path: str = _write_json(
        tmp_path / "drive.json",
        {
            "pump1_frequency": {"value": 7.5835, "unit": "GHz"},
            "pump2_frequency": {"value": 7.3165, "unit": "GHz"},
            "pump1_power": {"value": -90, "unit": "dBm"},
            "pump2_power": {"value": 1e-12, "unit": "W"},
        },
    )
    drive: DriveConfig = io_formats.read_drive_config(path)
    assert drive.pump1_frequency == pytest.approx(TWO_PI * 7.5835e9)
    assert drive.pump1_power == pytest.approx(1e-12)
    assert drive.pump2_phase == 0.0

    written: str = str(tmp_path / "written.json")
    io_formats.write_drive_config(drive, written)
    assert io_formats.read_drive_config(written) == drive

    negative: str = _write_json(
        tmp_path / "negative.json",
        {**io_formats.drive_to_dict(drive), "pump1_power": -1.0},
    )
    with pytest.raises(TraceFormatError, match="pump1_power"):
        io_formats.read_drive_config(negative)


def test_results_are_deterministic(tmp_path: Any) -> None:
    """
    The same record and inputs give byte-identical documents
    """
    source: str = _write(tmp_path / "input.csv", "freq_Hz,re,im\n1e9,0.1,0.2\n")
    record: Mapping[str, Any] = io_formats.calibration_to_dict(_sample_record())
    first: str = str(tmp_path / "first.json")
    second: str = str(tmp_path / "second.json")
    io_formats.write_results(record, first, [source])
    io_formats.write_results(record, second, [source])
    with open(first, "rb") as one, open(second, "rb") as two:
        assert one.read() == two.read()

    document: Dict[str, Any] = io_formats.read_results(first)
    assert document["schema_version"] == io_formats.SCHEMA_VERSION
    assert document["inputs"][source].startswith("SHA256/")
    assert io_formats.verify_checksums(document) == []

    _write(tmp_path / "input.csv", "freq_Hz,re,im\n1e9,0.1,0.3\n")
    assert io_formats.verify_checksums(document) == [source]


def test_results_non_finite(tmp_path: Any) -> None:
    """
    Non-finite floats are written as strings so the document stays valid JSON
    """
    path: str = str(tmp_path / "results.json")
    io_formats.write_results(
        {"quality": math.inf, "ratio": float("nan"), "gain": -math.inf}, path
    )
    results: Dict[str, Any] = io_formats.read_results(path)["results"]
    assert results == {"quality": "inf", "ratio": "nan", "gain": "-inf"}


def test_results_schema_version(tmp_path: Any) -> None:
    """
    Documents of another schema version are refused
    """
    path: str = _write_json(tmp_path / "old.json", {"schema_version": 0, "results": {}})
    with pytest.raises(TraceFormatError, match="schema_version"):
        io_formats.read_results(path)


def test_fingerprint_format(tmp_path: Any) -> None:
    """
    SHA256 of the bytes, colon-separated uppercase hex
    """
    digest: str = io_formats.fingerprint(_write(tmp_path / "empty", ""))
    assert digest == "SHA256/" + ":".join(
        [
            "E3", "B0", "C4", "42", "98", "FC", "1C", "14",
            "9A", "FB", "F4", "C8", "99", "6F", "B9", "24",
            "27", "AE", "41", "E4", "64", "9B", "93", "4C",
            "A4", "95", "99", "1B", "78", "52", "B8", "55",
        ]
    )  # fmt: skip


def test_calibration_record_round_trip() -> None:
    """
    A calibration record survives its dict form, derived values included
    """
    record: CalibrationRecord = _sample_record()
    document: Dict[str, Any] = io_formats.calibration_to_dict(record)
    assert document["reflection"]["derived"]["internal_quality"] == pytest.approx(
        7.45e9 / 1.9e6
    )
    back: CalibrationRecord = io_formats.calibration_from_dict(
        json.loads(json.dumps(document))
    )
    assert back == record

    with pytest.raises(ValidationError, match="malformed calibration record"):
        io_formats.calibration_from_dict({"noise": {"system_gain": 3}})
