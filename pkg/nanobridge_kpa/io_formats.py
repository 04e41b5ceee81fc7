"""
Readers and writers for device documents, traces and result files

Every reader either returns a complete object or raises TraceFormatError /
ValidationError naming the file, and the line or field path where possible.
OSError from the filesystem is left untouched.
"""

import csv
import io
import json
import logging
import math
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from cryptography.hazmat.primitives import hashes

from .calibration import (
    CalibrationRecord,
    FieldPoint,
    FieldSweep,
    NoiseFit,
    NoiseTrace,
    ParameterEstimate,
    ReflectionFit,
    ReflectionTrace,
    idler_frequency,
)
from .circuit import (
    DerivedCircuit,
    DeviceSpec,
    FilmProperties,
    LumpedCircuit,
    NanobridgeGeometry,
    ReferenceValues,
)
from .dynamics import DriveConfig, GainSpectrum, PhaseSweep
from .errors import InconsistentSpecError, TraceFormatError, ValidationError
from .meta import __title__, __version__
from .units import TWO_PI, to_si

SCHEMA_VERSION: int = 1
FINGERPRINT_ALGO: str = "SHA256"
CSV_FLOAT_FORMAT: str = "%.17g"
IDLER_RTOL: float = 1e-9

# section -> field -> dimension
DEVICE_SCHEMA: Dict[str, Dict[str, str]] = {
    "film": {
        "sheet_inductance": "sheet_inductance",
        "thickness": "length",
        "dead_width_per_side": "length",
        "critical_current_density": "current_density",
    },
    "geometry": {"width": "length", "length": "length"},
    "circuit": {
        "shunt_capacitance": "capacitance",
        "parasitic_inductance": "inductance",
        "external_coupling_rate": "angular_frequency",
        "intrinsic_loss_rate": "angular_frequency",
    },
}
REFERENCE_SCHEMA: Dict[str, str] = {
    "kerr_coefficient": "angular_frequency",
    "characteristic_current": "current",
    "resonant_frequency": "angular_frequency",
}
DRIVE_SCHEMA: Dict[str, str] = {
    "pump1_frequency": "angular_frequency",
    "pump2_frequency": "angular_frequency",
    "pump1_power": "power",
    "pump2_power": "power",
    "pump1_phase": "angle",
    "pump2_phase": "angle",
}
NOISE_HEADER_SCHEMA: Dict[str, str] = {
    "bandwidth": "frequency",
    "signal_frequency": "angular_frequency",
    "idler_frequency": "angular_frequency",
    "base_temperature": "temperature",
}
TOUCHSTONE_FREQUENCY_UNITS: Dict[str, float] = {
    "HZ": 1.0,
    "KHZ": 1e3,
    "MHZ": 1e6,
    "GHZ": 1e9,
}
TOUCHSTONE_FORMATS: Tuple[str, ...] = ("RI", "MA", "DB")


def _read_text(path: str) -> str:
    """
    Whole file decoded as UTF-8; undecodable bytes are a format error
    """
    with open(path, "rb") as handle:
        data: bytes = handle.read()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as err:
        raise TraceFormatError(
            f"not UTF-8 text ({err.reason})",
            path=path,
            line=data.count(b"\n", 0, err.start) + 1,
        ) from err


def _load_json(path: str) -> Any:
    text: str = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise TraceFormatError(f"invalid JSON: {err.msg}", path=path, line=err.lineno) from err


def _quantity(document: Mapping[str, Any], key: str, dimension: str, where: str) -> float:
    """
    `{"value": v, "unit": u}` or a bare number in SI
    """
    if key not in document:
        raise ValidationError(f"missing field `{where}`")
    raw: Any = document[key]
    if isinstance(raw, bool):
        raise ValidationError(f"`{where}` must be a number")
    if isinstance(raw, (int, float)):
        return float(raw)
    if not isinstance(raw, Mapping) or "value" not in raw or "unit" not in raw:
        raise ValidationError(f"`{where}` must be a number or a value/unit object")
    value: Any = raw["value"]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"`{where}.value` must be a number")
    try:
        return to_si(float(value), str(raw["unit"]), dimension)
    except ValidationError as err:
        raise ValidationError(f"`{where}`: {err}") from err


def _section(document: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    if key not in document:
        raise ValidationError(f"missing field `{key}`")
    section: Any = document[key]
    if not isinstance(section, Mapping):
        raise ValidationError(f"`{key}` must be an object")
    return section


def parse_device_spec(document: Mapping[str, Any]) -> DeviceSpec:
    """
    DeviceSpec from an already-loaded device document
    """
    if not isinstance(document, Mapping):
        raise ValidationError("device document must be a JSON object")
    values: Dict[str, Dict[str, float]] = {}
    for section_name, fields in DEVICE_SCHEMA.items():
        section: Mapping[str, Any] = _section(document, section_name)
        values[section_name] = {
            name: _quantity(section, name, dimension, f"{section_name}.{name}")
            for name, dimension in fields.items()
        }
    reference: Dict[str, float] = {}
    if "reference" in document:
        reference_doc: Mapping[str, Any] = _section(document, "reference")
        for name, dimension in REFERENCE_SCHEMA.items():
            if name in reference_doc:
                reference[name] = _quantity(
                    reference_doc, name, dimension, f"reference.{name}"
                )
    alpha: Optional[float] = None
    if document.get("participation_ratio") is not None:
        alpha = _quantity(
            document, "participation_ratio", "dimensionless", "participation_ratio"
        )
    return DeviceSpec(
        film=FilmProperties(**values["film"]),
        geometry=NanobridgeGeometry(**values["geometry"]),
        circuit=LumpedCircuit(**values["circuit"]),
        name=str(document.get("name", "device")),
        participation_ratio=alpha,
        reference=ReferenceValues(**reference),
    )


def read_device_spec(path: str) -> DeviceSpec:
    """
    Load a device document
    """
    logging.debug("Reading device spec `%s`", path)
    try:
        return parse_device_spec(_load_json(path))
    except TraceFormatError:
        raise
    except ValidationError as err:
        raise TraceFormatError(str(err), path=path) from err


def _parse_option_line(tokens: List[str], path: str, line: int) -> Tuple[float, str]:
    scale: float = TOUCHSTONE_FREQUENCY_UNITS["GHZ"]
    fmt: str = "MA"
    index: int = 0
    while index < len(tokens):
        token: str = tokens[index].upper()
        if token in TOUCHSTONE_FREQUENCY_UNITS:
            scale = TOUCHSTONE_FREQUENCY_UNITS[token]
        elif token in TOUCHSTONE_FORMATS:
            fmt = token
        elif token == "S":
            pass
        elif token == "R":
            index += 1
            if index >= len(tokens):
                raise TraceFormatError("option line has `R` without a value", path=path, line=line)
        else:
            raise TraceFormatError(
                f"unsupported option `{tokens[index]}`", path=path, line=line
            )
        index += 1
    return scale, fmt


def _touchstone_value(fmt: str, first: float, second: float) -> complex:
    if fmt == "RI":
        return complex(first, second)
    magnitude: float = first if fmt == "MA" else 10.0 ** (first / 20.0)
    return complex(magnitude * np.exp(1j * math.radians(second)))


def read_touchstone_1port(path: str) -> ReflectionTrace:
    """
    One-port Touchstone v1 file (RI, MA or DB) as a ReflectionTrace in Hz
    """
    scale: float = TOUCHSTONE_FREQUENCY_UNITS["GHZ"]
    fmt: str = "MA"
    seen_option: bool = False
    frequencies: List[float] = []
    samples: List[complex] = []
    with io.StringIO(_read_text(path)) as handle:
        for number, raw in enumerate(handle, start=1):
            text: str = raw.split("!", 1)[0].strip()
            if not text:
                continue
            if text.startswith("#"):
                if seen_option or frequencies:
                    raise TraceFormatError(
                        "option line must appear once, before the data",
                        path=path,
                        line=number,
                    )
                scale, fmt = _parse_option_line(text[1:].split(), path, number)
                seen_option = True
                continue
            fields: List[str] = text.split()
            if len(fields) != 3:
                raise TraceFormatError(
                    f"expected 3 columns for a one-port row, got {len(fields)}",
                    path=path,
                    line=number,
                )
            try:
                freq, first, second = (float(field) for field in fields)
            except ValueError as err:
                raise TraceFormatError(
                    f"non-numeric value in `{text}`", path=path, line=number
                ) from err
            if not all(math.isfinite(v) for v in (freq, first, second)):
                raise TraceFormatError("non-finite value", path=path, line=number)
            freq *= scale
            if frequencies and freq <= frequencies[-1]:
                raise TraceFormatError(
                    "frequencies must be strictly increasing", path=path, line=number
                )
            frequencies.append(freq)
            samples.append(_touchstone_value(fmt, first, second))
    if not frequencies:
        raise TraceFormatError("no data rows", path=path)
    logging.debug("Read %d Touchstone rows from `%s`", len(frequencies), path)
    return ReflectionTrace(frequencies=np.array(frequencies), s11=np.array(samples))


def write_touchstone_1port(trace: ReflectionTrace, path: str) -> None:
    """
    RI-format one-port Touchstone file, Hz axis
    """
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"! {__title__} {__version__}\n")
        handle.write("# Hz S RI R 50\n")
        for freq, value in zip(trace.frequencies, trace.s11):
            handle.write(
                f"{float(freq)!r} {float(value.real)!r} {float(value.imag)!r}\n"
            )


def _read_csv_columns(
    path: str, columns: Sequence[str], optional: Sequence[str] = ()
) -> Dict[str, np.ndarray]:
    """
    Named float columns of a header-led CSV file
    """
    values: Dict[str, List[float]] = {}
    with io.StringIO(_read_text(path), newline="") as handle:
        reader = csv.reader(handle)
        header: Optional[List[str]] = next(reader, None)
        if header is None:
            raise TraceFormatError("empty file", path=path)
        names: List[str] = [name.strip() for name in header]
        missing: List[str] = [name for name in columns if name not in names]
        if missing:
            raise TraceFormatError(
                f"missing column(s) {', '.join(missing)}", path=path, line=1
            )
        wanted: List[str] = list(columns) + [name for name in optional if name in names]
        positions: Dict[str, int] = {name: names.index(name) for name in wanted}
        values = {name: [] for name in wanted}
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(names):
                raise TraceFormatError(
                    f"expected {len(names)} fields, got {len(row)}",
                    path=path,
                    line=reader.line_num,
                )
            for name, position in positions.items():
                try:
                    number: float = float(row[position])
                except ValueError as err:
                    raise TraceFormatError(
                        f"non-numeric {name} `{row[position]}`",
                        path=path,
                        line=reader.line_num,
                    ) from err
                if not math.isfinite(number):
                    raise TraceFormatError(
                        f"non-finite {name}", path=path, line=reader.line_num
                    )
                values[name].append(number)
    if not values[columns[0]]:
        raise TraceFormatError("no data rows", path=path)
    return {name: np.array(column) for name, column in values.items()}


def _wrap_validation(path: str, build: Any) -> Any:
    try:
        return build()
    except TraceFormatError:
        raise
    except ValidationError as err:
        raise TraceFormatError(str(err), path=path) from err


def read_reflection_csv(path: str) -> ReflectionTrace:
    """
    CSV with columns freq_Hz, re, im and an optional sigma column
    """
    columns: Dict[str, np.ndarray] = _read_csv_columns(
        path, ("freq_Hz", "re", "im"), optional=("sigma",)
    )
    return _wrap_validation(
        path,
        lambda: ReflectionTrace(
            frequencies=columns["freq_Hz"],
            s11=columns["re"] + 1j * columns["im"],
            sigma=columns.get("sigma"),
        ),
    )


def _write_csv(path: str, header: Sequence[str], data: np.ndarray) -> None:
    np.savetxt(
        path,
        data,
        fmt=CSV_FLOAT_FORMAT,
        delimiter=",",
        header=",".join(header),
        comments="",
        encoding="utf-8",
    )


def write_reflection_csv(trace: ReflectionTrace, path: str) -> None:
    """inverse of `read_reflection_csv`"""
    _write_csv(
        path,
        ("freq_Hz", "re", "im"),
        np.column_stack([trace.frequencies, trace.s11.real, trace.s11.imag]),
    )


def _read_noise_header(path: str) -> Dict[str, float]:
    document: Any = _load_json(path)
    if not isinstance(document, Mapping):
        raise TraceFormatError("noise header must be a JSON object", path=path)
    header: Dict[str, float] = {}
    try:
        for name, dimension in NOISE_HEADER_SCHEMA.items():
            if name in document:
                header[name] = _quantity(document, name, dimension, name)
        if "drive" in document:
            drive: Mapping[str, Any] = _section(document, "drive")
            pumps: Tuple[float, float] = (
                _quantity(drive, "pump1_frequency", "angular_frequency", "drive.pump1_frequency"),
                _quantity(drive, "pump2_frequency", "angular_frequency", "drive.pump2_frequency"),
            )
            if "signal_frequency" not in header:
                raise ValidationError("missing field `signal_frequency`")
            expected: float = idler_frequency(*pumps, header["signal_frequency"])
            if "idler_frequency" not in header:
                header["idler_frequency"] = expected
            elif not math.isclose(header["idler_frequency"], expected, rel_tol=IDLER_RTOL):
                raise InconsistentSpecError(
                    "idler_frequency does not equal pump1 + pump2 − signal"
                )
        for name in ("bandwidth", "signal_frequency"):
            if name not in header:
                raise ValidationError(f"missing field `{name}`")
        header.setdefault("idler_frequency", header["signal_frequency"])
    except TraceFormatError:
        raise
    except ValidationError as err:
        raise TraceFormatError(str(err), path=path) from err
    return header


def read_noise_trace(csv_path: str, header_path: str) -> NoiseTrace:
    """
    CSV with columns T_K, psd_quanta (optional sigma) plus a JSON header
    holding bandwidth, signal frequency and either the idler frequency or the
    pump frequencies it follows from
    """
    header: Dict[str, float] = _read_noise_header(header_path)
    columns: Dict[str, np.ndarray] = _read_csv_columns(
        csv_path, ("T_K", "psd_quanta"), optional=("sigma",)
    )
    return _wrap_validation(
        csv_path,
        lambda: NoiseTrace(
            temperatures=columns["T_K"],
            psd=columns["psd_quanta"],
            bandwidth=header["bandwidth"],
            signal_frequency=header["signal_frequency"],
            idler_frequency=header["idler_frequency"],
            sigma=columns.get("sigma"),
        ),
    )


def _noise_header_document(
    bandwidth: float,
    signal: float,
    idler: float,
    base_temperature: Optional[float] = None,
) -> Dict[str, Any]:
    document: Dict[str, Any] = {
        "bandwidth": {"value": bandwidth, "unit": "Hz"},
        "signal_frequency": {"value": signal, "unit": "rad/s"},
        "idler_frequency": {"value": idler, "unit": "rad/s"},
    }
    if base_temperature is not None:
        document["base_temperature"] = {"value": base_temperature, "unit": "K"}
    return document


def write_noise_trace(trace: NoiseTrace, csv_path: str, header_path: str) -> None:
    """inverse of `read_noise_trace`"""
    _write_csv(
        csv_path, ("T_K", "psd_quanta"), np.column_stack([trace.temperatures, trace.psd])
    )
    _write_json(
        header_path,
        _noise_header_document(
            trace.bandwidth, trace.signal_frequency, trace.idler_frequency
        ),
    )


def read_field_sweep(csv_path: str, header_path: str) -> FieldSweep:
    """
    CSV with columns B_T, psd_quanta plus a JSON header like the noise
    trace's, which must also carry base_temperature
    """
    header: Dict[str, float] = _read_noise_header(header_path)
    if "base_temperature" not in header:
        raise TraceFormatError("missing field `base_temperature`", path=header_path)
    columns: Dict[str, np.ndarray] = _read_csv_columns(csv_path, ("B_T", "psd_quanta"))
    return _wrap_validation(
        csv_path,
        lambda: FieldSweep(
            fields=columns["B_T"],
            psd=columns["psd_quanta"],
            base_temperature=header["base_temperature"],
            signal_frequency=header["signal_frequency"],
            idler_frequency=header["idler_frequency"],
        ),
    )


def write_field_sweep(
    sweep: FieldSweep, csv_path: str, header_path: str, bandwidth: float
) -> None:
    """inverse of `read_field_sweep`"""
    _write_csv(csv_path, ("B_T", "psd_quanta"), np.column_stack([sweep.fields, sweep.psd]))
    _write_json(
        header_path,
        _noise_header_document(
            bandwidth,
            sweep.signal_frequency,
            sweep.idler_frequency,
            sweep.base_temperature,
        ),
    )


def read_drive_config(path: str) -> DriveConfig:
    """
    Drive document: pump frequencies, powers and optional phases with units
    """
    document: Any = _load_json(path)

    def build() -> DriveConfig:
        if not isinstance(document, Mapping):
            raise ValidationError("drive document must be a JSON object")
        values: Dict[str, float] = {}
        for name, dimension in DRIVE_SCHEMA.items():
            if name.endswith("phase") and name not in document:
                continue
            values[name] = _quantity(document, name, dimension, name)
        return DriveConfig(**values)

    return _wrap_validation(path, build)


def drive_to_dict(drive: DriveConfig) -> Dict[str, Any]:
    """SI value/unit document for a drive"""
    units: Dict[str, str] = {
        "angular_frequency": "rad/s",
        "power": "W",
        "angle": "rad",
    }
    return {
        name: {"value": getattr(drive, name), "unit": units[dimension]}
        for name, dimension in DRIVE_SCHEMA.items()
    }


def write_drive_config(drive: DriveConfig, path: str) -> None:
    """inverse of `read_drive_config`"""
    _write_json(path, drive_to_dict(drive))


def write_spectrum_csv(spectrum: GainSpectrum, path: str) -> None:
    """
    Gain spectrum with absolute frequency in Hz
    """
    _write_csv(
        path,
        (
            "freq_Hz",
            "gain_dB",
            "signal_re",
            "signal_im",
            "idler_re",
            "idler_im",
        ),
        np.column_stack(
            [
                spectrum.frequencies / TWO_PI,
                spectrum.power_gain_db,
                spectrum.signal_scattering.real,
                spectrum.signal_scattering.imag,
                spectrum.idler_scattering.real,
                spectrum.idler_scattering.imag,
            ]
        ),
    )


def write_phase_sweep_csv(sweep: PhaseSweep, path: str) -> None:
    """phase (rad) and gain (dB)"""
    _write_csv(path, ("phase_rad", "gain_dB"), np.column_stack([sweep.phases, sweep.gain_db]))


def fingerprint(path: str) -> str:
    """
    `SHA256/AB:CD:...` digest of a file's bytes
    """
    digest = hashes.Hash(hashes.SHA256())
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    hexed: str = digest.finalize().hex().upper()
    return f"{FINGERPRINT_ALGO}/" + ":".join(
        hexed[i : i + 2] for i in range(0, len(hexed), 2)
    )


def _canonical(value: Any) -> Any:
    """
    Plain JSON types; non-finite floats become the strings "inf", "-inf",
    "nan"
    """
    if isinstance(value, Mapping):
        return {str(key): _canonical(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_canonical(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number: float = float(value)
        if math.isfinite(number):
            return number
        return repr(number)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _canonical(value.real), "im": _canonical(value.imag)}
    return value


def _write_json(path: str, document: Any) -> None:
    text: str = json.dumps(
        _canonical(document), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False
    )
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text + "\n")


def write_results(
    record: Mapping[str, Any], path: str, inputs: Iterable[str] = ()
) -> None:
    """
    Canonical result document: sorted keys, shortest round-trip floats and
    the checksum of every input file
    """
    document: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "generator": f"{__title__} {__version__}",
        "inputs": {name: fingerprint(name) for name in sorted(set(inputs))},
        "results": record,
    }
    _write_json(path, document)
    logging.info("Wrote `%s`", path)


def read_results(path: str) -> Dict[str, Any]:
    """
    Result document written by `write_results`
    """
    document: Any = _load_json(path)
    if not isinstance(document, Mapping) or "results" not in document:
        raise TraceFormatError("not a result document", path=path)
    if document.get("schema_version") != SCHEMA_VERSION:
        raise TraceFormatError(
            f"unsupported schema_version {document.get('schema_version')!r}",
            path=path,
        )
    return dict(document)


def verify_checksums(document: Mapping[str, Any]) -> List[str]:
    """
    Input paths whose current checksum differs from the recorded one, or that
    can no longer be read
    """
    mismatched: List[str] = []
    for name, recorded in sorted(document.get("inputs", {}).items()):
        try:
            current: str = fingerprint(name)
        except OSError:
            logging.warning("Input `%s` can no longer be read", name)
            mismatched.append(name)
            continue
        if current != recorded:
            logging.warning("Input `%s` changed since the result was written", name)
            mismatched.append(name)
    return mismatched


def _float(value: Any) -> float:
    """numbers, or the strings written for non-finite values"""
    return float(value)


def _estimate_to_dict(estimate: ParameterEstimate) -> Dict[str, float]:
    return {"value": estimate.value, "stderr": estimate.stderr}


def _estimate_from_dict(document: Mapping[str, Any]) -> ParameterEstimate:
    return ParameterEstimate(_float(document["value"]), _float(document["stderr"]))


def calibration_to_dict(record: CalibrationRecord) -> Dict[str, Any]:
    """
    JSON-ready form of a calibration record; rates in rad/s
    """
    document: Dict[str, Any] = {"diagnostics": dict(record.diagnostics)}
    if record.reflection is not None:
        fit: ReflectionFit = record.reflection
        document["reflection"] = {
            "resonant_frequency": _estimate_to_dict(fit.resonant_frequency),
            "external_coupling_rate": _estimate_to_dict(fit.external_coupling_rate),
            "intrinsic_loss_rate": _estimate_to_dict(fit.intrinsic_loss_rate),
            "residual_rms": fit.residual_rms,
            "evaluations": fit.evaluations,
            "derived": {
                "total_decay_rate": fit.total_decay_rate,
                "external_quality": fit.external_quality,
                "internal_quality": fit.internal_quality,
                "loaded_quality": fit.loaded_quality,
                "extinction_db": fit.extinction_db,
            },
        }
    if record.noise is not None:
        noise: NoiseFit = record.noise
        document["noise"] = {
            "system_gain": _estimate_to_dict(noise.system_gain),
            "added_noise": _estimate_to_dict(noise.added_noise),
            "residual_rms": noise.residual_rms,
            "signal_frequency": noise.signal_frequency,
            "idler_frequency": noise.idler_frequency,
            "derived": {
                "zero_temperature_output": _estimate_to_dict(
                    noise.zero_temperature_output
                )
            },
        }
    if record.nkpa_added_noise is not None:
        document["nkpa_added_noise"] = _estimate_to_dict(record.nkpa_added_noise)
    if record.nkpa_band is not None:
        document["nkpa_band"] = list(record.nkpa_band)
    if record.field_sweep:
        document["field_sweep"] = [
            {
                "magnetic_field": point.magnetic_field,
                "added_noise": _estimate_to_dict(point.added_noise),
            }
            for point in record.field_sweep
        ]
    return document


def calibration_from_dict(document: Mapping[str, Any]) -> CalibrationRecord:
    """
    Inverse of `calibration_to_dict`; derived fields are recomputed
    """
    try:
        reflection: Optional[ReflectionFit] = None
        if "reflection" in document:
            section: Mapping[str, Any] = document["reflection"]
            reflection = ReflectionFit(
                resonant_frequency=_estimate_from_dict(section["resonant_frequency"]),
                external_coupling_rate=_estimate_from_dict(
                    section["external_coupling_rate"]
                ),
                intrinsic_loss_rate=_estimate_from_dict(section["intrinsic_loss_rate"]),
                residual_rms=_float(section["residual_rms"]),
                evaluations=int(section["evaluations"]),
            )
        noise: Optional[NoiseFit] = None
        if "noise" in document:
            section = document["noise"]
            noise = NoiseFit(
                system_gain=_estimate_from_dict(section["system_gain"]),
                added_noise=_estimate_from_dict(section["added_noise"]),
                residual_rms=_float(section["residual_rms"]),
                signal_frequency=_float(section["signal_frequency"]),
                idler_frequency=_float(section["idler_frequency"]),
            )
        band: Optional[Tuple[float, float]] = None
        if "nkpa_band" in document:
            low, high = document["nkpa_band"]
            band = (_float(low), _float(high))
        return CalibrationRecord(
            reflection=reflection,
            noise=noise,
            nkpa_added_noise=(
                _estimate_from_dict(document["nkpa_added_noise"])
                if "nkpa_added_noise" in document
                else None
            ),
            nkpa_band=band,
            field_sweep=tuple(
                FieldPoint(
                    _float(point["magnetic_field"]),
                    _estimate_from_dict(point["added_noise"]),
                )
                for point in document.get("field_sweep", [])
            ),
            diagnostics=dict(document.get("diagnostics", {})),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise ValidationError(f"malformed calibration record: {err}") from err


def circuit_to_dict(circuit: DerivedCircuit) -> Dict[str, Any]:
    """
    Report form of a derived circuit; angular quantities in rad/s
    """
    return {
        "bridge_inductance_H": circuit.bridge_inductance,
        "total_inductance_H": circuit.total_inductance,
        "participation_ratio": circuit.participation_ratio,
        "participation_ratio_geometry": circuit.participation_ratio_geometry,
        "participation_ratio_declared": circuit.participation_ratio_declared,
        "alpha_source": circuit.alpha_source,
        "implied_parasitic_inductance_H": circuit.implied_parasitic_inductance,
        "resonator_impedance_ohm": circuit.resonator_impedance,
        "resonant_frequency": circuit.resonant_frequency,
        "zero_point_current_A": circuit.zero_point_current,
        "characteristic_current_A": circuit.characteristic_current,
        "kerr_coefficient": circuit.kerr_coefficient,
        "kerr_coefficient_zero_point": circuit.kerr_coefficient_zero_point,
        "external_coupling_rate": circuit.external_coupling_rate,
        "intrinsic_loss_rate": circuit.intrinsic_loss_rate,
        "total_decay_rate": circuit.total_decay_rate,
    }
