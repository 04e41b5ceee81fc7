"""
Subcommands exposing each pipeline stage
"""

import argparse
import logging
import math
import os
import re
import textwrap
from typing import Any, Callable, ClassVar, Dict, List, Optional, Sequence, Tuple, Type

import numpy as np

from . import calibration, circuit, dynamics, io_formats, synth
from .calibration import CalibrationRecord, ReflectionTrace
from .circuit import DerivedCircuit, DeviceSpec
from .dynamics import DriveConfig, PumpState
from .errors import ValidationError
from .framework import Command, PipelineTask
from .units import TWO_PI, db_to_power_ratio, to_si, watts_to_dbm

QUANTITY_PATTERN = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")
DEFAULT_UNITS: Dict[str, str] = {
    "frequency": "Hz",
    "angular_frequency": "rad/s",
    "power": "W",
    "temperature": "K",
    "field": "T",
    "current": "A",
}
PROTOTYPE_DRIVE_DBM: float = -87.0
PROTOTYPE_HEAT_LIMIT_DBM: float = -56.0


def quantity(dimension: str) -> Callable[[str], float]:
    """
    argparse `type` reading "7.45GHz", "-26 MHz", "58mK" or a bare SI number
    """

    def parse(text: str) -> float:
        match = QUANTITY_PATTERN.match(text)
        if match is None:
            raise argparse.ArgumentTypeError(f"`{text}` is not a number with a unit")
        value: float = float(match.group(1))
        unit: str = match.group(2) or DEFAULT_UNITS.get(dimension, "1")
        try:
            return to_si(value, unit, dimension)
        except ValidationError as err:
            raise argparse.ArgumentTypeError(str(err)) from err

    parse.__name__ = dimension
    return parse


def float_list(text: str) -> List[float]:
    """comma-separated floats"""
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"`{text}` is not a list of numbers") from err


def _hz(value: float) -> float:
    return value / TWO_PI


def _out(args: argparse.Namespace, name: str) -> str:
    return os.path.join(args.out, name)


def _add_spec_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", "-s", help="Device document (JSON)", type=str)
    parser.add_argument(
        "--alpha-from",
        choices=circuit.ALPHA_SOURCES,
        default="geometry",
        help=(
            "Take the participation ratio from the bridge geometry or from the "
            "value declared in the device document. Default: `geometry`"
        ),
    )


def _add_drive_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--drive", help="Drive document (JSON)", type=str)
    parser.add_argument(
        "--target-gain",
        help="Solve a Kerr-compensated equal-power drive for this peak gain (dB)",
        type=float,
    )
    parser.add_argument(
        "--tone-power",
        help="Kerr-compensated equal-power drive at this power per tone, e.g. -90dBm",
        type=quantity("power"),
    )
    parser.add_argument(
        "--detuning",
        default=TWO_PI * dynamics.DEFAULT_PUMP_DETUNING_HZ,
        help="Pump offset from the gain center, e.g. 133.5MHz. Default: 133.5 MHz",
        type=quantity("angular_frequency"),
    )
    parser.add_argument(
        "--phases",
        default=[0.0, 0.0],
        help="Pump phases φ1,φ2 in rad for solved drives. Default: 0,0",
        type=float_list,
    )


def _check_spec_and_drive(args: argparse.Namespace, *, need_drive: bool = True) -> None:
    args_vars: Dict[str, Any] = vars(args)
    if not args_vars.get("spec"):
        raise argparse.ArgumentTypeError("`--spec/-s` is required")
    if not need_drive:
        return
    given: int = [
        args_vars.get("drive"),
        args_vars.get("target_gain"),
        args_vars.get("tone_power"),
    ].count(None)
    if given != 2:
        raise argparse.ArgumentTypeError(
            "Exactly one of `--drive`, `--target-gain` or `--tone-power` is required"
        )
    if len(args_vars.get("phases", [0.0, 0.0])) != 2:
        raise argparse.ArgumentTypeError("`--phases` takes two values")


def _resolve_drive(args: argparse.Namespace, derived: DerivedCircuit) -> DriveConfig:
    phases: Tuple[float, float] = (args.phases[0], args.phases[1])
    if args.drive:
        return io_formats.read_drive_config(args.drive)
    if args.target_gain is not None:
        return dynamics.drive_for_gain(derived, args.target_gain, args.detuning, phases)
    return dynamics.kerr_compensated_drive(
        derived, args.tone_power, args.detuning, phases
    )


def _drive_report(drive: DriveConfig) -> Dict[str, Any]:
    heat: float = dynamics.attenuator_heat_load(drive)
    print(
        f"pumps: {dynamics.describe_frequencies([drive.pump1_frequency, drive.pump2_frequency])}"
    )
    print(
        f"total drive power: {watts_to_dbm(drive.total_power):.3f} dBm "
        f"(reference operating point {PROTOTYPE_DRIVE_DBM:.0f} dBm)"
    )
    print(
        f"heat load behind 30 dB attenuator: {watts_to_dbm(heat):.3f} dBm "
        f"(reference bound {PROTOTYPE_HEAT_LIMIT_DBM:.0f} dBm)"
    )
    return {
        "drive": io_formats.drive_to_dict(drive),
        "total_drive_power_dbm": watts_to_dbm(drive.total_power),
        "attenuator_heat_load_dbm": watts_to_dbm(heat),
    }


class _DeviceCommand(Command):
    """
    Shared state for commands that start from a device document
    """

    def __init__(self, *, args: argparse.Namespace) -> None:
        self.args: argparse.Namespace = args
        self.spec: Optional[DeviceSpec] = None
        self.circuit: Optional[DerivedCircuit] = None
        self.results: Dict[str, Any] = {}
        self.inputs: List[str] = []

    def read_spec(self) -> None:
        """load the device document"""
        self.spec = io_formats.read_device_spec(self.args.spec)
        self.inputs.append(self.args.spec)

    def derive(self) -> None:
        """compute the resonator quantities"""
        assert self.spec is not None
        self.circuit = circuit.derive_circuit(self.spec, self.args.alpha_from)
        self.results["circuit"] = io_formats.circuit_to_dict(self.circuit)

    def write_results(self) -> None:
        """canonical result document for this subcommand"""
        io_formats.write_results(
            self.results, _out(self.args, f"{self.subcommand}.json"), self.inputs
        )

    def device_tasks(self) -> List[PipelineTask]:
        """read and derive"""
        return [
            PipelineTask(name="Read device spec", exec_function=self.read_spec),
            PipelineTask(name="Derive circuit", exec_function=self.derive),
        ]


class DeriveCommand(_DeviceCommand):
    """derive resonator parameters and the Kerr coefficient"""

    subcommand: ClassVar[str] = "derive"

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.RawDescriptionHelpFormatter
        parser.description = "Derive resonator parameters and the Kerr coefficient"
        parser.epilog = textwrap.dedent(
            """
        Examples:

            %(prog)s --spec devices/nkpa_prototype.json

            # use the participation ratio declared in the document
            %(prog)s --spec devices/nkpa_prototype.json --alpha-from file
        """
        )
        _add_spec_args(parser)

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        _check_spec_and_drive(args, need_drive=False)

    def report(self) -> None:
        """print both Kerr forms, α and the comparison with any quoted K"""
        assert self.spec is not None and self.circuit is not None
        derived: DerivedCircuit = self.circuit
        print(f"device: {self.spec.name}")
        print(f"resonant frequency: {_hz(derived.resonant_frequency) / 1e9:.6f} GHz")
        print(f"resonator impedance: {derived.resonator_impedance:.3f} Ohm")
        print(
            f"participation ratio: {derived.participation_ratio:.4f} "
            f"(from {derived.alpha_source})"
        )
        if derived.alpha_disagrees:
            print(
                f"  declared α {derived.participation_ratio_declared:.4f} disagrees with "
                f"geometric α {derived.participation_ratio_geometry:.4f}; implied "
                f"parasitic inductance {derived.implied_parasitic_inductance * 1e9:.4f} nH"
            )
        print(f"characteristic current I*: {derived.characteristic_current * 1e6:.4f} uA")
        print(f"zero-point current: {derived.zero_point_current * 1e9:.4f} nA")
        print(f"Kerr coefficient K/2π: {_hz(derived.kerr_coefficient):.6e} Hz")
        print(
            "Kerr coefficient from zero-point current K/2π: "
            f"{_hz(derived.kerr_coefficient_zero_point):.6e} Hz"
        )
        relative: float = (
            abs(derived.kerr_coefficient - derived.kerr_coefficient_zero_point)
            / derived.kerr_coefficient
        )
        print(f"Kerr forms agree to {relative:.3e} relative")
        self.results["kerr_consistency"] = relative
        ratio: Optional[float] = circuit.kerr_reference_ratio(self.spec, derived)
        if ratio is not None:
            flagged: bool = circuit.kerr_reference_flagged(ratio)
            quoted: float = _hz(derived.kerr_coefficient / ratio)
            print(f"quoted reference K/2π: {quoted:.6e} Hz (model/quoted = {ratio:.3f})")
            if flagged:
                print(
                    "MISMATCH: the model Kerr coefficient differs from the quoted "
                    f"value by a factor {ratio:.2f}"
                )
            self.results["kerr_reference"] = {
                "ratio": ratio,
                "flagged": flagged,
                "quoted_hz": quoted,
            }

    def get_workflow(self) -> List[PipelineTask]:
        return self.device_tasks() + [
            PipelineTask(name="Report", exec_function=self.report),
            PipelineTask(name="Write results", exec_function=self.write_results),
        ]

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: DeriveCommand = DeriveCommand(args=args)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


class _PumpedCommand(_DeviceCommand):
    """
    Device commands that also need a solved pump
    """

    def __init__(self, *, args: argparse.Namespace) -> None:
        super().__init__(args=args)
        self.drive: Optional[DriveConfig] = None
        self.pump: Optional[PumpState] = None

    def resolve_drive(self) -> None:
        """read or solve the drive"""
        assert self.circuit is not None
        self.drive = _resolve_drive(self.args, self.circuit)
        if self.args.drive:
            self.inputs.append(self.args.drive)
        self.results.update(_drive_report(self.drive))
        io_formats.write_drive_config(self.drive, _out(self.args, "drive.json"))

    def solve_pump(self) -> None:
        """pump steady state"""
        assert self.circuit is not None and self.drive is not None
        self.pump = dynamics.pump_steady_state(self.circuit, self.drive)
        self.results["pump"] = {
            "photons_b": self.pump.photons_b,
            "photons_c": self.pump.photons_c,
            "cross_kerr_shift": self.pump.cross_kerr_shift,
            "parametric_strength": abs(self.pump.parametric_strength),
            "effective_detuning": self.pump.effective_detuning,
        }

    def pumped_tasks(self) -> List[PipelineTask]:
        """read, derive, drive and pump"""
        return self.device_tasks() + [
            PipelineTask(name="Resolve drive", exec_function=self.resolve_drive),
            PipelineTask(name="Solve pump steady state", exec_function=self.solve_pump),
        ]


class SimulateGainCommand(_PumpedCommand):
    """phase-preserving gain spectrum of a pumped device"""

    subcommand: ClassVar[str] = "simulate-gain"

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.RawDescriptionHelpFormatter
        parser.description = "Simulate the phase-preserving gain spectrum"
        parser.epilog = textwrap.dedent(
            """
        Examples:

            # solve the drive for 26 dB with pumps 133.5 MHz either side
            %(prog)s --spec devices/nkpa_prototype.json --target-gain 26

            %(prog)s --spec devices/nkpa_prototype.json --drive drive.json
        """
        )
        _add_spec_args(parser)
        _add_drive_args(parser)
        parser.add_argument(
            "--points",
            default=dynamics.DEFAULT_GRID_POINTS,
            help="Grid points. Default: 2001",
            type=int,
        )
        parser.add_argument(
            "--span",
            default=1.0,
            help="Grid half-width in units of κ_tot. Default: 1",
            type=float,
        )
        parser.add_argument(
            "--compression",
            action="store_true",
            default=False,
            help="Also compute the 1-dB compression point",
        )

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        _check_spec_and_drive(args)
        if args.points < 2 or args.span <= 0.0:
            raise argparse.ArgumentTypeError("`--points` ≥ 2 and `--span` > 0 required")

    def spectrum(self) -> None:
        """gain spectrum, peak, bandwidth and added noise"""
        assert self.circuit is not None and self.pump is not None
        kappa: float = self.circuit.total_decay_rate
        grid: np.ndarray = self.pump.center_frequency + np.linspace(
            -self.args.span * kappa, self.args.span * kappa, self.args.points
        )
        gain = dynamics.gain_spectrum(self.circuit, self.pump, grid)
        io_formats.write_spectrum_csv(gain, _out(self.args, "gain_spectrum.csv"))
        detuning, peak_db = dynamics.peak_gain(self.circuit, self.pump)
        print(f"peak gain: {peak_db:.3f} dB at {_hz(detuning) / 1e6:+.4f} MHz")
        summary: Dict[str, Any] = {"peak_gain_db": peak_db, "peak_detuning": detuning}
        if peak_db > 3.0:
            bandwidth: float = dynamics.bandwidth_3db(self.circuit, self.pump)
            product: float = math.sqrt(db_to_power_ratio(peak_db)) * bandwidth
            print(f"3 dB bandwidth: {_hz(bandwidth) / 1e6:.4f} MHz")
            print(
                f"gain-bandwidth √G·Δf: {_hz(product) / 1e6:.4f} MHz "
                f"(κ_tot/2π = {_hz(kappa) / 1e6:.4f} MHz)"
            )
            summary["bandwidth_3db"] = bandwidth
            summary["gain_bandwidth_product"] = product
            summary["added_noise_quanta"] = dynamics.ideal_added_noise(
                self.circuit, self.pump, detuning
            )
        if self.args.compression:
            p1db: float = dynamics.compression_point(self.circuit, self.pump)
            print(f"1-dB compression: {watts_to_dbm(p1db):.3f} dBm")
            summary["compression_dbm"] = watts_to_dbm(p1db)
        self.results["gain"] = summary

    def get_workflow(self) -> List[PipelineTask]:
        return self.pumped_tasks() + [
            PipelineTask(name="Gain spectrum", exec_function=self.spectrum),
            PipelineTask(name="Write results", exec_function=self.write_results),
        ]

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: SimulateGainCommand = SimulateGainCommand(args=args)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


class SimulatePsCommand(_PumpedCommand):
    """degenerate phase-sensitive gain versus probe phase"""

    subcommand: ClassVar[str] = "simulate-ps"

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.description = "Simulate phase-sensitive gain at the gain center"
        _add_spec_args(parser)
        _add_drive_args(parser)
        parser.add_argument(
            "--phase-points",
            default=721,
            help="Points over Δφ ∈ [0, 2π]. Default: 721",
            type=int,
        )

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        _check_spec_and_drive(args)
        if args.phase_points < 2:
            raise argparse.ArgumentTypeError("`--phase-points` must be at least 2")

    def sweep(self) -> None:
        """phase sweep and its extrema"""
        assert self.circuit is not None and self.pump is not None
        phases: np.ndarray = np.linspace(0.0, TWO_PI, self.args.phase_points)
        result = dynamics.phase_sensitive_gain(self.circuit, self.pump, phases)
        io_formats.write_phase_sweep_csv(result, _out(self.args, "phase_sweep.csv"))
        print(f"max gain: {result.max_gain_db:.3f} dB")
        print(f"min gain: {result.min_gain_db:.3f} dB")
        self.results["phase_sensitive"] = {
            "max_gain_db": result.max_gain_db,
            "min_gain_db": result.min_gain_db,
            "max_min_product": db_to_power_ratio(result.max_gain_db + result.min_gain_db),
        }

    def get_workflow(self) -> List[PipelineTask]:
        return self.pumped_tasks() + [
            PipelineTask(name="Phase sweep", exec_function=self.sweep),
            PipelineTask(name="Write results", exec_function=self.write_results),
        ]

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: SimulatePsCommand = SimulatePsCommand(args=args)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


def _read_reflection(path: str) -> ReflectionTrace:
    if path.lower().endswith((".s1p", ".ts")):
        return io_formats.read_touchstone_1port(path)
    return io_formats.read_reflection_csv(path)


class FitS11Command(Command):
    """fit a reflection trace"""

    subcommand: ClassVar[str] = "fit-s11"

    def __init__(self, *, args: argparse.Namespace) -> None:
        self.args: argparse.Namespace = args
        self.trace: Optional[ReflectionTrace] = None
        self.record: Optional[CalibrationRecord] = None
        self.extra: Dict[str, Any] = {}

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.RawDescriptionHelpFormatter
        parser.description = "Fit ω₀, κ_ext and κ_int to a reflection trace"
        parser.epilog = textwrap.dedent(
            """
        Examples:

            %(prog)s --trace s11.s1p

            # compare the linewidth with an earlier fit
            %(prog)s --trace s11_field.csv --reference-results zero_field/fit-s11.json
        """
        )
        parser.add_argument(
            "--trace",
            "-t",
            help="Touchstone (.s1p) or CSV (freq_Hz,re,im) trace",
            type=str,
        )
        for name, text in (
            ("f0", "resonant frequency"),
            ("kappa-ext", "external coupling rate"),
            ("kappa-int", "intrinsic loss rate"),
        ):
            parser.add_argument(
                f"--guess-{name}",
                help=f"Initial {text}, e.g. 7.45GHz (Hz units mean ω/2π)",
                type=quantity("angular_frequency"),
            )
        parser.add_argument(
            "--reference-results",
            help="Earlier fit-s11 result document to compare the linewidth with",
            type=str,
        )

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        if not vars(args).get("trace"):
            raise argparse.ArgumentTypeError("`--trace/-t` is required")
        guesses: List[Optional[float]] = [
            args.guess_f0,
            args.guess_kappa_ext,
            args.guess_kappa_int,
        ]
        if guesses.count(None) not in (0, 3):
            raise argparse.ArgumentTypeError("Give all three `--guess-*` options or none")

    def read_trace(self) -> None:
        """load the trace"""
        self.trace = _read_reflection(self.args.trace)

    def fit(self) -> None:
        """reflection fit"""
        assert self.trace is not None
        guess: Optional[Tuple[float, float, float]] = None
        if self.args.guess_f0 is not None:
            guess = (self.args.guess_f0, self.args.guess_kappa_ext, self.args.guess_kappa_int)
        fit = calibration.fit_reflection(self.trace, guess)
        self.record = CalibrationRecord(reflection=fit)
        print(
            f"f0 = {_hz(fit.resonant_frequency.value) / 1e9:.9f} GHz "
            f"± {_hz(fit.resonant_frequency.stderr) / 1e3:.3f} kHz"
        )
        print(
            f"κ_ext/2π = {_hz(fit.external_coupling_rate.value) / 1e6:.4f} "
            f"± {_hz(fit.external_coupling_rate.stderr) / 1e6:.4f} MHz"
        )
        print(
            f"κ_int/2π = {_hz(fit.intrinsic_loss_rate.value) / 1e6:.4f} "
            f"± {_hz(fit.intrinsic_loss_rate.stderr) / 1e6:.4f} MHz"
        )
        print(f"Q_int = {fit.internal_quality:.1f}, extinction {fit.extinction_db:.3f} dB")
        if self.args.reference_results:
            earlier = io_formats.calibration_from_dict(
                io_formats.read_results(self.args.reference_results)["results"]
            )
            if earlier.reflection is None:
                raise ValidationError("Reference results carry no reflection fit")
            change: float = calibration.linewidth_change(earlier.reflection, fit)
            print(f"linewidth change: {100.0 * change:+.3f} %")
            self.extra["linewidth_change"] = change

    def write_results(self) -> None:
        """calibration record"""
        assert self.record is not None
        document: Dict[str, Any] = io_formats.calibration_to_dict(self.record)
        document.update(self.extra)
        inputs: List[str] = [self.args.trace]
        if self.args.reference_results:
            inputs.append(self.args.reference_results)
        io_formats.write_results(document, _out(self.args, "fit-s11.json"), inputs)

    def get_workflow(self) -> List[PipelineTask]:
        return [
            PipelineTask(name="Read trace", exec_function=self.read_trace),
            PipelineTask(name="Fit reflection", exec_function=self.fit),
            PipelineTask(name="Write results", exec_function=self.write_results),
        ]

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: FitS11Command = FitS11Command(args=args)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


class FitNoiseCommand(Command):
    """noise thermometry and amplifier added-noise back-out"""

    subcommand: ClassVar[str] = "fit-noise"

    def __init__(self, *, args: argparse.Namespace) -> None:
        self.args: argparse.Namespace = args
        self.trace: Optional[calibration.NoiseTrace] = None
        self.record: CalibrationRecord = CalibrationRecord()

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.RawDescriptionHelpFormatter
        parser.description = "Fit chain gain and added noise to a temperature sweep"
        parser.epilog = textwrap.dedent(
            """
        Examples:

            %(prog)s --trace vts.csv --header vts.json

            # also reduce a field sweep measured at the base temperature
            %(prog)s --trace vts.csv --header vts.json \\
                --field-sweep field.csv --field-header field.json
        """
        )
        parser.add_argument("--trace", "-t", help="CSV with T_K,psd_quanta", type=str)
        parser.add_argument("--header", help="JSON header for the trace", type=str)
        parser.add_argument(
            "--transmission",
            default=0.95,
            help="Transmission λ between source and amplifier. Default: 0.95",
            type=float,
        )
        parser.add_argument(
            "--system-noise",
            default=23.0,
            help="Following-chain noise N_sys in quanta. Default: 23",
            type=float,
        )
        parser.add_argument(
            "--amplifier-gain",
            default=26.0,
            help="Amplifier gain in dB. Default: 26",
            type=float,
        )
        parser.add_argument(
            "--transmission-range",
            default=[0.92, 0.98],
            help="λ range for the sensitivity band. Default: 0.92,0.98",
            type=float_list,
        )
        parser.add_argument(
            "--system-noise-range",
            default=[21.0, 25.0],
            help="N_sys range for the sensitivity band. Default: 21,25",
            type=float_list,
        )
        parser.add_argument("--field-sweep", help="CSV with B_T,psd_quanta", type=str)
        parser.add_argument("--field-header", help="JSON header for the field sweep", type=str)

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        args_vars: Dict[str, Any] = vars(args)
        if not args_vars.get("trace") or not args_vars.get("header"):
            raise argparse.ArgumentTypeError("`--trace` and `--header` are required")
        if [args_vars.get("field_sweep"), args_vars.get("field_header")].count(None) == 1:
            raise argparse.ArgumentTypeError(
                "If either `--field-sweep` or `--field-header` is passed, both are required."
            )
        for name in ("transmission_range", "system_noise_range"):
            if len(args_vars[name]) != 2:
                raise argparse.ArgumentTypeError(f"`--{name.replace('_', '-')}` takes two values")

    def read_trace(self) -> None:
        """load the sweep"""
        self.trace = io_formats.read_noise_trace(self.args.trace, self.args.header)

    def fit(self) -> None:
        """thermometry fit and back-out"""
        assert self.trace is not None
        noise = calibration.fit_noise_thermometry(self.trace)
        gain: float = db_to_power_ratio(self.args.amplifier_gain)
        back_out = calibration.nkpa_added_noise(
            noise.added_noise.value,
            gain,
            self.args.system_noise,
            self.args.transmission,
            {"added_noise": noise.added_noise.stderr},
        )
        band: Tuple[float, float] = calibration.nkpa_noise_band(
            noise.added_noise.value,
            gain,
            tuple(self.args.transmission_range),
            tuple(self.args.system_noise_range),
        )
        self.record = CalibrationRecord(
            noise=noise,
            nkpa_added_noise=back_out,
            nkpa_band=band,
            diagnostics={
                "transmission": self.args.transmission,
                "system_noise": self.args.system_noise,
                "amplifier_gain_db": self.args.amplifier_gain,
            },
        )
        intercept = noise.zero_temperature_output
        print(f"G_sys = {noise.system_gain.value:.6g} ± {noise.system_gain.stderr:.2g}")
        print(f"N_add = {noise.added_noise.value:.4f} ± {noise.added_noise.stderr:.4f}")
        print(f"S_out(T→0) = {intercept.value:.4f} ± {intercept.stderr:.4f} quanta")
        print(
            f"amplifier added noise = {back_out.value:.4f} ± {back_out.stderr:.4f} "
            f"(band {band[0]:.4f} to {band[1]:.4f})"
        )

    def reduce_field_sweep(self) -> None:
        """added noise versus field"""
        sweep = io_formats.read_field_sweep(self.args.field_sweep, self.args.field_header)
        points = calibration.field_sweep_reduction(sweep, self.record)
        for point in points:
            print(
                f"B = {point.magnetic_field * 1e3:8.2f} mT: N_add = "
                f"{point.added_noise.value:.4f} ± {point.added_noise.stderr:.4f}"
            )
        self.record = CalibrationRecord(
            noise=self.record.noise,
            nkpa_added_noise=self.record.nkpa_added_noise,
            nkpa_band=self.record.nkpa_band,
            field_sweep=tuple(points),
            diagnostics=self.record.diagnostics,
        )

    def write_results(self) -> None:
        """calibration record"""
        inputs: List[str] = [self.args.trace, self.args.header]
        if self.args.field_sweep:
            inputs.extend([self.args.field_sweep, self.args.field_header])
        io_formats.write_results(
            io_formats.calibration_to_dict(self.record),
            _out(self.args, "fit-noise.json"),
            inputs,
        )

    def get_workflow(self) -> List[PipelineTask]:
        tasks: List[PipelineTask] = [
            PipelineTask(name="Read noise trace", exec_function=self.read_trace),
            PipelineTask(name="Fit noise thermometry", exec_function=self.fit),
        ]
        if self.args.field_sweep:
            tasks.append(
                PipelineTask(name="Reduce field sweep", exec_function=self.reduce_field_sweep)
            )
        tasks.append(PipelineTask(name="Write results", exec_function=self.write_results))
        return tasks

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: FitNoiseCommand = FitNoiseCommand(args=args)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


class CompensateCommand(_PumpedCommand):
    """re-center and re-level the pumps after a resonance shift"""

    subcommand: ClassVar[str] = "compensate"

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.RawDescriptionHelpFormatter
        parser.description = "Retune the drive for a field-induced resonance shift"
        parser.epilog = textwrap.dedent(
            """
        Examples:

            %(prog)s --spec devices/nkpa_prototype.json --target-gain 26 --shift -26MHz
        """
        )
        _add_spec_args(parser)
        _add_drive_args(parser)
        parser.add_argument(
            "--shift",
            help="Resonance shift, e.g. -26MHz",
            type=quantity("angular_frequency"),
        )
        parser.add_argument(
            "--restore-gain",
            help="Gain (dB) to restore. Default: the gain before the shift",
            type=float,
        )

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        _check_spec_and_drive(args)
        if vars(args).get("shift") is None:
            raise argparse.ArgumentTypeError("`--shift` is required")

    def retune(self) -> None:
        """retuned drive and the gain it restores"""
        assert self.circuit is not None and self.pump is not None and self.drive is not None
        _, before_db = dynamics.peak_gain(self.circuit, self.pump)
        target: float = (
            before_db if self.args.restore_gain is None else self.args.restore_gain
        )
        shifted: float = self.circuit.resonant_frequency + self.args.shift
        retuned: DriveConfig = dynamics.retune_for_field_shift(
            self.circuit, self.drive, shifted, target
        )
        shifted_circuit: DerivedCircuit = self.circuit.with_resonance(shifted)
        _, after_db = dynamics.peak_gain(
            shifted_circuit, dynamics.pump_steady_state(shifted_circuit, retuned)
        )
        adjustment: float = dynamics.power_adjustment_db(self.drive, retuned)
        print(f"gain before shift: {before_db:.3f} dB; after retune: {after_db:.3f} dB")
        print(f"pump shift: {_hz(self.args.shift) / 1e6:+.4f} MHz")
        print(f"power adjustment: {adjustment:+.4f} dB")
        io_formats.write_drive_config(retuned, _out(self.args, "drive_retuned.json"))
        self.results["retune"] = {
            "gain_before_db": before_db,
            "gain_after_db": after_db,
            "power_adjustment_db": adjustment,
            "retuned_drive": io_formats.drive_to_dict(retuned),
        }

    def get_workflow(self) -> List[PipelineTask]:
        return self.pumped_tasks() + [
            PipelineTask(name="Retune drive", exec_function=self.retune),
            PipelineTask(name="Write results", exec_function=self.write_results),
        ]

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: CompensateCommand = CompensateCommand(args=args)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


class DesignCommand(_DeviceCommand):
    """size a bridge for a target Kerr coefficient"""

    subcommand: ClassVar[str] = "design"

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.RawDescriptionHelpFormatter
        parser.description = (
            "Size the bridge for a target Kerr coefficient, keeping the film, "
            "capacitor and parasitic inductance of a device document"
        )
        parser.epilog = textwrap.dedent(
            """
        Examples:

            %(prog)s --spec devices/nkpa_prototype.json --target-kerr 110kHz
        """
        )
        _add_spec_args(parser)
        parser.add_argument(
            "--target-kerr",
            help="Kerr coefficient, e.g. 110kHz (Hz units mean K/2π)",
            type=quantity("angular_frequency"),
        )
        parser.add_argument(
            "--frequency",
            help="Target resonant frequency. Default: the device's own",
            type=quantity("angular_frequency"),
        )
        parser.add_argument(
            "--min-current",
            default=2e-6,
            help="Smallest makeable I*, e.g. 2uA. Default: 2 µA",
            type=quantity("current"),
        )
        parser.add_argument(
            "--max-current",
            default=10e-3,
            help="Largest makeable I*, e.g. 10mA. Default: 10 mA",
            type=quantity("current"),
        )

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        _check_spec_and_drive(args, need_drive=False)
        if vars(args).get("target_kerr") is None:
            raise argparse.ArgumentTypeError("`--target-kerr` is required")

    def design(self) -> None:
        """invert the circuit model and verify the result"""
        assert self.spec is not None and self.circuit is not None
        frequency: float = (
            self.circuit.resonant_frequency
            if self.args.frequency is None
            else self.args.frequency
        )
        constraints = circuit.DesignConstraints(
            shunt_capacitance=self.spec.circuit.shunt_capacitance,
            parasitic_inductance=self.spec.circuit.parasitic_inductance,
            min_characteristic_current=self.args.min_current,
            max_characteristic_current=self.args.max_current,
        )
        geometry = circuit.design_bridge_for_kerr(
            self.args.target_kerr, frequency, self.spec.film, constraints
        )
        designed: DeviceSpec = DeviceSpec(
            film=self.spec.film,
            geometry=geometry,
            circuit=self.spec.circuit,
            name=f"{self.spec.name}-design",
        )
        check: DerivedCircuit = circuit.derive_circuit(designed)
        print(f"width: {geometry.width * 1e9:.4f} nm, length: {geometry.length * 1e9:.4f} nm")
        print(f"check: K/2π = {_hz(check.kerr_coefficient):.6e} Hz at "
              f"{_hz(check.resonant_frequency) / 1e9:.6f} GHz")
        self.results["design"] = {
            "width_m": geometry.width,
            "length_m": geometry.length,
            "circuit": io_formats.circuit_to_dict(check),
        }

    def get_workflow(self) -> List[PipelineTask]:
        return self.device_tasks() + [
            PipelineTask(name="Design bridge", exec_function=self.design),
            PipelineTask(name="Write results", exec_function=self.write_results),
        ]

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: DesignCommand = DesignCommand(args=args)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


SYNTH_MODELS: Tuple[str, ...] = ("reflection", "noise", "field-sweep")


class SynthCommand(Command):
    """seeded synthetic traces from the forward models"""

    subcommand: ClassVar[str] = "synth"

    def __init__(self, *, args: argparse.Namespace) -> None:
        self.args: argparse.Namespace = args
        self.rng: np.random.Generator = np.random.default_rng(args.seed)

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.RawDescriptionHelpFormatter
        parser.description = "Generate synthetic traces with seeded noise"
        parser.epilog = textwrap.dedent(
            """
        Examples:

            %(prog)s --model reflection --noise 0.01 --seed 7
            %(prog)s --model noise --added-noise 0.59 --noise 0.01
            %(prog)s --model field-sweep --added-noise 0.59,0.62,0.66 \\
                --fields 0,0.2,0.427
        """
        )
        parser.add_argument("--model", choices=SYNTH_MODELS, help="Trace kind")
        parser.add_argument(
            "--noise",
            default=0.0,
            help="Complex rms (reflection) or relative (noise models) noise level",
            type=float,
        )
        parser.add_argument(
            "--f0",
            default=TWO_PI * 7.45e9,
            help="Resonant frequency. Default: 7.45GHz",
            type=quantity("angular_frequency"),
        )
        parser.add_argument(
            "--kappa-ext",
            default=TWO_PI * 57.0375e6,
            help="External coupling rate. Default: 57.0375MHz",
            type=quantity("angular_frequency"),
        )
        parser.add_argument(
            "--kappa-int",
            default=TWO_PI * 1.8625e6,
            help="Intrinsic loss rate. Default: 1.8625MHz",
            type=quantity("angular_frequency"),
        )
        parser.add_argument(
            "--linewidths", default=3.0, help="Half-span in κ_tot. Default: 3", type=float
        )
        parser.add_argument(
            "--points", default=None, help="Samples (reflection 20001, noise 12)", type=int
        )
        parser.add_argument(
            "--format",
            choices=("csv", "touchstone"),
            default="csv",
            help="Reflection output format. Default: csv",
        )
        parser.add_argument(
            "--system-gain", default=1000.0, help="G_sys. Default: 1000", type=float
        )
        parser.add_argument(
            "--added-noise",
            default=[0.59],
            help="N_add, or one value per field for field-sweep. Default: 0.59",
            type=float_list,
        )
        parser.add_argument(
            "--t-min", default=0.058, help="Lowest temperature. Default: 58mK",
            type=quantity("temperature"),
        )
        parser.add_argument(
            "--t-max", default=0.608, help="Highest temperature. Default: 608mK",
            type=quantity("temperature"),
        )
        parser.add_argument(
            "--base-temperature",
            default=0.058,
            help="Source temperature of a field sweep. Default: 58mK",
            type=quantity("temperature"),
        )
        parser.add_argument(
            "--fields", default=None, help="Field values in T for field-sweep", type=float_list
        )
        parser.add_argument(
            "--bandwidth", default=1e6, help="Detection bandwidth. Default: 1MHz",
            type=quantity("frequency"),
        )
        parser.add_argument(
            "--signal-frequency",
            default=TWO_PI * 7.45e9,
            help="Signal frequency. Default: 7.45GHz",
            type=quantity("angular_frequency"),
        )
        parser.add_argument(
            "--idler-frequency",
            default=None,
            help="Idler frequency. Default: the signal frequency",
            type=quantity("angular_frequency"),
        )

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        args_vars: Dict[str, Any] = vars(args)
        if args_vars.get("model") is None:
            raise argparse.ArgumentTypeError("`--model` is required")
        if args.noise < 0.0:
            raise argparse.ArgumentTypeError("`--noise` must be non-negative")
        if args.model == "field-sweep":
            if args.fields is None or len(args.fields) != len(args.added_noise):
                raise argparse.ArgumentTypeError(
                    "field-sweep needs `--fields` with one `--added-noise` value each"
                )
        elif len(args.added_noise) != 1:
            raise argparse.ArgumentTypeError("`--added-noise` takes one value here")

    def _idler(self) -> float:
        return (
            self.args.signal_frequency
            if self.args.idler_frequency is None
            else self.args.idler_frequency
        )

    def reflection(self) -> None:
        """synthetic S11"""
        grid: np.ndarray = synth.reflection_grid(
            self.args.f0,
            self.args.kappa_ext + self.args.kappa_int,
            self.args.linewidths,
            self.args.points or 20001,
        )
        trace = synth.synthesize_reflection(
            self.args.f0,
            self.args.kappa_ext,
            self.args.kappa_int,
            grid,
            self.args.noise,
            self.rng,
        )
        if self.args.format == "touchstone":
            path: str = _out(self.args, "synth_reflection.s1p")
            io_formats.write_touchstone_1port(trace, path)
        else:
            path = _out(self.args, "synth_reflection.csv")
            io_formats.write_reflection_csv(trace, path)
        print(path)

    def noise(self) -> None:
        """synthetic thermometry sweep"""
        temperatures: np.ndarray = np.linspace(
            self.args.t_min, self.args.t_max, self.args.points or 12
        )
        trace = synth.synthesize_noise_sweep(
            self.args.system_gain,
            self.args.added_noise[0],
            temperatures,
            self.args.bandwidth,
            self.args.signal_frequency,
            self._idler(),
            self.args.noise,
            self.rng,
        )
        csv_path: str = _out(self.args, "synth_noise.csv")
        io_formats.write_noise_trace(trace, csv_path, _out(self.args, "synth_noise.json"))
        print(csv_path)

    def field_sweep(self) -> None:
        """synthetic field sweep"""
        sweep = synth.synthesize_field_sweep(
            self.args.system_gain,
            self.args.added_noise,
            self.args.fields,
            self.args.base_temperature,
            self.args.signal_frequency,
            self._idler(),
            self.args.noise,
            self.rng,
        )
        csv_path: str = _out(self.args, "synth_field.csv")
        io_formats.write_field_sweep(
            sweep, csv_path, _out(self.args, "synth_field.json"), self.args.bandwidth
        )
        print(csv_path)

    def get_workflow(self) -> List[PipelineTask]:
        steps: Dict[str, PipelineTask] = {
            "reflection": PipelineTask(
                name="Synthesize reflection trace", exec_function=self.reflection
            ),
            "noise": PipelineTask(name="Synthesize noise sweep", exec_function=self.noise),
            "field-sweep": PipelineTask(
                name="Synthesize field sweep", exec_function=self.field_sweep
            ),
        }
        return [steps[self.args.model]]

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: SynthCommand = SynthCommand(args=args)
        logging.debug("Synthesizing `%s` with seed %d", args.model, args.seed)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


COMMANDS: Sequence[Type[Command]] = (
    DeriveCommand,
    SimulateGainCommand,
    SimulatePsCommand,
    FitS11Command,
    FitNoiseCommand,
    CompensateCommand,
    DesignCommand,
    SynthCommand,
)
