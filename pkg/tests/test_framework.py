"""
Unit tests for the subcommand framework
"""

import argparse
import json
from typing import Any, ClassVar, Dict, List, Optional

import pytest

from nanobridge_kpa import framework
from nanobridge_kpa.errors import (
    EXIT_IO,
    EXIT_OK,
    EXIT_SOLVER,
    EXIT_VALIDATION,
    DivergentGainError,
    TraceFormatError,
)
from nanobridge_kpa.framework import Command, PipelineTask


class RecordingCommand(Command):
    """
    Command that records what it was run with
    """

    subcommand: ClassVar[str] = "record"
    seen: ClassVar[List[argparse.Namespace]] = []
    failure: ClassVar[Optional[Exception]] = None

    def __init__(self, *, args: argparse.Namespace) -> None:
        self.args: argparse.Namespace = args

    @staticmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--level", default=1.0, type=float)
        parser.add_argument("--label", type=str)

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        if args.level < 0.0:
            raise argparse.ArgumentTypeError("`--level` must be non-negative")

    def run(self) -> None:
        """record or fail"""
        if RecordingCommand.failure is not None:
            raise RecordingCommand.failure
        RecordingCommand.seen.append(self.args)

    def get_workflow(self) -> List[PipelineTask]:
        return [PipelineTask(name="Record", exec_function=self.run)]

    @staticmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        command: RecordingCommand = RecordingCommand(args=args)
        Command.run_workflow(command.get_workflow(), dry_run=args.dry_run)


@pytest.fixture(name="recording_command", scope="function")
def fixture_recording_command() -> Any:
    """
    RecordingCommand with its class state reset
    """
    RecordingCommand.seen = []
    RecordingCommand.failure = None
    yield RecordingCommand
    RecordingCommand.seen = []
    RecordingCommand.failure = None


def _main(argv: List[str]) -> int:
    return framework.main(commands=[RecordingCommand], argv=argv)


@pytest.mark.parametrize(
    "exec_args, exec_kwargs, passed",
    [
        ([1, 2], None, [(1, 2), {}]),
        (None, {"key": "value"}, [(), {"key": "value"}]),
        (None, None, [(), {}]),
    ],
    ids=["args", "kwargs", "nothing"],
)
def test_task_execute(
    exec_args: Optional[List[Any]], exec_kwargs: Optional[Dict[str, Any]], passed: list
) -> None:
    """
    A task calls `exec_function` with its stored arguments
    """
    called: list = []

    def some_callable(*args: Any, **kwargs: Any) -> None:
        called.extend([args, kwargs])

    task: PipelineTask = PipelineTask(
        exec_function=some_callable, exec_args=exec_args, exec_kwargs=exec_kwargs
    )
    task.execute()
    assert called == passed


def test_task_equality() -> None:
    """
    Tasks compare by what they run, not by their names
    """

    def one() -> None:
        pass

    def two() -> None:
        pass

    assert PipelineTask(exec_function=one, name="a") == PipelineTask(
        exec_function=one, name="b"
    )
    assert PipelineTask(exec_function=one) != PipelineTask(exec_function=two)
    assert PipelineTask(exec_function=one, exec_args=[1]) != PipelineTask(
        exec_function=one, exec_args=[2]
    )
    assert PipelineTask(exec_function=one) != "task"


def test_dry_run(capsys: Any) -> None:
    """
    Dry runs print the step names and run nothing
    """
    run_count: int = 0

    def fake_task() -> None:
        nonlocal run_count
        run_count += 1

    task_names: List[str] = ["mytask1", "mytask2"]
    tasks: List[PipelineTask] = [
        PipelineTask(exec_function=fake_task, name=name) for name in task_names
    ]
    Command.run_workflow(tasks, dry_run=True)
    assert run_count == 0
    stdout: str = capsys.readouterr().out
    assert "dry run" in stdout
    for task_name in task_names:
        assert f"Would run task: {task_name}" in stdout

    Command.run_workflow(tasks, dry_run=False)
    assert run_count == len(tasks)


def test_main_runs_command(recording_command: Any, tmp_path: Any) -> None:
    """
    The selected command runs with its options and the common ones
    """
    out: str = str(tmp_path / "results" / "nested")
    assert _main(["record", "--level", "2.5", "--out", out, "--seed", "7"]) == EXIT_OK
    assert len(recording_command.seen) == 1
    args: argparse.Namespace = recording_command.seen[0]
    assert args.level == 2.5
    assert args.seed == 7
    assert (tmp_path / "results" / "nested").is_dir()


def test_main_dry_run(recording_command: Any, tmp_path: Any, capsys: Any) -> None:
    """
    `--dry-run` lists the steps and creates no output directory
    """
    out: Any = tmp_path / "never"
    assert _main(["record", "-d", "--out", str(out)]) == EXIT_OK
    assert recording_command.seen == []
    assert not out.exists()
    assert "Would run task: Record" in capsys.readouterr().out


def test_main_without_subcommand(capsys: Any) -> None:
    """
    No subcommand prints the usage and is a usage error
    """
    assert _main([]) == EXIT_VALIDATION
    assert "SUBCOMMAND" in capsys.readouterr().err


@pytest.mark.parametrize(
    "failure, exit_code",
    [
        (TraceFormatError("bad row", path="trace.csv", line=3), EXIT_VALIDATION),
        (DivergentGainError("above threshold"), EXIT_SOLVER),
        (FileNotFoundError("trace.csv"), EXIT_IO),
    ],
    ids=["validation", "solver", "io"],
)
def test_main_exit_codes(
    recording_command: Any,
    tmp_path: Any,
    capsys: Any,
    failure: Exception,
    exit_code: int,
) -> None:
    """
    Package errors map to their exit codes and are reported on stderr
    """
    recording_command.failure = failure
    assert _main(["record", "--out", str(tmp_path)]) == exit_code
    assert "ERROR" in capsys.readouterr().err


def test_main_argparse_post(recording_command: Any, tmp_path: Any) -> None:
    """
    Failed post-parse checks are usage errors and nothing runs
    """
    assert _main(["record", "--level", "-1", "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert recording_command.seen == []


def test_config_defaults(recording_command: Any, tmp_path: Any, capsys: Any) -> None:
    """
    Config values become defaults for their subcommand; flags still win and
    unknown keys are reported
    """
    config: Any = tmp_path / "config.json"
    config.write_text(
        json.dumps({"record": {"level": "4.5", "label": "cfg", "colour": "red"}}),
        encoding="utf-8",
    )
    assert _main(["record", "--config", str(config), "--out", str(tmp_path)]) == EXIT_OK
    assert recording_command.seen[-1].level == 4.5
    assert recording_command.seen[-1].label == "cfg"
    assert "colour" not in vars(recording_command.seen[-1])
    assert "Ignoring unknown config option `colour`" in capsys.readouterr().err

    assert (
        _main(
            [
                "record",
                "--config",
                str(config),
                "--level",
                "0.5",
                "--out",
                str(tmp_path),
            ]
        )
        == EXIT_OK
    )
    assert recording_command.seen[-1].level == 0.5


@pytest.mark.parametrize(
    "content, exit_code",
    [
        (b'{"record": {"level": 1.0', EXIT_VALIDATION),
        (b'["record"]', EXIT_VALIDATION),
        (b'{"record": {"label": "\xff"}}', EXIT_VALIDATION),
        (None, EXIT_IO),
    ],
    ids=["invalid-json", "not-a-mapping", "not-utf-8", "missing"],
)
def test_config_errors(
    recording_command: Any, tmp_path: Any, content: Optional[bytes], exit_code: int
) -> None:
    """
    Unreadable config files stop before any command runs
    """
    config: Any = tmp_path / "config.json"
    if content is not None:
        config.write_bytes(content)
    assert _main(["record", "--config", str(config)]) == exit_code
    assert recording_command.seen == []
