"""
Subcommand framework: argument parsing, config defaults, logging setup,
workflow execution and exit codes
"""

import abc
import argparse
import json
import logging
import os
import sys
from typing import (
    Any,
    Callable,
    ClassVar,
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    Set,
    Type,
)

from .errors import EXIT_IO, EXIT_OK, EXIT_VALIDATION, NkpaError
from .meta import __description__, __version__

PROG: str = "nanobridge-kpa"
LOG_FORMAT: str = "%(levelname)s: %(message)s"


class PipelineTask:
    """
    A single named step of a subcommand's workflow
    """

    def __init__(
        self,
        exec_function: Callable,
        name: Optional[str] = None,
        exec_args: Optional[Iterable[Any]] = None,
        exec_kwargs: Optional[Dict[str, Any]] = None,
    ) -> None:
        """init"""
        self.name: Optional[str] = name
        self.exec_function: Callable = exec_function
        self.exec_kwargs: Dict[str, Any] = (
            exec_kwargs if exec_kwargs is not None else {}
        )
        self.exec_args: Iterable[Any] = exec_args if exec_args is not None else []

    def __eq__(self, othertask: object) -> bool:
        if not isinstance(othertask, PipelineTask):
            return NotImplemented
        return (self.exec_args, self.exec_function, self.exec_kwargs) == (
            othertask.exec_args,
            othertask.exec_function,
            othertask.exec_kwargs,
        )

    def __repr__(self) -> str:
        return f"PipelineTask(name={self.name!r})"

    def execute(self, *args: Any, **kwargs: Any) -> None:
        """
        Entrypoint for this task to actually run
        """
        modargs: list = list(args)
        modargs.extend(self.exec_args)
        modkwargs = dict(kwargs)
        modkwargs.update(self.exec_kwargs)
        self.exec_function(*modargs, **modkwargs)


class Command(abc.ABC):
    """
    One subcommand: its arguments, checks and workflow
    """

    subcommand: ClassVar[str]
    version: ClassVar[str] = __version__

    @staticmethod
    @abc.abstractmethod
    def register_args(*, parser: argparse.ArgumentParser) -> None:
        """
        Add this subcommand's options to its subparser
        """

    @staticmethod
    def argparse_post(*, args: argparse.Namespace) -> None:
        """
        Checks for after arguments are otherwise fully processed
        """

    @abc.abstractmethod
    def get_workflow(self) -> List[PipelineTask]:
        """
        Return the ordered steps this command runs
        """

    @staticmethod
    @abc.abstractmethod
    def entrypoint(*, args: argparse.Namespace) -> None:
        """
        Build the command from parsed arguments and run it
        """

    @staticmethod
    def run_workflow(workflow: Sequence[PipelineTask], *, dry_run: bool) -> None:
        """
        Execute, or in dry-run mode only list, the workflow steps
        """
        if dry_run:
            print("# Running in dry run mode. Will not run actual pipeline tasks.")
        for task in workflow:
            if dry_run:
                print(f"Would run task: {task.name}")
            else:
                logging.info("Running workflow step: %s", task.name)
                task.execute()


def _common_parser() -> argparse.ArgumentParser:
    common: argparse.ArgumentParser = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        help="JSON file of option defaults keyed by subcommand name",
        type=str,
    )
    common.add_argument(
        "--out",
        default=".",
        help="Directory result files are written to. Default: `.`",
        type=str,
    )
    common.add_argument(
        "--seed",
        default=0,
        help="Seed for synthetic noise generation. Default: 0",
        type=int,
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument(
        "--verbose", "-v", action="store_true", default=False, help="Log at DEBUG"
    )
    verbosity.add_argument(
        "--quiet", "-q", action="store_true", default=False, help="Only log errors"
    )
    common.add_argument(
        "--dry-run",
        "-d",
        action="store_true",
        default=False,
        help="Report the workflow steps that would run without actually running them",
    )
    return common


def load_config(path: Optional[str]) -> Dict[str, Dict[str, Any]]:
    """
    Per-subcommand option defaults from a JSON config file
    """
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        try:
            document: Any = json.load(handle)
        except json.JSONDecodeError as err:
            raise argparse.ArgumentTypeError(
                f"Config `{path}` is not valid JSON: {err.msg} (line {err.lineno})"
            ) from err
        except UnicodeDecodeError as err:
            raise argparse.ArgumentTypeError(
                f"Config `{path}` is not UTF-8 text ({err.reason})"
            ) from err
    if not isinstance(document, dict) or not all(
        isinstance(section, dict) for section in document.values()
    ):
        raise argparse.ArgumentTypeError(
            f"Config `{path}` must map subcommand names to option objects"
        )
    return document


def build_parser(
    commands: Sequence[Type[Command]], config: Dict[str, Dict[str, Any]]
) -> argparse.ArgumentParser:
    """
    Top-level parser with one subparser per command, config defaults applied
    """
    parser: argparse.ArgumentParser = argparse.ArgumentParser(
        prog=PROG, description=__description__
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    common: argparse.ArgumentParser = _common_parser()
    for command in commands:
        subparser: argparse.ArgumentParser = subparsers.add_parser(
            command.subcommand, parents=[common], help=command.__doc__
        )
        command.register_args(parser=subparser)
        # pylint: disable-next=protected-access
        known: Set[str] = {action.dest for action in subparser._actions}
        subparser.set_defaults(
            command=command,
            **{
                key: value
                for key, value in config.get(command.subcommand, {}).items()
                if key in known
            },
        )
    return parser


def configure_logging(args: argparse.Namespace) -> None:
    """root logger to standard error at the requested verbosity"""
    level: int = logging.WARNING
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _config_path(argv: Sequence[str]) -> Optional[str]:
    pre: argparse.ArgumentParser = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=str)
    known, _ = pre.parse_known_args(argv)
    return known.config


def main(*, commands: Sequence[Type[Command]], argv: Sequence[str]) -> int:
    """
    Parse `argv`, run the selected command and return the process exit code
    """
    try:
        config: Dict[str, Dict[str, Any]] = load_config(_config_path(argv))
    except argparse.ArgumentTypeError as err:
        print(f"{PROG}: error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"{PROG}: error: {err}", file=sys.stderr)
        return EXIT_IO
    parser: argparse.ArgumentParser = build_parser(commands, config)
    args: argparse.Namespace = parser.parse_args(list(argv))
    if args.subcommand is None:
        parser.print_help(sys.stderr)
        return EXIT_VALIDATION
    configure_logging(args)
    command: Type[Command] = args.command
    for key in config.get(command.subcommand, {}):
        if key not in vars(args):
            logging.warning("Ignoring unknown config option `%s`", key)
    try:
        command.argparse_post(args=args)
    except argparse.ArgumentTypeError as err:
        logging.error("%s", err)
        return EXIT_VALIDATION

    try:
        if not args.dry_run:
            os.makedirs(args.out, exist_ok=True)
        command.entrypoint(args=args)
    except NkpaError as err:
        logging.error("%s: %s", type(err).__name__, err)
        return err.exit_code
    except OSError as err:
        logging.error("%s", err)
        return EXIT_IO
    return EXIT_OK
