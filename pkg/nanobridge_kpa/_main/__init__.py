"""
main

hands argv to the subcommand framework as `nanobridge-kpa <subcommand>`
"""

import sys

from ..commands import COMMANDS
from ..framework import main as framework_main


def main(
    argv: list = sys.argv[1:],
) -> int:
    """
    main
    """
    return framework_main(commands=COMMANDS, argv=argv)
