""" nanobridge_kpa """

from ._main import main
from .meta import *
