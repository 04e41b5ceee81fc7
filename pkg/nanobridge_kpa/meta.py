"""
Package metadata
"""

__author__ = "IAS"
__version__ = "0.1.0"
__title__ = "nanobridge_kpa"
__license__ = "License :: OSI Approved :: MIT License"
__description__ = (
    "Simulator and calibration toolkit for nanobridge kinetic-inductance "
    "parametric amplifiers"
)
