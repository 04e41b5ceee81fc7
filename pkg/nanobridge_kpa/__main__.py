#!/usr/bin/env python3
"""
Simulator and calibration toolkit for nanobridge kinetic-inductance parametric
amplifiers
"""
import sys

from ._main import main

if __name__ == "__main__":
    sys.exit(main())
