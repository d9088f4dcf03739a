"""Clifford modules, Dirac operators and their action functionals on finite-difference grids."""

__version__ = "0.1.0"
