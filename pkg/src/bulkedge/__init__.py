"""Numerical verification of the curved bulk-edge correspondence for 2D
lattice topological insulators: Hall / geometric-bulk / edge conductances
from windowed trace formulas, and intersection numbers from exact discrete
geometry."""

__version__ = "0.1.0"
