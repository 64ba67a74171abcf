"""Numerical workbench for a symmetric six-wire surface-electrode Paul trap."""

from sixwire.geometry import Electrode, ElectrodeLayout, LayoutError, load_layout, reconstruct_six_wire
from sixwire.fields import OperatingPoint

__all__ = [
    "Electrode",
    "ElectrodeLayout",
    "LayoutError",
    "OperatingPoint",
    "load_layout",
    "reconstruct_six_wire",
]

__version__ = "0.1.0"
