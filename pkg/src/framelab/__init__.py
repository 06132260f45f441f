"""Quaternion-frame Lagrangian dynamics for vorticity and Elsasser fields."""
from . import errors, flows, framedyn, mhd, quat

__version__ = "0.1.0"

__all__ = ["__version__", "errors", "flows", "framedyn", "mhd", "quat"]
