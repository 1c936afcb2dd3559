"""Secrecy figures of merit for lattice coset codes on Gaussian and fading wiretap channels."""

from . import algebraic, bounds, catalog, errors, lattice, theta  # catalog registers the Leech theta source
from .lattice import Lattice

__all__ = ["Lattice", "algebraic", "bounds", "catalog", "errors", "lattice", "theta"]
__version__ = "0.1.0"
