"""Reduced filtered K-theory of graph algebras over finite T0-spaces."""

from .finspace import FiniteT0Space, SpaceError
from .graphcore import GraphError, LabeledGraph
from .rmod import ModuleError, ModuleIso, PointedRModule, RModule
from .zlattice import FgAbGroup, GroupHom, IntMatrix, LatticeError

__all__ = [
    "FgAbGroup", "FiniteT0Space", "GraphError", "GroupHom", "IntMatrix", "LabeledGraph",
    "LatticeError", "ModuleError", "ModuleIso", "PointedRModule", "RModule", "SpaceError",
]
__version__ = "0.1.0"
