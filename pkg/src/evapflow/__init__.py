"""Diffuse-interface incompressible two-phase flow with rapid evaporation.

Structured-grid solver library and benchmark CLI: conservative level set,
reciprocal density interpolation, evaporative dilation source, density-scaled
surface tension, corrected viscous stress and three level-set
transport-velocity formulations, verified against closed-form references.
"""

from .backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
