"""Effective material properties and diffuse interface source terms.

Phase-fraction interpolation of density/viscosity, the evaporative dilation
rate feeding the divergence constraint, the recoil-pressure diagnostic and the
density-scaled surface tension force.  Everything here is a pure pointwise map
of the smoothed phase indicator H in [0, 1].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError
from .grid import CENTER, Grid, ScalarField, VectorField

RECIPROCAL = "reciprocal"
ARITHMETIC = "arithmetic"
_MODES = (RECIPROCAL, ARITHMETIC)


@dataclass(frozen=True)
class PhasePair:
    """Material record of the liquid/gas pair.

    Densities in kg/m^3, dynamic viscosities in Pa*s, surface tension
    coefficient in N/m, gravity vector in m/s^2.
    """

    rho_l: float
    rho_g: float
    mu_l: float = 0.0
    mu_g: float = 0.0
    alpha: float = 0.0
    g: tuple = (0.0, 0.0)

    def __post_init__(self):
        problems = []
        if self.rho_l <= 0 or self.rho_g <= 0:
            problems.append("densities must be positive")
        if self.mu_l < 0 or self.mu_g < 0:
            problems.append("viscosities must be non-negative")
        if self.alpha < 0:
            problems.append("surface tension coefficient must be non-negative")
        if problems:
            raise ConfigurationError("invalid phase pair", problems)


@dataclass
class EvaporationModel:
    """Prescribed evaporative mass flux (kg/(m^2 s)); constant or a field.

    ``value`` may be a float, an array on cell centers, or a callable of the
    center coordinates.
    """

    value: object = 0.0

    def field_at(self, grid: Grid) -> np.ndarray:
        if callable(self.value):
            out = np.asarray(self.value(*grid.coords(CENTER)), dtype=float)
        else:
            out = np.broadcast_to(np.asarray(self.value, dtype=float), grid.shape(CENTER)).copy()
        if not np.all(np.isfinite(out)):
            raise ConfigurationError("evaporative mass flux must be finite")
        return out

    @property
    def is_constant(self):
        return np.isscalar(self.value) or (
            isinstance(self.value, (int, float, np.floating)) and not callable(self.value)
        )


def _check_mode(mode):
    if mode not in _MODES:
        raise ConfigurationError(f"interpolation mode must be one of {_MODES}, got {mode!r}")


def effective_density(H: ScalarField, pair: PhasePair, mode: str = RECIPROCAL) -> ScalarField:
    """Effective density from the phase fraction.

    Reciprocal (default): 1/rho = H/rho_l + (1-H)/rho_g, the interpolation
    consistent with the dilation source.  Arithmetic: rho = H rho_l + (1-H) rho_g.
    """
    _check_mode(mode)
    h = np.clip(H.data, 0.0, 1.0)
    if mode == RECIPROCAL:
        rho = 1.0 / (h / pair.rho_l + (1.0 - h) / pair.rho_g)
    else:
        rho = h * pair.rho_l + (1.0 - h) * pair.rho_g
    return ScalarField(H.grid, rho, H.location)


def effective_viscosity(H: ScalarField, pair: PhasePair, mode: str = ARITHMETIC) -> ScalarField:
    """Effective dynamic viscosity; arithmetic phase average by default."""
    _check_mode(mode)
    h = np.clip(H.data, 0.0, 1.0)
    if mode == ARITHMETIC:
        mu = h * pair.mu_l + (1.0 - h) * pair.mu_g
    else:
        if pair.mu_l <= 0 or pair.mu_g <= 0:
            raise ConfigurationError("reciprocal viscosity interpolation needs positive viscosities")
        mu = 1.0 / (h / pair.mu_l + (1.0 - h) / pair.mu_g)
    return ScalarField(H.grid, mu, H.location)


def dilation_coefficient(pair: PhasePair) -> float:
    """Specific-volume difference 1/rho_g - 1/rho_l (positive when the gas is lighter)."""
    return 1.0 / pair.rho_g - 1.0 / pair.rho_l


def evaporative_dilation(mdot, delta: ScalarField, pair: PhasePair) -> ScalarField:
    """Dilation rate mdot (1/rho_g - 1/rho_l) delta entering div(u).

    Positive for evaporation with a lighter gas phase: the mixture expands.
    """
    m = mdot.field_at(delta.grid) if isinstance(mdot, EvaporationModel) else mdot
    return ScalarField(delta.grid, m * dilation_coefficient(pair) * delta.data, delta.location)


def recoil_pressure_diagnostic(mdot, delta: ScalarField, pair: PhasePair) -> ScalarField:
    """Band-localized recoil pressure mdot^2 (1/rho_g - 1/rho_l) delta.

    Diagnostic only: in the coupled solve the recoil jump emerges from the
    dilation source, no extra momentum term is added.
    """
    m = mdot.field_at(delta.grid) if isinstance(mdot, EvaporationModel) else mdot
    return ScalarField(delta.grid, m * m * dilation_coefficient(pair) * delta.data, delta.location)


def density_ratio_scale(pair: PhasePair) -> float:
    """Normalization c_rho of the density-scaled delta; limit 1/rho_l for equal densities."""
    if pair.rho_l == pair.rho_g:
        return 1.0 / pair.rho_l
    return (pair.rho_g - pair.rho_l) / (pair.rho_l * pair.rho_g * np.log(pair.rho_g / pair.rho_l))


def density_scaled_delta(delta: ScalarField, rho_eff: ScalarField, pair: PhasePair) -> ScalarField:
    """delta_rho = delta * rho_eff * c_rho, with unit integral along interface normals."""
    c_rho = density_ratio_scale(pair)
    return ScalarField(delta.grid, delta.data * rho_eff.data * c_rho, delta.location)


def surface_tension_force(alpha: float, kappa: ScalarField, normal: VectorField, delta_rho: ScalarField) -> VectorField:
    """Continuum surface force alpha * kappa * n * delta_rho on cell centers."""
    comps = tuple(alpha * kappa.data * n * delta_rho.data for n in normal.components)
    return VectorField(kappa.grid, comps, normal.locations)


def surface_tension_potential(H: ScalarField, pair: PhasePair) -> ScalarField:
    """Primitive G(H) with grad G = n delta_rho, used for a well-balanced face force.

    G(H) = log(rho_g / rho_eff(H)) / log(rho_g / rho_l) for the reciprocal
    density interpolation; G(0) = 0, G(1) = 1.  Degenerates to G = H for equal
    densities.
    """
    h = np.clip(H.data, 0.0, 1.0)
    if pair.rho_l == pair.rho_g:
        return ScalarField(H.grid, h.copy(), H.location)
    inv_rho = h / pair.rho_l + (1.0 - h) / pair.rho_g
    g = np.log(pair.rho_g * inv_rho) / np.log(pair.rho_g / pair.rho_l)
    return ScalarField(H.grid, g, H.location)
