"""Level-set transport velocities for evaporating interfaces.

Three formulations: a local one (fluid velocity plus mdot/rho_eff along the
normal, exact for flat interfaces under the reciprocal density interpolation)
and two based on extending the fluid velocity from the liquid or gas end of
the interface region to the whole band via closest-point projection.  Two
extra variants cover the no-phase-change case (plain local velocity, and the
extension of the velocity from the zero isosurface).

Transport velocities are evaluated on the MAC faces that carry them into the
advection operator; this keeps the flat-interface cancellation between the
discrete fluid velocity and the mdot/rho term exact.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .exceptions import ConfigurationError, ProjectionError
from .grid import CENTER, Grid, ScalarField, VectorField, center_to_faces
from .levelset import GRAD_FLOOR, LevelSetState, signed_distance
from .properties import ARITHMETIC, RECIPROCAL, EvaporationModel, PhasePair

PHI_LIQUID_END = float(np.tanh(1.5))
PHI_GAS_END = float(-np.tanh(1.5))


class TransportVariant(enum.Enum):
    """Which transport-velocity formulation advects the level set."""

    V1 = "v1"  # local velocity + (mdot/rho_eff) n
    V2 = "v2"  # liquid-end extension + (mdot/rho_l) n
    V3 = "v3"  # gas-end extension + (mdot/rho_g) n
    NO_PHASE_CHANGE_LOCAL = "nc-local"
    NO_PHASE_CHANGE_EXTENDED = "nc-extended"


@dataclass
class CppConfig:
    """Closest-point projection controls.

    ``phi_lim`` bounds the narrow band in which transport velocities are
    evaluated; tanh(2.0) covers the Heaviside support |d| < 3 eps with margin.
    ``tol`` defaults to 1e-10 times the largest domain extent.
    """

    phi_lim: float = float(np.tanh(2.0))
    k_max: int = 20
    tol: float = None

    def __post_init__(self):
        if not 0.0 < self.phi_lim < 1.0:
            raise ConfigurationError("phi_lim must lie in (0, 1)")
        if self.k_max < 1:
            raise ConfigurationError("k_max must be at least 1")
        if self.tol is not None and self.tol <= 0:
            raise ConfigurationError("projection tolerance must be positive")

    def resolved_tol(self, grid: Grid) -> float:
        return self.tol if self.tol is not None else 1e-10 * max(grid.extents)


def _location_offsets(grid, location):
    first = [grid.axis_coords(location, a)[0] for a in range(grid.dim)]
    return first


def sample(grid: Grid, data, location, pts):
    """Multilinear sample of a storage array at physical points (clamped at edges)."""
    pts = np.atleast_2d(pts)
    if grid.dim == 1:
        coords = grid.axis_coords(location, 0)
        return np.interp(pts[:, 0], coords, data)
    first = _location_offsets(grid, location)
    out = np.empty(pts.shape[0])
    kernels.bilinear(
        np.ascontiguousarray(data),
        first[0],
        first[1],
        1.0 / grid.spacing[0],
        1.0 / grid.spacing[1],
        np.ascontiguousarray(pts[:, 0]),
        np.ascontiguousarray(pts[:, 1]),
        out,
    )
    return out


def _sample_normal(state: LevelSetState, pts):
    comps = [sample(state.grid, c, CENTER, pts) for c in state.normal.components]
    mag = np.sqrt(sum(c * c for c in comps))
    mag = np.maximum(mag, GRAD_FLOOR)
    return [c / mag for c in comps]


@dataclass
class ProjectionResult:
    points: np.ndarray
    converged: np.ndarray
    iterations: int
    distance_residual: np.ndarray
    tangent_residual: np.ndarray


def closest_point_batch(pts, state: LevelSetState, target_iso: float, cfg: CppConfig = None) -> ProjectionResult:
    """Project points onto the level-set isosurface phi = target_iso.

    Fixed-point iteration of normal corrections (one tangential correction per
    cycle in 2D; the tangent set is empty in 1D) until consecutive iterates
    move less than the tolerance.
    """
    cfg = cfg or CppConfig()
    g = state.grid
    if state.normal is None:
        raise ConfigurationError("state has no normal field; call refresh_geometry first")
    pts = np.atleast_2d(np.asarray(pts, dtype=float)).copy()
    x0 = pts.copy()
    tol = cfg.resolved_tol(g)
    d_target = float(signed_distance(np.asarray(target_iso), state.eps))
    lo = np.asarray(g.origin)
    hi = np.asarray(g.upper)

    active = np.ones(pts.shape[0], dtype=bool)
    it = 0
    for it in range(1, cfg.k_max + 1):
        if not np.any(active):
            break
        y = pts[active]
        prev = y.copy()
        phi_y = sample(g, state.phi.data, CENTER, y)
        d_y = signed_distance(phi_y, state.eps)
        n_y = _sample_normal(state, y)
        for a in range(g.dim):
            y[:, a] += (d_target - d_y) * n_y[a]
        if g.dim == 2:
            n_y = _sample_normal(state, y)
            tx, ty = n_y[1], -n_y[0]
            off = (y[:, 0] - x0[active][:, 0]) * tx + (y[:, 1] - x0[active][:, 1]) * ty
            y[:, 0] -= off * tx
            y[:, 1] -= off * ty
        np.clip(y, lo, hi, out=y)
        moved = np.linalg.norm(y - prev, axis=1)
        pts[active] = y
        still = moved >= tol
        idx = np.flatnonzero(active)
        active[idx[~still]] = False

    phi_end = sample(g, state.phi.data, CENTER, pts)
    dist_res = np.abs(signed_distance(phi_end, state.eps) - d_target)
    if g.dim == 2:
        n_end = _sample_normal(state, pts)
        tx, ty = n_end[1], -n_end[0]
        tan_res = np.abs((pts[:, 0] - x0[:, 0]) * tx + (pts[:, 1] - x0[:, 1]) * ty)
    else:
        tan_res = np.zeros(pts.shape[0])
    return ProjectionResult(pts, ~active, it, dist_res, tan_res)


def closest_point(x, state: LevelSetState, target_iso: float, cfg: CppConfig = None):
    """Single-point projection; raises ProjectionError if it does not converge."""
    res = closest_point_batch(np.atleast_2d(x), state, target_iso, cfg)
    if not bool(res.converged[0]):
        raise ProjectionError(
            "closest-point projection did not converge",
            last_points=res.points,
            residuals=(res.distance_residual, res.tangent_residual),
        )
    return res.points[0]


def _component_points(grid: Grid, location):
    coords = grid.coords(location)
    if grid.dim == 1:
        return coords[0][:, None]
    return np.column_stack([c.ravel() for c in coords])


def extend_field(u: VectorField, state: LevelSetState, target_iso: float, cfg: CppConfig = None):
    """Extend a field from a level-set isosurface across the narrow band.

    Every band point takes the field value interpolated at its closest point
    on the target isosurface; points outside the band, and band points whose
    projection fails, keep their local value (failures are counted in the
    returned diagnostics).
    """
    cfg = cfg or CppConfig()
    g = state.grid
    out = []
    failures = 0
    band_total = 0
    for comp, loc in zip(u.components, u.locations):
        pts = _component_points(g, loc)
        phi_pts = sample(g, state.phi.data, CENTER, pts)
        band = np.abs(phi_pts) < cfg.phi_lim
        new = comp.copy()
        if np.any(band):
            res = closest_point_batch(pts[band], state, target_iso, cfg)
            vals = sample(g, comp, loc, res.points)
            flat = new.reshape(-1)
            idx = np.flatnonzero(band)
            ok = res.converged
            flat[idx[ok]] = vals[ok]
            failures += int(np.count_nonzero(~ok))
            band_total += int(band.sum())
        out.append(new.reshape(comp.shape))
    field = VectorField(g, tuple(out), u.locations)
    diagnostics = {"projection_failures": failures, "band_points": band_total}
    return field, diagnostics


def _face_normals_renormalized(state: LevelSetState):
    """Center normals averaged to each face set and renormalized."""
    g = state.grid
    per_set = []
    for a in range(g.dim):
        comps = [center_to_faces(c, g)[a] for c in state.normal.components]
        mag = np.maximum(np.sqrt(sum(c * c for c in comps)), GRAD_FLOOR)
        per_set.append([c / mag for c in comps])
    return per_set


SATURATION_LIMIT = 1.0 - 1e-9


def _face_band_masks(state: LevelSetState, cfg: CppConfig):
    """Per face set: (narrow-band mask, unsaturated mask).

    The variant formulas are evaluated in the narrow band |phi| < phi_lim.
    Between the band edge and float saturation of the tanh tail the local
    formula is still applied: there the fluid velocity alone would stretch
    the profile tail at the full jump velocity, while the local form
    reproduces the sharp interface speed by construction.  Only where phi is
    numerically saturated (the normal degenerates) is u_Gamma = u used.
    """
    g = state.grid
    phi_f = center_to_faces(state.phi.data, g)
    band = [np.abs(f) < cfg.phi_lim for f in phi_f[: g.dim]]
    unsat = [np.abs(f) < SATURATION_LIMIT for f in phi_f[: g.dim]]
    return band, unsat


def _mdot_on(grid, mdot, location, shape):
    if isinstance(mdot, EvaporationModel):
        if mdot.is_constant:
            return float(mdot.value)
        centers = mdot.field_at(grid)
        pts = _component_points(grid, location)
        return sample(grid, centers, CENTER, pts).reshape(shape)
    if np.isscalar(mdot):
        return float(mdot)
    return np.asarray(mdot)


def _require_mac(u: VectorField):
    if not u.is_mac:
        raise ConfigurationError("transport velocities are evaluated on MAC faces")


def ugamma_v1(
    u: VectorField,
    mdot,
    rho_eff: ScalarField,
    normal: VectorField,
    state: LevelSetState,
    cfg: CppConfig = None,
    density_mode: str = RECIPROCAL,
) -> VectorField:
    """Local transport velocity u + (mdot / rho_eff) n wherever phi is unsaturated.

    Only divergence-free (and flat-interface exact) under the reciprocal
    density interpolation; an arithmetic density triggers a warning.
    """
    _require_mac(u)
    if density_mode == ARITHMETIC:
        warnings.warn(
            "transport variant v1 with arithmetic density interpolation is inconsistent",
            stacklevel=2,
        )
    cfg = cfg or CppConfig()
    g = state.grid
    inv_rho_c = 1.0 / rho_eff.data
    if density_mode == RECIPROCAL:
        inv_rho_f = center_to_faces(inv_rho_c, g)
    else:
        inv_rho_f = tuple(1.0 / f for f in center_to_faces(rho_eff.data, g))
    nf = _face_normals_renormalized(state)
    _, unsat = _face_band_masks(state, cfg)
    comps = []
    for a in range(g.dim):
        m = _mdot_on(g, mdot, u.locations[a], u.components[a].shape)
        add = m * inv_rho_f[a] * nf[a][a]
        comps.append(u.components[a] + np.where(unsat[a], add, 0.0))
    return VectorField(g, tuple(comps), u.locations)


def _ugamma_extension(u, mdot, pair, state, cfg, target_iso, rho_end, density_mode, diagnostics=None):
    """Extension-based transport velocity.

    Narrow band: velocity interpolated at the closest point on the target
    isosurface plus (mdot/rho_end) n.  Unsaturated tanh tail outside the band
    (and any band point whose projection fails): the local formula, which
    keeps the profile tail co-moving with the interface.  Saturated far
    field: the fluid velocity.
    """
    _require_mac(u)
    cfg = cfg or CppConfig()
    g = state.grid
    nf = _face_normals_renormalized(state)
    band, unsat = _face_band_masks(state, cfg)
    comps = []
    failures = 0

    def inv_rho_at(pts):
        h_pts = _heaviside_at_points(state, pts)
        if density_mode == RECIPROCAL:
            return h_pts / pair.rho_l + (1.0 - h_pts) / pair.rho_g
        return 1.0 / (h_pts * pair.rho_l + (1.0 - h_pts) * pair.rho_g)

    for a in range(g.dim):
        comp = u.components[a]
        loc = u.locations[a]
        pts = _component_points(g, loc)
        bmask = band[a].reshape(-1)
        n_flat = nf[a][a].reshape(-1)
        m = _mdot_on(g, mdot, loc, comp.shape)
        m_of = (lambda idx: m) if np.isscalar(m) else (lambda idx: m.reshape(-1)[idx])
        new = comp.copy().reshape(-1)

        tail = unsat[a].reshape(-1) & ~bmask
        if np.any(tail):
            idx = np.flatnonzero(tail)
            new[idx] += m_of(idx) * inv_rho_at(pts[idx]) * n_flat[idx]
        if np.any(bmask):
            res = closest_point_batch(pts[bmask], state, target_iso, cfg)
            vals = sample(g, comp, loc, res.points)
            idx = np.flatnonzero(bmask)
            ok = res.converged
            new[idx[ok]] = vals[ok] + (m_of(idx[ok]) / rho_end) * n_flat[idx[ok]]
            if np.any(~ok):
                failures += int(np.count_nonzero(~ok))
                bad = idx[~ok]
                new[bad] = comp.reshape(-1)[bad] + m_of(bad) * inv_rho_at(pts[bad]) * n_flat[bad]
        comps.append(new.reshape(comp.shape))
    if diagnostics is not None:
        diagnostics["projection_failures"] = diagnostics.get("projection_failures", 0) + failures
    return VectorField(g, tuple(comps), u.locations)


def _heaviside_at_points(state, pts):
    from .levelset import heaviside_of_distance

    phi = sample(state.grid, state.phi.data, CENTER, pts)
    return heaviside_of_distance(signed_distance(phi, state.eps), state.eps)


def ugamma_v2(u, mdot, pair: PhasePair, state: LevelSetState, cfg: CppConfig = None, density_mode=RECIPROCAL, diagnostics=None):
    """Liquid-end extension: u evaluated at the phi = tanh(1.5) isosurface plus (mdot/rho_l) n."""
    return _ugamma_extension(u, mdot, pair, state, cfg, PHI_LIQUID_END, pair.rho_l, density_mode, diagnostics)


def ugamma_v3(u, mdot, pair: PhasePair, state: LevelSetState, cfg: CppConfig = None, density_mode=RECIPROCAL, diagnostics=None):
    """Gas-end extension: u evaluated at the phi = -tanh(1.5) isosurface plus (mdot/rho_g) n."""
    return _ugamma_extension(u, mdot, pair, state, cfg, PHI_GAS_END, pair.rho_g, density_mode, diagnostics)


def ugamma_extended_no_phase_change(u, state: LevelSetState, cfg: CppConfig = None):
    """Extension of the fluid velocity from the zero isosurface (mdot = 0)."""
    field, _ = extend_field(u, state, 0.0, cfg)
    return field


def transport_velocity(
    u: VectorField,
    mdot,
    pair: PhasePair,
    state: LevelSetState,
    variant,
    cfg: CppConfig = None,
    density_mode: str = RECIPROCAL,
    rho_eff: ScalarField = None,
    diagnostics=None,
):
    """Dispatch to the selected transport-velocity formulation."""
    variant = TransportVariant(variant) if not isinstance(variant, TransportVariant) else variant
    if variant is TransportVariant.NO_PHASE_CHANGE_LOCAL:
        return u.copy()
    if variant is TransportVariant.NO_PHASE_CHANGE_EXTENDED:
        return ugamma_extended_no_phase_change(u, state, cfg)
    if variant is TransportVariant.V1:
        if rho_eff is None:
            from .levelset import heaviside
            from .properties import effective_density

            rho_eff = effective_density(heaviside(state), pair, density_mode)
        return ugamma_v1(u, mdot, rho_eff, state.normal, state, cfg, density_mode)
    if variant is TransportVariant.V2:
        return ugamma_v2(u, mdot, pair, state, cfg, density_mode, diagnostics)
    if variant is TransportVariant.V3:
        return ugamma_v3(u, mdot, pair, state, cfg, density_mode, diagnostics)
    raise ConfigurationError(f"unknown transport variant {variant!r}")


def sharp_ugamma(u_l, mdot, pair: PhasePair, normal):
    """Sharp-model transport velocity from the liquid-side velocity.

    Returns the liquid form u_l + (mdot/rho_l) n and the gas form
    u_g + (mdot/rho_g) n, with the gas-side velocity constructed from the
    mass-conservation jump u_g = u_l - mdot (1/rho_g - 1/rho_l) n for the
    normal n pointing into the liquid.  The two forms agree identically,
    which makes this a convenient cross-check utility.
    """
    u_l = np.asarray(u_l, dtype=float)
    n = np.asarray(normal, dtype=float)
    liquid = u_l + (mdot / pair.rho_l) * n
    u_g = u_l - mdot * (1.0 / pair.rho_g - 1.0 / pair.rho_l) * n
    gas = u_g + (mdot / pair.rho_g) * n
    return {"liquid": liquid, "gas": gas}
