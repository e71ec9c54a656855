"""Conservative level-set representation of the liquid-gas interface.

The level set is a regularized indicator phi in [-1, 1], the tanh of signed
distance over twice the interface thickness parameter eps.  This module owns
initialization, the smoothed Heaviside/delta pair, filtered normals and
curvature, Crank-Nicolson advection, the conservative reinitialization PDE and
the per-time-step orchestration (fixed-point coupling of transport velocity
and advection, then reinitialization, then geometry).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import CflError, ConfigurationError
from .grid import (
    CENTER,
    XFACE,
    YFACE,
    Grid,
    ScalarField,
    VectorField,
    center_to_faces,
    divergence,
    gradient,
)
from .solvers import NeumannHelmholtz, bicgstab, cg

GRAD_FLOOR = 1e-12
PHI_CLAMP = 1.0 - 1e-12
FIXED_POINT_TOL = 1e-8
FIXED_POINT_MAX_ITER = 10
LINSOLVE_TOL = 1e-10


@dataclass
class ReinitParams:
    """Pseudo-time controls for the reinitialization PDE.

    ``dtau`` defaults to min(eps, dt); the steady-state tolerance applies to
    the max-norm of a pseudo-step update and defaults to 1e-6 * (dtau/eps);
    the step budget defaults to twice the number of cells across the band.
    """

    dtau: float = None
    max_steps: int = None
    tol: float = None

    def resolved(self, state, dt=None):
        eps = state.eps
        h = min(state.grid.spacing)
        dtau = self.dtau
        if dtau is None:
            dtau = min(eps, dt) if dt is not None else eps
        if dtau <= 0:
            raise ConfigurationError("reinitialization pseudo-time step must be positive")
        tol = self.tol if self.tol is not None else 1e-6 * (dtau / eps)
        if tol < 0:
            raise ConfigurationError("reinitialization tolerance must be non-negative")
        max_steps = self.max_steps
        if max_steps is None:
            max_steps = max(2, int(np.ceil(2 * 6 * eps / h)))
        return dtau, max_steps, tol


@dataclass
class LevelSetState:
    """Level set plus derived interface geometry.

    ``normal`` is the filtered unit normal (pointing into the liquid, where
    phi > 0); ``curvature`` the filtered mean curvature -div(n).  Both are
    refreshed by :func:`refresh_geometry`; ``saturated_count`` counts the
    far-field points clamped before the distance inversion.
    """

    phi: ScalarField
    eps: float
    eta_n: float = 2.0
    eta_kappa: float = 2.0
    normal: VectorField = None
    curvature: ScalarField = None
    saturated_count: int = 0

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    def copy_with(self, phi_data):
        phi = ScalarField(self.grid, phi_data, CENTER)
        return LevelSetState(phi, self.eps, self.eta_n, self.eta_kappa)


def init_tanh(grid: Grid, distance, eps: float, eta_n: float = 2.0, eta_kappa: float = 2.0) -> LevelSetState:
    """Regularized indicator tanh(d / 2 eps) from a signed distance function.

    ``distance`` is a callable of the center coordinates or an array; positive
    in the liquid.
    """
    if eps <= 0:
        raise ConfigurationError("interface thickness parameter eps must be positive")
    if callable(distance):
        d = np.asarray(distance(*grid.coords(CENTER)), dtype=float)
    else:
        d = np.asarray(distance, dtype=float)
    phi = ScalarField(grid, np.tanh(d / (2.0 * eps)), CENTER)
    state = LevelSetState(phi, eps, eta_n, eta_kappa)
    refresh_geometry(state)
    return state


def signed_distance(phi, eps: float):
    """Invert the tanh profile: d = eps * log((1+phi)/(1-phi)).

    Saturated values are clamped to +-(1 - 1e-12); the caller can count them
    via :func:`saturated_mask`.
    """
    p = np.clip(np.asarray(phi, dtype=float), -PHI_CLAMP, PHI_CLAMP)
    return eps * np.log((1.0 + p) / (1.0 - p))


def saturated_mask(phi):
    return np.abs(np.asarray(phi)) >= PHI_CLAMP


def heaviside_of_distance(d, eps: float):
    """Smoothed Heaviside: 0 below -3 eps, 1 above 3 eps, cubic-sine blend between."""
    d = np.asarray(d, dtype=float)
    x = np.clip(d / (3.0 * eps), -1.0, 1.0)
    h = 0.5 + 0.5 * x + np.sin(np.pi * x) / (2.0 * np.pi)
    return np.where(d <= -3.0 * eps, 0.0, np.where(d >= 3.0 * eps, 1.0, h))


def heaviside(state: LevelSetState) -> ScalarField:
    d = signed_distance(state.phi.data, state.eps)
    return ScalarField(state.grid, heaviside_of_distance(d, state.eps), CENTER)


def dirac_delta(state: LevelSetState, H: ScalarField = None) -> ScalarField:
    """delta = ||grad H||, masked to the band |d| < 3 eps."""
    if H is None:
        H = heaviside(state)
    g = gradient(H)
    mag = np.sqrt(sum(c * c for c in g.components))
    d = signed_distance(state.phi.data, state.eps)
    mag[np.abs(d) >= 3.0 * state.eps] = 0.0
    return ScalarField(state.grid, mag, CENTER)


def _neumann_laplacian(grid: Grid, x):
    """Flux-form Laplacian with zero-flux boundaries (radial metric included)."""
    hx = grid.spacing[0]
    if grid.dim == 1:
        flux = np.zeros(grid.cells[0] + 1)
        flux[1:-1] = (x[1:] - x[:-1]) / hx
        if grid.axisymmetric:
            r_f = grid.axis_coords(XFACE, 0)
            r_c = grid.axis_coords(CENTER, 0)
            return (r_f[1:] * flux[1:] - r_f[:-1] * flux[:-1]) / (r_c * hx)
        return (flux[1:] - flux[:-1]) / hx
    hy = grid.spacing[1]
    out = np.zeros_like(x)
    out[:-1, :] += (x[1:, :] - x[:-1, :]) / hx**2
    out[1:, :] -= (x[1:, :] - x[:-1, :]) / hx**2
    out[:, :-1] += (x[:, 1:] - x[:, :-1]) / hy**2
    out[:, 1:] -= (x[:, 1:] - x[:, :-1]) / hy**2
    return out


def helmholtz_filter(grid: Grid, data, eta: float):
    """Solve (I - eta h^2 Lap) x = data with homogeneous Neumann conditions.

    Uniform Cartesian grids use the exact cosine-transform factorization;
    radial grids fall back to conjugate gradients on the metric Laplacian.
    """
    if eta == 0.0:
        return data.copy()
    coef = eta * grid.filter_length**2
    if not grid.axisymmetric:
        return NeumannHelmholtz(grid, coef).solve(data)
    apply_a = lambda x: x - coef * _neumann_laplacian(grid, x)
    x, info = cg(apply_a, data, x0=data.copy(), tol=LINSOLVE_TOL, max_iter=2000)
    if not info["converged"]:
        from .exceptions import SolverError

        raise SolverError(
            f"geometry filter stalled at residual {info['residual']:.3e}",
            residual=info["residual"],
            iterations=info["iterations"],
        )
    return x


def _raw_normal(state: LevelSetState):
    g = gradient(state.phi)
    mag = np.sqrt(sum(c * c for c in g.components))
    mag = np.maximum(mag, GRAD_FLOOR)
    return tuple(c / mag for c in g.components)


def compute_normal(state: LevelSetState) -> VectorField:
    """Filtered unit interface normal grad(phi)/|grad(phi)|.

    The raw normalized gradient is smoothed by the Helmholtz filter with
    radius eta_n h^2, then renormalized.  eta_n = 0 returns the raw normal.
    """
    raw = _raw_normal(state)
    if state.eta_n == 0.0:
        return VectorField(state.grid, raw, (CENTER,) * state.grid.dim)
    filt = tuple(helmholtz_filter(state.grid, c, state.eta_n) for c in raw)
    mag = np.sqrt(sum(c * c for c in filt))
    mag = np.maximum(mag, GRAD_FLOOR)
    return VectorField(state.grid, tuple(c / mag for c in filt), (CENTER,) * state.grid.dim)


def compute_curvature(state: LevelSetState, normal: VectorField = None) -> ScalarField:
    """Filtered mean curvature kappa = -div(n_Gamma).

    With the normal pointing into the liquid this is positive for a liquid
    drop (e.g. +1/R for a 2D disk of radius R), which together with the
    surface tension force alpha kappa n delta_rho gives the Laplace pressure
    rise inside the drop.
    """
    if normal is None:
        normal = state.normal if state.normal is not None else compute_normal(state)
    kraw = -divergence(normal).data
    kf = helmholtz_filter(state.grid, kraw, state.eta_kappa) if state.eta_kappa else kraw
    return ScalarField(state.grid, kf, CENTER)


def refresh_geometry(state: LevelSetState):
    state.normal = compute_normal(state)
    state.curvature = compute_curvature(state, state.normal)
    state.saturated_count = int(np.count_nonzero(saturated_mask(state.phi.data)))
    return state


# ---------------------------------------------------------------------------
# advection


def _ghost(arr, axis, side, bc, is_upper):
    """Ghost layer value per boundary condition: (kind, value)."""
    sl = tuple(
        slice(None) if a != axis else (-1 if is_upper else 0) for a in range(arr.ndim)
    )
    edge = arr[sl]
    kind = bc[0]
    if kind == "dirichlet":
        return 2.0 * bc[1] - edge
    return edge.copy() if hasattr(edge, "copy") else edge  # neumann: zero gradient


def _advection_apply(grid, u_faces, phi, phi_bcs):
    """Skew-form u . grad(phi) with face velocities; returns cell-center array.

    Face velocities multiply one-sided differences so that a constant
    transport velocity advects the profile exactly like the plain central
    scheme, while a conservative-consistent face weighting is kept.
    """
    hx = grid.spacing[0]
    if grid.dim == 1:
        u = u_faces[0]
        gl = _ghost(phi, 0, None, phi_bcs["left"], False)
        gr = _ghost(phi, 0, None, phi_bcs["right"], True)
        ext = np.concatenate([[gl], phi, [gr]])
        dplus = ext[2:] - ext[1:-1]
        dminus = ext[1:-1] - ext[:-2]
        return (u[1:] * dplus + u[:-1] * dminus) / (2.0 * hx)
    hy = grid.spacing[1]
    ux, uy = u_faces
    nx, ny = phi.shape
    extx = np.empty((nx + 2, ny))
    extx[1:-1, :] = phi
    extx[0, :] = _ghost(phi, 0, None, phi_bcs["left"], False)
    extx[-1, :] = _ghost(phi, 0, None, phi_bcs["right"], True)
    exty = np.empty((nx, ny + 2))
    exty[:, 1:-1] = phi
    exty[:, 0] = _ghost(phi, 1, None, phi_bcs["bottom"], False)
    exty[:, -1] = _ghost(phi, 1, None, phi_bcs["top"], True)
    out = (ux[1:, :] * (extx[2:, :] - extx[1:-1, :]) + ux[:-1, :] * (extx[1:-1, :] - extx[:-2, :])) / (2.0 * hx)
    out += (uy[:, 1:] * (exty[:, 2:] - exty[:, 1:-1]) + uy[:, :-1] * (exty[:, 1:-1] - exty[:, :-2])) / (2.0 * hy)
    return out


def default_phi_bcs(grid: Grid):
    sides = ("left", "right") if grid.dim == 1 else ("left", "right", "bottom", "top")
    return {s: ("neumann",) for s in sides}


def cfl_number(grid: Grid, u_faces, dt: float) -> float:
    return max(
        float(np.max(np.abs(u))) * dt / h for u, h in zip(u_faces, grid.spacing)
    )


def advect(state: LevelSetState, u_gamma: VectorField, dt: float, phi_bcs=None, strict: bool = True) -> LevelSetState:
    """One Crank-Nicolson step of d(phi)/dt + u_Gamma . grad(phi) = 0.

    ``u_gamma`` must be a MAC (face) vector field.  Inflow Dirichlet sides
    hold the configured far-field value, all other sides are zero-gradient.
    Enforces the advective CFL limit: warn always, raise in strict mode.
    """
    g = state.grid
    if not u_gamma.is_mac:
        raise ConfigurationError("advect expects the transport velocity on faces")
    if phi_bcs is None:
        phi_bcs = default_phi_bcs(g)
    cfl = cfl_number(g, u_gamma.components, dt)
    if cfl > 1.0 + 1e-12:
        warnings.warn(f"level-set CFL {cfl:.3f} exceeds 1", stacklevel=2)
        if strict:
            raise CflError(f"level-set CFL {cfl:.3f} exceeds 1")

    # split the affine operator into its linear part and the Dirichlet source
    hom_bcs = {
        s: (("dirichlet", 0.0) if bc[0] == "dirichlet" else bc) for s, bc in phi_bcs.items()
    }
    zero = np.zeros_like(state.phi.data)
    source = _advection_apply(g, u_gamma.components, zero, phi_bcs)
    lin = lambda x: _advection_apply(g, u_gamma.components, x, hom_bcs)

    rhs = state.phi.data - 0.5 * dt * lin(state.phi.data) - dt * source
    apply_a = lambda x: x + 0.5 * dt * lin(x)
    sol, info = bicgstab(apply_a, rhs, x0=state.phi.data.copy(), tol=LINSOLVE_TOL, max_iter=400)
    if not info["converged"]:
        from .exceptions import SolverError

        raise SolverError(
            f"level-set advection solve stalled at residual {info['residual']:.3e}",
            residual=info["residual"],
            iterations=info["iterations"],
        )
    return state.copy_with(np.clip(sol, -1.0, 1.0))


# ---------------------------------------------------------------------------
# reinitialization


def _face_normals(grid: Grid, normal: VectorField):
    """Average center normals to faces, one tuple of component arrays per face set."""
    comps_on_x = tuple(center_to_faces(c, grid)[0] for c in normal.components)
    if grid.dim == 1:
        return (comps_on_x,)
    comps_on_y = tuple(center_to_faces(c, grid)[1] for c in normal.components)
    return (comps_on_x, comps_on_y)


def _mac_divergence_arrays(grid: Grid, fluxes):
    hx = grid.spacing[0]
    if grid.dim == 1:
        fx = fluxes[0]
        if grid.axisymmetric:
            r_f = grid.axis_coords(XFACE, 0)
            r_c = grid.axis_coords(CENTER, 0)
            return (r_f[1:] * fx[1:] - r_f[:-1] * fx[:-1]) / (r_c * hx)
        return (fx[1:] - fx[:-1]) / hx
    fx, fy = fluxes
    return (fx[1:, :] - fx[:-1, :]) / hx + (fy[:, 1:] - fy[:, :-1]) / grid.spacing[1]


def _center_gradient_components(grid, x):
    from .grid import _ddx

    return tuple(_ddx(x, grid.spacing[a], a) for a in range(grid.dim))


def _normal_diffusion(grid: Grid, psi, nf):
    """div((grad(psi) . n) n) in conservative face-flux form, zero boundary flux."""
    hx = grid.spacing[0]
    grads_c = _center_gradient_components(grid, psi)
    if grid.dim == 1:
        (nxf,) = nf[0]
        fx = np.zeros(grid.cells[0] + 1)
        dpsi = (psi[1:] - psi[:-1]) / hx
        fx[1:-1] = dpsi * nxf[1:-1] * nxf[1:-1]
        return _mac_divergence_arrays(grid, (fx,))
    hy = grid.spacing[1]
    nx_on_x, ny_on_x = nf[0]
    nx_on_y, ny_on_y = nf[1]
    fx = np.zeros(grid.shape(XFACE))
    dpdx = (psi[1:, :] - psi[:-1, :]) / hx
    dpdy_c = grads_c[1]
    dpdy_on_x = 0.5 * (dpdy_c[1:, :] + dpdy_c[:-1, :])
    q = dpdx * nx_on_x[1:-1, :] + dpdy_on_x * ny_on_x[1:-1, :]
    fx[1:-1, :] = q * nx_on_x[1:-1, :]
    fy = np.zeros(grid.shape(YFACE))
    dpdy = (psi[:, 1:] - psi[:, :-1]) / hy
    dpdx_c = grads_c[0]
    dpdx_on_y = 0.5 * (dpdx_c[:, 1:] + dpdx_c[:, :-1])
    q = dpdx_on_y * nx_on_y[:, 1:-1] + dpdy * ny_on_y[:, 1:-1]
    fy[:, 1:-1] = q * ny_on_y[:, 1:-1]
    return _mac_divergence_arrays(grid, (fx, fy))


def _compressive_divergence(grid: Grid, psi, nf):
    """div(((1 - psi^2)/2) n) with zero boundary flux."""
    if grid.dim == 1:
        (nxf,) = nf[0]
        psi_f = np.zeros(grid.cells[0] + 1)
        psi_f[1:-1] = 0.5 * (psi[1:] + psi[:-1])
        fx = np.zeros_like(psi_f)
        fx[1:-1] = 0.5 * (1.0 - psi_f[1:-1] ** 2) * nxf[1:-1]
        return _mac_divergence_arrays(grid, (fx,))
    nx_on_x, _ = nf[0]
    _, ny_on_y = nf[1]
    fx = np.zeros(grid.shape(XFACE))
    psi_fx = 0.5 * (psi[1:, :] + psi[:-1, :])
    fx[1:-1, :] = 0.5 * (1.0 - psi_fx**2) * nx_on_x[1:-1, :]
    fy = np.zeros(grid.shape(YFACE))
    psi_fy = 0.5 * (psi[:, 1:] + psi[:, :-1])
    fy[:, 1:-1] = 0.5 * (1.0 - psi_fy**2) * ny_on_y[:, 1:-1]
    return _mac_divergence_arrays(grid, (fx, fy))


def reinitialize(state: LevelSetState, params: ReinitParams = None, dt: float = None) -> LevelSetState:
    """Relax phi back to the tanh profile of its own zero set.

    Pseudo-time integration of the conservative reinitialization PDE
    (compressive flux explicit, interface-normal diffusion implicit) with the
    normal field frozen at pseudo-time zero.  Stops at steady state or after
    the step budget, warning if the tolerance was not met.  The face-flux form
    conserves the discrete integral of phi exactly.
    """
    params = params or ReinitParams()
    g = state.grid
    dtau, max_steps, tol = params.resolved(state, dt)
    normal = state.normal if state.normal is not None else compute_normal(state)
    nf = _face_normals(g, normal)
    eps = state.eps

    psi = state.phi.data.copy()
    apply_a = lambda x: x - dtau * eps * _normal_diffusion(g, x, nf)
    precond = None
    if not g.axisymmetric:
        # the isotropic Helmholtz operator bounds the normal-projected one,
        # so its exact cosine-transform inverse is a strong preconditioner
        precond = NeumannHelmholtz(g, dtau * eps).solve
    update = np.inf
    steps = 0
    for steps in range(1, max_steps + 1):
        rhs = psi - dtau * _compressive_divergence(g, psi, nf)
        new_psi, info = cg(apply_a, rhs, x0=psi.copy(), tol=LINSOLVE_TOL, max_iter=500, precond=precond)
        if not info["converged"]:
            warnings.warn("reinitialization diffusion solve stalled", stacklevel=2)
        update = float(np.max(np.abs(new_psi - psi)))
        psi = new_psi
        if update < tol:
            break
    else:
        steps = max_steps
    if update >= tol:
        warnings.warn("reinitialization hit its pseudo-step budget before steady state", stacklevel=2)
    out = state.copy_with(np.clip(psi, -1.0, 1.0))
    out.saturated_count = state.saturated_count
    out.reinit_info = {"steps": steps, "last_update": update, "tol": tol}
    return out


# ---------------------------------------------------------------------------
# per-time-step orchestration


def level_set_step(
    state: LevelSetState,
    u: VectorField,
    mdot,
    variant,
    dt: float,
    pair,
    density_mode: str = "reciprocal",
    cpp_cfg=None,
    phi_bcs=None,
    reinit_params: ReinitParams = None,
    strict: bool = True,
):
    """Advance the level set by one time step.

    Fixed-point loop: update the filtered normal, evaluate the transport
    velocity for the selected variant on the current iterate, re-advect the
    original field, until the iterate moves less than 1e-8 (max-norm) or ten
    iterations; then reinitialize and refresh normal and curvature.
    """
    from . import transport

    g = state.grid
    work = LevelSetState(state.phi.copy(), state.eps, state.eta_n, state.eta_kappa)
    work.normal = state.normal if state.normal is not None else compute_normal(work)

    n_iters = 0
    diff = np.inf
    u_gamma = None
    for n_iters in range(1, FIXED_POINT_MAX_ITER + 1):
        u_gamma = transport.transport_velocity(
            u, mdot, pair, work, variant, cfg=cpp_cfg, density_mode=density_mode
        )
        advected = advect(state, u_gamma, dt, phi_bcs=phi_bcs, strict=strict)
        diff = float(np.max(np.abs(advected.phi.data - work.phi.data)))
        work = advected
        if diff < FIXED_POINT_TOL:
            break
        work.normal = compute_normal(work)
    if diff >= FIXED_POINT_TOL:
        warnings.warn(
            f"level-set fixed point stopped after {FIXED_POINT_MAX_ITER} iterations "
            f"(last update {diff:.2e})",
            stacklevel=2,
        )

    work.normal = compute_normal(work)
    work = reinitialize(work, reinit_params, dt=dt)
    refresh_geometry(work)
    work.last_u_gamma = u_gamma
    work.fixed_point_iterations = n_iters
    return work
