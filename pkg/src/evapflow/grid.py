"""Structured Cartesian grids (1D/2D) with MAC staggering and discrete operators.

Scalars such as pressure and the level set live at cell centers, velocity
components on the faces normal to them.  A 1D grid may be flagged as
``axisymmetric``: the coordinate is then a radius and divergence, integration
and the Laplacian pick up the cylindrical metric, which is how the annular
(circular-shell) scenarios are run.

All operators are pure functions: they allocate fresh arrays and never mutate
their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigurationError, OutOfDomainError

CENTER = "center"
NODE = "node"
XFACE = "xface"
YFACE = "yface"

_LOCATIONS = (CENTER, NODE, XFACE, YFACE)


@dataclass(frozen=True)
class Grid:
    """Uniform structured grid.

    cells/extents/origin are per-axis tuples; ``spacing`` is derived.
    ``axisymmetric`` turns a 1D grid into a radial one (origin must then be a
    positive inner radius).
    """

    cells: tuple
    extents: tuple
    origin: tuple = None
    axisymmetric: bool = False

    def __post_init__(self):
        cells = tuple(int(n) for n in np.atleast_1d(self.cells))
        extents = tuple(float(e) for e in np.atleast_1d(self.extents))
        origin = self.origin
        if origin is None:
            origin = (0.0,) * len(cells)
        origin = tuple(float(o) for o in np.atleast_1d(origin))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "origin", origin)
        if len(cells) not in (1, 2):
            raise ConfigurationError("grid dimension must be 1 or 2")
        if len(extents) != len(cells) or len(origin) != len(cells):
            raise ConfigurationError("cells, extents and origin must have matching length")
        if any(n < 2 for n in cells):
            raise ConfigurationError("need at least 2 cells per axis")
        if any(e <= 0 for e in extents):
            raise ConfigurationError("extents must be strictly positive")
        if self.axisymmetric:
            if len(cells) != 1:
                raise ConfigurationError("axisymmetric mode is only defined for 1D radial grids")
            if origin[0] <= 0:
                raise ConfigurationError("axisymmetric grid needs a positive inner radius")

    @property
    def dim(self):
        return len(self.cells)

    @property
    def spacing(self):
        return tuple(e / n for e, n in zip(self.extents, self.cells))

    @property
    def filter_length(self):
        """Length scale h entering the normal/curvature filter radii.

        Largest cell diagonal divided by sqrt(dim); equals the cell edge
        length on uniform grids.
        """
        diag = float(np.sqrt(sum(h * h for h in self.spacing)))
        return diag / np.sqrt(self.dim)

    @property
    def upper(self):
        return tuple(o + e for o, e in zip(self.origin, self.extents))

    def shape(self, location):
        nx = self.cells[0]
        if self.dim == 1:
            if location == CENTER:
                return (nx,)
            if location in (NODE, XFACE):
                return (nx + 1,)
            raise ConfigurationError(f"location {location!r} undefined on a 1D grid")
        ny = self.cells[1]
        return {
            CENTER: (nx, ny),
            NODE: (nx + 1, ny + 1),
            XFACE: (nx + 1, ny),
            YFACE: (nx, ny + 1),
        }[location]

    def axis_coords(self, location, axis):
        """1D coordinate array of storage locations along ``axis``."""
        n = self.cells[axis]
        h = self.spacing[axis]
        o = self.origin[axis]
        staggered_axes = {XFACE: 0, YFACE: 1}
        if location == NODE or staggered_axes.get(location) == axis:
            return o + h * np.arange(n + 1)
        return o + h * (np.arange(n) + 0.5)

    def coords(self, location):
        """Meshgrid (indexing='ij') of storage-location coordinates."""
        axes = [self.axis_coords(location, a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def cell_volumes(self):
        """Volume (measure) of each cell; includes 2*pi*r for radial grids."""
        h = self.spacing[0]
        if self.dim == 1:
            v = np.full(self.cells[0], h)
            if self.axisymmetric:
                v = v * 2.0 * np.pi * self.axis_coords(CENTER, 0)
            return v
        return np.full(self.shape(CENTER), h * self.spacing[1])


def _check_location(location):
    if location not in _LOCATIONS:
        raise ConfigurationError(f"unknown storage location {location!r}")


@dataclass
class ScalarField:
    """One value per storage location of ``grid``."""

    grid: Grid
    data: np.ndarray
    location: str = CENTER

    def __post_init__(self):
        _check_location(self.location)
        self.data = np.asarray(self.data, dtype=float)
        expected = self.grid.shape(self.location)
        if self.data.shape != expected:
            raise ConfigurationError(
                f"field shape {self.data.shape} does not match {self.location} shape {expected}"
            )

    @classmethod
    def zeros(cls, grid, location=CENTER):
        return cls(grid, np.zeros(grid.shape(location)), location)

    @classmethod
    def from_function(cls, grid, fn, location=CENTER):
        return cls(grid, np.asarray(fn(*grid.coords(location)), dtype=float), location)

    def copy(self):
        return ScalarField(self.grid, self.data.copy(), self.location)

    def check_finite(self, name="field"):
        if not np.all(np.isfinite(self.data)):
            raise ConfigurationError(f"{name} contains non-finite values")


@dataclass
class VectorField:
    """dim component arrays; each component carries its own storage location.

    MAC velocity uses (xface, yface); geometry fields (normals, collocated
    velocity samples) use centers for every component.
    """

    grid: Grid
    components: tuple
    locations: tuple

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        locs = tuple(self.locations)
        if len(comps) != self.grid.dim or len(locs) != self.grid.dim:
            raise ConfigurationError("need one component per grid dimension")
        for c, loc in zip(comps, locs):
            _check_location(loc)
            if c.shape != self.grid.shape(loc):
                raise ConfigurationError(
                    f"component shape {c.shape} does not match {loc} shape {self.grid.shape(loc)}"
                )
        self.components = comps
        self.locations = locs

    @classmethod
    def zeros_mac(cls, grid):
        if grid.dim == 1:
            return cls(grid, (np.zeros(grid.shape(XFACE)),), (XFACE,))
        return cls(
            grid,
            (np.zeros(grid.shape(XFACE)), np.zeros(grid.shape(YFACE))),
            (XFACE, YFACE),
        )

    @classmethod
    def zeros_centered(cls, grid):
        return cls(
            grid,
            tuple(np.zeros(grid.shape(CENTER)) for _ in range(grid.dim)),
            (CENTER,) * grid.dim,
        )

    @property
    def is_mac(self):
        return self.locations[0] == XFACE

    def copy(self):
        return VectorField(self.grid, tuple(c.copy() for c in self.components), self.locations)

    def magnitude(self):
        if len({*self.locations}) != 1:
            raise ConfigurationError("magnitude needs co-located components")
        return ScalarField(
            self.grid,
            np.sqrt(sum(c * c for c in self.components)),
            self.locations[0],
        )


def _same_grid(a, b):
    if a.grid is not b.grid and a.grid != b.grid:
        raise ConfigurationError("fields live on different grids")


def _ddx(data, h, axis):
    """Second-order d/dx along ``axis``: central interior, one-sided at ends."""
    out = np.empty_like(data)
    n = data.shape[axis]
    if n < 3:
        raise ConfigurationError("need at least 3 points for one-sided stencils")
    sl = lambda i: tuple(slice(None) if a != axis else i for a in range(data.ndim))
    out[sl(slice(1, -1))] = (data[sl(slice(2, None))] - data[sl(slice(0, -2))]) / (2.0 * h)
    out[sl(0)] = (-3.0 * data[sl(0)] + 4.0 * data[sl(1)] - data[sl(2)]) / (2.0 * h)
    out[sl(-1)] = (3.0 * data[sl(-1)] - 4.0 * data[sl(-2)] + data[sl(-3)]) / (2.0 * h)
    return out


def gradient(f: ScalarField) -> VectorField:
    """Collocated gradient of a scalar field (same storage location)."""
    f.check_finite("gradient input")
    g = f.grid
    comps = tuple(_ddx(f.data, g.spacing[a], a) for a in range(g.dim))
    return VectorField(g, comps, (f.location,) * g.dim)


def divergence(v: VectorField) -> ScalarField:
    """Divergence of a vector field.

    Collocated components use the same central/one-sided stencils as
    ``gradient``; MAC components use conservative face differences.  Radial
    grids add the metric term so that div(u) = (1/r) d(r u)/dr.
    """
    g = v.grid
    for c in v.components:
        if not np.all(np.isfinite(c)):
            raise ConfigurationError("divergence input contains non-finite values")
    if v.is_mac:
        return divergence_mac(v)
    out = np.zeros(g.shape(v.locations[0]))
    for a in range(g.dim):
        out += _ddx(v.components[a], g.spacing[a], a)
    if g.axisymmetric:
        r = g.axis_coords(v.locations[0], 0)
        out += v.components[0] / r
    return ScalarField(g, out, v.locations[0])


def divergence_mac(v: VectorField) -> ScalarField:
    g = v.grid
    hx = g.spacing[0]
    if g.dim == 1:
        u = v.components[0]
        if g.axisymmetric:
            r_f = g.axis_coords(XFACE, 0)
            r_c = g.axis_coords(CENTER, 0)
            out = (r_f[1:] * u[1:] - r_f[:-1] * u[:-1]) / (r_c * hx)
        else:
            out = (u[1:] - u[:-1]) / hx
        return ScalarField(g, out, CENTER)
    u, w = v.components
    out = (u[1:, :] - u[:-1, :]) / hx + (w[:, 1:] - w[:, :-1]) / g.spacing[1]
    return ScalarField(g, out, CENTER)


def face_gradient(f: ScalarField) -> VectorField:
    """Gradient of a center field onto faces (interior faces; zero on boundary).

    This is the discrete adjoint of ``divergence_mac`` up to boundary terms,
    which makes the projection operator symmetric.
    """
    if f.location != CENTER:
        raise ConfigurationError("face_gradient expects a center field")
    g = f.grid
    hx = g.spacing[0]
    if g.dim == 1:
        out = np.zeros(g.shape(XFACE))
        out[1:-1] = (f.data[1:] - f.data[:-1]) / hx
        return VectorField(g, (out,), (XFACE,))
    gx = np.zeros(g.shape(XFACE))
    gy = np.zeros(g.shape(YFACE))
    gx[1:-1, :] = (f.data[1:, :] - f.data[:-1, :]) / hx
    gy[:, 1:-1] = (f.data[:, 1:] - f.data[:, :-1]) / g.spacing[1]
    return VectorField(g, (gx, gy), (XFACE, YFACE))


def _interp_weights(grid, location, pts):
    """Index/weight pairs for multilinear interpolation at physical points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != grid.dim:
        raise ConfigurationError("points have wrong dimension")
    lo = np.asarray(grid.origin)
    hi = np.asarray(grid.upper)
    tol = 1e-12 * max(grid.extents)
    if np.any(pts < lo - tol) or np.any(pts > hi + tol):
        raise OutOfDomainError("sample point outside the grid bounding box")
    idx = []
    wgt = []
    for a in range(grid.dim):
        c = grid.axis_coords(location, a)
        t = (pts[:, a] - c[0]) / grid.spacing[a]
        i0 = np.clip(np.floor(t).astype(int), 0, len(c) - 2)
        w = np.clip(t - i0, 0.0, 1.0)
        idx.append(i0)
        wgt.append(w)
    return idx, wgt


def interpolate_at(fld, pts):
    """Multilinear interpolation of a Scalar/VectorField at physical points.

    Points within half a cell of the boundary (where a center/face stencil has
    no outer neighbour) are evaluated by constant extrapolation of the edge
    value, which stays second order inside the domain proper.
    """
    if isinstance(fld, VectorField):
        vals = [_interp_component(fld.grid, c, loc, pts) for c, loc in zip(fld.components, fld.locations)]
        return np.stack(vals, axis=-1) if fld.grid.dim > 1 else vals[0]
    return _interp_component(fld.grid, fld.data, fld.location, pts)


def _interp_component(grid, data, location, pts):
    scalar_input = np.asarray(pts).ndim == 1
    idx, wgt = _interp_weights(grid, location, pts)
    if grid.dim == 1:
        i0, w = idx[0], wgt[0]
        out = (1.0 - w) * data[i0] + w * data[i0 + 1]
    else:
        i0, j0 = idx
        wx, wy = wgt
        out = (
            (1.0 - wx) * (1.0 - wy) * data[i0, j0]
            + wx * (1.0 - wy) * data[i0 + 1, j0]
            + (1.0 - wx) * wy * data[i0, j0 + 1]
            + wx * wy * data[i0 + 1, j0 + 1]
        )
    return float(out[0]) if scalar_input else out


def integrate(f: ScalarField) -> float:
    """Quadrature over the domain: midpoint for center fields, trapezoid for nodes.

    Radial grids integrate against the 2*pi*r measure.
    """
    f.check_finite("integrand")
    g = f.grid
    if f.location == CENTER:
        return float(np.sum(f.data * g.cell_volumes()))
    if f.location == NODE:
        w = [_trapezoid_weights(g.cells[a], g.spacing[a]) for a in range(g.dim)]
        if g.dim == 1:
            wx = w[0]
            if g.axisymmetric:
                wx = wx * 2.0 * np.pi * g.axis_coords(NODE, 0)
            return float(np.sum(f.data * wx))
        return float(np.sum(f.data * np.outer(w[0], w[1])))
    raise ConfigurationError("integrate supports center and node fields")


def _trapezoid_weights(n, h):
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def l2_norm(f: ScalarField) -> float:
    """Continuous L2 norm sqrt(int f^2 dOmega) by the field's quadrature."""
    sq = ScalarField(f.grid, f.data * f.data, f.location)
    return float(np.sqrt(integrate(sq)))


def face_average_to_center(v: VectorField) -> VectorField:
    """Average MAC face components to cell centers."""
    g = v.grid
    if not v.is_mac:
        return v.copy()
    u = v.components[0]
    ucc = 0.5 * (u[1:] + u[:-1]) if g.dim == 1 else 0.5 * (u[1:, :] + u[:-1, :])
    if g.dim == 1:
        return VectorField(g, (ucc,), (CENTER,))
    w = v.components[1]
    wcc = 0.5 * (w[:, 1:] + w[:, :-1])
    return VectorField(g, (ucc, wcc), (CENTER, CENTER))


def center_to_faces(c: np.ndarray, grid: Grid):
    """Arithmetic average of a center array onto (x[,y]) faces.

    Boundary faces copy the adjacent center value.
    """
    if grid.dim == 1:
        out = np.empty(grid.shape(XFACE))
        out[1:-1] = 0.5 * (c[1:] + c[:-1])
        out[0], out[-1] = c[0], c[-1]
        return (out,)
    fx = np.empty(grid.shape(XFACE))
    fx[1:-1, :] = 0.5 * (c[1:, :] + c[:-1, :])
    fx[0, :], fx[-1, :] = c[0, :], c[-1, :]
    fy = np.empty(grid.shape(YFACE))
    fy[:, 1:-1] = 0.5 * (c[:, 1:] + c[:, :-1])
    fy[:, 0], fy[:, -1] = c[:, 0], c[:, -1]
    return (fx, fy)
