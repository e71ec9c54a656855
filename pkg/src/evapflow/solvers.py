"""Iterative linear solvers: matrix-free CG/BiCGStab and the pressure operator.

The variable-coefficient pressure Poisson operator -div(beta grad p) is solved
with preconditioned conjugate gradients: geometric-multigrid V-cycles in 2D,
a direct tridiagonal factorization in 1D (plain or radial metric).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

import scipy.fft

from .backend import kernels
from .exceptions import ConfigurationError, SolverError
from .grid import CENTER, Grid

_SIDES_1D = ("left", "right")
_SIDES_2D = ("left", "right", "bottom", "top")


class NeumannHelmholtz:
    """Direct solver for (I - coef * Lap) x = b with zero-flux boundaries.

    The flux-form Neumann Laplacian on cell centers of a uniform grid is
    diagonalized by the type-II cosine transform, so the solve is exact up to
    roundoff.  Only defined on non-radial uniform grids; coef may be zero
    (identity).  With coef < 0 this inverts (I + |coef| Lap), which stays
    regular as long as |coef| max|lambda| < 1.
    """

    def __init__(self, grid: Grid, coef: float):
        if grid.axisymmetric:
            raise ConfigurationError("cosine-transform solver needs a uniform Cartesian grid")
        self.grid = grid
        self.coef = coef
        eigs = []
        for a in range(grid.dim):
            n = grid.cells[a]
            h = grid.spacing[a]
            k = np.arange(n)
            eigs.append((2.0 * np.cos(np.pi * k / n) - 2.0) / h**2)
        if grid.dim == 1:
            lam = eigs[0]
        else:
            lam = eigs[0][:, None] + eigs[1][None, :]
        self._denom = 1.0 - coef * lam

    def solve(self, b):
        bh = scipy.fft.dctn(b, type=2, norm="ortho")
        bh /= self._denom
        return scipy.fft.idctn(bh, type=2, norm="ortho")


def cg(apply_a, b, x0=None, tol=1e-10, max_iter=2000, precond=None, project=None):
    """Preconditioned conjugate gradients; returns (x, info dict).

    ``project`` removes a known nullspace component (used for all-Neumann
    pressure problems).
    """
    x = np.zeros_like(b) if x0 is None else x0.copy()
    if project is not None:
        project(x)
    r = b - apply_a(x)
    if project is not None:
        project(r)
    bnorm = float(np.linalg.norm(b))
    scale = bnorm if bnorm > 0 else 1.0
    z = precond(r) if precond is not None else r
    if project is not None and precond is not None:
        project(z)
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    res = float(np.linalg.norm(r))
    it = 0
    while res / scale > tol and it < max_iter:
        ap = apply_a(p)
        alpha = rz / float(np.vdot(p, ap).real)
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r))
        if res / scale <= tol:
            it += 1
            break
        z = precond(r) if precond is not None else r
        if project is not None and precond is not None:
            project(z)
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    if project is not None:
        project(x)
    return x, {"iterations": it, "residual": res / scale, "converged": res / scale <= tol}


def bicgstab(apply_a, b, x0=None, tol=1e-10, max_iter=500, precond=None):
    """Matrix-free BiCGStab for the nonsymmetric systems (advection, momentum)."""
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_a(x)
    bnorm = float(np.linalg.norm(b))
    scale = bnorm if bnorm > 0 else 1.0
    res = float(np.linalg.norm(r))
    if res / scale <= tol:
        return x, {"iterations": 0, "residual": res / scale, "converged": True}
    r0 = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    for it in range(1, max_iter + 1):
        rho_new = float(np.vdot(r0, r).real)
        if abs(rho_new) < 1e-300:
            break
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        phat = precond(p) if precond is not None else p
        v = apply_a(phat)
        denom = float(np.vdot(r0, v).real)
        if abs(denom) < 1e-300:
            break
        alpha = rho / denom
        s = r - alpha * v
        if float(np.linalg.norm(s)) / scale <= tol:
            x += alpha * phat
            return x, {"iterations": it, "residual": float(np.linalg.norm(s)) / scale, "converged": True}
        shat = precond(s) if precond is not None else s
        t = apply_a(shat)
        tt = float(np.vdot(t, t).real)
        if tt < 1e-300:
            break
        omega = float(np.vdot(t, s).real) / tt
        x += alpha * phat + omega * shat
        r = s - omega * t
        res = float(np.linalg.norm(r))
        if res / scale <= tol:
            return x, {"iterations": it, "residual": res / scale, "converged": True}
        if abs(omega) < 1e-300:
            break
    res = float(np.linalg.norm(b - apply_a(x)))
    return x, {"iterations": max_iter, "residual": res / scale, "converged": res / scale <= tol}


@dataclass
class _Level:
    oE: np.ndarray
    oW: np.ndarray
    oN: np.ndarray
    oS: np.ndarray
    diag: np.ndarray
    bx: np.ndarray
    by: np.ndarray


def _build_level(bx, by, hx, hy, dirichlet):
    nx, ny = bx.shape[0] - 1, bx.shape[1]
    oE = np.zeros((nx, ny))
    oW = np.zeros((nx, ny))
    oN = np.zeros((nx, ny))
    oS = np.zeros((nx, ny))
    oE[:-1, :] = bx[1:-1, :] / hx**2
    oW[1:, :] = bx[1:-1, :] / hx**2
    oN[:, :-1] = by[:, 1:-1] / hy**2
    oS[:, 1:] = by[:, 1:-1] / hy**2
    diag = oE + oW + oN + oS
    if "right" in dirichlet:
        diag[-1, :] += 2.0 * bx[-1, :] / hx**2
    if "left" in dirichlet:
        diag[0, :] += 2.0 * bx[0, :] / hx**2
    if "top" in dirichlet:
        diag[:, -1] += 2.0 * by[:, -1] / hy**2
    if "bottom" in dirichlet:
        diag[:, 0] += 2.0 * by[:, 0] / hy**2
    return _Level(oE, oW, oN, oS, diag, bx, by)


def _coarsen_beta(bx, by):
    nx, ny = bx.shape[0] - 1, bx.shape[1]
    bxc = 0.5 * (bx[::2, 0:ny:2] + bx[::2, 1:ny:2])
    byc = 0.5 * (by[0:nx:2, ::2] + by[1:nx:2, ::2])
    return bxc, byc


class PressurePoisson:
    """Solver for  -div(beta grad p) = f  on cell centers.

    ``beta_faces`` holds the face-interpolated coefficient (1/rho for the
    projection).  ``dirichlet`` names the sides with p = 0 at the boundary
    face (outflow); the others get homogeneous Neumann (walls).  If no side is
    Dirichlet the operator is singular and the mean is pinned to zero.
    """

    def __init__(self, grid: Grid, beta_faces, dirichlet=(), tol=1e-10, max_iter=2000):
        self.grid = grid
        self.dirichlet = frozenset(dirichlet)
        sides = _SIDES_1D if grid.dim == 1 else _SIDES_2D
        unknown = self.dirichlet - set(sides)
        if unknown:
            raise ConfigurationError(f"unknown boundary sides {sorted(unknown)}")
        self.tol = tol
        self.max_iter = max_iter
        self.singular = not self.dirichlet
        if grid.dim == 1:
            self._setup_1d(beta_faces[0])
        else:
            self._setup_2d(beta_faces[0], beta_faces[1])

    # -- 1D: banded direct factorization used as the CG preconditioner --

    def _setup_1d(self, bx):
        g = self.grid
        n = g.cells[0]
        h = g.spacing[0]
        if g.axisymmetric:
            r_f = g.axis_coords("xface", 0)
            r_c = g.axis_coords(CENTER, 0)
            wE = r_f[1:] * bx[1:] / (r_c * h * h)
            wW = r_f[:-1] * bx[:-1] / (r_c * h * h)
        else:
            wE = bx[1:] / h**2
            wW = bx[:-1] / h**2
        lower = np.zeros(n)
        upper = np.zeros(n)
        diag = np.zeros(n)
        diag += wE + wW
        upper[1:] = -wE[:-1]
        lower[:-1] = -wW[1:]
        # boundary faces: Neumann removes the term, Dirichlet doubles it
        if "left" not in self.dirichlet:
            diag[0] -= wW[0]
        else:
            diag[0] += wW[0]
        if "right" not in self.dirichlet:
            diag[-1] -= wE[-1]
        else:
            diag[-1] += wE[-1]
        if self.singular:
            # pin the first unknown so the banded factorization stays regular
            diag[0] *= 1.0 + 1e-12
        self._ab = np.vstack([upper, diag, lower])
        self._vol = self.grid.cell_volumes()

    def _solve_1d_direct(self, rhs):
        return scipy.linalg.solve_banded((1, 1), self._ab, rhs)

    # -- 2D: geometric multigrid hierarchy --

    def _setup_2d(self, bx, by):
        hx, hy = self.grid.spacing
        self.levels = []
        self.hs = []
        while True:
            self.levels.append(_build_level(bx, by, hx, hy, self.dirichlet))
            self.hs.append((hx, hy))
            nx, ny = bx.shape[0] - 1, bx.shape[1]
            if nx % 2 or ny % 2 or min(nx, ny) <= 8 or len(self.levels) >= 12:
                break
            bx, by = _coarsen_beta(bx, by)
            hx, hy = 2 * hx, 2 * hy
        self._vol = self.grid.cell_volumes()

    def _vcycle(self, lvl, rhs):
        level = self.levels[lvl]
        e = np.zeros_like(rhs)
        if lvl == len(self.levels) - 1:
            for _ in range(40):
                kernels.rbgs(e, rhs, level.oE, level.oW, level.oN, level.oS, level.diag, 0)
                kernels.rbgs(e, rhs, level.oE, level.oW, level.oN, level.oS, level.diag, 1)
            return e
        kernels.rbgs(e, rhs, level.oE, level.oW, level.oN, level.oS, level.diag, 0)
        kernels.rbgs(e, rhs, level.oE, level.oW, level.oN, level.oS, level.diag, 1)
        r = kernels.residual(e, rhs, level.oE, level.oW, level.oN, level.oS, level.diag)
        rc = kernels.restrict_full_weighting(r)
        ec = self._vcycle(lvl + 1, rc)
        kernels.prolong_add(ec, e)
        kernels.rbgs(e, rhs, level.oE, level.oW, level.oN, level.oS, level.diag, 1)
        kernels.rbgs(e, rhs, level.oE, level.oW, level.oN, level.oS, level.diag, 0)
        return e

    def apply(self, p):
        if self.grid.dim == 1:
            upper, diag, lower = self._ab
            out = diag * p
            out[:-1] += upper[1:] * p[1:]
            out[1:] += lower[:-1] * p[:-1]
            return out
        lv = self.levels[0]
        return kernels.apply_op(p, lv.oE, lv.oW, lv.oN, lv.oS, lv.diag)

    def _project(self, x):
        x -= np.sum(x * self._vol) / np.sum(self._vol)

    def solve(self, rhs, x0=None):
        """Solve to relative tolerance; raises SolverError on non-convergence."""
        rhs = np.ascontiguousarray(rhs, dtype=float)
        project = None
        if self.singular:
            project = self._project
            rhs = rhs - np.sum(rhs * self._vol) / np.sum(self._vol)
        if self.grid.dim == 1:
            precond = self._solve_1d_direct
        else:
            precond = lambda r: self._vcycle(0, np.ascontiguousarray(r))
        x, info = cg(
            self.apply,
            rhs,
            x0=x0,
            tol=self.tol,
            max_iter=self.max_iter,
            precond=precond,
            project=project,
        )
        if not info["converged"]:
            raise SolverError(
                f"pressure solve stalled at relative residual {info['residual']:.3e} "
                f"after {info['iterations']} iterations",
                residual=info["residual"],
                iterations=info["iterations"],
            )
        self.last_info = info
        return x
