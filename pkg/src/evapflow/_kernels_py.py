"""Pure-numpy implementations of the hot stencil kernels.

Same signatures as the compiled extension ``evapflow._kernels``; selected at
import time by :mod:`evapflow.backend`.  All 2D arrays are C-contiguous
float64 with shape (nx, ny).
"""

import numpy as np

NAME = "numpy"


def _neighbor_sum(p, oE, oW, oN, oS):
    nb = np.zeros_like(p)
    nb[:-1, :] += oE[:-1, :] * p[1:, :]
    nb[1:, :] += oW[1:, :] * p[:-1, :]
    nb[:, :-1] += oN[:, :-1] * p[:, 1:]
    nb[:, 1:] += oS[:, 1:] * p[:, :-1]
    return nb


def rbgs(p, rhs, oE, oW, oN, oS, diag, color):
    """One red-black Gauss-Seidel half-sweep, updating cells with (i+j)%2 == color.

    Valid vectorization: a color's neighbours all have the opposite color, so
    the gathered neighbour sum only reads values untouched by this update.
    """
    upd = (rhs + _neighbor_sum(p, oE, oW, oN, oS)) / diag
    p[0::2, color::2] = upd[0::2, color::2]
    p[1::2, 1 - color::2] = upd[1::2, 1 - color::2]


def apply_op(p, oE, oW, oN, oS, diag):
    """A p for the 5-point operator A = diag*I - sum(off-diagonals)."""
    return diag * p - _neighbor_sum(p, oE, oW, oN, oS)


def residual(p, rhs, oE, oW, oN, oS, diag):
    return rhs - apply_op(p, oE, oW, oN, oS, diag)


def restrict_full_weighting(fine):
    """Cell-centered 2:1 restriction by 2x2 block averaging."""
    nx, ny = fine.shape
    return 0.25 * (
        fine[0:nx:2, 0:ny:2]
        + fine[1:nx:2, 0:ny:2]
        + fine[0:nx:2, 1:ny:2]
        + fine[1:nx:2, 1:ny:2]
    )


def prolong_add(coarse, fine):
    """Piecewise-constant prolongation, accumulated into ``fine``."""
    fine += np.repeat(np.repeat(coarse, 2, axis=0), 2, axis=1)


def bilinear(data, x0, y0, inv_hx, inv_hy, px, py, out):
    """Bilinear samples of a (nx, ny) array at physical points, clamped to the edge."""
    nx, ny = data.shape
    tx = (px - x0) * inv_hx
    ty = (py - y0) * inv_hy
    i0 = np.clip(np.floor(tx).astype(np.int64), 0, nx - 2)
    j0 = np.clip(np.floor(ty).astype(np.int64), 0, ny - 2)
    wx = np.clip(tx - i0, 0.0, 1.0)
    wy = np.clip(ty - j0, 0.0, 1.0)
    out[:] = (
        (1.0 - wx) * (1.0 - wy) * data[i0, j0]
        + wx * (1.0 - wy) * data[i0 + 1, j0]
        + (1.0 - wx) * wy * data[i0, j0 + 1]
        + wx * wy * data[i0 + 1, j0 + 1]
    )
