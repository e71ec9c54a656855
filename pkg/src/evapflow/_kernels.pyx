# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil kernels: multigrid smoother/transfer ops and bilinear sampling.

Signatures mirror evapflow._kernels_py; see evapflow.backend for selection.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "cython"

ctypedef cnp.float64_t f64


def rbgs(cnp.ndarray[f64, ndim=2] p, cnp.ndarray[f64, ndim=2] rhs,
         cnp.ndarray[f64, ndim=2] oE, cnp.ndarray[f64, ndim=2] oW,
         cnp.ndarray[f64, ndim=2] oN, cnp.ndarray[f64, ndim=2] oS,
         cnp.ndarray[f64, ndim=2] diag, int color):
    cdef Py_ssize_t nx = p.shape[0], ny = p.shape[1]
    cdef Py_ssize_t i, j, j0
    cdef double acc
    for i in range(nx):
        j0 = (color + i) % 2
        for j in range(j0, ny, 2):
            acc = rhs[i, j]
            if i + 1 < nx:
                acc += oE[i, j] * p[i + 1, j]
            if i > 0:
                acc += oW[i, j] * p[i - 1, j]
            if j + 1 < ny:
                acc += oN[i, j] * p[i, j + 1]
            if j > 0:
                acc += oS[i, j] * p[i, j - 1]
            p[i, j] = acc / diag[i, j]


def apply_op(cnp.ndarray[f64, ndim=2] p,
             cnp.ndarray[f64, ndim=2] oE, cnp.ndarray[f64, ndim=2] oW,
             cnp.ndarray[f64, ndim=2] oN, cnp.ndarray[f64, ndim=2] oS,
             cnp.ndarray[f64, ndim=2] diag):
    cdef Py_ssize_t nx = p.shape[0], ny = p.shape[1]
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((nx, ny))
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(nx):
        for j in range(ny):
            acc = diag[i, j] * p[i, j]
            if i + 1 < nx:
                acc -= oE[i, j] * p[i + 1, j]
            if i > 0:
                acc -= oW[i, j] * p[i - 1, j]
            if j + 1 < ny:
                acc -= oN[i, j] * p[i, j + 1]
            if j > 0:
                acc -= oS[i, j] * p[i, j - 1]
            out[i, j] = acc
    return out


def residual(cnp.ndarray[f64, ndim=2] p, cnp.ndarray[f64, ndim=2] rhs,
             cnp.ndarray[f64, ndim=2] oE, cnp.ndarray[f64, ndim=2] oW,
             cnp.ndarray[f64, ndim=2] oN, cnp.ndarray[f64, ndim=2] oS,
             cnp.ndarray[f64, ndim=2] diag):
    cdef Py_ssize_t nx = p.shape[0], ny = p.shape[1]
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((nx, ny))
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(nx):
        for j in range(ny):
            acc = rhs[i, j] - diag[i, j] * p[i, j]
            if i + 1 < nx:
                acc += oE[i, j] * p[i + 1, j]
            if i > 0:
                acc += oW[i, j] * p[i - 1, j]
            if j + 1 < ny:
                acc += oN[i, j] * p[i, j + 1]
            if j > 0:
                acc += oS[i, j] * p[i, j - 1]
            out[i, j] = acc
    return out


def restrict_full_weighting(cnp.ndarray[f64, ndim=2] fine):
    cdef Py_ssize_t nxc = fine.shape[0] // 2, nyc = fine.shape[1] // 2
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((nxc, nyc))
    cdef Py_ssize_t i, j
    for i in range(nxc):
        for j in range(nyc):
            out[i, j] = 0.25 * (fine[2 * i, 2 * j] + fine[2 * i + 1, 2 * j]
                                + fine[2 * i, 2 * j + 1] + fine[2 * i + 1, 2 * j + 1])
    return out


def prolong_add(cnp.ndarray[f64, ndim=2] coarse, cnp.ndarray[f64, ndim=2] fine):
    cdef Py_ssize_t nxc = coarse.shape[0], nyc = coarse.shape[1]
    cdef Py_ssize_t i, j
    cdef double v
    for i in range(nxc):
        for j in range(nyc):
            v = coarse[i, j]
            fine[2 * i, 2 * j] += v
            fine[2 * i + 1, 2 * j] += v
            fine[2 * i, 2 * j + 1] += v
            fine[2 * i + 1, 2 * j + 1] += v


def bilinear(cnp.ndarray[f64, ndim=2] data, double x0, double y0,
             double inv_hx, double inv_hy,
             cnp.ndarray[f64, ndim=1] px, cnp.ndarray[f64, ndim=1] py,
             cnp.ndarray[f64, ndim=1] out):
    cdef Py_ssize_t nx = data.shape[0], ny = data.shape[1], n = px.shape[0]
    cdef Py_ssize_t k, i0, j0
    cdef double tx, ty, wx, wy
    for k in range(n):
        tx = (px[k] - x0) * inv_hx
        ty = (py[k] - y0) * inv_hy
        i0 = <Py_ssize_t> tx
        if tx < 0:
            i0 = 0
        if i0 > nx - 2:
            i0 = nx - 2
        j0 = <Py_ssize_t> ty
        if ty < 0:
            j0 = 0
        if j0 > ny - 2:
            j0 = ny - 2
        wx = tx - i0
        if wx < 0:
            wx = 0
        elif wx > 1:
            wx = 1
        wy = ty - j0
        if wy < 0:
            wy = 0
        elif wy > 1:
            wy = 1
        out[k] = ((1 - wx) * (1 - wy) * data[i0, j0]
                  + wx * (1 - wy) * data[i0 + 1, j0]
                  + (1 - wx) * wy * data[i0, j0 + 1]
                  + wx * wy * data[i0 + 1, j0 + 1])
