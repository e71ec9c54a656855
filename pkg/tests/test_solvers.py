import numpy as np
import pytest

from evapflow import _kernels_py
from evapflow.backend import kernels
from evapflow.exceptions import SolverError
from evapflow.grid import Grid, center_to_faces
from evapflow.solvers import PressurePoisson, bicgstab, cg


def test_cg_small_spd_system():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((12, 12))
    a = m @ m.T + 12 * np.eye(12)
    b = rng.standard_normal(12)
    x, info = cg(lambda v: a @ v, b, tol=1e-12, max_iter=200)
    assert info["converged"]
    assert np.allclose(a @ x, b, atol=1e-9)


def test_bicgstab_nonsymmetric():
    rng = np.random.default_rng(1)
    a = np.eye(20) + 0.3 * rng.standard_normal((20, 20))
    b = rng.standard_normal(20)
    x, info = bicgstab(lambda v: a @ v, b, tol=1e-12, max_iter=400)
    assert info["converged"]
    assert np.allclose(a @ x, b, atol=1e-8)


def _manufactured_beta(grid):
    x, y = grid.coords("center")
    rho = 1.0 + 0.9 * np.sin(2 * np.pi * x) * np.cos(np.pi * y)
    beta_c = 1.0 / (1.0 + np.abs(rho))
    return center_to_faces(beta_c, grid)


def test_poisson_2d_dirichlet_manufactured():
    g = Grid((64, 64), (1.0, 1.0))
    beta = _manufactured_beta(g)
    solver = PressurePoisson(g, beta, dirichlet=("right",), tol=1e-11)
    rng = np.random.default_rng(5)
    p_exact = rng.standard_normal(g.shape("center"))
    rhs = solver.apply(p_exact)
    p = solver.solve(rhs)
    # operator is only semi-resolved by random data; check the residual instead
    r = rhs - solver.apply(p)
    assert np.linalg.norm(r) <= 1e-9 * np.linalg.norm(rhs)


def test_poisson_2d_high_contrast_coefficient():
    # density-ratio-1000 style jump in beta
    g = Grid((128, 128), (1.0, 1.0))
    x, y = g.coords("center")
    rho = np.where((x - 0.5) ** 2 + (y - 0.5) ** 2 < 0.1, 1000.0, 1.0)
    beta = center_to_faces(1.0 / rho, g)
    solver = PressurePoisson(g, beta, dirichlet=("top",), tol=1e-10)
    rhs = np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    p = solver.solve(rhs)
    r = rhs - solver.apply(p)
    assert np.linalg.norm(r) <= 1e-9 * np.linalg.norm(rhs)
    assert solver.last_info["iterations"] < 60


def test_poisson_all_neumann_singular():
    g = Grid((32, 32), (1.0, 1.0))
    beta = center_to_faces(np.ones(g.shape("center")), g)
    solver = PressurePoisson(g, beta, dirichlet=(), tol=1e-10)
    x, y = g.coords("center")
    rhs = np.cos(np.pi * x) * np.cos(np.pi * y)  # mean-zero, compatible
    p = solver.solve(rhs)
    assert abs(np.mean(p)) < 1e-10
    r = rhs - solver.apply(p)
    assert np.linalg.norm(r) <= 1e-8 * np.linalg.norm(rhs)


def test_poisson_1d_exact():
    g = Grid((200,), (1.0,))
    x = g.axis_coords("center", 0)
    beta = center_to_faces(1.0 + 0.5 * np.sin(2 * np.pi * x), g)
    solver = PressurePoisson(g, beta, dirichlet=("right",), tol=1e-12)
    rhs = np.sin(3 * x)
    p = solver.solve(rhs)
    r = rhs - solver.apply(p)
    assert np.linalg.norm(r) <= 1e-11 * np.linalg.norm(rhs)


def test_poisson_1d_radial_metric():
    g = Grid((128,), (0.25,), origin=(0.125,), axisymmetric=True)
    beta = center_to_faces(np.ones(g.shape("center")), g)
    solver = PressurePoisson(g, beta, dirichlet=("right",), tol=1e-12)
    # -(1/r)(r p')' = 0 with p(Ro)=0 and Neumann left -> p = const = 0
    p = solver.solve(np.zeros(g.shape("center")))
    assert np.max(np.abs(p)) < 1e-12


def test_poisson_failure_reports_residual():
    g = Grid((32, 32), (1.0, 1.0))
    beta = center_to_faces(np.ones(g.shape("center")), g)
    solver = PressurePoisson(g, beta, dirichlet=("right",), tol=1e-14, max_iter=1)
    rhs = np.ones(g.shape("center"))
    with pytest.raises(SolverError) as exc:
        solver.solve(rhs)
    assert exc.value.residual is not None


@pytest.mark.parametrize("fn", ["rbgs", "apply_op", "residual", "restrict_full_weighting"])
def test_kernel_backends_agree(fn):
    rng = np.random.default_rng(11)
    nx, ny = 16, 12
    arrs = [np.ascontiguousarray(rng.standard_normal((nx, ny))) for _ in range(6)]
    p, rhs, oE, oW, oN, oS = arrs
    diag = 4.0 + np.abs(rng.standard_normal((nx, ny)))
    if fn == "rbgs":
        p1, p2 = p.copy(), p.copy()
        kernels.rbgs(p1, rhs, oE, oW, oN, oS, diag, 0)
        _kernels_py.rbgs(p2, rhs, oE, oW, oN, oS, diag, 0)
        assert np.allclose(p1, p2, atol=1e-14)
    elif fn == "apply_op":
        assert np.allclose(
            kernels.apply_op(p, oE, oW, oN, oS, diag),
            _kernels_py.apply_op(p, oE, oW, oN, oS, diag),
            atol=1e-14,
        )
    elif fn == "residual":
        assert np.allclose(
            kernels.residual(p, rhs, oE, oW, oN, oS, diag),
            _kernels_py.residual(p, rhs, oE, oW, oN, oS, diag),
            atol=1e-14,
        )
    else:
        assert np.allclose(
            kernels.restrict_full_weighting(p),
            _kernels_py.restrict_full_weighting(p),
            atol=1e-14,
        )


def test_kernel_bilinear_matches_numpy():
    rng = np.random.default_rng(2)
    data = np.ascontiguousarray(rng.standard_normal((20, 18)))
    px = rng.uniform(0.05, 0.9, 50)
    py = rng.uniform(0.05, 0.8, 50)
    o1 = np.empty(50)
    o2 = np.empty(50)
    kernels.bilinear(data, 0.0, 0.0, 20.0, 20.0, px, py, o1)
    _kernels_py.bilinear(data, 0.0, 0.0, 20.0, 20.0, px, py, o2)
    assert np.allclose(o1, o2, atol=1e-14)
