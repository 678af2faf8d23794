"""Leray projection and the Stokes operator on the periodic channel.

All operators act mode by mode on the one-sided Fourier representation.
For each nonzero wavenumber k the wall-normal problems are dense Chebyshev
collocation solves; their LU factorizations are cached on the grid, keyed
by operator and time step, so repeated stepping reuses them.

Boundary conventions: velocity steps impose clamped (no-slip) conditions
at both walls, the projection imposes no-penetration through its Neumann
rows. Inputs are never mutated.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import ValidationError
from .fields import VelocityField
from .grid import ChannelGrid

__all__ = ["leray_project", "apply_stokes", "stokes_step", "stokes_inverse"]

_SCHEMES = ("be", "cn")


def _mode_laplacian(grid: ChannelGrid, k: int) -> np.ndarray:
    return grid.diff2_z - (k**2) * np.eye(grid.n_z)


def _leray_lus(grid: ChannelGrid):
    key = ("leray",)
    if key not in grid._cache:
        d = grid.diff_z
        lus = [None]
        for k in range(1, grid.n_modes):
            mat = _mode_laplacian(grid, k)
            mat[0, :] = d[0, :]
            mat[-1, :] = d[-1, :]
            lus.append(lu_factor(mat))
        grid._cache[key] = lus
    return grid._cache[key]


def leray_project(u: VelocityField) -> VelocityField:
    """Project onto divergence-free fields with no penetration at the walls.

    Per mode k != 0 this solves a Neumann problem for the scalar potential
    of the gradient part and subtracts it. The mean mode keeps its first
    component unchanged and drops the second, which is the exact projection
    there.
    """
    g = u.grid
    lus = _leray_lus(g)
    div = g.dx(u.coeffs[..., 0]) + g.dz(u.coeffs[..., 1])
    out = u.coeffs.copy()
    out[0, :, 1] = 0.0
    for k in range(1, g.n_modes):
        rhs = div[k].copy()
        rhs[0] = u.coeffs[k, 0, 1]
        rhs[-1] = u.coeffs[k, -1, 1]
        phi = lu_solve(lus[k], rhs)
        out[k, :, 0] -= 1j * k * phi
        out[k, :, 1] -= g.diff_z @ phi
    return VelocityField(g, out)


def apply_stokes(u: VelocityField) -> VelocityField:
    """Stokes operator A u = -P laplacian(u) for clamped solenoidal u."""
    return leray_project(VelocityField(u.grid, -u.laplacian().coeffs))


def _clamp_rows(mat: np.ndarray, grid: ChannelGrid) -> None:
    """Overwrite four rows with the clamped streamfunction conditions."""
    n = grid.n_z
    d = grid.diff_z
    mat[0, :] = 0.0
    mat[0, 0] = 1.0
    mat[1, :] = d[0, :]
    mat[n - 2, :] = d[-1, :]
    mat[n - 1, :] = 0.0
    mat[n - 1, n - 1] = 1.0


def _step_cache(grid: ChannelGrid, dt: float, scheme: str):
    key = ("stokes_step", scheme, float(dt))
    if key not in grid._cache:
        theta = 1.0 if scheme == "be" else 0.5
        lus = []
        rhs_ops = []
        for k in range(grid.n_modes):
            if k == 0:
                d2 = grid.diff2_z
                mat = np.eye(grid.n_z) - theta * dt * d2
                mat[0, :] = 0.0
                mat[0, 0] = 1.0
                mat[-1, :] = 0.0
                mat[-1, -1] = 1.0
                rhs_op = np.eye(grid.n_z) + (1.0 - theta) * dt * d2
            else:
                lap = _mode_laplacian(grid, k)
                lap2 = lap @ lap
                mat = lap - theta * dt * lap2
                _clamp_rows(mat, grid)
                rhs_op = lap + (1.0 - theta) * dt * lap2
            lus.append(lu_factor(mat))
            rhs_ops.append(rhs_op)
        grid._cache[key] = (lus, rhs_ops)
    return grid._cache[key]


def stokes_step(u: VelocityField, dt: float, scheme: str = "be") -> VelocityField:
    """One implicit step of the Stokes semigroup with no-slip walls.

    The wall-normal component defines a streamfunction per mode, which is
    advanced by backward Euler ("be") or Crank-Nicolson ("cn") for the
    fourth-order streamfunction formulation, clamped at both walls. The
    mean mode is a plain heat step with homogeneous Dirichlet conditions.
    With dt = 0 the step is the identity on clamped solenoidal fields.
    """
    if scheme not in _SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}, expected one of {_SCHEMES}")
    if dt < 0:
        raise ValidationError(f"dt must be nonnegative, got {dt}")
    g = u.grid
    lus, rhs_ops = _step_cache(g, dt, scheme)
    out = np.zeros_like(u.coeffs)
    rhs0 = rhs_ops[0] @ u.coeffs[0, :, 0]
    rhs0[0] = 0.0
    rhs0[-1] = 0.0
    out[0, :, 0] = lu_solve(lus[0], rhs0)
    out[0, :, 1] = 0.0
    n = g.n_z
    for k in range(1, g.n_modes):
        psi = 1j * u.coeffs[k, :, 1] / k
        rhs = rhs_ops[k] @ psi
        rhs[0] = 0.0
        rhs[1] = 0.0
        rhs[n - 2] = 0.0
        rhs[n - 1] = 0.0
        psi_new = lu_solve(lus[k], rhs)
        out[k, :, 0] = g.diff_z @ psi_new
        out[k, :, 1] = -1j * k * psi_new
    return VelocityField(g, out)


def _inverse_cache(grid: ChannelGrid):
    key = ("stokes_inverse",)
    if key not in grid._cache:
        lus = []
        for k in range(grid.n_modes):
            if k == 0:
                mat = -grid.diff2_z.copy()
                mat[0, :] = 0.0
                mat[0, 0] = 1.0
                mat[-1, :] = 0.0
                mat[-1, -1] = 1.0
            else:
                lap = _mode_laplacian(grid, k)
                mat = lap @ lap
                _clamp_rows(mat, grid)
            lus.append(lu_factor(mat))
        grid._cache[key] = lus
    return grid._cache[key]


def stokes_inverse(f: VelocityField) -> VelocityField:
    """Solve A u = f for the clamped Stokes operator, mode by mode.

    For k != 0 the scalar curl of f drives a clamped biharmonic solve for
    the streamfunction. The mean mode is a Dirichlet Poisson solve for the
    first component. Serves as an independent check on the implicit steps:
    a backward Euler step of size dt applied to dt * A^{-1} f recovers the
    smooth part of A^{-1} f as dt grows.
    """
    g = f.grid
    lus = _inverse_cache(g)
    out = np.zeros_like(f.coeffs)
    rhs0 = f.coeffs[0, :, 0].copy()
    rhs0[0] = 0.0
    rhs0[-1] = 0.0
    out[0, :, 0] = lu_solve(lus[0], rhs0)
    curl = g.dx(f.coeffs[..., 1]) - g.dz(f.coeffs[..., 0])
    n = g.n_z
    for k in range(1, g.n_modes):
        rhs = curl[k].copy()
        rhs[0] = 0.0
        rhs[1] = 0.0
        rhs[n - 2] = 0.0
        rhs[n - 1] = 0.0
        psi = lu_solve(lus[k], rhs)
        out[k, :, 0] = g.diff_z @ psi
        out[k, :, 1] = -1j * k * psi
    return VelocityField(g, out)
