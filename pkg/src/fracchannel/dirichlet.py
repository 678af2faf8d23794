"""Solenoidal lift of tangential Dirichlet data on the upper wall.

The boundary datum g lives on the upper wall and prescribes the tangential
velocity there; the lift extends it into the channel as a divergence-free
field that vanishes on the lower wall and has no penetration anywhere.
Per Fourier mode the lift streamfunction is an exact solution of the
homogeneous fourth-order wall-normal problem, built from exponentials
scaled to avoid overflow at large wavenumbers, so its accuracy does not
depend on the wall-normal resolution.

Boundary data is stored one-sided: index n holds the coefficient of
exp(i n x) for n >= 0, negative modes follow by conjugation, so g_0 must
be real.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .fields import VelocityField
from .grid import ChannelGrid

__all__ = [
    "lift_profiles",
    "dirichlet_lift",
    "boundary_pairing",
    "biharmonic_residual",
    "very_weak_residual",
    "lift_norm_ratio",
]


def _lift_coefficients(kappa: float, height: float) -> np.ndarray:
    """Coefficients of the unit lift streamfunction in the scaled basis.

    Basis functions exp(-kappa (a - z)), exp(-kappa z), and z times each,
    all bounded by max(1, a) on [0, a]. Conditions: psi and psi' vanish at
    the lower wall, psi vanishes and psi' equals one at the upper wall.
    """
    a = height
    e = np.exp(-kappa * a)
    mat = np.array(
        [
            [e, 1.0, 0.0, 0.0],
            [kappa * e, -kappa, e, 1.0],
            [1.0, e, a, a * e],
            [kappa, -kappa * e, kappa * a + 1.0, (1.0 - kappa * a) * e],
        ]
    )
    return np.linalg.solve(mat, np.array([0.0, 0.0, 0.0, 1.0]))


def _psi_stack(
    kappa: float, height: float, coeffs: np.ndarray, z: np.ndarray, max_order: int
) -> np.ndarray:
    """Analytic derivatives of the lift streamfunction, orders 0..max_order."""
    b1 = np.exp(-kappa * (height - z))
    b2 = np.exp(-kappa * z)
    rows = []
    for m in range(max_order + 1):
        d1 = kappa**m * b1
        d2 = (-kappa) ** m * b2
        if m == 0:
            d3 = z * b1
            d4 = z * b2
        else:
            d3 = kappa ** (m - 1) * (kappa * z + m) * b1
            d4 = (-kappa) ** (m - 1) * (-kappa * z + m) * b2
        rows.append(coeffs[0] * d1 + coeffs[1] * d2 + coeffs[2] * d3 + coeffs[3] * d4)
    return np.array(rows)


def lift_profiles(grid: ChannelGrid, n_max: int) -> np.ndarray:
    """Per-mode unit lift velocities on the grid, shape (n_max+1, n_z, 2).

    Mode 0 is the linear shear profile z/a; modes n >= 1 come from the
    exact streamfunction solve. Cached on the grid.
    """
    if not 0 <= n_max <= grid.n_modes - 2:
        raise ValidationError(
            f"n_max = {n_max} out of range for grid with {grid.n_modes} modes"
        )
    key = ("lift", n_max)
    if key not in grid._cache:
        prof = np.zeros((n_max + 1, grid.n_z, 2), dtype=complex)
        prof[0, :, 0] = grid.z / grid.height
        for n in range(1, n_max + 1):
            c = _lift_coefficients(float(n), grid.height)
            stack = _psi_stack(float(n), grid.height, c, grid.z, max_order=1)
            prof[n, :, 0] = stack[1]
            prof[n, :, 1] = -1j * n * stack[0]
        grid._cache[key] = prof
    return grid._cache[key]


def dirichlet_lift(grid: ChannelGrid, g_modes: np.ndarray) -> VelocityField:
    """Divergence-free velocity whose upper-wall tangential trace is g."""
    g_modes = np.asarray(g_modes, dtype=complex)
    if g_modes.ndim != 1 or g_modes.size == 0:
        raise ValidationError("boundary data must be a nonempty 1d modal array")
    scale = np.abs(g_modes).max()
    if abs(g_modes[0].imag) > 1e-12 * max(scale, 1.0):
        raise ValidationError("boundary mode 0 must be real for real-valued data")
    n_max = g_modes.size - 1
    prof = lift_profiles(grid, n_max)
    coeffs = np.zeros((grid.n_modes, grid.n_z, 2), dtype=complex)
    coeffs[: n_max + 1] = g_modes[:, None, None] * prof
    coeffs[0] = coeffs[0].real
    return VelocityField(grid, coeffs)


def boundary_pairing(g_modes: np.ndarray, h_modes: np.ndarray) -> float:
    """Circle integral of g h for real data in one-sided modal storage."""
    g_modes = np.asarray(g_modes, dtype=complex)
    h_modes = np.asarray(h_modes, dtype=complex)
    n = min(g_modes.size, h_modes.size)
    acc = (g_modes[0] * h_modes[0]).real
    acc += 2.0 * (g_modes[1:n] * np.conj(h_modes[1:n])).real.sum()
    return float(2.0 * np.pi * acc)


def biharmonic_residual(grid: ChannelGrid, k: int, n_sample: int = 401) -> dict:
    """Residual diagnostics of the mode-k lift, from analytic derivatives.

    Returns the relative interior residual of the fourth-order equation on
    a dense wall-normal sample together with the worst boundary condition
    error. Both should sit at roundoff for every wavenumber.
    """
    if k < 1:
        raise ValidationError("biharmonic residual is defined for modes k >= 1")
    a = grid.height
    kappa = float(k)
    c = _lift_coefficients(kappa, a)
    z = np.linspace(0.0, a, n_sample)
    s = _psi_stack(kappa, a, c, z, max_order=4)
    resid = s[4] - 2.0 * kappa**2 * s[2] + kappa**4 * s[0]
    scale = np.abs(s[4]).max() + 2.0 * kappa**2 * np.abs(s[2]).max() + kappa**4 * np.abs(s[0]).max()
    bc = max(abs(s[0][0]), abs(s[1][0]), abs(s[0][-1]), abs(s[1][-1] - 1.0))
    return {
        "interior_relative": float(np.abs(resid).max() / scale),
        "boundary": float(bc),
    }


def very_weak_residual(
    grid: ChannelGrid, g_modes: np.ndarray, test_field: VelocityField
) -> float:
    """Defect of the lift in the very weak formulation against one test field.

    For a clamped solenoidal test field phi, the volume integral of the
    lift against its Laplacian must match the wall pairing of g with the
    normal derivative of the tangential test component.
    """
    from .fields import inner_product

    lift = dirichlet_lift(grid, g_modes)
    lap = test_field.laplacian()
    lhs = inner_product(lift, VelocityField(grid, lap.coeffs))
    n_max = np.asarray(g_modes).size - 1
    dphi1 = grid.dz(test_field.coeffs[..., 0])
    wall = dphi1[: n_max + 1, grid.upper_wall]
    rhs = boundary_pairing(g_modes, wall)
    return float(abs(lhs - rhs))


def lift_norm_ratio(grid: ChannelGrid, g_modes: np.ndarray) -> float:
    """Energy of the lift relative to the natural weighted boundary norm."""
    from .fields import l2_norm

    g_modes = np.asarray(g_modes, dtype=complex)
    lift = dirichlet_lift(grid, g_modes)
    n = np.arange(g_modes.size)
    weights = (1.0 + n**2) ** (-0.5)
    norm2 = weights[0] * abs(g_modes[0]) ** 2 + 2.0 * (
        weights[1:] * np.abs(g_modes[1:]) ** 2
    ).sum()
    if norm2 == 0.0:
        raise ValidationError("boundary data is identically zero")
    return float(l2_norm(lift) / np.sqrt(norm2))
