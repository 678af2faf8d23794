"""Velocity and scalar fields in mixed Fourier-Chebyshev representation.

Fields store one-sided Fourier coefficients (real physical data), so the
Hermitian half is implicit: mode 0 (and the always-zeroed Nyquist line)
must stay real for the physical field to be real. Operations never mutate
their inputs; arithmetic returns fresh fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import ChannelGrid

__all__ = [
    "ScalarField",
    "VelocityField",
    "inner_product",
    "lp_norm",
    "l2_norm",
    "sobolev_norm",
    "grad_norm",
    "lq_norm_in_x",
    "random_solenoidal_field",
    "field_from_streamfunction",
    "standing_eddy_field",
]


def _check_real_lines(coeffs, what):
    if np.abs(coeffs[0].imag).max() > 1e-13 * max(1.0, np.abs(coeffs).max()):
        raise ValidationError(f"{what}: mode-0 line must be real for a real field")


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: ChannelGrid
    coeffs: np.ndarray  # complex, (n_modes, n_z)

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.n_modes, self.grid.n_z):
            raise ValidationError(
                f"scalar coeffs shape {self.coeffs.shape} does not match grid"
            )

    def to_physical(self, pad: int = 1) -> np.ndarray:
        return self.grid.to_physical(self.coeffs, pad=pad)

    @classmethod
    def from_physical(cls, grid: ChannelGrid, values: np.ndarray) -> "ScalarField":
        return cls(grid, grid.to_spectral(values))

    @classmethod
    def zero(cls, grid: ChannelGrid) -> "ScalarField":
        return cls(grid, np.zeros((grid.n_modes, grid.n_z), dtype=complex))

    def __add__(self, other):
        return ScalarField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return ScalarField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return ScalarField(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Two-component velocity; coeffs indexed [mode, z point, component]."""

    grid: ChannelGrid
    coeffs: np.ndarray  # complex, (n_modes, n_z, 2)

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.n_modes, self.grid.n_z, 2):
            raise ValidationError(
                f"velocity coeffs shape {self.coeffs.shape} does not match grid"
            )

    @classmethod
    def zero(cls, grid: ChannelGrid) -> "VelocityField":
        return cls(grid, np.zeros((grid.n_modes, grid.n_z, 2), dtype=complex))

    @classmethod
    def from_physical(cls, grid: ChannelGrid, values: np.ndarray) -> "VelocityField":
        return cls(grid, grid.to_spectral(values))

    def to_physical(self, pad: int = 1) -> np.ndarray:
        return self.grid.to_physical(self.coeffs, pad=pad)

    def copy(self) -> "VelocityField":
        return VelocityField(self.grid, self.coeffs.copy())

    def __add__(self, other):
        return VelocityField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return VelocityField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return VelocityField(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return VelocityField(self.grid, -self.coeffs)

    def divergence(self) -> ScalarField:
        g = self.grid
        return ScalarField(g, g.dx(self.coeffs[..., 0]) + g.dz(self.coeffs[..., 1]))

    def vorticity(self) -> ScalarField:
        """Scalar curl of the velocity: dx(u_2) - dz(u_1), spectrally."""
        g = self.grid
        return ScalarField(g, g.dx(self.coeffs[..., 1]) - g.dz(self.coeffs[..., 0]))

    def laplacian(self) -> "VelocityField":
        g = self.grid
        k2 = (g.wavenumbers**2)[:, None, None]
        return VelocityField(g, g.dz(g.dz(self.coeffs)) - k2 * self.coeffs)

    def wall_values(self, component: int) -> np.ndarray:
        """Modal trace (upper wall, lower wall) of one component."""
        return self.coeffs[:, [0, -1], component]


# ----- integrals and norms --------------------------------------------------


def inner_product(u: VelocityField, v: VelocityField, pad: int = 2) -> float:
    """L2 inner product over the channel, via padded physical quadrature."""
    pu = u.to_physical(pad=pad)
    pv = v.to_physical(pad=pad)
    return u.grid.integrate((pu * pv).sum(axis=-1))


def lp_norm(u: VelocityField, p: float, pad: int = 2) -> float:
    """L^p norm of |u| = sqrt(u_1^2 + u_2^2) over the channel."""
    if p <= 0:
        raise ValidationError(f"p must be positive, got {p}")
    phys = u.to_physical(pad=pad)
    mag2 = (phys**2).sum(axis=-1)
    return float(u.grid.integrate(mag2 ** (p / 2.0)) ** (1.0 / p))


def l2_norm(u: VelocityField, pad: int = 2) -> float:
    return lp_norm(u, 2.0, pad=pad)


def grad_norm(u: VelocityField, pad: int = 2) -> float:
    """L2 norm of the full velocity gradient."""
    g = u.grid
    total = 0.0
    for c in range(2):
        dx = g.to_physical(g.dx(u.coeffs[..., c]), pad=pad)
        dz = g.to_physical(g.dz(u.coeffs[..., c]), pad=pad)
        total += g.integrate(dx**2 + dz**2)
    return float(np.sqrt(total))


def sobolev_norm(u: VelocityField, order: int, pad: int = 2) -> float:
    """Integer-order Sobolev norm via spectral derivatives.

    Sums the squared L2 norms of all partial derivatives up to the given
    order (order <= 2 supported; higher orders are not needed here).
    """
    if order not in (0, 1, 2):
        raise ValidationError("sobolev_norm supports integer orders 0, 1, 2")
    g = u.grid
    total = 0.0
    derivs = {(): u.coeffs}
    if order >= 1:
        derivs[("x",)] = g.dx(u.coeffs)
        derivs[("z",)] = g.dz(u.coeffs)
    if order >= 2:
        derivs[("x", "x")] = g.dx(derivs[("x",)])
        derivs[("x", "z")] = g.dz(derivs[("x",)])
        derivs[("z", "x")] = g.dx(derivs[("z",)])
        derivs[("z", "z")] = g.dz(derivs[("z",)])
    for c in derivs.values():
        phys = g.to_physical(c, pad=pad)
        total += g.integrate((phys**2).sum(axis=-1))
    return float(np.sqrt(total))


def lq_norm_in_x(u: VelocityField, q: float, pad: int = 2) -> np.ndarray:
    """Profile z -> (integral over x of |u(x, z)|^q dx)^(1/q)."""
    phys = u.to_physical(pad=pad)
    m_x = phys.shape[0]
    mag = np.sqrt((phys**2).sum(axis=-1))
    return ((mag**q).sum(axis=0) * (2.0 * np.pi / m_x)) ** (1.0 / q)


# ----- constructors ----------------------------------------------------------


def field_from_streamfunction(grid: ChannelGrid, psi_coeffs: np.ndarray) -> VelocityField:
    """Velocity (dz psi, -dx psi) from streamfunction coefficients.

    The result is exactly divergence-free at collocation level because both
    terms differentiate the same coefficients with the same matrices.
    """
    u = np.empty((grid.n_modes, grid.n_z, 2), dtype=complex)
    u[..., 0] = grid.dz(psi_coeffs)
    u[..., 1] = -grid.dx(psi_coeffs)
    return VelocityField(grid, u)


def standing_eddy_field(grid: ChannelGrid, amplitude: float = 0.05) -> VelocityField:
    """Single-mode clamped eddy used as a smooth deterministic start.

    The streamfunction amplitude peaks at the channel midplane; the
    resulting velocity is exactly solenoidal and vanishes at both walls.
    """
    a = grid.height
    z = grid.z
    psi = np.zeros((grid.n_modes, grid.n_z), dtype=complex)
    psi[1] = amplitude * 16.0 * (z * (a - z)) ** 2 / a**4
    return field_from_streamfunction(grid, psi)


def random_solenoidal_field(
    grid: ChannelGrid,
    rng: np.random.Generator,
    kmax: int = 5,
    z_degree: int = 8,
    amplitude: float = 1.0,
    clamped: bool = True,
) -> VelocityField:
    """Random smooth solenoidal test field from a banded streamfunction.

    Each retained mode k <= kmax gets a random polynomial streamfunction
    multiplied by z(a - z) (no penetration) or z^2 (a - z)^2 (additionally
    no slip when clamped). Low polynomial degree and a small mode band keep
    all quadratures in the tests exact, so operator identities can be
    checked at roundoff level.
    """
    kmax = min(kmax, grid.dealias_keep)
    a = grid.height
    z = grid.z
    base = (z * (a - z)) ** (2 if clamped else 1)
    psi = np.zeros((grid.n_modes, grid.n_z), dtype=complex)
    for k in range(1, kmax + 1):
        coeff_re = rng.standard_normal(z_degree + 1)
        coeff_im = rng.standard_normal(z_degree + 1)
        poly = np.polynomial.polynomial.polyval(z / a, coeff_re + 1j * coeff_im)
        psi[k] = amplitude * base * poly / (1.0 + k**2)
    u = field_from_streamfunction(grid, psi)
    # Mode 0: a real shear profile u_1(z), u_2 = 0, solenoidal by construction.
    prof = np.polynomial.polynomial.polyval(
        z / a, rng.standard_normal(z_degree + 1)
    )
    u.coeffs[0, :, 0] = amplitude * base * prof
    u.coeffs[0, :, 1] = 0.0
    return u
