"""Mixed Fourier-Chebyshev discretization of the periodic channel.

The domain is [0, 2pi) x [0, a]: Fourier collocation in the periodic x
direction (real fields, one-sided rfft storage) and Chebyshev-Gauss-Lobatto
collocation in the wall-normal z direction, with the standard dense
differentiation matrix. Index 0 of the z grid is the upper wall z = a and
index n_z - 1 is the lower wall z = 0, matching the usual descending
Chebyshev ordering.

Wall-normal integrals use Clenshaw-Curtis weights; x integrals use the
trapezoid rule, which is exact for trigonometric polynomials. Products are
de-aliased with the 2/3 rule in x only (collocation products in z are
exact in values; only differentiation of high-degree products aliases,
which the resolution budget absorbs).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = ["ChannelGrid", "cheb_diff_matrix", "clenshaw_curtis_weights"]


def cheb_diff_matrix(m: int) -> np.ndarray:
    """Chebyshev differentiation matrix on cos(j pi / m), j = 0..m.

    Trefethen's construction with the negated-sum diagonal for stability.
    """
    if m == 0:
        return np.zeros((1, 1))
    x = np.cos(np.pi * np.arange(m + 1) / m)
    c = np.ones(m + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(m + 1)
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(m + 1))
    d -= np.diag(d.sum(axis=1))
    return d


def clenshaw_curtis_weights(m: int) -> np.ndarray:
    """Clenshaw-Curtis quadrature weights on cos(j pi / m), j = 0..m."""
    if m == 0:
        return np.array([2.0])
    w = np.zeros(m + 1)
    theta = np.pi * np.arange(1, m) / m
    v = np.ones(m - 1)
    if m % 2 == 0:
        w[0] = w[m] = 1.0 / (m**2 - 1)
        for k in range(1, m // 2):
            v -= 2.0 * np.cos(2.0 * k * theta) / (4.0 * k**2 - 1)
        v -= np.cos(m * theta) / (m**2 - 1)
    else:
        w[0] = w[m] = 1.0 / m**2
        for k in range(1, (m - 1) // 2 + 1):
            v -= 2.0 * np.cos(2.0 * k * theta) / (4.0 * k**2 - 1)
    w[1:m] = 2.0 * v / m
    return w


@dataclass(frozen=True, eq=False)
class ChannelGrid:
    """Collocation grid for the periodic channel [0, 2pi) x [0, a].

    n_x : even number of x collocation points (integer wavenumbers
        0..n_x/2 in one-sided storage).
    n_z : number of Chebyshev-Gauss-Lobatto points across the channel.
    height : channel height a.
    """

    n_x: int
    n_z: int
    height: float = 1.0
    x: np.ndarray = field(init=False, repr=False)
    z: np.ndarray = field(init=False, repr=False)
    wavenumbers: np.ndarray = field(init=False, repr=False)
    diff_z: np.ndarray = field(init=False, repr=False)
    diff2_z: np.ndarray = field(init=False, repr=False)
    weights_z: np.ndarray = field(init=False, repr=False)
    dealias_keep: int = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if self.n_x < 4 or self.n_x % 2 != 0:
            raise ValidationError(f"n_x must be even and >= 4, got {self.n_x}")
        if self.n_z < 9:
            raise ValidationError(f"n_z must be >= 9, got {self.n_z}")
        if self.height <= 0:
            raise ValidationError(f"height must be positive, got {self.height}")
        m = self.n_z - 1
        a = self.height
        object.__setattr__(self, "x", 2.0 * np.pi * np.arange(self.n_x) / self.n_x)
        object.__setattr__(self, "z", a * (1.0 + np.cos(np.pi * np.arange(m + 1) / m)) / 2.0)
        object.__setattr__(self, "wavenumbers", np.arange(self.n_x // 2 + 1))
        object.__setattr__(self, "diff_z", cheb_diff_matrix(m) * (2.0 / a))
        object.__setattr__(self, "diff2_z", self.diff_z @ self.diff_z)
        object.__setattr__(self, "weights_z", clenshaw_curtis_weights(m) * (a / 2.0))
        object.__setattr__(self, "dealias_keep", self.n_x // 3)

    @property
    def n_modes(self) -> int:
        return self.n_x // 2 + 1

    @property
    def upper_wall(self) -> int:
        """z index of the noisy upper wall z = a."""
        return 0

    @property
    def lower_wall(self) -> int:
        return self.n_z - 1

    # ----- transforms ------------------------------------------------------

    def to_spectral(self, phys: np.ndarray) -> np.ndarray:
        """Physical (n_x, n_z, ...) -> one-sided coefficients (n_modes, n_z, ...)."""
        return np.fft.rfft(phys, axis=0) / self.n_x

    def to_physical(self, coeffs: np.ndarray, pad: int = 1) -> np.ndarray:
        """Coefficients -> physical values, optionally on a pad*n_x fine grid.

        Padding evaluates the same trigonometric polynomial on more points,
        which makes x quadrature of triple products exact.
        """
        m_x = pad * self.n_x
        if pad == 1:
            return np.fft.irfft(coeffs * self.n_x, n=m_x, axis=0)
        padded = np.zeros((m_x // 2 + 1,) + coeffs.shape[1:], dtype=complex)
        padded[: self.n_modes] = coeffs
        return np.fft.irfft(padded * m_x, n=m_x, axis=0)

    def dealias(self, coeffs: np.ndarray) -> np.ndarray:
        """Zero every mode above the 2/3-rule cutoff (returns a copy)."""
        out = coeffs.copy()
        out[self.dealias_keep + 1 :] = 0.0
        return out

    def dz(self, coeffs: np.ndarray) -> np.ndarray:
        """Wall-normal derivative along axis 1 of a coefficient array."""
        moved = np.moveaxis(coeffs, 1, -1)
        return np.moveaxis(moved @ self.diff_z.T, -1, 1)

    def dx(self, coeffs: np.ndarray) -> np.ndarray:
        """Periodic derivative: multiply mode k by i k."""
        k = self.wavenumbers.reshape((-1,) + (1,) * (coeffs.ndim - 1))
        return 1j * k * coeffs

    # ----- quadrature ------------------------------------------------------

    def integrate(self, phys: np.ndarray) -> float:
        """Integral over the channel of physical values (m_x, n_z)."""
        m_x = phys.shape[0]
        column = phys.sum(axis=0) * (2.0 * np.pi / m_x)
        return float(np.real(column @ self.weights_z))

    def integrate_z(self, values_z: np.ndarray) -> float:
        """Integral over [0, a] of values on the z grid."""
        return float(np.real(values_z @ self.weights_z))
