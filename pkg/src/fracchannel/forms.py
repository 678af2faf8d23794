"""Advection bilinear forms and the trilinear convection integral.

All variants mask their inputs with the 2/3 rule, evaluate products on a
padded physical grid so the retained modes carry no aliasing error, and
mask the output again. The public bilinear form is Leray projected, so it
maps the masked divergence-free subspace to itself and a sum of forms can
be telescoped exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .fields import VelocityField
from .grid import ChannelGrid
from .stokes import leray_project

__all__ = ["bilinear_form", "trilinear_b"]

_FORMS = ("skew", "conservative", "convective")


def _masked(u: VelocityField) -> np.ndarray:
    return u.grid.dealias(u.coeffs)


def _spectral_from_padded(grid: ChannelGrid, phys: np.ndarray) -> np.ndarray:
    m_x = phys.shape[0]
    return np.fft.rfft(phys, axis=0)[: grid.n_modes] / m_x


def _convective(grid: ChannelGrid, uc: np.ndarray, vc: np.ndarray) -> np.ndarray:
    u_phys = grid.to_physical(uc, pad=2)
    dvx = grid.to_physical(grid.dx(vc), pad=2)
    dvz = grid.to_physical(grid.dz(vc), pad=2)
    phys = u_phys[..., :1] * dvx + u_phys[..., 1:] * dvz
    return _spectral_from_padded(grid, phys)


def _conservative(grid: ChannelGrid, uc: np.ndarray, vc: np.ndarray) -> np.ndarray:
    u_phys = grid.to_physical(uc, pad=2)
    v_phys = grid.to_physical(vc, pad=2)
    t1 = _spectral_from_padded(grid, u_phys[..., :1] * v_phys)
    t2 = _spectral_from_padded(grid, u_phys[..., 1:] * v_phys)
    return grid.dx(t1) + grid.dz(t2)


def bilinear_form(u: VelocityField, v: VelocityField, form: str = "skew") -> VelocityField:
    """Projected advection term B(u, v), i.e. P[(u . grad) v] and variants.

    "convective" is the plain transport form, "conservative" the divergence
    of the momentum tensor, and "skew" their average, which pairs to an
    exactly antisymmetric trilinear form. The projection is applied once,
    after averaging.
    """
    if form not in _FORMS:
        raise ValidationError(f"unknown form {form!r}, expected one of {_FORMS}")
    g = u.grid
    uc = _masked(u)
    vc = _masked(v)
    if form == "convective":
        out = _convective(g, uc, vc)
    elif form == "conservative":
        out = _conservative(g, uc, vc)
    else:
        out = 0.5 * (_convective(g, uc, vc) + _conservative(g, uc, vc))
    return leray_project(VelocityField(g, g.dealias(out)))


def trilinear_b(u: VelocityField, v: VelocityField, w: VelocityField) -> float:
    """Convection integral b(u, v, w) = integral of ((u . grad) v) . w.

    Inputs are masked like the bilinear form; the quadrature is exact for
    the retained modes, so b(u, v, v) vanishes at roundoff whenever u is
    solenoidal with no penetration and the wall-normal resolution covers
    the product degrees.
    """
    g = u.grid
    uc = _masked(u)
    vc = _masked(v)
    wc = _masked(w)
    u_phys = g.to_physical(uc, pad=2)
    w_phys = g.to_physical(wc, pad=2)
    dvx = g.to_physical(g.dx(vc), pad=2)
    dvz = g.to_physical(g.dz(vc), pad=2)
    conv = u_phys[..., :1] * dvx + u_phys[..., 1:] * dvz
    return float(g.integrate((conv * w_phys).sum(axis=-1)))
