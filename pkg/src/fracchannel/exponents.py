"""Exponent bookkeeping for the boundary-noise splitting scheme.

The driving noise is fractional Brownian with Hurst parameter H, acting on
the upper wall through a datum of Sobolev regularity -s. Those two numbers
fix a critical integrability exponent

    q_star = 2 / (2 s + 5 - 4 H),

and the linear boundary response lives in L^{2q} spaces only for q below
q_star. A working integrability target r in (2, 2 q_star) then selects a
splitting depth N together with ladders of Stokes exponents q_i and
Lebesgue exponents r_i, all coupled by the chain identity
1/q_{i+1} = 1/r_i + 1/r. Everything here is closed-form arithmetic; the
interval selection for N is done in exact rational arithmetic so that grid
points such as r = 3 land in the mathematically correct interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import AdmissibilityError

__all__ = [
    "NoiseParams",
    "ExponentLedger",
    "critical_integrability",
    "splitting_depth",
    "stokes_exponents",
    "lebesgue_exponents",
    "min_time_exponent",
    "build_ledger",
]

# Absolute slack for classifying a float r that sits essentially on an
# interval boundary. Boundaries are closed on the left, so a float a hair
# below one (e.g. float(8/3)) snaps up to the interval that starts there.
_BOUNDARY_TOL = Fraction(1, 10**12)


@dataclass(frozen=True)
class NoiseParams:
    """Admissible boundary-noise parameters.

    hurst : Hurst parameter H, must lie in (3/4, 1).
    sobolev_deficit : s >= 0, regularity deficit of the boundary datum;
        must lie in [0, 1/2) and satisfy H - s/2 > 3/4.
    """

    hurst: float
    sobolev_deficit: float = 0.0

    def __post_init__(self):
        h, s = self.hurst, self.sobolev_deficit
        if not 0.75 < h < 1.0:
            raise AdmissibilityError("noise.hurst", h, "3/4 < hurst < 1")
        if not 0.0 <= s < 0.5:
            raise AdmissibilityError(
                "noise.sobolev_deficit", s, "0 <= sobolev_deficit < 1/2"
            )
        if not h - s / 2.0 > 0.75:
            raise AdmissibilityError(
                "noise",
                (h, s),
                "hurst - sobolev_deficit/2 > 3/4",
            )


def critical_integrability(noise: NoiseParams) -> float:
    """Critical exponent q_star = 2 / (2 s + 5 - 4 H), always in (1, 2)."""
    return 2.0 / (2.0 * noise.sobolev_deficit + 5.0 - 4.0 * noise.hurst)


def _require_r_open_interval(r) -> Fraction:
    try:
        r_exact = Fraction(r)
    except (TypeError, ValueError):
        raise AdmissibilityError("r", r, "r must be a real number in (2, 4)")
    if not Fraction(2) < r_exact < Fraction(4):
        raise AdmissibilityError("r", r, "r must lie in the open interval (2, 4)")
    return r_exact


def splitting_depth(r) -> int:
    """Splitting depth N for the integrability target r.

    N is the unique integer >= 1 with

        2 (N + 2) / (N + 1) <= r < 2 (N + 1) / N,

    i.e. the half-open intervals [8/3, 3), [5/2, 8/3), ... partition (2, 4)
    from the right. Membership is decided exactly (``fractions``); a float
    within 1e-12 of a boundary is snapped to the lower-N interval whose
    closed left endpoint it represents.
    """
    r_exact = _require_r_open_interval(r)
    # N = ceil((4 - r) / (r - 2)), exact at both interval endpoints.
    ratio = (4 - r_exact) / (r_exact - 2)
    n = max(1, math.ceil(ratio))
    if n > 1:
        right_end = Fraction(2 * (n + 1), n)
        if right_end - r_exact <= _BOUNDARY_TOL:
            # e.g. float(8/3) sits just below 8/3; treat it as 8/3 itself.
            n -= 1
    return n


def stokes_exponents(r, n_levels: int) -> list[float]:
    """Stokes exponents q_i = 2r / (r + 2 + (i+1)(2 - r)), i = 0..N-1.

    The pair (r, n_levels) must be consistent, i.e. n_levels equal to
    ``splitting_depth(r)``; a mismatch is rejected rather than silently
    producing exponents for the wrong ladder.
    """
    _require_consistent(r, n_levels)
    rf = float(r)
    return [2.0 * rf / (rf + 2.0 + (i + 1) * (2.0 - rf)) for i in range(n_levels)]


def lebesgue_exponents(r, n_levels: int) -> list[float]:
    """Lebesgue exponents r_i = 2r / ((i+1)(2 - r) + 2), i = 0..N-1."""
    _require_consistent(r, n_levels)
    rf = float(r)
    return [2.0 * rf / ((i + 1) * (2.0 - rf) + 2.0) for i in range(n_levels)]


def min_time_exponent(r, n_levels: int) -> float:
    """Smallest admissible time exponent p_min = 2^N r / (r - 2)."""
    _require_consistent(r, n_levels)
    rf = float(r)
    return (2.0**n_levels) * rf / (rf - 2.0)


def _require_consistent(r, n_levels):
    n_from_r = splitting_depth(r)
    if n_levels != n_from_r:
        raise AdmissibilityError(
            "n_levels",
            n_levels,
            f"n_levels must equal splitting_depth(r) = {n_from_r} for r = {r}",
        )


@dataclass(frozen=True)
class ExponentLedger:
    """Complete, self-validating exponent bookkeeping for one run.

    Fields mirror the derivation chain: the critical exponent q_star, the
    chosen integrability target r in (2, 2 q_star), the splitting depth
    n_levels, the exponent ladders q / r_levels, the minimum time exponent
    p_min, and the path-in-time exponent time_exp = 2q/(q-1) at q = r/2.
    Construction re-checks every structural identity, so a ledger instance
    can be trusted downstream without re-derivation.
    """

    q_star: float
    r: float
    n_levels: int
    q: tuple[float, ...]
    r_levels: tuple[float, ...]
    p_min: float
    time_exp: float

    def __post_init__(self):
        if not (2.0 < self.r < 2.0 * self.q_star):
            raise AdmissibilityError(
                "ledger.r", self.r, f"2 < r < 2*q_star = {2.0 * self.q_star}"
            )
        if self.n_levels < 1 or self.n_levels != splitting_depth(self.r):
            raise AdmissibilityError(
                "ledger.n_levels", self.n_levels, "n_levels == splitting_depth(r)"
            )
        ladders = list(self.q) + list(self.r_levels) + [self.p_min, self.time_exp]
        if not all(v > 1.0 for v in ladders):
            raise AdmissibilityError(
                "ledger", ladders, "every exponent must exceed 1"
            )
        for name, seq in (("q", self.q), ("r_levels", self.r_levels)):
            if any(a >= b for a, b in zip(seq, seq[1:])):
                raise AdmissibilityError(
                    f"ledger.{name}", seq, f"{name} must be strictly increasing"
                )
        # Chain identity 1/q_{i+1} = 1/r_i + 1/r, the glue between ladders.
        for i in range(self.n_levels - 1):
            lhs = 1.0 / self.q[i + 1]
            rhs = 1.0 / self.r_levels[i] + 1.0 / self.r
            if abs(lhs - rhs) > 1e-12:
                raise AdmissibilityError(
                    "ledger.q",
                    (i + 1, lhs, rhs),
                    "chain identity 1/q_{i+1} = 1/r_i + 1/r",
                )

    def as_dict(self) -> dict:
        return {
            "q_star": self.q_star,
            "r": self.r,
            "n_levels": self.n_levels,
            "q": list(self.q),
            "r_levels": list(self.r_levels),
            "p_min": self.p_min,
            "time_exp": self.time_exp,
        }


def build_ledger(noise: NoiseParams, r) -> ExponentLedger:
    """Derive the full exponent ledger for noise parameters and target r."""
    q_star = critical_integrability(noise)
    rf = float(r)
    if not (2.0 < rf < 2.0 * q_star):
        raise AdmissibilityError(
            "r", r, f"2 < r < 2*q_star = {2.0 * q_star} for these noise parameters"
        )
    n = splitting_depth(r)
    q = tuple(stokes_exponents(r, n))
    r_levels = tuple(lebesgue_exponents(r, n))
    p_min = min_time_exponent(r, n)
    q0 = rf / 2.0
    time_exp = 2.0 * q0 / (q0 - 1.0)
    return ExponentLedger(
        q_star=q_star,
        r=rf,
        n_levels=n,
        q=q,
        r_levels=r_levels,
        p_min=p_min,
        time_exp=time_exp,
    )
