"""Cascade splitting, remainder solve, and reference direct solve.

The perturbation around the boundary convolution w is split into a fixed
number of cascade levels plus a remainder. Every level and the remainder
march with the same implicit Stokes step and left-point forcing built
from one shared bilinear form, so summing the levels reproduces the
direct perturbation solve exactly up to roundoff, step by step.

Level forcings, with S_i the sum of w and the first i+1 levels:

    level 0:    B(w, w)
    level i:    B(v_{i-1}, S_{i-1}) + B(S_{i-2}, v_{i-1})
    remainder:  B(r, r) + B(r, X) + B(X, r)
                + B(v_{N-1}, X) + B(S_{N-2}, v_{N-1}),   X = S_{N-1}

Summing telescopes to B(X + r, X + r) minus B(w, w + .) cross terms that
cancel, which is the direct forcing for the full perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .convolution import ConvolutionTrajectory
from .errors import NumericalAbort, ValidationError
from .fields import VelocityField, grad_norm, l2_norm
from .forms import bilinear_form, trilinear_b
from .grid import ChannelGrid
from .stokes import stokes_step

__all__ = [
    "FieldTrajectory",
    "solve_cascade_level",
    "solve_levels",
    "solve_remainder",
    "solve_direct",
    "picard_remainder",
    "assemble",
    "telescoping_residual",
    "energy_residual",
]

GROWTH_LIMIT = 1e3


@dataclass(frozen=True, eq=False)
class FieldTrajectory:
    """A velocity trajectory stored as spectral snapshots on a time grid."""

    grid: ChannelGrid
    times: np.ndarray
    snapshots: np.ndarray  # (n_times, n_modes, n_z, 2) complex
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.snapshots.shape[0] != len(self.times):
            raise ValidationError("snapshot count must match time count")

    @property
    def n_times(self) -> int:
        return len(self.times)

    def field_at(self, index: int) -> VelocityField:
        return VelocityField(self.grid, self.snapshots[index])


def _uniform_dt(times: np.ndarray) -> float:
    steps = np.diff(times)
    if steps.size == 0 or np.abs(steps - steps[0]).max() > 1e-12 * abs(steps[0]):
        raise ValidationError("trajectory requires a uniform time grid")
    return float(steps[0])


def _check_times(traj_w: ConvolutionTrajectory, others) -> None:
    for other in others:
        if not np.array_equal(other.times, traj_w.times):
            raise ValidationError("level trajectories must share the noise time grid")


def _guard(norm: float, scale: float, what: str) -> None:
    if not np.isfinite(norm) or norm > GROWTH_LIMIT * scale:
        raise NumericalAbort(
            reason=f"{what} norm {norm:.3e} exceeded the growth guard",
            advice="reduce the time step or shorten the run horizon",
        )


def solve_cascade_level(
    traj_w: ConvolutionTrajectory,
    level: int,
    lower,
    form: str = "skew",
    scheme: str = "be",
) -> FieldTrajectory:
    """March one cascade level over the convolution's time grid.

    lower holds the already solved levels 0 .. level-1 in order; level 0
    needs none of them. All levels start from rest.
    """
    if level < 0:
        raise ValidationError("level must be nonnegative")
    if len(lower) < level:
        raise ValidationError(f"level {level} needs the {level} lower levels")
    _check_times(traj_w, lower[:level])
    g = traj_w.grid
    dt = _uniform_dt(traj_w.times)
    n = traj_w.n_times
    snaps = np.zeros((n, g.n_modes, g.n_z, 2), dtype=complex)
    v = VelocityField.zero(g)
    for k in range(n - 1):
        w_k = traj_w.field_at(k)
        if level == 0:
            forcing = bilinear_form(w_k, w_k, form)
        else:
            prev = lower[level - 1].field_at(k)
            s1 = w_k
            for j in range(level):
                s1 = s1 + lower[j].field_at(k)
            s2 = s1 - prev
            forcing = bilinear_form(prev, s1, form) + bilinear_form(s2, prev, form)
        v = stokes_step(
            VelocityField(g, v.coeffs - dt * forcing.coeffs), dt, scheme
        )
        snaps[k + 1] = v.coeffs
    return FieldTrajectory(g, traj_w.times.copy(), snaps, label=f"level-{level}")


def solve_levels(
    traj_w: ConvolutionTrajectory,
    n_levels: int,
    form: str = "skew",
    scheme: str = "be",
) -> list:
    """Solve all cascade levels in order."""
    if n_levels < 1:
        raise ValidationError("need at least one cascade level")
    levels = []
    for i in range(n_levels):
        levels.append(solve_cascade_level(traj_w, i, levels, form=form, scheme=scheme))
    return levels


def _coupling_terms(traj_w, levels, form):
    """Per-step forcing pieces that do not involve the remainder."""
    g = traj_w.grid
    n = traj_w.n_times
    tail = levels[-1]
    x_sum = np.empty((n, g.n_modes, g.n_z, 2), dtype=complex)
    coupling = np.empty_like(x_sum)
    for k in range(n - 1):
        x_k = traj_w.field_at(k)
        for lev in levels:
            x_k = x_k + lev.field_at(k)
        x_sum[k] = x_k.coeffs
        tail_k = tail.field_at(k)
        s_prev = VelocityField(g, x_k.coeffs - tail_k.coeffs)
        c = bilinear_form(tail_k, x_k, form) + bilinear_form(s_prev, tail_k, form)
        coupling[k] = c.coeffs
    x_last = traj_w.field_at(n - 1)
    for lev in levels:
        x_last = x_last + lev.field_at(n - 1)
    x_sum[n - 1] = x_last.coeffs
    coupling[n - 1] = 0.0
    return x_sum, coupling


def solve_remainder(
    traj_w: ConvolutionTrajectory,
    levels,
    initial: VelocityField | None = None,
    form: str = "skew",
    scheme: str = "be",
) -> FieldTrajectory:
    """March the remainder equation that closes the splitting.

    The remainder carries the initial condition of the full problem and
    the quadratic self-interaction; its forcing couples to the cascade
    through the precomputed terms. A growth guard aborts the march when
    the solution leaves the trust region instead of overflowing silently.
    """
    if not levels:
        raise ValidationError("remainder needs the solved cascade levels")
    _check_times(traj_w, levels)
    g = traj_w.grid
    dt = _uniform_dt(traj_w.times)
    n = traj_w.n_times
    x_sum, coupling = _coupling_terms(traj_w, levels, form)
    scale = 1.0 + max(l2_norm(traj_w.field_at(k)) for k in range(n))
    snaps = np.zeros((n, g.n_modes, g.n_z, 2), dtype=complex)
    r = initial if initial is not None else VelocityField.zero(g)
    if initial is not None:
        scale += l2_norm(initial)
    snaps[0] = r.coeffs
    for k in range(n - 1):
        x_k = VelocityField(g, x_sum[k])
        forcing = (
            bilinear_form(r, r, form)
            + bilinear_form(r, x_k, form)
            + bilinear_form(x_k, r, form)
        )
        total = forcing.coeffs + coupling[k]
        r = stokes_step(VelocityField(g, r.coeffs - dt * total), dt, scheme)
        _guard(l2_norm(r), scale, "remainder")
        snaps[k + 1] = r.coeffs
    return FieldTrajectory(g, traj_w.times.copy(), snaps, label="remainder")


def solve_direct(
    traj_w: ConvolutionTrajectory,
    initial: VelocityField | None = None,
    form: str = "skew",
    scheme: str = "be",
) -> FieldTrajectory:
    """Unsplit reference solve for the full perturbation around w."""
    g = traj_w.grid
    dt = _uniform_dt(traj_w.times)
    n = traj_w.n_times
    scale = 1.0 + max(l2_norm(traj_w.field_at(k)) for k in range(n))
    snaps = np.zeros((n, g.n_modes, g.n_z, 2), dtype=complex)
    p = initial if initial is not None else VelocityField.zero(g)
    if initial is not None:
        scale += l2_norm(initial)
    snaps[0] = p.coeffs
    for k in range(n - 1):
        full = traj_w.field_at(k) + p
        forcing = bilinear_form(full, full, form)
        p = stokes_step(VelocityField(g, p.coeffs - dt * forcing.coeffs), dt, scheme)
        _guard(l2_norm(p), scale, "direct perturbation")
        snaps[k + 1] = p.coeffs
    return FieldTrajectory(g, traj_w.times.copy(), snaps, label="direct")


def picard_remainder(
    traj_w: ConvolutionTrajectory,
    levels,
    initial: VelocityField | None = None,
    form: str = "skew",
    scheme: str = "be",
    tol: float = 1e-11,
    max_iter: int = 60,
    max_halvings: int = 3,
) -> tuple:
    """Remainder by frozen-coefficient iteration on time slabs.

    Each sweep remarches the slab with the quadratic term linearized
    against the previous iterate's trajectory; the fixed point coincides
    with the stepping of solve_remainder exactly. If the sweep increments
    grow three times in a row the slab is halved and solved in two pieces;
    when no subdivision budget remains a NumericalAbort reports the
    divergence instead of returning a bad trajectory.

    Returns the trajectory and an info dict with per-slab sweep counts.
    """
    if not levels:
        raise ValidationError("remainder needs the solved cascade levels")
    _check_times(traj_w, levels)
    g = traj_w.grid
    dt = _uniform_dt(traj_w.times)
    n = traj_w.n_times
    x_sum, coupling = _coupling_terms(traj_w, levels, form)
    snaps = np.zeros((n, g.n_modes, g.n_z, 2), dtype=complex)
    snaps[0] = (initial if initial is not None else VelocityField.zero(g)).coeffs
    info = {"slabs": [], "sweeps": []}

    def sweep(k0, k1, guess):
        """One linearized march over [k0, k1]; returns the new iterate."""
        out = np.empty((k1 - k0 + 1,) + snaps.shape[1:], dtype=complex)
        out[0] = snaps[k0]
        cur = VelocityField(g, snaps[k0])
        for k in range(k0, k1):
            frozen = VelocityField(g, guess[k - k0])
            x_k = VelocityField(g, x_sum[k])
            forcing = (
                bilinear_form(frozen, cur, form)
                + bilinear_form(cur, x_k, form)
                + bilinear_form(x_k, cur, form)
            )
            total = forcing.coeffs + coupling[k]
            cur = stokes_step(VelocityField(g, cur.coeffs - dt * total), dt, scheme)
            out[k - k0 + 1] = cur.coeffs
        return out

    def solve_slab(k0, k1, halvings):
        guess = np.repeat(snaps[k0][None], k1 - k0 + 1, axis=0)
        deltas = []
        for it in range(1, max_iter + 1):
            new = sweep(k0, k1, guess)
            delta = np.abs(new - guess).max()
            deltas.append(delta)
            guess = new
            scale = 1.0 + np.abs(new).max()
            if delta <= tol * scale:
                snaps[k0 : k1 + 1] = new
                info["slabs"].append((k0, k1))
                info["sweeps"].append(it)
                return
            diverging = len(deltas) >= 3 and deltas[-1] > deltas[-2] > deltas[-3]
            if diverging or not np.isfinite(delta):
                break
        if halvings > 0 and k1 - k0 >= 2:
            mid = (k0 + k1) // 2
            solve_slab(k0, mid, halvings - 1)
            solve_slab(mid, k1, halvings - 1)
            return
        raise NumericalAbort(
            reason="remainder iteration stopped contracting",
            advice="shorten the time slab or reduce the step size",
        )

    solve_slab(0, n - 1, max_halvings)
    return FieldTrajectory(g, traj_w.times.copy(), snaps, label="remainder-picard"), info


def assemble(
    traj_w: ConvolutionTrajectory, levels, remainder: FieldTrajectory | None = None
) -> FieldTrajectory:
    """Full velocity trajectory: convolution plus levels plus remainder."""
    _check_times(traj_w, levels + ([remainder] if remainder is not None else []))
    total = traj_w.snapshots.copy()
    for lev in levels:
        total = total + lev.snapshots
    if remainder is not None:
        total = total + remainder.snapshots
    return FieldTrajectory(traj_w.grid, traj_w.times.copy(), total, label="assembled")


def telescoping_residual(
    traj_w: ConvolutionTrajectory,
    levels,
    remainder: FieldTrajectory,
    index: int,
    form: str = "skew",
) -> float:
    """Forcing-level defect of the splitting at one time index.

    The summed level and remainder forcings must reproduce the direct
    forcing of the assembled perturbation; with one shared bilinear form
    the defect sits at roundoff for every admissible level count.
    """
    w_k = traj_w.field_at(index)
    sums = [w_k]
    for lev in levels:
        sums.append(sums[-1] + lev.field_at(index))
    pieces = bilinear_form(w_k, w_k, form)
    for i in range(1, len(levels)):
        prev = levels[i - 1].field_at(index)
        pieces = pieces + bilinear_form(prev, sums[i], form)
        pieces = pieces + bilinear_form(sums[i - 1], prev, form)
    x_k = sums[-1]
    tail = levels[-1].field_at(index)
    r_k = remainder.field_at(index)
    pieces = pieces + bilinear_form(tail, x_k, form)
    pieces = pieces + bilinear_form(sums[-2], tail, form)
    pieces = pieces + bilinear_form(r_k, r_k, form)
    pieces = pieces + bilinear_form(r_k, x_k, form)
    pieces = pieces + bilinear_form(x_k, r_k, form)
    full = x_k + r_k
    direct = bilinear_form(full, full, form)
    return l2_norm(direct - pieces)


def energy_residual(
    traj_w: ConvolutionTrajectory, levels, remainder: FieldTrajectory
) -> np.ndarray:
    """Defect of the remainder energy balance along the trajectory.

    Balances the kinetic energy change and the accumulated dissipation of
    the remainder against the running time integral of the three trilinear
    production terms. All time integrals run from zero to each snapshot
    instant, so the residual vanishes identically at the start and decays
    first order under coupled step and noise refinement.
    """
    _check_times(traj_w, levels + [remainder])
    g = traj_w.grid
    n = traj_w.n_times
    tail = levels[-1]
    energy = np.empty(n)
    dissip = np.empty(n)
    produce = np.empty(n)
    for k in range(n):
        r_k = remainder.field_at(k)
        x_k = traj_w.field_at(k)
        for lev in levels:
            x_k = x_k + lev.field_at(k)
        tail_k = tail.field_at(k)
        s_prev = VelocityField(g, x_k.coeffs - tail_k.coeffs)
        energy[k] = 0.5 * l2_norm(r_k) ** 2
        dissip[k] = grad_norm(r_k) ** 2
        produce[k] = (
            trilinear_b(r_k, r_k, x_k)
            + trilinear_b(tail_k, r_k, x_k)
            + trilinear_b(s_prev, r_k, tail_k)
        )
    dt = np.diff(remainder.times)
    integrand = dissip - produce
    running = np.concatenate(
        [[0.0], np.cumsum(0.5 * dt * (integrand[1:] + integrand[:-1]))]
    )
    return np.abs(energy - energy[0] + running)
