"""Fractional Brownian sampling and the cylindrical wall-noise process.

Paths are sampled exactly in law on uniform time grids. The default sampler
uses the Davies-Harte circulant embedding of fractional Gaussian noise; a
dense Cholesky factorization of the path covariance serves both as the
fallback (the embedding can lose positive semi-definiteness for short grids
with large Hurst index) and as an independent oracle for tests. Both
samplers are linear maps from iid standard normals, which is what makes the
exactness claims checkable: the implied covariance of each map can be
compared entrywise against the defining formula

    E[W(t) W(s)] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.

The boundary noise is a finite cylindrical sum over wall Fourier modes,
one independent complex path per retained mode, with sub-seeds derived by
counter-based splitting of a single master seed so that adding modes or
replicas never disturbs the paths already drawn.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import AdmissibilityError, ValidationError

__all__ = [
    "FbmGridPath",
    "NoiseCoefficients",
    "CylindricalBoundaryNoise",
    "fbm_covariance",
    "sample_fbm",
    "cholesky_fbm",
    "refine_path",
    "default_noise_coefficients",
    "sample_boundary_noise",
]

logger = logging.getLogger(__name__)

# Dense-oracle guard: covariance matrices beyond this size are a sign the
# caller wanted the FFT sampler instead.
MAX_DENSE_STEPS = 512

# Relative slack for eigenvalues of the circulant embedding: anything above
# -1e-12 * max is roundoff and gets clipped, anything below triggers the
# Cholesky fallback.
_PSD_SLACK = 1e-12


def _check_hurst(hurst):
    if not 0.0 < hurst < 1.0:
        raise AdmissibilityError("hurst", hurst, "0 < hurst < 1")


def fbm_covariance(t, s, hurst):
    """Covariance of fractional Brownian motion, elementwise in t and s."""
    _check_hurst(hurst)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0) or np.any(s < 0):
        raise ValidationError("fbm_covariance requires nonnegative times")
    h2 = 2.0 * hurst
    out = 0.5 * (t**h2 + s**h2 - np.abs(t - s) ** h2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class FbmGridPath:
    """One fBm sample on a uniform grid over [0, horizon].

    values[0] is exactly 0, and values[k] is the path at times[k]. The
    one-step increments are fractional Gaussian noise with variance
    (horizon / n_steps)^(2 hurst).
    """

    hurst: float
    horizon: float
    times: np.ndarray
    values: np.ndarray
    seed_info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.values.shape != self.times.shape or self.values.ndim != 1:
            raise ValidationError("times and values must be matching 1D arrays")
        if self.values[0] != 0.0:
            raise ValidationError("an fBm path starts at zero")

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def _fgn_circulant_eigs(hurst, n_steps):
    """Eigenvalues of the circulant embedding of unit-step fGn covariance."""
    j = np.arange(n_steps + 1, dtype=float)
    h2 = 2.0 * hurst
    gamma = 0.5 * ((j + 1) ** h2 - 2.0 * j**h2 + np.abs(j - 1) ** h2)
    first_row = np.concatenate([gamma, gamma[-2:0:-1]])
    return np.fft.fft(first_row).real


def _fgn_from_normals(normals, sqrt_eigs):
    """Map 2n iid standard normals through the embedding to n fGn samples.

    The packing is fixed: normals[0] and normals[1] feed the two real
    spectral lines (k = 0 and k = n), the rest pair up as real/imaginary
    parts of the strictly complex lines. Keeping this map explicit is what
    lets tests recover the full linear operator column by column.
    """
    m = len(sqrt_eigs)
    n = m // 2
    z = np.zeros(m, dtype=complex)
    z[0] = normals[0]
    z[n] = normals[1]
    if n > 1:
        z[1:n] = (normals[2::2] + 1j * normals[3::2]) / np.sqrt(2.0)
        z[n + 1 :] = np.conj(z[n - 1 : 0 : -1])
    x = np.sqrt(m) * np.fft.ifft(sqrt_eigs * z)
    return x.real[:n]


def _validate_grid(horizon, n_steps):
    if horizon <= 0:
        raise ValidationError(f"horizon must be positive, got {horizon}")
    if n_steps < 1:
        raise ValidationError(f"n_steps must be >= 1, got {n_steps}")


def _rng_from(seed):
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed), seed
    seq = np.random.SeedSequence(seed)
    return np.random.default_rng(seq), seq


def sample_fbm(hurst, horizon, n_steps, seed) -> FbmGridPath:
    """Sample fBm exactly on a uniform grid via Davies-Harte.

    Falls back to the dense Cholesky oracle (with a logged notice) when the
    circulant embedding is not positive semi-definite, which can happen for
    small n_steps combined with Hurst indices near 1.
    """
    _check_hurst(hurst)
    _validate_grid(horizon, n_steps)
    rng, seq = _rng_from(seed)
    eigs = _fgn_circulant_eigs(hurst, n_steps)
    floor = -_PSD_SLACK * eigs.max()
    if eigs.min() < floor:
        logger.warning(
            "Davies-Harte embedding not PSD (min eigenvalue %.3e) for "
            "hurst=%g, n_steps=%d; falling back to Cholesky sampling",
            eigs.min(),
            hurst,
            n_steps,
        )
        return cholesky_fbm(hurst, horizon, n_steps, seq)
    sqrt_eigs = np.sqrt(np.clip(eigs, 0.0, None))
    normals = rng.standard_normal(2 * n_steps)
    fgn = _fgn_from_normals(normals, sqrt_eigs) * (horizon / n_steps) ** hurst
    values = np.concatenate([[0.0], np.cumsum(fgn)])
    times = np.linspace(0.0, horizon, n_steps + 1)
    return FbmGridPath(
        hurst=hurst,
        horizon=horizon,
        times=times,
        values=values,
        seed_info={"sampler": "davies-harte", "entropy": seq.entropy, "spawn_key": seq.spawn_key},
    )


def _dense_covariance(hurst, times):
    return fbm_covariance(times[:, None], times[None, :], hurst)


def cholesky_fbm(hurst, horizon, n_steps, seed) -> FbmGridPath:
    """Dense-oracle sampler: Cholesky factor of the grid covariance.

    Exact in law like the FFT sampler, but O(n^3); guarded at
    MAX_DENSE_STEPS so nobody reaches for it at production sizes.
    """
    _check_hurst(hurst)
    _validate_grid(horizon, n_steps)
    if n_steps > MAX_DENSE_STEPS:
        raise ValidationError(
            f"cholesky_fbm is a dense oracle, n_steps <= {MAX_DENSE_STEPS} "
            f"(got {n_steps}); use sample_fbm instead"
        )
    rng, seq = _rng_from(seed)
    times = np.linspace(0.0, horizon, n_steps + 1)
    cov = _dense_covariance(hurst, times[1:])
    chol = np.linalg.cholesky(cov)
    values = np.concatenate([[0.0], chol @ rng.standard_normal(n_steps)])
    return FbmGridPath(
        hurst=hurst,
        horizon=horizon,
        times=times,
        values=values,
        seed_info={"sampler": "cholesky", "entropy": seq.entropy, "spawn_key": seq.spawn_key},
    )


def _conditional_midpoint_system(hurst, times_coarse):
    """Mean operator and covariance factor for midpoints given coarse values.

    Returns (A, B) with midpoints = A @ values[1:] + B @ normals in law,
    conditioning on the coarse path (the zero at t = 0 is deterministic and
    drops out). Used by refine_path and, column by column, by the tests.
    """
    mids = 0.5 * (times_coarse[:-1] + times_coarse[1:])
    knowns = times_coarse[1:]
    cov_cc = _dense_covariance(hurst, knowns)
    cov_mc = fbm_covariance(mids[:, None], knowns[None, :], hurst)
    cov_mm = _dense_covariance(hurst, mids)
    solve = scipy.linalg.cho_solve(scipy.linalg.cho_factor(cov_cc), cov_mc.T)
    mean_op = solve.T
    cond = cov_mm - cov_mc @ solve
    cond = 0.5 * (cond + cond.T)
    # The conditional covariance is PD but can brush machine zero for very
    # smooth paths; clip the spectrum instead of failing.
    try:
        factor = np.linalg.cholesky(cond)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cond)
        factor = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
    return mean_op, factor


def refine_path(path: FbmGridPath, seed) -> FbmGridPath:
    """Conditionally sample the midpoints of a path (Brownian-bridge style).

    The returned path lives on the doubled grid, restricts exactly to the
    input on even indices, and has the correct unconditional law. The
    conditioning is dense, so the same MAX_DENSE_STEPS guard applies.
    """
    if path.n_steps > MAX_DENSE_STEPS:
        raise ValidationError(
            f"refine_path conditions on a dense covariance, n_steps <= "
            f"{MAX_DENSE_STEPS} (got {path.n_steps})"
        )
    rng, seq = _rng_from(seed)
    mean_op, factor = _conditional_midpoint_system(path.hurst, path.times)
    normals = rng.standard_normal(path.n_steps)
    mids = mean_op @ path.values[1:] + factor @ normals
    n_fine = 2 * path.n_steps
    values = np.empty(n_fine + 1)
    values[0::2] = path.values
    values[1::2] = mids
    times = np.linspace(0.0, path.horizon, n_fine + 1)
    return FbmGridPath(
        hurst=path.hurst,
        horizon=path.horizon,
        times=times,
        values=values,
        seed_info={
            "sampler": "refine",
            "entropy": seq.entropy,
            "spawn_key": seq.spawn_key,
            "parent": path.seed_info,
        },
    )


@dataclass(frozen=True)
class NoiseCoefficients:
    """Two-sided modal amplitudes sigma_n of the boundary datum, |n| <= n_max.

    amplitudes[n_max + n] is sigma_n. Hermitian symmetry
    sigma_{-n} = conj(sigma_n) is required so the wall signal is real.
    """

    amplitudes: np.ndarray
    n_max: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.n_max < 0:
            raise AdmissibilityError("noise.n_max", self.n_max, "n_max >= 0")
        if amps.shape != (2 * self.n_max + 1,):
            raise ValidationError(
                f"amplitudes must have length 2*n_max+1 = {2 * self.n_max + 1}, "
                f"got shape {amps.shape}"
            )
        scale = max(1.0, float(np.abs(amps).max()))
        mirrored = np.conj(amps[::-1])
        if np.abs(amps - mirrored).max() > 1e-12 * scale:
            raise AdmissibilityError(
                "noise.amplitudes",
                amps,
                "Hermitian symmetry sigma_{-n} = conj(sigma_n)",
            )

    def amplitude(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0.0
        return complex(self.amplitudes[self.n_max + n])


def default_noise_coefficients(n_max: int = 8, sigma0: float = 0.1) -> NoiseCoefficients:
    """Default amplitude law sigma_n = sigma0 * (1 + n^2)^(-1/2)."""
    n = np.arange(-n_max, n_max + 1, dtype=float)
    return NoiseCoefficients(
        amplitudes=sigma0 / np.sqrt(1.0 + n**2), n_max=n_max
    )


def critical_noise_coefficients(n_max: int, sigma0: float = 0.1,
                                sobolev_deficit: float = 0.0) -> NoiseCoefficients:
    """Amplitude law saturating the declared boundary smoothness class.

    sigma_n = sigma0 * (1 + n^2)^(-(1 + 2s)/4 - delta) with a small
    summability margin delta. The square sum over an octave of modes is
    then nearly flat, which is what makes integrability thresholds
    observable; the default law decays a full power faster and hides
    them.
    """
    if not 0.0 <= sobolev_deficit < 0.5:
        raise AdmissibilityError(
            "sobolev_deficit", sobolev_deficit, "0 <= s < 1/2"
        )
    n = np.arange(-n_max, n_max + 1, dtype=float)
    power = (1.0 + 2.0 * sobolev_deficit) / 4.0 + 0.005
    return NoiseCoefficients(
        amplitudes=sigma0 * (1.0 + n**2) ** (-power), n_max=n_max
    )


@dataclass(frozen=True)
class CylindricalBoundaryNoise:
    """Sampled wall noise: one complex modal path per retained mode n >= 0.

    modal_paths[n, k] is the coefficient of exp(i n x) in the boundary
    datum path g W^H at times[k]; the negative modes follow by conjugation.
    Mode 0 is real. Each mode consumes its own counter-derived sub-seeds
    (two per mode for n >= 1: real and imaginary parts are independent real
    fBms scaled by 1/sqrt(2), so E|C_n(t)|^2 = t^{2H}).
    """

    coeffs: NoiseCoefficients
    hurst: float
    horizon: float
    times: np.ndarray
    modal_paths: np.ndarray
    seed_info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.modal_paths.shape != (self.coeffs.n_max + 1, len(self.times)):
            raise ValidationError("modal_paths shape must be (n_max+1, n_times)")
        if np.abs(self.modal_paths[0].imag).max() > 0.0:
            raise ValidationError("mode-0 path must be real")

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def increments(self) -> np.ndarray:
        """Modal increments, shape (n_max+1, n_steps)."""
        return np.diff(self.modal_paths, axis=1)


# Spawn-key tags keep the different consumers of the master seed disjoint.
_TAG_BOUNDARY_MODE = 1
_TAG_REFINE = 2


def mode_seed(master_seed, replica: int, mode: int, part: int) -> np.random.SeedSequence:
    """Counter-based sub-seed for one scalar path component.

    Derivation is positional, never sequential: the sub-seed for (replica,
    mode, part) depends only on those indices, so enlarging n_max or adding
    replicas can never perturb paths that already exist.
    """
    return np.random.SeedSequence(
        entropy=master_seed, spawn_key=(_TAG_BOUNDARY_MODE, replica, mode, part)
    )


def refine_seed(master_seed, replica: int, mode: int, part: int, level: int) -> np.random.SeedSequence:
    """Sub-seed for the conditional midpoints at one refinement level."""
    return np.random.SeedSequence(
        entropy=master_seed, spawn_key=(_TAG_REFINE, replica, mode, part, level)
    )


def sample_boundary_noise(
    coeffs: NoiseCoefficients,
    hurst: float,
    horizon: float,
    n_steps: int,
    master_seed: int,
    replica: int = 0,
) -> CylindricalBoundaryNoise:
    """Draw the cylindrical boundary noise on a uniform grid.

    Every retained mode gets an independent standard complex fBm C_n
    (real for n = 0), scaled by its amplitude sigma_n. Sub-seeds come from
    ``mode_seed`` and are recorded in ``seed_info`` for the manifest.
    """
    _check_hurst(hurst)
    _validate_grid(horizon, n_steps)
    n_max = coeffs.n_max
    paths = np.zeros((n_max + 1, n_steps + 1), dtype=complex)
    spawn_keys = {}
    for n in range(n_max + 1):
        re_seq = mode_seed(master_seed, replica, n, 0)
        re_path = sample_fbm(hurst, horizon, n_steps, re_seq)
        if n == 0:
            unit = re_path.values.astype(complex)
            spawn_keys[n] = [list(re_seq.spawn_key)]
        else:
            im_seq = mode_seed(master_seed, replica, n, 1)
            im_path = sample_fbm(hurst, horizon, n_steps, im_seq)
            unit = (re_path.values + 1j * im_path.values) / np.sqrt(2.0)
            spawn_keys[n] = [list(re_seq.spawn_key), list(im_seq.spawn_key)]
        paths[n] = coeffs.amplitude(n) * unit
    times = np.linspace(0.0, horizon, n_steps + 1)
    return CylindricalBoundaryNoise(
        coeffs=coeffs,
        hurst=hurst,
        horizon=horizon,
        times=times,
        modal_paths=paths,
        seed_info={
            "master_seed": master_seed,
            "replica": replica,
            "spawn_keys": spawn_keys,
        },
    )


def refine_boundary_noise(noise: CylindricalBoundaryNoise) -> CylindricalBoundaryNoise:
    """Conditionally refine every modal path onto the doubled time grid.

    The coarse paths are preserved exactly at even indices; the midpoint
    draws use dedicated sub-seeds derived from the recorded master seed, so
    refinement is itself reproducible. Each call doubles n_steps; the
    refinement level is tracked so repeated calls stay independent.
    """
    info = noise.seed_info
    if "master_seed" not in info:
        raise ValidationError(
            "refine_boundary_noise needs seed_info from sample_boundary_noise"
        )
    master = info["master_seed"]
    replica = info.get("replica", 0)
    level = info.get("refine_level", 0) + 1
    n_max = noise.coeffs.n_max
    n_fine = 2 * noise.n_steps
    paths = np.zeros((n_max + 1, n_fine + 1), dtype=complex)
    for n in range(n_max + 1):
        amp = noise.coeffs.amplitude(n)
        if amp == 0:
            continue
        unit = noise.modal_paths[n] / amp
        re_coarse = FbmGridPath(
            hurst=noise.hurst,
            horizon=noise.horizon,
            times=noise.times,
            values=unit.real if n == 0 else unit.real * np.sqrt(2.0),
        )
        re_fine = refine_path(re_coarse, refine_seed(master, replica, n, 0, level))
        if n == 0:
            paths[n] = amp * re_fine.values.astype(complex)
            continue
        im_coarse = FbmGridPath(
            hurst=noise.hurst,
            horizon=noise.horizon,
            times=noise.times,
            values=unit.imag * np.sqrt(2.0),
        )
        im_fine = refine_path(im_coarse, refine_seed(master, replica, n, 1, level))
        paths[n] = amp * (re_fine.values + 1j * im_fine.values) / np.sqrt(2.0)
    times = np.linspace(0.0, noise.horizon, n_fine + 1)
    new_info = dict(info)
    new_info["refine_level"] = level
    return CylindricalBoundaryNoise(
        coeffs=noise.coeffs,
        hurst=noise.hurst,
        horizon=noise.horizon,
        times=times,
        modal_paths=paths,
        seed_info=new_info,
    )


def truncate_boundary_noise(noise: CylindricalBoundaryNoise,
                            n_max: int) -> CylindricalBoundaryNoise:
    """Restrict sampled noise to modes |n| <= n_max, keeping their paths.

    Truncation commutes with refinement, so one full-cutoff sample can
    drive a whole ladder of runs with nested mode content.
    """
    full = noise.coeffs.n_max
    if not 0 <= n_max <= full:
        raise ValidationError(
            f"truncation cutoff must lie in [0, {full}], got {n_max}"
        )
    coeffs = NoiseCoefficients(
        amplitudes=noise.coeffs.amplitudes[full - n_max: full + n_max + 1],
        n_max=n_max,
    )
    return CylindricalBoundaryNoise(
        coeffs=coeffs,
        hurst=noise.hurst,
        horizon=noise.horizon,
        times=noise.times,
        modal_paths=noise.modal_paths[: n_max + 1],
        seed_info=dict(noise.seed_info, truncated_to=n_max),
    )
