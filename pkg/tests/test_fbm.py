"""fBm samplers: law exactness via linear maps, determinism, noise assembly."""

import numpy as np
import pytest

from fracchannel.errors import AdmissibilityError, ValidationError
from fracchannel import fbm as fbm_mod
from fracchannel.fbm import (
    CylindricalBoundaryNoise,
    FbmGridPath,
    NoiseCoefficients,
    cholesky_fbm,
    default_noise_coefficients,
    fbm_covariance,
    refine_boundary_noise,
    refine_path,
    sample_boundary_noise,
    sample_fbm,
)


def davies_harte_value_map(hurst, horizon, n_steps):
    """Recover the linear map normals -> path values column by column."""
    eigs = fbm_mod._fgn_circulant_eigs(hurst, n_steps)
    sqrt_eigs = np.sqrt(np.clip(eigs, 0.0, None))
    scale = (horizon / n_steps) ** hurst
    cols = []
    for i in range(2 * n_steps):
        e = np.zeros(2 * n_steps)
        e[i] = 1.0
        cols.append(np.cumsum(fbm_mod._fgn_from_normals(e, sqrt_eigs)) * scale)
    return np.stack(cols, axis=1)


def test_covariance_hand_value():
    # H = 3/4, t = 1/2, s = 1: (0.5^1.5 + 1 - 0.5^1.5) / 2 = 1/2
    assert fbm_covariance(0.5, 1.0, 0.75) == pytest.approx(0.5, abs=1e-15)


def test_covariance_symmetry_and_diagonal():
    rng = np.random.default_rng(3)
    for _ in range(200):
        h = rng.uniform(0.05, 0.95)
        t, s = rng.uniform(0.0, 2.0, size=2)
        assert fbm_covariance(t, s, h) == pytest.approx(fbm_covariance(s, t, h))
        assert fbm_covariance(t, t, h) == pytest.approx(t ** (2 * h))


def test_covariance_rejects_bad_args():
    with pytest.raises(AdmissibilityError):
        fbm_covariance(0.5, 0.5, 1.5)
    with pytest.raises(ValidationError):
        fbm_covariance(-0.1, 0.5, 0.8)


@pytest.mark.parametrize("hurst", [0.6, 0.75, 0.9])
def test_both_samplers_are_exact_in_law(hurst):
    """Implied covariance of each sampler matches the formula to 1e-10."""
    n, horizon = 16, 1.0
    times = np.linspace(0.0, horizon, n + 1)[1:]
    target = fbm_covariance(times[:, None], times[None, :], hurst)

    value_map = davies_harte_value_map(hurst, horizon, n)
    assert np.abs(value_map @ value_map.T - target).max() < 1e-10

    chol = np.linalg.cholesky(target)
    assert np.abs(chol @ chol.T - target).max() < 1e-10


def test_increment_variance_in_law():
    hurst, n, horizon = 0.85, 12, 0.5
    value_map = davies_harte_value_map(hurst, horizon, n)
    incr_map = np.diff(np.vstack([np.zeros(2 * n), value_map]), axis=0)
    var = np.diag(incr_map @ incr_map.T)
    assert var == pytest.approx(np.full(n, (horizon / n) ** (2 * hurst)), rel=1e-12)


def test_sampler_determinism_and_seed_sensitivity():
    a = sample_fbm(0.9, 0.5, 200, 12345)
    b = sample_fbm(0.9, 0.5, 200, 12345)
    c = sample_fbm(0.9, 0.5, 200, 12346)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.values[0] == 0.0
    assert a.n_steps == 200 and a.dt == pytest.approx(0.5 / 200)


def test_cholesky_oracle_guard():
    with pytest.raises(ValidationError):
        cholesky_fbm(0.8, 1.0, 513, 0)


def test_sampler_argument_validation():
    with pytest.raises(AdmissibilityError):
        sample_fbm(0.0, 1.0, 10, 0)
    with pytest.raises(ValidationError):
        sample_fbm(0.8, -1.0, 10, 0)
    with pytest.raises(ValidationError):
        sample_fbm(0.8, 1.0, 0, 0)


def test_non_psd_embedding_falls_back_to_cholesky(monkeypatch, caplog):
    def fake_eigs(hurst, n_steps):
        out = np.ones(2 * n_steps)
        out[-1] = -1.0
        return out

    monkeypatch.setattr(fbm_mod, "_fgn_circulant_eigs", fake_eigs)
    with caplog.at_level("WARNING", logger="fracchannel.fbm"):
        path = sample_fbm(0.9, 1.0, 8, 7)
    assert path.seed_info["sampler"] == "cholesky"
    assert any("falling back" in r.message for r in caplog.records)


def test_refine_restricts_exactly_and_is_deterministic():
    path = sample_fbm(0.85, 0.5, 64, 99)
    fine = refine_path(path, 100)
    fine2 = refine_path(path, 100)
    assert fine.n_steps == 128
    assert np.array_equal(fine.values[0::2], path.values)
    assert np.array_equal(fine.values, fine2.values)


def test_refine_has_exact_unconditional_law():
    hurst, n, horizon = 0.8, 8, 1.0
    mean_op, factor = fbm_mod._conditional_midpoint_system(
        hurst, np.linspace(0.0, horizon, n + 1)
    )
    coarse_times = np.linspace(0.0, horizon, n + 1)[1:]
    cov_cc = fbm_covariance(coarse_times[:, None], coarse_times[None, :], hurst)
    n_fine = 2 * n
    p = np.zeros((n_fine, n))
    q = np.zeros((n_fine, n))
    for j in range(1, n + 1):
        p[2 * j - 1, j - 1] = 1.0
    for j in range(n):
        p[2 * j, :] = mean_op[j]
        q[2 * j, :] = factor[j]
    cov_fine = p @ cov_cc @ p.T + q @ q.T
    fine_times = np.linspace(0.0, horizon, n_fine + 1)[1:]
    target = fbm_covariance(fine_times[:, None], fine_times[None, :], hurst)
    assert np.abs(cov_fine - target).max() < 1e-10


def test_refine_guard():
    path = sample_fbm(0.8, 1.0, 600, 1)
    with pytest.raises(ValidationError):
        refine_path(path, 2)


def test_default_noise_coefficients_law():
    coeffs = default_noise_coefficients(n_max=8, sigma0=0.1)
    assert coeffs.amplitude(0) == pytest.approx(0.1)
    for n in (1, 5, 8):
        expected = 0.1 / np.sqrt(1.0 + n**2)
        assert coeffs.amplitude(n) == pytest.approx(expected)
        assert coeffs.amplitude(-n) == pytest.approx(np.conj(coeffs.amplitude(n)))
    assert coeffs.amplitude(9) == 0.0


def test_hermitian_violation_rejected():
    amps = np.array([0.1j, 0.2, 0.1], dtype=complex)  # sigma_{-1} != conj(sigma_1)
    with pytest.raises(AdmissibilityError):
        NoiseCoefficients(amplitudes=amps, n_max=1)
    # A valid complex pair passes.
    ok = NoiseCoefficients(
        amplitudes=np.array([0.1 - 0.05j, 0.2, 0.1 + 0.05j]), n_max=1
    )
    assert ok.amplitude(-1) == pytest.approx(np.conj(ok.amplitude(1)))


def test_boundary_noise_shapes_and_mode_zero_real():
    coeffs = default_noise_coefficients(n_max=4)
    noise = sample_boundary_noise(coeffs, 0.9, 0.5, 50, master_seed=2024)
    assert noise.modal_paths.shape == (5, 51)
    assert np.abs(noise.modal_paths[0].imag).max() == 0.0
    assert np.all(noise.modal_paths[:, 0] == 0.0)
    assert noise.increments().shape == (5, 50)


def test_boundary_noise_reproducible_and_replica_independent():
    coeffs = default_noise_coefficients(n_max=3)
    a = sample_boundary_noise(coeffs, 0.85, 0.5, 40, master_seed=7)
    b = sample_boundary_noise(coeffs, 0.85, 0.5, 40, master_seed=7)
    c = sample_boundary_noise(coeffs, 0.85, 0.5, 40, master_seed=7, replica=1)
    assert np.array_equal(a.modal_paths, b.modal_paths)
    assert not np.array_equal(a.modal_paths, c.modal_paths)


def test_adding_modes_never_perturbs_existing_paths():
    small = sample_boundary_noise(
        default_noise_coefficients(n_max=3), 0.9, 0.5, 30, master_seed=11
    )
    large = sample_boundary_noise(
        default_noise_coefficients(n_max=8), 0.9, 0.5, 30, master_seed=11
    )
    assert np.array_equal(large.modal_paths[:4], small.modal_paths)


def test_single_mode_zero_is_scalar_fbm():
    coeffs = NoiseCoefficients(amplitudes=np.array([0.3 + 0j]), n_max=0)
    noise = sample_boundary_noise(coeffs, 0.8, 1.0, 25, master_seed=5)
    unit = sample_fbm(0.8, 1.0, 25, fbm_mod.mode_seed(5, 0, 0, 0))
    assert np.allclose(noise.modal_paths[0].real, 0.3 * unit.values)
    assert np.abs(noise.modal_paths[0].imag).max() == 0.0


def test_modal_paths_mutually_independent_monte_carlo():
    """Empirical cross-covariance between distinct modes stays at MC noise."""
    coeffs = default_noise_coefficients(n_max=3, sigma0=1.0)
    horizon, n_steps, reps = 1.0, 8, 600
    finals = np.zeros((reps, 4), dtype=complex)
    for rep in range(reps):
        noise = sample_boundary_noise(
            coeffs, 0.9, horizon, n_steps, master_seed=314, replica=rep
        )
        finals[rep] = noise.modal_paths[:, -1]
    scale = horizon ** (2 * 0.9)
    for n in range(4):
        for m in range(n + 1, 4):
            amp = abs(coeffs.amplitude(n) * coeffs.amplitude(m)) * scale
            cross = np.mean(finals[:, n] * np.conj(finals[:, m]))
            assert abs(cross) < 5.0 * amp / np.sqrt(reps)
    # And each modulus has the scalar fBm variance sigma_n^2 t^{2H}.
    for n in range(4):
        var = np.mean(np.abs(finals[:, n]) ** 2)
        expected = abs(coeffs.amplitude(n)) ** 2 * scale
        assert var == pytest.approx(expected, rel=0.25)


def test_refine_boundary_noise_restricts_exactly():
    coeffs = default_noise_coefficients(n_max=2)
    noise = sample_boundary_noise(coeffs, 0.9, 0.5, 20, master_seed=77)
    fine = refine_boundary_noise(noise)
    assert fine.n_steps == 40
    assert np.allclose(fine.modal_paths[:, 0::2], noise.modal_paths, atol=1e-14)
    again = refine_boundary_noise(noise)
    assert np.array_equal(fine.modal_paths, again.modal_paths)
    finer = refine_boundary_noise(fine)
    assert finer.n_steps == 80
