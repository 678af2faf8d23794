import numpy as np
import pytest

from fracchannel.convolution import evolve_convolution
from fracchannel.diagnostics import (
    ThresholdTable,
    hurst_recovery_report,
    interior_decay_probe,
    threshold_experiment,
    vorticity_snapshot,
)
from fracchannel.errors import AdmissibilityError, ValidationError
from fracchannel.exponents import NoiseParams
from fracchannel.fbm import (
    critical_noise_coefficients,
    default_noise_coefficients,
    refine_boundary_noise,
    sample_boundary_noise,
    truncate_boundary_noise,
)
from fracchannel.fields import VelocityField
from fracchannel.grid import ChannelGrid

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def fine_grid():
    return ChannelGrid(n_x=128, n_z=129)


@pytest.fixture(scope="module")
def analytic_field(fine_grid):
    a = fine_grid.height
    X, Z = np.meshgrid(fine_grid.x, fine_grid.z, indexing="ij")
    phys = np.stack(
        [np.sin(X) * np.sin(np.pi * Z / a),
         np.cos(2 * X) * np.cos(np.pi * Z / a)],
        axis=-1,
    )
    return VelocityField.from_physical(fine_grid, phys)


def interior_box(grid):
    a = grid.height
    return (0.0, TWO_PI, 0.3 * a, 0.7 * a)


def test_probe_analytic_field_decays_fast(analytic_field, fine_grid):
    rate = interior_decay_probe(analytic_field, interior_box(fine_grid))
    assert rate > 50.0


def test_probe_partial_window_still_sees_smoothness(analytic_field, fine_grid):
    a = fine_grid.height
    rate = interior_decay_probe(analytic_field, (1.0, 4.0, 0.3 * a, 0.7 * a))
    assert rate > 5.0


def test_probe_rough_field_rate_near_zero(fine_grid):
    rng = np.random.default_rng(5)
    shape = (fine_grid.n_modes, fine_grid.n_z, 2)
    rough = VelocityField(
        fine_grid,
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape),
    )
    rate = interior_decay_probe(rough, interior_box(fine_grid))
    assert abs(rate) < 1.5


def test_probe_ignores_fields_outside_window(analytic_field, fine_grid):
    a = fine_grid.height
    X, Z = np.meshgrid(fine_grid.x, fine_grid.z, indexing="ij")
    ramp = np.clip((Z - 0.8 * a) / (0.2 * a), 0.0, None) ** 8
    bump_phys = np.zeros((fine_grid.n_x, fine_grid.n_z, 2))
    bump_phys[:, :, 0] = 3.0 * np.cos(3 * X) * ramp
    bump = VelocityField.from_physical(fine_grid, bump_phys)

    base = interior_decay_probe(analytic_field, interior_box(fine_grid))
    shifted = interior_decay_probe(analytic_field + bump,
                                   interior_box(fine_grid))
    assert abs(shifted - base) < 1e-8


def test_probe_interior_smoother_than_wall_on_convolution():
    grid = ChannelGrid(n_x=48, n_z=129)
    a = grid.height
    coeffs = critical_noise_coefficients(16)
    for seed in (0, 1):
        noise = sample_boundary_noise(coeffs, hurst=0.9, horizon=0.25,
                                      n_steps=200, master_seed=seed)
        traj = evolve_convolution(grid, noise, store_every=10)
        w = traj.field_at(traj.n_times // 2)
        inner = interior_decay_probe(w, (0.0, TWO_PI, 0.3 * a, 0.7 * a))
        wall = interior_decay_probe(w, (0.0, TWO_PI, 0.6 * a, a))
        assert inner > wall + 1.0


def test_probe_rejects_bad_subdomains(analytic_field):
    a = analytic_field.grid.height
    with pytest.raises(ValidationError):
        interior_decay_probe(analytic_field, (1.0, 0.5, 0.3 * a, 0.7 * a))
    with pytest.raises(ValidationError):
        interior_decay_probe(analytic_field, (0.0, TWO_PI, -0.1 * a, 0.7 * a))
    with pytest.raises(ValidationError):
        interior_decay_probe(analytic_field, (0.0, TWO_PI, 0.3 * a, 1.2 * a))
    with pytest.raises(ValidationError):
        interior_decay_probe(analytic_field, (0.0, TWO_PI, 0.3 * a, 0.7 * a),
                             n_local=8)


def test_vorticity_snapshot_matches_field_method(analytic_field):
    snap = vorticity_snapshot(analytic_field)
    direct = analytic_field.vorticity()
    assert np.array_equal(snap.coeffs, direct.coeffs)


def test_threshold_experiment_classifies_both_branches():
    table = threshold_experiment(NoiseParams(0.9, 0.0), (1.05, 1.9),
                                 replicas=2)
    assert isinstance(table, ThresholdTable)
    assert table.classification[1.05] == "stabilizing"
    assert table.classification[1.9] == "growing"
    assert table.band == (1.05, 1.9)
    for q in (1.05, 1.9):
        sups = table.sups[q]
        assert len(sups) == 3
        assert all(v > 0 for v in sups)
        assert len(table.increments[q]) == 2
    assert [lv["n_z"] for lv in table.ladder] == [65, 129, 257]
    assert [lv["cutoff"] for lv in table.ladder] == [4, 10, 24]
    assert [lv["n_steps"] for lv in table.ladder] == [16, 128, 512]


def test_threshold_experiment_deterministic_and_linear_in_amplitude():
    small = threshold_experiment(NoiseParams(0.9, 0.0), (1.5,),
                                 resolutions=(65, 129), seed=7, replicas=1)
    again = threshold_experiment(NoiseParams(0.9, 0.0), (1.5,),
                                 resolutions=(65, 129), seed=7, replicas=1)
    assert small.sups == again.sups
    doubled = threshold_experiment(NoiseParams(0.9, 0.0), (1.5,),
                                   resolutions=(65, 129), seed=7,
                                   replicas=1, sigma0=0.2)
    for lo, hi in zip(small.sups[1.5], doubled.sups[1.5]):
        assert hi == pytest.approx(2.0 * lo, rel=1e-12)


def test_threshold_experiment_validates_inputs():
    params = NoiseParams(0.9, 0.0)
    with pytest.raises(ValidationError):
        threshold_experiment(params, (0.9, 1.5))
    with pytest.raises(ValidationError):
        threshold_experiment(params, ())
    with pytest.raises(ValidationError):
        threshold_experiment(params, (1.5,), resolutions=(129, 65))
    with pytest.raises(ValidationError):
        threshold_experiment(params, (1.5,), resolutions=(65,))
    with pytest.raises(ValidationError):
        threshold_experiment(params, (1.5,), replicas=0)
    with pytest.raises(ValidationError):
        threshold_experiment(params, (1.5,), horizon=0.0)
    with pytest.raises(ValidationError):
        threshold_experiment(params, (1.5,), resolutions=(17, 33, 65))


def test_critical_coefficients_saturate_declared_class():
    coeffs = critical_noise_coefficients(16, sigma0=0.3, sobolev_deficit=0.0)
    assert coeffs.amplitude(0) == pytest.approx(0.3)
    # Near-critical decay: one octave drops amplitudes by barely more
    # than sqrt(2), where the default law drops them by two.
    ratio = abs(coeffs.amplitude(8)) / abs(coeffs.amplitude(16))
    assert 1.35 < ratio < 1.55
    with pytest.raises(AdmissibilityError):
        critical_noise_coefficients(8, sobolev_deficit=0.5)


def test_truncation_keeps_retained_paths_and_commutes_with_refinement():
    coeffs = critical_noise_coefficients(12)
    noise = sample_boundary_noise(coeffs, hurst=0.85, horizon=0.5,
                                  n_steps=64, master_seed=11)
    cut = truncate_boundary_noise(noise, 5)
    assert cut.coeffs.n_max == 5
    assert np.array_equal(cut.modal_paths, noise.modal_paths[:6])
    assert cut.coeffs.amplitude(3) == noise.coeffs.amplitude(3)

    fine_then_cut = truncate_boundary_noise(refine_boundary_noise(noise), 5)
    cut_then_fine = refine_boundary_noise(cut)
    assert np.array_equal(fine_then_cut.modal_paths,
                          cut_then_fine.modal_paths)

    with pytest.raises(ValidationError):
        truncate_boundary_noise(noise, 13)
    with pytest.raises(ValidationError):
        truncate_boundary_noise(noise, -1)


def test_hurst_recovery_report_recovers_nominal_exponent():
    grid = ChannelGrid(n_x=32, n_z=65)
    for hurst, seed in ((0.8, 3), (0.9, 4)):
        noise = sample_boundary_noise(default_noise_coefficients(),
                                      hurst=hurst, horizon=1.0,
                                      n_steps=512, master_seed=seed)
        traj = evolve_convolution(grid, noise, store_every=8)
        report = hurst_recovery_report(noise, traj)
        assert report["nominal_hurst"] == hurst
        assert abs(report["variogram_hurst"] - hurst) < 0.12
        assert report["hurst_gap"] == pytest.approx(
            abs(report["variogram_hurst"] - hurst))
        assert "exponent" in report["trajectory_holder"]
