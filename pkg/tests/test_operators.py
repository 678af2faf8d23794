import numpy as np
import pytest

from fracchannel.errors import ValidationError
from fracchannel.fields import (
    VelocityField,
    inner_product,
    l2_norm,
    random_solenoidal_field,
)
from fracchannel.forms import bilinear_form, trilinear_b
from fracchannel.grid import ChannelGrid
from fracchannel.stokes import apply_stokes, leray_project, stokes_inverse, stokes_step


@pytest.fixture(scope="module")
def grid():
    return ChannelGrid(n_x=32, n_z=65, height=1.0)


def random_raw_field(grid, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((grid.n_modes, grid.n_z, 2)) + 1j * rng.standard_normal(
        (grid.n_modes, grid.n_z, 2)
    )
    c[0] = c[0].real
    return VelocityField(grid, c)


def test_leray_idempotent(grid):
    for seed in range(10):
        f = random_raw_field(grid, seed)
        pf = leray_project(f)
        ppf = leray_project(pf)
        assert np.abs(ppf.coeffs - pf.coeffs).max() < 1e-10


def test_leray_annihilates_gradients(grid):
    rng = np.random.default_rng(42)
    phi = rng.standard_normal((grid.n_modes, grid.n_z)) + 1j * rng.standard_normal(
        (grid.n_modes, grid.n_z)
    )
    phi[0] = phi[0].real
    grad = np.stack([grid.dx(phi), grid.dz(phi)], axis=-1)
    pg = leray_project(VelocityField(grid, grad))
    assert np.abs(pg.coeffs).max() < 1e-8 * np.abs(grad).max()


def test_leray_fixes_solenoidal_fields(grid):
    u = random_solenoidal_field(grid, np.random.default_rng(5), kmax=5, z_degree=6)
    pu = leray_project(u)
    assert np.abs(pu.coeffs - u.coeffs).max() < 1e-12


def test_leray_output_has_no_penetration(grid):
    f = random_raw_field(grid, 3)
    pf = leray_project(f)
    assert np.abs(pf.coeffs[:, [0, -1], 1]).max() < 1e-10


def test_leray_keeps_mean_mode_real(grid):
    f = random_raw_field(grid, 8)
    pf = leray_project(f)
    assert np.abs(pf.coeffs[0].imag).max() == 0


def test_stokes_step_validation(grid):
    u = VelocityField.zero(grid)
    with pytest.raises(ValidationError):
        stokes_step(u, 1e-3, "rk4")
    with pytest.raises(ValidationError):
        stokes_step(u, -1e-3)


def test_stokes_step_zero_dt_is_identity(grid):
    u = random_solenoidal_field(grid, np.random.default_rng(6), kmax=5, z_degree=6)
    for scheme in ("be", "cn"):
        s = stokes_step(u, 0.0, scheme)
        assert np.abs(s.coeffs - u.coeffs).max() < 1e-12


def heat_mode_error(grid, scheme, dt, mode=2, horizon=0.048):
    lam = (mode * np.pi / grid.height) ** 2
    c = np.zeros((grid.n_modes, grid.n_z, 2), dtype=complex)
    c[0, :, 0] = np.sin(mode * np.pi * grid.z / grid.height)
    v = VelocityField(grid, c)
    for _ in range(int(round(horizon / dt))):
        v = stokes_step(v, dt, scheme)
    exact = np.exp(-lam * horizon) * np.sin(mode * np.pi * grid.z / grid.height)
    return np.abs(v.coeffs[0, :, 0].real - exact).max()


@pytest.mark.parametrize("scheme,order", [("be", 1.0), ("cn", 2.0)])
def test_stokes_step_convergence_order(grid, scheme, order):
    errs = [heat_mode_error(grid, scheme, dt) for dt in (4e-3, 2e-3, 1e-3)]
    rates = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    for rate in rates:
        assert abs(rate - order) < 0.3


def test_stokes_step_nonzero_mode_convergence(grid):
    """BE and CN agree with a fine CN reference at their design orders."""
    v0 = random_solenoidal_field(grid, np.random.default_rng(7), kmax=4, z_degree=6)
    horizon = 0.02
    ref = v0.copy()
    for _ in range(1000):
        ref = stokes_step(ref, horizon / 1000, "cn")
    for scheme, order in (("be", 1.0), ("cn", 2.0)):
        errs = []
        for n in (50, 100):
            v = v0.copy()
            for _ in range(n):
                v = stokes_step(v, horizon / n, scheme)
            errs.append(l2_norm(v - ref))
        rate = np.log2(errs[0] / errs[1])
        assert abs(rate - order) < 0.35


def test_apply_stokes_heat_eigenfunction(grid):
    mode = 3
    lam = (mode * np.pi / grid.height) ** 2
    c = np.zeros((grid.n_modes, grid.n_z, 2), dtype=complex)
    c[0, :, 0] = np.sin(mode * np.pi * grid.z / grid.height)
    av = apply_stokes(VelocityField(grid, c))
    expected = lam * np.sin(mode * np.pi * grid.z / grid.height)
    assert np.abs(av.coeffs[0, :, 0].real - expected).max() < 1e-7


def test_stokes_operator_positive(grid):
    for seed in range(5):
        u = random_solenoidal_field(grid, np.random.default_rng(seed), kmax=5, z_degree=6)
        assert inner_product(apply_stokes(u), u) > 0


def test_stokes_inverse_round_trip(grid):
    u = random_solenoidal_field(grid, np.random.default_rng(12), kmax=6, z_degree=8)
    back = stokes_inverse(apply_stokes(u))
    assert np.abs(back.coeffs - u.coeffs).max() < 1e-9 * max(np.abs(u.coeffs).max(), 1.0)


def test_stokes_inverse_then_forward(grid):
    f = random_solenoidal_field(grid, np.random.default_rng(13), kmax=4, z_degree=5)
    sol = stokes_inverse(f)
    resid = apply_stokes(sol) - f
    interior = resid.coeffs[:, 2:-2, :]
    assert np.abs(interior).max() < 1e-7 * max(np.abs(f.coeffs).max(), 1.0)


def test_half_steps_refine_backward_euler(grid):
    u = random_solenoidal_field(grid, np.random.default_rng(14), kmax=4, z_degree=6)
    dt = 2e-3
    one = stokes_step(u, dt, "be")
    two = stokes_step(stokes_step(u, dt / 2, "be"), dt / 2, "be")
    fine = u.copy()
    for _ in range(64):
        fine = stokes_step(fine, dt / 64, "cn")
    assert l2_norm(two - fine) < 0.6 * l2_norm(one - fine)


# ----- bilinear forms --------------------------------------------------------


def smooth_fields(grid, seed, count=3):
    rng = np.random.default_rng(seed)
    return [
        random_solenoidal_field(grid, rng, kmax=5, z_degree=6) for _ in range(count)
    ]


def test_trilinear_cancellation(grid):
    for seed in range(8):
        u, v, _ = smooth_fields(grid, seed)
        scale = abs(trilinear_b(u, v, u)) + 1.0
        assert abs(trilinear_b(u, v, v)) < 1e-8 * scale


def test_skew_form_antisymmetry(grid):
    u, v, w = smooth_fields(grid, 21)
    s1 = inner_product(bilinear_form(u, v, "skew"), w)
    s2 = inner_product(bilinear_form(u, w, "skew"), v)
    assert abs(s1 + s2) < 1e-8 * max(abs(s1), 1e-3)


def test_skew_form_energy_neutral(grid):
    for seed in range(5):
        u, v, _ = smooth_fields(grid, seed + 100)
        val = inner_product(bilinear_form(u, v, "skew"), v)
        assert abs(val) < 1e-10


def test_conservative_matches_convective_for_solenoidal_advector(grid):
    u, v, _ = smooth_fields(grid, 31)
    bc = bilinear_form(u, v, "convective")
    bd = bilinear_form(u, v, "conservative")
    assert np.abs(bc.coeffs - bd.coeffs).max() < 1e-11


def test_projected_form_pairs_like_trilinear(grid):
    u, v, w = smooth_fields(grid, 41)
    assert inner_product(bilinear_form(u, v, "convective"), w) == pytest.approx(
        trilinear_b(u, v, w), abs=1e-12
    )


def test_bilinear_form_linearity(grid):
    u, v, _ = smooth_fields(grid, 51)
    b1 = bilinear_form(u, v, "skew")
    b2 = bilinear_form(u, 2.0 * v, "skew")
    assert np.abs(b2.coeffs - 2 * b1.coeffs).max() < 1e-13


def test_bilinear_form_output_is_masked_and_projected(grid):
    u, v, _ = smooth_fields(grid, 61)
    b = bilinear_form(u, v, "skew")
    assert np.all(b.coeffs[grid.dealias_keep + 1 :] == 0)
    assert np.abs(b.coeffs[:, [0, -1], 1]).max() < 1e-12
    again = leray_project(b)
    assert np.abs(again.coeffs - b.coeffs).max() < 1e-10


def test_bilinear_form_rejects_unknown_variant(grid):
    u, v, _ = smooth_fields(grid, 71)
    with pytest.raises(ValidationError):
        bilinear_form(u, v, "upwind")
