import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacns.grid import Boundary, Grid


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid.periodic(1, 3)  # fewer than 4 points
    with pytest.raises(ValueError):
        Grid(1, (16,), (-1.0,))
    with pytest.raises(ValueError):
        Grid(4, (8, 8, 8, 8), (1.0,) * 4)


def test_spacing_and_volume():
    g = Grid.periodic(2, (10, 20), (1.0, 4.0))
    assert g.spacing == (0.1, 0.2)
    assert g.cell_volume == pytest.approx(0.02)
    assert g.volume == pytest.approx(4.0)


def test_gradient_constant_is_zero():
    g = Grid.periodic(3, 8)
    gf = g.gradient(np.full(g.shape, 3.0))
    assert np.all(gf == 0.0)


def test_gradient_affine_exact_on_decay_box_interior():
    g = Grid.decay_box(3, 12, 2.0)
    x1 = g.meshgrid()[0]
    gf = g.gradient(x1)
    inner = g.interior_slices()
    assert np.allclose(gf[inner + (0,)], 1.0, atol=1e-13)
    assert np.allclose(gf[inner + (1,)], 0.0, atol=1e-13)
    # one-sided faces are first-order but still exact for affine data
    assert np.allclose(gf[..., 0], 1.0, atol=1e-12)


def test_gradient_sin_second_order():
    errs = []
    for n in (32, 64):
        g = Grid.periodic(1, n)
        x = g.meshgrid()[0]
        err = np.abs(g.gradient(np.sin(x))[..., 0] - np.cos(x)).max()
        errs.append(err)
    ratio = errs[0] / errs[1]
    assert 3.5 < ratio < 4.5, f"halving h should quarter the error, ratio {ratio}"


def test_divergence_affine_and_constant():
    g = Grid.decay_box(3, 10, 2.0)
    v = np.stack(g.meshgrid(), axis=-1)
    div = g.divergence(v)
    assert np.allclose(div[g.interior_slices()], 3.0, atol=1e-12)
    assert np.all(g.divergence(np.ones(g.shape + (3,))) == 0.0)


def test_divergence_sin_second_order():
    g = Grid.periodic(3, 24)
    x1 = g.meshgrid()[0]
    v = np.zeros(g.shape + (3,))
    v[..., 0] = np.sin(x1)
    err = np.abs(g.divergence(v) - np.cos(x1)).max()
    h = g.spacing[0]
    assert err < h ** 2, f"central divergence error {err} should be below h^2"


def test_curl_rigid_rotation():
    g = Grid.decay_box(3, 12, 2.0)
    x, y, _ = g.meshgrid()
    v = np.stack([-y, x, np.zeros_like(x)], axis=-1)
    w = g.curl(v)
    inner = g.interior_slices()
    assert np.allclose(w[inner + (2,)], 2.0, atol=1e-12)
    assert np.allclose(w[inner + (0,)], 0.0, atol=1e-12)


def test_curl_of_gradient_vanishes():
    # central differences commute, so curl(grad f) is exactly zero
    g = Grid.periodic(3, 12)
    x, y, z = g.meshgrid()
    f = np.sin(x) * np.cos(y) + np.sin(z)
    assert np.abs(g.curl(g.gradient(f))).max() < 1e-14


def test_curl_2d_embedding_and_1d_rejection():
    g2 = Grid.periodic(2, 16)
    x, y = g2.meshgrid()
    v = np.stack([-np.sin(y), np.sin(x)], axis=-1)
    w = g2.curl(v)
    assert w.shape == g2.shape + (1,)
    with pytest.raises(ValueError):
        Grid.periodic(1, 16).curl(np.zeros((16, 1)))
    assert np.all(g2.curl(np.ones(g2.shape + (2,))) == 0.0)


def test_laplacian_quadratic_exact_interior():
    g = Grid.decay_box(1, 16, 2.0)
    x = g.meshgrid()[0]
    lap = g.laplacian(x ** 2)
    assert np.allclose(lap[g.interior_slices()], 2.0, atol=1e-11)


def test_laplacian_sin_second_order():
    errs = []
    for n in (32, 64):
        g = Grid.periodic(1, n)
        x = g.meshgrid()[0]
        errs.append(np.abs(g.laplacian(np.sin(x)) + np.sin(x)).max())
    assert 3.5 < errs[0] / errs[1] < 4.5
    g = Grid.periodic(2, 16)
    assert np.all(g.laplacian(np.full(g.shape, 7.0)) == 0.0)


def test_norms_constant_and_zero():
    g = Grid.periodic(3, 8, (1.0, 2.0, 3.0))
    ones = np.ones(g.shape)
    assert g.norm(ones, 2) == pytest.approx(np.sqrt(g.volume), rel=1e-14)
    assert g.norm(np.zeros(g.shape), np.inf) == 0.0
    assert g.norm(np.zeros(g.shape + (3,)), 1) == 0.0


def test_norm_sin_l2():
    # int sin^2 over a full period is V/2; the periodic Riemann sum is exact
    g = Grid.periodic(3, 16)
    f = np.sin(g.meshgrid()[0])
    assert g.norm(f, 2) == pytest.approx(np.sqrt(g.volume / 2.0), rel=1e-13)


def test_norm_rejections_and_dk_bounds():
    g = Grid.periodic(1, 8)
    f = np.ones(g.shape)
    with pytest.raises(ValueError):
        g.norm(f, 0.5)
    with pytest.raises(ValueError):
        g.dk_seminorm(f, 4)
    assert g.dk_seminorm(f, 0) == g.norm(f, 2)


def test_product_rule_audit_second_order():
    # ||div(f g) - f div g - grad f . g||_inf shrinks at O(h^2)
    errs = []
    for n in (24, 48):
        g = Grid.periodic(2, n)
        x, y = g.meshgrid()
        f = np.sin(x) * np.cos(y)
        vec = np.stack([np.sin(x) * np.cos(y), np.cos(x) * np.sin(y)], axis=-1)
        lhs = g.divergence(f[..., None] * vec)
        rhs = f * g.divergence(vec) + np.einsum("...a,...a->...", g.gradient(f), vec)
        errs.append(np.abs(lhs - rhs).max())
    assert 3.4 < errs[0] / errs[1] < 4.6


def test_divergence_of_curl_vanishes():
    g = Grid.periodic(3, 12)
    x, y, z = g.meshgrid()
    v = np.stack([np.sin(y) * np.cos(z), np.sin(z), np.cos(x) * np.sin(y)], axis=-1)
    assert np.abs(g.divergence(g.curl(v))).max() < 1e-13


def test_periodic_integral_of_divergence_vanishes():
    g = Grid.periodic(2, 20)
    x, y = g.meshgrid()
    v = np.stack([np.exp(np.sin(x)), np.cos(y) ** 2], axis=-1)
    total = abs(g.integral(g.divergence(v)))
    assert total <= 1e-12 * g.norm(v, 2)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2 ** 16))
def test_operators_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    g = Grid.periodic(2, 8)
    f1, f2 = rng.normal(size=g.shape), rng.normal(size=g.shape)
    combo = g.gradient(a * f1 + b * f2)
    split = a * g.gradient(f1) + b * g.gradient(f2)
    scale = np.abs(split).max() + 1e-30
    assert np.abs(combo - split).max() <= 1e-13 * max(scale, 1.0)
    lc = g.laplacian(a * f1 + b * f2)
    ls = a * g.laplacian(f1) + b * g.laplacian(f2)
    assert np.abs(lc - ls).max() <= 1e-12 * (np.abs(ls).max() + 1.0)


def test_interp_linear_field_exact():
    g = Grid.decay_box(2, 32, 4.0)
    x, y = g.meshgrid()
    f = 2.0 * x + 3.0 * y
    pts = np.array([[0.1, -0.2], [0.73, 0.41]])
    vals = g.interp(f, pts)
    assert np.allclose(vals, 2.0 * pts[:, 0] + 3.0 * pts[:, 1], atol=1e-12)


def test_clamp_edges_and_masks():
    g = Grid.decay_box(2, 8, 1.0)
    f = np.ones(g.shape)
    clamped = g.clamp_edges(f, 5.0)
    mask = g.boundary_mask()
    assert np.all(clamped[mask] == 5.0)
    assert np.all(clamped[~mask] == 1.0)
    gp = Grid.periodic(2, 8)
    assert not gp.boundary_mask().any()
    assert gp.clamp_edges(f, 5.0) is f
