import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from strat_ipm.errors import ConsistencyError, ParityError, ShapeError
from strat_ipm.fields import (
    PlaneQuadrature,
    StripFieldX,
    StripFieldY,
    StripGrid,
    TorusField,
    TorusGrid,
    b_mode,
    c_mode,
    evaluate,
    gaussian_profile,
    hermitian_part,
    physical_product,
    sample_profile,
    strip_forward_X,
    strip_forward_Y,
    strip_inverse_X,
    strip_inverse_Y,
    torus_forward,
    torus_inverse,
    vertical_norms,
)
from strat_ipm.operators import NormSpec, norm


def random_torus(grid, rng):
    c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return TorusField(grid, hermitian_part(c))


def random_strip(grid, kind, rng):
    shape = grid.shape(kind)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    cls = StripFieldX if kind == "X" else StripFieldY
    return cls(grid, hermitian_part(c, axes=(0,)))


def rel(a, b):
    return np.linalg.norm(np.ravel(a - b)) / np.linalg.norm(np.ravel(b))


# torus transforms


def test_constant_field_has_only_the_zero_mode():
    g = TorusGrid(4)
    f = torus_forward(np.ones(g.points), g)
    expected = np.zeros(g.shape)
    expected[g.index(0, 0)] = 1.0
    assert np.allclose(f.coeffs, expected, atol=1e-14)


def test_cosine_in_x1_has_two_half_modes():
    g = TorusGrid(4)
    x1 = g.x1[:, None] + 0 * g.x2[None, :]
    f = torus_forward(np.cos(2 * np.pi * x1), g)
    assert f.coeff(1, 0) == pytest.approx(0.5, abs=1e-14)
    assert f.coeff(-1, 0) == pytest.approx(0.5, abs=1e-14)
    rest = f.coeffs.copy()
    rest[g.index(1, 0)] = rest[g.index(-1, 0)] = 0
    assert np.max(np.abs(rest)) < 1e-14


def test_torus_inverse_of_single_modes():
    g = TorusGrid(3)
    c = np.zeros(g.shape, dtype=complex)
    c[g.index(0, 0)] = 1.0
    assert np.allclose(torus_inverse(TorusField(g, c)), 1.0, atol=1e-14)
    c[:] = 0
    c[g.index(1, 0)] = c[g.index(-1, 0)] = 0.5
    x1 = g.x1[:, None] + 0 * g.x2[None, :]
    assert np.allclose(torus_inverse(TorusField(g, c)), np.cos(2 * np.pi * x1), atol=1e-14)


def test_torus_round_trips():
    rng = np.random.default_rng(0)
    g = TorusGrid((6, 9), (13, 19))
    f = random_torus(g, rng)
    assert rel(torus_forward(torus_inverse(f), g).coeffs, f.coeffs) < 1e-12
    samples = torus_inverse(f)
    assert rel(torus_inverse(torus_forward(samples, g)), samples) < 1e-12


def test_torus_parseval():
    rng = np.random.default_rng(1)
    g = TorusGrid((5, 7), length=3.0)
    f = random_torus(g, rng)
    samples = torus_inverse(f)
    physical = np.sqrt(np.sum(samples**2) * g.spacing[0] * g.spacing[1])
    assert norm(f, NormSpec("L2")) == pytest.approx(physical, rel=1e-12)


def test_torus_shape_and_consistency_errors():
    g = TorusGrid(4)
    with pytest.raises(ShapeError):
        torus_forward(np.zeros((8, 9)), g)
    c = np.zeros(g.shape, dtype=complex)
    c[g.index(1, 0)] = 1.0
    with pytest.raises(ConsistencyError):
        torus_inverse(TorusField(g, c))
    with pytest.raises(ShapeError):
        TorusGrid(4, 8)


def test_dealiased_flag():
    assert not TorusGrid(4).dealiased
    assert TorusGrid(4, 14).dealiased


# strip transforms


def test_strip_basis_examples():
    g = StripGrid(3, 6)
    x2 = g.x2[None, :] + 0 * g.x1[:, None]
    f = strip_forward_X(np.cos(np.pi * x2 / 2), g)
    expected = np.zeros(g.shape("X"))
    expected[g.index("X", 0, 1)] = 1.0
    assert np.allclose(f.coeffs, expected, atol=1e-14)
    y = strip_forward_Y(np.ones(g.points), g)
    expected = np.zeros(g.shape("Y"))
    expected[g.index("Y", 0, 0)] = 1.0
    assert np.allclose(y.coeffs, expected, atol=1e-14)


def test_strip_inverse_examples():
    g = StripGrid(2, 5)
    f = StripFieldX.zeros(g)
    f.coeffs[g.index("X", 0, 1)] = 1.0
    x2 = g.x2[None, :] + 0 * g.x1[:, None]
    assert np.allclose(strip_inverse_X(f), np.cos(np.pi * x2 / 2), atol=1e-14)
    assert np.all(strip_inverse_Y(StripFieldY.zeros(g)) == 0)


@pytest.mark.parametrize("kind", ["X", "Y"])
def test_strip_round_trips(kind):
    rng = np.random.default_rng(2)
    g = StripGrid(5, 12, M1=16, J=20)
    f = random_strip(g, kind, rng)
    fwd = strip_forward_X if kind == "X" else strip_forward_Y
    inv = strip_inverse_X if kind == "X" else strip_inverse_Y
    samples = inv(f)
    assert rel(fwd(samples, g).coeffs, f.coeffs) < 1e-12
    assert rel(inv(fwd(samples, g)), samples) < 1e-12


@pytest.mark.parametrize("kind", ["X", "Y"])
def test_strip_parseval(kind):
    rng = np.random.default_rng(3)
    g = StripGrid(4, 10)
    f = random_strip(g, kind, rng)
    samples = evaluate(f, (g.M1, 40))
    x_w = np.full(41, 2 / 40)
    x_w[0] = x_w[-1] = 1 / 40
    physical = np.sqrt(np.sum(samples**2 * x_w[None, :]) / g.M1)
    assert norm(f, NormSpec("L2")) == pytest.approx(physical, rel=1e-12)


def test_x_fields_vanish_on_walls():
    rng = np.random.default_rng(4)
    g = StripGrid(6, 15)
    samples = strip_inverse_X(random_strip(g, "X", rng))
    assert np.max(np.abs(samples[:, [0, -1]])) < 1e-10


def test_y_fields_have_vanishing_odd_derivative_on_walls():
    x2 = np.array([-1.0, 1.0])
    h = 1e-6
    for q in range(0, 8):
        slope = (c_mode(q, x2 + h) - c_mode(q, x2 - h)) / (2 * h)
        assert np.max(np.abs(slope)) < 1e-6 * (1 + q**2)


def test_vertical_basis_orthogonality():
    g = StripGrid(0, 12)
    q = np.arange(1, 13)[:, None]
    B = b_mode(q, g.x2[None, :])
    gram = (B * g.weights) @ B.T
    assert np.allclose(gram, np.eye(12), atol=1e-12)
    qc = np.arange(0, 13)[:, None]
    C = c_mode(qc, g.x2[None, :])
    gram = (C * g.weights) @ C.T
    assert np.allclose(gram, np.diag(vertical_norms("Y", 12)), atol=1e-12)


def test_parity_error_on_wrong_space():
    g = StripGrid(2, 6)
    with pytest.raises(ParityError):
        strip_forward_X(np.ones(g.points), g)
    wide = StripGrid(2, 6, J=16)
    x2 = wide.x2[None, :] + 0 * wide.x1[:, None]
    # b_1 is odd-parity content for the c basis: leaks past the truncation
    with pytest.raises(ParityError):
        strip_forward_Y(np.cos(np.pi * x2 / 2), wide)
    with pytest.raises(ShapeError):
        strip_forward_X(np.zeros((5, 5)), g)


# products


def test_torus_product_trig_identity():
    g = TorusGrid(4)
    c = np.zeros(g.shape, dtype=complex)
    c[g.index(1, 0)] = c[g.index(-1, 0)] = 0.5
    f = TorusField(g, c)
    prod = physical_product(f, f)
    expected = np.zeros(g.shape)
    expected[g.index(0, 0)] = 0.5
    expected[g.index(2, 0)] = expected[g.index(-2, 0)] = 0.25
    assert np.allclose(prod.coeffs, expected, atol=1e-14)


def test_strip_product_with_unit_y_factor():
    g = StripGrid(2, 6)
    b2 = StripFieldX.zeros(g)
    b2.coeffs[g.index("X", 0, 2)] = 1.0
    one = StripFieldY.zeros(g)
    one.coeffs[g.index("Y", 0, 0)] = 1.0
    prod = physical_product(b2, one)
    assert isinstance(prod, StripFieldX)
    assert np.allclose(prod.coeffs, b2.coeffs, atol=1e-14)


@pytest.mark.parametrize("kinds", [("X", "X"), ("X", "Y"), ("Y", "Y")])
def test_strip_product_against_quadrature_oracle(kinds):
    rng = np.random.default_rng(5)
    g = StripGrid(3, 8)
    a = random_strip(g, kinds[0], rng)
    b = random_strip(g, kinds[1], rng)
    prod = physical_product(a, b)
    # oracle: fine-grid pointwise product projected by dense trapezoid quadrature
    fine = StripGrid(3, 8, M1=32, J=256)
    samples = evaluate(a, (32, 256)) * evaluate(b, (32, 256))
    fwd = strip_forward_X if prod.kind == "X" else strip_forward_Y
    oracle = fwd(samples, fine, check=False)
    assert prod.kind == {("X", "X"): "Y", ("X", "Y"): "X", ("Y", "Y"): "Y"}[kinds]
    assert np.max(np.abs(prod.coeffs - oracle.coeffs)) < 1e-10


@pytest.mark.parametrize("kinds", [("X", "X"), ("X", "Y"), ("Y", "Y")])
def test_product_parity_closure(kinds):
    rng = np.random.default_rng(6)
    g = StripGrid(2, 5)
    a = random_strip(g, kinds[0], rng)
    b = random_strip(g, kinds[1], rng)
    wide = StripGrid(2, 5, M1=9, J=40)
    samples = evaluate(a, (9, 40)) * evaluate(b, (9, 40))
    right = "X" if kinds == ("X", "Y") else "Y"
    good = strip_forward_X if right == "X" else strip_forward_Y
    bad = strip_forward_Y if right == "X" else strip_forward_X
    wide_modes = StripGrid(2, 12, M1=9, J=40)
    good(samples, wide_modes)
    with pytest.raises(ParityError):
        bad(samples, wide)


def test_strip_l1_product_bound():
    rng = np.random.default_rng(7)
    g = StripGrid(3, 6)
    big = StripGrid(6, 12)
    for _ in range(20):
        f = random_strip(g, "X", rng)
        h = random_strip(g, "Y", rng)
        samples = evaluate(f, (big.M1, big.J)) * evaluate(h, (big.M1, big.J))
        prod = strip_forward_X(samples, big)
        assert np.sum(np.abs(prod.coeffs)) <= np.sum(np.abs(f.coeffs)) * np.sum(np.abs(h.coeffs)) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 10))
def test_torus_round_trip_property(seed, K1, K2):
    g = TorusGrid((K1, K2))
    f = random_torus(g, np.random.default_rng(seed))
    assert rel(torus_forward(torus_inverse(f), g).coeffs, f.coeffs) < 1e-12


# profiles and quadrature


def test_zero_profile():
    prof = sample_profile(None, TorusGrid(4, length=32.0))
    assert np.all(prof.values == 0) and np.all(prof.coeffs == 0)


def test_cosine_profile_single_mode():
    g = TorusGrid((2, 8), length=32.0)
    prof = sample_profile(lambda x: 0.7 * np.cos(2 * np.pi * x / 32.0), g)
    c = prof.centered_coeffs
    K = g.K2
    assert c[K + 1] == pytest.approx(0.35, abs=1e-14)
    assert c[K - 1] == pytest.approx(0.35, abs=1e-14)
    c[[K - 1, K + 1]] = 0
    assert np.max(np.abs(c)) < 1e-14


def test_profile_half_N_flag():
    g = TorusGrid((2, 64), length=32.0)
    assert sample_profile(lambda x: 0.6 * np.exp(-(x**2)), g, N=1.0).exceeds_half_N
    assert not sample_profile(lambda x: 0.4 * np.exp(-(x**2)), g, N=1.0).exceeds_half_N


def test_gaussian_profile_weighted_l1_matches_transform():
    m = 4
    A, w = 0.3, 2.0
    sigma = gaussian_profile(A, w)
    g = TorusGrid((1, 256), length=32.0)
    prof = sample_profile(sigma, g)
    xi = np.linspace(-20, 20, 400001)
    exact = trapezoid((1 + xi**2) ** ((m + 1) / 2) * np.abs(sigma.transform(xi)), xi)
    assert prof.weighted_l1(m + 1) == pytest.approx(exact, rel=1e-6)


def test_plane_quadrature_refinement():
    quad = PlaneQuadrature(xi_max=64.0)

    def gauss(a, b):
        return np.exp(-np.pi * (a**2 + b**2))

    assert quad.integrate(gauss) == pytest.approx(1.0, rel=1e-9)
    x1, x2, w = quad.mesh()
    assert np.all(w > 0) and np.all(x1 != 0) and np.all(x2 != 0)
    # coarser rule has a larger error than the refined one on a smooth integrand
    coarse = PlaneQuadrature(xi_max=64.0, order=4)
    assert abs(coarse.integrate(gauss) - 1) >= abs(coarse.refined().integrate(gauss) - 1)
