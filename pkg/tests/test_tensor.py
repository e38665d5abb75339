import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfv import ad, catalog, spaces, tensor
from tfv.errors import DegeneracyError, DomainError

UHS = spaces.uhs(3)
HYP = spaces.hyperboloid(3)
EUC = spaces.euclidean(3)

coord = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
height = st.floats(min_value=0.2, max_value=5.0, allow_nan=False)
uhs_points = st.tuples(coord, coord, height).map(np.array)
hyp_points = st.tuples(coord, coord, coord).map(np.array)


def test_uhs_metric_values():
    assert np.allclose(tensor.metric_at(UHS, [0, 0, 1]), np.eye(3))
    assert np.allclose(tensor.metric_at(UHS, [1, 2, 2]), np.eye(3) / 4)
    assert np.allclose(tensor.metric_at(EUC, [5, -1, 2]), np.eye(3))


def test_point_outside_chart():
    with pytest.raises(DomainError):
        tensor.metric_at(UHS, [0, 0, -1])
    with pytest.raises(DomainError):
        tensor.metric_at(UHS, [0, 0])


def _uhs_gamma_expected(x3):
    # values from the central-difference oracle at (0,0,1), scaled by 1/x3
    G = np.zeros((3, 3, 3))
    G[2, 0, 0] = G[2, 1, 1] = 1.0
    G[0, 0, 2] = G[0, 2, 0] = G[1, 1, 2] = G[1, 2, 1] = -1.0
    G[2, 2, 2] = -1.0
    return G / x3


@pytest.mark.parametrize("x3", [1.0, 2.0])
def test_uhs_christoffel(x3):
    G = tensor.christoffel_at(UHS, [0, 0, x3])
    assert np.allclose(G, _uhs_gamma_expected(x3), atol=1e-14)
    assert np.allclose(tensor.christoffel_at(UHS, [0, 0, x3], ad.FD), _uhs_gamma_expected(x3), atol=1e-9)


def test_euclidean_christoffel_zero():
    assert np.all(tensor.christoffel_at(EUC, [1.0, 2.0, 3.0]) == 0.0)


@settings(max_examples=20, deadline=None)
@given(hyp_points)
def test_christoffel_symmetric_exact_vs_fd(p):
    G = tensor.christoffel_at(HYP, p)
    assert np.allclose(G, G.transpose(0, 2, 1), atol=1e-14)
    F = tensor.christoffel_at(HYP, p, ad.FD)
    assert np.abs(G - F).max() <= 1e-6 * max(1.0, np.abs(G).max())


def test_embedded_jet_path_matches_generic_path():
    # the embedded path builds dg from the embedding 2-jet; the FD path
    # differentiates the pulled-back metric directly
    p = np.array([0.3, -0.7, 1.1])
    g, dg, ddg = tensor.metric_derivatives(HYP, p, 2)
    _, dg_fd, ddg_fd = tensor.metric_derivatives(HYP, p, 2, ad.FD)
    assert np.allclose(dg, dg_fd, atol=1e-9)
    assert np.allclose(ddg, ddg_fd, atol=1e-4)


def test_covariant_derivative_frame_values():
    e1 = np.array([1.0, 0, 0])  # x_3 d_1 at x_3 = 1
    e3 = lambda x: ad.asarray([0.0, 0.0, -x[2]])
    assert np.allclose(tensor.covariant_derivative(UHS, e1, e3, [0, 0, 1]), e1, atol=1e-14)
    assert np.allclose(tensor.covariant_derivative(UHS, [0, 0, -1.0], e3, [0, 0, 1]), 0, atol=1e-14)


def test_position_field_euclidean():
    phi = lambda x: ad.asarray(list(x))
    assert np.allclose(tensor.covariant_derivative(EUC, [1, 0, 0], phi, [2, 3, 4]), [1, 0, 0])


def test_riemann_values():
    assert np.allclose(tensor.riemann(UHS, [1, 0, 0], [0, 0, 1], [0, 0, 1], [0, 0, 1]), [-1, 0, 0], atol=1e-13)
    assert np.all(tensor.riemann(EUC, [1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 0]) == 0)


@settings(max_examples=15, deadline=None)
@given(hyp_points, st.integers(0, 2**32 - 1))
def test_hyperboloid_curvature_identity(p, seed):
    rng = np.random.default_rng(seed)
    X, Y, V = rng.normal(size=(3, 3))
    g = tensor.metric_at(HYP, p)
    lhs = tensor.riemann(HYP, X, Y, V, p)
    rhs = (X @ g @ V) * Y - (Y @ g @ V) * X
    assert np.allclose(lhs, rhs, atol=1e-9 * max(1.0, np.abs(rhs).max()))


@settings(max_examples=20, deadline=None)
@given(uhs_points, st.integers(0, 2**32 - 1))
def test_sectional_curvature_uhs(p, seed):
    x, y = np.random.default_rng(seed).normal(size=(2, 3))
    assert tensor.sectional_curvature(UHS, x, y, p) == pytest.approx(-1.0, abs=1e-9)


def test_sectional_degenerate_plane():
    with pytest.raises(DegeneracyError):
        tensor.sectional_curvature(UHS, [1, 0, 0], [2, 0, 0], [0, 0, 1])


def test_riemann_symmetries():
    R = tensor.riemann_tensor(spaces.sphere(3), [0.2, -0.1, 0.3])
    g = tensor.metric_at(spaces.sphere(3), [0.2, -0.1, 0.3])
    Rl = np.einsum("ml,lkij->mkij", g, R)  # R_{mkij}
    assert np.allclose(R, -R.transpose(0, 1, 3, 2), atol=1e-12)
    assert np.allclose(Rl, -Rl.transpose(1, 0, 2, 3), atol=1e-12)
    assert np.allclose(Rl, Rl.transpose(2, 3, 0, 1), atol=1e-12)


def test_gradient_values():
    assert np.allclose(tensor.gradient(EUC, lambda x: x[0], [1, 2, 3]), [1, 0, 0])
    assert np.allclose(tensor.gradient(UHS, lambda x: x[2], [0, 0, 2]), [0, 0, 4])


def test_gradient_of_ambient_coordinate_is_projection():
    p = np.array([1.0, 1.0, 1.0])
    grad = tensor.gradient(HYP, catalog.scalar("ambient_x2", HYP), p)
    proj = spaces.tangential_projection(HYP, np.array([0.0, 1.0, 0.0, 0.0]), p)
    assert np.allclose(grad, proj, atol=1e-13)


def test_exterior_derivative():
    d = tensor.exterior_derivative(spaces.euclidean(2), lambda x: ad.asarray([0.0, x[0]]), [0.3, 0.4])
    assert d[0, 1] == pytest.approx(1.0)
    assert d[1, 0] == pytest.approx(-1.0)
    exact_form = lambda x: ad.EXACT.jacobian(lambda y: ad.sin(y[0] * y[1]) + y[2] ** 2, x)
    assert np.allclose(tensor.exterior_derivative(EUC, exact_form, [0.1, 0.2, 0.3]), 0, atol=1e-14)


def test_torqued_generating_form_closed():
    e = catalog.entry("hyp_torqued")
    for p in e.sample(5, 0):
        assert np.abs(tensor.exterior_derivative(HYP, e.expected_omega, p)).max() < 1e-12


@settings(max_examples=30, deadline=None)
@given(uhs_points, st.tuples(coord, coord, coord).map(np.array))
def test_flat_sharp_round_trip(p, X):
    assert np.allclose(tensor.sharp(UHS, tensor.flat(UHS, X, p), p), X, atol=1e-12 * max(1, np.abs(X).max()))


@settings(max_examples=30, deadline=None)
@given(hyp_points)
def test_orthonormal_frame(p):
    g = tensor.metric_at(HYP, p)
    E = tensor.orthonormal_frame(g)
    assert np.allclose(E.T @ g @ E, np.eye(3), atol=1e-12)
    assert tensor.tensor_norm(g, np.eye(3)) == pytest.approx(np.sqrt(3))
