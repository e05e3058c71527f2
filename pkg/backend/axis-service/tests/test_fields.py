import numpy as np
import pytest

from app.utils.errors import InvalidInputError, NearSingularError, TubeDomainError
from app.utils.fields import (
    AmbientField,
    ChartField,
    TubularConfig,
    chart_eigenvalue,
    chart_jacobian,
    cp1_sphere_field,
    euler_identity_check,
    evaluate_ambient,
    evaluate_chart,
    find_sphere_zeros,
    hedgehog_field,
    hedgehog_jacobian,
    integrate_rk4,
    inverse_stereographic,
    is_radial,
    milnor_hopf_flow,
    milnor_hopf_matrix,
    milnor_hopf_sphere_field,
    north_south_field,
    radial_field,
    realified_determinant,
    stereographic,
    tangent_jacobian,
    tubular_differential,
    tubular_extend,
)
from app.utils.projective import ProjectivePoint, random_point, to_chart, transition


def _random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_ambient_field_is_matrix_action(rng):
    a = _random_complex(rng, 4, 4)
    z = _random_complex(rng, 4)
    np.testing.assert_allclose(evaluate_ambient(AmbientField(a), z), a @ z)
    with pytest.raises(InvalidInputError):
        evaluate_ambient(AmbientField(a), z[:3])


def test_radial_field_descends_to_zero(rng):
    for j in range(3):
        f = ChartField(np.eye(3), j)
        np.testing.assert_allclose(evaluate_chart(f, _random_complex(rng, 2)), 0.0, atol=1e-15)
    np.testing.assert_array_equal(radial_field([1.0, 2j]), [1.0, 2j])


def test_exemplar_chart_field():
    f = ChartField(milnor_hopf_matrix(2), 0)
    w = np.array([0.3 - 0.1j, -2.0 + 0.5j])
    np.testing.assert_allclose(evaluate_chart(f, w), [w[0], 2.0 * w[1]], atol=1e-15)
    np.testing.assert_allclose(chart_jacobian(f, np.zeros(2)), np.diag([1.0, 2.0]), atol=1e-15)


def test_rotation_zero():
    f = ChartField([[0.0, -1.0], [1.0, 0.0]], 0)
    np.testing.assert_allclose(evaluate_chart(f, [1j]), [0.0], atol=1e-15)
    assert chart_eigenvalue(f, [1j]) == pytest.approx(-1j)
    assert is_radial(f, [1j])
    assert not is_radial(f, [0.5])


def test_chart_field_matches_ambient_formula(rng):
    a = _random_complex(rng, 4, 4)
    for j in range(4):
        w = _random_complex(rng, 3)
        z = np.insert(w, j, 1.0)
        az = a @ z
        expected = np.delete(az - z * az[j], j)
        np.testing.assert_allclose(evaluate_chart(ChartField(a, j), w), expected, rtol=1e-13)


@pytest.mark.parametrize("order", [2, 3, 5])
def test_chart_jacobian_matches_finite_differences(rng, order):
    h = 1e-6
    for _ in range(10):
        a = _random_complex(rng, order, order)
        j = int(rng.integers(order))
        f = ChartField(a, j)
        w = _random_complex(rng, order - 1)
        jac = chart_jacobian(f, w)
        fd = np.column_stack(
            [(evaluate_chart(f, w + h * e) - evaluate_chart(f, w - h * e)) / (2 * h) for e in np.eye(order - 1)]
        )
        np.testing.assert_allclose(jac, fd, atol=1e-6 * (1.0 + np.abs(jac).max()))


def test_jordan_jacobian_vanishes():
    f = ChartField([[0.0, 1.0], [0.0, 0.0]], 0)
    np.testing.assert_allclose(chart_jacobian(f, [0.0]), [[0.0]], atol=1e-15)


@pytest.mark.parametrize("order", [2, 3, 4])
def test_zero_set_is_chart_independent(rng, order):
    # A b = lambda b, built without an eigen-solver
    b = _random_complex(rng, order)
    b /= np.linalg.norm(b)
    proj = np.eye(order) - np.outer(b, b.conj())
    a = 1.5 * np.outer(b, b.conj()) + proj @ _random_complex(rng, order, order) @ proj
    p = ProjectivePoint(b)
    other = random_point(rng, order - 1)
    for j in range(order):
        w = to_chart(p, j)
        assert np.linalg.norm(evaluate_chart(ChartField(a, j), w)) <= 1e-12 * np.linalg.norm(a)
        assert chart_eigenvalue(ChartField(a, j), w) == pytest.approx(1.5, abs=1e-12)
        assert np.linalg.norm(evaluate_chart(ChartField(a, j), to_chart(other, j))) > 1e-6


def test_chart_field_rejects_foreign_chart(rng):
    f = ChartField(np.eye(3), 0)
    w = transition(np.array([1.0, 2.0]), 0, 1)
    with pytest.raises(InvalidInputError):
        evaluate_chart(f, w)


def test_realified_determinant_is_modulus_squared(rng):
    for n in (1, 2, 4):
        jac = _random_complex(rng, n, n)
        assert realified_determinant(jac) == pytest.approx(abs(np.linalg.det(jac)) ** 2, rel=1e-10)


@pytest.mark.parametrize(
    "terms, point",
    [
        ([(1.0, (2, 0)), (3.0, (1, 1)), (-1.0, (0, 2))], [1.0 + 1j, 2.0]),
        ([(2.0 - 1j, (3, 0, 1)), (1.0, (0, 2, 2)), (0.5j, (1, 1, 2))], [0.3, -1.0j, 2.0 + 0.5j]),
        ([(1.0, (1,))], [4.0]),
    ],
)
def test_euler_identity(terms, point):
    lhs, rhs = euler_identity_check(terms, point)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_euler_identity_rejects_mixed_degrees():
    with pytest.raises(InvalidInputError):
        euler_identity_check([(1.0, (2, 0)), (1.0, (0, 1))], [1.0, 1.0])


def test_exemplar_flow_closed_form():
    np.testing.assert_allclose(milnor_hopf_flow(2, [1.0, 1.0], np.log(2.0)), [2.0, 4.0], rtol=1e-14)
    np.testing.assert_allclose(milnor_hopf_flow(2, [1.0, 1.0], np.log(2.0), chart=2), [0.25, 0.5], rtol=1e-14)


@pytest.mark.parametrize("chart", [0, 1, 2])
def test_exemplar_flow_matches_rk4(rng, chart):
    f = ChartField(milnor_hopf_matrix(2), chart)
    w0 = _random_complex(rng, 2) * 0.5
    numeric = integrate_rk4(lambda w: evaluate_chart(f, w), w0, 0.7)
    np.testing.assert_allclose(numeric, milnor_hopf_flow(2, w0, 0.7, chart=chart), rtol=1e-9)


def test_hedgehog_field_examples():
    np.testing.assert_allclose(hedgehog_field(np.eye(3), [0.0, 0.6, 0.8]), 0.0, atol=1e-15)
    a = np.diag([1.0, 2.0, 3.0])
    y = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)
    ay = np.array([1.0, 2.0, 0.0]) / np.sqrt(5.0)
    np.testing.assert_allclose(hedgehog_field(a, y), ay - np.dot(ay, y) * y, atol=1e-15)


@pytest.mark.parametrize("order", [3, 5])
def test_hedgehog_field_is_tangent(rng, order):
    a = rng.standard_normal((order, order))
    for _ in range(200):
        y = rng.standard_normal(order)
        y /= np.linalg.norm(y)
        assert abs(np.dot(hedgehog_field(a, y), y)) <= 1e-14


def test_hedgehog_field_errors():
    with pytest.raises(InvalidInputError):
        hedgehog_field(np.eye(2), [1.0, 0.0])
    with pytest.raises(NearSingularError):
        hedgehog_field(np.diag([0.0, 1.0, 1.0]), [1.0, 0.0, 0.0])


@pytest.mark.parametrize("order", [3, 5])
def test_hedgehog_jacobian_matches_differences(rng, order):
    a = rng.standard_normal((order, order))
    y = rng.standard_normal(order)
    y /= np.linalg.norm(y)
    h = 1e-6
    columns = [(hedgehog_field(a, y + h * e) - hedgehog_field(a, y - h * e)) / (2 * h) for e in np.eye(order)]
    np.testing.assert_allclose(hedgehog_jacobian(a, y), np.column_stack(columns), atol=1e-7)


def test_stereographic_round_trip(rng):
    w = _random_complex(rng, 50)
    x = stereographic(w)
    np.testing.assert_allclose(np.linalg.norm(x, axis=-1), 1.0, atol=1e-14)
    np.testing.assert_allclose(inverse_stereographic(x), w, rtol=1e-12)
    np.testing.assert_allclose(stereographic(0.0), [0.0, 0.0, -1.0], atol=1e-15)


def test_north_south_zeros_at_poles():
    np.testing.assert_allclose(north_south_field(np.array([0.0, 0.0, 1.0])), 0.0, atol=1e-15)
    np.testing.assert_allclose(north_south_field(np.array([0.0, 0.0, -1.0])), 0.0, atol=1e-15)
    np.testing.assert_allclose(north_south_field(np.array([1.0, 0.0, 0.0])), [0.0, 0.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("field", [north_south_field, milnor_hopf_sphere_field()])
def test_sphere_zero_scan_finds_poles(field):
    zeros = find_sphere_zeros(field)
    assert zeros.shape == (2, 3)
    np.testing.assert_allclose(np.sort(zeros[:, 2]), [-1.0, 1.0], atol=1e-8)
    for x in zeros:
        assert np.linalg.det(tangent_jacobian(field, x)) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("eps", [1e-8, 1e-160, 1e-300])
def test_milnor_hopf_sphere_field_near_north_pole(eps):
    x = np.array([eps, 0.0, np.sqrt(1.0 - eps ** 2)])
    v = milnor_hopf_sphere_field()(x)
    assert np.all(np.isfinite(v))
    assert v[0] == pytest.approx(-eps, rel=1e-6)
    assert np.max(np.abs(v[1:])) <= 1e-9


def test_zero_scan_skips_non_finite_values():
    def patched(x):
        v = north_south_field(x)
        return np.where(x[..., :1] > 0.9, np.nan, v)

    zeros = find_sphere_zeros(patched)
    assert zeros.shape == (2, 3)
    np.testing.assert_allclose(np.sort(zeros[:, 2]), [-1.0, 1.0], atol=1e-8)


def test_cp1_field_is_tangent(rng):
    field = cp1_sphere_field(_random_complex(rng, 2, 2))
    x = rng.standard_normal((200, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    np.testing.assert_allclose(np.einsum("mi,mi->m", field(x), x), 0.0, atol=1e-6)


def test_tubular_extension_on_boundary(rng):
    cfg = TubularConfig(epsilon=0.2)
    u = rng.standard_normal((10000, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    for scale in (1.2, 0.8):
        q = scale * u
        w = tubular_extend(cfg, north_south_field, q)
        np.testing.assert_allclose(np.einsum("mi,mi->m", w, u), scale - 1.0, atol=1e-14)
        assert np.linalg.norm(w, axis=1).min() >= 0.2 - 1e-14


def test_tubular_extension_vanishes_only_at_poles():
    cfg = TubularConfig(epsilon=0.2)
    np.testing.assert_allclose(tubular_extend(cfg, north_south_field, np.array([0.0, 0.0, 1.0])), 0.0, atol=1e-15)
    grid = np.linspace(-1.0, 1.0, 21)
    pts = np.array([[x, y, z] for x in grid for y in grid for z in grid])
    r = np.linalg.norm(pts, axis=1)
    inside = pts[(np.abs(r - 1.0) <= 0.2) & (r > 0)]
    w = np.linalg.norm(tubular_extend(cfg, north_south_field, inside), axis=1)
    poles = np.linalg.norm(inside - np.sign(inside[:, 2:3]) * np.array([0.0, 0.0, 1.0]), axis=1) < 1e-12
    assert np.all(w[~poles] > 0.0)


def test_tubular_domain():
    cfg = TubularConfig(epsilon=0.2)
    with pytest.raises(TubeDomainError):
        tubular_extend(cfg, north_south_field, np.array([0.0, 0.0, 1.5]))
    with pytest.raises(InvalidInputError):
        TubularConfig(epsilon=1.0)


@pytest.mark.parametrize("pole", [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
@pytest.mark.parametrize("field", [north_south_field, milnor_hopf_sphere_field()])
def test_tube_differential_matches_tangent_index(pole, field):
    cfg = TubularConfig(epsilon=0.2)
    x = np.array(pole)
    dw = tubular_differential(cfg, field, x)
    dv = tangent_jacobian(field, x)
    assert np.linalg.det(dw) == pytest.approx(np.linalg.det(dv), rel=1e-6)
