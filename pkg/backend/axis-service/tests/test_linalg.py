import numpy as np
import pytest
import sympy

from app.utils.errors import InvalidInputError
from app.utils.linalg import (
    PolynomialCoeffs,
    as_complex_matrix,
    companion,
    find_singular_combination,
    lk_operators,
    null_vector,
)
from tests.oracles import outer_projector, random_hermitian, symbolic_char_poly


def test_companion_layout():
    c = companion(PolynomialCoeffs([4.0, 3.0, 2.0, 1.0]))
    expected = np.array(
        [
            [0, 0, 0, -4],
            [1, 0, 0, -3],
            [0, 1, 0, -2],
            [0, 0, 1, -1],
        ],
        dtype=np.complex128,
    )
    np.testing.assert_array_equal(c, expected)


def test_companion_degree_one():
    np.testing.assert_array_equal(companion(PolynomialCoeffs([2.5 - 1j])), [[-2.5 + 1j]])


def test_companion_of_x_squared_plus_one():
    np.testing.assert_array_equal(companion(PolynomialCoeffs([1.0, 0.0])), [[0, -1], [1, 0]])


@pytest.mark.parametrize(
    "coeffs",
    [
        [sympy.Rational(3, 2)],
        [1, -2],
        [sympy.Rational(-1, 3), 0, 5],
        [2, sympy.Rational(7, 4), -1],
    ],
)
def test_companion_characteristic_polynomial(coeffs):
    d = len(coeffs)
    entries = [[0] * d for _ in range(d)]
    numeric = companion(PolynomialCoeffs([float(c) for c in coeffs]))
    for i in range(d):
        for j in range(d):
            if numeric[i, j] == 1.0:
                entries[i][j] = 1
        entries[i][d - 1] = -coeffs[i]
    poly = symbolic_char_poly(entries)
    x = sympy.Symbol("x")
    expected = x ** d + sum(c * x ** k for k, c in enumerate(coeffs))
    assert sympy.expand(poly.as_expr() - expected) == 0


def test_polynomial_rejects_empty_and_nonfinite():
    with pytest.raises(InvalidInputError):
        PolynomialCoeffs([])
    with pytest.raises(InvalidInputError):
        PolynomialCoeffs([1.0, np.inf])


@pytest.mark.parametrize("m", [np.zeros((2, 3)), np.zeros((0, 0)), [[1.0, np.nan], [0.0, 1.0]]])
def test_as_complex_matrix_rejects(m):
    with pytest.raises(InvalidInputError):
        as_complex_matrix(m)


def test_null_vector_of_rank_one():
    v = null_vector([[1.0, 1.0], [1.0, 1.0]])
    assert v is not None
    assert abs(np.vdot(np.array([1.0, -1.0]) / np.sqrt(2.0), v)) == pytest.approx(1.0, abs=1e-12)


def test_null_vector_full_rank():
    assert null_vector(np.eye(4)) is None
    assert null_vector([[2.0, 1.0], [1.0, 3.0]]) is None


def test_null_vector_zero_matrix():
    v = null_vector(np.zeros((3, 3)))
    assert v is not None
    assert np.linalg.norm(v) == pytest.approx(1.0)


@pytest.mark.parametrize("order", [3, 5, 8])
def test_null_vector_duplicated_row(rng, order):
    m = rng.standard_normal((order, order)) + 1j * rng.standard_normal((order, order))
    m[-1] = 2.0 * m[0]
    v = null_vector(m)
    assert v is not None
    assert np.linalg.norm(m @ v) <= 1e-10 * np.linalg.norm(m)


def test_lk_identity():
    b = random_hermitian(np.random.default_rng(1), 3)
    ell, k = lk_operators(np.eye(3), b)
    np.testing.assert_allclose(ell, b, atol=1e-15)
    np.testing.assert_allclose(k, 0.0, atol=1e-15)


@pytest.mark.parametrize("order", [2, 3, 5])
def test_lk_on_eigen_projector(rng, order):
    # A b = lambda b makes L(bb*) = Re(lambda) bb* and K(bb*) = Im(lambda) bb*
    b = rng.standard_normal(order) + 1j * rng.standard_normal(order)
    b /= np.linalg.norm(b)
    lam = complex(rng.standard_normal(), rng.standard_normal())
    proj = np.eye(order) - np.outer(b, b.conj())
    r = rng.standard_normal((order, order)) + 1j * rng.standard_normal((order, order))
    a = lam * np.outer(b, b.conj()) + proj @ r @ proj
    np.testing.assert_allclose(a @ b, lam * b, atol=1e-12)
    bb = outer_projector(b)
    ell, k = lk_operators(a, bb)
    np.testing.assert_allclose(ell, lam.real * bb, atol=1e-12)
    np.testing.assert_allclose(k, lam.imag * bb, atol=1e-12)


def test_lk_rotation_example():
    a = np.array([[0.0, -1.0], [1.0, 0.0]])
    b = outer_projector([1.0, 1j])
    ell, k = lk_operators(a, b)
    # (1, i) is an eigenvector with eigenvalue -i
    np.testing.assert_allclose(ell, 0.0, atol=1e-15)
    np.testing.assert_allclose(k, -b, atol=1e-15)


@pytest.mark.parametrize("order", [2, 3, 5])
def test_lk_outputs_hermitian_and_commute(rng, order):
    for _ in range(100):
        a = rng.standard_normal((order, order)) + 1j * rng.standard_normal((order, order))
        b = random_hermitian(rng, order)
        ell, k = lk_operators(a, b)
        np.testing.assert_allclose(ell, ell.conj().T, atol=1e-12)
        np.testing.assert_allclose(k, k.conj().T, atol=1e-12)
        lk = lk_operators(a, k)[0]
        kl = lk_operators(a, ell)[1]
        assert np.linalg.norm(lk - kl) <= 1e-12 * np.linalg.norm(a) ** 2 * np.linalg.norm(b)


def test_lk_rejects_non_hermitian_and_mismatch():
    with pytest.raises(InvalidInputError):
        lk_operators(np.eye(2), [[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(InvalidInputError):
        lk_operators(np.eye(3), np.eye(2))


def test_singular_combination_explicit_triple():
    a = np.eye(2)
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    c = np.diag([1.0, -1.0])
    found = find_singular_combination(a, b, c, seed=0)
    assert found is not None
    u, det = found
    assert np.linalg.norm(u) == pytest.approx(1.0)
    assert det <= 1e-8
    # det = alpha^2 - beta^2 - gamma^2
    assert u[0] ** 2 == pytest.approx(u[1] ** 2 + u[2] ** 2, abs=1e-6)


def test_singular_combination_repeated_matrix():
    found = find_singular_combination(np.eye(2), np.eye(2), np.eye(2), seed=3)
    assert found is not None
    assert abs(np.sum(found[0])) <= 1e-6


@pytest.mark.parametrize("seed", range(20))
def test_singular_combination_random_order_two(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
    found = find_singular_combination(a, b, c, seed=seed)
    assert found is not None
    m = found[0][0] * a + found[0][1] * b + found[0][2] * c
    assert abs(np.linalg.det(m)) == pytest.approx(found[1], abs=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_singular_combination_random_order_six(seed):
    rng = np.random.default_rng(100 + seed)
    a, b, c = (rng.standard_normal((6, 6)) for _ in range(3))
    assert find_singular_combination(a, b, c, seed=seed) is not None


def test_singular_combination_rejects_mixed_orders():
    with pytest.raises(InvalidInputError):
        find_singular_combination(np.eye(2), np.eye(3), np.eye(2))
