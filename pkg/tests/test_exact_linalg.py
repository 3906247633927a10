import pytest
from fractions import Fraction
from sympy import Matrix, Rational
from exact_linalg import (
    Subspace, WedgeIndex, annihilator, clear_denominators, coordinates, determinant_sign,
    hermite_rows, integer_kernel_basis, kernel_basis, primitive_vector, rank, rational_reconstruct,
    saturate, to_matrix, to_rational, wedge_coordinates, wedge_map, xgcd,
)
from exceptions import DegreeError, InvariantViolation


def test_to_rational_accepts_exact_inputs():
    assert to_rational(Fraction(3, 4)) == Rational(3, 4)
    assert to_rational("-2/6") == Rational(-1, 3)
    assert to_rational(0.5) == Rational(1, 2)
    assert to_rational(7) == 7


def test_to_matrix_rejects_ragged_rows():
    with pytest.raises(InvariantViolation):
        to_matrix([[1, 2], [3]])
    with pytest.raises(InvariantViolation):
        to_matrix([[1, 2]], 3)


def test_rank_and_kernel():
    m = to_matrix([[1, 2, 3], [2, 4, 6]])
    assert rank(m) == 1
    kernel = kernel_basis(m)
    assert kernel.dim == 2
    for v in kernel.basis:
        assert all(x == 0 for x in m * Matrix(v))


def test_subspace_sum_and_annihilator():
    a = Subspace.span([[1, 0, 0]], 3)
    b = Subspace.span([[0, 1, 0]], 3)
    total = a + b
    assert total.dim == 2
    assert a.is_subspace_of(total)
    dual = annihilator(total)
    assert dual.dim == 1
    assert dual.contains([0, 0, 5])


def test_coordinates_in_subspace_basis():
    space = Subspace.span([[1, 1, 0], [0, 0, 1]], 3)
    coords = coordinates(space, [2, 2, 3])
    rebuilt = sum((c * Matrix(v) for c, v in zip(coords, space.basis)), Matrix([0, 0, 0]))
    assert list(rebuilt) == [2, 2, 3]
    with pytest.raises(InvariantViolation):
        coordinates(space, [1, 0, 0])


def test_wedge_index_sizes():
    assert WedgeIndex(3, 2).size == 3
    assert WedgeIndex(3, 2).tuples == ((0, 1), (0, 2), (1, 2))
    assert WedgeIndex(2, 3).size == 0
    assert WedgeIndex(2, 0).size == 1


def test_wedge_coordinates_are_minors():
    coords = wedge_coordinates([[1, 0, 0], [0, 1, 1]], 3)
    assert coords == (1, 1, 0)
    assert wedge_coordinates([], 2) == (1,)
    with pytest.raises(DegreeError):
        wedge_coordinates([[1], [1]], 1)


def test_wedge_map_top_degree_is_determinant():
    a = Matrix([[2, 1], [0, 3]])
    assert wedge_map(a, 2) == Matrix([[6]])
    assert wedge_map(a, 1) == a


def test_rational_reconstruct():
    assert rational_reconstruct(0.3333333334, 100, 1e-8) == Fraction(1, 3)
    assert rational_reconstruct(3.14159265, 10, 1e-6) is None
    with pytest.raises(ValueError):
        rational_reconstruct(0.5, 10, 0.0)


@pytest.mark.parametrize("a,b", [(240, 46), (-4, 6), (0, 5), (7, 0), (17, 5)])
def test_xgcd_bezout_identity(a, b):
    x, y, g = xgcd(a, b)
    assert g >= 0
    assert x * a + y * b == g
    if a or b:
        assert a % g == 0 and b % g == 0


def test_hermite_rows_preserves_lattice_index():
    assert hermite_rows([[2, 4], [1, 3]]) == [(1, 1), (0, 2)]
    assert hermite_rows([[0, 0]]) == []


def test_integer_kernel_basis():
    kernel = integer_kernel_basis([[1, 1]], 2)
    assert kernel == [(1, -1)]
    assert integer_kernel_basis([], 2) == [(1, 0), (0, 1)]


def test_saturate_recovers_primitive_lattice():
    assert saturate([[2, 0]], 2) == [(1, 0)]
    assert saturate([[0, 0]], 2) == []


def test_primitive_vector_and_denominators():
    assert primitive_vector([4, -6]) == (2, -3)
    assert clear_denominators([Fraction(1, 2), Fraction(1, 3)]) == (3, 2)
    with pytest.raises(InvariantViolation):
        primitive_vector([0, 0])


def test_determinant_sign():
    assert determinant_sign([[1, 0], [0, 1]]) == 1
    assert determinant_sign([[0, 1], [1, 0]]) == -1
    assert determinant_sign([[1, 1], [2, 2]]) == 0
