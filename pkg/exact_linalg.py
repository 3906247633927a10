"""
Módulo de Álgebra Linear Exata

Este módulo concentra a álgebra linear sobre Q e Z usada pelo TropMap,
incluindo:
- Posto, núcleo e somas de subespaços com bases canônicas (forma escalonada reduzida)
- Potências exteriores (coordenadas na base e_I, menores p×p)
- Reconstrução racional por frações contínuas
- Reticulados inteiros: núcleo inteiro e saturação via operações unimodulares
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, gcd
from typing import Iterable, Optional, Sequence

import sympy
from sympy import Matrix, Rational

from exceptions import DegreeError, InvariantViolation

# Matrizes racionais exatas são sympy.Matrix com entradas Rational
RatMatrix = Matrix


def to_rational(x) -> Rational:
    if isinstance(x, Fraction):
        return Rational(x.numerator, x.denominator)
    if isinstance(x, float):
        return sympy.nsimplify(x, rational=True)
    if isinstance(x, str):
        return Rational(x)
    value = sympy.sympify(x)
    if not value.is_Rational:
        raise InvariantViolation(f"entry {x!r} is not an exact rational", invariant="RatMatrix: exact rationals")
    return value


def to_matrix(rows: Iterable[Sequence], cols: Optional[int] = None) -> Matrix:
    """Converte linhas (int, Fraction, str, Rational) em uma matriz racional exata"""
    data = [[to_rational(x) for x in row] for row in rows]
    if not data:
        return sympy.zeros(0, cols or 0)
    width = len(data[0])
    if any(len(row) != width for row in data):
        raise InvariantViolation("rows of different lengths", invariant="RatMatrix: dimensions consistent")
    if cols is not None and width != cols:
        raise InvariantViolation(f"expected {cols} columns, got {width}",
                                 invariant="RatMatrix: dimensions consistent")
    return Matrix(data)


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: tuple  # linhas da forma escalonada reduzida, entradas Rational

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient_dim: int) -> "Subspace":
        rows = [list(v) for v in vectors]
        if not rows:
            return cls(ambient_dim, ())
        reduced, pivots = to_matrix(rows, ambient_dim).rref()
        basis = tuple(tuple(reduced.row(i)) for i in range(len(pivots)))
        return cls(ambient_dim, basis)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls.span([[int(i == j) for j in range(ambient_dim)] for i in range(ambient_dim)], ambient_dim)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self) -> Matrix:
        if not self.basis:
            return sympy.zeros(0, self.ambient_dim)
        return Matrix([list(v) for v in self.basis])

    def contains(self, vector: Sequence) -> bool:
        if len(vector) != self.ambient_dim:
            return False
        return rank(self.matrix().col_join(to_matrix([vector], self.ambient_dim))) == self.dim

    def is_subspace_of(self, other: "Subspace") -> bool:
        return all(other.contains(v) for v in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum([self, other], self.ambient_dim)


@dataclass(frozen=True)
class WedgeIndex:
    n: int
    p: int

    def __post_init__(self):
        if self.p < 0 or self.n < 0:
            raise DegreeError("degree and basis size must be non-negative")

    @property
    def tuples(self) -> tuple:
        return tuple(combinations(range(self.n), self.p)) if self.p <= self.n else ()

    @property
    def size(self) -> int:
        return comb(self.n, self.p) if self.p <= self.n else 0

    def position(self, index: Sequence[int]) -> int:
        return self.tuples.index(tuple(index))


def rank(m: Matrix) -> int:
    """Posto (de linhas) sobre Q"""
    if m.rows == 0 or m.cols == 0:
        return 0
    return m.rank(simplify=True)


def kernel_basis(m: Matrix) -> Subspace:
    """Base do núcleo à direita; dim = colunas - posto"""
    if m.rows == 0:
        return Subspace.full(m.cols)
    return Subspace.span([list(v) for v in m.nullspace()], m.cols)


def subspace_sum(spaces: Iterable[Subspace], ambient_dim: int) -> Subspace:
    rows = [v for space in spaces for v in space.basis]
    return Subspace.span(rows, ambient_dim)


def annihilator(space: Subspace) -> Subspace:
    """Formas lineares que se anulam em todo o subespaço (coordenadas duais)"""
    if space.dim == 0:
        return Subspace.full(space.ambient_dim)
    return kernel_basis(space.matrix())


def coordinates(space: Subspace, vector: Sequence) -> tuple:
    """Coordenadas exatas de um vetor na base canônica do subespaço"""
    if space.dim == 0:
        if any(to_rational(x) != 0 for x in vector):
            raise InvariantViolation("vector not in the zero subspace", invariant="Subspace membership")
        return ()
    basis_t = space.matrix().T
    target = to_matrix([vector], space.ambient_dim).T
    try:
        solution, params = basis_t.gauss_jordan_solve(target)
    except ValueError:
        raise InvariantViolation("vector not in subspace", invariant="Subspace membership") from None
    if params.shape[0]:
        solution = solution.subs({s: 0 for s in params})
    if basis_t * solution != target:
        raise InvariantViolation("vector not in subspace", invariant="Subspace membership")
    return tuple(solution)


def wedge_coordinates(vectors: Sequence[Sequence], n: int) -> tuple:
    """Coordenadas de v_1 ∧ ... ∧ v_p na base e_I (menores p×p)"""
    p = len(vectors)
    if p > n:
        raise DegreeError(f"degree {p} exceeds ambient dimension {n}")
    if p == 0:
        return (Rational(1),)
    m = to_matrix(vectors, n)
    return tuple(m.extract(list(range(p)), list(index)).det() for index in WedgeIndex(n, p).tuples)


def wedge_power_span(space: Subspace, p: int) -> Subspace:
    """∧^p de um subespaço dentro de ∧^p do espaço ambiente"""
    n = space.ambient_dim
    if p > n:
        raise DegreeError(f"degree {p} exceeds ambient dimension {n}")
    size = WedgeIndex(n, p).size
    if p > space.dim:
        return Subspace.zero(size)
    generators = [wedge_coordinates([space.basis[i] for i in chosen], n)
                  for chosen in combinations(range(space.dim), p)]
    return Subspace.span(generators, size)


def wedge_map(a: Matrix, p: int) -> Matrix:
    """Matriz composta: ∧^p de uma aplicação linear (colunas = imagens de e_J)"""
    rows_index = WedgeIndex(a.rows, p).tuples
    cols_index = WedgeIndex(a.cols, p).tuples
    if p == 0:
        return Matrix([[1]])
    return Matrix(len(rows_index), len(cols_index),
                  lambda i, j: a.extract(list(rows_index[i]), list(cols_index[j])).det())


def rational_reconstruct(x: float, max_den: int, tol: float) -> Optional[Fraction]:
    """Menor denominador ≤ max_den a distância ≤ tol, por frações contínuas"""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_den < 1:
        raise ValueError("max_den must be at least 1")
    candidate = Fraction(x).limit_denominator(max_den)
    if abs(float(candidate) - x) <= tol:
        return candidate
    return None


# ---------------------------------------------------------------------------
# Reticulados inteiros
# ---------------------------------------------------------------------------

def xgcd(a: int, b: int) -> tuple[int, int, int]:
    # Maintain x*a + y*b == g along the Euclidean algorithm
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def _as_int_rows(rows: Iterable[Sequence]) -> list[list[int]]:
    result = []
    for row in rows:
        converted = []
        for x in row:
            value = to_rational(x)
            if value.q != 1:
                raise InvariantViolation("integer entries expected", invariant="lattice vector")
            converted.append(int(value))
        result.append(converted)
    return result


def hermite_rows(rows: Iterable[Sequence]) -> list[tuple[int, ...]]:
    """Forma normal de Hermite (por linhas) de um conjunto de vetores inteiros"""
    h = [row for row in _as_int_rows(rows) if any(row)]
    if not h:
        return []
    top = 0
    for j in range(len(h[0])):
        if top == len(h):
            break
        for i in range(top + 1, len(h)):
            _combine_rows(h, top, i, j)
        if h[top][j] == 0:
            continue
        if h[top][j] < 0:
            h[top] = [-u for u in h[top]]
        pivot = h[top][j]
        for i in range(top):
            q = h[i][j] // pivot
            if q:
                h[i] = [u - q * v for u, v in zip(h[i], h[top])]
        top += 1
    return [tuple(row) for row in h[:top]]


def _combine_rows(h: list[list[int]], r1: int, r2: int, j: int) -> None:
    a, b = h[r1][j], h[r2][j]
    if b == 0:
        return
    if a == 0:
        h[r1], h[r2] = h[r2], h[r1]
        return
    x, y, g = xgcd(a, b)
    first = [x * u + y * v for u, v in zip(h[r1], h[r2])]
    second = [(-b // g) * u + (a // g) * v for u, v in zip(h[r1], h[r2])]
    h[r1], h[r2] = first, second


def integer_kernel_basis(rows: Iterable[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Base (Hermite) do reticulado {x ∈ Z^n : A x = 0}"""
    a = _as_int_rows(rows)
    if not a:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    t = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    pivot = 0
    for i in range(len(a)):
        if pivot == ncols:
            break
        for j in range(pivot + 1, ncols):
            _combine_columns(a, t, pivot, j, i)
        if a[i][pivot] != 0:
            pivot += 1
    kernel = [[t[r][c] for r in range(ncols)] for c in range(pivot, ncols)]
    return hermite_rows(kernel)


def _combine_columns(a: list[list[int]], t: list[list[int]], j1: int, j2: int, i: int) -> None:
    x1, x2 = a[i][j1], a[i][j2]
    if x2 == 0:
        return
    if x1 == 0:
        for row in a + t:
            row[j1], row[j2] = row[j2], row[j1]
        return
    x, y, g = xgcd(x1, x2)
    mbg, ag = -x2 // g, x1 // g
    for row in a + t:
        u, v = row[j1], row[j2]
        row[j1] = x * u + y * v
        row[j2] = mbg * u + ag * v


def saturate(vectors: Iterable[Sequence], n: int) -> list[tuple[int, ...]]:
    """Base inteira de Span_Q(vetores) ∩ Z^n"""
    rows = [row for row in _as_int_rows(vectors) if any(row)]
    if not rows:
        return []
    orthogonal = integer_kernel_basis(rows, n)
    if not orthogonal:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return integer_kernel_basis(orthogonal, n)


def primitive_vector(v: Sequence[int]) -> tuple[int, ...]:
    values = [int(x) for x in v]
    g = 0
    for x in values:
        g = gcd(g, abs(x))
    if g == 0:
        raise InvariantViolation("zero vector has no primitive generator", invariant="primitive: v != 0")
    return tuple(x // g for x in values)


def clear_denominators(v: Sequence) -> tuple[int, ...]:
    """Múltiplo inteiro primitivo positivo de um vetor racional"""
    values = [to_rational(x) for x in v]
    lcm = 1
    for x in values:
        lcm = sympy.ilcm(lcm, x.q)
    return primitive_vector([int(x * lcm) for x in values])


def determinant_sign(vectors: Sequence[Sequence]) -> int:
    d = to_matrix(vectors).det() if vectors else Rational(1)
    return bool(d > 0) - bool(d < 0)
