from itertools import combinations

import numpy as np
import pytest
from sympy import Rational
from polyfan import Cone, Fan
from superform import (
    Bump, CoefProfile, FormChart, Superform, boundary_condition_check, d_double_prime, d_prime,
    function_form, integrate, normal_order, wedge,
)
from tropcoh import Cell, TropChain, chain_boundary
from exceptions import (
    ChartMismatchError, DegreeError, DivergentIntegralError, MissingChartError,
)

BUMP_INTEGRAL = 0.4439938161680794  # ∫_{-1}^{1} exp(-1/(1-u²)) du

INF = float("inf")


def poly(k, *terms):
    return CoefProfile.from_parts(k, terms)


@pytest.fixture
def ray():
    return Cone.from_generators([[1]], 1)


@pytest.fixture
def bump_form():
    coef = CoefProfile.from_parts(1, bumps=[Bump(0, 0.0, 1.0)])
    return function_form(1, coef, I=(0,), J=(0,))


def test_normal_order():
    assert normal_order([1, 0]) == (-1, (0, 1))
    assert normal_order([0, 2, 1]) == (-1, (0, 1, 2))
    assert normal_order([0, 0]) == (0, None)


def test_bump_profile_support():
    coef = CoefProfile.from_parts(2, bumps=[Bump(1, 2.0, 0.5)])
    assert coef.support == ((-INF, INF), (1.5, 2.5))
    assert not coef.bounded
    values = coef.evaluate(np.array([[7.0, 2.0], [0.0, 3.0]]))
    assert values[0] == pytest.approx(np.exp(-1.0))
    assert values[1] == 0
    with pytest.raises(DegreeError):
        CoefProfile.from_parts(1, bumps=[Bump(3, 0.0, 1.0)])


def test_repeated_index_is_dropped():
    omega = Superform(2, 2, 0)
    omega.add_term(None, (0, 0), (), CoefProfile.constant(2))
    assert omega.terms == []
    omega.add_term(None, (1, 0), (), CoefProfile.constant(2))
    assert omega.terms[0].I == (0, 1)
    assert omega.terms[0].coef.expr == -1


def test_term_degree_and_chart_checks(ray):
    omega = Superform(1, 1, 0)
    with pytest.raises(DegreeError):
        omega.add_term(None, (), (), CoefProfile.constant(1))
    with pytest.raises(MissingChartError):
        omega.add_term(ray, (0,), (), CoefProfile.constant(0))


def test_d_double_prime():
    omega = function_form(2, poly(2, (1, (1, 0))), I=(0,))
    result = d_double_prime(omega)
    assert (result.p, result.q) == (1, 1)
    assert len(result.terms) == 1
    term = result.terms[0]
    assert (term.I, term.J, term.coef.expr) == ((0,), (0,), 1)


def test_d_prime_sign():
    omega = function_form(2, poly(2, (1, (0, 1))), J=(0,))
    result = d_prime(omega)
    assert len(result.terms) == 1
    term = result.terms[0]
    assert (term.I, term.J, term.coef.expr) == ((1,), (0,), -1)


def test_d_double_prime_squares_to_zero():
    f = function_form(2, poly(2, (1, (2, 1)), (3, (0, 2))))
    assert d_double_prime(d_double_prime(f)).is_zero()
    assert d_prime(d_prime(f)).is_zero()


def test_wedge_sign():
    alpha = function_form(2, CoefProfile.constant(2), I=(0,), J=(0,))
    beta = function_form(2, CoefProfile.constant(2), I=(1,), J=(1,))
    product = wedge(alpha, beta)
    assert (product.p, product.q) == (2, 2)
    term = product.terms[0]
    assert (term.I, term.J, term.coef.expr) == ((0, 1), (0, 1), -1)
    assert wedge(alpha, alpha).terms == []


def test_wedge_rejects_other_chart_family():
    with pytest.raises(ChartMismatchError):
        wedge(function_form(1, CoefProfile.constant(1)), function_form(2, CoefProfile.constant(2)))


def test_form_arithmetic(bump_form):
    assert (bump_form - bump_form).is_zero()
    doubled = bump_form + bump_form
    assert len(doubled.terms) == 1
    assert doubled.describe()["terms"][0]["I"] == [0]


def test_boundary_condition_with_compact_support(bump_form):
    fan = Fan.from_maximal(1, [[1], [-1]], [[0], [1]])
    verdict = boundary_condition_check(bump_form, fan)
    assert verdict.passed


def test_boundary_condition_needs_declared_chart():
    fan = Fan.from_maximal(1, [[1], [-1]], [[0], [1]])
    omega = function_form(1, CoefProfile.constant(1), I=(0,), J=(0,))
    with pytest.raises(MissingChartError):
        boundary_condition_check(omega, fan)


def _two_chart_function(ray, inner, outer):
    omega = Superform(1, 0, 0, {None: FormChart(None, ((-INF, INF),)), ray: FormChart(ray, ())})
    omega.add_term(None, (), (), CoefProfile.constant(1, inner))
    omega.add_term(ray, (), (), CoefProfile.constant(0, outer))
    return omega


def test_boundary_condition_symbolic(ray):
    fan = Fan.from_maximal(1, [[1]], [[0]])
    assert boundary_condition_check(_two_chart_function(ray, 1, 1), fan).passed
    verdict = boundary_condition_check(_two_chart_function(ray, 1, 2), fan)
    assert not verdict.passed
    assert verdict.sigma == ray
    assert verdict.mode == "symbolic"


def test_exact_integral_over_segment():
    omega = function_form(2, poly(2, (1, (1, 0))), I=(0,), J=(0,))
    chain = TropChain(1)
    chain.add(Cell.simplex([[0, 0], [1, 0]]), [1, 0])
    result = integrate(chain, omega)
    assert result.exact
    assert result.value == Rational(1, 2)


def test_numeric_integral_over_rays(bump_form):
    chain = TropChain(1)
    chain.add(Cone.from_generators([[1]], 1), [1])
    chain.add(Cone.from_generators([[-1]], 1), [-1])
    result = integrate(chain, bump_form)
    assert not result.exact
    assert complex(result.value).real == pytest.approx(BUMP_INTEGRAL, rel=1e-8)


def test_integral_of_non_compact_form_diverges():
    omega = function_form(1, CoefProfile.constant(1), I=(0,), J=(0,))
    chain = TropChain(1)
    chain.add(Cone.from_generators([[1]], 1), [1])
    with pytest.raises(DivergentIntegralError):
        integrate(chain, omega)


def test_integral_degree_and_chart_checks(bump_form, ray):
    with pytest.raises(DegreeError):
        integrate(TropChain(0), bump_form)
    chain = TropChain(1)
    chain.add(Cell.simplex([[0], [1]], orbit=ray), [1])
    with pytest.raises(MissingChartError):
        integrate(chain, bump_form)


def _random_coef(rng, n, bump=False):
    terms = [(int(rng.integers(-3, 4)), tuple(int(e) for e in rng.integers(0, 3, size=n)))
             for _ in range(int(rng.integers(1, 4)))]
    bumps = [Bump(int(rng.integers(0, n)), 0.0, 2.0)] if bump else []
    return CoefProfile.from_parts(n, terms, bumps)


def _random_form(rng, n, p, q, bump=False):
    omega = Superform(n, p, q)
    for I in combinations(range(n), p):
        for J in combinations(range(n), q):
            if rng.random() < 0.6:
                omega.add_term(None, I, J, _random_coef(rng, n, bump))
    return omega


def _random_degrees(rng, n):
    return int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1))


def test_d_double_prime_squares_to_zero_on_random_forms():
    rng = np.random.default_rng(11)
    for k in range(100):
        n = int(rng.integers(1, 4))
        p, q = _random_degrees(rng, n)
        omega = _random_form(rng, n, p, q, bump=k % 4 == 0)
        assert d_double_prime(d_double_prime(omega)).is_zero()


def test_d_prime_and_d_double_prime_anticommute():
    rng = np.random.default_rng(12)
    for _ in range(30):
        n = int(rng.integers(1, 4))
        omega = _random_form(rng, n, *_random_degrees(rng, n))
        assert (d_prime(d_double_prime(omega)) + d_double_prime(d_prime(omega))).is_zero()


def test_graded_leibniz_rule_for_wedge():
    rng = np.random.default_rng(13)
    for _ in range(20):
        n = int(rng.integers(2, 4))
        p, q = _random_degrees(rng, n)
        alpha = _random_form(rng, n, p, q)
        beta = _random_form(rng, n, *_random_degrees(rng, n))
        sign = -1 if (p + q) % 2 else 1
        for d in (d_double_prime, d_prime):
            right = wedge(alpha, d(beta))
            right = right if sign == 1 else -right
            assert (d(wedge(alpha, beta)) - (wedge(d(alpha), beta) + right)).is_zero()


@pytest.mark.parametrize("p,q", [(0, 0), (0, 1), (1, 0), (1, 1), (2, 1)])
def test_stokes_on_random_simplex_chains(p, q):
    rng = np.random.default_rng(100 + 10 * p + q)
    n = 2
    for _ in range(3):
        omega = _random_form(rng, n, p, q)
        vertices = [[int(x) for x in rng.integers(-3, 4, size=n)] for _ in range(q + 2)]
        while np.linalg.matrix_rank(np.array(vertices[1:]) - np.array(vertices[0])) < q + 1:
            vertices = [[int(x) for x in rng.integers(-3, 4, size=n)] for _ in range(q + 2)]
        chain = TropChain(p)
        size = len(list(combinations(range(n), p)))
        chain.add(Cell.simplex(vertices), [int(x) for x in rng.integers(-2, 3, size=size)])
        inner = integrate(chain, d_double_prime(omega))
        outer = integrate(chain_boundary(chain), omega)
        assert complex(outer.value) == pytest.approx(complex(inner.value), abs=1e-9)
