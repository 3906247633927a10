import math
import numpy as np
import pytest
from config import QuadratureCfg
from quadrature import (
    gauss_legendre, integrate_box, integrate_simplex_box, monte_carlo_box, pairwise_sum, richardson,
    simplex_map, tensor_rule,
)
from exceptions import NonConvergenceError


@pytest.fixture
def cfg():
    return QuadratureCfg()


def test_gauss_legendre_weights():
    nodes, weights = gauss_legendre(5)
    assert weights.sum() == pytest.approx(2.0)
    assert np.sum(weights * nodes ** 4) == pytest.approx(2.0 / 5.0)


def test_tensor_rule_is_exact_for_polynomials():
    points, weights = tensor_rule([0.0, 0.0], [1.0, 2.0], 4)
    assert points.shape == (16, 2)
    assert np.sum(weights * points[:, 0] * points[:, 1] ** 2) == pytest.approx(4.0 / 3.0)


def test_adaptive_integral_of_smooth_function(cfg):
    result = integrate_box(lambda p: np.exp(p[:, 0]), [0.0], [1.0], cfg)
    assert complex(result.value).real == pytest.approx(math.e - 1.0, rel=1e-12)
    assert result.error <= cfg.tolerance(math.e - 1.0)


def test_adaptive_integral_refines_near_singularity():
    cfg = QuadratureCfg(max_depth=40)
    result = integrate_box(lambda p: np.sqrt(p[:, 0]), [0.0], [1.0], cfg)
    assert complex(result.value).real == pytest.approx(2.0 / 3.0, abs=1e-8)
    assert result.boxes > 1


def test_adaptive_integral_budget():
    tight = QuadratureCfg(order=2, max_depth=0)
    with pytest.raises(NonConvergenceError) as info:
        integrate_box(lambda p: np.abs(p[:, 0] - 1.0 / 3.0), [0.0], [1.0], tight)
    assert info.value.estimate is not None
    assert info.value.exit_code == 3


def test_degenerate_boxes(cfg):
    assert integrate_box(lambda p: np.ones(len(p)), [0.0], [0.0], cfg).value == 0
    assert integrate_box(lambda p: 3.0 * np.ones(len(p)), [], [], cfg).value == 3
    with pytest.raises(ValueError):
        integrate_box(lambda p: np.ones(len(p)), [1.0], [0.0], cfg)


def test_simplex_map_jacobian():
    t, jacobian = simplex_map(np.array([[0.5, 0.5]]))
    assert t[0] == pytest.approx([0.5, 0.25])
    assert jacobian[0] == pytest.approx(0.5)


def test_simplex_integrals(cfg):
    area = integrate_simplex_box(lambda p: np.ones(len(p)), 2, [], [], cfg)
    assert complex(area.value).real == pytest.approx(0.5)
    moment = integrate_simplex_box(lambda p: p[:, 0], 2, [], [], cfg)
    assert complex(moment.value).real == pytest.approx(1.0 / 6.0)
    prism = integrate_simplex_box(lambda p: p[:, 1], 1, [0.0], [2.0], cfg)
    assert complex(prism.value).real == pytest.approx(2.0)


def test_monte_carlo_is_seeded():
    first = monte_carlo_box(lambda p: p[:, 0], [0.0], [1.0], 100_000, seed=3)
    second = monte_carlo_box(lambda p: p[:, 0], [0.0], [1.0], 100_000, seed=3)
    assert first.value == second.value
    assert complex(first.value).real == pytest.approx(0.5, abs=5 * first.error)
    assert first.evaluations == 100_000


def test_pairwise_sum():
    assert pairwise_sum([]) == 0
    assert pairwise_sum([1, 2j, 3]) == 4 + 2j


def test_richardson_removes_polynomial_terms():
    eps = [0.2, 0.1, 0.05]
    values = [1.0 + 2.0 * e + 3.0 * e ** 2 for e in eps]
    table = richardson(eps, values, order=2)
    assert table.best.real == pytest.approx(1.0, abs=1e-12)
    assert len(table.table[-1]) == 3
    assert richardson(eps[:1], values[:1], order=2).error == float("inf")


def test_richardson_observed_order():
    eps = [0.4, 0.2, 0.1]
    table = richardson(eps, [1.0 + e for e in eps], order=1)
    assert table.estimated_order() == pytest.approx(1.0)
    assert table.slope() == pytest.approx(1.0)
    assert table.best.real == pytest.approx(1.0)
    assert richardson(eps, [2.0, 2.0, 2.0], order=1).estimated_order() is None
