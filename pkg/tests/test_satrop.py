import math
from fractions import Fraction
import numpy as np
import pytest
from pathlib import Path
from config import SamplingConfig
from cycles import Polynomial
from documents import ChainDoc, SemialgDoc, build_chain, build_semialg, load_document
from satrop import (
    Constraint, DirectionCloud, ExpBasicCone, SemialgSet, in_exp_cone, log_limit_sample, orbit_meets,
    phase_boundary_slice, positive_part_point, slice_weight, spot_check_fan_structure,
)
from exceptions import InvariantViolation, SamplingFailure

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def semialg(name):
    return build_semialg(load_document(SAMPLES / f"{name}.json", SemialgDoc))


def chain(name):
    return build_chain(load_document(SAMPLES / f"{name}.json", ChainDoc))


def one_constraint(n, terms, relation=">="):
    return SemialgSet(n, 0, (Constraint(Polynomial.from_terms(n, terms), relation),))


@pytest.fixture
def sampling():
    return SamplingConfig(samples=40, seed=11, max_attempts=10)


def test_exp_cone_membership():
    cone = ExpBasicCone((2,), 0.5)
    assert cone.r == 2
    assert in_exp_cone((1e-4, 0.1), cone)
    assert in_exp_cone((0.01, 0.1), cone)
    assert not in_exp_cone((0.1, 0.1), cone)
    assert not in_exp_cone((1e-4, 0.6), cone)
    with pytest.raises(InvariantViolation):
        in_exp_cone((0.1,), cone)


def test_exp_cone_parameters_must_be_positive():
    with pytest.raises(InvariantViolation) as info:
        ExpBasicCone((0,), 0.5)
    assert info.value.invariant == "ExpBasicCone: N_i > 0"
    with pytest.raises(InvariantViolation):
        ExpBasicCone((2,), 0.0)


def test_semialgebraic_membership():
    halfline = semialg("halfline_set")
    assert halfline.contains([0.5])
    assert halfline.contains([1.0])
    assert not halfline.contains([2.0])
    assert not halfline.contains([-0.5])
    with pytest.raises(InvariantViolation):
        SemialgSet(2, 0, (Constraint(Polynomial.from_terms(1, [(1, (1,))])),))


def test_constraint_relation_is_checked():
    with pytest.raises(InvariantViolation):
        Constraint(Polynomial.from_terms(1, [(1, (1,))]), "<")


def test_orbit_meets_by_dominant_terms():
    assert orbit_meets(one_constraint(1, [(1, (0,)), (1, (1,))]), (1,)) == "meets-fully"
    assert orbit_meets(one_constraint(1, [(-1, (0,)), (1, (1,))]), (1,)) == "empty"
    assert orbit_meets(one_constraint(2, [(1, (1, 0)), (-1, (0, 1))]), (1, 1)) == "indeterminate"
    assert orbit_meets(one_constraint(1, [(1, (0,)), (1, (1,))], "="), (1,)) == "indeterminate"


def test_halfline_directions(sampling):
    cloud = log_limit_sample(semialg("halfline_set"), [4.0, 8.0], cfg=sampling)
    assert cloud.vectors.shape[0] > 0
    assert np.allclose(cloud.vectors, 1.0)
    assert cloud.clusters[0].center == pytest.approx((1.0,))
    assert cloud.to_dict()["certified"] is False


def test_parabola_directions(sampling):
    cloud = log_limit_sample(semialg("parabola_set"), [4.0, 8.0], cfg=sampling, threads=2)
    assert cloud.vectors.shape[0] > 0
    slope = np.array([1.0, 2.0]) / math.sqrt(5.0)
    for v in cloud.vectors:
        assert min(np.linalg.norm(v - slope), np.linalg.norm(v + slope)) < 1e-3


def test_bounded_set_has_no_directions(sampling):
    cloud = log_limit_sample(semialg("point_set"), [5.0], cfg=sampling)
    assert cloud.vectors.shape[0] == 0
    assert cloud.clusters == []


def test_empty_set_sampling_fails():
    empty = one_constraint(1, [(-1, (0,))])
    with pytest.raises(SamplingFailure):
        log_limit_sample(empty, [2.0], samples=5, cfg=SamplingConfig(max_attempts=2))
    with pytest.raises(InvariantViolation):
        log_limit_sample(empty, [0.0])


def test_direction_cloud_needs_unit_vectors():
    with pytest.raises(InvariantViolation):
        DirectionCloud(np.array([[2.0, 0.0]]), np.ones(1))


def test_positive_part_point():
    point = positive_part_point([1.0, math.exp(-2.0), 0.0])
    assert point[0] == pytest.approx(0.0)
    assert point[1] == pytest.approx(2.0)
    assert point[2] == float("inf")


def test_phase_slice_recovers_weight():
    line = chain("line_chain")
    sliced = phase_boundary_slice(line, (1, 0))
    assert sliced.dim == 1
    assert sliced.coords_basis == ((0, 1), (1, 0))
    assert slice_weight(sliced).real == pytest.approx(1.0, abs=1e-8)


def test_spot_check_of_line_chart():
    line = chain("line_chain")
    assert spot_check_fan_structure(line, [(1, 0)]).passed
    verdict = spot_check_fan_structure(line, [(1, 0)], tol=1e-6)
    assert not verdict.passed
    assert verdict.to_dict()["ray"] == [1, 0]


def _exp_cone_by_definition(a, cone):
    exact = [Fraction(x) for x in a]
    if any(x <= 0 or x > Fraction(cone.h) for x in exact):
        return False
    return all(exact[i] <= exact[i + 1] ** cone.N[i] for i in range(len(exact) - 1))


def test_exp_cone_matches_its_defining_inequalities():
    rng = np.random.default_rng(5)
    outcomes = []
    for _ in range(1000):
        cone = ExpBasicCone(tuple(int(x) for x in rng.integers(1, 4, size=int(rng.integers(1, 4)))),
                            float(rng.uniform(0.1, 1.0)))
        a = [float(rng.uniform(0.0, 1.2 * cone.h))]
        for exponent in reversed(cone.N):
            a.insert(0, float(a[0] ** exponent * math.exp(rng.normal())))
        expected = _exp_cone_by_definition(a, cone)
        assert in_exp_cone(a, cone) == expected, (a, cone)
        outcomes.append(expected)
    assert 50 < sum(outcomes) < 950


def _dominant_constraint(rng, w, positive):
    base = (3, 3)
    terms = [(int(rng.integers(1, 4)) * (1 if positive else -1), base)]
    while len(terms) < 3:
        delta = [int(x) for x in rng.integers(-2, 3, size=2)]
        if sum(d * x for d, x in zip(delta, w)) > 0:
            sign = 1 if rng.random() < 0.5 else -1
            terms.append((sign * int(rng.integers(1, 4)), tuple(b + d for b, d in zip(base, delta))))
    return Constraint(Polynomial.from_terms(2, terms))


def test_orbit_meets_follows_the_dominant_signs():
    rng = np.random.default_rng(8)
    for k in range(20):
        w = (0, 0)
        while not any(w):
            w = tuple(int(x) for x in rng.integers(-2, 3, size=2))
        signs = [k % 2 == 0] + ([bool(rng.random() < 0.7)] if k % 3 == 0 else [])
        s = SemialgSet(2, 0, tuple(_dominant_constraint(rng, w, positive) for positive in signs))
        assert orbit_meets(s, w) == ("meets-fully" if all(signs) else "empty")


def test_parabola_clusters_lie_on_the_tropical_curve(sampling):
    cloud = log_limit_sample(semialg("parabola_set"), [4.0, 8.0], cfg=sampling)
    slope = np.array([1.0, 2.0]) / math.sqrt(5.0)
    assert 1 <= len(cloud.clusters) <= 2
    for cluster in cloud.clusters:
        center = np.array(cluster.center)
        angle = min(np.arccos(np.clip(np.dot(center, slope), -1.0, 1.0)),
                    np.arccos(np.clip(np.dot(center, -slope), -1.0, 1.0)))
        assert angle < 0.05
