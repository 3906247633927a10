from types import SimpleNamespace

import numpy as np
import pytest
from sympy import Matrix
import polyfan
from polyfan import (
    Cone, Fan, Lattice, arrangement_refinement, common_refinement, compactify, intersect, meets_relint,
    orbit_basis, orbit_image, orbit_projection, orientation_generator, primitive, project_cone, split_cone,
    stellar_subdivide,
)
from exceptions import DegenerateConeError, FaceError, InvariantViolation, SupportMismatchError

P2_RAYS = [[1, 0], [0, 1], [-1, -1]]


@pytest.fixture
def p2_fan():
    return Fan.from_maximal(2, P2_RAYS, [[0, 1], [1, 2], [0, 2]], name="P2")


@pytest.fixture
def line_fan(p2_fan):
    return compactify(Fan.from_maximal(2, P2_RAYS, [[0], [1], [2]]), p2_fan)


@pytest.fixture
def quadrant():
    return Cone.from_generators([[1, 0], [0, 1]], 2)


def test_lattice_rank_must_be_positive():
    assert Lattice(2).role == "N"
    assert Lattice(2, dual=True).role == "M"
    with pytest.raises(InvariantViolation):
        Lattice(0)


def test_cone_generators_are_primitive_and_sorted():
    cone = Cone.from_generators([[2, 0], [0, 3]], 2)
    assert cone.rays == ((0, 1), (1, 0))
    assert cone.dim == 2
    assert primitive([6, -9]) == (2, -3)


def test_redundant_generator_is_dropped():
    cone = Cone.from_generators([[1, 0], [0, 1], [1, 1]], 2)
    assert cone.rays == ((0, 1), (1, 0))


def test_non_pointed_cone_is_rejected():
    with pytest.raises(DegenerateConeError):
        Cone.from_generators([[1, 0], [-1, 0]], 2)
    with pytest.raises(DegenerateConeError):
        Cone.from_generators([[1, 0, 0]], 2)


def test_facets_and_faces(quadrant):
    normals = {n for n, _ in quadrant.facet_normals}
    assert normals == {(1, 0), (0, 1)}
    assert len(quadrant.faces()) == 4
    assert quadrant.has_face(Cone.from_generators([[1, 0]], 2))
    assert quadrant.has_face(Cone.zero(2))


def test_membership(quadrant):
    assert quadrant.contains([3, 0])
    assert not quadrant.in_relint([3, 0])
    assert quadrant.in_relint([1, 2])
    assert not quadrant.contains([-1, 2])


def test_orbit_coordinates():
    ray = Cone.from_generators([[1, 0]], 2)
    assert orbit_basis(ray, 2) == ((0, 1),)
    assert orbit_basis(None, 2) == ((1, 0), (0, 1))
    assert orbit_projection(ray, Cone.zero(2)) == Matrix([[0, 1]])


def test_orbit_projection_requires_face(quadrant):
    with pytest.raises(FaceError):
        orbit_projection(Cone.from_generators([[1, 0]], 2), Cone.from_generators([[0, 1]], 2))


def test_orbit_image_and_projected_cone(quadrant):
    ray = Cone.from_generators([[1, 0]], 2)
    image = orbit_image(quadrant, ray, 2)
    assert image.rays == ((1,),)
    projected = project_cone(Cone.from_generators([[1, 1]], 2), ray, 2)
    assert projected.orbit == ray
    assert projected.rays == ((1,),)


def test_meets_relint(quadrant):
    ray = Cone.from_generators([[1, 0]], 2)
    assert meets_relint(ray, ray, 2)
    assert not meets_relint(ray, quadrant, 2)
    assert meets_relint(Cone.from_generators([[1, 1]], 2), quadrant, 2)


def test_orientation_generator_sign(quadrant):
    assert orientation_generator(quadrant, [[1, 0], [0, 1]]).generator == (1,)
    assert orientation_generator(quadrant, [[0, 1], [1, 0]]).generator == (-1,)
    with pytest.raises(DegenerateConeError):
        orientation_generator(quadrant, [[1, 0], [2, 0]])


def test_fan_closed_under_faces(p2_fan):
    assert len(p2_fan.cones) == 7
    assert len(p2_fan.maximal_cones) == 3
    assert p2_fan.dimension == 2
    assert p2_fan.is_simplicial()
    assert p2_fan.is_pure()


def test_fan_rejects_overlapping_cones():
    with pytest.raises(InvariantViolation) as info:
        Fan.from_maximal(2, [[1, 0], [0, 1], [1, 1]], [[0, 1], [1, 2]])
    assert info.value.invariant == "Fan: intersections are common faces"


def test_fan_rejects_missing_ray():
    with pytest.raises(InvariantViolation):
        Fan.from_maximal(2, [[1, 0]], [[0, 5]])


def test_compactified_line(line_fan):
    assert len(line_fan.cones) == 7
    boundary = [c for c in line_fan.cones if c.orbit is not None]
    assert len(boundary) == 3
    assert all(c.dim == 0 for c in boundary)
    ray = Cone.from_generators([[1, 0]], 2)
    point = Cone.zero(1, ray)
    assert line_fan.is_face(point, ray)


def test_compactify_rejects_foreign_support(p2_fan):
    with pytest.raises(SupportMismatchError):
        compactify(Fan.from_maximal(1, [[1]], [[0]]), p2_fan)


def test_stellar_subdivision(p2_fan):
    cone = Cone.from_generators([[1, 0], [0, 1]], 2)
    subdivided = stellar_subdivide(p2_fan, cone)
    assert len(subdivided.maximal_cones) == 4
    assert len(subdivided.cones) == 9
    assert Cone.from_generators([[1, 1]], 2) in subdivided


def test_intersect_cones(quadrant):
    other = Cone.from_generators([[1, 0], [1, 1]], 2)
    assert intersect(quadrant, other) == other
    opposite = Cone.from_generators([[-1, 0], [0, -1]], 2)
    assert intersect(quadrant, opposite) == Cone.zero(2)


def test_common_refinement():
    blowup = Fan.from_maximal(2, [[1, 0], [1, 1], [0, 1], [-1, -1]], [[0, 1], [1, 2], [2, 3], [3, 0]])
    p1xp1 = Fan.from_maximal(2, [[1, 0], [0, 1], [-1, 0], [0, -1]], [[0, 1], [1, 2], [2, 3], [3, 0]])
    refined = common_refinement(blowup, p1xp1)
    assert len(refined.maximal_cones) == 6
    assert len(refined.cones_of_dim(1)) == 6


def test_common_refinement_needs_equal_support(p2_fan):
    quadrant_fan = Fan.from_maximal(2, [[1, 0], [0, 1]], [[0, 1]])
    with pytest.raises(SupportMismatchError):
        common_refinement(p2_fan, quadrant_fan)


def test_pointedness_needs_an_exact_witness(monkeypatch):
    # optimum claimed by the LP, but (1, 0) is negative on (-1, 1)
    fake = SimpleNamespace(success=True, fun=-1.0, x=np.array([1.0, 0.0, 1.0]))
    monkeypatch.setattr(polyfan, "_linprog", lambda *args, **kwargs: fake)
    with pytest.raises(InvariantViolation) as info:
        Cone.from_generators([[1, 0], [-1, 1], [0, 1]], 2)
    assert info.value.invariant == "Cone: strongly convex"


def test_pointedness_with_verified_witness():
    cone = Cone.from_generators([[1, 0], [-1, 1], [0, 1]], 2)
    assert cone.rays == ((-1, 1), (1, 0))


def test_split_cone(quadrant):
    pieces = split_cone(quadrant, (1, -1))
    assert sorted(p.rays for p in pieces) == [((0, 1), (1, 1)), ((1, 0), (1, 1))]
    assert split_cone(quadrant, (1, 1)) == [quadrant]
    ray = Cone.from_generators([[1, 0]], 2)
    assert split_cone(ray, (0, 1)) == [ray]


def test_arrangement_refinement_of_overlapping_cones(quadrant):
    wedge = Cone.from_generators([[1, 0], [1, 1]], 2)
    lower = Cone.from_generators([[1, 0], [-1, -1]], 2)
    first, second, third = arrangement_refinement([quadrant, wedge, lower])
    assert wedge in first
    assert second == [wedge]
    assert len(third) == 2
    assert Cone.from_generators([[0, -1]], 2) in {f for piece in third for f in piece.facets()}
    Fan.from_cones(first + second + third, Lattice(2))


def test_arrangement_refinement_of_planes_in_space():
    # two 2-dimensional cones in different planes that cross along a ray
    a = Cone.from_generators([[1, 0, 0], [-1, 0, 1]], 3)
    b = Cone.from_generators([[0, 1, 0], [0, -1, 1]], 3)
    pieces = arrangement_refinement([a, b])
    assert [len(p) for p in pieces] == [2, 2]
    Fan.from_cones([p for group in pieces for p in group], Lattice(3))
