import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import path_length, polygon_nearest
from touring.geometry import (Ball, Box, ConvexPolygon, FatMeta, GeometryError, Instance, Segment,
                              Tour, Union, contains, infer_fat_meta, is_valid_tour, outer_radius,
                              project, tour_length, tour_violations)

coord = st.floats(-20, 20, allow_nan=False, allow_infinity=False)
pt2 = st.tuples(coord, coord)


def regions_2d():
    return [
        Ball((0.5, -1.0), 1.5),
        Ball((0.0, 0.0), 0.0),
        Box((-1.0, 0.0), (2.0, 0.5)),
        Segment((-3.0, 1.0), (2.0, -4.0)),
        ConvexPolygon(((0, 0), (4, 0), (5, 2), (1, 3))),
    ]


def test_project_examples():
    assert np.allclose(project(Ball((0, 0), 1), (2, 0)), (1, 0))
    assert np.allclose(project(Box((0, 0), (1, 1)), (2, 2)), (1, 1))
    assert np.allclose(project(Segment((-10, 0), (10, 0)), (-1, 1)), (-1, 0))


def test_contains_examples():
    assert contains(Ball((0, 0), 1), (1, 0), 1e-9)
    assert not contains(Ball((0, 0), 1), (1.1, 0), 1e-9)
    assert contains(Union((Ball((0, 0), 1), Ball((3, 0), 1))), (3.5, 0), 1e-9)


def test_tour_length_examples():
    assert tour_length([(-1, 1), (0, 0), (1, 1)]) == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    assert tour_length([(0, 0), (0, 0)]) == 0
    assert tour_length([(0, 0), (3, 4)]) == 5


def test_dimension_mismatch_is_an_input_error():
    with pytest.raises(GeometryError):
        project(Ball((0, 0), 1), (1, 2, 3))
    with pytest.raises(GeometryError):
        Instance((0, 0), (1, 1, 1))


@pytest.mark.parametrize("bad", [
    lambda: Ball((0, 0), -1),
    lambda: Box((1, 0), (0, 1)),
    lambda: ConvexPolygon(((0, 0), (0, 1), (1, 0))),  # clockwise
    lambda: ConvexPolygon(((0, 0), (1, 0), (2, 0))),  # collinear
    lambda: Union(()),
    lambda: Union((Union((Ball((0, 0), 1),)),)),
    lambda: Ball((0, math.nan), 1),
    lambda: FatMeta(0.0, 1.0),
    lambda: FatMeta(1.0, 0.5),
])
def test_region_invariants_are_enforced(bad):
    with pytest.raises(GeometryError):
        bad()


def test_polygon_projection_matches_shapely():
    poly = ConvexPolygon(((0, 0), (4, 0), (5, 2), (1, 3)))
    rng = np.random.default_rng(0)
    for p in rng.uniform(-5, 10, size=(300, 2)):
        assert np.allclose(project(poly, p), polygon_nearest(poly.vertices, p), atol=1e-9)


def test_union_projection_takes_nearest_part():
    u = Union((Ball((0, 0), 1), Ball((3, 0), 1)))
    assert np.allclose(project(u, (5, 0)), (4, 0))
    assert np.allclose(project(u, (-5, 0)), (-1, 0))


@settings(max_examples=200, deadline=None)
@given(pt2, pt2)
def test_projection_is_non_expansive(p1, p2):
    for region in regions_2d():
        a, b = project(region, p1), project(region, p2)
        assert np.linalg.norm(a - b) <= np.linalg.norm(np.subtract(p1, p2)) + 1e-9


@settings(max_examples=200, deadline=None)
@given(pt2)
def test_projection_is_idempotent_and_inside(p):
    for region in regions_2d():
        q = project(region, p)
        assert np.allclose(project(region, q), q, atol=1e-12)
        assert contains(region, q, 1e-9)


def test_projection_beats_every_sample_in_region():
    rng = np.random.default_rng(1)
    for region in regions_2d():
        # 1000 region samples: projections of random points land in the region
        samples = region.project(rng.uniform(-10, 10, size=(1000, 2)))
        for p in rng.uniform(-10, 10, size=(20, 2)):
            q = region.project(p)
            gap = np.linalg.norm(p - q)
            assert np.all(gap <= np.linalg.norm(samples - p, axis=1) + 1e-12)


def test_batched_project_matches_single_calls():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(50, 3)) * 4
    ball = Ball((1, 2, 3), 2.0)
    batch = ball.project(pts)
    for p, q in zip(pts, batch):
        assert np.allclose(project(ball, p), q)


def test_support_function_matches_sampled_maximum():
    rng = np.random.default_rng(3)
    for region in regions_2d():
        samples = region.project(rng.uniform(-30, 30, size=(20000, 2)))
        for y in rng.normal(size=(5, 2)):
            assert region.support(y) >= float(np.max(samples @ y)) - 1e-9
            assert region.support(y) <= float(np.max(samples @ y)) + 0.05 * np.linalg.norm(y)


def test_fat_meta_inference_and_outer_radius():
    assert infer_fat_meta(Ball((0, 0), 2)) == FatMeta(2, 1)
    meta = infer_fat_meta(Box((0, 0), (2, 2)))
    assert meta.r_h == 1 and meta.fatness_bound == pytest.approx(math.sqrt(2))
    assert infer_fat_meta(Segment((0, 0), (1, 0))) is None
    assert outer_radius(Box((0, 0), (2, 2))) == pytest.approx(math.sqrt(2))


def test_tour_validity_helpers():
    inst = Instance((0, 0), (4, 0), (Ball((2, 0), 1),))
    good = Tour.from_points([(0, 0), (1, 0), (4, 0)])
    bad = Tour.from_points([(0, 0), (0.5, 0), (4, 0)])
    assert is_valid_tour(inst, good)
    assert tour_violations(inst, bad) == [1]
    assert good.length == pytest.approx(path_length([(0, 0), (1, 0), (4, 0)]), rel=1e-12)


def test_instance_is_immutable_and_hashable_regions():
    inst = Instance((0, 0), (1, 0), (Ball((0, 1), 0.5),))
    with pytest.raises(Exception):
        inst.start = (1, 1)
    assert Ball((0, 1), 0.5) == inst.regions[0]
