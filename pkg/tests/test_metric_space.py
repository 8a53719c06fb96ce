import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banach_indicatrix.errors import EmptySpace, MetricViolation, NegativeWeight, UnknownPoint
from banach_indicatrix.metric_space import (
    ball,
    build_point_cloud,
    cover_ball,
    estimate_doubling,
    measure,
)
from oracles import min_half_cover

coords_1d = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=30, unique=True)
clouds_2d = st.lists(
    st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=1, max_size=40, unique=True
).map(lambda pts: build_point_cloud(np.array(pts, dtype=float) / 10))


def test_singleton_has_zero_diameter():
    space = build_point_cloud([[0.5, 0.5]], weights=[1.0])
    assert space.n == 1
    assert space.diameter == 0.0


def test_collinear_diameter(line3):
    assert line3.diameter == 2.0


def test_triangle_violation_names_triple():
    d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(MetricViolation, match=r"triple \(0, 1, 2\)"):
        build_point_cloud(d, metric="matrix")


@pytest.mark.parametrize(
    "matrix",
    [
        [[0, 1], [2, 0]],
        [[1, 1], [1, 0]],
        [[0, -1], [-1, 0]],
        [[0, 1, 1], [1, 0, 1]],
    ],
)
def test_bad_matrices_rejected(matrix):
    with pytest.raises(MetricViolation):
        build_point_cloud(matrix, metric="matrix")


def test_valid_matrix_accepted():
    d = [[0, 3, 4], [3, 0, 5], [4, 5, 0]]
    space = build_point_cloud(d, metric="matrix")
    assert space.diameter == 5.0
    assert space.coords is None


def test_empty_and_negative_weight():
    with pytest.raises(EmptySpace):
        build_point_cloud([])
    with pytest.raises(NegativeWeight):
        build_point_cloud([[0.0], [1.0]], weights=[1.0, -0.5])


def test_duplicates_merge_with_summed_weight():
    space = build_point_cloud([[0.0], [1.0], [0.0], [2.0]], weights=[1.0, 2.0, 3.0, 4.0])
    assert space.n == 3
    assert space.origin == ((0, 2), (1,), (3,))
    assert space.weights.tolist() == [4.0, 2.0, 4.0]


def test_manhattan_metric():
    space = build_point_cloud([[0, 0], [1, 1]], metric="manhattan")
    assert space.dist[0, 1] == 2.0


def test_ball_examples(line3):
    assert ball(line3, 0, 0.0) == frozenset()
    assert ball(line3, 0, 2.5) == {0, 1, 2}
    assert ball(line3, 1, 1.5) == {0, 1, 2}
    # open ball: the point at distance exactly 1 is outside
    assert ball(line3, 0, 1.0) == {0}


def test_unknown_point(line3):
    with pytest.raises(UnknownPoint):
        ball(line3, 3, 1.0)
    with pytest.raises(UnknownPoint):
        measure(line3, {0, 7})


def test_measure_examples():
    space = build_point_cloud(np.arange(10.0))
    assert measure(space, set()) == 0.0
    assert measure(space, range(10)) == 10.0


@given(st.lists(st.floats(0, 100), min_size=2, max_size=30), st.data())
def test_measure_additive_on_disjoint_sets(weights, data):
    space = build_point_cloud(np.arange(len(weights), dtype=float), weights=weights)
    side = data.draw(st.lists(st.sampled_from([0, 1, 2]), min_size=len(weights), max_size=len(weights)))
    A = {i for i, s in enumerate(side) if s == 0}
    B = {i for i, s in enumerate(side) if s == 1}
    direct = lambda S: sum(weights[i] for i in sorted(S))  # noqa: E731
    assert measure(space, A) == pytest.approx(direct(A), rel=1e-12, abs=1e-12)
    assert measure(space, A | B) == pytest.approx(measure(space, A) + measure(space, B), rel=1e-12, abs=1e-12)
    assert measure(space, A) <= measure(space, A | B) + 1e-12


@given(clouds_2d, st.data())
def test_ball_monotone_in_radius(space, data):
    x = data.draw(st.integers(0, space.n - 1))
    r1 = data.draw(st.floats(0, 20))
    r2 = data.draw(st.floats(r1, 40))
    assert ball(space, x, r1) <= ball(space, x, r2)


@settings(max_examples=30)
@given(clouds_2d, st.floats(0, 15))
def test_ball_strictness_exhaustive(space, r):
    for x in space.ids:
        expected = {z for z in space.ids if float(np.hypot(*(space.coords[x] - space.coords[z]))) < r}
        got = ball(space, x, r)
        # tolerate disagreement only for points within rounding of the boundary
        for z in got ^ expected:
            assert abs(space.dist[x, z] - r) < 1e-12
        assert all(space.dist[x, z] < r for z in got)


def test_doubling_singleton():
    assert estimate_doubling(build_point_cloud([[3.0]]), trials=10, seed=1).lambda_hat == 1


def test_doubling_deterministic_on_grid():
    space = build_point_cloud(np.linspace(0, 1, 33))
    a = estimate_doubling(space, trials=50, seed=7)
    b = estimate_doubling(space, trials=50, seed=7)
    assert a == b
    assert 1 <= a.lambda_hat < np.inf


def test_two_point_cover_matches_exhaustive_search():
    pts = [(0.0,), (1.0,)]
    space = build_point_cloud(pts)
    for center in (0, 1):
        greedy = cover_ball(space, center, 1.5)
        assert len(greedy) <= 2
        assert min_half_cover(pts, center, 1.5) == 2


@settings(max_examples=40)
@given(clouds_2d, st.data())
def test_greedy_cover_is_a_cover_and_packing(space, data):
    x = data.draw(st.integers(0, space.n - 1))
    r = data.draw(st.floats(0.05, 20))
    centers = cover_ball(space, x, r)
    for z in ball(space, x, r):
        assert any(space.dist[c, z] < r / 2 for c in centers)
    for a in centers:
        for b in centers:
            if a != b:
                assert space.dist[a, b] >= r / 2
