import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banach_indicatrix.dyadic_system import (
    DyadicParams,
    assign_parents,
    auto_params,
    build_dyadic_system,
    build_nested_nets,
    cube_members,
    system_from_dict,
    system_to_dict,
    verify_properties,
)
from banach_indicatrix.errors import InvalidParams, SchemaError, UnknownCube, UnknownGeneration
from banach_indicatrix.metric_space import build_point_cloud, measure
from conftest import P4_FAIL_DELTA, P4_FAIL_POINTS
from oracles import binary_blocks, maximal_separated_nets

clouds = st.lists(
    st.tuples(st.integers(0, 40), st.integers(0, 40)), min_size=1, max_size=40, unique=True
).map(lambda pts: build_point_cloud(np.array(pts, dtype=float) / 40))
deltas = st.sampled_from([0.3, 0.5, 0.7])


def grid(m):
    return build_point_cloud(np.linspace(0.0, 1.0, 2**m))


def test_singleton_system():
    space = build_point_cloud([[1.0, 2.0]])
    system = build_dyadic_system(space, DyadicParams(0.5, 0, 3, 1.0))
    assert all(len(cubes) == 1 and cubes[0].members == (0,) for cubes in system.generations.values())
    report = verify_properties(system)
    assert report.p1 and report.p2 and report.p3[2] and report.p4
    assert system.constants == (1.0, 1.0)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_grid_nets_match_brute_force(m):
    space = grid(m)
    params = DyadicParams(0.5, 0, m, 1.0)
    nets = build_nested_nets(space, params)
    radii = [params.radius(k) for k in params.generations]
    expected = maximal_separated_nets(space.n, lambda i, j: abs(space.coords[i, 0] - space.coords[j, 0]), radii)
    assert [list(n) for n in nets] == expected
    assert [len(n) for n in nets] == [2**k for k in range(m + 1)]


@given(clouds, deltas)
def test_nets_match_brute_force_on_random_clouds(space, delta):
    params = auto_params(space, delta=delta)
    nets = build_nested_nets(space, params)
    radii = [params.radius(k) for k in params.generations]
    assert [list(n) for n in nets] == maximal_separated_nets(space.n, lambda i, j: space.dist[i, j], radii)
    assert len(nets[0]) == 1
    assert all(set(a) <= set(b) for a, b in zip(nets, nets[1:]))


def test_parent_is_itself_when_shared():
    space = grid(3)
    params = DyadicParams(0.5, 0, 3, 1.0)
    nets = build_nested_nets(space, params)
    parents = assign_parents(nets, space, params)
    for k in range(1, 4):
        for c in nets[k - 1]:
            assert parents[k][c] == c


def test_parent_tie_goes_to_lowest_id():
    # fine centre 2 (at 0) is equidistant from coarse centres 0 (at -1) and 1 (at +1)
    space = build_point_cloud([[-1.0], [1.0], [0.0]])
    params = DyadicParams(0.5, 0, 2, 2.0)
    nets = build_nested_nets(space, params)
    assert nets == [(0,), (0, 1), (0, 1, 2)]
    for _ in range(3):
        assert assign_parents(nets, space, params)[2][2] == 0


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_grid_system_is_binary_subdivision(m):
    n = 2**m
    system = build_dyadic_system(grid(m), DyadicParams(0.5, 0, m, 1.0))
    for k in range(m + 1):
        assert [c.members for c in system.generations[k]] == binary_blocks(n, k, m)
    for k in range(1, m + 1):
        for cube in system.generations[k]:
            assert cube.parent == (k - 1, cube.index // 2)
    assert [len(system.generations[k]) for k in range(m + 1)] == [2**k for k in range(m + 1)]


def test_eight_point_example(grid8):
    system = build_dyadic_system(grid8, DyadicParams(0.5, 0, 3, 1.0))
    assert [len(c) for c in system.generations.values()] == [1, 2, 4, 8]
    report = verify_properties(system)
    assert report.p1 and report.p2 and report.p4


def test_cube_members_examples(grid8):
    system = build_dyadic_system(grid8, DyadicParams(0.5, 0, 3, 1.0))
    assert cube_members(system, 0, 0) == frozenset(range(8))
    assert all(len(cube_members(system, 3, a)) == 1 for a in range(8))
    assert cube_members(system, 2, 1) == {2, 3}
    with pytest.raises(UnknownCube):
        cube_members(system, 2, 4)
    with pytest.raises(UnknownCube):
        cube_members(system, 9, 0)
    with pytest.raises(UnknownGeneration):
        system.generation(-1)


def test_finest_singletons_below_min_distance():
    space = build_point_cloud(np.random.default_rng(3).random((40, 2)))
    system = build_dyadic_system(space, auto_params(space))
    finest = system.generations[system.params.k_max]
    assert len(finest) == 40 and all(len(c.members) == 1 for c in finest)


@pytest.mark.parametrize(
    "params",
    [
        DyadicParams(1.0, 0, 2, 10.0),
        DyadicParams(0.0, 0, 2, 10.0),
        DyadicParams(0.5, 3, 2, 10.0),
        DyadicParams(0.5, 0, 2, 0.1),
        DyadicParams(0.5, 0, 2, -1.0),
    ],
)
def test_invalid_params(line3, params):
    with pytest.raises(InvalidParams):
        build_dyadic_system(line3, params)


@settings(max_examples=60, deadline=None)
@given(clouds, deltas)
def test_system_invariants(space, delta):
    system = build_dyadic_system(space, auto_params(space, delta=delta))
    gens = list(system.params.generations)
    total = measure(space, space.ids)

    for k in gens:
        sets = [set(c.members) for c in system.generations[k]]
        assert sum(measure(space, s) for s in sets) == pytest.approx(total)
        assert set().union(*sets) == set(space.ids)
        assert sum(len(s) for s in sets) == space.n
        for cube in system.generations[k]:
            assert cube.center in cube.members
            if k < gens[-1]:
                child_members = set()
                for ck, ca in cube.children:
                    child_members |= set(system.cube(ck, ca).members)
                assert child_members == set(cube.members)

    for i, k in enumerate(gens):
        for l in gens[i:]:
            for q in system.generations[l]:
                containing = [c for c in system.generations[k] if set(q.members) <= set(c.members)]
                assert len(containing) == 1

    sizes = [len(system.generations[k]) for k in gens]
    assert sizes == sorted(sizes)

    c, C = system.constants
    assert 0 < c <= C < np.inf
    for k in gens:
        r = system.params.radius(k)
        for cube in system.generations[k]:
            row = space.dist[cube.center]
            inner = {z for z in space.ids if row[z] < c * r * (1 - 1e-12)}
            assert inner <= set(cube.members)
            assert all(row[z] <= C * r * (1 + 1e-12) for z in cube.members)

    report = verify_properties(system)
    assert report.p1 and report.p2 and report.p3[2]


@given(clouds, deltas)
def test_build_is_deterministic(space, delta):
    params = auto_params(space, delta=delta)
    a, b = build_dyadic_system(space, params), build_dyadic_system(space, params)
    assert system_to_dict(a) == system_to_dict(b)


def test_p4_failure_fixture():
    space = build_point_cloud(P4_FAIL_POINTS)
    system = build_dyadic_system(space, auto_params(space, delta=P4_FAIL_DELTA))
    report = verify_properties(system)
    assert report.p1 and report.p2 and report.p3[2]
    assert not report.p4
    assert report.p4_failures[0] == (4, 2, 3, 0)


def test_p4_pass_fixture(grid8):
    report = verify_properties(build_dyadic_system(grid8, DyadicParams(0.5, 0, 3, 1.0)))
    assert report.p4 and report.p4_failures == ()


def test_p1_detects_broken_nesting(grid8):
    system = build_dyadic_system(grid8, DyadicParams(0.5, 0, 3, 1.0))
    gens = dict(system.generations)
    a, b = gens[2][0], gens[2][1]
    # swap members between generation-2 cubes under different generation-1 parents
    c = gens[2][2]
    gens[2] = (
        dataclasses.replace(a, members=(0, 4)),
        b,
        dataclasses.replace(c, members=(1, 5)),
    ) + gens[2][3:]
    broken = dataclasses.replace(system, generations=gens)
    report = verify_properties(broken)
    assert report.p2 and not report.p1


def test_serialization_round_trip():
    space = build_point_cloud(np.random.default_rng(0).random((25, 2)))
    system = build_dyadic_system(space, auto_params(space))
    payload = system_to_dict(system)
    assert set(payload) == {"delta", "scale", "generations", "constants"}
    again = system_from_dict(space, payload)
    assert system_to_dict(again) == payload
    for k in system.params.generations:
        assert np.array_equal(again.labels[k], system.labels[k])


def test_malformed_dyadic_payload(grid8):
    payload = system_to_dict(build_dyadic_system(grid8, DyadicParams(0.5, 0, 3, 1.0)))
    overlapping = {**payload, "generations": [dict(g) for g in payload["generations"]]}
    overlapping["generations"][2] = {
        "k": 2,
        "cubes": [dict(c) for c in payload["generations"][2]["cubes"]],
    }
    overlapping["generations"][2]["cubes"][0]["members"] = [0, 1, 2]
    with pytest.raises(SchemaError):
        system_from_dict(grid8, overlapping)
    with pytest.raises(SchemaError):
        system_from_dict(grid8, {"delta": 0.5})
