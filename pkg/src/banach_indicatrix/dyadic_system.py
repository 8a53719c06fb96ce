"""Dyadic cube systems on finite metric spaces via nested separated nets.

Generation ``k`` works at radius ``scale * delta**k``. Its centres form a
maximal set of points pairwise farther apart than that radius, extending
the centres of generation ``k - 1``. Every centre is attached to its
nearest coarser centre, every point to its nearest finest centre, and a
cube is the set of points whose ancestor chain passes through its centre.
Nesting and the partition property hold by construction; the inner/outer
ball constants are measured afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import InvalidParams, SchemaError, UnknownCube, UnknownGeneration
from .metric_space import PointCloudSpace

# slack on the ball inclusions of properties 3 and 4 (rounding of c*r)
BALL_RTOL = 1e-12
# distances this close (relative) count as a tie when picking the nearest centre
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class DyadicParams:
    delta: float = 0.5
    k_min: int = 0
    k_max: int = 4
    scale: float = 1.0

    def radius(self, k: int) -> float:
        return self.scale * self.delta**k

    @property
    def generations(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def validate(self, space: PointCloudSpace) -> None:
        if not 0.0 < self.delta < 1.0:
            raise InvalidParams(f"dyadic_system: delta must lie in (0, 1), got {self.delta}")
        if self.k_min > self.k_max:
            raise InvalidParams(f"dyadic_system: k_min={self.k_min} exceeds k_max={self.k_max}")
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise InvalidParams(f"dyadic_system: scale must be positive, got {self.scale}")
        if self.radius(self.k_min) < space.diameter:
            raise InvalidParams(
                f"dyadic_system: scale*delta**k_min = {self.radius(self.k_min)} is below the "
                f"diameter {space.diameter}; the coarsest generation would not be a single cube"
            )


def auto_params(space: PointCloudSpace, delta: float = 0.5, k_min: int = 0, k_max: int | None = None) -> DyadicParams:
    """Parameters whose coarsest radius equals the diameter.

    With ``k_max=None`` the finest generation is the first one whose radius
    drops below the smallest pairwise distance, so its cubes are singletons.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidParams(f"dyadic_system: delta must lie in (0, 1), got {delta}")
    diam = space.diameter
    scale = diam / delta**k_min if diam > 0 else 1.0
    while scale * delta**k_min < diam:
        scale = float(np.nextafter(scale, np.inf))
    if k_max is None:
        positive = space.dist[space.dist > 0]
        k_max = k_min
        if positive.size:
            dmin = float(positive.min())
            while scale * delta**k_max >= dmin:
                k_max += 1
    return DyadicParams(delta=delta, k_min=k_min, k_max=k_max, scale=scale)


@dataclass(frozen=True)
class DyadicCube:
    generation: int
    index: int
    center: int
    members: tuple[int, ...]
    parent: tuple[int, int] | None
    children: tuple[tuple[int, int], ...]


@dataclass(frozen=True, eq=False)
class DyadicSystem:
    space: PointCloudSpace
    params: DyadicParams
    generations: dict[int, tuple[DyadicCube, ...]]
    constants: tuple[float, float]
    # labels[k][x] is the index of the generation-k cube holding point x
    labels: dict[int, np.ndarray]

    def cube(self, k: int, alpha: int) -> DyadicCube:
        cubes = self.generations.get(k)
        if cubes is None or not 0 <= alpha < len(cubes):
            raise UnknownCube(f"dyadic_system: no cube (k={k}, alpha={alpha})")
        return cubes[alpha]

    def generation(self, k: int) -> tuple[DyadicCube, ...]:
        if k not in self.generations:
            raise UnknownGeneration(f"dyadic_system: no generation {k} (have {self.params.k_min}..{self.params.k_max})")
        return self.generations[k]


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the four checks, with ``r_k = scale * delta**k``.

    * p1: for ``l >= k`` each generation-``l`` cube lies inside exactly one generation-``k`` cube.
    * p2: every generation partitions the space into nonempty cubes.
    * p3: ``(c, C, ok)``; each cube holds ``B(center, c r_k)`` and sits inside ``B(center, C r_k)``.
    * p4: ``B(z, C r_l) ⊆ B(z', C r_k)`` whenever cube ``(l, β)`` with centre ``z`` lies in
      cube ``(k, α)`` with centre ``z'``; failing ``(l, β, k, α)`` quadruples are listed.
    """

    p1: bool
    p2: bool
    p3: tuple[float, float, bool]
    p4: bool
    p4_failures: tuple[tuple[int, int, int, int], ...] = ()

    @property
    def all_pass(self) -> bool:
        return self.p1 and self.p2 and self.p3[2] and self.p4


def build_nested_nets(space: PointCloudSpace, params: DyadicParams) -> list[tuple[int, ...]]:
    """Centre ids per generation, coarsest first.

    Each net keeps the previous one and scans the remaining points in
    ascending id order, adding any point farther than ``scale*delta**k``
    from every centre so far.
    """
    params.validate(space)
    nets = []
    net: list[int] = []
    for k in params.generations:
        r = params.radius(k)
        gap = space.dist[net].min(axis=0) if net else np.full(space.n, np.inf)
        for i in range(space.n):
            if gap[i] > r:
                net.append(i)
                np.minimum(gap, space.dist[i], out=gap)
        net.sort()
        nets.append(tuple(net))
    return nets


def nearest_center(dist_rows: np.ndarray) -> np.ndarray:
    """Column index of the nearest centre per row; columns must be in ascending id order.

    Near-ties (within ``TIE_RTOL``) resolve to the lowest id, so rounding in
    the distances cannot pick the winner.
    """
    dmin = dist_rows.min(axis=1, keepdims=True)
    return np.argmax(dist_rows <= dmin * (1.0 + TIE_RTOL), axis=1)


def assign_parents(nets: list[tuple[int, ...]], space: PointCloudSpace, params: DyadicParams) -> dict[int, dict[int, int]]:
    """Map each generation-k centre to its nearest generation-(k-1) centre.

    Returns ``{k: {centre: parent_centre}}`` for ``k > k_min``; ties go to
    the lowest id, and a centre present in both nets is its own parent.
    """
    parents = {}
    for k, coarse, fine in zip(params.generations[1:], nets, nets[1:]):
        coarse_arr = np.asarray(coarse)
        nearest = nearest_center(space.dist[np.ix_(list(fine), coarse)])
        parents[k] = {c: int(coarse_arr[j]) for c, j in zip(fine, nearest)}
    return parents


def _ball_constants(space: PointCloudSpace, params: DyadicParams, generations) -> tuple[float, float]:
    c_sup, C_inf = np.inf, 0.0
    for k, cubes in generations.items():
        r = params.radius(k)
        for cube in cubes:
            inside = np.zeros(space.n, dtype=bool)
            inside[list(cube.members)] = True
            row = space.dist[cube.center]
            C_inf = max(C_inf, float(row[inside].max()) / r)
            if not inside.all():
                c_sup = min(c_sup, float(row[~inside].min()) / r)
    return c_sup, C_inf


def ball_constants(system: DyadicSystem) -> tuple[float, float]:
    """Raw (largest inner, smallest outer) ball constants over all cubes.

    The inner one is ``inf`` when no cube misses any point, the outer one
    ``0`` when every cube is a singleton.
    """
    return _ball_constants(system.space, system.params, system.generations)


def _reported_constants(c_sup: float, C_inf: float) -> tuple[float, float]:
    C = C_inf if C_inf > 0 else 1.0
    # a finite cloud can have c_sup > C_inf (lone centre in a big empty ball); clip to keep c <= C
    c = min(c_sup, C)
    return c, C


def _assemble(space, params, nets, parents, labels_by_center) -> DyadicSystem:
    index_of = {k: {c: a for a, c in enumerate(net)} for k, net in zip(params.generations, nets)}
    children: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for k, pmap in parents.items():
        for c in nets[k - params.k_min]:
            key = (k - 1, index_of[k - 1][pmap[c]])
            children.setdefault(key, []).append((k, index_of[k][c]))
    generations = {}
    labels = {}
    for k, net in zip(params.generations, nets):
        lab = np.searchsorted(np.asarray(net), labels_by_center[k])
        lab.setflags(write=False)
        labels[k] = lab
        cubes = []
        for a, c in enumerate(net):
            members = tuple(int(i) for i in np.flatnonzero(lab == a))
            parent = None if k == params.k_min else (k - 1, index_of[k - 1][parents[k][c]])
            cubes.append(DyadicCube(k, a, int(c), members, parent, tuple(sorted(children.get((k, a), ())))))
        generations[k] = tuple(cubes)
    constants = _reported_constants(*_ball_constants(space, params, generations))
    return DyadicSystem(space, params, generations, constants, labels)


def build_dyadic_system(space: PointCloudSpace, params: DyadicParams | None = None) -> DyadicSystem:
    if params is None:
        params = auto_params(space)
    nets = build_nested_nets(space, params)
    parents = assign_parents(nets, space, params)
    finest = np.asarray(nets[-1])
    owner = finest[nearest_center(space.dist[:, finest])]
    by_center = {params.k_max: owner}
    for k in reversed(params.generations[1:]):
        pmap = parents[k]
        by_center[k - 1] = np.array([pmap[int(c)] for c in by_center[k]])
    return _assemble(space, params, nets, parents, by_center)


def cube_members(system: DyadicSystem, k: int, alpha: int) -> frozenset[int]:
    return frozenset(system.cube(k, alpha).members)


def _owners(system: DyadicSystem, k: int) -> tuple[np.ndarray, bool]:
    """Cube index per point read off the member lists, and whether they partition."""
    owner = np.full(system.space.n, -1)
    hits = np.zeros(system.space.n, dtype=int)
    for cube in system.generations[k]:
        idx = list(cube.members)
        owner[idx] = cube.index
        hits[idx] += 1
    return owner, bool(np.all(hits == 1))


def verify_properties(system: DyadicSystem) -> PropertyReport:
    """Check the four dyadic-cube properties by exhaustive scans.

    Property 3 is checked with open inner balls and closed outer balls (the
    farthest member of a finite cube sits exactly on the outer radius).
    Property 4 compares the balls as point sets, using the reported outer
    constant, over every cube and each of its ancestors.
    """
    space, params = system.space, system.params
    gens = list(params.generations)
    owners = {}
    p2 = True
    for k in gens:
        owners[k], ok = _owners(system, k)
        p2 = p2 and ok and all(c.members for c in system.generations[k])

    p1 = True
    for i, k in enumerate(gens):
        for l in gens[i:]:
            for cube in system.generations[l]:
                if len({int(owners[k][m]) for m in cube.members}) != 1:
                    p1 = False

    c, C = system.constants
    slack = 1.0 + BALL_RTOL
    p3_ok = bool(0 < c <= C < np.inf)
    for k in gens:
        r = params.radius(k)
        for cube in system.generations[k]:
            row = space.dist[cube.center]
            inside = np.zeros(space.n, dtype=bool)
            inside[list(cube.members)] = True
            inner = row < c * r / slack
            if np.any(inner & ~inside) or np.any(row[inside] > C * r * slack):
                p3_ok = False

    failures = []
    if p1 and p2:
        for l in gens:
            for cube in system.generations[l]:
                small = space.dist[cube.center] < C * params.radius(l)
                for k in gens:
                    if k >= l:
                        break
                    anc = system.generations[k][int(owners[k][cube.center])]
                    big = space.dist[anc.center] < C * params.radius(k) * slack
                    if np.any(small & ~big):
                        failures.append((l, cube.index, k, anc.index))
    p4 = p1 and p2 and not failures
    return PropertyReport(p1=p1, p2=p2, p3=(float(c), float(C), p3_ok), p4=p4, p4_failures=tuple(failures))


def system_to_dict(system: DyadicSystem) -> dict[str, Any]:
    c, C = system.constants
    return {
        "delta": system.params.delta,
        "scale": system.params.scale,
        "generations": [
            {
                "k": k,
                "cubes": [
                    {
                        "alpha": cube.index,
                        "center": cube.center,
                        "parent": None if cube.parent is None else cube.parent[1],
                        "members": list(cube.members),
                    }
                    for cube in cubes
                ],
            }
            for k, cubes in system.generations.items()
        ],
        "constants": {"c": c, "C": C},
    }


def system_from_dict(space: PointCloudSpace, payload: dict[str, Any]) -> DyadicSystem:
    """Rebuild a system from its JSON form, re-validating the partition and nesting."""
    try:
        gens = sorted(payload["generations"], key=lambda g: g["k"])
        ks = [int(g["k"]) for g in gens]
        params = DyadicParams(
            delta=float(payload["delta"]), k_min=ks[0], k_max=ks[-1], scale=float(payload["scale"])
        )
        if ks != list(params.generations):
            raise SchemaError(f"dyadic_system: generations must be consecutive, got {ks}")
        nets, parents, by_center = [], {}, {}
        for g in gens:
            k = int(g["k"])
            cubes = sorted(g["cubes"], key=lambda c: c["alpha"])
            centers = [int(c["center"]) for c in cubes]
            if centers != sorted(centers) or [c["alpha"] for c in cubes] != list(range(len(cubes))):
                raise SchemaError(f"dyadic_system: generation {k} cubes must be indexed by ascending centre")
            nets.append(tuple(centers))
            owner = np.full(space.n, -1)
            hits = np.zeros(space.n, dtype=int)
            for c in cubes:
                idx = [space.check_id(int(m)) for m in c["members"]]
                owner[idx] = int(c["center"])
                hits[idx] += 1
            if np.any(hits != 1):
                raise SchemaError(f"dyadic_system: generation {k} cubes do not partition the points")
            by_center[k] = owner
            if k > params.k_min:
                prev = nets[-2]
                parents[k] = {int(c["center"]): prev[int(c["parent"])] for c in cubes}
                if any(parents[k][int(c)] != int(p) for c, p in zip(owner, by_center[k - 1])):
                    raise SchemaError(f"dyadic_system: generation {k} parents disagree with cube membership")
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"dyadic_system: malformed dyadic JSON ({exc!r})") from exc
    params.validate(space)
    system = _assemble(space, params, nets, parents, by_center)
    report = verify_properties(system)
    if not (report.p1 and report.p2):
        raise SchemaError("dyadic_system: loaded cubes are not a nested partition")
    return system
