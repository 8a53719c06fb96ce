"""Finite metric measure spaces: point clouds with atomic weights.

A ``PointCloudSpace`` holds its full pairwise distance matrix, so every
query below is an exact scan. This is meant for clouds of a few thousand
points at most.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySpace, MetricViolation, NegativeWeight, SchemaError, UnknownPoint

METRICS = ("euclidean", "manhattan", "matrix")

# relative slack for the triangle inequality on explicit matrices
TRIANGLE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class PointCloudSpace:
    """A finite metric space with point masses.

    ``coords`` is ``None`` when the space was given as an explicit distance
    matrix. ``origin[i]`` lists the input rows merged into point ``i``.
    """

    dist: np.ndarray
    weights: np.ndarray
    metric: str
    coords: np.ndarray | None = None
    origin: tuple[tuple[int, ...], ...] = ()
    diameter: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "diameter", float(self.dist.max()) if self.dist.size else 0.0)
        for arr in (self.dist, self.weights, self.coords):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def ids(self) -> range:
        return range(self.n)

    @property
    def total_weight(self) -> float:
        return measure(self, self.ids)

    def check_id(self, i) -> int:
        if isinstance(i, (bool, np.bool_)) or not isinstance(i, (int, np.integer)) or not 0 <= i < self.n:
            raise UnknownPoint(f"metric_space: unknown point id {i!r} (space has {self.n} points)")
        return int(i)

    def id_mask(self, ids: Iterable[int] | None) -> np.ndarray:
        """Boolean mask over the points; ``None`` selects every point."""
        mask = np.zeros(self.n, dtype=bool)
        if ids is None:
            mask[:] = True
            return mask
        for i in ids:
            mask[self.check_id(i)] = True
        return mask


@dataclass(frozen=True)
class DoublingEstimate:
    lambda_hat: int
    trials: int
    worst_ball: tuple[int, float]


def pairwise_distances(coords: np.ndarray, metric: str) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    if metric == "euclidean":
        return np.hypot.reduce(np.abs(diff), axis=-1)
    if metric == "manhattan":
        return np.abs(diff).sum(axis=2)
    raise SchemaError(f"metric_space: unknown metric {metric!r}")


def check_metric_matrix(d: np.ndarray) -> None:
    """Raise ``MetricViolation`` unless ``d`` is a (pseudo)metric matrix.

    Zero off-diagonal entries are allowed here; they mark duplicates that
    ``build_point_cloud`` merges afterwards.
    """
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise MetricViolation(f"metric_space: distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise MetricViolation("metric_space: distance matrix has non-finite entries")
    if np.any(np.diag(d) != 0):
        i = int(np.flatnonzero(np.diag(d) != 0)[0])
        raise MetricViolation(f"metric_space: nonzero diagonal entry d({i},{i}) = {d[i, i]}")
    if np.any(d < 0):
        i, j = map(int, np.argwhere(d < 0)[0])
        raise MetricViolation(f"metric_space: negative distance d({i},{j}) = {d[i, j]}")
    asym = np.abs(d - d.T) > TRIANGLE_RTOL * np.maximum(np.abs(d), np.abs(d.T))
    if np.any(asym):
        i, j = map(int, np.argwhere(asym)[0])
        raise MetricViolation(f"metric_space: asymmetric distances d({i},{j}) = {d[i, j]} != d({j},{i}) = {d[j, i]}")
    for b in range(d.shape[0]):
        # d(a,c) <= d(a,b) + d(b,c) for every pair (a, c)
        through_b = d[:, b][:, None] + d[b, :][None, :]
        bad = d > through_b * (1.0 + TRIANGLE_RTOL)
        if np.any(bad):
            a, c = map(int, np.argwhere(bad)[0])
            raise MetricViolation(
                f"metric_space: triangle inequality fails for triple ({a}, {b}, {c}): "
                f"d({a},{c}) = {d[a, c]} > d({a},{b}) + d({b},{c}) = {d[a, b] + d[b, c]}"
            )


def _merge_groups(d: np.ndarray) -> list[list[int]]:
    groups: list[list[int]] = []
    assigned = np.full(d.shape[0], -1)
    for i in range(d.shape[0]):
        if assigned[i] >= 0:
            continue
        same = np.flatnonzero((d[i] == 0) & (assigned < 0))
        assigned[same] = len(groups)
        groups.append([int(j) for j in same])
    return groups


def build_point_cloud(
    points,
    weights: Sequence[float] | None = None,
    metric: str = "euclidean",
) -> PointCloudSpace:
    """Validate input and build a space.

    ``points`` is an (n, d) array of coordinates, or an (n, n) distance
    matrix when ``metric == "matrix"``. Points at distance zero are merged
    into the lowest input row, with their weights summed.
    """
    if metric not in METRICS:
        raise SchemaError(f"metric_space: unknown metric {metric!r}; expected one of {METRICS}")
    arr = np.asarray(points, dtype=float)
    if arr.size == 0 or arr.ndim == 0:
        raise EmptySpace("metric_space: a space needs at least one point")
    if metric == "matrix":
        d = arr
        check_metric_matrix(d)
        coords = None
    else:
        coords = arr.reshape(-1, 1) if arr.ndim == 1 else arr
        if coords.ndim != 2:
            raise SchemaError(f"metric_space: coordinates must be a 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(coords)):
            raise SchemaError("metric_space: coordinates must be finite")
        d = pairwise_distances(coords, metric)
    n = d.shape[0]

    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != n:
            raise SchemaError(f"metric_space: got {w.shape[0]} weights for {n} points")
        if not np.all(np.isfinite(w)):
            raise SchemaError("metric_space: weights must be finite")
        if np.any(w < 0):
            i = int(np.flatnonzero(w < 0)[0])
            raise NegativeWeight(f"metric_space: weight of point {i} is negative ({w[i]})")

    groups = _merge_groups(d)
    if len(groups) < n:
        keep = [g[0] for g in groups]
        d = d[np.ix_(keep, keep)]
        w = np.array([w[g].sum() for g in groups])
        if coords is not None:
            coords = coords[keep]
    return PointCloudSpace(
        dist=np.array(d, dtype=float),
        weights=np.array(w, dtype=float),
        metric=metric,
        coords=None if coords is None else np.array(coords, dtype=float),
        origin=tuple(tuple(g) for g in groups),
    )


def ball(space: PointCloudSpace, center: int, radius: float) -> frozenset[int]:
    """Open ball ``{z : d(center, z) < radius}``."""
    c = space.check_id(center)
    if radius < 0:
        raise ValueError(f"metric_space: radius must be nonnegative, got {radius}")
    return frozenset(int(i) for i in np.flatnonzero(space.dist[c] < radius))


def measure(space: PointCloudSpace, ids: Iterable[int]) -> float:
    """Total weight of a set of points (each id counted once)."""
    idx = sorted({space.check_id(i) for i in ids})
    return float(np.sum(space.weights[idx])) if idx else 0.0


def cover_ball(space: PointCloudSpace, center: int, radius: float) -> list[int]:
    """Greedily cover ``B(center, radius)`` by open balls of radius ``radius/2``.

    The first cover ball sits at ``center``; each further one sits at the
    uncovered member farthest from the chosen centres (lowest id on ties).
    Chosen centres are pairwise at least ``radius/2`` apart.
    """
    c = space.check_id(center)
    members = np.flatnonzero(space.dist[c] < radius)
    if members.size == 0:
        return []
    half = radius / 2.0
    centers = [c]
    gap = space.dist[c, members].copy()
    while True:
        uncovered = gap >= half
        if not uncovered.any():
            return centers
        j = int(np.argmax(np.where(uncovered, gap, -np.inf)))
        nxt = int(members[j])
        centers.append(nxt)
        np.minimum(gap, space.dist[nxt, members], out=gap)


def estimate_doubling(space: PointCloudSpace, trials: int = 64, seed: int = 0) -> DoublingEstimate:
    """Empirical doubling constant: the largest greedy half-radius cover seen.

    Radii are drawn log-uniformly between the smallest positive distance
    and twice the diameter. The result is a lower bound on the true
    constant for the space, not a certificate.
    """
    if trials < 1:
        raise ValueError(f"metric_space: trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    positive = space.dist[space.dist > 0]
    if positive.size == 0:
        lo = hi = 1.0
    else:
        lo, hi = float(positive.min()), 2.0 * space.diameter
    best, worst = 0, (0, hi)
    for _ in range(trials):
        x = int(rng.integers(space.n))
        r = float(np.exp(rng.uniform(np.log(lo), np.log(hi)))) if hi > lo else hi
        count = len(cover_ball(space, x, r))
        if count > best:
            best, worst = count, (x, r)
    return DoublingEstimate(lambda_hat=max(best, 1), trials=trials, worst_ball=worst)
