"""Multiplicity counts of a sampled mapping: brute force and the dyadic scheme.

``exact_multiplicity`` counts preimages directly. The dyadic scheme asks,
for each cube of generation ``k``, whether the mapping hits ``y`` somewhere
in the cube (``level_indicator``) and sums those indicators over the
generation (``count_level``). The sums never decrease with ``k`` and reach
the exact count once matching preimages sit in distinct cubes.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .dyadic_system import DyadicSystem
from .errors import IndexOutOfRange, MonotonicityViolation, SchemaError
from .metric_space import PointCloudSpace

CODOMAINS = ("euclidean", "manhattan", "discrete")


@dataclass(frozen=True, eq=False)
class SampledMapping:
    """A mapping given by its value at every domain point.

    Numeric codomains store ``values`` as an (n, m) float array with NaN
    rows where the mapping is undefined; the discrete codomain stores a
    1-D object array of hashable labels with ``None`` where undefined.
    """

    domain: PointCloudSpace
    values: np.ndarray
    codomain: str
    defined: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)
        self.defined.setflags(write=False)

    @property
    def is_discrete(self) -> bool:
        return self.codomain == "discrete"

    def value(self, i: int):
        i = self.domain.check_id(i)
        if not self.defined[i]:
            return None
        return self.values[i] if self.is_discrete else tuple(float(v) for v in self.values[i])

    def attained(self) -> list:
        """Distinct values taken on defined points, sorted."""
        if self.is_discrete:
            return sorted(set(self.values[self.defined]), key=_label_key)
        rows = {tuple(float(v) for v in row) for row in self.values[self.defined]}
        return sorted(rows)


def _label_key(v):
    return (type(v).__name__, v)


def sampled_mapping(
    domain: PointCloudSpace,
    values: Sequence[Any],
    defined: Sequence[bool] | None = None,
    codomain: str | None = None,
) -> SampledMapping:
    """Build a mapping, inferring the codomain from the values if not given.

    Numbers or numeric vectors default to the euclidean codomain; anything
    else is treated as discrete labels.
    """
    n = domain.n
    if len(values) != n:
        raise SchemaError(f"indicatrix: got {len(values)} values for {n} domain points")
    if defined is None:
        mask = np.array([v is not None for v in values], dtype=bool)
    else:
        mask = np.asarray(defined, dtype=bool).reshape(-1)
        if mask.shape[0] != n:
            raise SchemaError(f"indicatrix: got {mask.shape[0]} defined flags for {n} domain points")
    if codomain is None:
        sample = [v for v, m in zip(values, mask) if m]
        codomain = "euclidean" if all(_is_numeric(v) for v in sample) else "discrete"
    if codomain not in CODOMAINS:
        raise SchemaError(f"indicatrix: unknown codomain {codomain!r}; expected one of {CODOMAINS}")

    if codomain == "discrete":
        arr = np.empty(n, dtype=object)
        for i, (v, m) in enumerate(zip(values, mask)):
            if m and v is None:
                raise SchemaError(f"indicatrix: point {i} is marked defined but has no value")
            arr[i] = (tuple(v) if isinstance(v, list) else v) if m else None
        return SampledMapping(domain, arr, codomain, mask)

    rows = [np.atleast_1d(np.asarray(v, dtype=float)) for v, m in zip(values, mask) if m]
    dim = rows[0].shape[0] if rows else 1
    arr = np.full((n, dim), np.nan)
    for i, (v, m) in enumerate(zip(values, mask)):
        if not m:
            continue
        if v is None:
            raise SchemaError(f"indicatrix: point {i} is marked defined but has no value")
        row = np.atleast_1d(np.asarray(v, dtype=float))
        if row.shape != (dim,):
            raise SchemaError(f"indicatrix: value of point {i} has shape {row.shape}, expected ({dim},)")
        if not np.all(np.isfinite(row)):
            raise SchemaError(f"indicatrix: value of point {i} is not finite")
        arr[i] = row
    return SampledMapping(domain, arr, codomain, mask)


def _is_numeric(v) -> bool:
    if isinstance(v, (bool, np.bool_, str)):
        return False
    try:
        np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        return False
    return True


@dataclass(frozen=True)
class MatchRule:
    """``f(x)`` matches ``y`` when ``d_Y(f(x), y) <= tolerance``."""

    tolerance: float = 0.0

    def __post_init__(self):
        if not self.tolerance >= 0:
            raise ValueError(f"indicatrix: tolerance must be >= 0, got {self.tolerance}")


EXACT = MatchRule(0.0)


@dataclass(frozen=True)
class MultiplicityProfile:
    y_grid: tuple
    levels: dict[int, tuple[int, ...]]
    limit: tuple[int, ...]
    exact: tuple[int, ...]
    # grid indices where some finest cube holds two or more matching preimages
    unresolved: tuple[int, ...]


def codomain_distances(f: SampledMapping, y) -> np.ndarray:
    """``d_Y(f(x), y)`` for every domain point (``inf`` where undefined)."""
    if f.is_discrete:
        key = tuple(y) if isinstance(y, list) else y
        out = np.array([0.0 if m and v == key else 1.0 for v, m in zip(f.values, f.defined)])
    else:
        target = np.atleast_1d(np.asarray(y, dtype=float))
        if target.shape != (f.values.shape[1],):
            raise SchemaError(f"indicatrix: query point has shape {target.shape}, expected ({f.values.shape[1]},)")
        diff = f.values - target
        if f.codomain == "euclidean":
            out = np.hypot.reduce(np.abs(diff), axis=-1)
        else:
            out = np.abs(diff).sum(axis=1)
    return np.where(f.defined, out, np.inf)


def match_mask(f: SampledMapping, y, rule: MatchRule = EXACT) -> np.ndarray:
    return codomain_distances(f, y) <= rule.tolerance


def _subset_mask(f: SampledMapping, A: Iterable[int] | None) -> np.ndarray:
    return f.domain.id_mask(A)


def exact_multiplicity(f: SampledMapping, A: Iterable[int] | None, y, rule: MatchRule = EXACT) -> int:
    """``#{x in A : f(x) matches y}``; ``A=None`` means the whole domain."""
    return int(np.count_nonzero(match_mask(f, y, rule) & _subset_mask(f, A)))


def _check_domain(f: SampledMapping, system: DyadicSystem) -> None:
    if system.space is not f.domain and system.space.n != f.domain.n:
        raise SchemaError("indicatrix: mapping and cube system live on different spaces")


def level_indicator(
    f: SampledMapping, system: DyadicSystem, k: int, alpha: int, A: Iterable[int] | None, y, rule: MatchRule = EXACT
) -> int:
    """1 if ``f`` matches ``y`` somewhere in cube ``(k, alpha)`` intersected with ``A``."""
    _check_domain(f, system)
    cube = system.cube(k, alpha)
    hits = match_mask(f, y, rule) & _subset_mask(f, A)
    return int(bool(hits[list(cube.members)].any()))


def _count_from_hits(system: DyadicSystem, k: int, hits: np.ndarray) -> int:
    return int(np.unique(system.labels[k][hits]).size)


def count_level(f: SampledMapping, system: DyadicSystem, k: int, A: Iterable[int] | None, y, rule: MatchRule = EXACT) -> int:
    """Number of generation-k cubes on which ``f`` attains ``y`` within ``A``."""
    _check_domain(f, system)
    system.generation(k)
    hits = match_mask(f, y, rule) & _subset_mask(f, A)
    return _count_from_hits(system, k, hits)


def _profile_column(f, system, a_mask, y, rule):
    hits = match_mask(f, y, rule) & a_mask
    counts = [_count_from_hits(system, k, hits) for k in system.params.generations]
    return counts, int(np.count_nonzero(hits))


def multiplicity_profile(
    f: SampledMapping,
    system: DyadicSystem,
    A: Iterable[int] | None,
    y_grid: Sequence,
    rule: MatchRule = EXACT,
    threads: int = 1,
) -> MultiplicityProfile:
    """Tabulate ``N_k(y)`` for every generation and grid point.

    Raises ``MonotonicityViolation`` if some count drops from one generation
    to the next or exceeds the exact count.
    """
    _check_domain(f, system)
    a_mask = _subset_mask(f, A)
    grid = list(y_grid)

    def column(y):
        return _profile_column(f, system, a_mask, y, rule)

    if threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            columns = list(pool.map(column, grid))
    else:
        columns = [column(y) for y in grid]

    gens = list(system.params.generations)
    levels = {k: tuple(col[0][j] for col in columns) for j, k in enumerate(gens)}
    exact = tuple(col[1] for col in columns)
    for i, (counts, n_exact) in enumerate(columns):
        for j in range(len(counts) - 1):
            if counts[j] > counts[j + 1]:
                raise MonotonicityViolation(
                    f"indicatrix: N_{gens[j]}(y) = {counts[j]} > N_{gens[j + 1]}(y) = {counts[j + 1]} at grid index {i}"
                )
        if counts[-1] > n_exact:
            raise MonotonicityViolation(f"indicatrix: level count {counts[-1]} exceeds exact count {n_exact} at grid index {i}")
    limit = levels[system.params.k_max]
    unresolved = tuple(i for i, (lim, ex) in enumerate(zip(limit, exact)) if lim != ex)
    return MultiplicityProfile(tuple(grid), levels, limit, exact, unresolved)


def limit_multiplicity(profile: MultiplicityProfile, y_index: int) -> int:
    if not 0 <= y_index < len(profile.limit):
        raise IndexOutOfRange(f"indicatrix: y index {y_index} out of range (grid has {len(profile.limit)} points)")
    return profile.limit[y_index]


def auto_y_grid(f: SampledMapping, per_axis: int = 16) -> list:
    """Attained values followed by a uniform grid over their bounding box.

    The uniform part is only added for 1-D and 2-D numeric codomains.
    """
    grid = f.attained()
    if f.is_discrete or not grid:
        return grid
    pts = np.array(grid)
    dim = pts.shape[1]
    if dim > 2:
        return grid
    axes = [np.linspace(pts[:, j].min(), pts[:, j].max(), per_axis) for j in range(dim)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    seen = set(grid)
    extra = [tuple(float(v) for v in row) for row in mesh]
    return grid + [p for p in dict.fromkeys(extra) if p not in seen]
