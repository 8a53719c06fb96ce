"""Level-crossing counts of piecewise-linear functions and the two integral identities.

For a piecewise-linear ``f`` on ``[a, b]``:

* ``integrate_indicatrix`` integrates the crossing count ``N(y, f)`` over
  ``y`` and should match ``total_variation``;
* ``change_of_variables_check`` compares ``∫_A u(f(x)) |f'(x)| dx`` with
  ``∫ u(y) N(y, f, A) dy`` for a polynomial ``u``.

``N(y, f)`` is constant between consecutive sample levels, so once the
y-cells are split at every sample level both sides agree up to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DegenerateInterval, SchemaError


@dataclass(frozen=True, eq=False)
class Sampled1DFunction:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float).reshape(-1)
        ys = np.asarray(self.ys, dtype=float).reshape(-1)
        if xs.shape != ys.shape:
            raise SchemaError(f"variation: {xs.size} x-samples but {ys.size} y-samples")
        if xs.size < 2:
            raise SchemaError("variation: need at least two samples")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise SchemaError("variation: samples must be finite")
        if np.any(np.diff(xs) <= 0):
            raise SchemaError("variation: x-samples must be strictly increasing")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_callable(cls, fn, a: float, b: float, samples: int) -> "Sampled1DFunction":
        xs = np.linspace(a, b, samples)
        return cls(xs, fn(xs))

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)

    def restrict(self, s: float, t: float) -> "Sampled1DFunction":
        """The interpolant restricted to ``[s, t]`` (a sub-interval of the domain)."""
        inner = self.xs[(self.xs > s) & (self.xs < t)]
        xs = np.concatenate(([s], inner, [t]))
        return Sampled1DFunction(xs, self(xs))


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    abs_diff: float
    rel_diff: float
    resolution: int
    tolerance_used: float

    @property
    def passed(self) -> bool:
        return self.abs_diff <= self.tolerance_used


def _report(lhs: float, rhs: float, resolution: int, tolerance: float) -> IdentityReport:
    diff = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs))
    return IdentityReport(lhs, rhs, diff, diff / scale if scale > 0 else 0.0, resolution, tolerance)


def total_variation(f: Sampled1DFunction) -> float:
    return math.fsum(np.abs(np.diff(f.ys)))


def crossing_count(f: Sampled1DFunction, y: float) -> int:
    """Number of connected pieces of ``{x : f(x) = y}``.

    A strict crossing inside a segment is one piece; a run of consecutive
    samples equal to ``y`` (a single sample, or a flat stretch) is one piece.
    """
    d = f.ys - y
    interior = int(np.count_nonzero(d[:-1] * d[1:] < 0))
    at = d == 0
    # each run of consecutive hits starts where at[i] and not at[i-1]
    runs = int(at[0]) + int(np.count_nonzero(at[1:] & ~at[:-1]))
    return interior + runs


def crossing_counts(f: Sampled1DFunction, levels) -> np.ndarray:
    """``crossing_count`` over an array of levels, vectorised."""
    levels = np.asarray(levels, dtype=float)
    a, b = f.ys[:-1], f.ys[1:]
    lo, hi = np.sort(np.minimum(a, b)), np.sort(np.maximum(a, b))
    flat = np.sort(a[a == b])
    # segments with lo < y < hi: #(lo < y) - #(hi <= y) + #(lo == hi == y)
    out = (
        np.searchsorted(lo, levels, side="left")
        - np.searchsorted(hi, levels, side="right")
        + (np.searchsorted(flat, levels, side="right") - np.searchsorted(flat, levels, side="left"))
    )
    on_sample = np.isin(levels, f.ys)
    for i in np.flatnonzero(on_sample):
        out[i] = crossing_count(f, float(levels[i]))
    return out.astype(np.int64)


def _level_cells(lo: float, hi: float, y_resolution: int, breaks, align: bool):
    edges = np.linspace(lo, hi, y_resolution + 1)
    if align:
        edges = np.unique(np.concatenate((edges, np.asarray(breaks, dtype=float))))
        edges = edges[(edges >= lo) & (edges <= hi)]
    mids = 0.5 * (edges[:-1] + edges[1:])
    if not align:
        sample_levels = np.unique(np.asarray(breaks, dtype=float))
        hit = np.isin(mids, sample_levels)
        while hit.any():
            mids[hit] = np.nextafter(mids[hit], np.inf)
            hit = np.isin(mids, sample_levels)
    return edges, mids


def integrate_indicatrix(f: Sampled1DFunction, y_resolution: int, align: bool = True) -> float:
    """Midpoint-rule integral of ``crossing_count`` over ``[min f, max f]``.

    With ``align=True`` the uniform cells are also split at every sample
    level, which makes the rule exact for piecewise-linear ``f``. With
    ``align=False`` the cells stay uniform and a midpoint landing on a
    sample level is nudged up to the next float.
    """
    if y_resolution < 1:
        raise ValueError(f"variation: y_resolution must be >= 1, got {y_resolution}")
    lo, hi = float(f.ys.min()), float(f.ys.max())
    if hi == lo:
        return 0.0
    edges, mids = _level_cells(lo, hi, y_resolution, f.ys, align)
    return math.fsum(crossing_counts(f, mids) * np.diff(edges))


def banach_check(f: Sampled1DFunction, y_resolution: int, tolerance: float = 1e-6, align: bool = True) -> IdentityReport:
    """Compare ``∫ N(y, f) dy`` (lhs) with ``TV(f)`` (rhs)."""
    return _report(integrate_indicatrix(f, y_resolution, align), total_variation(f), y_resolution, tolerance)


def normalize_intervals(f: Sampled1DFunction, A: Sequence[tuple[float, float]] | None) -> list[tuple[float, float]]:
    """Clip intervals to the domain, drop empty ones, merge overlaps; sorted."""
    a, b = f.interval
    if A is None:
        return [(a, b)]
    clipped = sorted((max(float(s), a), min(float(t), b)) for s, t in A)
    merged: list[list[float]] = []
    for s, t in clipped:
        if t <= s:
            continue
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], t)
        else:
            merged.append([s, t])
    if not merged:
        raise DegenerateInterval(f"variation: subset {list(A)} has zero length inside [{a}, {b}]")
    return [(s, t) for s, t in merged]


def _segment_integral(g: Sampled1DFunction, U: Polynomial) -> float:
    # on a linear segment, ∫ u(f) |f'| dx = sign(f') * (U(f(end)) - U(f(start)))
    gain = U(g.ys)
    return math.fsum(np.sign(np.diff(g.ys)) * np.diff(gain))


def change_of_variables_check(
    f: Sampled1DFunction,
    u: Sequence[float] = (1.0,),
    A: Sequence[tuple[float, float]] | None = None,
    y_resolution: int = 10_000,
    tolerance: float = 1e-6,
) -> IdentityReport:
    """Compare ``∫_A u(f)|f'| dx`` (lhs) with ``∫ u(y) N(y, f, A) dy`` (rhs).

    ``u`` holds polynomial coefficients, lowest degree first. The y-cells
    are split at every sample level of ``f`` on ``A``; ``N`` is read at the
    cell midpoints and ``u`` is integrated exactly on each cell.
    """
    coeffs = np.asarray(u, dtype=float)
    if coeffs.size == 0 or not np.all(np.isfinite(coeffs)):
        raise SchemaError("variation: u needs at least one finite coefficient")
    U = Polynomial(coeffs).integ()
    pieces = [f.restrict(s, t) for s, t in normalize_intervals(f, A)]
    lhs = math.fsum(_segment_integral(g, U) for g in pieces)

    levels = np.concatenate([g.ys for g in pieces])
    lo, hi = float(levels.min()), float(levels.max())
    if hi == lo:
        return _report(lhs, 0.0, y_resolution, tolerance)
    edges, mids = _level_cells(lo, hi, y_resolution, levels, align=True)
    counts = sum(crossing_counts(g, mids) for g in pieces)
    rhs = math.fsum(counts * np.diff(U(edges)))
    return _report(lhs, rhs, y_resolution, tolerance)


def random_piecewise_linear(seed: int, segments: int) -> Sampled1DFunction:
    """Random piecewise-linear function on [0, 1] with normal sample values."""
    rng = np.random.default_rng(seed)
    xs = np.concatenate(([0.0], np.sort(rng.uniform(0.0, 1.0, segments - 1)), [1.0]))
    return Sampled1DFunction(xs, rng.normal(size=segments + 1))


BUILTINS = {
    "id": lambda: Sampled1DFunction.from_callable(lambda x: x, 0.0, 1.0, 1001),
    "double": lambda: Sampled1DFunction.from_callable(lambda x: 2.0 * x, 0.0, 1.0, 1001),
    "abs": lambda: Sampled1DFunction.from_callable(np.abs, -1.0, 1.0, 1001),
    "quad": lambda: Sampled1DFunction.from_callable(np.square, -1.0, 1.0, 10_000),
    "sin": lambda: Sampled1DFunction.from_callable(np.sin, 0.0, 2.0 * np.pi, 10_000),
    "sin-quarter": lambda: Sampled1DFunction.from_callable(np.sin, 0.0, np.pi / 2.0, 10_000),
}


def builtin_function(spec: str) -> Sampled1DFunction:
    """Resolve ``id | double | abs | quad | sin | sin-quarter | randpl:SEED:SEGMENTS``."""
    if spec.startswith("randpl:"):
        try:
            _, seed, segments = spec.split(":")
            seed_i, seg_i = int(seed), int(segments)
        except ValueError as exc:
            raise SchemaError(f"variation: expected randpl:SEED:SEGMENTS, got {spec!r}") from exc
        if seg_i < 1:
            raise SchemaError(f"variation: randpl needs at least one segment, got {seg_i}")
        return random_piecewise_linear(seed_i, seg_i)
    if spec not in BUILTINS:
        raise SchemaError(f"variation: unknown builtin {spec!r}; expected one of {sorted(BUILTINS)} or randpl:SEED:SEGMENTS")
    return BUILTINS[spec]()
