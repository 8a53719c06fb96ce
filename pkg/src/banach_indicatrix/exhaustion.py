"""Increasing sets on which a sampled mapping has bounded oscillation.

On a finite space every mapping is continuous, so the useful notion is
quantitative: at stage ``k`` every kept point ``x`` satisfies

    max { d_Y(f(x), f(z)) : z kept, d_X(x, z) < r_k } <= eps_k.

Stages are pruned from the last one backwards. The last stage starts from
every defined point; each earlier stage starts from the stage after it.
Pruning repeatedly drops the point with the largest excess oscillation
(lowest id on ties). A subset of a set meeting a bound meets it too, so
the result is nested and every stage meets its own bound.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidSchedule, SchemaError
from .indicatrix import SampledMapping
from .metric_space import measure


@dataclass(frozen=True)
class ExhaustionSequence:
    stages: tuple[frozenset[int], ...]
    oscillation_bounds: tuple[tuple[float, float], ...]
    residual: frozenset[int]
    residual_measure: float


def value_distance_matrix(f: SampledMapping) -> np.ndarray:
    """Pairwise codomain distances between mapped points (``inf`` if either is undefined)."""
    n = f.domain.n
    if f.is_discrete:
        vals = list(f.values)
        out = np.array([[0.0 if vals[i] == vals[j] else 1.0 for j in range(n)] for i in range(n)])
    else:
        diff = f.values[:, None, :] - f.values[None, :, :]
        if f.codomain == "euclidean":
            out = np.hypot.reduce(np.abs(diff), axis=-1)
        else:
            out = np.abs(diff).sum(axis=2)
    both = f.defined[:, None] & f.defined[None, :]
    return np.where(both, out, np.inf)


def oscillation(f: SampledMapping, kept: Iterable[int], x: int, radius: float) -> float:
    """Largest ``d_Y(f(x), f(z))`` over kept ``z`` in the open ball ``B(x, radius)``."""
    x = f.domain.check_id(x)
    mask = f.domain.id_mask(kept)
    near = mask & (f.domain.dist[x] < radius)
    if not near.any():
        return 0.0
    return float(value_distance_matrix(f)[x, near].max())


def _validate(schedule) -> list[tuple[float, float]]:
    try:
        pairs = [(float(r), float(eps)) for r, eps in schedule]
    except (TypeError, ValueError) as exc:
        raise InvalidSchedule(f"exhaustion: schedule entries must be (radius, bound) pairs ({exc})") from exc
    if not pairs:
        raise InvalidSchedule("exhaustion: schedule is empty")
    for i, (r, eps) in enumerate(pairs):
        if not (np.isfinite(r) and r > 0):
            raise InvalidSchedule(f"exhaustion: stage {i} radius must be positive and finite, got {r}")
        if not (np.isfinite(eps) and eps >= 0):
            raise InvalidSchedule(f"exhaustion: stage {i} bound must be nonnegative and finite, got {eps}")
    for i, ((r0, e0), (r1, e1)) in enumerate(zip(pairs, pairs[1:])):
        # a later stage that is stricter on both counts would swallow the earlier one
        if r1 >= r0 and e1 <= e0 and (r1, e1) != (r0, e0):
            raise InvalidSchedule(
                f"exhaustion: stage {i + 1} (r={r1}, eps={e1}) is stricter than stage {i} (r={r0}, eps={e0}); "
                "stages must not tighten both radius and bound"
            )
    return pairs


def _prune(dist: np.ndarray, dy: np.ndarray, alive: np.ndarray, radius: float, bound: float) -> np.ndarray:
    alive = alive.copy()
    near = dist < radius
    while alive.any():
        spread = np.where(near & alive[None, :], dy, 0.0).max(axis=1)
        excess = np.where(alive, spread - bound, -np.inf)
        worst = int(np.argmax(excess))
        if excess[worst] <= 0:
            break
        alive[worst] = False
    return alive


def build_exhaustion(f: SampledMapping, schedule: Sequence[tuple[float, float]]) -> ExhaustionSequence:
    """Nested stages ``T_1 ⊆ ... ⊆ T_m`` for a schedule of ``(radius, bound)`` pairs."""
    pairs = _validate(schedule)
    space = f.domain
    dy = value_distance_matrix(f)
    alive = f.defined.copy()
    masks = []
    for r, eps in reversed(pairs):
        alive = _prune(space.dist, dy, alive, r, eps)
        masks.append(alive)
    masks.reverse()
    stages = tuple(frozenset(int(i) for i in np.flatnonzero(m)) for m in masks)
    residual = frozenset(int(i) for i in np.flatnonzero(~masks[-1]))
    return ExhaustionSequence(
        stages=stages,
        oscillation_bounds=tuple(pairs),
        residual=residual,
        residual_measure=measure(space, residual),
    )


def redefine_on_complement(f: SampledMapping, keep: Iterable[int], y0) -> SampledMapping:
    """Copy of ``f`` that equals ``y0`` (and is defined) off ``keep``."""
    keep_mask = f.domain.id_mask(keep)
    off = ~keep_mask
    defined = f.defined | off
    if f.is_discrete:
        values = np.array(f.values, dtype=object)
        for i in np.flatnonzero(off):
            values[i] = tuple(y0) if isinstance(y0, list) else y0
    else:
        target = np.atleast_1d(np.asarray(y0, dtype=float))
        if target.shape != (f.values.shape[1],) or not np.all(np.isfinite(target)):
            raise SchemaError(f"exhaustion: y0 must be a finite point of shape ({f.values.shape[1]},)")
        values = np.array(f.values)
        values[off] = target
    return SampledMapping(f.domain, values, f.codomain, defined)
