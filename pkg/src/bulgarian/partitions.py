"""Partitions, weak compositions and their diagram-boundary step functions.

Integer data (parts, unit breakpoints) stays in exact integer form until
:func:`rescale` is applied; rescaled functions hold float64 arrays.
Distances to reference shapes are computed exactly segment by segment,
without any discretisation of the x axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "Partition",
    "WeakComposition",
    "StepFunction",
    "Reference",
    "exponential",
    "zero_reference",
    "step_reference",
    "boundary",
    "rescale",
    "sort_composition",
    "sup_distance",
    "restricted_distance",
]


def _as_int_tuple(parts: Iterable) -> tuple[int, ...]:
    out = []
    for v in parts:
        iv = int(v)
        if iv != v:
            raise ValueError(f"non-integer part {v!r}")
        out.append(iv)
    return tuple(out)


@dataclass(frozen=True)
class Partition:
    """A partition of ``n``: weakly decreasing positive parts.

    The empty tuple is the unique partition of 0. ``part(i)`` is 1-indexed
    and returns 0 past the last part.
    """

    parts: tuple[int, ...]
    n: int = field(init=False)

    def __post_init__(self):
        parts = _as_int_tuple(self.parts)
        for i, v in enumerate(parts):
            if v < 1:
                raise ValueError(f"partition parts must be positive, got {parts}")
            if i and parts[i - 1] < v:
                raise ValueError(f"partition parts must be weakly decreasing, got {parts}")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "n", sum(parts))

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def part(self, i: int) -> int:
        if i < 1:
            raise IndexError("parts are 1-indexed")
        return self.parts[i - 1] if i <= len(self.parts) else 0

    @property
    def length(self) -> int:
        return len(self.parts)

    def __str__(self) -> str:
        return "+".join(map(str, self.parts)) if self.parts else "0"


@dataclass(frozen=True)
class WeakComposition:
    """Pile sizes in creation order; index 1 is the most recent bowl.

    Zeros are allowed anywhere and are kept as stored. Indexing past the
    stored length yields 0.
    """

    parts: tuple[int, ...]
    n: int = field(init=False)

    def __post_init__(self):
        parts = _as_int_tuple(self.parts)
        if any(v < 0 for v in parts):
            raise ValueError(f"composition parts must be nonnegative, got {parts}")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "n", sum(parts))

    @classmethod
    def from_partition(cls, lam: Partition) -> "WeakComposition":
        return cls(lam.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def part(self, k: int) -> int:
        if k < 1:
            raise IndexError("bowls are 1-indexed")
        return self.parts[k - 1] if k <= len(self.parts) else 0

    def trimmed(self) -> tuple[int, ...]:
        """Parts with trailing zeros removed."""
        parts = self.parts
        end = len(parts)
        while end and parts[end - 1] == 0:
            end -= 1
        return parts[:end]


def sort_composition(alpha: Union[WeakComposition, Sequence[int]]) -> Partition:
    """Sort the parts descending and drop zeros."""
    parts = alpha.parts if isinstance(alpha, WeakComposition) else alpha
    return Partition(sorted((int(v) for v in parts if v), reverse=True))


class StepFunction:
    """Right-continuous piecewise-constant function on ``[0, inf)``.

    Segment ``i`` is ``[breakpoints[i], breakpoints[i+1])`` (the last one ends
    at ``end``) and carries ``values[i]``. The function is 0 from ``end`` on.
    Instances are immutable; the arrays are flagged read-only.
    """

    __slots__ = ("breakpoints", "values", "end")

    def __init__(self, breakpoints, values, end):
        bp = np.array(breakpoints)
        vals = np.array(values)
        if bp.ndim != 1 or bp.shape != vals.shape:
            raise ValueError("breakpoints and values must be 1-d of equal length")
        if bp.size:
            if bp[0] != 0:
                raise ValueError("first breakpoint must be 0")
            if np.any(np.diff(bp) <= 0) or not end > bp[-1]:
                raise ValueError("breakpoints must be strictly increasing and end beyond the last")
            if np.any(vals < 0):
                raise ValueError("step values must be nonnegative")
        elif end != 0:
            raise ValueError("an empty step function has end 0")
        bp.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "end", end)

    def __setattr__(self, name, value):
        raise AttributeError("StepFunction is immutable")

    def __repr__(self) -> str:
        return f"StepFunction(segments={self.breakpoints.size}, end={self.end!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (
            self.end == other.end
            and np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @property
    def segment_ends(self) -> np.ndarray:
        return np.append(self.breakpoints[1:], self.end) if self.breakpoints.size else self.breakpoints

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not self.breakpoints.size:
            return np.zeros_like(x)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (idx >= 0) & (x < self.end)
        out = np.where(inside, self.values[np.clip(idx, 0, None)], 0)
        return out.astype(float)

    def area(self) -> float:
        if not self.breakpoints.size:
            return 0.0
        widths = np.diff(np.append(self.breakpoints, self.end).astype(float))
        return math.fsum(widths * self.values.astype(float))

    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))

    @property
    def peak(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0


def boundary(source: Union[Partition, WeakComposition]) -> StepFunction:
    """Diagram-boundary function ``x -> parts[floor(x)+1]`` with unit segments.

    Trailing zeros of a composition are dropped from the representation.
    """
    if isinstance(source, Partition):
        parts = source.parts
    elif isinstance(source, WeakComposition):
        parts = source.trimmed()
    else:
        raise TypeError(f"expected Partition or WeakComposition, got {type(source).__name__}")
    length = len(parts)
    return StepFunction(np.arange(length, dtype=np.int64), np.array(parts, dtype=np.int64), length)


def rescale(f: StepFunction, a: float, n: int) -> StepFunction:
    """The ``a``-rescaled boundary ``x -> (a/n) f(a x)``.

    Widths shrink by ``1/a`` and heights grow by ``a/n``, so the boundary of a
    size-``n`` object ends up with unit area.
    """
    if not a > 0:
        raise ValueError(f"scaling factor must be positive, got {a}")
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    a = float(a)
    bp = f.breakpoints.astype(float) / a
    vals = f.values.astype(float) * (a / n)
    return StepFunction(bp, vals, float(f.end) / a if f.breakpoints.size else 0)


@dataclass(frozen=True)
class Reference:
    """A reference shape compared against step functions.

    ``func`` must accept a float array. Continuous references are required to
    be weakly decreasing (``decreasing=True``); the exact distance algorithm
    relies on it. Step references carry the step function itself and are
    compared by merging breakpoints, which needs no monotonicity.
    """

    func: Callable[[np.ndarray], np.ndarray]
    decreasing: bool = True
    name: str = "custom"
    step: Optional[StepFunction] = None

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)


def exponential(rate: float = 1.0, height: float = 1.0) -> Reference:
    """``x -> height * exp(-rate x)``; the default is the limit shape ``e^{-x}``."""
    if rate < 0 or height < 0:
        raise ValueError("rate and height must be nonnegative")
    if rate == 1.0 and height == 1.0:
        return Reference(lambda x: np.exp(-x), name="exp(-x)")
    return Reference(lambda x: height * np.exp(-rate * x), name=f"{height}*exp(-{rate}x)")


def zero_reference() -> Reference:
    return Reference(lambda x: np.zeros_like(x), name="zero")


def step_reference(f: StepFunction) -> Reference:
    return Reference(f, decreasing=f.is_decreasing(), name="step", step=f)


def _step_step_points(f: StepFunction, g: StepFunction) -> np.ndarray:
    pts = [f.breakpoints.astype(float), g.breakpoints.astype(float), [float(f.end), float(g.end)]]
    return np.unique(np.concatenate(pts))


def sup_distance(f: StepFunction, g: Reference) -> float:
    """Exact ``sup_{x >= 0} |f(x) - g(x)|``.

    For a continuous decreasing ``g`` the supremum over a segment ``[l, r)``
    with value ``c`` is ``max(|c - g(l)|, |c - g(r)|)`` and the tail past the
    support contributes ``g(end)``.
    """
    if g.step is not None:
        pts = _step_step_points(f, g.step)
        return float(np.max(np.abs(f(pts) - g.step(pts))))
    if not g.decreasing:
        raise ValueError(f"reference {g.name!r} is not flagged weakly decreasing")
    tail = abs(float(g(float(f.end))))
    if not f.breakpoints.size:
        return tail
    vals = f.values.astype(float)
    left = np.abs(vals - g(f.breakpoints.astype(float)))
    right = np.abs(vals - g(f.segment_ends.astype(float)))
    return float(max(left.max(), right.max(), tail))


def restricted_distance(
    f: StepFunction,
    g: Reference,
    interval: Optional[tuple[float, float]] = None,
    *,
    point: Optional[float] = None,
) -> float:
    """Sup of ``|f - g|`` over a closed interval, or the gap at one point.

    ``interval=(a, math.inf)`` with ``a = 0`` reproduces :func:`sup_distance`.
    """
    if point is not None:
        if interval is not None:
            raise ValueError("give either an interval or a point, not both")
        if point < 0:
            raise ValueError("point must be nonnegative")
        return float(abs(f(point) - g(point)))
    if interval is None:
        return sup_distance(f, g)
    lo, hi = float(interval[0]), float(interval[1])
    if lo < 0:
        raise ValueError("interval must lie in [0, inf)")
    if hi < lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")

    if g.step is not None:
        pts = _step_step_points(f, g.step)
        pts = np.concatenate([[lo], pts[(pts > lo) & (pts <= hi)]])
        return float(np.max(np.abs(f(pts) - g.step(pts))))
    if not g.decreasing:
        raise ValueError(f"reference {g.name!r} is not flagged weakly decreasing")

    best = 0.0
    end = float(f.end)
    if f.breakpoints.size:
        left = f.breakpoints.astype(float)
        right = f.segment_ends.astype(float)
        hit = (left <= hi) & (right > lo)
        if hit.any():
            vals = f.values.astype(float)[hit]
            cl = np.maximum(left[hit], lo)
            cr = np.minimum(right[hit], hi)
            best = float(max(np.abs(vals - g(cl)).max(), np.abs(vals - g(cr)).max()))
    if hi >= end:
        best = max(best, abs(float(g(max(end, lo)))))
    return best
