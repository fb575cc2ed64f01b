"""Regular (uniformly spaced) state grids and interpolation on them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import OutOfDomain

# slack for "inside the box" tests, relative to the axis span
BOX_RTOL = 1e-12
# in-cell coordinates this close to an integer are treated as on the node
NODE_SNAP = 1e-9


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "count", int(self.count))
        if self.count < 2:
            raise ValueError("grid count must be ≥ 2")
        if not self.lo < self.hi:
            raise ValueError(f"axis min {self.lo} must be < max {self.hi}")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    @property
    def span(self) -> float:
        return self.hi - self.lo

    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    def scaled(self, s: float) -> tuple["Axis", bool]:
        """Axis mapped through ``x -> s x``; the flag says whether node order flipped."""
        if s > 0:
            return Axis(self.lo * s, self.hi * s, self.count), False
        return Axis(self.hi * s, self.lo * s, self.count), True


def as_axes(axes) -> tuple[Axis, ...]:
    out = []
    for a in axes:
        out.append(a if isinstance(a, Axis) else Axis(*a))
    return tuple(out)


class Grid:
    """Tensor-product grid; nodes are enumerated row-major (axis 0 outermost)."""

    def __init__(self, axes: Sequence):
        self.axes = as_axes(axes)
        self.shape = tuple(a.count for a in self.axes)
        self.ndim = len(self.axes)
        self.size = int(np.prod(self.shape))
        self._lo = np.array([a.lo for a in self.axes])
        self._hi = np.array([a.hi for a in self.axes])
        self._step = np.array([a.step for a in self.axes])
        self._counts = np.array(self.shape)
        self._strides = np.array(
            [int(np.prod(self.shape[i + 1:])) for i in range(self.ndim)], dtype=np.int64)

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (size, ndim)."""
        mesh = np.meshgrid(*[a.nodes() for a in self.axes], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def inside(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        slack = BOX_RTOL * (self._hi - self._lo)
        return np.all((pts >= self._lo - slack) & (pts <= self._hi + slack), axis=-1)

    def locate(self, points: np.ndarray):
        """Cell base index (flat) and in-cell fractions for clamped points.

        Points outside the box are projected onto it first.
        """
        pts = np.clip(np.atleast_2d(points), self._lo, self._hi)
        t = (pts - self._lo) / self._step
        # snap round-off so node queries return stored values exactly
        r = np.rint(t)
        t = np.where(np.abs(t - r) < NODE_SNAP, r, t)
        base = np.clip(np.floor(t).astype(np.int64), 0, self._counts - 2)
        frac = np.clip(t - base, 0.0, 1.0)
        flat = base @ self._strides
        return flat, frac

    def corner_weights(self, points: np.ndarray):
        """Yield ``(flat_index, weight)`` arrays for the 2**ndim cell corners."""
        flat, frac = self.locate(points)
        for corner in itertools.product((0, 1), repeat=self.ndim):
            c = np.array(corner)
            w = np.prod(np.where(c == 1, frac, 1.0 - frac), axis=-1)
            yield flat + int(c @ self._strides), w

    def nearest_index(self, points: np.ndarray) -> np.ndarray:
        pts = np.clip(np.atleast_2d(points), self._lo, self._hi)
        t = (pts - self._lo) / self._step
        idx = np.clip(np.floor(t + 0.5).astype(np.int64), 0, self._counts - 1)
        return idx @ self._strides

    def interpolate(self, field: np.ndarray, points: np.ndarray, mode: str = "multilinear",
                    oob: str = "clamp") -> np.ndarray:
        """Interpolate a node field of shape (size, k) at ``points`` (N, ndim)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if oob == "error":
            bad = ~self.inside(pts)
            if np.any(bad):
                raise OutOfDomain(f"query {pts[bad][0]} outside grid box "
                                  f"{list(zip(self._lo, self._hi))}")
        elif oob != "clamp":
            raise ValueError(f"unknown out-of-bounds mode {oob!r}")
        if mode == "nearest":
            return field[self.nearest_index(pts)]
        if mode != "multilinear":
            raise ValueError(f"unknown interpolation mode {mode!r}")
        out = np.zeros((pts.shape[0],) + field.shape[1:])
        for idx, w in self.corner_weights(pts):
            out += w.reshape((-1,) + (1,) * (field.ndim - 1)) * field[idx]
        return out
