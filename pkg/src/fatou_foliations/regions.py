"""Open sets U of C^2 or CP^2 with reproducible samplers.

Samples are produced row by row from one seeded stream, so the first ``n``
points of a request do not depend on how many were requested in total.
Affine regions are sampled inside the ball of radius ``radius``; ``reach``
is how close samples may come to the finite boundary of U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from .foliation import Ambient


class RegionKind(Enum):
    COMPLEMENT_OF_AXES = "ComplementOfAxes"
    COMPLEMENT_OF_ORIGIN = "ComplementOfOrigin"
    COMPLEMENT_OF_COORD_TRIANGLE = "ComplementOfCoordTriangle"
    COMPLEMENT_OF_TWO_LINES = "ComplementOfTwoLines"
    COMPLEMENT_OF_POINT = "ComplementOfPoint"
    HALF_SPACE_Y_NONZERO = "HalfSpaceYNonzero"
    WHOLE = "Whole"
    CUSTOM = "Custom"


# floor standing in for "zero allowed" on coordinates that U does not exclude
FREE_FLOOR = 1e-8


@dataclass(frozen=True)
class RegionSpec:
    ambient: Ambient
    kind: RegionKind
    reach: float = 1e-3
    radius: float = 10.0
    seed: int = 0
    # homogeneous slots that must be nonzero (projective) or coordinates (affine)
    excluded: tuple = ()
    swap: bool = False
    predicate: Callable | None = None
    label: str = ""

    def with_reach(self, reach: float) -> "RegionSpec":
        return replace(self, reach=reach)

    def with_seed(self, seed: int) -> "RegionSpec":
        return replace(self, seed=seed)

    @property
    def description(self) -> str:
        return self.label or self.kind.value

    def contains_xy(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        k = self.kind
        if k is RegionKind.COMPLEMENT_OF_AXES or k is RegionKind.COMPLEMENT_OF_COORD_TRIANGLE:
            return (x != 0) & (y != 0)
        if k is RegionKind.COMPLEMENT_OF_ORIGIN or k is RegionKind.COMPLEMENT_OF_POINT:
            return (x != 0) | (y != 0)
        if k is RegionKind.COMPLEMENT_OF_TWO_LINES:
            # {z1 z2 != 0}, or {z0 z2 != 0} after the exchange of z0 and z1
            return (x != 0) if self.swap else (y != 0)
        if k is RegionKind.HALF_SPACE_Y_NONZERO:
            return y != 0
        if k is RegionKind.WHOLE:
            return np.ones(np.broadcast(x, y).shape, dtype=bool)
        return np.asarray(self.predicate(x, y), dtype=bool)

    def contains_homogeneous(self, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        nz = np.abs(z) > 0
        k = self.kind
        if k is RegionKind.COMPLEMENT_OF_COORD_TRIANGLE:
            return nz.all(axis=1)
        if k is RegionKind.COMPLEMENT_OF_TWO_LINES:
            return (nz[:, 0] if self.swap else nz[:, 1]) & nz[:, 2]
        if k is RegionKind.COMPLEMENT_OF_POINT:
            return nz[:, 0] | nz[:, 1]
        if k is RegionKind.COMPLEMENT_OF_AXES:
            # closures of the two axes in CP^2
            return nz[:, 0] & nz[:, 1]
        if k is RegionKind.WHOLE:
            return np.ones(len(z), dtype=bool)
        inside = nz[:, 2]
        x = np.where(inside, z[:, 0] / np.where(inside, z[:, 2], 1), 0)
        y = np.where(inside, z[:, 1] / np.where(inside, z[:, 2], 1), 0)
        return inside & self.contains_xy(x, y)

    def sample_xy(self, n: int):
        """``n`` reproducible points of U in XY coordinates (rows outside U are dropped)."""
        rng = np.random.default_rng(self.seed)
        u = rng.random((n, 6))
        if self.ambient is Ambient.AFFINE2:
            x, y = self._affine(u)
        else:
            x, y = self._projective(u)
        keep = self.contains_xy(x, y) & np.isfinite(x) & np.isfinite(y)
        return x[keep], y[keep]

    def _affine(self, u):
        lo, hi = math.log(self.reach), math.log(self.radius)
        mx = np.exp(lo + (hi - lo) * u[:, 0])
        my = np.exp(lo + (hi - lo) * u[:, 1])
        k = self.kind
        if k is RegionKind.HALF_SPACE_Y_NONZERO:
            # x is unconstrained; let it come close to zero as well
            mx = np.exp(math.log(FREE_FLOOR) + (hi - math.log(FREE_FLOOR)) * u[:, 0])
        x = mx * np.exp(2j * np.pi * u[:, 2])
        y = my * np.exp(2j * np.pi * u[:, 3])
        r = np.sqrt(mx**2 + my**2)
        # half the rows are pushed radially onto the outer sphere, the rest stay in the ball
        outer = u[:, 4] < 0.5
        s = np.where(outer, self.radius / r, np.minimum(1.0, self.radius / r))
        if k is RegionKind.COMPLEMENT_OF_ORIGIN:
            s = np.where(r * s < self.reach, self.reach / r, s)
        return x * s, y * s

    def _projective(self, u):
        need = {
            RegionKind.COMPLEMENT_OF_COORD_TRIANGLE: (0, 1, 2),
            RegionKind.COMPLEMENT_OF_TWO_LINES: (0, 2) if self.swap else (1, 2),
            RegionKind.COMPLEMENT_OF_POINT: (),
            RegionKind.COMPLEMENT_OF_AXES: (0, 1),
        }.get(self.kind, self.excluded)
        lo = math.log(self.reach)
        flo = math.log(FREE_FLOOR)
        mods = np.empty((len(u), 3))
        for i in range(3):
            a = lo if i in need else flo
            mods[:, i] = np.exp(a * u[:, i])
        if self.kind is RegionKind.COMPLEMENT_OF_POINT:
            # stay at least `reach` away from [0:0:1] in the XY chart
            m = np.maximum(mods[:, 0], mods[:, 1])
            small = m < self.reach * mods[:, 2]
            f = np.where(small, self.reach * mods[:, 2] / np.maximum(m, 1e-300), 1.0)
            mods[:, 0] *= f
            mods[:, 1] *= f
        ph = np.exp(2j * np.pi * u[:, 3:6])
        z = mods * ph
        return z[:, 0] / z[:, 2], z[:, 1] / z[:, 2]


def region(kind: str | RegionKind, ambient: str | Ambient, **kw) -> RegionSpec:
    return RegionSpec(Ambient(ambient), RegionKind(kind), **kw)
