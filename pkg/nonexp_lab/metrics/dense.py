"""
Deterministic dense sequences ``z_1, z_2, ...`` for the pointwise metric.

Flat models enumerate an interleaved dyadic grid: level ``k`` covers the
box ``[-2^ceil(k/2), 2^ceil(k/2)]^dim`` with spacing ``2^-floor(k/2)``, so
boxes and resolutions grow alternately.  Within a level points are sorted
by norm (then lexicographically) and points already produced are skipped.
On the half-space the last coordinate runs over the nonnegative half of
the grid.  Hyperboloid2 uses a spiral: level ``k`` places points at radii
``j * 2^-floor(k/2)`` up to ``2^ceil(k/2)``, with angular spacing
matching the radial one.

The enumeration is part of the reproducibility contract: values of the
pointwise metric depend on it, so any change bumps ``ENUMERATION_VERSION``.
"""

import itertools
import math
import threading

import numpy as np

from ..geometry.spaces import HalfSpace, Hyperboloid2, minkowski
from ..utility import error as E

ENUMERATION_VERSION = 1
# size caps of one enumeration level and of one spiral ring
_MAX_LEVEL_POINTS = 1 << 20
_MAX_RING_POINTS = 8192


class DenseSequence:
    """A lazily extended dense sequence of points of *model*.

    ``seq[i]`` is ``z_{i+1}``.  The sequence is thread safe and
    reproducible: the same model always yields the same points.
    """

    def __init__(self, model, origin=None):
        self.model = model
        self.origin = model.origin() if origin is None else model.validate(origin)
        self.version = ENUMERATION_VERSION
        self._points = []
        self._seen = set()
        self._level = 0
        self._lock = threading.Lock()

    def __repr__(self):
        return f"DenseSequence({self.model!r}, version={self.version})"

    # -- enumeration ------------------------------------------------------

    def _level_points(self, k):
        side = 2 ** math.ceil(k / 2)
        step = math.ldexp(1.0, -(k // 2))
        if isinstance(self.model, Hyperboloid2):
            return self._spiral(side, step)
        ticks = np.arange(-side, side + step / 2, step)
        last = ticks[ticks >= 0] if isinstance(self.model, HalfSpace) else ticks
        d = self.model.dim
        count = len(ticks) ** (d - 1) * len(last)
        if count > _MAX_LEVEL_POINTS:
            raise E.WitnessError("No dense-sequence point close enough within the search limit.",
                                 code="4001", context={"level": k})
        axes = [ticks] * (d - 1) + [last]
        grid = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, d)
        grid = grid + self.origin
        norms = self.model.dist_many(self.origin, grid)
        order = np.lexsort(tuple(grid[:, i] for i in reversed(range(d))) + (norms,))
        return grid[order]

    def _spiral(self, radius, step):
        rings = [self.origin[None, :]]
        t1, t2 = self.model.frame(self.origin)
        total = 1
        for j in range(1, int(round(radius / step)) + 1):
            rho = j * step
            count = max(4, int(math.ceil(2.0 * math.pi * math.sinh(rho) / step)))
            count = min(count, _MAX_RING_POINTS)
            a = 2.0 * math.pi * np.arange(count) / count
            u = np.cos(a)[:, None] * t1 + np.sin(a)[:, None] * t2
            ring = math.cosh(rho) * self.origin + math.sinh(rho) * u
            ring /= np.sqrt(-minkowski(ring, ring))[:, None]
            rings.append(ring)
            total += count
            if total > _MAX_LEVEL_POINTS:
                break
        return np.concatenate(rings)

    def _extend(self, n):
        while len(self._points) < n:
            for p in self._level_points(self._level):
                key = tuple(np.round(p, 12))
                if key not in self._seen:
                    self._seen.add(key)
                    self._points.append(p)
            self._level += 1

    def prefix(self, n):
        """The first *n* points as an array of rows."""
        with self._lock:
            self._extend(n)
            return np.array(self._points[:n])

    def __getitem__(self, i):
        with self._lock:
            self._extend(i + 1)
            return self._points[i].copy()

    def find_near(self, x, r, limit):
        """Index (0-based) of the first ``z_n`` with ``d(z_n, x) < r``, scanning *limit* points.

        Raises:
            E.WitnessError: no such point within *limit* (code ``4001``).
        """
        checked = 0
        chunk = 1024
        while checked < limit:
            upto = min(limit, checked + chunk)
            pts = self.prefix(upto)[checked:]
            d = self.model.dist_many(x, pts)
            hits = np.nonzero(d < r)[0]
            if hits.size:
                return checked + int(hits[0])
            checked = upto
            chunk *= 2
        raise E.WitnessError("No dense-sequence point close enough within the search limit.",
                             code="4001", context={"r": r, "limit": limit})
