"""Closed arcs on the unit circle and circle distances.

Angles are in radians.  An arc is stored as ``(lo, hi)`` with ``lo`` in
``[0, 2*pi)`` and ``lo <= hi < lo + 2*pi``; the full circle is the single arc
``(0, 2*pi)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

__all__ = ["ArcSet", "circle_gap", "directed_distance", "hausdorff_points"]


def circle_gap(a, b):
    """Shortest angular distance between ``a`` and ``b`` (broadcasting)."""
    return np.abs(np.mod(np.asarray(a, float) - np.asarray(b, float) + np.pi, TWO_PI) - np.pi)


def directed_distance(query, points) -> np.ndarray:
    """Distance from each angle in ``query`` to the nearest angle in ``points``."""
    q = np.mod(np.atleast_1d(np.asarray(query, float)), TWO_PI)
    p = np.sort(np.mod(np.atleast_1d(np.asarray(points, float)), TWO_PI))
    if p.size == 0:
        return np.full(q.shape, np.inf)
    ext = np.concatenate((p[-1:] - TWO_PI, p, p[:1] + TWO_PI))
    i = np.searchsorted(ext, q)
    return np.minimum(np.abs(q - ext[i - 1]), np.abs(ext[i] - q))


def hausdorff_points(a, b) -> float:
    """Hausdorff distance between two finite sets of angles."""
    a = np.atleast_1d(np.asarray(a, float))
    b = np.atleast_1d(np.asarray(b, float))
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return float("inf")
    return float(max(directed_distance(a, b).max(), directed_distance(b, a).max()))


@dataclass(frozen=True)
class ArcSet:
    """A normalized union of closed arcs plus isolated points.

    Build instances with :meth:`from_intervals`, which wraps, sorts and
    merges.  ``points`` holds isolated angles that do not belong to any arc
    (for example the value of a constant band function).
    """

    arcs: tuple = ()
    points: tuple = ()

    @classmethod
    def from_intervals(cls, intervals, points=(), merge_tol: float = 1e-9) -> "ArcSet":
        """Normalize arbitrary ``(lo, hi)`` pairs (``hi >= lo``, any winding).

        Arcs closer than ``merge_tol`` are merged; an arc of length at least
        ``2*pi - merge_tol`` becomes the full circle.
        """
        raw = []
        for lo, hi in intervals:
            lo, hi = float(lo), float(hi)
            if hi < lo:
                raise ValueError(f"arc with hi < lo: ({lo}, {hi})")
            if hi - lo >= TWO_PI - merge_tol:
                return cls(((0.0, TWO_PI),), ())
            base = float(np.mod(lo, TWO_PI))
            raw.append([base, base + (hi - lo)])
        raw.sort()
        merged = []
        for lo, hi in raw:
            if merged and lo <= merged[-1][1] + merge_tol:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        # arcs that run past 2*pi may swallow the first ones
        while len(merged) > 1 and merged[-1][1] - TWO_PI >= merged[0][0] - merge_tol:
            first = merged.pop(0)
            merged[-1][1] = max(merged[-1][1], first[1] + TWO_PI)
        if merged and merged[-1][1] - merged[-1][0] >= TWO_PI - merge_tol:
            return cls(((0.0, TWO_PI),), ())
        arcs = tuple((lo, hi) for lo, hi in merged)
        pts = np.mod(np.asarray(points, float), TWO_PI)
        tmp = cls(arcs, ())
        keep = sorted({float(p) for p in pts if tmp.distance(p)[0] > merge_tol})
        return cls(arcs, tuple(keep))

    @classmethod
    def full(cls) -> "ArcSet":
        return cls(((0.0, TWO_PI),), ())

    @property
    def full_circle(self) -> bool:
        return len(self.arcs) == 1 and self.arcs[0][1] - self.arcs[0][0] >= TWO_PI

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.arcs))

    def rotated(self, phi: float) -> "ArcSet":
        """The set multiplied by ``exp(i phi)``."""
        return ArcSet.from_intervals([(lo + phi, hi + phi) for lo, hi in self.arcs],
                                     [p + phi for p in self.points])

    def distance(self, angles) -> np.ndarray:
        """Angular distance from each angle to the set (0 inside an arc)."""
        x = np.mod(np.atleast_1d(np.asarray(angles, float)), TWO_PI)
        best = np.full(x.shape, np.inf)
        for lo, hi in self.arcs:
            rel = np.mod(x - lo, TWO_PI)
            inside = rel <= hi - lo
            d = np.minimum(circle_gap(x, lo), circle_gap(x, hi))
            best = np.minimum(best, np.where(inside, 0.0, d))
        if self.points:
            best = np.minimum(best, directed_distance(x, self.points))
        return best

    def contains(self, angles, tol: float = 0.0) -> np.ndarray:
        return self.distance(angles) <= tol

    def sample(self, step: float = 1e-3) -> np.ndarray:
        """Angles covering every arc with spacing at most ``step``, endpoints included."""
        out = [np.asarray(self.points, float)]
        for lo, hi in self.arcs:
            n = max(2, int(np.ceil((hi - lo) / step)) + 1)
            out.append(np.linspace(lo, hi, n))
        return np.mod(np.concatenate(out), TWO_PI) if out else np.empty(0)

    def hausdorff(self, cloud, step: float = 1e-3) -> float:
        """Hausdorff distance to a finite set of angles.

        The set side is sampled with spacing ``step``, so the result is exact
        up to ``step / 2``.
        """
        cloud = np.atleast_1d(np.asarray(cloud, float))
        if cloud.size == 0:
            return 0.0 if not self.arcs and not self.points else float("inf")
        if not self.arcs and not self.points:
            return float("inf")
        return float(max(self.distance(cloud).max(),
                         directed_distance(self.sample(step), cloud).max()))

    def endpoint_distance(self, other: "ArcSet") -> float:
        """Largest endpoint mismatch after pairing each arc with its closest partner.

        Returns ``inf`` when the two sets have different numbers of arcs.
        """
        if len(self.arcs) != len(other.arcs):
            return float("inf")
        if self.full_circle and other.full_circle:
            return 0.0
        worst = 0.0
        for lo, hi in self.arcs:
            best = min(max(circle_gap(lo, a), circle_gap(hi, b)) for a, b in other.arcs)
            worst = max(worst, float(best))
        return worst

    def to_dict(self) -> dict:
        return {"arcs": [{"lo": lo, "hi": hi} for lo, hi in self.arcs],
                "degenerate_points": list(self.points),
                "full_circle": self.full_circle}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, doc) -> "ArcSet":
        return cls.from_intervals([(a["lo"], a["hi"]) for a in doc["arcs"]],
                                  doc.get("degenerate_points", ()))
