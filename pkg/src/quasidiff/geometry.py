"""Small geometric helpers shared by the point-set and metric layers.

Conventions used everywhere in this package:

* points are float64 arrays of shape (n, d), held in strictly increasing
  lexicographic order (first coordinate is the primary key);
* balls are closed and centred at the origin unless stated otherwise, and
  membership tests compare squared norms so integer-valued coordinates are
  classified exactly;
* nearest-neighbour queries return exact Euclidean distances.  The 1-d path
  is a vectorised binary search over the sorted coordinate array; higher
  dimensions go through scipy's cKDTree.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgumentError

__all__ = [
    "as_points",
    "lex_sort",
    "lex_sorted_strictly",
    "sq_norms",
    "window_mask",
    "min_pairwise_gap",
    "nearest_distances",
    "ball_volume",
]


def as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce input to a float64 (n, d) array without copying when possible."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise InvalidArgumentError(f"points must be 2-dimensional, got shape {pts.shape}")
    if dim is not None and pts.shape[1] != dim:
        raise InvalidArgumentError(f"expected dimension {dim}, got {pts.shape[1]}")
    return pts


def lex_sort(points: np.ndarray) -> np.ndarray:
    """Return a copy sorted lexicographically (first coordinate primary)."""
    pts = as_points(points)
    if len(pts) == 0:
        return pts.copy()
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def lex_sorted_strictly(points: np.ndarray) -> tuple[bool, bool]:
    """Check lexicographic order; returns (is_sorted, has_duplicates)."""
    pts = as_points(points)
    if len(pts) < 2:
        return True, False
    a, b = pts[:-1], pts[1:]
    # first coordinate where consecutive rows differ decides the order
    neq = a != b
    any_neq = neq.any(axis=1)
    has_dup = bool((~any_neq).any())
    first = np.argmax(neq, axis=1)
    rows = np.arange(len(a))
    ordered = np.where(any_neq, a[rows, first] < b[rows, first], True)
    return bool(ordered.all()), has_dup


def sq_norms(points: np.ndarray) -> np.ndarray:
    pts = as_points(points)
    return np.einsum("ij,ij->i", pts, pts)


def window_mask(points: np.ndarray, radius: float) -> np.ndarray:
    """Boolean mask of points inside the closed origin ball of given radius."""
    return sq_norms(points) <= float(radius) ** 2


def min_pairwise_gap(points: np.ndarray) -> float:
    """Exact minimum pairwise Euclidean distance; +inf for < 2 points."""
    pts = as_points(points)
    n, d = pts.shape
    if n < 2:
        return float("inf")
    if d == 1:
        x = np.sort(pts[:, 0])
        return float(np.min(np.diff(x)))
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=2)
    return float(np.min(dist[:, 1]))


def nearest_distances(queries: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Distance from each query point to the nearest target (+inf if none)."""
    q = as_points(queries)
    t = as_points(targets)
    if len(q) == 0:
        return np.empty(0, dtype=np.float64)
    if len(t) == 0:
        return np.full(len(q), np.inf)
    if q.shape[1] != t.shape[1]:
        raise InvalidArgumentError("dimension mismatch in nearest_distances")
    if q.shape[1] == 1:
        ts = np.sort(t[:, 0])
        x = q[:, 0]
        idx = np.searchsorted(ts, x)
        left = np.clip(idx - 1, 0, len(ts) - 1)
        right = np.clip(idx, 0, len(ts) - 1)
        return np.minimum(np.abs(x - ts[left]), np.abs(x - ts[right]))
    tree = cKDTree(t)
    dist, _ = tree.query(q, k=1)
    return np.asarray(dist, dtype=np.float64)


_UNIT_BALL_VOL = {0: 1.0}


def ball_volume(dim: int, radius: float = 1.0) -> float:
    """Lebesgue volume of the d-ball, via the even/odd closed forms."""
    if dim < 0:
        raise InvalidArgumentError("dimension must be nonnegative")
    if dim not in _UNIT_BALL_VOL:
        # omega_d = pi^{d/2} / Gamma(d/2 + 1)
        from math import gamma, pi

        _UNIT_BALL_VOL[dim] = pi ** (dim / 2) / gamma(dim / 2 + 1)
    return _UNIT_BALL_VOL[dim] * float(radius) ** dim
