"""Finitely supported measures, autocorrelation, and vague-convergence proxies.

The continuum notions (Radon measures, vague convergence, Portmanteau
inequalities) are replaced by their exact finite counterparts:

* an :class:`AtomicMeasure` is a finite list of weighted atoms in canonical
  lexicographic order, with a recorded ``bucket_tol`` stating how close two
  raw atoms were allowed to be before being merged into one;
* test functions are radial tents — continuous, compactly supported, and
  with closed-form pairings, so no quadrature appears anywhere;
* vague closeness of two measures is the maximum pairing gap over a declared
  :class:`TestFamily`, whose region and resolution travel with every result.

The autocorrelation of a point set X on the radius-L window is the measure
(1/L^d) * sum of point-mass at p - q over all ordered pairs p, q in the
window; its total mass is exactly (#window)^2 / L^d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientExtentError, InvalidArgumentError
from .geometry import as_points, lex_sorted_strictly, min_pairwise_gap, sq_norms
from .pointset import PointSet

_PAIR_BUDGET = 4_000_000       # difference vectors materialized per chunk
_ATOM_BUDGET = 20_000_000      # distinct atoms an accumulation may reach

__all__ = [
    "AtomicMeasure",
    "TestFunction",
    "TestFamily",
    "PortmanteauReport",
    "dirac_comb",
    "autocorrelation",
    "pair",
    "tv_on_ball",
    "vague_gap",
    "portmanteau_check",
]


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite complex measure: weighted atoms at pairwise-separated locations.

    ``bucket_tol`` records the merge radius used while accumulating the
    atoms (0 means only exactly coincident locations were merged), and
    ``merged_count`` how many surviving atoms absorbed at least two distinct
    raw locations.
    """

    dim: int
    locations: np.ndarray
    weights: np.ndarray
    bucket_tol: float = 0.0
    merged_count: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError("dim must be >= 1")
        if self.bucket_tol < 0:
            raise InvalidArgumentError("bucket_tol must be >= 0")
        locs = as_points(self.locations, self.dim)
        w = np.asarray(self.weights, dtype=np.complex128).reshape(-1)
        if len(w) != len(locs):
            raise InvalidArgumentError("weights and locations must have equal length")
        ordered, dup = lex_sorted_strictly(locs)
        if dup:
            raise InvalidArgumentError("atom locations must be distinct")
        if not ordered:
            raise InvalidArgumentError("atom locations must be in lexicographic order")
        if (w == 0).any():
            raise InvalidArgumentError("zero-weight atoms are not stored")
        if self.bucket_tol > 0 and len(locs) >= 2:
            if min_pairwise_gap(locs) < self.bucket_tol * (1.0 - 1e-12):
                raise InvalidArgumentError(
                    "atoms closer than bucket_tol survived merging; "
                    "choose a different bucket_tol"
                )
        locs.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return (
            f"AtomicMeasure(dim={self.dim}, atoms={len(self.weights)}, "
            f"bucket_tol={self.bucket_tol!r}, merged={self.merged_count})"
        )

    @property
    def total_mass(self) -> complex:
        return complex(self.weights.sum())

    def mass_in_ball(self, center, radius: float, closed: bool = True) -> complex:
        """Measure of the closed (or open) ball around ``center``."""
        c = np.asarray(center, dtype=np.float64).reshape(1, self.dim)
        d2 = sq_norms(self.locations - c)
        r2 = radius * radius
        mask = d2 <= r2 if closed else d2 < r2
        return complex(self.weights[mask].sum())

    def scaled(self, factor: complex) -> "AtomicMeasure":
        if factor == 0:
            return AtomicMeasure(self.dim, np.zeros((0, self.dim)), np.zeros(0, np.complex128),
                                 self.bucket_tol, self.merged_count)
        return AtomicMeasure(self.dim, self.locations, self.weights * factor,
                             self.bucket_tol, self.merged_count)


@dataclass(frozen=True)
class TestFunction:
    """Radial tent: amplitude * max(0, 1 - |x - center| / radius).

    Continuous, supported on the closed ball B(center, radius), with
    sup-norm |amplitude|.
    """

    __test__ = False  # keeps pytest from collecting this Test*-named class

    center: tuple[float, ...]
    radius: float
    amplitude: float = 1.0
    kind: str = "radial_tent"

    def __post_init__(self):
        if self.kind != "radial_tent":
            raise InvalidArgumentError("only radial tents are supported")
        if not (self.radius > 0):
            raise InvalidArgumentError("radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dim(self) -> int:
        return len(self.center)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points, self.dim)
        dist = np.sqrt(sq_norms(pts - np.asarray(self.center)))
        return self.amplitude * np.maximum(0.0, 1.0 - dist / self.radius)


@dataclass(frozen=True)
class TestFamily:
    """Nonempty family of tents covering a declared region at a declared
    resolution; the declaration is reported alongside every gap value so a
    smallness claim names the family it was checked against."""

    __test__ = False  # keeps pytest from collecting this Test*-named class

    functions: tuple[TestFunction, ...]
    region_center: tuple[float, ...]
    region_radius: float
    resolution: float

    def __post_init__(self):
        if not self.functions:
            raise InvalidArgumentError("a TestFamily must contain a function")
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "region_center", tuple(float(c) for c in self.region_center))
        if not (self.region_radius > 0) or not (self.resolution > 0):
            raise InvalidArgumentError("region_radius and resolution must be positive")
        rc = np.asarray(self.region_center)
        for f in self.functions:
            if f.dim != len(self.region_center):
                raise InvalidArgumentError("family members must share the region's dimension")
            off = float(np.linalg.norm(np.asarray(f.center) - rc))
            if off + f.radius > self.region_radius * (1 + 1e-12) + 1e-12:
                raise InvalidArgumentError("a member's support leaves the declared region")

    def __len__(self) -> int:
        return len(self.functions)

    @classmethod
    def tents_1d(
        cls, lo: float, hi: float, count: int, radius: float, amplitude: float = 1.0
    ) -> "TestFamily":
        """Evenly spaced tents with centers from lo to hi inclusive."""
        if count < 1 or not (hi >= lo):
            raise InvalidArgumentError("need count >= 1 and hi >= lo")
        centers = np.linspace(lo, hi, count) if count > 1 else np.array([(lo + hi) / 2])
        funcs = tuple(TestFunction((float(c),), radius, amplitude) for c in centers)
        spacing = (hi - lo) / (count - 1) if count > 1 else hi - lo
        return cls(
            functions=funcs,
            region_center=((lo + hi) / 2.0,),
            region_radius=(hi - lo) / 2.0 + radius,
            resolution=max(spacing, 1e-300),
        )


# ---------------------------------------------------------------------------
# constructions


def dirac_comb(x: PointSet) -> AtomicMeasure:
    """Unit point mass at every point of the set."""
    return AtomicMeasure(
        dim=x.dim,
        locations=x.points.copy(),
        weights=np.ones(len(x.points), dtype=np.complex128),
        bucket_tol=0.0,
    )


def _quantize(vals: np.ndarray, tol: float) -> np.ndarray:
    scaled = np.round(vals / tol)
    if scaled.size and np.abs(scaled).max() >= 2.0**62:
        raise InvalidArgumentError("bucket_tol too small for the coordinate range")
    return scaled.astype(np.int64)


class _Accumulator:
    """Streaming merge of difference vectors into buckets of width tol.

    Keeps, per bucket: an integer multiplicity, the first-seen representative
    location, and coordinatewise min/max (to report how many buckets merged
    distinct raw values).
    """

    def __init__(self, dim: int, tol: float):
        self.dim = dim
        self.tol = tol
        key_dtype = np.int64 if tol > 0 else np.float64
        self.keys = np.zeros((0, dim), dtype=key_dtype)
        self.reps = np.zeros((0, dim), dtype=np.float64)
        self.counts = np.zeros(0, dtype=np.int64)
        self.lo = np.zeros((0, dim), dtype=np.float64)
        self.hi = np.zeros((0, dim), dtype=np.float64)

    def add(self, vecs: np.ndarray) -> None:
        if len(vecs) == 0:
            return
        keys = _quantize(vecs, self.tol) if self.tol > 0 else vecs
        cat_keys = np.concatenate([self.keys, keys])
        # np.unique(axis=0) sorts rows lexicographically and reports, for each
        # distinct row, the index of its first occurrence in the input
        uniq, first, inverse = np.unique(cat_keys, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        if len(uniq) > _ATOM_BUDGET:
            raise InvalidArgumentError("autocorrelation atom budget exceeded")
        cat_reps = np.concatenate([self.reps, vecs])
        cat_counts = np.concatenate([self.counts, np.ones(len(vecs), dtype=np.int64)])
        cat_lo = np.concatenate([self.lo, vecs])
        cat_hi = np.concatenate([self.hi, vecs])
        counts = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(counts, inverse, cat_counts)
        lo = np.full((len(uniq), self.dim), np.inf)
        hi = np.full((len(uniq), self.dim), -np.inf)
        np.minimum.at(lo, inverse, cat_lo)
        np.maximum.at(hi, inverse, cat_hi)
        self.keys = uniq
        self.reps = cat_reps[first]
        self.counts = counts
        self.lo = lo
        self.hi = hi

    def finish(self, scale: float):
        order = np.lexsort(self.reps.T[::-1])
        reps = self.reps[order]
        weights = (self.counts[order] / scale).astype(np.complex128)
        merged = int((self.hi > self.lo).any(axis=1).sum())
        return reps, weights, merged


def autocorrelation(
    x: PointSet,
    radius: float,
    bucket_tol: float = 1e-9,
    max_range: float | None = None,
) -> AtomicMeasure:
    """Windowed autocorrelation measure of the set.

    Atoms sit at the difference vectors p - q of points in the closed
    radius-window, merged within ``bucket_tol``, each weighted by its
    multiplicity divided by radius^dim.  With ``max_range`` set, only
    differences of length <= max_range are accumulated — the restriction of
    the same measure to a ball, at a fraction of the cost — which is the
    honest thing to pair against a test family supported in that ball.
    """
    r0 = x.require_separation()
    if not (0 <= bucket_tol <= r0 / 4):
        raise InvalidArgumentError(f"bucket_tol must lie in [0, sep_radius/4] = [0, {r0 / 4!r}]")
    if radius > x.extent * (1.0 + 1e-12):
        raise InsufficientExtentError("autocorrelation window exceeds the set's extent")
    if max_range is not None and not (max_range > 0):
        raise InvalidArgumentError("max_range must be positive")
    pts = x.points[sq_norms(x.points) <= radius * radius]
    n = len(pts)
    acc = _Accumulator(x.dim, bucket_tol)
    if n:
        if max_range is None:
            chunk = max(1, _PAIR_BUDGET // n)
            for start in range(0, n, chunk):
                block = pts[start : start + chunk]
                diffs = (block[:, None, :] - pts[None, :, :]).reshape(-1, x.dim)
                acc.add(diffs)
        elif x.dim == 1:
            v = pts[:, 0]
            lo = np.searchsorted(v, v - max_range, side="left")
            hi = np.searchsorted(v, v + max_range, side="right")
            spans = hi - lo
            # ragged neighbor ranges, flattened in manageable chunks of rows
            start = 0
            while start < n:
                stop = start
                total = 0
                while stop < n and total + spans[stop] <= _PAIR_BUDGET:
                    total += spans[stop]
                    stop += 1
                stop = max(stop, start + 1)
                rows = np.repeat(np.arange(start, stop), spans[start:stop])
                offsets = np.concatenate([np.arange(lo[i], hi[i]) for i in range(start, stop)])
                acc.add((v[offsets] - v[rows]).reshape(-1, 1))
                start = stop
        else:
            from scipy.spatial import cKDTree

            tree = cKDTree(pts)
            pairs = tree.query_pairs(r=max_range, output_type="ndarray")
            acc.add(np.zeros((n, x.dim)))  # p = q diagonal
            if len(pairs):
                d = pts[pairs[:, 0]] - pts[pairs[:, 1]]
                acc.add(d)
                acc.add(-d)
    reps, weights, merged = acc.finish(scale=float(radius) ** x.dim)
    return AtomicMeasure(x.dim, reps, weights, bucket_tol, merged)


# ---------------------------------------------------------------------------
# pairings and convergence proxies


def pair(mu: AtomicMeasure, f: TestFunction) -> complex:
    """Integral of the tent against the measure: sum of weight * f(atom)."""
    if f.dim != mu.dim:
        raise InvalidArgumentError("test function and measure dimensions differ")
    if len(mu) == 0:
        return 0j
    return complex((mu.weights * f.evaluate(mu.locations)).sum())


def tv_on_ball(mu: AtomicMeasure, center, radius: float) -> float:
    """Total variation of the measure on the closed ball: sum of |weight|."""
    c = np.asarray(center, dtype=np.float64).reshape(1, mu.dim)
    mask = sq_norms(mu.locations - c) <= radius * radius
    return float(np.abs(mu.weights[mask]).sum())


def vague_gap(mu: AtomicMeasure, nu: AtomicMeasure, family: TestFamily) -> float:
    """Largest pairing discrepancy over the declared family."""
    if mu.dim != nu.dim:
        raise InvalidArgumentError("measures must share a dimension")
    return max(abs(pair(mu, f) - pair(nu, f)) for f in family.functions)


@dataclass(frozen=True)
class PortmanteauReport:
    """Tail checks of the two vague-convergence inequalities.

    For each closed ball K: every tail measure satisfies mu_n(K) <= limit(K)
    + tol.  For each open ball G: limit(G) <= mu_n(G) + tol for every tail
    measure.  The tail is the last half of the sequence.
    """

    compact_ok: tuple[bool, ...]
    open_ok: tuple[bool, ...]
    tail_length: int
    tol: float

    @property
    def passed(self) -> bool:
        return all(self.compact_ok) and all(self.open_ok)


def portmanteau_check(
    seq,
    limit: AtomicMeasure,
    compacts=(),
    opens=(),
    tol: float = 1e-9,
) -> PortmanteauReport:
    """Check the upper (closed-ball) and lower (open-ball) tail inequalities.

    ``compacts`` and ``opens`` are sequences of (center, radius) balls; the
    measures are expected to be positive (real parts are compared).
    """
    seq = list(seq)
    if len(seq) < 2:
        raise InvalidArgumentError("need a sequence of at least two measures")
    tail = seq[len(seq) // 2 :]
    compact_ok = []
    for center, radius in compacts:
        cap = limit.mass_in_ball(center, radius, closed=True).real + tol
        compact_ok.append(all(m.mass_in_ball(center, radius, closed=True).real <= cap for m in tail))
    open_ok = []
    for center, radius in opens:
        floor = limit.mass_in_ball(center, radius, closed=False).real - tol
        open_ok.append(all(m.mass_in_ball(center, radius, closed=False).real >= floor for m in tail))
    return PortmanteauReport(tuple(compact_ok), tuple(open_ok), len(tail), tol)
