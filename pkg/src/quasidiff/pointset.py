"""Uniformly discrete point sets on finite balls: type, generators, surgery.

A ``PointSet`` is a finite list of points of R^d known to be the intersection
of some (conceptually infinite) point configuration with the closed ball of
radius ``extent`` around the origin.  ``sep_radius`` is a declared lower
bound on pairwise gaps (the infimum separation of the underlying set); it is
0 for configurations that are not uniformly discrete (Poisson samples).

Everything downstream (window metrics, autocorrelation, periodograms)
assumes the canonical representation enforced here:

* points are float64, strictly increasing in lexicographic order,
* every point lies in the closed extent ball (squared-norm comparison, so
  integer coordinates are classified exactly),
* pairwise gaps respect ``sep_radius`` up to 1e-12 absolute slack,
* asking for data beyond ``extent`` is an error, never a silent truncation.

Generators are deterministic functions of their arguments (the Poisson
sampler of its seed), so identical calls are bit-identical across runs.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousRemovalError,
    DuplicatePointError,
    InsufficientExtentError,
    InvalidArgumentError,
    NotUniformlyDiscreteError,
    SeamViolationError,
)
from .geometry import (
    as_points,
    ball_volume,
    lex_sort,
    lex_sorted_strictly,
    min_pairwise_gap,
    nearest_distances,
    sq_norms,
)

logger = logging.getLogger(__name__)

TAU = (1.0 + np.sqrt(5.0)) / 2.0  # long tile of the Fibonacci chain

_GAP_SLACK = 1e-12          # absolute slack when checking declared separation
_EXTENT_SLACK = 1e-9        # relative slack when checking points against extent
_ENUM_BUDGET = 20_000_000   # cut-and-project enumeration guard

__all__ = [
    "TAU",
    "PointSet",
    "SetStats",
    "CutProjectConfig",
    "gen_lattice",
    "gen_fibonacci",
    "gen_visible",
    "gen_poisson",
    "gen_cut_project",
    "fibonacci_cut_project_config",
    "ammann_beenker_config",
    "window",
    "splice",
    "sparse_union",
    "remove_near",
    "set_stats",
]


@dataclass(frozen=True, eq=False)
class PointSet:
    """Finite window of a point configuration, in canonical form.

    Equality compares the geometric content: dimension, extent and the exact
    point array.  ``label`` (used to key perturbation randomness) and
    ``sep_radius`` (a declared bound, which may be conservative) are
    metadata and do not participate in ``==``.
    """

    dim: int
    sep_radius: float
    extent: float
    points: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError("dim must be >= 1")
        if not (self.extent > 0):
            raise InvalidArgumentError("extent must be positive")
        if self.sep_radius < 0:
            raise InvalidArgumentError("sep_radius must be >= 0")
        pts = as_points(self.points, self.dim)
        object.__setattr__(self, "points", pts)
        ordered, dup = lex_sorted_strictly(pts)
        if dup:
            raise DuplicatePointError(f"{self.label or 'point set'}: coincident points")
        if not ordered:
            raise InvalidArgumentError("points must be in increasing lexicographic order")
        if len(pts):
            limit = (self.extent * (1.0 + _EXTENT_SLACK)) ** 2
            if sq_norms(pts).max() > limit:
                raise InvalidArgumentError(
                    f"{self.label or 'point set'}: point outside the extent ball"
                )
        if self.sep_radius > 0 and len(pts) >= 2:
            gap = min_pairwise_gap(pts)
            if gap < self.sep_radius - _GAP_SLACK:
                raise NotUniformlyDiscreteError(
                    f"measured gap {gap!r} below declared separation {self.sep_radius!r}"
                )
        pts.flags.writeable = False

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.extent == other.extent
            and self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:  # numpy's default repr would dump the array
        return (
            f"PointSet(dim={self.dim}, n={len(self.points)}, r0={self.sep_radius!r}, "
            f"extent={self.extent!r}, label={self.label!r})"
        )

    def require_separation(self) -> float:
        if self.sep_radius <= 0:
            raise NotUniformlyDiscreteError(
                f"{self.label or 'point set'} has sep_radius 0 (not uniformly discrete)"
            )
        return self.sep_radius


@dataclass(frozen=True)
class SetStats:
    """Summary returned by :func:`set_stats`."""

    dim: int
    label: str
    min_gap: float | None
    l_values: tuple[float, ...]
    counts: tuple[int, ...]
    densities: tuple[float, ...]


# ---------------------------------------------------------------------------
# generators


def gen_lattice(dim: int, spacing: float, extent: float, label: str | None = None) -> PointSet:
    """spacing * Z^d intersected with the closed extent ball."""
    if dim < 1:
        raise InvalidArgumentError("dim must be >= 1")
    if not (spacing > 0):
        raise InvalidArgumentError("spacing must be positive")
    if not (extent > 0):
        raise InvalidArgumentError("extent must be positive")
    k = int(np.floor(extent / spacing * (1.0 + 1e-12)))
    axis = np.arange(-k, k + 1, dtype=np.float64) * spacing
    if dim == 1:
        pts = axis.reshape(-1, 1)
    else:
        grids = np.meshgrid(*([axis] * dim), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    pts = pts[sq_norms(pts) <= extent * extent * (1.0 + 1e-12)]
    return PointSet(dim, spacing, extent, pts, label or f"lattice{dim}d[{spacing!r}]")


_SIGMA2 = {"a": "aba", "b": "ab"}  # square of the substitution a -> ab, b -> a


def _fibonacci_word(min_geometric_length: float) -> str:
    w = "a"
    # geometric length of a word: (#a) * tau + (#b); grows by ~tau^2 per step
    while w.count("a") * TAU + w.count("b") < min_geometric_length:
        w = "".join(_SIGMA2[c] for c in w)
    return w


def _tile_positions(word: str) -> np.ndarray:
    """Right endpoints of the tile sequence, exactly as n_a * tau + n_b."""
    is_a = np.frombuffer(word.encode("ascii"), dtype=np.uint8) == ord("a")
    n_a = np.cumsum(is_a, dtype=np.int64)
    n_b = np.cumsum(~is_a, dtype=np.int64)
    # accumulate in extended precision, round once at the end: keeps adjacent
    # gaps within 1 float64 ulp of the exact tile lengths
    tau_ld = (np.longdouble(1.0) + np.sqrt(np.longdouble(5.0))) / np.longdouble(2.0)
    pos = n_a.astype(np.longdouble) * tau_ld + n_b.astype(np.longdouble)
    return pos.astype(np.float64)


def gen_fibonacci(extent: float, label: str = "fibonacci") -> PointSet:
    """Two-sided Fibonacci chain: tile endpoints of the bi-infinite fixed word.

    The substitution a -> ab, b -> a is iterated (as its square, which is
    stable on both ends) from the legal seed ``a|a``; tiles have length tau
    ("a") and 1 ("b"), and one tile endpoint sits at the origin.  The chain
    therefore extends to the left of 0 as well: window(X, 2) contains -tau.
    """
    if not (extent > 0):
        raise InvalidArgumentError("extent must be positive")
    word = _fibonacci_word(extent + 2.0 * TAU)
    right = _tile_positions(word)
    left = -_tile_positions(word[::-1])
    pts = np.concatenate([left[::-1], [0.0], right])
    pts = pts[np.abs(pts) <= extent]
    return PointSet(1, 1.0, extent, pts.reshape(-1, 1), label)


def gen_visible(extent: float, label: str = "visible") -> PointSet:
    """Visible points of Z^2: nonzero integer pairs with coprime coordinates."""
    if not (extent > 0):
        raise InvalidArgumentError("extent must be positive")
    k = int(np.floor(extent * (1.0 + 1e-12)))
    axis = np.arange(-k, k + 1, dtype=np.int64)
    mm, nn = np.meshgrid(axis, axis, indexing="ij")
    mm, nn = mm.ravel(), nn.ravel()
    keep = (np.gcd(np.abs(mm), np.abs(nn)) == 1) & (mm * mm + nn * nn <= extent * extent)
    pts = np.stack([mm[keep], nn[keep]], axis=1).astype(np.float64)
    return PointSet(2, 1.0, extent, pts, label)


def gen_poisson(intensity: float, dim: int, extent: float, seed: int) -> PointSet:
    """Homogeneous Poisson sample on the extent ball; sep_radius 0 by definition."""
    if not (intensity > 0):
        raise InvalidArgumentError("intensity must be positive")
    if dim < 1:
        raise InvalidArgumentError("dim must be >= 1")
    if not (extent > 0):
        raise InvalidArgumentError("extent must be positive")
    rng = np.random.default_rng(int(seed))
    n = int(rng.poisson(intensity * ball_volume(dim, extent)))
    direction = rng.standard_normal((n, dim))
    norm = np.linalg.norm(direction, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    radius = extent * rng.random(n) ** (1.0 / dim)
    pts = lex_sort(direction / norm * radius[:, None])
    return PointSet(dim, 0.0, extent, pts, f"poisson[{intensity!r},{seed}]")


@dataclass(frozen=True)
class CutProjectConfig:
    """Cut-and-project scheme data.

    ``physical`` (d rows) and ``internal`` (n-d rows) stack to an invertible
    n x n matrix acting on Z^n shifted by ``offset``; a lattice point is kept
    when its internal image lies in the half-open axis box ``window`` and its
    physical image lies in the closed extent ball.
    """

    total_dim: int
    physical: tuple[tuple[float, ...], ...]
    internal: tuple[tuple[float, ...], ...]
    window: tuple[tuple[float, float], ...]
    offset: tuple[float, ...]
    extent: float

    def __post_init__(self):
        n = self.total_dim
        d = len(self.physical)
        if n < 1 or d < 1 or d > n:
            raise InvalidArgumentError("need 1 <= physical dim <= total_dim")
        if len(self.internal) != n - d:
            raise InvalidArgumentError("internal rows must number total_dim - physical dim")
        for row in itertools.chain(self.physical, self.internal):
            if len(row) != n:
                raise InvalidArgumentError("projection rows must have total_dim entries")
        if len(self.window) != n - d:
            raise InvalidArgumentError("window needs one (lo, hi) pair per internal axis")
        for lo, hi in self.window:
            if not (hi > lo):
                raise InvalidArgumentError("window must have positive volume")
        if len(self.offset) != n:
            raise InvalidArgumentError("offset must have total_dim entries")
        if not (self.extent > 0):
            raise InvalidArgumentError("extent must be positive")
        if np.linalg.cond(self.stacked()) > 1e12:
            raise InvalidArgumentError("stacked projection matrix is (near) singular")

    def stacked(self) -> np.ndarray:
        return np.array(list(self.physical) + list(self.internal), dtype=np.float64)


def gen_cut_project(cfg: CutProjectConfig, label: str | None = None) -> PointSet:
    """Enumerate the model set defined by ``cfg``.

    Enumeration walks the lattice coordinates one axis at a time, pruning
    each axis range with interval arithmetic on the physical/internal
    constraints, so the visited tree stays proportional to the actual number
    of accepted points rather than to a bounding box of Z^n.
    """
    n = cfg.total_dim
    d = len(cfg.physical)
    s = cfg.stacked()
    m = np.linalg.inv(s)
    offset = np.asarray(cfg.offset, dtype=np.float64)

    y_lo = np.array([-cfg.extent] * d + [lo for lo, _ in cfg.window])
    y_hi = np.array([cfg.extent] * d + [hi for _, hi in cfg.window])
    y_mid = 0.5 * (y_lo + y_hi)
    y_half = 0.5 * (y_hi - y_lo)

    # static bounds on the shifted coordinates v = z + offset
    v_mid = m @ y_mid
    v_half = np.abs(m) @ y_half
    v_lo_static = v_mid - v_half - 1e-9
    v_hi_static = v_mid + v_half + 1e-9

    partial = np.zeros((1, 0), dtype=np.float64)  # rows: fixed v_0..v_{k-1}
    for k in range(n):
        fixed = partial @ s[:, :k].T if k else np.zeros((len(partial), n))
        tail_lo = np.zeros(n)
        tail_hi = np.zeros(n)
        if k + 1 < n:
            rest = s[:, k + 1 :]
            lo_part = np.where(rest > 0, rest * v_lo_static[k + 1 :], rest * v_hi_static[k + 1 :])
            hi_part = np.where(rest > 0, rest * v_hi_static[k + 1 :], rest * v_lo_static[k + 1 :])
            tail_lo = lo_part.sum(axis=1)
            tail_hi = hi_part.sum(axis=1)
        lo_k = np.full(len(partial), v_lo_static[k])
        hi_k = np.full(len(partial), v_hi_static[k])
        for j in range(n):
            c = s[j, k]
            if c == 0.0:
                continue
            a = (y_lo[j] - fixed[:, j] - tail_hi[j]) / c
            b = (y_hi[j] - fixed[:, j] - tail_lo[j]) / c
            if c < 0:
                a, b = b, a
            lo_k = np.maximum(lo_k, a - 1e-9)
            hi_k = np.minimum(hi_k, b + 1e-9)
        z_lo = np.ceil(lo_k - offset[k]).astype(np.int64)
        z_hi = np.floor(hi_k - offset[k]).astype(np.int64)
        counts = np.maximum(z_hi - z_lo + 1, 0)
        total = int(counts.sum())
        if total > _ENUM_BUDGET:
            raise InvalidArgumentError("cut-and-project enumeration budget exceeded")
        keep = counts > 0
        partial, counts, z_lo = partial[keep], counts[keep], z_lo[keep]
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        z_k = np.arange(total) - starts + np.repeat(z_lo, counts)
        partial = np.column_stack([np.repeat(partial, counts, axis=0), z_k + offset[k]])

    phys = partial @ s[:d].T
    keep = sq_norms(phys) <= cfg.extent * cfg.extent * (1.0 + 1e-12)
    if n > d:
        internal = partial @ s[d:].T
        for i, (lo, hi) in enumerate(cfg.window):
            keep &= (internal[:, i] >= lo) & (internal[:, i] < hi)
    pts = lex_sort(phys[keep])
    gap = min_pairwise_gap(pts)
    sep = 0.0 if not np.isfinite(gap) else gap
    return PointSet(d, sep, cfg.extent, pts, label or "cut-project")


def fibonacci_cut_project_config(extent: float) -> CutProjectConfig:
    """Planar scheme whose model set is exactly :func:`gen_fibonacci`'s chain.

    Lattice points (m, n) project physically to m*tau + n and internally to
    the algebraic conjugate m*(1-tau) + n.  The chain generated from the
    seed ``a|a`` occupies the conjugate interval (-1, tau-1], which is
    half-open on the *left*; the internal row is negated so the acceptance
    region becomes [1-tau, 1) in this module's [lo, hi) convention.
    """
    return CutProjectConfig(
        total_dim=2,
        physical=((TAU, 1.0),),
        internal=((TAU - 1.0, -1.0),),
        window=((1.0 - TAU, 1.0),),
        offset=(0.0, 0.0),
        extent=extent,
    )


def ammann_beenker_config(extent: float, window_half: float = 1.0) -> CutProjectConfig:
    """Octagonal-symmetry scheme on Z^4 with an axis box acceptance window."""
    c = np.sqrt(2.0) / 2.0
    return CutProjectConfig(
        total_dim=4,
        physical=((1.0, c, 0.0, -c), (0.0, c, 1.0, c)),
        internal=((1.0, -c, 0.0, c), (0.0, c, -1.0, c)),
        window=((-window_half, window_half), (-window_half, window_half)),
        offset=(0.01, 0.013, 0.017, 0.019),
        extent=extent,
    )


# ---------------------------------------------------------------------------
# windowing and surgery


def window(x: PointSet, radius: float) -> PointSet:
    """Restrict to the closed ball of the given radius (must be <= extent)."""
    if not (radius > 0):
        raise InvalidArgumentError("window radius must be positive")
    if radius > x.extent * (1.0 + 1e-12):
        raise InsufficientExtentError(
            f"window radius {radius!r} exceeds extent {x.extent!r} of {x.label or 'set'}"
        )
    pts = x.points[sq_norms(x.points) <= radius * radius]
    return PointSet(x.dim, x.sep_radius, radius, pts, x.label)


def splice(inner: PointSet, outer: PointSet, radius: float, allow_smaller: bool = False) -> PointSet:
    """Take ``inner`` on the closed radius ball and ``outer`` strictly outside it."""
    if inner.dim != outer.dim:
        raise InvalidArgumentError("splice requires equal dimensions")
    if radius > min(inner.extent, outer.extent) * (1.0 + 1e-12):
        raise InsufficientExtentError("splice radius exceeds an operand's extent")
    inside = inner.points[sq_norms(inner.points) <= radius * radius]
    outside = outer.points[sq_norms(outer.points) > radius * radius]
    pts = lex_sort(np.concatenate([inside, outside]))
    measured = min_pairwise_gap(pts)
    declared = min(inner.sep_radius, outer.sep_radius)
    if measured < declared * (1.0 - 1e-9):
        if not allow_smaller:
            raise SeamViolationError(
                f"seam gap {measured!r} below operand separation {declared!r}"
            )
        logger.info("splice: recording reduced separation %r (was %r)", measured, declared)
    sep = measured if np.isfinite(measured) else declared
    return PointSet(
        inner.dim, sep, outer.extent, pts,
        f"splice({inner.label},{outer.label};{radius!r})",
    )


def sparse_union(x: PointSet, extra: PointSet) -> PointSet:
    """Union with a (typically vanishing-density) extra set; duplicates are errors."""
    if x.dim != extra.dim:
        raise InvalidArgumentError("sparse_union requires equal dimensions")
    extent = min(x.extent, extra.extent)
    a = x.points[sq_norms(x.points) <= extent * extent]
    b = extra.points[sq_norms(extra.points) <= extent * extent]
    pts = lex_sort(np.concatenate([a, b]))
    ordered, dup = lex_sorted_strictly(pts)
    assert ordered
    if dup:
        raise DuplicatePointError("sparse_union operands share a point")
    measured = min_pairwise_gap(pts)
    sep = measured if np.isfinite(measured) else min(x.sep_radius, extra.sep_radius)
    dens = len(b) / extent**x.dim
    logger.info("sparse_union: extra set windowed density %.6g at L=%r", dens, extent)
    return PointSet(x.dim, sep, extent, pts, f"union({x.label},{extra.label})")


def remove_near(x: PointSet, targets, tol: float) -> PointSet:
    """Remove, for each target, the unique point within ``tol`` of it (if any).

    ``tol`` must stay below half the separation radius so a target can match
    at most one point; two targets claiming the same point is an error.
    """
    sep = x.require_separation()
    if not (0 < tol < sep / 2):
        raise InvalidArgumentError(f"tol must lie in (0, sep_radius/2) = (0, {sep / 2!r})")
    tg = as_points(targets, x.dim)
    if len(tg) == 0 or len(x.points) == 0:
        return x
    dist = nearest_distances(tg, x.points)
    hit = dist <= tol
    if not hit.any():
        return x
    if x.dim == 1:
        idx = np.searchsorted(x.points[:, 0], tg[hit, 0])
        left = np.clip(idx - 1, 0, len(x.points) - 1)
        right = np.clip(idx, 0, len(x.points) - 1)
        pick_right = np.abs(x.points[right, 0] - tg[hit, 0]) <= np.abs(
            x.points[left, 0] - tg[hit, 0]
        )
        matches = np.where(pick_right, right, left)
    else:
        from scipy.spatial import cKDTree

        _, matches = cKDTree(x.points).query(tg[hit], k=1)
        matches = np.atleast_1d(matches)
    if len(np.unique(matches)) != len(matches):
        raise AmbiguousRemovalError("two removal targets matched the same point")
    mask = np.ones(len(x.points), dtype=bool)
    mask[matches] = False
    logger.info("remove_near: removed %d of %d points", len(matches), len(x.points))
    return PointSet(x.dim, x.sep_radius, x.extent, x.points[mask], x.label)


def set_stats(x: PointSet, l_values) -> SetStats:
    """Per-window counts and densities plus the exact minimum gap."""
    ls = np.asarray(l_values, dtype=np.float64)
    if ls.ndim != 1 or len(ls) == 0:
        raise InvalidArgumentError("l_values must be a nonempty 1-d sequence")
    if (ls <= 0).any() or (np.diff(ls) <= 0).any():
        raise InvalidArgumentError("l_values must be positive and strictly increasing")
    if ls[-1] > x.extent * (1.0 + 1e-12):
        raise InsufficientExtentError("stats window exceeds the set's extent")
    sq = np.sort(sq_norms(x.points))
    counts = np.searchsorted(sq, ls * ls, side="right")
    gap = min_pairwise_gap(x.points)
    return SetStats(
        dim=x.dim,
        label=x.label,
        min_gap=float(gap) if np.isfinite(gap) else None,
        l_values=tuple(float(v) for v in ls),
        counts=tuple(int(c) for c in counts),
        densities=tuple(float(c / v**x.dim) for c, v in zip(counts, ls)),
    )
