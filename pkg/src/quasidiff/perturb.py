"""Random displacement of point sets, noise characteristic functions, the
division-by-psi recovery map, and boundary-crossing statistics.

Randomness is counter-based and keyed by (seed, set label, canonical point
index), never by coordinates: the same (set, model, seed) triple produces a
bit-identical perturbation on any machine, any chunking, any thread count,
and two different seeds (or two differently labeled sets) get independent
streams by construction.

The characteristic function psi(lambda) = E e^(-2 pi i <xi, lambda>) has
closed forms for the gaussian, uniform-box and gaussian-mixture models;
the heavy-tailed radial model is estimated by Monte Carlo with a reported
standard error.  Recovery divides a measured amplitude spectrum by psi,
refusing (marking invalid, never dividing) every node where |psi| falls
under a guard threshold.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import (
    DegenerateTrialError,
    InsufficientExtentError,
    InvalidArgumentError,
)
from .geometry import lex_sort, min_pairwise_gap, sq_norms
from .pointset import PointSet
from .spectral import FrequencyGrid, Spectrum, _exp_sums

_MARGIN_SAMPLES = 200_000
_MARGIN_PERCENTILE = 99.9

__all__ = [
    "NoiseModel",
    "PerturbationRecord",
    "BoundaryRecord",
    "BoundaryReport",
    "RecoveryRow",
    "RecoveryReport",
    "perturb",
    "char_fn",
    "char_fn_mc",
    "char_fn_grid",
    "recover",
    "displacement_margin",
    "boundary_crossings",
    "recovery_trial",
]


@dataclass(frozen=True)
class NoiseModel:
    """Displacement law for independent per-point noise.

    kinds and their parameter tuples:

    * "gaussian": sigmas — one standard deviation per axis;
    * "uniform": half_widths — the box [-a_i, a_i] per axis;
    * "gaussian_mixture": components (weight, mean vector, isotropic sigma);
    * "pareto_radial": (alpha, scale): direction uniform on the sphere,
      radius scale * ((1-u)^(-1/alpha) - 1) — heavy tail of index alpha, so
      the moment E |xi|^m is finite exactly when m < alpha.

    ``finite_moment`` records whether E |xi|^(dim + moment_eps) is finite
    for the declared ``moment_eps``; construction warns when it is not.
    """

    dim: int
    kind: str
    sigmas: tuple[float, ...] = ()
    half_widths: tuple[float, ...] = ()
    components: tuple[tuple[float, tuple[float, ...], float], ...] = ()
    alpha: float = 0.0
    scale: float = 0.0
    moment_eps: float = 0.5

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError("dim must be >= 1")
        if not (self.moment_eps > 0):
            raise InvalidArgumentError("moment_eps must be positive")
        if self.kind == "gaussian":
            if len(self.sigmas) != self.dim or any(s < 0 for s in self.sigmas):
                raise InvalidArgumentError("gaussian model needs one sigma >= 0 per axis")
        elif self.kind == "uniform":
            if len(self.half_widths) != self.dim or any(a < 0 for a in self.half_widths):
                raise InvalidArgumentError("uniform model needs one half-width >= 0 per axis")
        elif self.kind == "gaussian_mixture":
            if not self.components:
                raise InvalidArgumentError("mixture needs at least one component")
            total = 0.0
            for w, mean, s in self.components:
                if not (w > 0) or s < 0 or len(mean) != self.dim:
                    raise InvalidArgumentError(
                        "each mixture component needs weight > 0, sigma >= 0, and a dim-length mean"
                    )
                total += w
            if abs(total - 1.0) > 1e-12:
                raise InvalidArgumentError("mixture weights must sum to 1")
        elif self.kind == "pareto_radial":
            if not (self.alpha > 0) or not (self.scale > 0):
                raise InvalidArgumentError("pareto_radial needs alpha > 0 and scale > 0")
        else:
            raise InvalidArgumentError(f"unknown noise kind {self.kind!r}")
        if not self.finite_moment:
            warnings.warn(
                f"noise model has infinite E|xi|^(d+eps) moment: alpha={self.alpha!r} "
                f"<= dim + moment_eps = {self.dim + self.moment_eps!r}",
                RuntimeWarning,
                stacklevel=2,
            )

    @property
    def finite_moment(self) -> bool:
        """Whether E |xi|^(dim + moment_eps) < infinity."""
        if self.kind == "pareto_radial":
            return self.alpha > self.dim + self.moment_eps
        return True

    @classmethod
    def gaussian(cls, dim: int, sigma) -> "NoiseModel":
        sig = (float(sigma),) * dim if np.isscalar(sigma) else tuple(float(s) for s in sigma)
        return cls(dim=dim, kind="gaussian", sigmas=sig)

    @classmethod
    def uniform(cls, dim: int, half_width) -> "NoiseModel":
        hw = (
            (float(half_width),) * dim
            if np.isscalar(half_width)
            else tuple(float(a) for a in half_width)
        )
        return cls(dim=dim, kind="uniform", half_widths=hw)

    @classmethod
    def gaussian_mixture(cls, dim: int, components) -> "NoiseModel":
        comps = tuple(
            (float(w), tuple(float(c) for c in mean), float(s)) for w, mean, s in components
        )
        return cls(dim=dim, kind="gaussian_mixture", components=comps)

    @classmethod
    def pareto_radial(
        cls, dim: int, alpha: float, scale: float, moment_eps: float = 0.5
    ) -> "NoiseModel":
        return cls(
            dim=dim, kind="pareto_radial", alpha=float(alpha), scale=float(scale),
            moment_eps=float(moment_eps),
        )


@dataclass(frozen=True)
class PerturbationRecord:
    """Provenance triple that fully determines a perturbed set."""

    base_label: str
    seed: int
    model: NoiseModel


# ---------------------------------------------------------------------------
# sampling

# slot layout per point index: axis j draws its normal from slots (2j, 2j+1);
# the uniform channel for axis j is slot j; one extra shared draw (component
# choice, or the radial profile) lives at slot 2*dim.


def _displacements(model: NoiseModel, key: int, indices: np.ndarray) -> np.ndarray:
    n = len(indices)
    d = model.dim
    out = np.empty((n, d), dtype=np.float64)
    if model.kind == "gaussian":
        for j in range(d):
            out[:, j] = model.sigmas[j] * rng.normals(key, indices, 2 * j)
        return out
    if model.kind == "uniform":
        for j in range(d):
            u = rng.uniforms(key, indices, j)
            out[:, j] = model.half_widths[j] * (2.0 * u - 1.0)
        return out
    if model.kind == "gaussian_mixture":
        weights = np.array([w for w, _, _ in model.components])
        means = np.array([mean for _, mean, _ in model.components])
        sigmas = np.array([s for _, _, s in model.components])
        u = rng.uniforms(key, indices, 2 * d)
        comp = np.searchsorted(np.cumsum(weights), u, side="right")
        comp = np.minimum(comp, len(weights) - 1)
        for j in range(d):
            out[:, j] = means[comp, j] + sigmas[comp] * rng.normals(key, indices, 2 * j)
        return out
    # pareto_radial: uniform direction, heavy-tailed radius
    g = np.empty((n, d))
    for j in range(d):
        g[:, j] = rng.normals(key, indices, 2 * j)
    norm = np.sqrt(sq_norms(g))
    norm[norm == 0] = 1.0
    u = rng.uniforms(key, indices, 2 * d)
    radius = model.scale * ((1.0 - u) ** (-1.0 / model.alpha) - 1.0)
    return g / norm[:, None] * radius[:, None]


def perturb(x: PointSet, model: NoiseModel, seed: int) -> PointSet:
    """Displace every point independently; deterministic in (set, model, seed).

    Point i (in canonical order) uses the stream keyed by (seed, the set's
    label, i), so windowing the result commutes with windowing the input up
    to boundary crossings, and different seeds are independent.
    """
    if model.dim != x.dim:
        raise InvalidArgumentError("noise model and set dimensions differ")
    if len(x.points) == 0:
        return x
    key = rng.stream_key(seed, x.label)
    moved = x.points + _displacements(model, key, np.arange(len(x.points), dtype=np.uint64))
    pts = lex_sort(moved)
    gap = min_pairwise_gap(pts)
    sep = float(gap) if np.isfinite(gap) else x.sep_radius
    reach = float(np.sqrt(sq_norms(pts).max()))
    extent = x.extent if reach <= x.extent * (1.0 + 1e-9) else reach * (1.0 + 1e-12)
    return PointSet(x.dim, sep, extent, pts, x.label)


# ---------------------------------------------------------------------------
# characteristic functions


def char_fn_grid(model: NoiseModel, freqs: np.ndarray) -> np.ndarray:
    """Closed-form psi at every frequency row; heavy-tail models have none."""
    freqs = np.asarray(freqs, dtype=np.float64)
    if freqs.ndim == 1:
        freqs = freqs.reshape(-1, model.dim)
    if freqs.shape[1] != model.dim:
        raise InvalidArgumentError("frequency rows must match the model dimension")
    if model.kind == "gaussian":
        sig = np.asarray(model.sigmas)
        return np.exp(-2.0 * np.pi**2 * (freqs**2 * sig**2).sum(axis=1)).astype(np.complex128)
    if model.kind == "uniform":
        hw = np.asarray(model.half_widths)
        # sin(2 pi a l) / (2 pi a l) = np.sinc(2 a l)
        return np.prod(np.sinc(2.0 * hw * freqs), axis=1).astype(np.complex128)
    if model.kind == "gaussian_mixture":
        out = np.zeros(len(freqs), dtype=np.complex128)
        for w, mean, s in model.components:
            phase = np.exp(-2j * np.pi * (freqs @ np.asarray(mean)))
            decay = np.exp(-2.0 * np.pi**2 * s * s * sq_norms(freqs))
            out += w * phase * decay
        return out
    raise InvalidArgumentError(
        f"{model.kind} has no closed-form characteristic function; use char_fn with mc_samples"
    )


def char_fn_mc(model: NoiseModel, lam, mc_samples: int, seed: int = 0) -> tuple[complex, float]:
    """Monte Carlo psi estimate and its standard error."""
    if not (mc_samples and mc_samples > 0):
        raise InvalidArgumentError("Monte Carlo estimation needs a positive sample count")
    lam = np.asarray(lam, dtype=np.float64).reshape(model.dim)
    key = rng.stream_key(seed, f"charfn:{model.kind}:{model.dim}")
    xi = _displacements(model, key, np.arange(int(mc_samples), dtype=np.uint64))
    vals = np.exp(-2j * np.pi * (xi @ lam))
    value = complex(vals.mean())
    spread = (vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / len(vals)
    return value, float(math.sqrt(spread))


def char_fn(model: NoiseModel, lam, mc_samples: int | None = None, seed: int = 0) -> complex:
    """psi(lambda) = E e^(-2 pi i <xi, lambda>); |psi| <= 1 always.

    Closed form when the model has one and ``mc_samples`` is omitted; the
    heavy-tailed radial model requires ``mc_samples`` (its standard error is
    available from :func:`char_fn_mc`).
    """
    if mc_samples is not None:
        return char_fn_mc(model, lam, mc_samples, seed)[0]
    lam = np.asarray(lam, dtype=np.float64).reshape(1, model.dim)
    return complex(char_fn_grid(model, lam)[0])


# ---------------------------------------------------------------------------
# recovery


def recover(spec: Spectrum, model: NoiseModel, guard: float = 1e-3) -> Spectrum:
    """Undo the noise on the Fourier side: amplitude / psi where safe.

    Nodes with |psi| < guard keep no value (NaN) and are flagged invalid;
    they are never divided.  Only models with closed-form psi are eligible —
    dividing by a Monte Carlo estimate would inject its sampling noise into
    every downstream comparison.
    """
    if not (guard > 0):
        raise InvalidArgumentError("guard must be positive")
    if model.dim != spec.grid.dim:
        raise InvalidArgumentError("noise model and spectrum dimensions differ")
    psi = char_fn_grid(model, spec.grid.nodes())
    good = spec.valid & (np.abs(psi) >= guard)
    amp = np.where(good, spec.amplitude / np.where(good, psi, 1.0), np.nan + 0j)
    power = np.where(
        good, spec.window_radius**spec.grid.dim * np.abs(amp) ** 2, np.nan
    )
    return Spectrum(spec.grid, spec.window_radius, spec.label, amp, power, good)


# ---------------------------------------------------------------------------
# boundary behavior and end-to-end trials


def displacement_margin(model: NoiseModel, seed: int = 0) -> float:
    """High quantile (99.9%) of the displacement length, by fixed-seed MC."""
    key = rng.stream_key(seed, f"margin:{model.kind}:{model.dim}")
    xi = _displacements(model, key, np.arange(_MARGIN_SAMPLES, dtype=np.uint64))
    return float(np.percentile(np.sqrt(sq_norms(xi)), _MARGIN_PERCENTILE))


@dataclass(frozen=True)
class BoundaryRecord:
    window_radius: float
    exits: int
    entries: int
    ratio: float  # (exits + entries) / window_radius^dim


@dataclass(frozen=True)
class BoundaryReport:
    margin: float
    records: tuple[BoundaryRecord, ...]


def boundary_crossings(x: PointSet, model: NoiseModel, seed: int, l_list) -> BoundaryReport:
    """Counts of window-membership changes caused by one perturbation.

    For each radius L: ``exits`` counts points of the window whose displaced
    position leaves the (strictly) open complement boundary |p + xi| > L,
    ``entries`` counts outside points whose displaced position lands at
    |p + xi| < L.  The declared extent must cover max(L) plus a reported
    high-quantile displacement margin, so no crossing is missed for lack of
    data.
    """
    if model.dim != x.dim:
        raise InvalidArgumentError("noise model and set dimensions differ")
    radii = [float(v) for v in l_list]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise InvalidArgumentError("l_list must be positive and strictly increasing")
    margin = displacement_margin(model)
    if max(radii) + margin > x.extent * (1.0 + 1e-12):
        raise InsufficientExtentError(
            f"need extent >= max radius + margin = {max(radii) + margin!r}, have {x.extent!r}"
        )
    key = rng.stream_key(seed, x.label)
    xi = _displacements(model, key, np.arange(len(x.points), dtype=np.uint64))
    before = np.sqrt(sq_norms(x.points))
    after = np.sqrt(sq_norms(x.points + xi))
    records = []
    for radius in radii:
        exits = int(((before <= radius) & (after > radius)).sum())
        entries = int(((before > radius) & (after < radius)).sum())
        records.append(
            BoundaryRecord(radius, exits, entries, (exits + entries) / radius**x.dim)
        )
    return BoundaryReport(margin, tuple(records))


@dataclass(frozen=True)
class RecoveryRow:
    lam: tuple[float, ...]
    true_amplitude: complex
    recovered: tuple[complex, ...]
    median_abs_error: float
    valid: bool


@dataclass(frozen=True)
class RecoveryReport:
    window_radius: float
    guard: float
    margin: float
    rows: tuple[RecoveryRow, ...]


def recovery_trial(
    x: PointSet,
    model: NoiseModel,
    seeds,
    lambdas,
    radius: float,
    guard: float = 1e-3,
) -> RecoveryReport:
    """Compare noise-undone amplitudes against the unperturbed truth.

    Each seed perturbs the whole set, windows the displaced points at the
    given radius, measures amplitudes at every requested frequency and
    divides by psi.  Frequencies with |psi| < guard are reported invalid
    (nothing is divided); if every frequency is invalid the trial is
    degenerate and raises.
    """
    if model.dim != x.dim:
        raise InvalidArgumentError("noise model and set dimensions differ")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise InvalidArgumentError("need at least one seed")
    lams = np.asarray(lambdas, dtype=np.float64).reshape(-1, x.dim)
    if len(lams) == 0:
        raise InvalidArgumentError("need at least one frequency")
    margin = displacement_margin(model)
    if radius > (x.extent - margin) * (1.0 + 1e-12):
        raise InsufficientExtentError(
            f"window radius {radius!r} exceeds extent minus margin {x.extent - margin!r}"
        )
    scale = radius**x.dim
    base = x.points[sq_norms(x.points) <= radius * radius]
    truth = _exp_sums(base, lams) / scale
    psi = char_fn_grid(model, lams)
    usable = np.abs(psi) >= guard
    if not usable.any():
        raise DegenerateTrialError("every requested frequency falls under the psi guard")
    per_seed = []
    for seed in seeds:
        moved = perturb(x, model, seed)
        pts = moved.points[sq_norms(moved.points) <= radius * radius]
        per_seed.append(_exp_sums(pts, lams) / scale)
    rows = []
    for i, lam in enumerate(lams):
        if usable[i]:
            rec = tuple(complex(vals[i] / psi[i]) for vals in per_seed)
            err = float(np.median([abs(r - truth[i]) for r in rec]))
        else:
            rec = ()
            err = math.nan
        rows.append(
            RecoveryRow(
                lam=tuple(float(v) for v in lam),
                true_amplitude=complex(truth[i]),
                recovered=rec,
                median_abs_error=err,
                valid=bool(usable[i]),
            )
        )
    return RecoveryReport(radius, guard, margin, tuple(rows))
