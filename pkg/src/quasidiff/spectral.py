"""Finite-window diffraction: exponential sums, periodograms, peak analysis,
and the singular-versus-absolutely-continuous evidence diagnostic.

The infinite-volume diffraction measure is approached through periodograms:
power(lambda) = |sum over the radius-L window of e^(-2 pi i <p, lambda>)|^2
divided by L^d.  Point-spectrum atoms show up as peaks of width ~1/L whose
integrated mass is stable as L doubles; an absolutely continuous component
shows up as a window-stable positive background.  Nothing at finite L can
*prove* spectral singularity — every verdict below ships with the raw
numbers and thresholds it was derived from.

Amplitude values are exp-sums divided by L^d, so power = L^d |amplitude|^2;
both are carried on an explicit rectangular :class:`FrequencyGrid`.
Summation order is fixed (numpy pairwise reduction over the point axis), so
results are bit-identical run to run regardless of chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptySpectrumError,
    InsufficientExtentError,
    InvalidArgumentError,
)
from .geometry import sq_norms
from .pointset import PointSet

_ENTRY_BUDGET = 4_000_000  # phase-matrix entries materialized per chunk

__all__ = [
    "FrequencyGrid",
    "Spectrum",
    "Peak",
    "PeakReport",
    "DiagnosticRow",
    "SingularityReport",
    "exp_sum",
    "amplitude_spectrum",
    "periodogram",
    "analyze_peaks",
    "singularity_diagnostic",
]


@dataclass(frozen=True)
class FrequencyGrid:
    """Rectangular grid of frequencies: per-axis (min, max, step) triples."""

    axes: tuple[tuple[float, float, float], ...]
    node_budget: int = 4_194_304

    def __post_init__(self):
        axes = tuple((float(a), float(b), float(s)) for a, b, s in self.axes)
        object.__setattr__(self, "axes", axes)
        if not axes:
            raise InvalidArgumentError("FrequencyGrid needs at least one axis")
        for lo, hi, step in axes:
            if not (step > 0) or not (hi > lo):
                raise InvalidArgumentError("each axis needs max > min and step > 0")
        if self.node_count > self.node_budget:
            raise InvalidArgumentError(
                f"grid would hold {self.node_count} nodes, over the budget of {self.node_budget}"
            )

    @property
    def dim(self) -> int:
        return len(self.axes)

    def _axis_count(self, i: int) -> int:
        lo, hi, step = self.axes[i]
        return int(math.floor((hi - lo) / step + 1e-9)) + 1

    def axis_values(self, i: int) -> np.ndarray:
        lo, hi, step = self.axes[i]
        return lo + step * np.arange(self._axis_count(i))

    @property
    def shape(self) -> tuple[int, ...]:
        # arithmetic only: the budget check runs before any array this size
        # may be allocated
        return tuple(self._axis_count(i) for i in range(self.dim))

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    def nodes(self) -> np.ndarray:
        """All grid nodes as an (M, d) array in lexicographic order."""
        axes = [self.axis_values(i) for i in range(self.dim)]
        if self.dim == 1:
            return axes[0].reshape(-1, 1)
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Amplitudes and power on a frequency grid, for one window radius.

    ``valid`` marks nodes carrying a defined value; noise-undoing division
    (see the perturbation module) blanks nodes where the divisor is too
    small, and every consumer must honor the mask.
    """

    grid: FrequencyGrid
    window_radius: float
    label: str
    amplitude: np.ndarray
    power: np.ndarray
    valid: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        m = self.grid.node_count
        amp = np.asarray(self.amplitude, dtype=np.complex128).reshape(-1)
        pw = np.asarray(self.power, dtype=np.float64).reshape(-1)
        valid = (
            np.ones(m, dtype=bool)
            if self.valid is None
            else np.asarray(self.valid, dtype=bool).reshape(-1)
        )
        if len(amp) != m or len(pw) != m or len(valid) != m:
            raise InvalidArgumentError("spectrum arrays must match the grid's node count")
        if not (self.window_radius > 0):
            raise InvalidArgumentError("window_radius must be positive")
        scale = self.window_radius**self.grid.dim
        expect = scale * (amp.real**2 + amp.imag**2)
        if not np.isfinite(pw[valid]).all() or not np.isfinite(amp[valid]).all():
            raise InvalidArgumentError("valid nodes must carry finite values")
        if (pw[valid] < 0).any():
            raise InvalidArgumentError("power must be nonnegative")
        tol = 1e-12 * np.maximum(np.abs(expect[valid]), 1.0)
        if (np.abs(pw[valid] - expect[valid]) > tol).any():
            raise InvalidArgumentError("power and amplitude are inconsistent")
        for arr in (amp, pw, valid):
            arr.flags.writeable = False
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "power", pw)
        object.__setattr__(self, "valid", valid)

    @classmethod
    def from_amplitude(
        cls,
        grid: FrequencyGrid,
        window_radius: float,
        label: str,
        amplitude: np.ndarray,
        valid: np.ndarray | None = None,
    ) -> "Spectrum":
        amp = np.asarray(amplitude, dtype=np.complex128).reshape(-1)
        power = window_radius**grid.dim * (amp.real**2 + amp.imag**2)
        return cls(grid, window_radius, label, amp, power, valid)

    def frequencies(self) -> np.ndarray:
        return self.grid.nodes()

    def __repr__(self) -> str:
        return (
            f"Spectrum(label={self.label!r}, L={self.window_radius!r}, "
            f"nodes={self.grid.node_count}, valid={int(self.valid.sum())})"
        )


# ---------------------------------------------------------------------------
# exponential sums


def _exp_sums(points: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """sum_p e^(-2 pi i <p, lambda>) for every frequency row, chunked."""
    n = len(points)
    m = len(freqs)
    out = np.zeros(m, dtype=np.complex128)
    if n == 0 or m == 0:
        return out
    chunk = max(1, _ENTRY_BUDGET // max(n, 1))
    for start in range(0, m, chunk):
        f = freqs[start : start + chunk]
        phases = f @ points.T  # (chunk, n)
        out[start : start + chunk] = np.exp((-2j * np.pi) * phases).sum(axis=1)
    return out


def exp_sum(x: PointSet, lam) -> complex:
    """Exponential sum of the whole set at one frequency; |result| <= #points."""
    lam = np.asarray(lam, dtype=np.float64).reshape(1, x.dim)
    return complex(_exp_sums(x.points, lam)[0])


def _windowed(x: PointSet, radius: float) -> np.ndarray:
    if radius > x.extent * (1.0 + 1e-12):
        raise InsufficientExtentError(
            f"window radius {radius!r} exceeds extent {x.extent!r} of {x.label or 'set'}"
        )
    return x.points[sq_norms(x.points) <= radius * radius]


def amplitude_spectrum(x: PointSet, radius: float, grid: FrequencyGrid) -> Spectrum:
    """Normalized transform on the window: exp-sum / radius^dim per node."""
    if grid.dim != x.dim:
        raise InvalidArgumentError("grid and point set dimensions differ")
    pts = _windowed(x, radius)
    sums = _exp_sums(pts, grid.nodes())
    return Spectrum.from_amplitude(grid, radius, x.label, sums / radius**x.dim)


def periodogram(x: PointSet, radius: float, grid: FrequencyGrid) -> Spectrum:
    """Same data with the power normalization |exp-sum|^2 / radius^dim."""
    return amplitude_spectrum(x, radius, grid)


# ---------------------------------------------------------------------------
# peak analysis


@dataclass(frozen=True)
class Peak:
    """One detected peak.  ``node_location`` is the grid node of the maximum;
    ``location`` adds the sub-step quadratic refinement."""

    node_location: float
    location: float
    height: float
    mass: float


@dataclass(frozen=True)
class PeakReport:
    peaks: tuple[Peak, ...]
    background_level: float
    background_mean: float
    support_boxes: tuple[tuple[float, float], ...]
    window_width: float
    threshold: float
    total_grid_mass: float

    @property
    def total_peak_mass(self) -> float:
        return float(sum(p.mass for p in self.peaks))

    @property
    def pure_point_fraction(self) -> float:
        if self.total_grid_mass <= 0:
            return 0.0
        return min(1.0, self.total_peak_mass / self.total_grid_mass)


def analyze_peaks(
    spec: Spectrum,
    x: PointSet | None = None,
    peak_window_width: float | None = None,
    threshold_ratio: float = 0.5,
) -> PeakReport:
    """Detect power peaks on a 1-d spectrum and integrate their masses.

    Peaks are strict local maxima at or above threshold_ratio * max power,
    thinned greedily (highest first) so surviving peaks are at least half a
    window width apart.  Each peak's location is refined by a quadratic fit
    through the three nodes around the maximum, its mass is the trapezoid
    integral of power over the width-wide interval centered there, and the
    background is the median (the mean is also reported) of power outside
    all peak intervals.  The intervals double as estimated support boxes.

    The optional point set is accepted for signature symmetry with the
    window-based operations and is not consulted.
    """
    if spec.grid.dim != 1:
        raise InvalidArgumentError("peak analysis is defined for 1-d spectra")
    if not spec.valid.all():
        raise InvalidArgumentError("peak analysis needs a fully valid spectrum")
    freqs = spec.grid.axis_values(0)
    power = spec.power
    if len(freqs) < 3:
        raise EmptySpectrumError("need at least three nodes to look for peaks")
    step = spec.grid.axes[0][2]
    width = 4.0 / spec.window_radius if peak_window_width is None else float(peak_window_width)
    if width < 2 * step * (1 - 1e-12):
        raise InvalidArgumentError("peak window width must cover at least two grid steps")

    top = float(power.max())
    threshold = threshold_ratio * top
    interior = np.arange(1, len(freqs) - 1)
    is_max = (power[interior] > power[interior - 1]) & (power[interior] > power[interior + 1])
    cand = interior[is_max & (power[interior] >= threshold)]
    cand = cand[np.argsort(-power[cand], kind="stable")]

    accepted: list[int] = []
    for idx in cand:
        if all(abs(freqs[idx] - freqs[j]) >= width / 2 for j in accepted):
            accepted.append(int(idx))

    peaks = []
    boxes = []
    outside = np.ones(len(freqs), dtype=bool)
    for idx in accepted:
        pm, p0, pp = power[idx - 1], power[idx], power[idx + 1]
        denom = pm - 2.0 * p0 + pp
        offset = 0.0 if denom == 0 else 0.5 * (pm - pp) / denom
        loc = float(freqs[idx] + offset * step)
        lo, hi = loc - width / 2, loc + width / 2
        sel = (freqs >= lo) & (freqs <= hi)
        mass = float(np.trapezoid(power[sel], freqs[sel])) if sel.sum() >= 2 else 0.0
        peaks.append(Peak(float(freqs[idx]), loc, float(p0), mass))
        boxes.append((lo, hi))
        outside &= ~sel
    order = np.argsort([p.location for p in peaks], kind="stable")
    peaks = tuple(peaks[i] for i in order)
    boxes = tuple(boxes[i] for i in order)

    rest = power[outside]
    bg_median = float(np.median(rest)) if len(rest) else 0.0
    bg_mean = float(rest.mean()) if len(rest) else 0.0
    return PeakReport(
        peaks=peaks,
        background_level=bg_median,
        background_mean=bg_mean,
        support_boxes=boxes,
        window_width=width,
        threshold=threshold,
        total_grid_mass=float(np.trapezoid(power, freqs)),
    )


# ---------------------------------------------------------------------------
# singular-vs-continuous evidence


@dataclass(frozen=True)
class DiagnosticRow:
    window_radius: float
    peak_count: int
    total_peak_mass: float
    background_level: float
    background_mean: float
    pure_point_fraction: float
    top_off_zero: tuple[Peak, ...]


@dataclass(frozen=True)
class SingularityReport:
    rows: tuple[DiagnosticRow, ...]
    verdict: str
    masses_stable: bool
    background_ratio: float
    background_fraction: float
    level_stable: bool
    thresholds: dict = field(
        default_factory=lambda: dict(_THRESHOLDS)
    )


_THRESHOLDS = {
    "background_over_top_peak": 0.01,
    "mass_drift_over_doubling": 0.05,
    "background_mass_fraction": 0.05,
    "level_stability": 0.25,
    "peak_threshold_ratio": 0.01,
}


def _off_zero(report: PeakReport) -> list[Peak]:
    return [p for p in report.peaks if abs(p.location) > report.window_width]


def singularity_diagnostic(
    x: PointSet,
    l_list,
    grid: FrequencyGrid,
    peak_window_width: float | None = None,
) -> SingularityReport:
    """Evidence for a point-dominant versus continuous-dominant spectrum.

    Periodograms at each radius are peak-analyzed (detection threshold 1% of
    the maximum, so small stable atoms are counted rather than swept into
    the background).  The verdict is:

    * "singular-dominant" — the top (up to five) off-zero peaks persist at
      every radius with mass drift < 5% over the last doubling, background
      stays below 1% of the top peak, and the continuous-mass estimate
      (median background times grid span, against the grid's total mass) is
      below 5%;
    * "AC-dominant" — no such stable off-zero peak family, band-averaged
      power stable within 25% over the last doubling, and the
      continuous-mass estimate at or above 5%;
    * "mixed" — anything else.

    Stability of the continuous level is judged on the average power over
    the whole grid, not over the leftover non-peak nodes: at small radii the
    peak windows can tile nearly the entire band, leaving so few background
    nodes that their mean swings wildly between radii even for a flat
    spectrum, while the all-node average concentrates.

    The median-times-span estimate, not the mass outside peak windows, is
    what separates a true continuous component from a dusting of atoms too
    small to detect: undetected atoms barely move the median.

    All raw numbers and thresholds ride along in the report.
    """
    radii = [float(v) for v in l_list]
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidArgumentError("need at least three strictly increasing window radii")
    if radii[-1] > x.extent * (1.0 + 1e-12):
        raise InsufficientExtentError("largest window radius exceeds the set's extent")

    reports = []
    for radius in radii:
        spec = periodogram(x, radius, grid)
        reports.append(
            analyze_peaks(
                spec,
                peak_window_width=peak_window_width,
                threshold_ratio=_THRESHOLDS["peak_threshold_ratio"],
            )
        )

    rows = []
    for radius, rep in zip(radii, reports):
        off = sorted(_off_zero(rep), key=lambda p: -p.height)[:5]
        rows.append(
            DiagnosticRow(
                window_radius=radius,
                peak_count=len(rep.peaks),
                total_peak_mass=rep.total_peak_mass,
                background_level=rep.background_level,
                background_mean=rep.background_mean,
                pure_point_fraction=rep.pure_point_fraction,
                top_off_zero=tuple(off),
            )
        )

    last, prev = reports[-1], reports[-2]
    tracked = rows[-1].top_off_zero
    match_tol = max(last.window_width, prev.window_width) / 2

    def find(peaks, loc, tol):
        best, dist = None, tol
        for p in peaks:
            d = abs(p.location - loc)
            if d <= dist:
                best, dist = p, d
        return best

    masses_stable = len(tracked) > 0
    for peak in tracked:
        for rep in reports[:-1]:
            mate = find(rep.peaks, peak.location, max(match_tol, rep.window_width / 2))
            if mate is None:
                masses_stable = False
                break
        if not masses_stable:
            break
        mate = find(prev.peaks, peak.location, match_tol)
        drift = abs(peak.mass - mate.mass) / max(abs(peak.mass), 1e-300)
        if drift >= _THRESHOLDS["mass_drift_over_doubling"]:
            masses_stable = False
            break

    top_height = max((p.height for p in last.peaks), default=0.0)
    bg_ratio = last.background_level / top_height if top_height > 0 else math.inf
    lo_axis, hi_axis, _ = grid.axes[0]
    span = hi_axis - lo_axis
    if last.total_grid_mass > 0:
        bg_frac = min(1.0, last.background_level * span / last.total_grid_mass)
    else:
        bg_frac = 0.0
    prev_avg = prev.total_grid_mass
    last_avg = last.total_grid_mass
    level_stable = last_avg > 0 and abs(last_avg - prev_avg) <= (
        _THRESHOLDS["level_stability"] * last_avg
    )

    if (
        masses_stable
        and bg_ratio < _THRESHOLDS["background_over_top_peak"]
        and bg_frac < _THRESHOLDS["background_mass_fraction"]
    ):
        verdict = "singular-dominant"
    elif (
        not masses_stable
        and level_stable
        and bg_frac >= _THRESHOLDS["background_mass_fraction"]
    ):
        verdict = "AC-dominant"
    else:
        verdict = "mixed"

    return SingularityReport(
        rows=tuple(rows),
        verdict=verdict,
        masses_stable=masses_stable,
        background_ratio=bg_ratio,
        background_fraction=bg_frac,
        level_stable=level_stable,
    )
