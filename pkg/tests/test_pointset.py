import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasidiff.errors import (
    DuplicatePointError,
    InsufficientExtentError,
    InvalidArgumentError,
    SeamViolationError,
)
from quasidiff.pointset import (
    TAU,
    PointSet,
    ammann_beenker_config,
    fibonacci_cut_project_config,
    gen_cut_project,
    gen_fibonacci,
    gen_lattice,
    gen_poisson,
    gen_visible,
    remove_near,
    set_stats,
    sparse_union,
    splice,
    window,
)


# ---------------------------------------------------------------------------
# lattice generator


def test_lattice_1d_counts():
    x = gen_lattice(1, 1.0, 3.0)
    assert len(x) == 7
    assert np.array_equal(x.points[:, 0], np.arange(-3, 4))


def test_lattice_2d_count_matches_enumeration():
    x = gen_lattice(2, 1.0, 2.0)
    # independent oracle: exhaustive integer enumeration
    expected = {
        (m, n)
        for m in range(-2, 3)
        for n in range(-2, 3)
        if m * m + n * n <= 4
    }
    assert len(expected) == 13
    assert {tuple(map(int, p)) for p in x.points} == expected


def test_lattice_spacing_scales_sep_radius():
    x = gen_lattice(1, 0.5, 1.0)
    assert x.sep_radius == 0.5
    assert len(x) == 5


@pytest.mark.parametrize("spacing,extent", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
def test_lattice_rejects_nonpositive_arguments(spacing, extent):
    with pytest.raises(InvalidArgumentError):
        gen_lattice(1, spacing, extent)


# ---------------------------------------------------------------------------
# cut-and-project generator


def test_cut_project_fibonacci_matches_substitution_chain():
    cps = gen_cut_project(fibonacci_cut_project_config(100.0))
    fib = gen_fibonacci(100.0)
    a, b = cps.points[:, 0], fib.points[:, 0]
    best = math.inf
    for origin_a in a[np.abs(a) <= 3.0]:
        for origin_b in b[np.abs(b) <= 3.0]:
            shifted = np.sort(a - (origin_a - origin_b))
            idx = np.clip(np.searchsorted(shifted, b), 1, len(shifted) - 1)
            near = np.minimum(
                np.abs(shifted[idx] - b), np.abs(shifted[idx - 1] - b)
            )
            matched = int((near < 1e-6).sum())
            best = min(best, (len(a) + len(b) - 2 * matched) / (2 * 100.0))
    assert best < 1e-3


def test_cut_project_ammann_beenker_density_stability():
    d100 = len(gen_cut_project(ammann_beenker_config(100.0))) / 100.0**2
    d200 = len(gen_cut_project(ammann_beenker_config(200.0))) / 200.0**2
    assert abs(d100 - d200) / d200 < 0.02


# ---------------------------------------------------------------------------
# Fibonacci chain


def test_fibonacci_prefix_word():
    x = gen_fibonacci(6.0)
    nonneg = x.points[x.points[:, 0] >= -1e-12][:, 0]
    expected = [0.0, TAU, TAU + 1.0, 2 * TAU + 1.0, 3 * TAU + 1.0]
    assert np.allclose(nonneg[: len(expected)], expected, atol=1e-9)


def test_fibonacci_gap_alphabet():
    x = gen_fibonacci(500.0)
    gaps = np.diff(x.points[:, 0])
    assert math.isclose(gaps.min(), 1.0, rel_tol=1e-12)
    assert math.isclose(gaps.max(), TAU, rel_tol=1e-12)
    # only the two tile lengths occur
    assert np.all(
        (np.abs(gaps - 1.0) < 1e-9) | (np.abs(gaps - TAU) < 1e-9)
    )


def test_fibonacci_density():
    x = gen_fibonacci(1001.0)
    count = int((np.abs(x.points[:, 0]) <= 1000.0).sum())
    assert abs(count / 1000.0 - 1.447) / 1.447 < 0.01


# ---------------------------------------------------------------------------
# visible lattice points


def test_visible_small_window():
    x = gen_visible(2.0)
    got = {tuple(map(int, p)) for p in x.points}
    assert got == {
        (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1),
    }


def test_visible_membership():
    pts = {tuple(map(int, p)) for p in gen_visible(3.0).points}
    assert (1, 0) in pts
    assert (2, 0) not in pts


def test_visible_density():
    x = gen_visible(500.0)
    assert abs(len(x) / 500.0**2 - 6 / math.pi) / (6 / math.pi) < 0.02


# ---------------------------------------------------------------------------
# Poisson generator


def test_poisson_determinism():
    a = gen_poisson(1.0, 1, 100.0, seed=12)
    b = gen_poisson(1.0, 1, 100.0, seed=12)
    assert np.array_equal(a.points, b.points)
    c = gen_poisson(1.0, 1, 100.0, seed=13)
    assert not np.array_equal(a.points, c.points)


def test_poisson_intensity_calibration():
    counts = [len(gen_poisson(1.0, 1, 100.0, seed=s)) for s in range(50)]
    assert 0.95 <= np.mean(counts) / 200.0 <= 1.05


def test_poisson_flagged_not_uniformly_discrete():
    assert gen_poisson(1.0, 1, 50.0, seed=0).sep_radius == 0.0


# ---------------------------------------------------------------------------
# window


def test_window_basic():
    z = gen_lattice(1, 1.0, 100.0)
    assert np.array_equal(window(z, 2.5).points[:, 0], [-2, -1, 0, 1, 2])


def test_window_closed_ball_boundary():
    z = gen_lattice(1, 1.0, 100.0)
    assert np.array_equal(window(z, 2.0).points[:, 0], [-2, -1, 0, 1, 2])


def test_window_fibonacci():
    w = window(gen_fibonacci(10.0), 2.0)
    nonneg = sorted(p for p in w.points[:, 0] if p >= -1e-12)
    assert np.allclose(nonneg, [0.0, TAU], atol=1e-9)
    # the chain is two-sided, so the mirror tile endpoint is present too
    assert np.allclose(sorted(w.points[:, 0]), [-TAU, 0.0, TAU], atol=1e-9)


def test_window_preserves_metadata_and_sets_extent():
    z = gen_lattice(1, 1.0, 100.0)
    w = window(z, 7.0)
    assert w.extent == 7.0
    assert w.sep_radius == z.sep_radius
    assert w.label == z.label


def test_window_beyond_extent_fails():
    with pytest.raises(InsufficientExtentError):
        window(gen_lattice(1, 1.0, 10.0), 11.0)


@settings(max_examples=40, deadline=None)
@given(
    l1=st.floats(min_value=1.0, max_value=50.0),
    l2=st.floats(min_value=1.0, max_value=50.0),
)
def test_window_composition(l1, l2):
    z = gen_fibonacci(60.0)
    a = window(window(z, l1), min(l1, l2))
    b = window(z, min(l1, l2))
    assert np.array_equal(a.points, b.points)


# ---------------------------------------------------------------------------
# splice


def test_splice_identity():
    z = gen_lattice(1, 1.0, 50.0)
    assert splice(z, z, 5.0) == z


def test_splice_seam_violation():
    z = gen_lattice(1, 1.0, 50.0)
    zs_pts = np.arange(-50, 50) + 0.5
    zs = PointSet(1, 1.0, 50.0, zs_pts.reshape(-1, 1), "half-shift")
    with pytest.raises(SeamViolationError):
        splice(z, zs, 5.0)
    spliced = splice(z, zs, 5.0, allow_smaller=True)
    assert spliced.sep_radius == 0.5


def test_splice_count_identity_2d():
    inner = gen_lattice(2, 1.0, 10.0)
    outer = gen_cut_project(ammann_beenker_config(10.0))
    s = splice(inner, outer, 3.0, allow_smaller=True)
    n_inner = int((np.linalg.norm(inner.points, axis=1) <= 3.0).sum())
    n_annulus = int((np.linalg.norm(outer.points, axis=1) > 3.0).sum())
    assert len(s) == n_inner + n_annulus


# ---------------------------------------------------------------------------
# sparse union


def test_sparse_union_with_empty():
    z = gen_lattice(1, 1.0, 50.0)
    empty = PointSet(1, 1.0, 50.0, np.zeros((0, 1)), "empty")
    assert np.array_equal(sparse_union(z, empty).points, z.points)


def test_sparse_union_measured_separation():
    z = gen_lattice(1, 1.0, 1000.0)
    extras = PointSet(
        1, 1.0, 1000.0,
        np.array([[k * k + 0.5] for k in range(2, 32)]), "squares+half",
    )
    assert sparse_union(z, extras).sep_radius == 0.5


def test_sparse_union_duplicate_point_rejected():
    z = gen_lattice(1, 1.0, 10.0)
    dup = PointSet(1, 1.0, 10.0, np.array([[4.0]]), "dup")
    with pytest.raises(DuplicatePointError):
        sparse_union(z, dup)


def test_sparse_union_autocorrelation_pairing_gap():
    from quasidiff.measures import TestFunction, autocorrelation, pair

    z = gen_lattice(1, 1.0, 10050.0)
    extras = PointSet(
        1, 1.0, 10050.0,
        np.array([[k * k + 0.5] for k in range(2, 32)]), "squares+half",
    )
    u = sparse_union(z, extras)
    f = TestFunction((1.0,), 1.0, 1.0)
    gap = abs(
        pair(autocorrelation(u, 10000.0, max_range=2.5), f)
        - pair(autocorrelation(z, 10000.0, max_range=2.5), f)
    )
    assert gap < 0.02
    # exact value: 30 extras x 4 ordered pairs x tent value 0.5 / 10^4
    assert math.isclose(gap, 0.006, abs_tol=1e-9)


# ---------------------------------------------------------------------------
# remove_near


def test_remove_near_exact_targets():
    z = gen_lattice(1, 1.0, 50.0)
    out = remove_near(z, [(4.0,), (9.0,), (16.0,)], 0.1)
    gone = set(z.points[:, 0]) - set(out.points[:, 0])
    assert gone == {4.0, 9.0, 16.0}


def test_remove_near_no_match_is_silent():
    z = gen_lattice(1, 1.0, 50.0)
    out = remove_near(z, [(4.5,)], 0.1)
    assert np.array_equal(out.points, z.points)


def test_remove_near_tol_bound():
    z = gen_lattice(1, 1.0, 50.0)
    with pytest.raises(InvalidArgumentError):
        remove_near(z, [(4.0,)], 0.5)


def test_remove_near_quartic_removal_count_growth():
    fib = gen_fibonacci(10100.0)
    coords = fib.points[:, 0]
    targets = []
    for k in range(1, 11):
        t = float(k) ** 4
        i = np.searchsorted(coords, t)
        if i >= len(coords) or (i > 0 and abs(coords[i - 1] - t) < abs(coords[i] - t)):
            i -= 1
        targets.append((float(coords[i]),))
    thinned = remove_near(fib, targets, 0.25)
    removed = np.setdiff1d(coords, thinned.points[:, 0])
    assert len(removed) == 10
    radii = np.array([16.0, 81.0, 256.0, 625.0, 1296.0, 2401.0, 4096.0, 6561.0, 10000.0])
    counts = np.array([(np.abs(removed) <= r).sum() for r in radii])
    slope = np.polyfit(np.log(radii), np.log(counts), 1)[0]
    assert abs(slope - 0.25) <= 0.05


# ---------------------------------------------------------------------------
# set_stats


def test_set_stats_lattice():
    z = gen_lattice(1, 1.0, 200.0)
    stats = set_stats(z, [100.0])
    assert stats.min_gap == 1.0
    assert stats.counts[0] == 201
    assert math.isclose(stats.densities[0], 2.01, rel_tol=1e-12)


def test_set_stats_visible_density():
    stats = set_stats(gen_visible(500.0), [500.0])
    assert abs(stats.densities[0] - 6 / math.pi) / (6 / math.pi) < 0.02


def test_set_stats_fibonacci_density():
    stats = set_stats(gen_fibonacci(1001.0), [1000.0])
    assert abs(stats.densities[0] - 1.447) / 1.447 < 0.01


def test_set_stats_empty():
    empty = PointSet(1, 1.0, 10.0, np.zeros((0, 1)), "empty")
    stats = set_stats(empty, [5.0])
    assert stats.min_gap is None
    assert stats.counts[0] == 0


# ---------------------------------------------------------------------------
# invariants


def _generators():
    yield gen_lattice(1, 1.0, 200.0), [1.0, 7.0, 50.0, 200.0]
    yield gen_lattice(2, 1.0, 40.0), [1.0, 5.0, 40.0]
    yield gen_fibonacci(200.0), [1.0, 7.0, 50.0, 200.0]
    yield gen_visible(40.0), [1.0, 5.0, 40.0]
    yield gen_cut_project(fibonacci_cut_project_config(200.0)), [1.0, 50.0, 200.0]
    yield gen_cut_project(ammann_beenker_config(40.0)), [1.0, 5.0, 40.0]


def test_counting_bound_every_generator():
    for x, radii in _generators():
        norms = np.linalg.norm(x.points, axis=1)
        for radius in radii:
            if radius < x.sep_radius:
                continue
            count = int((norms <= radius).sum())
            assert count <= (3 * radius / x.sep_radius) ** x.dim, (x.label, radius)


def test_translate_box_count_bound():
    # packing bound: disjoint r0/2 balls around points in a box fit in the
    # inflated box
    for x, _ in _generators():
        r0 = x.sep_radius
        d = x.dim
        if d == 1:
            inflated = 2.0 + r0
            unit_ball = 2.0
        else:
            inflated = 4.0 + 4 * 2 * (r0 / 2) + math.pi * (r0 / 2) ** 2
            unit_ball = math.pi
        bound = (2.0 / r0) ** d * inflated / unit_ball
        centers = np.arange(-(x.extent - 1.5), x.extent - 1.0, 0.5)
        for c in centers[:: max(1, len(centers) // 40)]:
            center = np.full(d, float(c))
            inside = np.all(np.abs(x.points - center) <= 1.0, axis=1)
            assert int(inside.sum()) <= bound + 1e-9, (x.label, c)


def test_generator_determinism():
    assert gen_fibonacci(300.0) == gen_fibonacci(300.0)
    assert gen_visible(30.0) == gen_visible(30.0)
    a = gen_cut_project(ammann_beenker_config(30.0))
    b = gen_cut_project(ammann_beenker_config(30.0))
    assert np.array_equal(a.points, b.points)
