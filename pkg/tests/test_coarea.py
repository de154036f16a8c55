import math

import numpy as np
import pytest

from widthcert import generators, select_shell
from widthcert.coarea import IntervalTooNarrow, shell_weights
from widthcert.content import Covering, content_exact


def test_interval_sharpness():
    # unit interval, one ball of radius ~1/2: every shell has weight 1 and
    # the certified bound is (2r + h)/(r2-r1) = 1 + h
    sp = generators.gen_interval(1.0, 0.01)
    cov = Covering(((50, 0.5),), sp.all_points(), 1.0)
    sel = select_shell(sp, sp.all_points(), 0, 0.0, 1.0, 1.0, covering=cov)
    assert sel.n_shells == 100
    assert all(w == 1.0 for _, w in sel.all_weights)
    assert sel.weight == 1.0
    assert sel.certified_bound == pytest.approx(1.0 + 0.01, rel=1e-12)


def test_empty_annulus_weight_zero():
    sp = generators.gen_interval(1.0, 0.01)
    # annulus far beyond the diameter: nothing to cover, weight 0
    sel = select_shell(sp, sp.all_points(), 0, 2.0, 3.0, 1.0)
    assert sel.weight == 0.0
    assert sel.covering.balls == ()
    assert sel.touched == ()


def test_selected_weight_bounds_shell_content():
    # the shell weight upper-bounds the exact content of the shell trace and
    # sits below the certified bound
    rng = np.random.default_rng(5)
    for seed in range(8):
        n = int(rng.integers(8, 21))
        sp = generators.gen_random_points(n, seed=seed, epsilon=0.15)
        m = 1.0 if seed % 2 else 2.0
        r2 = max(3 * sp.resolution + 1e-9, 0.8 * sp.diameter)
        sel = select_shell(sp, sp.all_points(), seed % n, 0.0, r2, m)
        ex = content_exact(sp, sel.shell, m - 1.0)
        assert ex.value <= sel.weight + 1e-12
        assert sel.weight <= sel.certified_bound + 1e-12


def test_averaging_identity():
    # mean shell weight == sum_i r_i^(m-1) * touched_count_i * h / (r2 - r1)
    # exactly, on grid-aligned annuli
    sp = generators.gen_circle(1.0, 0.01)
    cov = Covering(((0, 0.105), (30, 0.085), (60, 0.063)), frozenset(), 2.0)
    r1, r2 = 0.1, 0.4
    rows = shell_weights(sp, sp.all_points(), 5, r1, r2, 2.0, cov)
    K = len(rows)
    assert K == round((r2 - r1) / sp.resolution)
    mean = math.fsum(w for _, w, _ in rows) / K
    counts = [0] * len(cov.balls)
    for _, _, touched in rows:
        for i in touched:
            counts[i] += 1
    rhs = math.fsum(
        (r ** 1.0) * counts[i] * sp.resolution / (r2 - r1)
        for i, (_, r) in enumerate(cov.balls)
    )
    assert mean == pytest.approx(rhs, rel=1e-9)


def test_touched_counts_bounded_by_interval_length():
    # a ball of radius r meets at most 2r/h + 1 shells
    sp = generators.gen_circle(1.0, 0.01)
    cov = Covering(((10, 0.05), (40, 0.11)), frozenset(), 1.0)
    rows = shell_weights(sp, sp.all_points(), 0, 0.0, 0.5, 1.0, cov)
    counts = [0] * len(cov.balls)
    for _, _, touched in rows:
        for i in touched:
            counts[i] += 1
    h = sp.resolution
    for (_, r), c in zip(cov.balls, counts):
        assert c <= 2 * r / h + 1 + 1e-9


def test_narrow_interval_rejected():
    sp = generators.gen_interval(1.0, 0.01)
    with pytest.raises(IntervalTooNarrow):
        select_shell(sp, sp.all_points(), 0, 0.1, 0.12, 1.0)


def test_supplied_covering_must_cover():
    sp = generators.gen_interval(1.0, 0.01)
    bad = Covering(((0, 0.01),), sp.all_points(), 1.0)
    with pytest.raises(ValueError):
        select_shell(sp, sp.all_points(), 0, 0.0, 1.0, 1.0, covering=bad)


def test_bound_converges_with_refinement():
    # with the covering held fixed (one ball per side of the band), the
    # certified bound tends to 2 * (covering value) / (r2 - r1) as h -> 0
    r1, r2 = 0.1, 0.4
    value = 2 * 0.16
    target = 2.0 * value / (r2 - r1)
    errs = []
    for h in (0.02, 0.01, 0.005):
        sp = generators.gen_circle(1.0, h)
        n = sp.n_points
        mid = round(0.24 / h)
        cov = Covering(((mid, 0.16), (n - mid, 0.16)), sp.all_points(), 1.0)
        sel = select_shell(sp, sp.all_points(), 0, r1, r2, 1.0, covering=cov)
        errs.append(abs(sel.certified_bound - target))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.1 * target
