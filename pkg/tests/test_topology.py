import itertools
import math

import numpy as np
import pytest

from widthcert import (
    ball_length,
    ball_length_criterion,
    check_systole_vs_width,
    generators,
    girth,
    homology_systole_z2,
    tree_report,
)
from widthcert.spaces import from_graph
from widthcert.topology import ball_length_table, closed_surface, cocycle_basis


# ---------------------------------------------------------------------------
# brute-force oracles


def all_simple_cycles(n, edges, length_cap=math.inf):
    """Simple cycles up to a length bound as (edge index set, length)."""
    inc = [[] for _ in range(n)]
    for ei, (i, j, w) in enumerate(edges):
        inc[i].append((j, w, ei))
        inc[j].append((i, w, ei))
    seen = set()
    out = []

    def dfs(start, v, used_edges, used_verts, length):
        for u, w, ei in inc[v]:
            if ei in used_edges or length + w > length_cap:
                continue
            if u == start and len(used_edges) >= 1:
                key = frozenset(used_edges | {ei})
                if key not in seen:
                    seen.add(key)
                    out.append((key, length + w))
            elif u not in used_verts and u > start:
                # enumerate each cycle from its smallest vertex only
                dfs(start, u, used_edges | {ei}, used_verts | {u}, length + w)

    for s in range(n):
        dfs(s, s, frozenset(), frozenset({s}), 0.0)
    return out


def z2_boundary_space(edges, faces):
    """Echelon basis of the space spanned by face boundaries (bitmask rows)."""
    edge_ix = {}
    for ei, (i, j, _) in enumerate(edges):
        edge_ix[(min(i, j), max(i, j))] = ei
    rows = []
    for f in faces:
        row = 0
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[0], f[2])):
            row ^= 1 << edge_ix[(min(a, b), max(a, b))]
        rows.append(row)
    ech = {}
    for row in rows:
        while row:
            p = row.bit_length() - 1
            if p in ech:
                row ^= ech[p]
            else:
                ech[p] = row
                break
    return ech


def reduce_mod(ech, vec):
    while vec:
        p = vec.bit_length() - 1
        if p not in ech:
            return vec
        vec ^= ech[p]
    return 0


def brute_systole(space, length_cap):
    """Shortest nontrivial cycle among all simple cycles up to the cap.

    The cap must be a known upper bound for the systole (a wrap cycle of k
    axis edges always exists on a k x k torus, so k qualifies).
    """
    cycles = all_simple_cycles(space.n_points, space.edges, length_cap)
    ech = z2_boundary_space(space.edges, space.faces)
    best = math.inf
    for eset, length in cycles:
        vec = 0
        for ei in eset:
            vec ^= 1 << ei
        if reduce_mod(ech, vec):
            best = min(best, length)
    return best


# ---------------------------------------------------------------------------
# girth


def test_girth_circle():
    sp = generators.gen_circle(1.0, 0.01)
    wit = girth(sp)
    assert wit.length == pytest.approx(1.0, rel=1e-9)
    assert wit.nontrivial
    assert wit.vertices[0] == wit.vertices[-1]


def test_girth_tree_is_none():
    sp = generators.gen_random_tree(10, seed=4, h=0.3)
    assert girth(sp) is None


def test_girth_theta():
    sp = generators.gen_theta((1.0, 2.0, 3.0), 0.05)
    wit = girth(sp)
    assert wit.length == pytest.approx(3.0, rel=1e-9)


def test_girth_matches_bruteforce():
    rng = np.random.default_rng(8)
    for trial in range(6):
        n = int(rng.integers(5, 11))
        edges = [(int(rng.integers(0, k)), k, float(rng.uniform(0.3, 1.5)))
                 for k in range(1, n)]
        for _ in range(3):
            a, b = rng.integers(0, n, size=2)
            if a != b and not any({int(a), int(b)} == {i, j} for i, j, _ in edges):
                edges.append((int(a), int(b), float(rng.uniform(0.3, 1.5))))
        sp = from_graph(n, edges, resolution=1.5)
        cycles = all_simple_cycles(n, sp.edges)
        want = min((length for _, length in cycles), default=None)
        got = girth(sp)
        if want is None:
            assert got is None
        else:
            assert got.length == pytest.approx(want, rel=1e-9)


# ---------------------------------------------------------------------------
# homology systole


def test_torus_rank_two():
    sp = generators.gen_grid_torus(4)
    assert closed_surface(sp)
    assert len(cocycle_basis(sp)) == 2


def test_systole_3x3():
    sp = generators.gen_grid_torus(3)
    wit = homology_systole_z2(sp)
    assert wit.length == pytest.approx(3.0, rel=1e-9)
    assert wit.nontrivial and any(wit.homology_class)
    assert wit.length == pytest.approx(brute_systole(sp, 3.0 + 1e-9), rel=1e-9)


def test_systole_4x4():
    sp = generators.gen_grid_torus(4)
    wit = homology_systole_z2(sp)
    assert wit.length == pytest.approx(4.0, rel=1e-9)
    assert wit.length == pytest.approx(brute_systole(sp, 4.0 + 1e-9), rel=1e-9)


def test_sphere_has_no_systole():
    # the octahedron: 6 vertices, 12 unit edges, 8 faces; H1 = 0
    edges = []
    faces = []
    top, bot = 4, 5
    ring = [0, 1, 2, 3]
    for k in range(4):
        a, b = ring[k], ring[(k + 1) % 4]
        edges.append((a, b, 1.0))
        edges.append((min(a, top), max(a, top), 1.0))
        edges.append((min(a, bot), max(a, bot), 1.0))
        faces.append((a, b, top))
        faces.append((a, b, bot))
    sp = from_graph(6, edges, resolution=1.0, faces=faces)
    assert closed_surface(sp)
    assert homology_systole_z2(sp) is None


def test_systole_requires_closed_surface():
    sp = generators.gen_circle(1.0, 0.1)
    with pytest.raises(ValueError):
        homology_systole_z2(sp)


# ---------------------------------------------------------------------------
# metric trees


def test_tree_report_star():
    sp = generators.gen_star(3, 1.0)
    rep = tree_report(sp)
    assert rep.center == (0, 0, 0.0)  # the hub
    assert rep.radius == 1.0
    assert rep.x != rep.antipode
    assert sp.metric[rep.x, rep.antipode] == 2.0
    assert rep.pair_property_holds


def test_tree_report_path():
    sp = from_graph(3, [(0, 1, 1.0), (1, 2, 1.0)], resolution=1.0)
    rep = tree_report(sp)
    assert rep.center == (1, 1, 0.0)
    assert rep.radius == 1.0
    assert {rep.x, rep.antipode} == {0, 2}


def test_tree_report_single_edge():
    sp = from_graph(2, [(0, 1, 3.0)], resolution=3.0)
    rep = tree_report(sp)
    assert rep.radius == 1.5
    u, v, off = rep.center
    assert {u, v} == {0, 1} and off == 1.5


def test_tree_report_rejects_cycles():
    sp = generators.gen_circle(1.0, 0.25)
    with pytest.raises(ValueError):
        tree_report(sp)


def test_ball_length_table_matches_scalar():
    sp = generators.gen_star(3, 1.0, h=0.1)
    dist = sp.metric[0]
    ts = [0.3, 0.7, 1.4, 2.0]
    table = ball_length_table(sp, dist, ts)
    for t, got in zip(ts, table):
        assert got == pytest.approx(ball_length(sp, dist, t), rel=1e-12)


def test_star_ball_lengths_exact():
    sp = generators.gen_star(3, 1.0, h=0.1)
    hub = 0
    assert ball_length(sp, sp.metric[hub], 0.5) == pytest.approx(1.5, rel=1e-9)
    tip = max(range(sp.n_points), key=lambda v: sp.metric[hub, v])
    assert ball_length(sp, sp.metric[tip], 0.5) == pytest.approx(0.5, rel=1e-9)
    assert ball_length(sp, sp.metric[tip], 1.5) == pytest.approx(2.0, rel=1e-9)


def test_threshold_star():
    sp = generators.gen_star(3, 1.0, h=0.05)
    hold = ball_length_criterion(sp, 1.6)
    assert hold.hypothesis_holds
    assert hold.conclusion_holds
    assert max(hold.component_radii) == pytest.approx(1.0, rel=1e-9)
    fail = ball_length_criterion(sp, 1.4)
    assert not fail.hypothesis_holds
    assert fail.witness_point == 0  # the hub


def test_threshold_circle_fails_at_small_r():
    sp = generators.gen_circle(1.0, 0.01)
    rep = ball_length_criterion(sp, 0.4)
    assert not rep.hypothesis_holds


def test_threshold_circle_holds_past_half_length():
    sp = generators.gen_circle(1.0, 0.01)
    rep = ball_length_criterion(sp, 0.6)
    assert rep.hypothesis_holds
    assert rep.conclusion_holds


# ---------------------------------------------------------------------------
# systole versus width


def test_inequality_circle():
    sp = generators.gen_circle(1.0, 0.01)
    rep = check_systole_vs_width(sp, 1)
    assert rep["sys"] == pytest.approx(1.0, rel=1e-9)
    assert rep["sys"] <= 2 * rep["width_r"] + 2 * sp.resolution
    assert rep["ratio"] <= 1.0


def test_inequality_torus8():
    sp = generators.gen_grid_torus(8)
    rep = check_systole_vs_width(sp, 2)
    assert rep["sys"] == pytest.approx(8.0, rel=1e-9)
    assert rep["sys"] <= 2 * rep["width_r"] + 2 * sp.resolution


def test_inequality_skips_trees():
    sp = generators.gen_random_tree(8, seed=2, h=0.3)
    rep = check_systole_vs_width(sp, 1)
    assert "skipped" in rep
