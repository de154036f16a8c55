"""Systoles, metric trees, and the systole-versus-width check.

Metric graphs are treated as genuine one-dimensional length spaces: ball
lengths are computed by clipping edges at the ball boundary, so the checks
here are exact up to float arithmetic and independent of the sampling
pitch.  Cycle classes live in Z2 homology; a cycle pairs against a basis of
cocycles (edge labellings vanishing on every face boundary, modulo vertex
coboundaries), which makes class evaluation a popcount.

The systole of a graph is its girth by edge length (every graph cycle is
non-contractible).  On a closed triangulated surface the homology systole
is the shortest edge cycle with nonzero Z2 class; every Z2-nontrivial cycle
is non-contractible, so the value can only overshoot the true systole,
never undercut it.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass

import numpy as np

from .content import DEFAULT_EXACT_BUDGET, content_exact, content_greedy
from .spaces import DiscreteSpace, components, dump_space, radius
from .width import bound_width

__all__ = [
    "CycleWitness",
    "TreeReport",
    "ThresholdReport",
    "InequalityViolation",
    "girth",
    "homology_systole_z2",
    "systole",
    "cocycle_basis",
    "closed_surface",
    "is_essential_instance",
    "ball_length",
    "ball_length_table",
    "tree_report",
    "ball_length_criterion",
    "check_systole_vs_width",
]


class InequalityViolation(AssertionError):
    """The systole exceeded twice the certified width bound.

    The inequality is a theorem, so raising this means a bug (or a
    non-essential instance slipped through the guard).
    """


@dataclass(frozen=True)
class CycleWitness:
    vertices: tuple[int, ...]  # closed walk: first == last
    length: float
    homology_class: tuple[int, ...]
    nontrivial: bool


@dataclass(frozen=True)
class TreeReport:
    center: tuple[int, int, float]  # (u, v, offset along u->v); u == v at a vertex
    radius: float
    x: int
    antipode: int
    rows: tuple[dict, ...]
    pair_property_holds: bool


@dataclass(frozen=True)
class ThresholdReport:
    r: float
    hypothesis_holds: bool
    witness_point: int | None
    witness_table: tuple[tuple[float, float], ...]
    conclusion_holds: bool | None
    component_radii: tuple[float, ...]


# ---------------------------------------------------------------------------
# graph plumbing


def _incidence(space: DiscreteSpace):
    inc: list[list[tuple[int, float, int]]] = [[] for _ in range(space.n_points)]
    for ei, (i, j, w) in enumerate(space.edges):
        inc[i].append((j, w, ei))
        inc[j].append((i, w, ei))
    return inc


def _dijkstra(space, inc, root, skip_edge=None):
    n = space.n_points
    dist = [math.inf] * n
    parent = [-1] * n  # incoming edge index
    dist[root] = 0.0
    heap = [(0.0, root)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w, ei in inc[u]:
            if ei == skip_edge:
                continue
            nd = d + w
            if nd < dist[v] - 1e-15:
                dist[v] = nd
                parent[v] = ei
                heapq.heappush(heap, (nd, v))
    return dist, parent


def _walk_to_root(space, parent, v):
    """(vertices v..root, edge indices) following parent pointers."""
    verts = [v]
    eix = []
    while parent[v] != -1:
        ei = parent[v]
        i, j, _ = space.edges[ei]
        v = j if v == i else i
        verts.append(v)
        eix.append(ei)
    return verts, eix


# ---------------------------------------------------------------------------
# GF(2) linear algebra on edge vectors packed into ints


def _insert(echelon: dict[int, int], vec: int) -> int:
    """Reduce vec against the echelon, inserting the residue if nonzero."""
    while vec:
        piv = vec.bit_length() - 1
        if piv in echelon:
            vec ^= echelon[piv]
        else:
            echelon[piv] = vec
            return vec
    return 0


def _gf2_nullspace(rows: list[int], ncols: int) -> list[int]:
    pivots: dict[int, int] = {}
    for row in rows:
        _insert(pivots, row)
    # reduced echelon: clear pivot columns from the other rows
    for p in sorted(pivots, reverse=True):
        for q in list(pivots):
            if q != p and (pivots[q] >> p) & 1:
                pivots[q] ^= pivots[p]
    basis = []
    for f in range(ncols):
        if f in pivots:
            continue
        vec = 1 << f
        for p, row in pivots.items():
            if (row >> f) & 1:
                vec |= 1 << p
        basis.append(vec)
    return basis


def cocycle_basis(space: DiscreteSpace) -> list[int]:
    """Z2 cocycles modulo coboundaries, packed as edge bitmasks.

    The pairing of a basis element with a closed edge cycle is a homology
    invariant; the basis is empty exactly when every cycle bounds.  For a
    bare metric graph (no faces) this is a basis dual to the cycle space.
    """
    E = len(space.edges)
    face_rows: list[int] = []
    if space.faces:
        edge_ix: dict[tuple[int, int], int] = {}
        for ei, (i, j, _) in enumerate(space.edges):
            edge_ix.setdefault((min(i, j), max(i, j)), ei)
        for f in space.faces:
            row = 0
            for a, b in ((f[0], f[1]), (f[1], f[2]), (f[0], f[2])):
                ei = edge_ix.get((min(a, b), max(a, b)))
                if ei is None:
                    raise ValueError("face references a missing edge")
                row ^= 1 << ei
            face_rows.append(row)
    cocycles = _gf2_nullspace(face_rows, E)
    cob: dict[int, int] = {}
    for v in range(space.n_points):
        row = 0
        for ei, (i, j, _) in enumerate(space.edges):
            if i == v or j == v:
                row ^= 1 << ei
        _insert(cob, row)
    basis: list[int] = []
    quo = dict(cob)
    for vec in cocycles:
        if _insert(quo, vec):
            basis.append(vec)
    return basis


def closed_surface(space: DiscreteSpace) -> bool:
    if space.kind != "grid-surface" or not space.faces:
        return False
    count: dict[tuple[int, int], int] = {}
    for f in space.faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[0], f[2])):
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    edge_keys = set((min(i, j), max(i, j)) for i, j, _ in space.edges)
    return set(count) == edge_keys and all(c == 2 for c in count.values())


# ---------------------------------------------------------------------------
# systoles


def _class_bits(basis: list[int], edge_mask: int) -> tuple[int, ...]:
    return tuple(bin(alpha & edge_mask).count("1") & 1 for alpha in basis)


def _shortest_nontrivial(space: DiscreteSpace, basis: list[int]) -> CycleWitness:
    """Shortest cycle with nonzero class: tree-path-plus-edge candidates
    over every root.  A globally shortest nontrivial cycle contains a root
    from which it splits into two shortest paths and one edge, so the scan
    is exhaustive; clean candidates (paths sharing only the root) are
    preferred among ties so the witness length is exact."""
    E = len(space.edges)
    ebits = [0] * E
    for bi, alpha in enumerate(basis):
        for ei in range(E):
            if (alpha >> ei) & 1:
                ebits[ei] |= 1 << bi
    inc = _incidence(space)
    best_val = math.inf
    best_rank: tuple = (2,)
    best_struct = None
    for root in range(space.n_points):
        dist, parent = _dijkstra(space, inc, root)
        phi = [0] * space.n_points
        for v in sorted(
            (v for v in range(space.n_points) if math.isfinite(dist[v])),
            key=lambda v: (dist[v], v),
        ):
            ei = parent[v]
            if ei == -1:
                continue
            i, j, _ = space.edges[ei]
            u = j if v == i else i
            phi[v] = phi[u] ^ ebits[ei]
        for ei, (i, j, w) in enumerate(space.edges):
            if parent[i] == ei or parent[j] == ei:
                continue
            if not (math.isfinite(dist[i]) and math.isfinite(dist[j])):
                continue
            if not (phi[i] ^ phi[j] ^ ebits[ei]):
                continue
            val = dist[i] + dist[j] + w
            if val > best_val + 1e-12:
                continue
            vi, exi = _walk_to_root(space, parent, i)
            vj, exj = _walk_to_root(space, parent, j)
            clean = not (set(exi) & set(exj))
            rank = (0 if clean else 1, root, ei)
            if val < best_val - 1e-12 or (val <= best_val + 1e-12 and rank < best_rank):
                best_val = min(val, best_val)
                best_rank = rank
                best_struct = (vi, exi, vj, exj, ei, val)
    vi, exi, vj, exj, ei, val = best_struct
    cycle = list(reversed(vi)) + list(reversed(vj))[1:]
    cycle.append(cycle[0])
    mask = 1 << ei
    for e in exi + exj:
        mask ^= 1 << e
    return CycleWitness(tuple(cycle), val, _class_bits(basis, mask), True)


def girth(space: DiscreteSpace) -> CycleWitness | None:
    """Shortest cycle by total edge length, or None for forests."""
    if space.kind not in ("metric-graph", "grid-surface"):
        raise ValueError("girth needs a graph-backed space")
    inc = _incidence(space)
    best = None
    for ei, (i, j, w) in enumerate(space.edges):
        dist, parent = _dijkstra(space, inc, i, skip_edge=ei)
        if not math.isfinite(dist[j]):
            continue
        val = dist[j] + w
        if best is None or val < best[0] - 1e-12:
            best = (val, ei)
            best_parent = parent
    if best is None:
        return None
    val, ei = best
    verts, eix = _walk_to_root(space, best_parent, space.edges[ei][1])
    cycle = list(verts) + [verts[0]]  # j .. i, closed by the skipped edge
    mask = 1 << ei
    for e in eix:
        mask ^= 1 << e
    basis = cocycle_basis(space)
    bits = _class_bits(basis, mask)
    return CycleWitness(tuple(cycle), val, bits, any(bits) or not basis)


def homology_systole_z2(space: DiscreteSpace) -> CycleWitness | None:
    """Shortest Z2-homologically nontrivial edge cycle of a closed surface.

    Returns None when every cycle bounds (sphere-like surfaces).
    """
    if not closed_surface(space):
        raise ValueError(
            "homology systole needs a closed grid-surface "
            "(every edge in exactly two faces)"
        )
    basis = cocycle_basis(space)
    if not basis:
        return None
    return _shortest_nontrivial(space, basis)


def systole(space: DiscreteSpace) -> CycleWitness | None:
    if space.kind == "grid-surface":
        return homology_systole_z2(space)
    return girth(space)


def is_essential_instance(space: DiscreteSpace) -> bool:
    if space.kind == "grid-surface":
        return closed_surface(space) and bool(cocycle_basis(space))
    if space.kind == "metric-graph":
        return girth(space) is not None
    return False


# ---------------------------------------------------------------------------
# metric trees


def ball_length(space: DiscreteSpace, dist, t: float) -> float:
    """Total edge length within distance t of the point whose vertex
    distances are ``dist``; edges are clipped exactly at the boundary."""
    total = 0.0
    for i, j, L in space.edges:
        a = min(max(t - dist[i], 0.0), L)
        b = min(max(t - dist[j], 0.0), L)
        total += min(L, a + b)
    return total


def ball_length_table(space: DiscreteSpace, dist, ts) -> np.ndarray:
    """Vector of clipped ball lengths, one per radius in ``ts``."""
    ui = np.fromiter((e[0] for e in space.edges), dtype=np.int64)
    vi = np.fromiter((e[1] for e in space.edges), dtype=np.int64)
    L = np.fromiter((e[2] for e in space.edges), dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)[:, None]
    a = np.clip(ts - dist[ui][None, :], 0.0, L[None, :])
    b = np.clip(ts - dist[vi][None, :], 0.0, L[None, :])
    return np.minimum(L[None, :], a + b).sum(axis=1)


def _assert_tree(space: DiscreteSpace):
    if space.kind != "metric-graph":
        raise ValueError("tree analysis needs a metric-graph space")
    if len(components(space, range(space.n_points))) != 1:
        raise ValueError("tree analysis needs a connected graph")
    if len(space.edges) != space.n_points - 1:
        raise ValueError("input graph has a cycle")


def tree_report(space: DiscreteSpace) -> TreeReport:
    """Centre, radius and antipodal pair of a metric tree, with the
    two-sided ball-length table.

    The centre is the midpoint of a diametral path (possibly inside an
    edge), so d(centre, x) = d(centre, x') = R exactly and the shortest
    x-x' path passes through it.  For t up to R the balls B(x,t) and
    B(x',t) hold disjoint initial segments of that path, so their total
    length is at least 2t; the table records both lengths and the check.
    """
    _assert_tree(space)
    inc = _incidence(space)
    d0, _ = _dijkstra(space, inc, 0)
    a = min(range(space.n_points), key=lambda v: (-d0[v], v))
    da, pa = _dijkstra(space, inc, a)
    b = min(range(space.n_points), key=lambda v: (-da[v], v))
    diam = da[b]
    R = diam / 2.0
    verts, _ = _walk_to_root(space, pa, b)
    path = list(reversed(verts))  # a .. b
    center = (a, a, 0.0)
    acc = 0.0
    for u, v in zip(path, path[1:]):
        w = float(space.metric[u, v])
        if acc + w >= R - 1e-15:
            off = R - acc
            if off <= 1e-12:
                center = (u, u, 0.0)
            elif off >= w - 1e-12:
                center = (v, v, 0.0)
            else:
                center = (u, v, off)
            break
        acc += w
    db, _ = _dijkstra(space, inc, b)
    h = space.resolution
    grid = []
    t = h
    while t < R - 1e-12:
        grid.append(t)
        t += h
    grid.append(R)
    ts = np.asarray(grid)
    lx = ball_length_table(space, da, ts)
    ly = ball_length_table(space, db, ts)
    rows = []
    ok = True
    for t, gx, gy in zip(grid, lx.tolist(), ly.tolist()):
        good = gx + gy >= 2 * t - 1e-9 * max(1.0, 2 * t)
        ok &= good
        rows.append({"t": t, "ball_x": gx, "ball_antipode": gy, "pair": gx + gy})
    return TreeReport(center, R, a, b, tuple(rows), ok)


def ball_length_criterion(space: DiscreteSpace, r: float) -> ThresholdReport:
    """Check at every vertex for some t in (0, r] with ball length < 2t.

    When every vertex has one, the advertised conclusion is verified too:
    each component's vertex radius is below r.  Otherwise the first vertex
    without one is reported along with its ball-length table.
    """
    if space.kind not in ("metric-graph", "grid-surface"):
        raise ValueError("ball-length criterion needs a graph-backed space")
    h = space.resolution
    grid = []
    t = h
    while t < r - 1e-12:
        grid.append(t)
        t += h
    grid.append(r)
    ts = np.asarray(grid)
    for x in range(space.n_points):
        lengths = ball_length_table(space, space.metric[x], ts)
        good = lengths < 2 * ts - 1e-12 * np.maximum(1.0, 2 * ts)
        if not good.any():
            return ThresholdReport(
                r=r,
                hypothesis_holds=False,
                witness_point=x,
                witness_table=tuple(zip(grid, lengths.tolist())),
                conclusion_holds=None,
                component_radii=(),
            )
    radii = tuple(
        radius(space, comp)[0] for comp in components(space, range(space.n_points))
    )
    return ThresholdReport(
        r=r,
        hypothesis_holds=True,
        witness_point=None,
        witness_table=(),
        conclusion_holds=all(rr < r for rr in radii),
        component_radii=radii,
    )


# ---------------------------------------------------------------------------
# systole versus certified width


def check_systole_vs_width(
    space: DiscreteSpace,
    n: int,
    tolerance: float | None = None,
    max_points: int = DEFAULT_EXACT_BUDGET,
) -> dict:
    """Compute the systole and a certified width bound; check sys <= 2r.

    The width bound runs at r = 4 n (content upper bound)^(1/n) (1 + 1e-3),
    where the small-ball hypothesis holds automatically.  The check allows
    a 2h discretisation slack.  Non-essential instances are reported as
    skipped rather than checked.
    """
    digest = hashlib.sha256(dump_space(space).encode()).hexdigest()[:16]
    if not is_essential_instance(space):
        return {"skipped": "not an essential instance", "instance": digest}
    wit = systole(space)
    Y = space.all_points()
    if len(Y) <= max_points:
        hc = content_exact(space, Y, float(n), max_points=max_points)
    else:
        hc = content_greedy(space, Y, float(n))
    r = 4.0 * n * hc.value ** (1.0 / n) * (1.0 + 1e-3)
    cert = bound_width(space, Y, n, r, max_points=max_points)
    slack = 2.0 * space.resolution if tolerance is None else tolerance
    if wit.length > 2.0 * cert.r + slack:
        raise InequalityViolation(
            f"systole {wit.length} exceeds 2 * certified width {cert.r} + {slack}"
        )
    return {
        "sys": wit.length,
        "cycle": list(wit.vertices),
        "width_r": cert.r,
        "ratio": wit.length / (2.0 * cert.r),
        "instance": digest,
        "n": n,
        "content_upper": hc.value,
        "multiplicity": cert.cover.multiplicity,
    }
