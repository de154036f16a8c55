"""Finite representations of compact metric spaces.

A :class:`DiscreteSpace` is an immutable bundle of

* an indexed point set ``0 .. n_points-1``,
* a full symmetric distance table (``numpy`` float64),
* an adjacency relation used for connectivity, and
* a resolution ``h`` > 0: each point stands for a cell of diameter <= h.

Three kinds are supported: ``point-set`` (explicit metric plus a declared
connectivity scale epsilon), ``metric-graph`` (shortest-path metric over an
edge-length graph) and ``grid-surface`` (a metric graph with a triangle list,
so cycles can be classified by homology).

Metric spheres are realised as width-``h`` shells: ``shell(x, s)`` collects
the points with ``d(x, .) in [s - h/2, s + h/2)``.  Shells at the nominal
radii ``(k + 1/2) h``, k >= 0, partition the whole space; the innermost shell
contains the centre itself (distance-0 points stand in for all sphere radii
below ``h``).

All values are immutable after construction and every operation is a pure
function of its inputs, so concurrent use of a shared space is safe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

__all__ = [
    "DiscreteSpace",
    "SpaceFormatError",
    "ball",
    "shell",
    "annulus",
    "nominal_shell_radii",
    "shell_indices",
    "distance_slack",
    "components",
    "radius",
    "load_space",
    "dump_space",
    "space_from_document",
    "space_document",
]

KINDS = ("point-set", "metric-graph", "grid-surface")

_METRIC_TOL = 1e-9


class SpaceFormatError(ValueError):
    """Raised when a space document or constructor input is invalid."""


@dataclass(frozen=True)
class DiscreteSpace:
    """Immutable finite metric space.

    Attributes
    ----------
    kind:
        One of ``point-set``, ``metric-graph``, ``grid-surface``.
    metric:
        (n, n) float64 distance table, read-only.
    resolution:
        Sampling pitch h > 0.
    neighbors:
        Tuple of sorted integer tuples; ``neighbors[i]`` are the points
        adjacent to i.
    edges:
        For graph kinds, the ``(i, j, length)`` list defining the metric.
        For point sets, the epsilon-neighborhood pairs.
    faces:
        Triangle list for ``grid-surface`` spaces, else None.
    epsilon:
        Declared connectivity scale for point sets, else None.
    """

    kind: str
    metric: np.ndarray
    resolution: float
    neighbors: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int, float], ...] = ()
    faces: tuple[tuple[int, int, int], ...] | None = None
    epsilon: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_points(self) -> int:
        return self.metric.shape[0]

    @property
    def step(self) -> float:
        """Largest distance between adjacent points (0.0 if no edges)."""
        if self.kind == "point-set":
            return float(self.epsilon)
        if not self.edges:
            return 0.0
        return max(w for _, _, w in self.edges)

    @property
    def diameter(self) -> float:
        finite = self.metric[np.isfinite(self.metric)]
        return float(finite.max()) if finite.size else 0.0

    def all_points(self) -> frozenset[int]:
        return frozenset(range(self.n_points))

    def check_point(self, x: int) -> None:
        if not (0 <= x < self.n_points):
            raise IndexError(f"point index {x} out of range [0, {self.n_points})")


def _validate_metric(d: np.ndarray) -> None:
    n = d.shape[0]
    if d.shape != (n, n):
        raise SpaceFormatError("metric table must be square")
    if (d < 0).any():
        raise SpaceFormatError("metric has negative entries")
    if (np.abs(np.diag(d)) > 0).any():
        raise SpaceFormatError("metric has nonzero diagonal entries")
    if not np.array_equal(d, d.T):
        raise SpaceFormatError("metric is not symmetric")
    scale = max(d.max(), 1.0)
    tol = _METRIC_TOL * scale
    for k in range(n):
        # d(i,j) <= d(i,k) + d(k,j), checked one pivot at a time to keep
        # memory at O(n^2)
        if (d > d[:, [k]] + d[[k], :] + tol).any():
            raise SpaceFormatError(f"triangle inequality fails through point {k}")


def _neighbors_from_pairs(n: int, pairs) -> tuple[tuple[int, ...], ...]:
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i, j in pairs:
        if i == j:
            continue
        nbrs[i].add(j)
        nbrs[j].add(i)
    return tuple(tuple(sorted(s)) for s in nbrs)


def _graph_metric(n: int, edges) -> np.ndarray:
    if not edges:
        return np.zeros((n, n)) if n <= 1 else np.full((n, n), np.inf)
    ii = [e[0] for e in edges] + [e[1] for e in edges]
    jj = [e[1] for e in edges] + [e[0] for e in edges]
    ww = [e[2] for e in edges] * 2
    g = coo_matrix((ww, (ii, jj)), shape=(n, n)).tocsr()
    d = dijkstra(g, directed=False)
    np.fill_diagonal(d, 0.0)
    return d


def from_point_set(metric, epsilon: float, resolution: float, meta=None) -> DiscreteSpace:
    """Build a point-set space from an explicit distance table.

    The connectivity scale epsilon is mandatory: connected components of a
    bare metric are not defined without it.
    """
    d = np.asarray(metric, dtype=np.float64).copy()
    if epsilon is None or epsilon < 0:
        raise SpaceFormatError("point-set spaces require a connectivity scale epsilon >= 0")
    if resolution is None or resolution <= 0:
        raise SpaceFormatError("resolution must be positive")
    _validate_metric(d)
    n = d.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if d[i, j] <= epsilon]
    d.setflags(write=False)
    return DiscreteSpace(
        kind="point-set",
        metric=d,
        resolution=float(resolution),
        neighbors=_neighbors_from_pairs(n, pairs),
        edges=tuple((i, j, float(d[i, j])) for i, j in pairs),
        epsilon=float(epsilon),
        meta=dict(meta or {}),
    )


def from_graph(n: int, edges, resolution: float, faces=None, meta=None) -> DiscreteSpace:
    """Build a metric-graph (or grid-surface, when faces are given) space.

    The distance table is the all-pairs shortest-path metric over the edge
    lengths.  Parallel edges are allowed; the table uses the shortest one.
    """
    if resolution is None or resolution <= 0:
        raise SpaceFormatError("resolution must be positive")
    edges = tuple((int(i), int(j), float(w)) for i, j, w in edges)
    for i, j, w in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise SpaceFormatError(f"edge ({i},{j}) out of range")
        if i == j:
            raise SpaceFormatError("self-loop edges are not allowed")
        if w <= 0:
            raise SpaceFormatError("edge lengths must be positive")
    d = _graph_metric(n, edges)
    if np.isinf(d).any() and n > 1:
        # disconnected graphs are legal; keep inf for cross-component pairs
        pass
    kind = "metric-graph"
    fc = None
    if faces is not None:
        fc = tuple(tuple(int(v) for v in f) for f in faces)
        for f in fc:
            if len(f) != 3:
                raise SpaceFormatError("faces must be triangles")
        kind = "grid-surface"
    d.setflags(write=False)
    return DiscreteSpace(
        kind=kind,
        metric=d,
        resolution=float(resolution),
        neighbors=_neighbors_from_pairs(n, [(i, j) for i, j, _ in edges]),
        edges=edges,
        faces=fc,
        meta=dict(meta or {}),
    )


# ---------------------------------------------------------------------------
# subset operations


def _as_indices(space: DiscreteSpace, subset) -> np.ndarray:
    idx = np.fromiter((int(p) for p in subset), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= space.n_points):
        raise IndexError("subset contains invalid point indices")
    return np.sort(idx)


def distance_slack(r: float) -> float:
    """Comparison slack for accumulated shortest-path distances.

    Graph distances are sums of edge lengths, so a point meant to sit at
    radius 0.25 may land at 0.25 + 5e-17; boundary comparisons snap by a
    deterministic relative tolerance so such points land where the
    represented geometry puts them.
    """
    return 1e-9 * max(1.0, abs(r))


def _snapped(d: np.ndarray) -> np.ndarray:
    return d + 1e-9 * np.maximum(1.0, d)


def ball(space: DiscreteSpace, x: int, r: float) -> frozenset[int]:
    """Closed metric ball: the points within distance r of x."""
    space.check_point(x)
    if r < 0:
        raise ValueError("ball radius must be >= 0")
    return frozenset(np.nonzero(space.metric[x] <= r + distance_slack(r))[0].tolist())


def shell(space: DiscreteSpace, x: int, s: float) -> frozenset[int]:
    """Width-h shell around radius s: points with d(x,.) in [s-h/2, s+h/2).

    The discrete stand-in for the metric sphere of radius s.  May be empty.
    The innermost shell (s < h) contains the centre and its duplicates,
    standing in for all sphere radii below h.
    """
    space.check_point(x)
    if s <= 0:
        raise ValueError("shell radius must be positive")
    h = space.resolution
    d = _snapped(space.metric[x])
    lo, hi = s - h / 2.0, s + h / 2.0
    return frozenset(np.nonzero((d >= lo) & (d < hi))[0].tolist())


def shell_indices(space: DiscreteSpace, x: int) -> np.ndarray:
    """Index k of the shell [kh, (k+1)h) holding each point (snapped).

    ``shell_indices(space, x) == k`` is exactly ``shell(space, x, (k+1/2)h)``,
    so the nominal-radius shells partition the whole space.
    """
    space.check_point(x)
    d = _snapped(space.metric[x])
    h = space.resolution
    idx = np.floor(d / h)
    return np.where(np.isfinite(idx), idx, 2**62).astype(np.int64)


def annulus(space: DiscreteSpace, x: int, r1: float, r2: float) -> frozenset[int]:
    """Annulus(x, r1, r2) = Ball(x, r2) minus Ball(x, r1): d in (r1, r2]."""
    space.check_point(x)
    if not r1 < r2:
        raise ValueError("annulus needs r1 < r2")
    d = space.metric[x]
    lo = r1 + distance_slack(r1)
    hi = r2 + distance_slack(r2)
    return frozenset(np.nonzero((d > lo) & (d <= hi))[0].tolist())


def nominal_shell_radii(space: DiscreteSpace, r1: float, r2: float) -> list[float]:
    """Nominal radii (k + 1/2) h of the shells contained in [r1, r2).

    A shell with nominal radius (k + 1/2) h occupies [k h, (k+1) h); only
    whole shells inside the annulus are listed, so the returned radii lie in
    the open interval (r1, r2).
    """
    h = space.resolution
    k_lo = int(np.ceil(r1 / h - 1e-12))
    k_hi = int(np.floor(r2 / h + 1e-12)) - 1
    return [(k + 0.5) * h for k in range(max(k_lo, 0), k_hi + 1)]


def components(space: DiscreteSpace, subset) -> list[frozenset[int]]:
    """Connected components of the adjacency relation restricted to subset.

    Returned in order of their smallest point index.
    """
    member = set(int(p) for p in subset)
    seen: set[int] = set()
    out: list[frozenset[int]] = []
    for start in sorted(member):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in space.neighbors[u]:
                if v in member and v not in comp:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        out.append(frozenset(comp))
    return out


def radius(space: DiscreteSpace, subset) -> tuple[float, int]:
    """Smallest ambient ball containing the subset: (radius, centre).

    Centres range over the whole space, not only over the subset.  Ties are
    broken toward the smallest centre index.
    """
    idx = _as_indices(space, subset)
    if idx.size == 0:
        raise ValueError("radius of an empty subset is undefined")
    worst = space.metric[:, idx].max(axis=1)
    c = int(np.argmin(worst))
    return float(worst[c]), c


# ---------------------------------------------------------------------------
# JSON space documents
#
# Distances travel as IEEE-double decimal strings (repr round-trips exactly),
# so a loaded document reproduces the distance table bit for bit.


def _num(x: float) -> str:
    return repr(float(x))


def space_document(space: DiscreteSpace) -> dict:
    doc: dict = {
        "kind": space.kind,
        "n_points": space.n_points,
        "resolution": space.resolution,
    }
    if space.kind == "point-set":
        d = space.metric
        tri = [_num(d[i, j]) for i in range(1, space.n_points) for j in range(i)]
        doc["metric"] = tri
        doc["epsilon"] = space.epsilon
    else:
        doc["edges"] = [[i, j, _num(w)] for i, j, w in space.edges]
        if space.kind == "grid-surface":
            doc["faces"] = [list(f) for f in space.faces]
    if space.meta:
        doc["meta"] = space.meta
    return doc


def space_from_document(doc: dict) -> DiscreteSpace:
    try:
        kind = doc["kind"]
        n = int(doc["n_points"])
        h = float(doc["resolution"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpaceFormatError(f"malformed space document: {exc}") from exc
    if kind not in KINDS:
        raise SpaceFormatError(f"unknown space kind {kind!r}")
    meta = doc.get("meta", {})
    if kind == "point-set":
        if "epsilon" not in doc:
            raise SpaceFormatError("point-set documents must declare epsilon")
        tri = doc.get("metric")
        if tri is None or len(tri) != n * (n - 1) // 2:
            raise SpaceFormatError("metric must hold n(n-1)/2 lower-triangular entries")
        d = np.zeros((n, n))
        it = iter(tri)
        for i in range(1, n):
            for j in range(i):
                d[i, j] = d[j, i] = float(next(it))
        return from_point_set(d, epsilon=float(doc["epsilon"]), resolution=h, meta=meta)
    edges = [(int(i), int(j), float(w)) for i, j, w in doc.get("edges", [])]
    faces = doc.get("faces") if kind == "grid-surface" else None
    if kind == "grid-surface" and not faces:
        raise SpaceFormatError("grid-surface documents must carry faces")
    return from_graph(n, edges, resolution=h, faces=faces, meta=meta)


def dump_space(space: DiscreteSpace) -> str:
    return json.dumps(space_document(space), sort_keys=True, separators=(",", ":")) + "\n"


def load_space(path) -> DiscreteSpace:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpaceFormatError(f"invalid JSON: {exc}") from exc
    return space_from_document(doc)
