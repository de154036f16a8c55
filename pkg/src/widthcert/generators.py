"""Deterministic instance generators.

Every generator returns a :class:`DiscreteSpace` whose JSON document is a
pure function of the parameters (and seed), so repeated runs are
byte-identical.  Long edges are subdivided down to the resolution h, which
keeps shells impassable (no adjacency step exceeds the shell width).
"""

from __future__ import annotations

import math

import numpy as np

from .spaces import DiscreteSpace, from_graph, from_point_set

__all__ = [
    "gen_interval",
    "gen_circle",
    "gen_star",
    "gen_random_tree",
    "gen_theta",
    "gen_grid_torus",
    "gen_random_points",
    "generate",
]


def gen_interval(length: float = 1.0, h: float = 0.01) -> DiscreteSpace:
    """Path graph sampling the segment [0, length] at pitch h."""
    if length <= 0 or h <= 0:
        raise ValueError("length and h must be positive")
    segs = max(1, round(length / h))
    step = length / segs
    edges = [(i, i + 1, step) for i in range(segs)]
    return from_graph(
        segs + 1, edges, resolution=step,
        meta={"shape": "interval", "length": length, "h": h},
    )


def gen_circle(length: float = 1.0, h: float = 0.01) -> DiscreteSpace:
    """Cycle graph sampling a circle of the given circumference."""
    if length <= 0 or h <= 0:
        raise ValueError("length and h must be positive")
    n = max(3, round(length / h))
    step = length / n
    edges = [(i, (i + 1) % n, step) for i in range(n)]
    return from_graph(
        n, edges, resolution=step,
        meta={"shape": "circle", "length": length, "h": h},
    )


def _subdivided(edges, n, h):
    """Split every edge into pieces of length <= h; returns (n', edges')."""
    out = []
    nxt = n
    for i, j, w in edges:
        pieces = max(1, math.ceil(w / h - 1e-12))
        step = w / pieces
        prev = i
        for k in range(pieces - 1):
            out.append((prev, nxt, step))
            prev = nxt
            nxt += 1
        out.append((prev, j, step))
    return nxt, out


def gen_star(legs: int = 3, leg_length: float = 1.0, h: float | None = None) -> DiscreteSpace:
    """Star tree: ``legs`` edges of equal length from a hub.

    Without h the raw star is returned (exact tree analysis does not need
    subdivision); with h each leg is subdivided to that pitch.
    """
    if legs < 1 or leg_length <= 0:
        raise ValueError("need legs >= 1 and positive leg_length")
    edges = [(0, k + 1, leg_length) for k in range(legs)]
    meta = {"shape": "star", "legs": legs, "leg_length": leg_length}
    if h is None:
        return from_graph(legs + 1, edges, resolution=leg_length, meta=meta)
    n, sub = _subdivided(edges, legs + 1, h)
    res = max(w for _, _, w in sub)
    return from_graph(n, sub, resolution=res, meta=dict(meta, h=h))


def gen_random_tree(
    n_edges: int = 20,
    seed: int = 0,
    h: float | None = None,
    length_range: tuple[float, float] = (0.5, 1.5),
) -> DiscreteSpace:
    """Random tree: vertex k >= 1 attaches to a uniform earlier vertex."""
    if n_edges < 1:
        raise ValueError("need at least one edge")
    rng = np.random.default_rng(seed)
    lo, hi = length_range
    edges = []
    for k in range(1, n_edges + 1):
        p = int(rng.integers(0, k))
        w = float(rng.uniform(lo, hi))
        edges.append((p, k, w))
    meta = {"shape": "tree", "n_edges": n_edges, "seed": seed}
    if h is None:
        res = max(w for _, _, w in edges)
        return from_graph(n_edges + 1, edges, resolution=res, meta=meta)
    n, sub = _subdivided(edges, n_edges + 1, h)
    res = max(w for _, _, w in sub)
    return from_graph(n, sub, resolution=res, meta=dict(meta, h=h))


def gen_theta(
    lengths: tuple[float, float, float] = (1.0, 2.0, 3.0), h: float = 0.05
) -> DiscreteSpace:
    """Theta graph: two hubs joined by three arcs of the given lengths."""
    if len(lengths) != 3 or min(lengths) <= 0:
        raise ValueError("three positive arc lengths required")
    edges = [(0, 1, float(w)) for w in lengths]
    n, sub = _subdivided(edges, 2, h)
    res = max(w for _, _, w in sub)
    return from_graph(
        n, sub, resolution=res,
        meta={"shape": "theta", "lengths": list(lengths), "h": h},
    )


def gen_grid_torus(k: int = 8) -> DiscreteSpace:
    """k x k unit grid torus, squares split along the (i+j even) diagonal.

    k^2 vertices, 2 k^2 unit axis edges, k^2 diagonals of length sqrt(2),
    2 k^2 triangular faces.  Resolution sqrt(2) (the longest adjacency).
    """
    if k < 3:
        raise ValueError("torus needs k >= 3")
    n = k * k

    def vid(i, j):
        return (i % k) * k + (j % k)

    edges = []
    for i in range(k):
        for j in range(k):
            edges.append((vid(i, j), vid(i + 1, j), 1.0))
            edges.append((vid(i, j), vid(i, j + 1), 1.0))
    diag = []
    faces = []
    for i in range(k):
        for j in range(k):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            if (i + j) % 2 == 0:
                diag.append((min(a, d), max(a, d), math.sqrt(2.0)))
                faces.append((a, b, d))
                faces.append((a, c, d))
            else:
                diag.append((min(b, c), max(b, c), math.sqrt(2.0)))
                faces.append((a, b, c))
                faces.append((b, c, d))
    return from_graph(
        n,
        edges + diag,
        resolution=math.sqrt(2.0),
        faces=faces,
        meta={"shape": "grid-torus", "k": k},
    )


def gen_random_points(
    n: int = 20, seed: int = 0, dim: int = 2, epsilon: float = 0.35
) -> DiscreteSpace:
    """n uniform points in the unit square (dim=2) or cube (dim=3).

    Euclidean metric; the resolution equals the declared connectivity
    scale epsilon, so shells are never jumped by an adjacency edge.
    """
    if n < 1 or dim not in (2, 3) or epsilon <= 0:
        raise ValueError("need n >= 1, dim in {2,3}, epsilon > 0")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, dim))
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    return from_point_set(
        d, epsilon=epsilon, resolution=epsilon,
        meta={"shape": "random-points", "n": n, "seed": seed, "dim": dim},
    )


_SHAPES = {
    "interval": gen_interval,
    "circle": gen_circle,
    "star": gen_star,
    "tree": gen_random_tree,
    "theta": gen_theta,
    "grid-torus": gen_grid_torus,
    "random-points": gen_random_points,
}


def generate(shape: str, **params) -> DiscreteSpace:
    """Dispatch by shape name; see the individual generators for params."""
    try:
        fn = _SHAPES[shape]
    except KeyError:
        raise ValueError(
            f"unknown shape {shape!r}; pick one of {sorted(_SHAPES)}"
        ) from None
    return fn(**params)
