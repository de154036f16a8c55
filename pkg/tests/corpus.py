"""Fixed instance corpus shared by the unit and acceptance suites.

Every instance is deterministic.  ``n`` is the multiplicity bound the
width pipeline runs at for that instance (1 for one-dimensional shapes,
2 for tori and planar point clouds).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from widthcert import DiscreteSpace, from_point_set, generators


@dataclass(frozen=True)
class Instance:
    name: str
    space: DiscreteSpace
    n: int


def two_unit_pairs() -> DiscreteSpace:
    d = np.zeros((4, 4))
    for i, j, v in [(0, 1, 1.0), (2, 3, 1.0), (0, 2, 10.0), (0, 3, 10.5),
                    (1, 2, 10.5), (1, 3, 10.0)]:
        d[i, j] = d[j, i] = v
    return from_point_set(d, epsilon=1.0, resolution=1.0)


def dyadic_point_set(n: int, seed: int, h: float = 0.125) -> DiscreteSpace:
    """Points on a dyadic grid with the Chebyshev metric: every distance,
    candidate radius and cost is an exact dyadic float, so independently
    computed optima agree bit for bit."""
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 17, size=(n, 2)) / 16.0
    d = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
    return from_point_set(d, epsilon=0.5, resolution=h)


def build_corpus() -> list[Instance]:
    out = [
        # small instances (<= 12 points) double as width-oracle fodder
        Instance("path5", generators.gen_interval(1.0, 0.25), 1),
        Instance("circle8", generators.gen_circle(1.0, 0.125), 1),
        Instance("pairs4", two_unit_pairs(), 1),
        Instance("star4", generators.gen_star(4, 1.0), 1),
        Instance("cloud8", generators.gen_random_points(8, seed=3), 2),
        Instance("cloud12", generators.gen_random_points(12, seed=5), 2),
        # one-dimensional shapes at working resolution
        Instance("interval101", generators.gen_interval(1.0, 0.01), 1),
        Instance("interval2", generators.gen_interval(2.0, 0.02), 1),
        Instance("circle100", generators.gen_circle(1.0, 0.01), 1),
        Instance("circle50", generators.gen_circle(0.5, 0.01), 1),
        Instance("theta123", generators.gen_theta((1.0, 2.0, 3.0), 0.05), 1),
        Instance("tree12", generators.gen_random_tree(12, seed=1, h=0.2), 1),
        Instance("tree20", generators.gen_random_tree(20, seed=2, h=0.25), 1),
        Instance("star3sub", generators.gen_star(3, 1.0, h=0.1), 1),
        # surfaces
        Instance("torus4", generators.gen_grid_torus(4), 2),
        Instance("torus8", generators.gen_grid_torus(8), 2),
        Instance("torus16", generators.gen_grid_torus(16), 2),
        # point clouds
        Instance("cloud20", generators.gen_random_points(20, seed=7), 2),
        Instance("cloud35", generators.gen_random_points(35, seed=11), 2),
        Instance("cloud50", generators.gen_random_points(50, seed=13), 2),
    ]
    return out


def small_instances(corpus) -> list[Instance]:
    return [inst for inst in corpus if inst.space.n_points <= 12]
