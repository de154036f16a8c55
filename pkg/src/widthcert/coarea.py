"""Shell selection by the coarea averaging argument.

Given a covering of the annulus Annulus(x, r1, r2) intersected with Y by
balls of radii r_i, every width-h shell S at nominal radius s gets the
weight  w(s) = sum of r_i^(m-1) over the balls that meet S and Y.  The
weight upper-bounds the (m-1)-content of the shell trace (the touching
balls cover it), and a counting argument bounds the best shell:

* a ball of radius r_i meets at most (2 r_i / h) + 1 shells, so the mean
  shell weight is at most sum_i r_i^(m-1) (2 r_i + h) / (K h), where K is
  the number of whole shells inside the annulus;
* hence some shell satisfies w(s) <= that bound, which converges to
  2 * (covering value) / (r2 - r1) as h -> 0.

``select_shell`` returns the minimum-weight shell together with the
certified bound and the touching-ball indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .content import Covering, content_greedy, content_exact, DEFAULT_EXACT_BUDGET, ball_cost
from .spaces import DiscreteSpace, distance_slack, shell_indices

__all__ = ["CoareaSelection", "IntervalTooNarrow", "select_shell", "shell_weights"]


class IntervalTooNarrow(ValueError):
    """The annulus is too narrow (< 3h) to contain a usable shell."""


@dataclass(frozen=True)
class CoareaSelection:
    """Outcome of a shell selection.

    ``certified_bound`` is valid for the weight of the selected shell (in
    fact for the minimum weight): it is the counting bound described in the
    module docstring, computed from the covering that was averaged over.
    """

    s: float
    k: int
    shell: frozenset[int]
    weight: float
    certified_bound: float
    touched: tuple[int, ...]
    covering: Covering
    m: float
    x: int
    r1: float
    r2: float
    n_shells: int
    all_weights: tuple[tuple[float, float], ...] = field(repr=False, default=())


def _shell_grid(space: DiscreteSpace, r1: float, r2: float) -> list[int]:
    """Indices k of whole shells [kh, (k+1)h) inside [r1, r2)."""
    h = space.resolution
    k_lo = max(int(math.ceil(r1 / h - 1e-12)), 0)
    k_hi = int(math.floor(r2 / h + 1e-12)) - 1
    return list(range(k_lo, k_hi + 1))


def shell_weights(
    space: DiscreteSpace, Y, x: int, r1: float, r2: float, m: float, covering: Covering
) -> list[tuple[int, float, tuple[int, ...]]]:
    """(k, weight, touched indices) for every whole shell in the annulus."""
    h = space.resolution
    y_idx = np.fromiter((int(p) for p in sorted(Y)), dtype=np.int64)
    sidx = shell_indices(space, x)[y_idx] if y_idx.size else np.zeros(0, dtype=np.int64)
    ball_masks = []
    for c, r in covering.balls:
        ball_masks.append(space.metric[c, y_idx] <= r + distance_slack(r))
    out = []
    for k in _shell_grid(space, r1, r2):
        in_shell = sidx == k
        touched = tuple(
            i for i, mask in enumerate(ball_masks) if bool((mask & in_shell).any())
        )
        w = math.fsum(ball_cost(covering.balls[i][1], m - 1) for i in touched)
        out.append((k, w, touched))
    return out


def select_shell(
    space: DiscreteSpace,
    Y,
    x: int,
    r1: float,
    r2: float,
    m: float,
    covering: Covering | None = None,
    max_points: int = DEFAULT_EXACT_BUDGET,
) -> CoareaSelection:
    """Pick the minimum-weight shell in the annulus (r1, r2) around x.

    When no covering is supplied, one is computed for Annulus(x,r1,r2) & Y
    (exact within the point budget, greedy beyond it).  Ties go to the
    smallest nominal radius.
    """
    space.check_point(x)
    h = space.resolution
    if not 0 <= r1 < r2:
        raise ValueError("need 0 <= r1 < r2")
    if r2 - r1 < 3 * h - 1e-12:
        raise IntervalTooNarrow(f"annulus width {r2 - r1} < 3h = {3 * h}")
    Y = frozenset(int(p) for p in Y)
    # the covering target is the union of the whole shells (the grid form of
    # the annulus): then every shell trace is covered by some listed ball,
    # so the minimum weight always upper-bounds the shell-trace content
    grid = _shell_grid(space, r1, r2)
    sidx = shell_indices(space, x)
    target = frozenset(
        p for p in Y if grid[0] <= sidx[p] <= grid[-1]
    )
    if covering is None:
        if len(target) <= max_points:
            covering = content_exact(space, target, m, max_points=max_points).witness
        else:
            covering = content_greedy(space, target, m).witness
    else:
        if not covering.covers(space, target):
            raise ValueError("supplied covering does not cover the shell-grid annulus in Y")

    rows = shell_weights(space, Y, x, r1, r2, m, covering)
    K = len(rows)
    bound = math.fsum(
        ball_cost(r, m - 1) * (2.0 * r + h) for _, r in covering.balls
    ) / (K * h)
    best = min(range(K), key=lambda i: (rows[i][1], rows[i][0]))
    k, w, touched = rows[best]
    if w > bound + 1e-9 * max(1.0, abs(bound)):
        raise AssertionError("coarea bound violated; this is a bug")
    hsh = frozenset(np.nonzero(shell_indices(space, x) == k)[0].tolist())
    return CoareaSelection(
        s=(k + 0.5) * h,
        k=k,
        shell=hsh,
        weight=w,
        certified_bound=bound,
        touched=touched,
        covering=covering,
        m=m,
        x=x,
        r1=r1,
        r2=r2,
        n_shells=K,
        all_weights=tuple(((kk + 0.5) * h, ww) for kk, ww, _ in rows),
    )
