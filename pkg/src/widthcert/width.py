"""Constructive width certificates.

A width certificate for (Y, n, r) is a cover of Y by subsets, each inside an
ambient witness ball, with multiplicity <= n and every witness radius < r.
Such a cover bounds the (n-1)-dimensional radius-type width of Y by r: the
membership-pattern map sends Y into the nerve of the cover, a complex of
dimension <= n-1, and every fiber sits inside one cover set.

Construction is recursive.  The base case covers each group of connected
components that an empty shell cuts off (multiplicity 1).  For n >= 2 a
near-minimal r-separating subset Z is built by
:func:`widthcert.separators.minimize_separator`; its certified ball bounds
are exactly the hypothesis needed to cover Z at the smaller radius
rho = r (1 - 1/n) with multiplicity n - 1, and the cover of Z is then
extended over Y by adding the components of Y minus Z, raising the
multiplicity by at most one.

Discrete continuity.  Adjacent points are required to share a cover set
(otherwise the pattern map would tear edges apart and every space would
have width zero via singleton covers).  The constructors arrange this and
the small-instance oracle :func:`exact_width_small` enforces it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .coarea import IntervalTooNarrow
from .content import DEFAULT_EXACT_BUDGET, content_exact, content_greedy
from .separators import (
    HypothesisViolation,
    PreconditionFailed,
    SeparatorCertificate,
    is_separating,
    minimize_separator,
)
from .spaces import DiscreteSpace, ball, components, radius, shell_indices

__all__ = [
    "Cover",
    "NerveComplex",
    "WidthCertificate",
    "CoverConstructionError",
    "make_cover",
    "multiplicity_one_cover",
    "extend_cover",
    "bound_width",
    "nerve",
    "exact_width_small",
    "urysohn_width_bound",
]


class CoverConstructionError(RuntimeError):
    """A cover construction failed; the message names the witness."""


@dataclass(frozen=True)
class Cover:
    """A cover of ``target`` with per-set witness balls.

    ``multiplicity`` and ``max_radius`` are recomputed by
    :func:`make_cover`, never trusted from the caller.
    """

    sets: tuple[frozenset[int], ...]
    witnesses: tuple[tuple[int, float], ...]
    target: frozenset[int]
    multiplicity: int
    max_radius: float
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class NerveComplex:
    n_vertices: int
    maximal_simplices: tuple[tuple[int, ...], ...]
    dimension: int
    point_simplex: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class WidthCertificate:
    n: int
    r: float
    cover: Cover
    nerve: NerveComplex
    levels: tuple[SeparatorCertificate, ...] = ()
    notes: tuple[str, ...] = ()


def make_cover(space: DiscreteSpace, target, sets, witnesses, notes=()) -> Cover:
    """Assemble a cover, recomputing multiplicity and max radius.

    Verifies that the sets exactly cover the target and that each set lies
    inside its witness ball.
    """
    target = frozenset(int(p) for p in target)
    sets = tuple(frozenset(int(p) for p in s) for s in sets)
    witnesses = tuple((int(c), float(r)) for c, r in witnesses)
    if len(sets) != len(witnesses):
        raise ValueError("one witness ball per cover set required")
    union: set[int] = set()
    for s, (c, r) in zip(sets, witnesses):
        if not s:
            raise ValueError("cover sets must be nonempty")
        union |= s
        worst = max(space.metric[c, p] for p in s)
        if worst > r + 1e-12:
            raise ValueError(f"set is not inside its witness ball ({worst} > {r})")
    if union != target:
        raise ValueError("cover sets do not cover the target exactly")
    counts: dict[int, int] = {}
    for s in sets:
        for p in s:
            counts[p] = counts.get(p, 0) + 1
    mult = max(counts.values()) if counts else 0
    max_r = max((r for _, r in witnesses), default=0.0)
    return Cover(sets, witnesses, target, mult, max_r, tuple(notes))


# ---------------------------------------------------------------------------
# base case: multiplicity-1 covers from empty shells


def _usable_empty_shell(space, Yset, x, r):
    """Largest k such that the shell [kh,(k+1)h) around x misses Y and no
    Y-adjacency edge jumps it; None when there is no such shell below r."""
    h = space.resolution
    k_hi = int(math.floor(r / h + 1e-12)) - 1
    sidx = shell_indices(space, x)
    y_idx = np.fromiter(sorted(Yset), dtype=np.int64)
    sy = sidx[y_idx]
    for k in range(k_hi, 0, -1):
        if (sy == k).any():
            continue
        crossing = False
        for ui, u in enumerate(y_idx):
            if sy[ui] >= k:
                continue
            for v in space.neighbors[u]:
                if v in Yset and sidx[v] > k:
                    crossing = True
                    break
            if crossing:
                break
        if not crossing:
            return k
    return None


def multiplicity_one_cover(
    space: DiscreteSpace, Y, r: float, max_points: int = DEFAULT_EXACT_BUDGET
) -> Cover:
    """Cover Y with multiplicity 1 by grouping components inside empty shells.

    For each still-uncovered component, scan its points for an empty,
    uncrossable shell of nominal radius below r; everything of Y strictly
    inside that shell becomes (part of) one cover set.  The intended
    hypothesis - every r-ball trace has 1-content below r/2 - is checked
    up front and reported as a note when violated, since the construction
    can still succeed.
    """
    Y = frozenset(int(p) for p in Y)
    notes: list[str] = []
    if not Y:
        return make_cover(space, Y, (), (), notes)
    if r <= 0:
        raise ValueError("r must be positive")

    seen: set[frozenset] = set()
    for x in range(space.n_points):
        trace = ball(space, x, r) & Y
        if trace in seen:
            continue
        seen.add(trace)
        if len(trace) <= max_points:
            est = content_exact(space, trace, 1.0, max_points=max_points)
        else:
            est = content_greedy(space, trace, 1.0)
        if est.value >= r / 2.0:
            notes.append(
                f"ball-content hypothesis not met at center {x}: "
                f"HC_1 estimate {est.value:.6g} >= r/2 = {r / 2:.6g}"
            )
            break

    comps = components(space, Y)
    covered: set[int] = set()
    sets, witnesses = [], []
    h = space.resolution
    for ci, comp in enumerate(comps):
        if min(comp) in covered:
            continue
        placed = False
        for x in sorted(comp):
            k = _usable_empty_shell(space, Y, x, r)
            if k is None:
                continue
            sidx = shell_indices(space, x)
            inside = frozenset(p for p in Y if sidx[p] < k)
            group = [c for c in comps if min(c) not in covered and c & inside]
            for c in group:
                if not c <= inside:
                    raise AssertionError("component leaks through an empty shell; this is a bug")
            pts = frozenset().union(*group)
            rad = max(space.metric[x, p] for p in pts)
            if rad >= r:
                continue
            sets.append(pts)
            witnesses.append((x, rad))
            covered |= {min(c) for c in group}
            placed = True
            break
        if not placed:
            # no whole shell fits (r close to h, say) but the bare component
            # may still sit inside a radius-r ball
            rad, ctr = radius(space, comp)
            if rad < r:
                sets.append(comp)
                witnesses.append((ctr, rad))
                covered.add(min(comp))
                placed = True
        if not placed:
            raise CoverConstructionError(
                f"no empty shell below r = {r:.6g} around component "
                f"{sorted(comp)[:8]}{'...' if len(comp) > 8 else ''}: "
                "the ball-content hypothesis genuinely fails there"
            )
    return make_cover(space, Y, sets, witnesses, notes)


# ---------------------------------------------------------------------------
# cover extension over a separator


def extend_cover(
    space: DiscreteSpace,
    Y,
    Z,
    zcover: Cover,
    d: float,
    eta: float | None = None,
) -> Cover:
    """Extend a cover of the separator Z to a cover of Y.

    Each Z-cover set is enlarged to its trace on Y within an eta-
    neighbourhood (eta defaults to h), realised multiplicity-safely by
    attaching every nearby point to the sets of its nearest Z-point.  The
    connected components of Y minus Z are appended with their witness
    balls, so the multiplicity rises by at most one.  Edges between Z and
    its complement that end up with no common set are repaired by letting
    the component absorb the stranded Z-endpoint.
    """
    Y = frozenset(int(p) for p in Y)
    Z = frozenset(int(p) for p in Z)
    if zcover.target != Z:
        raise ValueError("zcover must cover exactly Z")
    ok, witnesses = is_separating(space, Y, Z, d)
    if not ok:
        raise ValueError("Z is not d-separating for Y")
    if not (Y - Z):
        return zcover
    base_eta = space.resolution if eta is None else eta
    comp_sets = [frozenset(c) for c, _, _ in witnesses]
    comp_wit = [(ctr, rad) for _, ctr, rad in witnesses]
    z_list = sorted(Z)
    zpattern: dict[int, frozenset[int]] = {
        p: frozenset(j for j, s in enumerate(zcover.sets) if p in s) for p in z_list
    }
    notes: list[str] = []

    eta_try = base_eta
    for _ in range(10):
        # nearest-Z assignment within eta
        assign: dict[int, int] = {}
        if z_list:
            zi = np.asarray(z_list)
            for q in sorted(Y - Z):
                dz = space.metric[q, zi]
                j = int(np.argmin(dz))
                if dz[j] <= eta_try:
                    assign[q] = int(zi[j])
        enlarged = [set(s) for s in zcover.sets]
        for q, zq in assign.items():
            for j in zpattern[zq]:
                enlarged[j].add(q)

        # multiplicity among enlarged sets must not exceed the input's
        emult = 0
        counts: dict[int, int] = {}
        for s in enlarged:
            for p in s:
                counts[p] = counts.get(p, 0) + 1
        emult = max(counts.values()) if counts else 0
        if emult <= max(zcover.multiplicity, 1):
            break
        eta_try /= 2.0
    else:
        raise CoverConstructionError(
            "enlargement kept raising multiplicity after 10 halvings of eta"
        )

    # repair boundary edges left without a common set
    grown = [set(c) for c in comp_sets]
    comp_of = {}
    for i, c in enumerate(comp_sets):
        for p in c:
            comp_of[p] = i
    for u in z_list:
        for v in space.neighbors[u]:
            if v not in Y or v in Z:
                continue
            zq = assign.get(v)
            if zq is not None and zpattern[u] & zpattern[zq]:
                continue
            grown[comp_of[v]].add(u)

    sets = [frozenset(s) for s in enlarged] + [frozenset(s) for s in grown]
    wit: list[tuple[int, float]] = []
    for j, s in enumerate(enlarged):
        c = zcover.witnesses[j][0]
        wit.append((c, max(space.metric[c, p] for p in s)))
    for i, s in enumerate(grown):
        c = comp_wit[i][0]
        wit.append((c, max(space.metric[c, p] for p in s)))

    cover = make_cover(space, Y, sets, wit, notes)
    if cover.multiplicity > max(zcover.multiplicity, 1) + 1:
        # drop the repairs and retry; the plain extension never exceeds n+1
        sets = [frozenset(s) for s in enlarged] + list(comp_sets)
        wit = wit[: len(enlarged)] + comp_wit
        notes.append("edge repair dropped: it exceeded the multiplicity budget")
        cover = make_cover(space, Y, sets, wit, notes)
    return cover


# ---------------------------------------------------------------------------
# nerve of a cover


def nerve(cover: Cover) -> NerveComplex:
    """Nerve of the cover plus the fiber check.

    Vertices are cover sets; a simplex is any family of sets with a common
    point, so the maximal simplices are the maximal membership patterns.
    Each fiber (a membership-pattern class) lies inside every set of its
    pattern; this is immediate from the definitions but asserted anyway.
    """
    patterns: dict[int, tuple[int, ...]] = {}
    for p in cover.target:
        patterns[p] = tuple(j for j, s in enumerate(cover.sets) if p in s)
    distinct = set(patterns.values())
    maximal = tuple(
        sorted(
            pat
            for pat in distinct
            if not any(set(pat) < set(q) for q in distinct)
        )
    )
    for pat in distinct:
        if not pat:
            raise AssertionError("uncovered point slipped through; this is a bug")
        fiber = [p for p, q in patterns.items() if q == pat]
        for j in pat:
            if not set(fiber) <= cover.sets[j]:
                raise AssertionError("fiber escapes its cover set; this is a bug")
    dim = max((len(pat) - 1 for pat in distinct), default=-1)
    return NerveComplex(
        n_vertices=len(cover.sets),
        maximal_simplices=maximal,
        dimension=dim,
        point_simplex=tuple(patterns[p] for p in sorted(cover.target)),
    )


# ---------------------------------------------------------------------------
# the recursive pipeline


def bound_width(
    space: DiscreteSpace,
    Y,
    n: int,
    r: float,
    mu: float | None = None,
    max_points: int = DEFAULT_EXACT_BUDGET,
) -> WidthCertificate:
    """Certify a radius-r width bound with a multiplicity-n cover of Y.

    n = 1 delegates to :func:`multiplicity_one_cover`.  For n >= 2 the
    small-ball content hypothesis (every r-ball trace has n-content below
    (r/4n)^n) is what drives the separator search; when it fails but every
    component of Y already fits in a radius-r ball, the trivial
    multiplicity-1 certificate is returned instead of an error.
    """
    Y = frozenset(int(p) for p in Y)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not Y:
        cover = make_cover(space, Y, (), ())
        return WidthCertificate(n, r, cover, nerve(cover))

    if n == 1:
        cover = multiplicity_one_cover(space, Y, r, max_points=max_points)
        cert = WidthCertificate(n, r, cover, nerve(cover), notes=cover.notes)
        _check_certificate(space, cert)
        return cert

    try:
        sep = minimize_separator(space, Y, r, n - 1, mu=mu, max_points=max_points)
    except (HypothesisViolation, PreconditionFailed, IntervalTooNarrow) as exc:
        trivial = _trivial_cover(space, Y, r)
        if trivial is not None:
            cert = WidthCertificate(
                n, r, trivial, nerve(trivial),
                notes=(f"hypothesis check failed ({exc}); trivial component cover used",),
            )
            _check_certificate(space, cert)
            return cert
        raise
    sub = bound_width(space, sep.Z, n - 1, sep.params.rho, max_points=max_points)
    cover = extend_cover(space, Y, sep.Z, sub.cover, r)
    cert = WidthCertificate(
        n,
        r,
        cover,
        nerve(cover),
        levels=(sep,) + sub.levels,
        notes=cover.notes + sub.notes,
    )
    _check_certificate(space, cert)
    return cert


def _trivial_cover(space, Y, r) -> Cover | None:
    comps = components(space, Y)
    sets, wit = [], []
    for comp in comps:
        rad, ctr = radius(space, comp)
        if rad >= r:
            return None
        sets.append(comp)
        wit.append((ctr, rad))
    return make_cover(space, Y, sets, wit)


def _check_certificate(space, cert: WidthCertificate) -> None:
    # deferred import: the checker stays structurally independent
    from .check import validate_width_certificate

    problems = validate_width_certificate(space, cert)
    if problems:
        raise AssertionError(f"certificate failed revalidation: {problems}")


def urysohn_width_bound(cert: WidthCertificate) -> float:
    """Diameter-type width bound from a radius-type certificate (factor 2)."""
    return 2.0 * cert.r


# ---------------------------------------------------------------------------
# exact oracle on small instances


def exact_width_small(space: DiscreteSpace, Y, n: int, max_points: int = 12) -> float:
    """Least r admitting a multiplicity-n cover of Y by subsets of radius-r
    balls in which adjacent points always share a set.

    Exhaustive (backtracking over membership patterns built from maximal
    ball traces), so the instance is capped at ``max_points`` points.
    """
    Y = sorted(int(p) for p in Y)
    if len(Y) > max_points:
        raise ValueError(f"width oracle budget is {max_points} points, got {len(Y)}")
    if not Y:
        return 0.0
    yset = set(Y)
    cand = sorted(set(float(space.metric[c, p]) for c in range(space.n_points) for p in Y))

    edges = [
        (u, v)
        for u in Y
        for v in space.neighbors[u]
        if v in yset and u < v
    ]

    def feasible(r: float) -> bool:
        traces = set()
        for c in range(space.n_points):
            traces.add(frozenset(p for p in Y if space.metric[c, p] <= r))
        maximal = [t for t in traces if t and not any(t < u for u in traces)]
        maximal.sort(key=lambda t: tuple(sorted(t)))
        allowed = {p: [i for i, t in enumerate(maximal) if p in t] for p in Y}
        if any(not a for a in allowed.values()):
            return False
        nbrs = {p: [v for v in space.neighbors[p] if v in yset] for p in Y}

        order = Y
        pattern: dict[int, frozenset[int]] = {}

        def patterns_for(p):
            ids = allowed[p]
            out = [frozenset([i]) for i in ids]
            for size in range(2, min(n, len(ids)) + 1):
                out.extend(frozenset(c) for c in combinations(ids, size))
            return out

        def ok_with(p, pat) -> bool:
            for q in nbrs[p]:
                if q in pattern:
                    if not pat & pattern[q]:
                        return False
                else:
                    if not pat & frozenset(allowed[q]):
                        return False
            return True

        def rec(i: int) -> bool:
            if i == len(order):
                return True
            p = order[i]
            for pat in patterns_for(p):
                if ok_with(p, pat):
                    pattern[p] = pat
                    if rec(i + 1):
                        return True
                    del pattern[p]
            return False

        return rec(0)

    lo, hi = 0, len(cand) - 1
    if not feasible(cand[hi]):
        raise RuntimeError("no feasible cover even at the diameter; this is a bug")
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cand[lo]
