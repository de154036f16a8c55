"""Independent revalidation of covers and certificates.

Everything here re-derives its verdicts from the distance table with plain
loops, on purpose sharing no helper code with the constructors in
``width.py`` and ``separators.py``: a bug there should not be able to hide
behind shared arithmetic here.  Each validator returns a list of problem
strings; an empty list means the object checks out.
"""

from __future__ import annotations

import math

__all__ = [
    "validate_cover",
    "validate_width_certificate",
    "validate_separator_certificate",
]


def validate_cover(space, sets, witnesses, target, n: int, r: float) -> list[str]:
    """Check a cover of ``target``: union, containment, multiplicity <= n,
    all witness radii < r."""
    problems: list[str] = []
    target = set(int(p) for p in target)
    counts = {p: 0 for p in target}
    union: set[int] = set()
    if len(sets) != len(witnesses):
        return ["sets and witnesses differ in length"]
    for k, (s, (c, rad)) in enumerate(zip(sets, witnesses)):
        pts = set(int(p) for p in s)
        if not pts:
            problems.append(f"set {k} is empty")
        union |= pts
        for p in pts:
            if p not in target:
                problems.append(f"set {k} contains {p} outside the target")
                continue
            counts[p] += 1
            if space.metric[c, p] > rad + 1e-12:
                problems.append(
                    f"set {k}: point {p} at distance {space.metric[c, p]} "
                    f"from centre {c} exceeds witness radius {rad}"
                )
        if rad >= r:
            problems.append(f"set {k}: witness radius {rad} not below r = {r}")
    missing = target - union
    if missing:
        problems.append(f"{len(missing)} target points uncovered, e.g. {sorted(missing)[:5]}")
    mult = max(counts.values(), default=0)
    if mult > n:
        problems.append(f"multiplicity {mult} exceeds n = {n}")
    return problems


def _patterns(sets, target):
    pats = {}
    for p in target:
        pats[int(p)] = tuple(k for k, s in enumerate(sets) if p in s)
    return pats


def validate_width_certificate(space, cert) -> list[str]:
    """Re-derive every claim of a width certificate from the metric."""
    cover = cert.cover
    problems = validate_cover(
        space, cover.sets, cover.witnesses, cover.target, cert.n, cert.r
    )
    # recomputed fields must agree with the stored ones
    counts: dict[int, int] = {}
    for s in cover.sets:
        for p in s:
            counts[p] = counts.get(p, 0) + 1
    mult = max(counts.values(), default=0)
    if mult != cover.multiplicity:
        problems.append(f"stored multiplicity {cover.multiplicity} != recomputed {mult}")
    maxr = max((rad for _, rad in cover.witnesses), default=0.0)
    if not math.isclose(maxr, cover.max_radius, rel_tol=0, abs_tol=1e-12):
        problems.append(f"stored max_radius {cover.max_radius} != recomputed {maxr}")
    # nerve: dimension bound and fiber containment
    pats = _patterns(cover.sets, cover.target)
    if cover.target:
        dim = max(len(q) - 1 for q in pats.values())
        if dim > mult - 1:
            problems.append(f"nerve dimension {dim} exceeds multiplicity-1 = {mult - 1}")
        if cert.nerve.dimension != dim:
            problems.append(f"stored nerve dimension {cert.nerve.dimension} != {dim}")
        for p, q in pats.items():
            if not q:
                problems.append(f"point {p} lies in no cover set")
                continue
            fiber = [pp for pp, qq in pats.items() if qq == q]
            inside_some = any(all(pp in cover.sets[k] for pp in fiber) for k in q)
            if not inside_some:
                problems.append(f"fiber of point {p} lies in no single cover set")
    return problems


def validate_separator_certificate(space, cert) -> list[str]:
    """Re-derive a separator certificate: separation witnesses and per-ball
    content bounds (each bound is re-checked through its covering witness)."""
    problems: list[str] = []
    Y = set(int(p) for p in cert.Y)
    Z = set(int(p) for p in cert.Z)
    if not Z <= Y:
        problems.append("Z is not a subset of Y")
    # components of Y-Z via fresh BFS, matched against the witnesses
    rest = Y - Z
    seen: set[int] = set()
    comps = []
    for start in sorted(rest):
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        while frontier:
            u = frontier.pop()
            for v in space.neighbors[u]:
                if v in rest and v not in comp:
                    comp.add(v)
                    frontier.append(v)
        seen |= comp
        comps.append(comp)
    wit_by_min = {min(w[0]): w for w in cert.component_witnesses} if cert.component_witnesses else {}
    if len(comps) != len(cert.component_witnesses):
        problems.append(
            f"{len(comps)} components but {len(cert.component_witnesses)} witnesses"
        )
    for comp in comps:
        w = wit_by_min.get(min(comp))
        if w is None:
            problems.append(f"component at {min(comp)} has no witness")
            continue
        pts, ctr, rad = set(w[0]), w[1], w[2]
        if pts != comp:
            problems.append(f"witness points differ from component at {min(comp)}")
        worst = max(space.metric[ctr, p] for p in comp)
        if worst > cert.d + 1e-12:
            problems.append(
                f"component at {min(comp)} reaches {worst} from its centre, above d = {cert.d}"
            )
    # ball bounds
    rho = cert.params.rho
    thr = cert.params.threshold
    n = cert.params.n
    seen_centers: set[int] = set()
    for entry in cert.ball_bounds:
        seen_centers |= set(entry["centers"])
        ballsum = math.fsum(float(rad) ** n for _, rad in sorted(entry["balls"]))
        if entry["side"] in ("upper", "exact"):
            if ballsum > entry["value"] + 1e-9:
                problems.append("recorded bound value below its own witness sum")
            if entry["value"] >= thr:
                problems.append(
                    f"ball bound {entry['value']} at centers {entry['centers'][:3]} "
                    f"not below threshold {thr}"
                )
            for x in entry["centers"]:
                region = [p for p in Z if space.metric[x, p] <= rho]
                for p in region:
                    if not any(
                        space.metric[c, p] <= rad + 1e-12 for c, rad in entry["balls"]
                    ):
                        problems.append(
                            f"witness covering at centre {x} misses point {p}"
                        )
                        break
            for _, rad in entry["balls"]:
                if rad < space.resolution / 2 - 1e-12:
                    problems.append("witness ball below the radius floor h/2")
    if Z and seen_centers != set(range(space.n_points)):
        problems.append("ball bounds do not range over every candidate centre")
    return problems
