"""Separating subsets with certified small ball traces.

A subset Z of Y is r-separating when every connected component of Y minus Z
fits inside an ambient ball of radius <= r.  ``minimize_separator`` starts
from the trivially separating Z = Y and repeatedly applies a replacement
move: wherever the trace of Z on a ball of radius rho carries at least a
threshold amount of n-content, the move swaps everything inside a cheap
shell for the shell itself.  Each move lowers a truncated-content potential
by a fixed amount, so the search terminates, and on exit every candidate
ball trace is certified below the threshold.

Parameter conventions for ambient content dimension n+1 and working radius
r (all checked, none trusted):

* hypothesis: every r-ball B satisfies HC_{n+1}(B & Y) < (r/(4(n+1)))^{n+1} - mu;
* rho = r (1 - 1/(n+1)), threshold T = (rho/4n)^n  (= (r/(4(n+1)))^n);
* cap b = r/(4(n+1)) - mu1 with mu1 chosen so b^n = T - 4(n+1) mu / r;
* a usable shell must have weight < b^n, so each move drops the potential
  by more than 4(n+1) mu / r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .coarea import CoareaSelection, select_shell
from .content import (
    DEFAULT_EXACT_BUDGET,
    Covering,
    content_exact,
    content_greedy,
    content_lower_bound,
    covering_value,
)
from .spaces import DiscreteSpace, ball, components, radius, shell_indices

__all__ = [
    "LemmaParameters",
    "SeparatorCertificate",
    "HypothesisViolation",
    "AmbiguousContent",
    "StepBudgetExceeded",
    "PreconditionFailed",
    "lemma_parameters",
    "is_separating",
    "replacement_step",
    "minimize_separator",
]


class HypothesisViolation(RuntimeError):
    """The small-ball content hypothesis fails at a named ball."""

    def __init__(self, center: int, r: float, value: float, threshold: float, what: str = "ball-content"):
        super().__init__(
            f"{what} hypothesis fails at Ball({center}, {r:.6g}): "
            f"content {value:.6g} >= threshold {threshold:.6g}"
        )
        self.center = center
        self.r = r
        self.value = value
        self.threshold = threshold


class AmbiguousContent(RuntimeError):
    """A ball trace straddles the threshold and exceeds the exact budget."""


class StepBudgetExceeded(RuntimeError):
    def __init__(self, log):
        super().__init__(f"separator descent exceeded its step budget after {len(log)} steps")
        self.log = log


class PreconditionFailed(ValueError):
    pass


@dataclass(frozen=True)
class LemmaParameters:
    """Derived constants of the replacement move (see module docstring)."""

    n: int
    r: float
    mu: float
    rho: float
    threshold: float
    mu1: float
    b: float
    shell_bound: float
    min_drop: float

    def annulus(self) -> tuple[float, float]:
        return self.r * (1.0 - 1.0 / (2 * (self.n + 1))), self.r


def lemma_parameters(r: float, n: int, mu: float) -> LemmaParameters:
    if n < 1:
        raise ValueError("content dimension n must be >= 1")
    if r <= 0 or mu <= 0:
        raise ValueError("r and mu must be positive")
    base = r / (4.0 * (n + 1))
    min_drop = 4.0 * (n + 1) * mu / r
    inner = base**n - min_drop
    if inner <= 0:
        raise ValueError("mu too large: b would be nonpositive")
    mu1 = base - inner ** (1.0 / n)
    rho = r * (1.0 - 1.0 / (n + 1))
    return LemmaParameters(
        n=n,
        r=r,
        mu=mu,
        rho=rho,
        threshold=(rho / (4.0 * n)) ** n,
        mu1=mu1,
        b=base - mu1,
        shell_bound=inner,
        min_drop=min_drop,
    )


@dataclass(frozen=True)
class SeparatorCertificate:
    """Final separator with everything a checker needs to re-verify it."""

    Y: frozenset[int]
    Z: frozenset[int]
    d: float
    params: LemmaParameters
    component_witnesses: tuple[tuple[tuple[int, ...], int, float], ...]
    ball_bounds: tuple[dict, ...]
    steps: tuple[dict, ...]
    phi_initial: float
    phi_final: float


def is_separating(space: DiscreteSpace, Y, Z, d: float):
    """Is every component of Y minus Z inside a ball of radius <= d?

    Returns ``(True, witnesses)`` with one (component, centre, radius) per
    component, or ``(False, violating_component)``.
    """
    Y = frozenset(int(p) for p in Y)
    Z = frozenset(int(p) for p in Z)
    if not Z <= Y:
        raise PreconditionFailed("Z must be a subset of Y")
    witnesses = []
    for comp in components(space, Y - Z):
        rad, ctr = radius(space, comp)
        if rad > d:
            return False, comp
        witnesses.append((tuple(sorted(comp)), ctr, rad))
    return True, tuple(witnesses)


def _require_fine_resolution(space: DiscreteSpace) -> None:
    if space.step > space.resolution + 1e-9:
        raise PreconditionFailed(
            f"adjacency step {space.step:.6g} exceeds the shell width "
            f"h = {space.resolution:.6g}; shells could be jumped"
        )


def replacement_step(
    space: DiscreteSpace,
    Y,
    Z,
    x: int,
    params: LemmaParameters,
    covering: Covering | None = None,
    max_points: int = DEFAULT_EXACT_BUDGET,
) -> tuple[frozenset[int], CoareaSelection]:
    """One replacement move at a violating centre x.

    Requires a certified violation: HC_n(Z & Ball(x, rho)) >= threshold by
    an exact or lower-side estimate.  Picks a shell S of nominal radius s in
    the outer annulus with weight < b^n and returns
    ``Z' = (Z \\ Ball(x, s)) | (S & Y)`` together with the shell selection.
    Raises :class:`HypothesisViolation` when no shell is cheap enough.
    """
    _require_fine_resolution(space)
    Y = frozenset(int(p) for p in Y)
    Z = frozenset(int(p) for p in Z)
    region = Z & ball(space, x, params.rho)
    if not region:
        raise PreconditionFailed("Z & Ball(x, rho) is empty; nothing to replace")
    if len(region) <= max_points:
        cert = content_exact(space, region, params.n, max_points=max_points)
    else:
        cert = content_lower_bound(space, region, params.n)
    if cert.value < params.threshold:
        raise PreconditionFailed(
            f"no certified violation at {x}: content {cert.value:.6g} < "
            f"threshold {params.threshold:.6g}"
        )
    r1, r2 = params.annulus()
    sel = select_shell(space, Y, x, r1, r2, params.n + 1, covering=covering, max_points=max_points)
    if sel.weight >= params.shell_bound:
        raise HypothesisViolation(x, params.r, sel.weight, params.shell_bound, what="shell-weight")
    sidx = shell_indices(space, x)
    keep = frozenset(z for z in Z if sidx[z] > sel.k)
    new_z = keep | (sel.shell & Y)
    return new_z, sel


def _content_upper_cached(space, region, m, cache, max_points):
    key = region
    hit = cache.get(key)
    if hit is not None:
        return hit
    if len(region) <= max_points:
        est = content_exact(space, region, m, max_points=max_points)
    else:
        est = content_greedy(space, region, m)
    cache[key] = est
    return est


def minimize_separator(
    space: DiscreteSpace,
    Y,
    r: float,
    n: int,
    mu: float | None = None,
    max_points: int = DEFAULT_EXACT_BUDGET,
    refine_points: int = 64,
) -> SeparatorCertificate:
    """Descend from Z = Y to a separator whose ball traces are all certified.

    n is the content dimension of the separator traces; the hypothesis is
    checked in dimension n+1 on radius-r balls before any search runs, so a
    failure there is reported as the input violating the assumptions rather
    than the search failing.  When ``mu`` is omitted it is set to half the
    smallest hypothesis gap.  Threshold-straddling ball traces are settled
    by the exact solver up to ``refine_points`` points (the trace dimension
    n is low, so this stays cheap well past the generic exact budget).
    """
    _require_fine_resolution(space)
    if r / (2.0 * (n + 1)) < 3.0 * space.resolution - 1e-12:
        raise PreconditionFailed(
            f"resolution h = {space.resolution:.6g} too coarse for shell "
            f"selection in annuli of width r/(2(n+1)) = {r / (2 * (n + 1)):.6g}"
        )
    Y = frozenset(int(p) for p in Y)
    if not Y:
        return SeparatorCertificate(
            Y=Y, Z=frozenset(), d=r,
            params=lemma_parameters(r, n, mu if mu else 1e-9),
            component_witnesses=(), ball_bounds=(), steps=(),
            phi_initial=0.0, phi_final=0.0,
        )

    theta = (r / (4.0 * (n + 1))) ** (n + 1)
    upper_cache: dict[frozenset, object] = {}
    gaps = []
    seen_traces: dict[frozenset, int] = {}
    for x in range(space.n_points):
        trace = ball(space, x, r) & Y
        if trace in seen_traces:
            continue
        seen_traces[trace] = x
        est = _content_upper_cached(space, trace, n + 1, upper_cache, max_points)
        gap = theta - est.value
        if mu is not None and est.value >= theta - mu:
            raise HypothesisViolation(x, r, est.value, theta - mu)
        if gap <= 0:
            raise HypothesisViolation(x, r, est.value, theta)
        gaps.append(gap)
    if mu is None:
        mu = min(gaps) / 2.0
    params = lemma_parameters(r, n, mu)
    if params.b < space.resolution / 2.0:
        raise PreconditionFailed(
            f"truncation cap b = {params.b:.6g} below the radius floor "
            f"h/2 = {space.resolution / 2:.6g}: resolution too coarse for this r"
        )

    Z = Y
    maintained = list(content_greedy(space, Y, n, cap=params.b).witness.balls)
    phi0 = covering_value(maintained, n)
    phi = phi0
    budget = max(1, math.ceil(2.0 * phi0 * r / (4.0 * (n + 1) * mu)))
    steps: list[dict] = []
    trace_cache: dict[frozenset, object] = {}

    def scan_violation():
        """Smallest centre whose rho-ball trace certifiably violates the
        threshold; records clean upper bounds along the way."""
        bounds: dict[frozenset, dict] = {}
        for x in range(space.n_points):
            region = ball(space, x, params.rho) & Z
            if region in bounds:
                bounds[region]["centers"].append(x)
                continue
            est = _content_upper_cached(space, region, n, trace_cache, max_points)
            if est.value < params.threshold:
                bounds[region] = {
                    "centers": [x],
                    "value": est.value,
                    "side": est.side,
                    "balls": list(est.witness.balls) if est.witness else [],
                }
                continue
            # straddler: certify one side or the other
            if est.side == "exact":
                return x, est, None
            low = content_lower_bound(space, region, n)
            if low.value >= params.threshold:
                return x, low, None
            if len(region) <= refine_points:
                exact = content_exact(space, region, n, max_points=refine_points)
                trace_cache[region] = exact
                if exact.value >= params.threshold:
                    return x, exact, None
                bounds[region] = {
                    "centers": [x],
                    "value": exact.value,
                    "side": exact.side,
                    "balls": list(exact.witness.balls),
                }
                continue
            raise AmbiguousContent(
                f"Ball({x}, {params.rho:.6g}) & Z has upper {est.value:.6g} and "
                f"lower {low.value:.6g} around threshold {params.threshold:.6g} "
                f"with {len(region)} points (> refine budget {refine_points})"
            )
        return None, None, bounds

    while True:
        x, lower_cert, bounds = scan_violation()
        if x is None:
            break
        if len(steps) >= budget:
            raise StepBudgetExceeded(steps)
        new_z, sel = replacement_step(space, Y, Z, x, params, max_points=max_points)
        ok, _ = is_separating(space, Y, new_z, r)
        if not ok:
            raise AssertionError("replacement broke separation; this is a bug")
        added = [sel.covering.balls[i] for i in sel.touched]
        for _, rad in added:
            if rad >= params.b:
                raise AssertionError("shell ball exceeds the truncation cap; this is a bug")
        new_idx = sorted(new_z)
        kept = [
            (c, rad)
            for c, rad in maintained
            if new_idx and bool((space.metric[c, new_idx] <= rad).any())
        ]
        merged = sorted(set(kept) | set(added))
        new_phi = covering_value(merged, n)
        drop = phi - new_phi
        if drop < params.min_drop - 1e-9 * max(1.0, params.min_drop):
            raise AssertionError("potential drop below the guaranteed minimum; this is a bug")
        steps.append(
            {
                "step": len(steps),
                "center": x,
                "s": sel.s,
                "shell_weight": sel.weight,
                "phi_before": phi,
                "phi_after": new_phi,
                "drop": drop,
                "min_drop": params.min_drop,
                "violation_value": lower_cert.value,
                "violation_side": lower_cert.side,
            }
        )
        Z = new_z
        maintained = merged
        phi = new_phi

    # final improvement: the empty set separates whenever every component of
    # Y already fits in a radius-r ball (strictly, so downstream width
    # certificates keep their strict radius bound)
    if Z and all(radius(space, comp)[0] < r for comp in components(space, Y)):
        Z = frozenset()
        phi = 0.0
        _, _, bounds = scan_violation()

    ok, witnesses = is_separating(space, Y, Z, r)
    if not ok:
        raise AssertionError("final separator is not separating; this is a bug")
    ball_bounds = tuple(
        {
            "centers": sorted(info["centers"]),
            "rho": params.rho,
            "value": info["value"],
            "side": info["side"],
            "threshold": params.threshold,
            "balls": [[c, rad] for c, rad in info["balls"]],
        }
        for info in bounds.values()
    )
    return SeparatorCertificate(
        Y=Y,
        Z=Z,
        d=r,
        params=params,
        component_witnesses=witnesses,
        ball_bounds=ball_bounds,
        steps=tuple(steps),
        phi_initial=phi0,
        phi_final=phi,
    )
