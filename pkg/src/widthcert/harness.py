"""End-to-end verification runs and machine-readable reports.

``verify_instance`` drives the whole pipeline on one space: content bounds,
width certificate at the automatic radius, independent revalidation, and
the systole comparison on essential instances.  Reports are dictionaries
that serialize deterministically (the wall-time field is the only part
that varies between identical runs); ``append_report`` writes them as
JSON lines for corpus-level aggregation.
"""

from __future__ import annotations

import hashlib
import time

from . import __version__
from .check import validate_width_certificate
from .content import (
    BudgetExceeded,
    DEFAULT_EXACT_BUDGET,
    content_exact,
    content_greedy,
    content_lower_bound,
)
from .separators import AmbiguousContent, HypothesisViolation, StepBudgetExceeded
from .serialize import dumps, width_json
from .spaces import DiscreteSpace, dump_space
from .topology import InequalityViolation, is_essential_instance, systole
from .width import CoverConstructionError, bound_width

__all__ = ["verify_instance", "append_report", "space_hash", "automatic_radius"]


def space_hash(space: DiscreteSpace) -> str:
    return hashlib.sha256(dump_space(space).encode()).hexdigest()


def automatic_radius(space: DiscreteSpace, n: int, max_points: int = DEFAULT_EXACT_BUDGET):
    """The radius 4 n HC_n^(1/n) (1 + 1e-3) from an upper content estimate.

    At this radius every ball trace has n-content below (r/4n)^n by
    construction, so the width pipeline's hypothesis holds automatically.
    """
    Y = space.all_points()
    if len(Y) <= max_points:
        est = content_exact(space, Y, float(n), max_points=max_points)
    else:
        est = content_greedy(space, Y, float(n))
    return 4.0 * n * est.value ** (1.0 / n) * (1.0 + 1e-3), est


def verify_instance(
    space: DiscreteSpace, n: int, max_points: int = DEFAULT_EXACT_BUDGET
) -> dict:
    """Run the full pipeline on one space and report the outcome.

    The report's ``outcome`` is ``success``, ``hypothesis-violation`` or
    ``error``; successes embed the revalidated width certificate and, on
    essential instances, the systole comparison.
    """
    t0 = time.perf_counter()
    report: dict = {
        "command": "verify",
        "input": space_hash(space),
        "version": __version__,
        "parameters": {"n": n, "max_points": max_points},
    }
    try:
        r, upper = automatic_radius(space, n, max_points)
        lower = content_lower_bound(space, space.all_points(), float(n))
        report["content"] = {
            "upper": upper.value,
            "lower": lower.value,
            "side": upper.side,
        }
        report["r"] = r
        cert = bound_width(space, space.all_points(), n, r, max_points=max_points)
        problems = validate_width_certificate(space, cert)
        if problems:
            report["outcome"] = "error"
            report["error"] = f"revalidation failed: {problems}"
        else:
            report["outcome"] = "success"
            report["certificate"] = width_json(cert)
            if is_essential_instance(space):
                wit = systole(space)
                slack = 2.0 * space.resolution
                holds = wit.length <= 2.0 * cert.r + slack
                report["inequality"] = {
                    "sys": wit.length,
                    "width_r": cert.r,
                    "ratio": wit.length / (2.0 * cert.r),
                    "slack": slack,
                    "holds": holds,
                }
                if not holds:
                    report["outcome"] = "error"
                    report["error"] = "systole exceeds twice the certified width"
    except (HypothesisViolation, CoverConstructionError) as exc:
        report["outcome"] = "hypothesis-violation"
        report["error"] = str(exc)
    except (BudgetExceeded, StepBudgetExceeded, AmbiguousContent) as exc:
        report["outcome"] = "budget-exhausted"
        report["error"] = str(exc)
    except (InequalityViolation, ValueError, RuntimeError) as exc:
        report["outcome"] = "error"
        report["error"] = str(exc)
    report["wall_time_s"] = time.perf_counter() - t0
    return report


def append_report(path, report: dict) -> None:
    """Append one report as a JSON line (sorted keys, one line per run)."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(dumps(report))
