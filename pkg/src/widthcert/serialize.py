"""JSON forms of estimates, certificates and reports.

All documents are emitted with sorted keys and compact separators, so a
fixed input yields byte-identical output.
"""

from __future__ import annotations

import json

from .content import ContentEstimate, Covering
from .separators import SeparatorCertificate
from .topology import CycleWitness, ThresholdReport, TreeReport
from .width import Cover, NerveComplex, WidthCertificate

__all__ = [
    "covering_json",
    "content_json",
    "separator_json",
    "cover_json",
    "width_json",
    "cycle_json",
    "tree_json",
    "threshold_json",
    "dumps",
]


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def covering_json(cov: Covering) -> dict:
    return {"balls": [[c, r] for c, r in cov.balls], "m": cov.m}


def content_json(est: ContentEstimate) -> dict:
    return {
        "m": est.m,
        "cap": est.cap,
        "value": est.value,
        "side": est.side,
        "balls": [[c, r] for c, r in est.witness.balls] if est.witness else [],
    }


def separator_json(cert: SeparatorCertificate) -> dict:
    p = cert.params
    return {
        "d": cert.d,
        "Z": sorted(cert.Z),
        "n_Y": len(cert.Y),
        "params": {
            "n": p.n,
            "r": p.r,
            "mu": p.mu,
            "mu1": p.mu1,
            "b": p.b,
            "rho": p.rho,
            "threshold": p.threshold,
            "min_drop": p.min_drop,
        },
        "component_witnesses": [
            {"points": list(pts), "center": c, "radius": rad}
            for pts, c, rad in cert.component_witnesses
        ],
        "ball_bounds": [dict(entry) for entry in cert.ball_bounds],
        "steps": [dict(s) for s in cert.steps],
        "phi_initial": cert.phi_initial,
        "phi_final": cert.phi_final,
    }


def cover_json(cover: Cover) -> list[dict]:
    return [
        {"points": sorted(s), "center": c, "radius": r}
        for s, (c, r) in zip(cover.sets, cover.witnesses)
    ]


def _nerve_json(nv: NerveComplex) -> dict:
    return {"dim": nv.dimension, "simplices": [list(s) for s in nv.maximal_simplices]}


def width_json(cert: WidthCertificate) -> dict:
    return {
        "n": cert.n,
        "r": cert.r,
        "cover": cover_json(cert.cover),
        "multiplicity": cert.cover.multiplicity,
        "max_radius": cert.cover.max_radius,
        "levels": [separator_json(s) for s in cert.levels],
        "nerve": _nerve_json(cert.nerve),
        "notes": list(cert.notes),
    }


def cycle_json(wit: CycleWitness | None) -> dict:
    if wit is None:
        return {"acyclic": True}
    return {
        "vertices": list(wit.vertices),
        "length": wit.length,
        "homology_class": list(wit.homology_class),
        "nontrivial": wit.nontrivial,
    }


def tree_json(rep: TreeReport) -> dict:
    return {
        "center": list(rep.center),
        "radius": rep.radius,
        "x": rep.x,
        "antipode": rep.antipode,
        "rows": [dict(r) for r in rep.rows],
        "pair_property_holds": rep.pair_property_holds,
    }


def threshold_json(rep: ThresholdReport) -> dict:
    return {
        "r": rep.r,
        "hypothesis_holds": rep.hypothesis_holds,
        "witness_point": rep.witness_point,
        "witness_table": [list(t) for t in rep.witness_table],
        "conclusion_holds": rep.conclusion_holds,
        "component_radii": list(rep.component_radii),
    }
