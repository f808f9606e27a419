"""JSON-ready report assembly."""

from __future__ import annotations

import json
import math
from dataclasses import asdict

import numpy as np

from . import __version__
from .periodic import count_sign_changes
from .settings import NumericSettings
from .sextactic import LEMMA3_TOL, Certificate
from .sturm import CorollaryCertificate, DisconjugacyReport, TheoremCertificate

SCHEMA_VERSION = "1.0"


def _clean(obj):
    """Plain JSON types; non-finite floats become strings so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def dumps(report: dict) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def envelope(kind: str, settings: NumericSettings, **body) -> dict:
    return dict(schema_version=SCHEMA_VERSION, kind=kind,
                tool=dict(name="sixvertex", version=__version__),
                settings=settings.as_dict(), **body)


def disconjugacy_dict(rep: DisconjugacyReport, settings: NumericSettings) -> dict:
    d = asdict(rep)
    d["tolerance"] = dict(monodromy=settings.monodromy_tol)
    return d


def analysis_report(spec: dict, cert: Certificate | None, settings: NumericSettings, *,
                    status: str, stage: str | None = None, message: str | None = None,
                    chain: dict | None = None, artifacts: dict | None = None) -> dict:
    """Assemble the analysis report; ``cert`` is None when the chain stopped early."""
    art = artifacts if artifacts is not None else (cert.artifacts if cert else {})
    body: dict = dict(spec=spec, status=status, stage=stage, message=message,
                      chain=chain if chain is not None else (cert.chain if cert else {}))
    body["degenerate_conic"] = status == "conic"

    conv = art.get("convexity")
    if conv is not None:
        body["convexity"] = dict(locally_convex=conv.locally_convex, globally_convex=conv.globally_convex,
                                 min_det=conv.min_det, turning_number=conv.turning_number,
                                 tolerance=dict(zero=settings.zero_tol))
    p = art.get("parametrization")
    if p is not None:
        body["total_affine_length"] = dict(value=p.total_length,
                                           unimodularity_defect=p.unimodularity_defect,
                                           tolerance=1e-8)
    k = art.get("curvature")
    if k is not None:
        body["affine_curvature"] = dict(
            min=float(np.min(k.k.values)), max=float(np.max(k.k.values)),
            residual=k.residual, constant=k.degenerate,
            critical_points=[asdict(cp) for cp in k.critical_points],
            tolerance=dict(cluster=settings.cluster_tol, degenerate=settings.degenerate_tol))
    ode = art.get("ode")
    if ode is not None:
        h_summary = dict(max_abs=ode.h.max_abs(), parameter="sigma/L",
                         tolerance=dict(zero=settings.zero_tol))
        try:
            h_summary["sign_changes"] = count_sign_changes(ode.h, settings=settings).count
        except Exception:  # h identically zero on a conic
            h_summary["sign_changes"] = 0
        body["h"] = h_summary
    sx = art.get("sextactic")
    if sx is not None:
        body["sextactic"] = dict(count=sx.count, coincidence_defect=sx.coincidence_defect,
                                 points=[asdict(pt) for pt in sx.points],
                                 tolerance=dict(cluster=settings.cluster_tol,
                                                contact_floor=settings.contact_floor,
                                                crossing_delta=settings.crossing_delta))
    rep = art.get("disconjugacy")
    if rep is not None:
        body["disconjugacy"] = disconjugacy_dict(rep, settings)
    l3 = art.get("lemma3")
    if l3 is not None:
        body["lemma3"] = dict(residuals=[dict(i=i, j=j, relative=r) for i, j, r in l3.pairs()],
                              max_relative=l3.max_relative, tolerance=LEMMA3_TOL)
    thm2 = art.get("theorem2")
    if thm2 is not None:
        body["theorem2"] = theorem_dict(thm2, settings)
    if cert is not None:
        body["certificate"] = dict(passed=cert.passed, sextactic_count=cert.sextactic_count,
                                   theorem2_bound=cert.theorem2_bound)
    return envelope("analysis", settings, **body)


def theorem_dict(cert: TheoremCertificate, settings: NumericSettings) -> dict:
    return dict(theorem=cert.theorem, order=cert.order, bound=cert.bound,
                min_count=cert.min_count, counts=cert.counts, witness_counts=cert.witness_counts,
                degenerate_trials=cert.degenerate_trials, max_residual=cert.max_residual,
                passed=cert.passed, disconjugacy=disconjugacy_dict(cert.disconjugacy, settings),
                tolerance=dict(zero=settings.zero_tol, orthogonality=1e-9))


def corollary_dict(certs: list[CorollaryCertificate], settings: NumericSettings) -> dict:
    counts = [c.count for c in certs]
    return dict(theorem="corollary", order=certs[0].order, bound=certs[0].bound,
                min_count=min(counts), counts=counts,
                max_residual=max(c.orthogonality_residual for c in certs),
                adjoint_certified=all(c.adjoint_certified for c in certs),
                passed=all(c.passed for c in certs),
                disconjugacy=disconjugacy_dict(certs[0].disconjugacy, settings),
                tolerance=dict(zero=settings.zero_tol))
