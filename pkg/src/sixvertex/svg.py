"""Static SVG figure: the curve, its sextactic points and their osculating conics."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .affine import AffineCurvature, AffineParametrization
from .sextactic import SextacticReport, local_frame

HEADER = """<?xml version="1.0" standalone="no"?>
<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">
<svg width="{size}" height="{size}" viewBox="0 0 {size} {size}" version="1.1" xmlns="http://www.w3.org/2000/svg">
<rect x="0" y="0" width="{size}" height="{size}" style="fill:#ffffff"/>
"""


def conic_branches(p: AffineParametrization, k: AffineCurvature, sigma0: float,
                   radius: float, samples: int = 721) -> list[np.ndarray]:
    """Polylines of the osculating conic at ``sigma0`` clipped to a disc.

    Lines ``y = m x`` through the contact point meet ``x^2 - 2y - k0 y^2 = 0``
    once more at ``x = 2m / (1 - k0 m^2)``; marching ``m = tan(theta)`` covers
    every conic type, and hyperbola branches break where the denominator vanishes.
    """
    fr = local_frame(p, k, sigma0)
    theta = np.linspace(-np.pi / 2, np.pi / 2, samples)[1:-1]
    m = np.tan(theta)
    denom = 1.0 - fr.k0 * m * m
    with np.errstate(divide="ignore", invalid="ignore"):
        x = 2.0 * m / denom
    pts = fr.to_global(np.column_stack([x, m * x]))
    if fr.k0 < 0:  # ellipse: close through the far vertex (0, -2/k0)
        far = fr.to_global(np.array([0.0, -2.0 / fr.k0]))
        pts = np.vstack([far, pts, far])
    centre = fr.origin
    inside = np.all(np.isfinite(pts), axis=1) & (np.linalg.norm(pts - centre, axis=1) < radius)
    branches, current = [], []
    for keep, pt in zip(inside, pts):
        if keep:
            current.append(pt)
        elif current:
            branches.append(np.array(current))
            current = []
    if current:
        branches.append(np.array(current))
    return [b for b in branches if len(b) > 1]


def _poly(points: np.ndarray, style: str, cls: str) -> str:
    coords = " ".join(f"{x:.6g},{y:.6g}" for x, y in points)
    return f'<polyline class="{cls}" points="{coords}" style="{style}"/>'


def render(p: AffineParametrization | None, k: AffineCurvature | None,
           report: SextacticReport | None, curve_points: np.ndarray, title: str,
           size: int = 600) -> str:
    pts = np.asarray(curve_points)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(np.max(hi - lo)) or 1.0
    centre = 0.5 * (lo + hi)
    scale = 0.8 * size / span
    # plane coordinates are kept verbatim; the group transform maps them to the page
    tx = size / 2 - scale * centre[0]
    ty = size / 2 + scale * centre[1]
    stroke = 1.5 / scale
    out = [HEADER.format(size=size)]
    out.append(f'<text x="10" y="20" style="font-family:sans-serif;font-size:14px">{escape(title)}</text>')
    out.append(f'<g transform="matrix({scale:.9g},0,0,{-scale:.9g},{tx:.9g},{ty:.9g})">')
    closed = np.vstack([pts, pts[:1]])
    out.append(_poly(closed, f"fill:none;stroke:#000000;stroke-width:{stroke:.6g}", "curve"))
    if report is not None and p is not None and k is not None:
        for pt in report.points:
            for branch in conic_branches(p, k, pt.sigma, radius=1.5 * span):
                out.append(_poly(branch, f"fill:none;stroke:#3070c0;stroke-width:{0.6 * stroke:.6g};"
                                         "stroke-opacity:0.6", "conic"))
        for i, pt in enumerate(report.points):
            x, y = pt.point
            out.append(f'<circle class="sextactic" id="sextactic-{i}" cx="{x!r}" cy="{y!r}" '
                       f'r="{4 * stroke:.6g}" style="fill:#d03030;stroke:none"/>')
    out.append("</g>")
    if report is not None:
        for i, pt in enumerate(report.points):
            x, y = pt.point
            out.append(f'<text x="{scale * x + tx + 6:.2f}" y="{-scale * y + ty - 6:.2f}" '
                       f'style="font-family:sans-serif;font-size:11px">s{i}</text>')
    out.append("</svg>\n")
    return "\n".join(out)
