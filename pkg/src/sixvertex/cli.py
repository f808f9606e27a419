"""Command-line entry point.

    sixvertex analyze <spec> --out <json> [--svg <file>] [--grid N] [--tol-file <settings>]
    sixvertex sturm <spec> --theorem {1,2,corollary} [--trials T] [--seed S] [--out <json>]
    sixvertex roundtrip <spec> [--grid N] [--tol-file <settings>]

Exit status: 0 success, 2 invalid input, 3 numerical stage failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, report as rep
from .affine import affine_curvature, reparametrize_affine
from .curves import check_convexity
from .errors import (DegenerateConicCurve, NotDisconjugate, NotGloballyConvex,
                     NotLocallyConvex, SixVertexError, SpecError)
from .projective import roundtrip_residual
from .settings import load_settings
from .sextactic import six_vertices_certificate
from .specs import load_curve_spec, load_ode_spec
from .sturm import (_random_source, certify_corollary, certify_theorem1, certify_theorem2,
                    fundamental_system)
from .svg import render

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
ROUNDTRIP_TOL = 1e-6


def _settings(args):
    try:
        return load_settings(args.tol_file)
    except (OSError, ValueError) as exc:
        raise SpecError(f"bad settings: {exc}") from exc


def _stage_failure(exc: SixVertexError) -> int:
    print(f"error: stage={exc.stage or 'numerics'}: {exc}", file=sys.stderr)
    return EXIT_NUMERIC


def cmd_analyze(args) -> int:
    settings = _settings(args)
    spec = load_curve_spec(args.spec, args.grid)
    settings = settings.replace(grid_size=spec.grid_size)
    curve = spec.curve()
    out = Path(args.out)
    cert = None
    try:
        cert = six_vertices_certificate(curve, settings, seed=args.seed)
    except DegenerateConicCurve as exc:
        chain = exc.details.get("chain", {})
        p = reparametrize_affine(curve, settings)
        k = affine_curvature(p, settings)
        art = dict(convexity=check_convexity(curve, settings), parametrization=p, curvature=k)
        data = rep.analysis_report(spec.as_dict(), None, settings, status="conic",
                                   stage=exc.stage, message=str(exc), chain=chain, artifacts=art)
        out.write_text(rep.dumps(data))
        if args.svg:
            Path(args.svg).write_text(render(p, k, None, curve.points(), spec.name))
        return EXIT_OK
    except SixVertexError as exc:
        data = rep.analysis_report(spec.as_dict(), None, settings, status="fail",
                                   stage=exc.stage, message=str(exc),
                                   chain=exc.details.get("chain", {}), artifacts={})
        out.write_text(rep.dumps(data))
        return _stage_failure(exc)

    status = "pass" if cert.passed else "fail"
    data = rep.analysis_report(spec.as_dict(), cert, settings, status=status)
    out.write_text(rep.dumps(data))
    if args.svg:
        art = cert.artifacts
        Path(args.svg).write_text(render(art["parametrization"], art["curvature"], art["sextactic"],
                                         curve.points(), spec.name))
    if not cert.passed:
        print("error: stage=sextactic: fewer sextactic points than the bound", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_sturm(args) -> int:
    settings = _settings(args)
    spec = load_ode_spec(args.spec, args.grid)
    settings = settings.replace(grid_size=spec.grid_size)
    ode = spec.ode()
    try:
        if args.theorem == "1":
            cert = certify_theorem1(ode, args.trials, seed=args.seed, settings=settings)
            body, passed = rep.theorem_dict(cert, settings), cert.passed
        elif args.theorem == "2":
            cert = certify_theorem2(ode, args.trials, seed=args.seed, settings=settings)
            body, passed = rep.theorem_dict(cert, settings), cert.passed
        else:
            g = spec.g_function()
            if g is not None:
                gs = [g]
            else:
                fs = fundamental_system(ode, settings)
                gs = [_random_source(fs, args.seed + i, settings) for i in range(args.trials)]
            certs = [certify_corollary(ode, g, seed=args.seed, settings=settings) for g in gs]
            body = rep.corollary_dict(certs, settings)
            passed = body["passed"]
    except NotDisconjugate as exc:
        report = exc.details.get("report")
        body = dict(theorem=args.theorem, passed=False, error="NotDisconjugate", message=str(exc),
                    disconjugacy=rep.disconjugacy_dict(report, settings) if report else None)
        _emit(args, rep.envelope("sturm", settings, spec=spec.name, seed=args.seed,
                                 trials=args.trials, **body))
        return _stage_failure(exc)
    except SixVertexError as exc:
        return _stage_failure(exc)
    _emit(args, rep.envelope("sturm", settings, spec=spec.name, seed=args.seed,
                             trials=args.trials, **body))
    return EXIT_OK if passed else EXIT_FAIL


def _emit(args, data: dict) -> None:
    text = rep.dumps(data)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_roundtrip(args) -> int:
    settings = _settings(args)
    spec = load_curve_spec(args.spec, args.grid)
    settings = settings.replace(grid_size=spec.grid_size)
    curve = spec.curve()
    try:
        conv = check_convexity(curve, settings)
        if not conv.locally_convex:
            raise NotLocallyConvex("curve has inflection points")
        if not conv.globally_convex:
            raise NotGloballyConvex(f"turning number {conv.turning_number}")
        p = reparametrize_affine(curve, settings)
        k = affine_curvature(p, settings)
        residual = roundtrip_residual(p, k, settings=settings)
    except SixVertexError as exc:
        return _stage_failure(exc)
    print(f"{spec.name}: projective registration residual {residual:.3e}")
    return EXIT_OK if residual < ROUNDTRIP_TOL else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sixvertex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="YAML spec file")
    common.add_argument("--grid", type=int, default=None, help="override grid size")
    common.add_argument("--tol-file", default=None,
                        help="YAML settings overrides (default: $SIXVERTEX_SETTINGS)")

    a = sub.add_parser("analyze", parents=[common], help="six-vertex chain for a closed curve")
    a.add_argument("--out", required=True, help="JSON report path")
    a.add_argument("--svg", default=None, help="optional SVG figure path")
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sturm", parents=[common], help="Sturm-type zero-count certificates")
    s.add_argument("--theorem", choices=["1", "2", "corollary"], required=True)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None, help="JSON output path (default stdout)")
    s.set_defaults(func=cmd_sturm)

    r = sub.add_parser("roundtrip", parents=[common], help="curve -> ODE -> curve residual")
    r.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: stage=validation: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
