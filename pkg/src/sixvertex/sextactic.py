"""Osculating conics, contact orders and sextactic points."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .affine import AffineCurvature, AffineParametrization, affine_curvature, reparametrize_affine
from .curves import ClosedCurve, check_convexity
from .errors import (DegenerateConicCurve, DegenerateTangent, NotDisconjugate,
                     NotGloballyConvex, NotLocallyConvex, PointNotOnConic,
                     SixVertexError, SlopeAmbiguous)
from .periodic import PeriodicFunction, locate_zero_clusters
from .projective import HomogeneousLift, ProjectiveODE, curve_to_ode
from .settings import DEFAULT_SETTINGS, NumericSettings
from .sturm import check_disconjugate, certify_theorem2, fundamental_system


@dataclass(frozen=True, eq=False)
class Conic:
    """``{P : P^T M P = 0}`` for ``P = (x, y, 1)``; ``|M| = 1``.

    ``scale`` restores the form the conic was built from:
    ``form(P) = scale * P^T M P``.
    """

    matrix: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m = 0.5 * (m + m.T)
        norm = np.linalg.norm(m)
        if norm == 0.0:
            raise ValueError("zero conic")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m / norm)
        object.__setattr__(self, "scale", float(self.scale) * norm)

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.matrix, tol=1e-10))

    def form(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        hom = np.concatenate([pts, np.ones(pts.shape[:-1] + (1,))], axis=-1)
        return self.scale * np.einsum("...i,ij,...j->...", hom, self.matrix, hom)

    def delta_form(self, p0, d) -> np.ndarray:
        """``form(p0 + d) - form(p0)`` for small displacements ``d``."""
        p0 = np.append(np.asarray(p0, dtype=float), 1.0)
        d = np.asarray(d, dtype=float)
        lin = 2.0 * (d @ (self.matrix[:2] @ p0))
        quad = np.einsum("...i,ij,...j->...", d, self.matrix[:2, :2], d)
        return self.scale * (lin + quad)


@dataclass(frozen=True)
class LocalFrame:
    """Affine frame at ``c(sigma0)``: origin, ``c'``, ``c''`` (sigma derivatives)."""

    sigma0: float
    origin: np.ndarray
    basis: np.ndarray  # columns c', c''
    k0: float
    dk0: float

    def to_local(self, d: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.basis, np.atleast_2d(d).T).T

    def to_global(self, xy: np.ndarray) -> np.ndarray:
        return self.origin + np.atleast_2d(xy) @ self.basis.T


def local_frame(p: AffineParametrization, k: AffineCurvature, sigma0: float) -> LocalFrame:
    L = p.total_length
    t0 = sigma0 / L
    c = p.curve
    d1 = np.array([f(t0) for f in c.derivative(1)]) / L
    d2 = np.array([f(t0) for f in c.derivative(2)]) / L ** 2
    return LocalFrame(sigma0, c(t0), np.column_stack([d1, d2]),
                      float(k.k(t0)), float(k.dk_dsigma(t0)))


def _local_conic_matrix(k0: float) -> np.ndarray:
    # x^2 - 2y - k0 y^2 on (x, y, 1)
    return np.array([[1.0, 0.0, 0.0], [0.0, -k0, -1.0], [0.0, -1.0, 0.0]])


def osculating_conic(p: AffineParametrization, k: AffineCurvature, sigma0: float) -> Conic:
    """Osculating conic at ``c(sigma0)``.

    In the frame (origin c, axes c', c'') it is ``x^2 - 2y - k0 y^2 = 0``;
    along the curve this form equals ``k'(sigma0) s^5 / 20 + O(s^6)``.
    """
    fr = local_frame(p, k, sigma0)
    binv = np.linalg.inv(fr.basis)
    G = np.eye(3)
    G[:2, :2] = binv
    G[:2, 2] = -binv @ fr.origin
    return Conic(G.T @ _local_conic_matrix(fr.k0) @ G)


def local_form(p: AffineParametrization, k: AffineCurvature, sigma0: float, deltas) -> np.ndarray:
    """``x^2 - 2y - k0 y^2`` along ``c(sigma0 + delta)`` in the osculating frame."""
    fr = local_frame(p, k, sigma0)
    L = p.total_length
    d = p.curve.increment(np.full(np.shape(deltas), sigma0 / L), np.asarray(deltas) / L)
    xy = fr.to_local(d)
    x, y = xy[:, 0], xy[:, 1]
    return x * x - 2.0 * y - fr.k0 * y * y


@dataclass(frozen=True)
class ContactOrder:
    order: int
    slope: float
    coefficient: float
    levels: int
    fit_residual: float


def contact_order(curve: ClosedCurve | AffineParametrization, q: Conic, at: float,
                  settings: NumericSettings = DEFAULT_SETTINGS) -> ContactOrder:
    """Order of vanishing of ``q`` along the curve at parameter ``at``.

    For an :class:`AffineParametrization` ``at`` and the step are affine
    arclength; for a :class:`ClosedCurve` they are its own period-1 parameter.
    The order is the rounded slope of ``log|G|`` against ``log|delta|`` over
    dyadic steps ``+-delta0 / 2**m``.
    """
    if isinstance(curve, AffineParametrization):
        unit = curve.total_length
        base = curve.curve
    else:
        unit = 1.0
        base = curve
    t0 = at / unit
    p0 = base(t0)
    on = q.form(p0) / (q.scale * (1.0 + p0 @ p0))
    if abs(on) > 1e-10:
        raise PointNotOnConic(f"point is off the conic by {on:.2e}", defect=float(on))

    delta0 = settings.contact_delta * unit
    mags = delta0 * 2.0 ** -np.arange(settings.contact_levels)
    deltas = np.concatenate([mags, -mags])
    d = base.increment(np.full(deltas.size, t0), deltas / unit)
    g = q.delta_form(p0, d)
    valid = np.abs(g) >= settings.contact_floor
    levels = np.unique(np.abs(deltas[valid]))
    if levels.size < 2:
        return ContactOrder(settings.contact_cap, float("inf"), 0.0, int(levels.size), 0.0)

    X = np.log(np.abs(deltas[valid]))
    Y = np.log(np.abs(g[valid]))
    slope, intercept = np.polyfit(X, Y, 1)
    fit_residual = float(np.sqrt(np.mean((Y - slope * X - intercept) ** 2)))
    order = int(round(slope))
    if abs(slope - order) > settings.contact_slope_tol or fit_residual > 0.5:
        raise SlopeAmbiguous(f"slope {slope:.3f} is not near an integer",
                             interval=(int(np.floor(slope)), int(np.ceil(slope))),
                             slope=float(slope))
    order = min(order, settings.contact_cap)

    # leading coefficient from the smallest symmetric pair that clears the floor
    coefficient = 0.0
    for m in mags[::-1]:
        i, j = np.flatnonzero(deltas == m)[0], np.flatnonzero(deltas == -m)[0]
        if valid[i] and valid[j]:
            coefficient = 0.5 * (g[i] / m ** order + g[j] / (-m) ** order)
            break
    return ContactOrder(order, float(slope), float(coefficient), int(levels.size), fit_residual)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SextacticPoint:
    sigma: float
    t: float  # sigma / L
    x: float  # parameter of the curve as ingested
    point: tuple[float, float]
    contact_order: int
    contact_slope: float
    crossing: bool
    multiplicity: int
    crossing_offset: float = 0.0  # |delta| of the sign test; 0 when inferred from parity


@dataclass(frozen=True)
class SextacticReport:
    points: list[SextacticPoint]
    degenerate_conic: bool
    total_length: float
    coincidence_defect: float = 0.0

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def parameters(self) -> np.ndarray:
        return np.array([pt.t for pt in self.points])


def _cyclic_distance(a: float, b: float) -> float:
    return abs((a - b + 0.5) % 1.0 - 0.5)


def _crossing(p: AffineParametrization, k: AffineCurvature, sigma: float, multiplicity: int,
              settings: NumericSettings) -> tuple[bool, float]:
    """Does the curve cross its osculating conic at ``sigma``?

    Signs of the local form are compared at ``+-delta`` starting from
    ``crossing_delta * L`` and doubling up to ``contact_delta * L`` until both
    values clear the floor. If they never do, the contact order is taken as
    ``5 + multiplicity`` and the crossing follows from its parity.
    """
    L = p.total_length
    delta = settings.crossing_delta * L
    while delta <= settings.contact_delta * L * (1 + 1e-12):
        f_minus, f_plus = local_form(p, k, sigma, [-delta, delta])
        if min(abs(f_minus), abs(f_plus)) >= settings.contact_floor:
            return bool(np.sign(f_minus) != np.sign(f_plus)), float(delta)
        delta *= 2.0
    return multiplicity % 2 == 0, 0.0


def find_sextactic_points(p: AffineParametrization, k: AffineCurvature, ode: ProjectiveODE,
                          settings: NumericSettings = DEFAULT_SETTINGS) -> SextacticReport:
    """Zeros of ``h`` (equivalently critical points of ``k``), each checked for
    contact order >= 6 with its osculating conic."""
    L = p.total_length
    if k.degenerate or ode.h.max_abs() < settings.degenerate_tol * max(ode.kappa.max_abs(), 1.0):
        report = SextacticReport([], True, L)
        raise DegenerateConicCurve("affine curvature is constant: the curve is a conic",
                                   report=report)
    zeros = locate_zero_clusters(ode.h, settings=settings)
    crit = [cp.t for cp in k.critical_points]
    defect = 0.0
    for z in zeros:
        defect = max(defect, min((_cyclic_distance(z.x, c) for c in crit), default=1.0))
    for c in crit:
        defect = max(defect, min((_cyclic_distance(z.x, c) for z in zeros), default=1.0))
    if defect > settings.cluster_tol:
        raise SixVertexError("zeros of h and critical points of k disagree",
                             stage="sextactic", defect=defect)

    points = []
    for z in zeros:
        sigma = z.x * L
        conic = osculating_conic(p, k, sigma)
        contact = contact_order(p, conic, sigma, settings)
        crossing, offset = _crossing(p, k, sigma, z.multiplicity, settings)
        x_src = float(p.source.source_parameter(p.x_of_t(z.x))[0])
        pt = p.curve(z.x)
        points.append(SextacticPoint(sigma, z.x, x_src, (float(pt[0]), float(pt[1])),
                                     contact.order, contact.slope, crossing, z.multiplicity,
                                     offset))
    return SextacticReport(points, False, L, defect)


@dataclass(frozen=True)
class Lemma3Residuals:
    absolute: np.ndarray  # 3x3 symmetric |int phi_i phi_j h|
    relative: np.ndarray  # divided by int |phi_i phi_j h|

    @property
    def max_relative(self) -> float:
        return float(np.max(self.relative))

    def pairs(self) -> list[tuple[int, int, float]]:
        return [(i, j, float(self.relative[i, j])) for i in range(3) for j in range(i, 3)]


def verify_lemma3(ode: ProjectiveODE, lift: HomogeneousLift) -> Lemma3Residuals:
    """``int phi_i phi_j h`` for the six symmetric products of the lift."""
    phi = lift.values
    h = ode.h.values
    absolute = np.zeros((3, 3))
    relative = np.zeros((3, 3))
    for i in range(3):
        for j in range(i, 3):
            integrand = phi[:, i] * phi[:, j] * h
            a = abs(np.mean(integrand))
            s = np.mean(np.abs(integrand))
            absolute[i, j] = absolute[j, i] = a
            relative[i, j] = relative[j, i] = a / s if s > 0 else 0.0
    return Lemma3Residuals(absolute, relative)


@dataclass
class Certificate:
    sextactic_count: int
    theorem2_bound: int
    passed: bool
    chain: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict, repr=False)


LEMMA3_TOL = 1e-7


def six_vertices_certificate(c: ClosedCurve, settings: NumericSettings = DEFAULT_SETTINGS,
                             seed: int = 0) -> Certificate:
    """Run convexity -> affine parameter -> lift -> disconjugacy -> orthogonality
    -> product-orthogonality bound -> sextactic count, recording each stage."""
    chain: dict = {}
    art: dict = {}
    conv = check_convexity(c, settings)
    chain["convexity"] = dict(locally_convex=conv.locally_convex, globally_convex=conv.globally_convex,
                              min_det=conv.min_det, turning_number=conv.turning_number)
    art["convexity"] = conv
    if not conv.locally_convex:
        raise NotLocallyConvex("curve has inflection points", chain=chain)
    if not conv.globally_convex:
        raise NotGloballyConvex(f"turning number {conv.turning_number}", chain=chain)

    p = reparametrize_affine(c, settings)
    k = affine_curvature(p, settings)
    art.update(parametrization=p, curvature=k)
    chain["affine"] = dict(total_length=p.total_length, unimodularity_defect=p.unimodularity_defect,
                           curvature_residual=k.residual, degenerate=k.degenerate,
                           critical_points=k.critical_count)
    if k.degenerate:
        raise DegenerateConicCurve("affine curvature is constant: the curve is a conic",
                                   stage="affine", chain=chain,
                                   report=SextacticReport([], True, p.total_length))

    ode, lift = curve_to_ode(p, k, settings)
    art.update(ode=ode, lift=lift)
    chain["lift"] = dict(wronskian_defect=lift.wronskian_defect(),
                         residual=max(ode.residual(f) for f in lift.functions[1:]))

    lin = ode.as_linear_ode()
    fs = fundamental_system(lin, settings)
    report = check_disconjugate(lin, fs=fs, seed=seed, settings=settings)
    art.update(fundamental_system=fs, disconjugacy=report)
    chain["disconjugacy"] = dict(certified=report.certified, periodicity=report.periodicity,
                                 monodromy_defect=report.monodromy_defect,
                                 max_observed_zero_count=report.max_observed_zero_count)
    if not report.certified:
        raise NotDisconjugate("lift of a convex curve failed the disconjugacy certificate",
                              chain=chain, report=report)

    l3 = verify_lemma3(ode, lift)
    art["lemma3"] = l3
    chain["lemma3"] = dict(max_relative=l3.max_relative)
    if l3.max_relative > LEMMA3_TOL:
        raise SixVertexError("h is not orthogonal to products of solutions",
                             stage="lemma3", chain=chain)

    thm2 = certify_theorem2(lin, trials=0, witnesses=[ode.h], fs=fs, report=report, settings=settings)
    art["theorem2"] = thm2
    chain["theorem2"] = dict(bound=thm2.bound, h_sign_changes=thm2.min_count,
                             passed=thm2.passed, max_residual=thm2.max_residual)

    sx = find_sextactic_points(p, k, ode, settings)
    art["sextactic"] = sx
    orders_ok = all(pt.contact_order >= 6 for pt in sx.points)
    chain["sextactic"] = dict(count=sx.count, contact_orders=[pt.contact_order for pt in sx.points],
                              coincidence_defect=sx.coincidence_defect)
    passed = sx.count >= thm2.bound and thm2.passed and orders_ok
    return Certificate(sx.count, thm2.bound, bool(passed), chain, art)


# ---------------------------------------------------------------------------
# duality

def dual_curve(lift: HomogeneousLift) -> HomogeneousLift:
    """Tangent lines ``phi x phi'`` as a curve in the dual plane."""
    ell = np.cross(lift.jets[:, 0, :], lift.jets[:, 1, :])
    norms = np.linalg.norm(ell, axis=1)
    if np.min(norms) < 1e-12 * np.max(norms):
        raise DegenerateTangent("phi and phi' are dependent somewhere")
    ell = ell / np.max(norms)
    return HomogeneousLift.from_functions([PeriodicFunction(ell[:, i]) for i in range(3)])


def lift_to_affine_curve(lift: HomogeneousLift) -> ClosedCurve:
    """Affine chart of a homogeneous curve, dividing by the best-separated coordinate."""
    v = lift.values
    rel = np.min(np.abs(v), axis=0) / np.max(np.linalg.norm(v, axis=1))
    i = int(np.argmax(rel))
    if rel[i] < 1e-8:
        raise DegenerateTangent("no coordinate chart contains the whole curve")
    others = [j for j in range(3) if j != i]
    return ClosedCurve.from_components(PeriodicFunction(v[:, others[0]] / v[:, i]),
                                       PeriodicFunction(v[:, others[1]] / v[:, i]))


def dual_sextactic_parameters(lift: HomogeneousLift,
                              settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Sextactic parameters of the dual curve, in the primal lift's parameter."""
    dual = lift_to_affine_curve(dual_curve(lift))
    p = reparametrize_affine(dual, settings)
    k = affine_curvature(p, settings)
    ode, _ = curve_to_ode(p, k, settings)
    report = find_sextactic_points(p, k, ode, settings)
    return np.sort([pt.x for pt in report.points])
