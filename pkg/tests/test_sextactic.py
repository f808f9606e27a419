import numpy as np
import pytest

from sixvertex import ClosedCurve
from sixvertex.curves import PlaneTransform, apply_transform
from sixvertex.errors import DegenerateConicCurve, PointNotOnConic
from sixvertex.periodic import count_sign_changes, differentiate
from sixvertex.projective import ProjectiveODE
from sixvertex.settings import DEFAULT_SETTINGS
from sixvertex.sextactic import (Conic, _local_conic_matrix, contact_order, dual_curve, dual_sextactic_parameters,
                                 find_sextactic_points, lift_to_affine_curve, local_form,
                                 local_frame, osculating_conic, six_vertices_certificate,
                                 verify_lemma3)

from conftest import chain, circle, ellipse, perturbed_ellipse

# one-parameter family with a degenerate critical point of k near t = 0 (found by root finding)
TRIPLE = dict(s=0.01955875309000347, e=0.0)
DOUBLE = dict(s=0.020661079564872464, e=0.01)
WIDE = DEFAULT_SETTINGS.replace(contact_delta=0.04)


def engineered(s, e, n=512):
    fx = [[0, 0], [1.0, 0], [0.13, e], [s, 0]]
    fy = [[0, 0], [0, 1.0], [0, -0.07], [0, s]]
    return ClosedCurve.from_fourier(fx, fy, n)


def five_point_conic(pts):
    """Oracle: conic through five points, as a symmetric 3x3 matrix of unit norm."""
    x, y = pts[:, 0], pts[:, 1]
    A = np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])
    a, b, c, d, e, f = np.linalg.svd(A)[2][-1]
    M = np.array([[a, b / 2, d / 2], [b / 2, c, e / 2], [d / 2, e / 2, f]])
    return M / np.linalg.norm(M)


def same_conic(M1, M2):
    return min(np.linalg.norm(M1 - M2), np.linalg.norm(M1 + M2))


# -- osculating conic ---------------------------------------------------------

@pytest.mark.parametrize("r", [1.0, 2.5])
def test_osculating_conic_of_circle_is_the_circle(r):
    p, k, _, _ = chain(circle(r))
    target = np.diag([1.0, 1.0, -r * r])
    for sigma in np.linspace(0, p.total_length, 5, endpoint=False):
        q = osculating_conic(p, k, sigma)
        assert same_conic(q.matrix, target / np.linalg.norm(target)) < 1e-10


def test_osculating_conic_matches_five_point_fit(pe_chain):
    p, k, _, _ = pe_chain
    L = p.total_length
    for t0 in (0.1, 0.37, 0.8):
        q = osculating_conic(p, k, t0 * L)
        pts = p.curve(t0 + 2e-3 * np.arange(-2, 3))
        assert same_conic(q.matrix, five_point_conic(pts)) < 1e-3


def test_zero_curvature_gives_parabola():
    # in the local frame the conic is x^2 - 2y - k0 y^2; with k0 = 0 only the parabola remains
    p, k, _, _ = chain(circle())
    fr = local_frame(p, k, 0.0)
    assert fr.k0 == pytest.approx(-1.0, abs=1e-12)
    M = _local_conic_matrix(0.0)
    xs = np.linspace(-2, 2, 9)
    P = np.column_stack([xs, xs ** 2 / 2, np.ones_like(xs)])
    assert np.allclose(np.einsum("ij,jk,ik->i", P, M, P), 0.0, atol=1e-14)
    assert np.linalg.matrix_rank(M) == 3 and M[1, 1] == 0.0


def test_local_form_is_fifth_order(pe_chain):
    p, k, _, _ = pe_chain
    L = p.total_length
    sigma = 0.2 * L
    dk = differentiate(k.k)(0.2) / L
    d = L * 1e-2 * 2.0 ** -np.arange(4)
    F = local_form(p, k, sigma, d)
    assert np.allclose(F / d ** 5, dk / 20, rtol=0.05)


# -- contact order ------------------------------------------------------------

def test_contact_order_at_generic_points(pe_chain):
    p, k, _, _ = pe_chain
    L = p.total_length
    crit = [cp.t for cp in k.critical_points]
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 10:
        t0 = rng.uniform()
        if min(abs((t0 - c + 0.5) % 1 - 0.5) for c in crit) < 0.02:
            continue
        co = contact_order(p, osculating_conic(p, k, t0 * L), t0 * L)
        dk = differentiate(k.k)(t0) / L
        assert co.order == 5 and abs(co.slope - 5) <= 0.2
        assert co.coefficient == pytest.approx(dk / 20, rel=0.05)
        checked += 1


def test_conic_against_itself_is_capped(ellipse_chain):
    p, k, _, _ = ellipse_chain
    q = osculating_conic(p, k, 0.3 * p.total_length)
    co = contact_order(p, q, 0.3 * p.total_length)
    assert co.order == 10 and co.slope == float("inf")


def test_tangent_line_times_line_at_infinity_has_contact_two():
    c = circle()
    # tangent at (1, 0) is x = 1; (x - 1) * 1 as a degenerate rank-2 conic
    q = Conic(np.array([[0.0, 0.0, 0.5], [0.0, 0.0, 0.0], [0.5, 0.0, -1.0]]))
    assert q.rank == 2
    co = contact_order(c, q, 0.0)
    assert co.order == 2


def test_contact_order_in_curve_parameter():
    c = circle()
    q = Conic(np.array([[1.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, -1.0]]))  # ellipse x^2 + 4y^2 = 1
    # meets the unit circle at (+-1, 0) with second-order (tangential) contact
    assert contact_order(c, q, 0.0).order == 2


def test_point_not_on_conic(pe_chain):
    p, k, _, _ = pe_chain
    q = osculating_conic(p, k, 0.0)
    with pytest.raises(PointNotOnConic):
        contact_order(p, q, 0.25 * p.total_length)


# -- sextactic points ---------------------------------------------------------

def test_perturbed_ellipse_sextactic_points(pe_chain):
    p, k, ode, _ = pe_chain
    rep = find_sextactic_points(p, k, ode)
    assert rep.count == 6 == k.critical_count
    assert not rep.degenerate_conic
    assert all(pt.contact_order == 6 for pt in rep.points)
    assert not any(pt.crossing for pt in rep.points)
    assert rep.coincidence_defect < 1e-6
    # oracle: sign changes of k' on a dense resampling
    dk = differentiate(k.k).resample(2 ** 13)
    assert count_sign_changes(dk).count == 6
    for pt in rep.points:
        assert np.allclose(p.source(pt.x), pt.point, atol=1e-10)


def test_ellipse_is_degenerate(ellipse_chain):
    p, k, ode, _ = ellipse_chain
    with pytest.raises(DegenerateConicCurve) as exc:
        find_sextactic_points(p, k, ode)
    rep = exc.value.details["report"]
    assert rep.degenerate_conic and rep.count == 0


def _single_degenerate_point(rep, mult):
    pts = [pt for pt in rep.points if pt.multiplicity == mult]
    assert len(pts) == 1
    return pts[0]


def test_double_zero_of_dk_crosses_its_conic():
    p, k, ode, _ = chain(engineered(**DOUBLE))
    rep = find_sextactic_points(p, k, ode, WIDE)
    pt = _single_degenerate_point(rep, 2)
    assert pt.contact_order == 7 and pt.crossing
    assert pt.crossing_offset > 0.0  # decided by the sign scan, not by parity
    simple = [q for q in rep.points if q.multiplicity == 1]
    assert all(q.contact_order == 6 and not q.crossing for q in simple)
    # a tangential zero makes the distinct count odd
    assert rep.count == 7


def test_triple_zero_of_dk_does_not_cross():
    # contact order 5 + 3 = 8 is even, so the curve stays on one side
    p, k, ode, _ = chain(engineered(**TRIPLE))
    rep = find_sextactic_points(p, k, ode, WIDE)
    pt = _single_degenerate_point(rep, 3)
    assert abs((pt.t + 0.5) % 1 - 0.5) < 1e-3
    assert pt.contact_order == 8 and not pt.crossing


# -- product orthogonality of h ----------------------------------------------

def test_lemma3_residuals(ellipse_chain, pe_chain):
    assert verify_lemma3(ellipse_chain[2], ellipse_chain[3]).absolute.max() < 1e-10
    res = verify_lemma3(pe_chain[2], pe_chain[3])
    assert res.max_relative < 1e-7
    assert len(res.pairs()) == 6


def test_lemma3_detects_corrupted_h(pe_chain):
    _, _, ode, lift = pe_chain
    bad = ProjectiveODE(ode.kappa, ode.v, ode.h + 0.01 * ode.h.max_abs())
    res = verify_lemma3(bad, lift)
    # phi_1 = 1 has no zeros, so int phi_1^2 (h + c) = c stays away from zero
    assert res.relative[0, 0] > 1e-3


# -- certificate --------------------------------------------------------------

def test_certificate_perturbed_ellipse():
    cert = six_vertices_certificate(perturbed_ellipse())
    assert cert.passed and cert.sextactic_count == 6 and cert.theorem2_bound == 6
    for stage in ("convexity", "affine", "lift", "disconjugacy", "lemma3", "theorem2", "sextactic"):
        assert stage in cert.chain
    assert cert.chain["disconjugacy"]["certified"]


def test_certificate_rejects_ellipse():
    with pytest.raises(DegenerateConicCurve) as exc:
        six_vertices_certificate(ellipse())
    assert exc.value.stage == "affine"


def test_certificate_strong_third_harmonic():
    c = ClosedCurve.from_fourier([[0, 0], [1.0, 0], [0, 0], [0.06, 0]],
                                 [[0, 0], [0, 1.0], [0, 0], [0, 0.04]])
    cert = six_vertices_certificate(c)
    k = cert.artifacts["curvature"]
    dk = differentiate(k.k).resample(2 ** 13)
    assert cert.passed and cert.sextactic_count >= 6
    assert cert.sextactic_count == count_sign_changes(dk).count


# -- duality ------------------------------------------------------------------

def test_dual_incidence(pe_chain):
    lift = pe_chain[3]
    dual = dual_curve(lift)
    scale = np.linalg.norm(dual.values, axis=1) * np.linalg.norm(lift.values, axis=1)
    assert np.max(np.abs(np.sum(dual.values * lift.values, axis=1)) / scale) < 1e-10
    assert np.max(np.abs(np.sum(dual.values * lift.jets[:, 1, :], axis=1))
                  / (np.linalg.norm(dual.values, axis=1) * np.linalg.norm(lift.jets[:, 1, :], axis=1))) < 1e-10


def test_dual_of_circle_is_circle():
    dual = lift_to_affine_curve(dual_curve(chain(circle())[3]))
    assert np.allclose(np.hypot(dual.x.values, dual.y.values), 1.0, atol=1e-10)


def test_dual_of_conic_is_conic(ellipse_chain):
    v = dual_curve(ellipse_chain[3]).values
    A = np.column_stack([v[:, i] * v[:, j] for i in range(3) for j in range(i, 3)])
    s = np.linalg.svd(A / np.linalg.norm(A, axis=0), compute_uv=False)
    assert s[-1] < 1e-10 * s[0] and s[-2] > 1e-3 * s[0]


def test_dual_sextactic_parameters_match(pe_chain):
    p, k, ode, lift = pe_chain
    primal = np.sort([pt.t for pt in find_sextactic_points(p, k, ode).points])
    dual = dual_sextactic_parameters(lift)
    # the dual chart is parametrised by the primal lift's parameter t
    assert dual.size == 6
    assert np.max(np.abs(np.sort(np.mod(dual, 1.0)) - primal)) < 1e-6


# -- invariance ---------------------------------------------------------------

def test_projective_invariance_of_sextactic_points(pe_chain):
    p, k, ode, _ = pe_chain
    base = find_sextactic_points(p, k, ode)
    T = PlaneTransform(np.array([[1.0, 0.2, 0.1], [-0.1, 0.9, 0.0], [0.15, -0.1, 1.0]]))
    p1, k1, o1, _ = chain(apply_transform(perturbed_ellipse(), T))
    moved = find_sextactic_points(p1, k1, o1)
    assert moved.count == base.count
    assert np.max(np.abs(np.array([q.x for q in moved.points]) - [q.x for q in base.points])) < 1e-7
    for a, b in zip(base.points, moved.points):
        assert np.allclose(T.apply_points(np.array([a.point]))[0], b.point, atol=1e-8)
