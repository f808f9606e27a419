import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from sixvertex.errors import IndistinguishableFromZero, NoNontrivialSolution, NotDisconjugate
from sixvertex.periodic import (PeriodicFunction, count_sign_changes, integrate_period,
                                random_band_limited)
from sixvertex.sturm import (LinearPeriodicODE, certify_corollary, certify_theorem1,
                             certify_theorem2, check_disconjugate, extremal_solution,
                             fundamental_system, harmonic_operator, harmonic_polynomial,
                             orthogonal_complement_sample, orthogonality_residuals,
                             prescribed_zero_solution, solution_basis)

from conftest import TWO_PI

N = 512


def pf(func, n=N):
    return PeriodicFunction.from_callable(func, n)


def recount(f, factor=8):
    """Oracle: raw sign flips of the spectral interpolant on a finer grid."""
    v = f.resample(factor * f.n).values
    s = np.sign(v[np.abs(v) > 1e-12 * np.max(np.abs(v))])
    return int(np.sum(s != np.roll(s, 1)))


@pytest.fixture(scope="module")
def h3():
    return harmonic_operator(1)


@pytest.fixture(scope="module")
def h3_fs(h3):
    return fundamental_system(h3)


def test_harmonic_polynomials():
    # d (d^2 + (2 pi)^2): ascending coefficients 0, (2 pi)^2, 0, 1
    assert np.allclose(harmonic_polynomial(1), [0.0, TWO_PI ** 2, 0.0, 1.0])
    assert harmonic_operator(2).order == 5


# -- fundamental systems --------------------------------------------------------

def test_periodic_monodromy():
    fs = fundamental_system(LinearPeriodicODE.constant([TWO_PI ** 2, 0.0, 1.0]))
    assert np.allclose(fs.monodromy, np.eye(2), atol=1e-9)
    t = np.arange(N) / N
    # canonical solutions: cos 2 pi x and sin 2 pi x / 2 pi
    assert np.allclose(fs.solution_samples[:, 0], np.cos(TWO_PI * t), atol=1e-10)
    assert np.allclose(fs.solution_samples[:, 1], np.sin(TWO_PI * t) / TWO_PI, atol=1e-10)


def test_anti_periodic_monodromy():
    fs = fundamental_system(LinearPeriodicODE.constant([np.pi ** 2, 0.0, 1.0]))
    assert np.allclose(fs.monodromy, -np.eye(2), atol=1e-9)


def test_polynomial_solutions_do_not_close():
    fs = fundamental_system(LinearPeriodicODE.constant([0.0, 0.0, 0.0, 1.0]))
    expected = np.array([[1.0, 1.0, 0.5], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
    assert np.allclose(fs.monodromy, expected, atol=1e-12)
    assert fs.periodicity_defects()[0] > 1.0


def test_liouville_relation():
    rng = np.random.default_rng(1)
    coeffs = tuple(random_band_limited(rng, N, 6) for _ in range(3))
    fs = fundamental_system(LinearPeriodicODE(coeffs))
    assert fs.liouville_defect < 1e-8
    assert abs(np.log(np.linalg.det(fs.monodromy)) + integrate_period(coeffs[-1])) < 1e-8


def test_matrix_at_continues_by_monodromy(h3_fs):
    Y = h3_fs.matrix_at(np.array([0.3, 1.3, -0.7]))
    assert np.allclose(Y[1], Y[0], atol=1e-9) and np.allclose(Y[2], Y[0], atol=1e-9)


# -- disconjugacy ---------------------------------------------------------------

def test_harmonic_third_order_is_disconjugate(h3):
    rep = check_disconjugate(h3)
    assert rep.certified and rep.periodicity == "periodic"
    assert rep.monodromy_defect < 1e-7 and rep.max_observed_zero_count == 2
    assert rep.extremal_failures == 0


def test_fast_oscillation_is_not_disconjugate():
    rep = check_disconjugate(LinearPeriodicODE.constant([0.0, (2 * TWO_PI) ** 2, 0.0, 1.0]))
    assert rep.periodicity == "periodic"
    assert not rep.certified and rep.max_observed_zero_count >= 4


def test_anti_periodic_second_order_is_disconjugate():
    rep = check_disconjugate(LinearPeriodicODE.constant([np.pi ** 2, 0.0, 1.0]))
    assert rep.certified and rep.periodicity == "anti_periodic"
    assert rep.max_observed_zero_count <= 1


def test_wrong_parity_is_not_certified():
    # order 2 with periodic solutions: cos 2 pi x has 2 zeros > 1
    rep = check_disconjugate(LinearPeriodicODE.constant([TWO_PI ** 2, 0.0, 1.0]))
    assert rep.periodicity == "periodic" and not rep.certified


def test_extremal_solution_is_nonnegative(h3_fs):
    # vanishing to order 2 at x0 gives a multiple of 1 - cos 2 pi (x - x0)
    t = np.arange(N) / N
    for x0 in (0.1, 0.55):
        v = h3_fs.combine(extremal_solution(h3_fs, x0))
        v = v / v[np.argmax(np.abs(v))]
        assert np.allclose(v, (1 - np.cos(TWO_PI * (t - x0))) / 2, atol=1e-9)


# -- prescribed zeros -----------------------------------------------------------

def test_zeros_at_zero_and_half(h3_fs):
    sub = prescribed_zero_solution(h3_fs, [(0.0, 1), (0.5, 1)])
    assert sub.dimension == 1
    t = np.arange(N) / N
    v = sub.samples()[:, 0]
    v = v / v[N // 4]
    assert np.allclose(v, np.sin(TWO_PI * t), atol=1e-9)


def test_double_zero(h3_fs):
    x0 = 0.3
    sub = prescribed_zero_solution(h3_fs, [(x0, 2)])
    assert sub.dimension == 1
    t = np.arange(N) / N
    v = sub.samples()[:, 0]
    target = 1 - np.cos(TWO_PI * (t - x0))
    v = v * (target @ v) / (v @ v)
    assert np.allclose(v, target, atol=1e-9)


def test_generic_conditions_leave_zero_solution(h3_fs):
    with pytest.raises(NoNontrivialSolution):
        prescribed_zero_solution(h3_fs, [(0.1, 1), (0.4, 1), (0.7, 1)])


def test_dimension_count(h3_fs):
    assert prescribed_zero_solution(h3_fs, [(0.2, 1)]).dimension == 2
    assert prescribed_zero_solution(h3_fs, []).dimension == 3
    with pytest.raises(ValueError):
        prescribed_zero_solution(h3_fs, [(0.2, 2), (0.5, 2)])


# -- orthogonal complements -----------------------------------------------------

def test_high_harmonic_is_already_orthogonal(h3_fs):
    f0 = pf(lambda x: np.cos(2 * TWO_PI * x))
    f = orthogonal_complement_sample(h3_fs, 0, False, f0=f0)
    assert np.allclose(f.values, f0.values, atol=1e-12)


def test_constant_projects_to_zero(h3_fs):
    f = orthogonal_complement_sample(h3_fs, 0, False, f0=PeriodicFunction.constant(1.0, N))
    assert f.max_abs() < 1e-12


def test_product_residuals(h3_fs):
    f = orthogonal_complement_sample(h3_fs, 42, True)
    basis = solution_basis(h3_fs, True)
    assert len(basis) == 6
    assert np.max(orthogonality_residuals(f, basis)) < 1e-9


def test_product_of_solutions_is_indistinguishable_from_zero(h3_fs):
    f0 = pf(lambda x: np.cos(TWO_PI * x) * np.sin(TWO_PI * x))
    f = orthogonal_complement_sample(h3_fs, 0, True, f0=f0)
    with pytest.raises(IndistinguishableFromZero):
        count_sign_changes(f, scale=f0.max_abs())


# -- theorem certificates -------------------------------------------------------

def test_theorem1_sharp_witness(h3):
    cert = certify_theorem1(h3, trials=0, witnesses=[pf(lambda x: np.cos(2 * TWO_PI * x))])
    assert cert.bound == 4 and cert.witness_counts == [4] and cert.passed


def test_theorem1_random_trials_with_recount(h3, h3_fs):
    cert = certify_theorem1(h3, trials=100, seed=0, fs=h3_fs)
    assert cert.passed and cert.min_count >= 4 and len(cert.counts) == 100
    assert cert.max_residual < 1e-9
    for seed in range(0, 100, 10):
        f = orthogonal_complement_sample(h3_fs, seed, False)
        assert recount(f) == cert.counts[seed]


def test_theorem1_order_five():
    ode = harmonic_operator(2)
    cert = certify_theorem1(ode, trials=20, witnesses=[pf(lambda x: np.cos(3 * TWO_PI * x))])
    assert cert.bound == 6 and cert.witness_counts == [6]
    assert cert.passed and cert.min_count == 6


def test_theorem1_rejects_even_order():
    with pytest.raises(ValueError):
        certify_theorem1(LinearPeriodicODE.constant([np.pi ** 2, 0.0, 1.0]))


def test_theorem_requires_disconjugacy():
    with pytest.raises(NotDisconjugate):
        certify_theorem1(LinearPeriodicODE.constant([0.0, (2 * TWO_PI) ** 2, 0.0, 1.0]), trials=1)


def test_theorem2_anti_periodic(h3):
    ode = LinearPeriodicODE.constant([np.pi ** 2, 0.0, 1.0])
    cert = certify_theorem2(ode, trials=50)
    assert cert.bound == 4 and cert.passed and cert.min_count >= 4


def test_theorem2_third_order(h3):
    cert = certify_theorem2(h3, trials=30)
    assert cert.bound == 6 and cert.passed and cert.min_count >= 6


# -- corollary --------------------------------------------------------------------

def test_corollary_explicit(h3):
    cert = certify_corollary(h3, pf(lambda x: np.cos(2 * TWO_PI * x)))
    # A cos 4 pi x = (4 pi)((4 pi)^2 - (2 pi)^2) sin 4 pi x
    assert cert.count == 4 and cert.passed and cert.adjoint_certified
    assert np.allclose(sorted(np.mod(cert.crossings, 1.0)), [0, 0.25, 0.5, 0.75], atol=1e-9)
    assert cert.orthogonality_residual < 1e-9


def test_corollary_on_a_solution_is_an_error(h3):
    with pytest.raises(IndistinguishableFromZero):
        certify_corollary(h3, pf(lambda x: np.cos(TWO_PI * x)))


def test_corollary_random_g(h3):
    counts = []
    for seed in range(20):
        g = random_band_limited(np.random.default_rng(seed), N, N // 8, decay=2.0)
        cert = certify_corollary(h3, g, seed=seed)
        assert cert.passed
        counts.append(cert.count)
    assert min(counts) >= 4


# -- adjoint ------------------------------------------------------------------------

@hsettings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_adjoint_consistency(seed):
    rng = np.random.default_rng(seed)
    ode = LinearPeriodicODE(tuple(random_band_limited(rng, N, 6) for _ in range(3)))
    g1, g2 = random_band_limited(rng, N, 16), random_band_limited(rng, N, 16)
    lhs = integrate_period(ode.apply(g1) * g2)
    rhs = integrate_period(g1 * ode.apply_adjoint(g2))
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))
    # the monic adjoint of an odd-order operator is minus the formal one
    monic = ode.adjoint().apply(g2).values
    assert np.allclose(monic, -ode.apply_adjoint(g2).values, atol=1e-9 * np.max(np.abs(monic)))
