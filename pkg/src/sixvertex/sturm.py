"""Periodic linear ODEs on the circle: fundamental systems, monodromy,
disconjugacy certificates and Sturm-type zero-count certificates.

An operator of order ``n`` is stored in monic normal form

    phi^(n) + u_{n-1} phi^(n-1) + ... + u_0 phi = 0

with period-1 coefficients. Everything here is a numerical certificate:
disconjugacy quantifies over all solutions, so it is sampled, not proven.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (GramSingular, IndistinguishableFromZero, IntegrationFailure,
                     NoNontrivialSolution, NotDisconjugate)
from .periodic import (PeriodicFunction, count_sign_changes, differentiate, inner,
                       integrate_period, locate_zero_clusters, random_band_limited)
from .settings import DEFAULT_SETTINGS, NumericSettings


@dataclass(frozen=True, eq=False)
class LinearPeriodicODE:
    coefficients: tuple[PeriodicFunction, ...]  # u_0 .. u_{n-1}

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        if not coeffs:
            raise ValueError("order must be at least 1")
        if len({c.n for c in coeffs}) != 1:
            raise ValueError("coefficients must share one grid")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def constant(cls, poly: Sequence[float], n: int = 512) -> "LinearPeriodicODE":
        """Constant-coefficient operator from ascending coefficients ``c_0..c_order``."""
        poly = np.asarray(poly, dtype=float)
        poly = poly / poly[-1]
        return cls(tuple(PeriodicFunction.constant(c, n) for c in poly[:-1]))

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def n(self) -> int:
        return self.coefficients[0].n

    def apply(self, g: PeriodicFunction) -> PeriodicFunction:
        """``A g`` by spectral differentiation."""
        out = differentiate(g, self.order)
        for i, u in enumerate(self.coefficients):
            out = out + u * (g if i == 0 else differentiate(g, i))
        return out

    def _full(self) -> list[PeriodicFunction]:
        return list(self.coefficients) + [PeriodicFunction.constant(1.0, self.n)]

    def apply_adjoint(self, g: PeriodicFunction) -> PeriodicFunction:
        """Formal adjoint ``sum_i (-1)^i (u_i g)^(i)`` (not normalised)."""
        out = PeriodicFunction.constant(0.0, self.n)
        for i, u in enumerate(self._full()):
            term = u * g
            out = out + (term if i == 0 else differentiate(term, i)) * (-1) ** i
        return out

    def adjoint(self) -> "LinearPeriodicODE":
        """Monic operator with the same solutions as the formal adjoint."""
        full = self._full()
        n = self.order
        coeffs = []
        for j in range(n):
            w = PeriodicFunction.constant(0.0, self.n)
            for i in range(j, n + 1):
                d = full[i] if i == j else differentiate(full[i], i - j)
                w = w + d * ((-1) ** i * comb(i, j))
            coeffs.append(w * (-1) ** n)
        return LinearPeriodicODE(tuple(coeffs))

    @cached_property
    def _rhs_data(self):
        mats = np.array([u.coeffs for u in self.coefficients])  # (n, K+1, 2)
        mag = np.max(np.abs(mats), axis=(0, 2))
        active = np.flatnonzero(mag > 1e-15 * max(np.max(mag), 1e-300))
        kmax = int(active[-1]) if active.size else 0
        return mats[:, : kmax + 1, 0], mats[:, : kmax + 1, 1], np.arange(kmax + 1)

    def coefficient_values(self, t: float) -> np.ndarray:
        a, b, k = self._rhs_data
        ph = 2.0 * np.pi * k * t
        return a @ np.cos(ph) + b @ np.sin(ph)

    def companion(self, t: float) -> np.ndarray:
        n = self.order
        C = np.zeros((n, n))
        C[np.arange(n - 1), np.arange(1, n)] = 1.0
        C[-1] = -self.coefficient_values(t)
        return C


def harmonic_polynomial(m: int) -> np.ndarray:
    """Ascending coefficients of ``s (s^2 + (2 pi)^2) ... (s^2 + (2 pi m)^2)``."""
    poly = np.polynomial.Polynomial([0.0, 1.0])
    for j in range(1, m + 1):
        poly = poly * np.polynomial.Polynomial([(2 * np.pi * j) ** 2, 0.0, 1.0])
    return poly.coef


def harmonic_operator(m: int, n: int = 512) -> LinearPeriodicODE:
    """Order ``2m + 1`` operator whose solutions are the harmonics ``<= m``."""
    return LinearPeriodicODE.constant(harmonic_polynomial(m), n)


@dataclass(frozen=True, eq=False)
class FundamentalSystem:
    """Canonical solutions ``Y(t)`` with ``Y(0) = I``; row i holds the i-th derivatives."""

    ode: LinearPeriodicODE
    states: np.ndarray  # (N, n, n) at the grid points
    monodromy: np.ndarray
    dense: object

    @property
    def order(self) -> int:
        return self.ode.order

    @property
    def n(self) -> int:
        return self.states.shape[0]

    def matrix_at(self, t) -> np.ndarray:
        """``Y(t)`` for arbitrary real ``t`` (shape ``(..., n, n)``)."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        whole = np.floor(flat)
        frac = flat - whole
        n = self.order
        out = self.dense(frac).T.reshape(-1, n, n)
        for i, w in enumerate(whole):
            if w != 0:
                out[i] = out[i] @ np.linalg.matrix_power(self.monodromy, int(w))
        return out.reshape(t.shape + (n, n))

    @property
    def solution_samples(self) -> np.ndarray:
        """``(N, n)``: value of each canonical solution on the grid."""
        return self.states[:, 0, :]

    def combine(self, a) -> np.ndarray:
        return self.solution_samples @ np.asarray(a, dtype=float)

    @property
    def liouville_defect(self) -> float:
        sign, logdet = np.linalg.slogdet(self.monodromy)
        if sign <= 0:
            return float("inf")
        top = self.ode.coefficients[-1]
        return float(abs(logdet + integrate_period(top)))

    def periodicity_defects(self) -> tuple[float, float]:
        eye = np.eye(self.order)
        return (float(np.linalg.norm(self.monodromy - eye)),
                float(np.linalg.norm(self.monodromy + eye)))


def fundamental_system(ode: LinearPeriodicODE, settings: NumericSettings = DEFAULT_SETTINGS) -> FundamentalSystem:
    """Integrate the n canonical initial-value problems over one period."""
    n = ode.order
    N = ode.n

    def rhs(t, y):
        return (ode.companion(t) @ y.reshape(n, n)).ravel()

    grid = np.arange(N) / N
    sol = solve_ivp(rhs, (0.0, 1.0), np.eye(n).ravel(), method="DOP853",
                    rtol=settings.ode_rtol, atol=settings.ode_atol,
                    dense_output=True, t_eval=np.append(grid, 1.0))
    if not sol.success:
        raise IntegrationFailure(f"integration failed: {sol.message}")
    states = sol.y.T.reshape(-1, n, n)
    return FundamentalSystem(ode, states[:-1], states[-1], sol.sol)


# ---------------------------------------------------------------------------
# disconjugacy

@dataclass(frozen=True)
class DisconjugacyReport:
    order: int
    periodicity: str  # "periodic" | "anti_periodic" | "neither"
    monodromy_defect: float
    max_observed_zero_count: int
    sample_count: int
    extremal_failures: int
    liouville_defect: float
    certified: bool
    note: str = ("zero counts are sign changes (plus tangential zeros of extremal "
                 "solutions); pathological tangencies can be undercounted")


def _on_circle(values: np.ndarray, anti: bool) -> PeriodicFunction:
    """Period-1 function for a periodic sample set; the period-2 double cover otherwise."""
    if anti:
        return PeriodicFunction(np.concatenate([values, -values]))
    return PeriodicFunction(values)


def _sign_change_count(values: np.ndarray, anti: bool, settings: NumericSettings) -> int:
    f = _on_circle(values, anti)
    count = count_sign_changes(f, settings=settings).count
    return count // 2 if anti else count


def extremal_solution(fs: FundamentalSystem, x0: float) -> np.ndarray:
    """Coefficients of the solution vanishing to order ``n - 1`` at ``x0``."""
    n = fs.order
    rows = fs.matrix_at(x0)[: n - 1]
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    _, _, vt = np.linalg.svd(rows)
    return vt[-1]


def check_disconjugate(ode: LinearPeriodicODE, *, fs: FundamentalSystem | None = None,
                       seed: int = 0, settings: NumericSettings = DEFAULT_SETTINGS) -> DisconjugacyReport:
    """Monodromy test, extremal-solution test and random-solution sampling."""
    fs = fs or fundamental_system(ode, settings)
    n = ode.order
    dp, da = fs.periodicity_defects()
    if dp < settings.monodromy_tol:
        periodicity = "periodic"
    elif da < settings.monodromy_tol:
        periodicity = "anti_periodic"
    else:
        periodicity = "neither"
    wanted = "periodic" if n % 2 else "anti_periodic"
    defect = dp if n % 2 else da
    limit = n - 1
    if periodicity != wanted:
        return DisconjugacyReport(n, periodicity, defect, -1, 0, 0, fs.liouville_defect, False)

    anti = periodicity == "anti_periodic"
    max_count = 0
    failures = 0
    window = 1e-2
    p = settings.extremal_points
    for x0 in (np.arange(p) + 0.37) / p:
        values = fs.combine(extremal_solution(fs, x0))
        f = _on_circle(values, anti)
        clusters = locate_zero_clusters(f, settings=settings)
        centers = [x0 / 2, (x0 + 1) / 2] if anti else [x0]
        width = window / 2 if anti else window
        extra = [c for c in clusters
                 if min(abs((c.x - z + 0.5) % 1.0 - 0.5) for z in centers) > width]
        extra_mult = sum(c.multiplicity for c in extra) // (2 if anti else 1)
        total = limit + extra_mult
        max_count = max(max_count, total)
        if extra_mult:
            failures += 1

    rng = np.random.default_rng(seed)
    for _ in range(settings.disconjugacy_samples):
        a = rng.standard_normal(n)
        a /= np.linalg.norm(a)
        max_count = max(max_count, _sign_change_count(fs.combine(a), anti, settings))

    certified = failures == 0 and max_count <= limit
    return DisconjugacyReport(n, periodicity, defect, max_count,
                              settings.disconjugacy_samples + p, failures,
                              fs.liouville_defect, certified)


# ---------------------------------------------------------------------------
# solutions with prescribed zeros

@dataclass(frozen=True, eq=False)
class SolutionSubspace:
    fs: FundamentalSystem
    basis: np.ndarray  # (n, d), orthonormal coefficient vectors
    singular_values: np.ndarray

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    def samples(self) -> np.ndarray:
        """``(N, d)`` grid values of the basis solutions."""
        return self.fs.solution_samples @ self.basis


def prescribed_zero_solution(fs: FundamentalSystem, conditions: Sequence[tuple[float, int]],
                             settings: NumericSettings = DEFAULT_SETTINGS) -> SolutionSubspace:
    """Solutions vanishing to the given orders at the given points."""
    n = fs.order
    if sum(m for _, m in conditions) > n:
        raise ValueError("more scalar conditions than the order")
    rows = [fs.matrix_at(x0)[:m] for x0, m in conditions if m > 0]
    if not rows:
        return SolutionSubspace(fs, np.eye(n), np.zeros(0))
    A = np.vstack(rows)
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    _, s, vt = np.linalg.svd(A)
    s_full = np.zeros(n)
    s_full[: s.size] = s
    null = s_full <= settings.nullspace_tol * max(s_full[0], 1.0)
    if not np.any(null):
        raise NoNontrivialSolution("only the zero solution meets the conditions",
                                   singular_values=s_full.tolist())
    return SolutionSubspace(fs, vt[null].T, s_full)


# ---------------------------------------------------------------------------
# orthogonal complements and theorem certificates

def solution_basis(fs: FundamentalSystem, products: bool) -> list[PeriodicFunction]:
    """Solutions (odd order) or symmetric products of solutions, as circle functions."""
    sol = fs.solution_samples
    n = fs.order
    if products:
        return [PeriodicFunction(sol[:, i] * sol[:, j]) for i in range(n) for j in range(i, n)]
    dp, _ = fs.periodicity_defects()
    if dp > 1e3 * DEFAULT_SETTINGS.monodromy_tol:
        raise ValueError("solutions are not periodic; use products")
    return [PeriodicFunction(sol[:, i]) for i in range(n)]


def _orthonormal_span(basis: list[PeriodicFunction], products: bool,
                      settings: NumericSettings) -> np.ndarray:
    B = np.column_stack([b.values for b in basis]) / np.sqrt(basis[0].n)
    u, s, _ = np.linalg.svd(B, full_matrices=False)
    if s[0] == 0.0:
        raise GramSingular("empty projection basis")
    keep = s > s[0] / np.sqrt(settings.gram_cond_max)
    if not products and not np.all(keep):
        # Gram condition number is s_max^2 / s_min^2
        raise GramSingular("solutions are numerically dependent",
                           condition=float((s[0] / s[-1]) ** 2))
    # products may be dependent (e.g. phi2^2 = phi1 phi3 on a conic); project on their span
    return u[:, keep]


def project_out(f0: PeriodicFunction, basis: list[PeriodicFunction], products: bool,
                settings: NumericSettings = DEFAULT_SETTINGS) -> PeriodicFunction:
    Q = _orthonormal_span(basis, products, settings)
    v = f0.values / np.sqrt(f0.n)
    for _ in range(2):
        v = v - Q @ (Q.T @ v)
    return PeriodicFunction(v * np.sqrt(f0.n))


def orthogonality_residuals(f: PeriodicFunction, basis: list[PeriodicFunction],
                            scale: float | None = None) -> np.ndarray:
    """``|<f, b_i>| / (|f|_2 |b_i|_2)``; pass ``scale`` to replace ``|f|_2``."""
    nf = scale if scale is not None else np.sqrt(inner(f, f))
    return np.array([abs(inner(f, b)) / (nf * np.sqrt(inner(b, b))) for b in basis])


def _random_source(fs: FundamentalSystem, seed: int, settings: NumericSettings) -> PeriodicFunction:
    harmonics = max(1, int(settings.band_fraction * (fs.n // 2)))
    return random_band_limited(np.random.default_rng(seed), fs.n, harmonics, decay=2.0)


def orthogonal_complement_sample(fs: FundamentalSystem, seed: int, products: bool,
                                 f0: PeriodicFunction | None = None,
                                 settings: NumericSettings = DEFAULT_SETTINGS) -> PeriodicFunction:
    """Random band-limited function with its projection on solutions (or products) removed."""
    if f0 is None:
        f0 = _random_source(fs, seed, settings)
    return project_out(f0, solution_basis(fs, products), products, settings)


@dataclass(frozen=True)
class TheoremCertificate:
    theorem: str
    order: int
    bound: int
    counts: list[int]
    witness_counts: list[int]
    degenerate_trials: int
    max_residual: float
    passed: bool
    disconjugacy: DisconjugacyReport

    @property
    def min_count(self) -> int:
        allc = self.counts + self.witness_counts
        return min(allc) if allc else -1


def _certify(ode, theorem, products, bound, trials, seed, witnesses, fs, report, settings):
    fs = fs or fundamental_system(ode, settings)
    report = report or check_disconjugate(ode, fs=fs, seed=seed, settings=settings)
    if not report.certified:
        raise NotDisconjugate(f"{theorem}: operator is not certified disconjugate", report=report)
    basis = solution_basis(fs, products)
    counts, residual, degenerate = [], 0.0, 0
    for i in range(trials):
        f0 = _random_source(fs, seed + i, settings)
        f = project_out(f0, basis, products, settings)
        scale = np.sqrt(inner(f0, f0))
        residual = max(residual, float(np.max(orthogonality_residuals(f, basis, scale))))
        try:
            counts.append(count_sign_changes(f, scale=f0.max_abs(), settings=settings).count)
        except IndistinguishableFromZero:
            degenerate += 1
    wcounts = []
    for w in witnesses:
        residual = max(residual, float(np.max(orthogonality_residuals(w, basis))))
        wcounts.append(count_sign_changes(w, settings=settings).count)
    allc = counts + wcounts
    passed = bool(allc) and min(allc) >= bound
    return TheoremCertificate(theorem, ode.order, bound, counts, wcounts, degenerate,
                              residual, passed, report)


def certify_theorem1(ode: LinearPeriodicODE, trials: int = 100, *, seed: int = 0,
                     witnesses: Sequence[PeriodicFunction] = (), fs: FundamentalSystem | None = None,
                     report: DisconjugacyReport | None = None,
                     settings: NumericSettings = DEFAULT_SETTINGS) -> TheoremCertificate:
    """Functions orthogonal to all solutions of an order-(2n+1) disconjugate operator
    change sign at least 2n+2 times."""
    if ode.order % 2 == 0:
        raise ValueError("the solution-orthogonality bound concerns odd-order operators")
    return _certify(ode, "theorem1", False, ode.order + 1, trials, seed, witnesses, fs, report, settings)


def certify_theorem2(ode: LinearPeriodicODE, trials: int = 100, *, seed: int = 0,
                     witnesses: Sequence[PeriodicFunction] = (), fs: FundamentalSystem | None = None,
                     report: DisconjugacyReport | None = None,
                     settings: NumericSettings = DEFAULT_SETTINGS) -> TheoremCertificate:
    """Functions orthogonal to all products of two solutions of an order-n
    disconjugate operator change sign at least 2n times."""
    return _certify(ode, "theorem2", True, 2 * ode.order, trials, seed, witnesses, fs, report, settings)


@dataclass(frozen=True)
class CorollaryCertificate:
    order: int
    bound: int
    count: int
    crossings: list[float]
    orthogonality_residual: float
    adjoint_certified: bool
    passed: bool
    disconjugacy: DisconjugacyReport = field(repr=False, default=None)


def certify_corollary(ode: LinearPeriodicODE, g: PeriodicFunction, *, seed: int = 0,
                      settings: NumericSettings = DEFAULT_SETTINGS) -> CorollaryCertificate:
    """``f = A g`` changes sign at least ``order + 1`` times; cross-checked against
    the solutions of the adjoint operator."""
    if ode.order % 2 == 0:
        raise ValueError("the corollary concerns odd-order operators")
    report = check_disconjugate(ode, seed=seed, settings=settings)
    if not report.certified:
        raise NotDisconjugate("operator is not certified disconjugate", report=report)
    f = ode.apply(g)
    scale = differentiate(g, ode.order).max_abs() + sum(
        (u * (g if i == 0 else differentiate(g, i))).max_abs() for i, u in enumerate(ode.coefficients))
    changes = count_sign_changes(f, scale=scale, settings=settings)
    adj = ode.adjoint()
    adj_fs = fundamental_system(adj, settings)
    adj_report = check_disconjugate(adj, fs=adj_fs, seed=seed, settings=settings)
    basis = [PeriodicFunction(v) for v in adj_fs.solution_samples.T]
    residual = float(np.max(orthogonality_residuals(f, basis)))
    bound = ode.order + 1
    return CorollaryCertificate(ode.order, bound, changes.count, changes.crossings.tolist(),
                                residual, adj_report.certified,
                                changes.count >= bound and adj_report.certified, report)
