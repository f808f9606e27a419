"""Affine arclength and affine curvature of locally convex curves.

Quantities living on the affine parametrisation are stored as functions of
the normalised parameter ``t = sigma / L`` (``L`` the total affine length),
so they sit on the same period-1 grid machinery as everything else.
Derivatives with respect to sigma pick up a factor ``L**-k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .curves import ClosedCurve, det2
from .errors import NotLocallyConvex
from .periodic import (PeriodicFunction, antiderivative, count_sign_changes,
                       differentiate, locate_zero_clusters)
from .settings import DEFAULT_SETTINGS, NumericSettings


def affine_length_element(c: ClosedCurve, settings: NumericSettings = DEFAULT_SETTINGS) -> PeriodicFunction:
    """``det(c', c'')**(1/3)`` on the curve's own grid."""
    det = c.det12
    if np.min(det) <= settings.zero_tol * np.max(np.abs(det)):
        raise NotLocallyConvex("det(c', c'') changes sign or vanishes",
                               min_det=float(np.min(det)))
    return PeriodicFunction(np.cbrt(det))


@dataclass(frozen=True, eq=False)
class AffineParametrization:
    source: ClosedCurve
    total_length: float
    tau_periodic: PeriodicFunction  # t(x) = x + tau_periodic(x)
    x_nodes: np.ndarray  # source parameter at t_j = j / N
    curve: ClosedCurve  # the source resampled uniformly in sigma

    def t_of_x(self, x):
        x = np.asarray(x, dtype=float)
        return x + self.tau_periodic(x)

    def sigma_of_x(self, x):
        return self.total_length * self.t_of_x(x)

    def x_of_t(self, t, tol: float = 1e-14):
        """Invert the monotone map ``x -> t(x)`` (Newton inside a bisection bracket)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        shift = np.max(np.abs(self.tau_periodic.values)) * 1.5 + 1e-3
        lo, hi = t - shift, t + shift
        x = t.copy()
        dtau = differentiate(self.tau_periodic)
        for _ in range(100):
            r = self.t_of_x(x) - t
            lo = np.where(r < 0, x, lo)
            hi = np.where(r > 0, x, hi)
            step = r / (1.0 + dtau(x))
            x_new = x - step
            outside = (x_new <= lo) | (x_new >= hi)
            x_new = np.where(outside, 0.5 * (lo + hi), x_new)
            if np.max(np.abs(x_new - x)) < tol:
                x = x_new
                break
            x = x_new
        return x

    def derivative(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Grid values of ``d^order c / d sigma^order``."""
        dx, dy = self.curve.derivative(order)
        s = self.total_length ** -order
        return dx.values * s, dy.values * s

    @property
    def unimodularity_defect(self) -> float:
        return float(np.max(np.abs(det2(self.derivative(1), self.derivative(2)) - 1.0)))

    def point(self, sigma):
        return self.curve(np.asarray(sigma) / self.total_length)


def reparametrize_affine(c: ClosedCurve, settings: NumericSettings = DEFAULT_SETTINGS) -> AffineParametrization:
    element = affine_length_element(c, settings)
    length0, periodic = antiderivative(element)
    tau_periodic = periodic / length0
    n = c.n
    t_nodes = np.arange(n) / n
    proto = AffineParametrization(c, length0, tau_periodic, t_nodes, c)
    x_nodes = proto.x_of_t(t_nodes)
    resampled = ClosedCurve(PeriodicFunction(c.x(x_nodes)), PeriodicFunction(c.y(x_nodes)),
                            reversed=c.reversed)
    # continuum: det(c_t, c_tt) == L**3; pin L to the grid mean
    length = float(np.cbrt(np.mean(resampled.det12)))
    return AffineParametrization(c, length, tau_periodic, x_nodes, resampled)


@dataclass(frozen=True)
class CriticalPoint:
    sigma: float
    t: float
    value: float
    second_derivative_sign: int
    multiplicity: int


@dataclass(frozen=True, eq=False)
class AffineCurvature:
    """Affine curvature ``k`` as a function of ``t = sigma / L``."""

    k: PeriodicFunction
    total_length: float
    residual: float
    degenerate: bool
    critical_points: list[CriticalPoint] = field(default_factory=list)
    recount: int | None = None

    @cached_property
    def dk_dsigma(self) -> PeriodicFunction:
        return differentiate(self.k) / self.total_length

    def __call__(self, sigma):
        return self.k(np.asarray(sigma) / self.total_length)

    @property
    def critical_count(self) -> int:
        return len(self.critical_points)


def affine_curvature(p: AffineParametrization, settings: NumericSettings = DEFAULT_SETTINGS) -> AffineCurvature:
    """``k = det(c''', c'')`` in the affine parameter, with its critical points."""
    d1, d2, d3 = (p.derivative(i) for i in (1, 2, 3))
    k = PeriodicFunction(det2(d3, d2))
    res = np.hypot(d3[0] - k.values * d1[0], d3[1] - k.values * d1[1])
    residual = float(np.max(res) / max(np.max(np.hypot(*d3)), np.max(np.hypot(*d1))))
    L = p.total_length
    dk = differentiate(k)  # d k / d t
    kmax = max(k.max_abs(), 1.0)
    if dk.max_abs() / L < settings.degenerate_tol * kmax / L:
        return AffineCurvature(k, L, residual, True)

    clusters = locate_zero_clusters(dk, settings=settings)
    d2k = differentiate(k, 2)
    points = []
    for cl in clusters:
        curv = float(d2k(cl.x))
        points.append(CriticalPoint(sigma=cl.x * L, t=cl.x, value=float(k(cl.x)),
                                    second_derivative_sign=int(np.sign(curv)) if cl.multiplicity == 1 else 0,
                                    multiplicity=cl.multiplicity))
    recount = count_sign_changes(dk.resample(2 * dk.n), settings=settings).count
    return AffineCurvature(k, L, residual, False, points, recount)
