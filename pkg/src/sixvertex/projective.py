"""Curves in RP^2 as solutions of ``phi''' = kappa phi' + v phi``.

The curve-to-equation direction goes through the affine parameter, where
the homogeneous lift is ``(1, X, Y)``, ``kappa = k`` and ``v = 0``. All
functions live on the normalised parameter ``t = sigma / L``; a linear
change of parameter multiplies ``kappa`` by ``L**2`` and ``h`` by ``L**3``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affine import AffineCurvature, AffineParametrization
from .errors import EverywhereDegenerate, NotPeriodic, ResidualTooLarge
from .periodic import (PeriodicFunction, antiderivative, differentiate,
                       integrate_period, locate_zero_clusters)
from .settings import DEFAULT_SETTINGS, NumericSettings
from .sturm import (DisconjugacyReport, FundamentalSystem, LinearPeriodicODE,
                    check_disconjugate, fundamental_system)


@dataclass(frozen=True, eq=False)
class ProjectiveODE:
    kappa: PeriodicFunction
    v: PeriodicFunction
    h: PeriodicFunction
    parameter_kind: str = "original"  # "affine" | "original" | "projective"
    total_length: float | None = None  # affine length L when parameter_kind == "affine"

    @classmethod
    def from_coefficients(cls, kappa: PeriodicFunction, v: PeriodicFunction,
                          parameter_kind: str = "original",
                          total_length: float | None = None) -> "ProjectiveODE":
        return cls(kappa, v, v - differentiate(kappa) * 0.5, parameter_kind, total_length)

    @property
    def n(self) -> int:
        return self.kappa.n

    def as_linear_ode(self) -> LinearPeriodicODE:
        zero = PeriodicFunction.constant(0.0, self.n)
        return LinearPeriodicODE((-self.v, -self.kappa, zero))

    def residual(self, phi: PeriodicFunction) -> float:
        """Relative defect of ``phi`` as a solution."""
        d1, d3 = differentiate(phi, 1), differentiate(phi, 3)
        r = d3 - self.kappa * d1 - self.v * phi
        scale = max(d3.max_abs(), (self.kappa * d1).max_abs(), (self.v * phi).max_abs(), 1e-300)
        return r.max_abs() / scale


def symmetric_part(kappa: PeriodicFunction, g: PeriodicFunction) -> PeriodicFunction:
    """``A0 g = g''' - (kappa g' + (kappa g)') / 2``; antisymmetric in L^2(S^1)."""
    return differentiate(g, 3) - (kappa * differentiate(g) + differentiate(kappa * g)) * 0.5


@dataclass(frozen=True, eq=False)
class HomogeneousLift:
    """Three solutions ``phi_i`` on the grid: ``jets[j, d, i]`` is ``phi_i^(d)(t_j)``."""

    jets: np.ndarray
    monodromy_defect: float = 0.0
    periodic: bool = True

    @classmethod
    def from_functions(cls, phis) -> "HomogeneousLift":
        cols = []
        for phi in phis:
            cols.append([phi.values, differentiate(phi, 1).values, differentiate(phi, 2).values])
        return cls(np.transpose(np.array(cols), (2, 1, 0)))

    @property
    def n(self) -> int:
        return self.jets.shape[0]

    @property
    def values(self) -> np.ndarray:
        """``(N, 3)`` homogeneous coordinates."""
        return self.jets[:, 0, :]

    def phi(self, i: int) -> PeriodicFunction:
        if not self.periodic:
            raise NotPeriodic("lift does not close up; no periodic representation",
                              monodromy_defect=self.monodromy_defect)
        return PeriodicFunction(self.jets[:, 0, i])

    @property
    def functions(self) -> tuple[PeriodicFunction, PeriodicFunction, PeriodicFunction]:
        return self.phi(0), self.phi(1), self.phi(2)

    def wronskian(self) -> np.ndarray:
        return np.linalg.det(self.jets)

    def wronskian_defect(self) -> float:
        w = self.wronskian()
        return float(np.ptp(w) / np.max(np.abs(w)))


def curve_to_ode(p: AffineParametrization, k: AffineCurvature,
                 settings: NumericSettings = DEFAULT_SETTINGS) -> tuple[ProjectiveODE, HomogeneousLift]:
    """Canonical equation of the curve in (normalised) affine parameter."""
    L = p.total_length
    kappa = k.k * L ** 2
    ode = ProjectiveODE.from_coefficients(kappa, PeriodicFunction.constant(0.0, kappa.n), "affine", L)
    phis = (PeriodicFunction.constant(1.0, kappa.n), p.curve.x, p.curve.y)
    residual = max(ode.residual(phi) for phi in phis[1:])
    if residual > settings.lift_residual_tol:
        raise ResidualTooLarge(f"lift residual {residual:.2e} exceeds tolerance; increase grid_size",
                               residual=residual)
    return ode, HomogeneousLift.from_functions(phis)


def pull_back_h(ode: ProjectiveODE, p: AffineParametrization) -> PeriodicFunction:
    """``h`` as a cubic differential in the source curve's own parameter."""
    x = p.source.x.grid
    dt_dx = 1.0 + differentiate(p.tau_periodic).values
    return PeriodicFunction(ode.h(p.t_of_x(x)) * dt_dx ** 3)


def projective_length_element(ode: ProjectiveODE) -> PeriodicFunction:
    return PeriodicFunction(np.cbrt(ode.h.values))


@dataclass(frozen=True, eq=False)
class ProjectiveCurvature:
    values: np.ndarray  # kappa / 4 in the projective parameter, at the grid points
    mask: np.ndarray  # True where defined
    singular_points: list[float]  # zeros of h
    arclength: np.ndarray  # projective arclength at the grid points
    total_length: float


def projective_curvature(ode: ProjectiveODE,
                         settings: NumericSettings = DEFAULT_SETTINGS) -> ProjectiveCurvature:
    """Projective curvature, away from the zeros of ``h``.

    With ``e = h**(1/3)`` the equation rewritten in the parameter ``int e``
    has ``h = 1`` and ``kappa`` replaced by
    ``(kappa + 2 e''/e - 3 (e'/e)**2) / e**2``.
    """
    h = ode.h
    if h.max_abs() < settings.degenerate_tol * max(ode.kappa.max_abs(), 1.0):
        raise EverywhereDegenerate("h vanishes identically: the curve is a conic")
    zeros = [c.x for c in locate_zero_clusters(h, settings=settings)]
    e = np.cbrt(h.values)
    h1 = differentiate(h).values
    h2 = differentiate(h, 2).values
    t = h.grid
    dist = np.full(t.size, np.inf)
    for z in zeros:
        dist = np.minimum(dist, np.abs((t - z + 0.5) % 1.0 - 0.5))
    mask = (dist > settings.cluster_tol) & (e != 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        de = h1 / (3.0 * e ** 2)
        dde = h2 / (3.0 * e ** 2) - 2.0 * h1 ** 2 / (9.0 * e ** 5)
        curv = (ode.kappa.values + 2.0 * dde / e - 3.0 * (de / e) ** 2) / (4.0 * e ** 2)
    curv = np.where(mask, curv, np.nan)
    elem = PeriodicFunction(e)
    mean, periodic = antiderivative(elem)
    arclength = mean * t + periodic.values
    return ProjectiveCurvature(curv, mask, zeros, arclength, integrate_period(elem))


def ode_to_curve(ode: ProjectiveODE, initial_frame=None, *, fs: FundamentalSystem | None = None,
                 settings: NumericSettings = DEFAULT_SETTINGS) -> HomogeneousLift:
    """Integrate the equation from three initial triples ``(phi, phi', phi'')(0)``.

    ``initial_frame[i]`` is the initial triple of the i-th solution.
    """
    frame = np.eye(3) if initial_frame is None else np.asarray(initial_frame, dtype=float)
    if abs(np.linalg.det(frame)) < 1e-12 * np.linalg.norm(frame) ** 3:
        raise ValueError("initial frame is degenerate")
    fs = fs or fundamental_system(ode.as_linear_ode(), settings)
    jets = fs.states @ frame.T
    end = fs.monodromy @ frame.T
    defect = float(np.linalg.norm(end - frame.T) / np.linalg.norm(frame))
    return HomogeneousLift(jets, defect, defect < settings.monodromy_tol)


def check_disconjugacy_of_lift(ode: ProjectiveODE, *, fs: FundamentalSystem | None = None,
                               settings: NumericSettings = DEFAULT_SETTINGS) -> DisconjugacyReport:
    return check_disconjugate(ode.as_linear_ode(), fs=fs, settings=settings)


def conic_from_flat_h(kappa: PeriodicFunction,
                      settings: NumericSettings = DEFAULT_SETTINGS) -> tuple[HomogeneousLift, float]:
    """Integrate the ``h = 0`` equation from squares of ``psi'' = (kappa/4) psi``.

    Returns the lift and ``max|phi2^2 - phi1 phi3|`` relative to ``max|phi|^2``.
    """
    ode = ProjectiveODE.from_coefficients(kappa, differentiate(kappa) * 0.5)
    k0 = float(kappa.values[0])
    # psi1 = (1, 0), psi2 = (0, 1) at t = 0; triples of psi1^2, psi1 psi2, psi2^2
    frame = np.array([[1.0, 0.0, k0 / 2.0],
                      [0.0, 1.0, 0.0],
                      [0.0, 0.0, 2.0]])
    lift = ode_to_curve(ode, frame, settings=settings)
    phi = lift.values
    defect = np.max(np.abs(phi[:, 1] ** 2 - phi[:, 0] * phi[:, 2])) / np.max(phi ** 2)
    return lift, float(defect)


def register_projective(source: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    """3x3 ``Q`` minimising ``sum |Q source_j x target_j|^2`` with ``|Q| = 1``.

    Returns ``Q`` and the worst normalised cross product (sine of the angle
    between ``Q source_j`` and ``target_j``).
    """
    psi = source / np.linalg.norm(source, axis=1, keepdims=True)
    phi = target / np.linalg.norm(target, axis=1, keepdims=True)
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    # (Q psi) x phi, component c = eps[c, a, b'] Q[a, b] psi[b] phi[b']
    A = np.einsum("cae,je,jb->jcab", eps, phi, psi).reshape(-1, 9)
    _, _, vt = np.linalg.svd(A, full_matrices=False)
    Q = vt[-1].reshape(3, 3)
    img = psi @ Q.T
    cross = np.linalg.norm(np.cross(img, phi), axis=1) / np.linalg.norm(img, axis=1)
    return Q, float(np.max(cross))


def roundtrip_residual(p: AffineParametrization, k: AffineCurvature, *,
                       settings: NumericSettings = DEFAULT_SETTINGS) -> float:
    """Curve -> equation -> curve, compared up to a projective map."""
    ode, lift = curve_to_ode(p, k, settings)
    rebuilt = ode_to_curve(ode, settings=settings)
    _, residual = register_projective(lift.values, rebuilt.values)
    return residual
