"""Closed parametrised plane curves and plane transforms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import LeavesAffineChart, NotImmersed
from .periodic import PeriodicFunction, differentiate, integrate_period
from .settings import DEFAULT_SETTINGS, NumericSettings


def det2(u: tuple[np.ndarray, np.ndarray], w: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    return u[0] * w[1] - u[1] * w[0]


def _reverse(f: PeriodicFunction) -> PeriodicFunction:
    return PeriodicFunction(np.roll(f.values[::-1], 1))


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """A closed curve ``x -> (X(x), Y(x))`` on the period-1 circle.

    Build instances with :meth:`from_components` (or the other factories),
    which orient the curve so that ``det(c', c'') > 0`` on average. The
    ``reversed`` flag records whether the parameter was flipped; original
    parameter values are recovered with :meth:`source_parameter`.
    """

    x: PeriodicFunction
    y: PeriodicFunction
    reversed: bool = False

    @classmethod
    def from_components(cls, x: PeriodicFunction, y: PeriodicFunction,
                        normalize: bool = True) -> "ClosedCurve":
        if x.n != y.n:
            raise ValueError("component grids differ")
        curve = cls(x, y)
        if normalize and integrate_period(PeriodicFunction(curve.det12)) < 0:
            curve = cls(_reverse(x), _reverse(y), reversed=True)
        return curve

    @classmethod
    def from_fourier(cls, fourier_x, fourier_y, n: int = 512) -> "ClosedCurve":
        return cls.from_components(PeriodicFunction.from_coeffs(fourier_x, n),
                                   PeriodicFunction.from_coeffs(fourier_y, n))

    @classmethod
    def from_callable(cls, func, n: int = 512) -> "ClosedCurve":
        """Project an arbitrary sampler ``t -> (X, Y)`` onto the grid."""
        t = np.arange(n) / n
        xs, ys = func(t)
        return cls.from_components(PeriodicFunction(xs), PeriodicFunction(ys))

    @property
    def n(self) -> int:
        return self.x.n

    @property
    def orientation(self) -> int:
        return 1 if integrate_period(PeriodicFunction(self.det12)) > 0 else -1

    def derivative(self, order: int) -> tuple[PeriodicFunction, PeriodicFunction]:
        return self._derivs[order]

    @cached_property
    def _derivs(self) -> dict:
        out = {0: (self.x, self.y)}
        for k in range(1, 6):
            out[k] = (differentiate(self.x, k), differentiate(self.y, k))
        return out

    @cached_property
    def det12(self) -> np.ndarray:
        d1, d2 = self._derivs[1], self._derivs[2]
        return det2((d1[0].values, d1[1].values), (d2[0].values, d2[1].values))

    def __call__(self, t) -> np.ndarray:
        """Points at parameter values ``t``; shape ``(..., 2)``."""
        return np.stack([self.x(t), self.y(t)], axis=-1)

    def increment(self, t, dt) -> np.ndarray:
        return np.stack([self.x.increment(t, dt), self.y.increment(t, dt)], axis=-1)

    def points(self) -> np.ndarray:
        return np.column_stack([self.x.values, self.y.values])

    def source_parameter(self, t):
        """Map this curve's parameter back to the ingested parametrisation."""
        t = np.asarray(t, dtype=float)
        return np.mod(-t, 1.0) if self.reversed else np.mod(t, 1.0)


@dataclass(frozen=True)
class ConvexityReport:
    locally_convex: bool
    globally_convex: bool
    min_det: float
    turning_number: int


def check_convexity(c: ClosedCurve, settings: NumericSettings = DEFAULT_SETTINGS) -> ConvexityReport:
    """Local convexity from the sign of det(c', c''); global from the turning number."""
    d1x, d1y = c.derivative(1)
    speed2 = d1x.values ** 2 + d1y.values ** 2
    scale = float(np.max(speed2))
    if scale == 0.0 or np.min(speed2) < 1e-14 * scale:
        raise NotImmersed("c' vanishes on the grid", min_speed=float(np.sqrt(np.min(speed2))))
    det = c.orientation * c.det12
    min_det = float(np.min(det))
    # total curvature / 2 pi, spectrally accurate
    turning = integrate_period(PeriodicFunction(c.det12 / speed2)) / (2.0 * np.pi)
    turning_number = int(round(turning))
    locally = min_det > settings.zero_tol * float(np.max(np.abs(det)))
    return ConvexityReport(locally, bool(locally and abs(turning_number) == 1), min_det, turning_number)


@dataclass(frozen=True, eq=False)
class PlaneTransform:
    """Projective map of the plane as a 3x3 matrix on ``(x, y, 1)``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("PlaneTransform needs a 3x3 matrix")
        if abs(np.linalg.det(m)) < 1e-14 * np.linalg.norm(m) ** 3:
            raise ValueError("PlaneTransform matrix is singular")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def affine(cls, linear, offset=(0.0, 0.0)) -> "PlaneTransform":
        m = np.eye(3)
        m[:2, :2] = linear
        m[:2, 2] = offset
        return cls(m)

    def inverse(self) -> "PlaneTransform":
        return PlaneTransform(np.linalg.inv(self.matrix))

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        hom = np.concatenate([pts, np.ones(pts.shape[:-1] + (1,))], axis=-1) @ self.matrix.T
        return hom[..., :2] / hom[..., 2:]


def apply_transform(c: ClosedCurve, T: PlaneTransform, normalize: bool = True) -> ClosedCurve:
    """Pointwise image of ``c``, re-expanded on the same grid."""
    hom = np.column_stack([c.x.values, c.y.values, np.ones(c.n)]) @ T.matrix.T
    w = hom[:, 2]
    if np.min(np.abs(w)) < 1e-9 * np.max(np.abs(hom)) or np.min(w) * np.max(w) < 0:
        raise LeavesAffineChart("curve meets the line at infinity of the transform",
                                min_w=float(np.min(np.abs(w))))
    image = ClosedCurve(PeriodicFunction(hom[:, 0] / w), PeriodicFunction(hom[:, 1] / w))
    if normalize and image.orientation < 0:
        return ClosedCurve(_reverse(image.x), _reverse(image.y), reversed=not c.reversed)
    return ClosedCurve(image.x, image.y, reversed=c.reversed)
