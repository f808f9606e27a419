"""Smooth functions on the circle R/Z.

A :class:`PeriodicFunction` holds ``N`` uniform samples on ``[0, 1)`` and
exposes the matching trigonometric interpolant: spectral derivatives,
trapezoid quadrature, evaluation off the grid, and sign-change / zero
localisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import IndistinguishableFromZero
from .settings import DEFAULT_SETTINGS, NumericSettings

TWO_PI = 2.0 * np.pi
# spectral coefficients below this fraction of the largest one are rounding
# noise; derivatives would amplify them by (2 pi k)**order
SPECTRAL_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class PeriodicFunction:
    """Samples ``values[j] = f(j / N)`` of a period-1 function."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("PeriodicFunction needs a 1-d array of at least 2 samples")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # -- construction ---------------------------------------------------
    @classmethod
    def from_callable(cls, func: Callable[[np.ndarray], np.ndarray], n: int) -> "PeriodicFunction":
        x = np.arange(n) / n
        return cls(np.broadcast_to(np.asarray(func(x), dtype=float), (n,)))

    @classmethod
    def from_coeffs(cls, coeffs, n: int) -> "PeriodicFunction":
        """Build from ``(cos_k, sin_k)`` pairs, k = 0..K, with K <= n/2."""
        coeffs = np.asarray(coeffs, dtype=float).reshape(-1, 2)
        if len(coeffs) - 1 > n // 2:
            raise ValueError(f"{len(coeffs) - 1} harmonics alias on a grid of {n}")
        spec = np.zeros(n // 2 + 1, dtype=complex)
        spec[: len(coeffs)] = (coeffs[:, 0] - 1j * coeffs[:, 1]) * (n / 2)
        spec[0] = coeffs[0, 0] * n
        if n % 2 == 0 and len(coeffs) - 1 == n // 2:
            spec[-1] = coeffs[-1, 0] * n
        return cls(np.fft.irfft(spec, n=n))

    @classmethod
    def constant(cls, c: float, n: int) -> "PeriodicFunction":
        return cls(np.full(n, float(c)))

    # -- basic views ----------------------------------------------------
    @property
    def n(self) -> int:
        return self.values.size

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    @cached_property
    def spectrum(self) -> np.ndarray:
        return np.fft.rfft(self.values)

    @cached_property
    def coeffs(self) -> np.ndarray:
        """``(K+1, 2)`` array of ``(cos_k, sin_k)`` amplitudes, K = N // 2."""
        n = self.n
        c = self.spectrum
        out = np.empty((c.size, 2))
        out[:, 0] = 2.0 * c.real / n
        out[:, 1] = -2.0 * c.imag / n
        out[0] = (c[0].real / n, 0.0)
        if n % 2 == 0:
            out[-1] = (c[-1].real / n, 0.0)
        return out

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    # -- evaluation -----------------------------------------------------
    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        a, b = self.coeffs[:, 0], self.coeffs[:, 1]
        k = np.arange(a.size)
        phase = TWO_PI * np.multiply.outer(x, k)
        return np.cos(phase) @ a + np.sin(phase) @ b

    def increment(self, x, dx) -> np.ndarray:
        """``f(x + dx) - f(x)`` without cancellation error for small ``dx``."""
        x, dx = np.broadcast_arrays(np.asarray(x, float), np.asarray(dx, float))
        a, b = self.coeffs[:, 0], self.coeffs[:, 1]
        k = np.arange(a.size)
        mid = TWO_PI * np.multiply.outer(x + 0.5 * dx, k)
        half = 2.0 * np.sin(np.pi * np.multiply.outer(dx, k))
        return (half * np.cos(mid)) @ b - (half * np.sin(mid)) @ a

    def resample(self, n: int) -> "PeriodicFunction":
        """Band-limited interpolation onto a grid of ``n`` points."""
        if n == self.n:
            return self
        c = self.spectrum
        m = self.n
        out = np.zeros(n // 2 + 1, dtype=complex)
        keep = min(c.size, out.size)
        out[:keep] = c[:keep]
        if m % 2 == 0 and n > m:
            out[m // 2] *= 0.5  # split the Nyquist mode between +/- frequencies
        return PeriodicFunction(np.fft.irfft(out, n=n) * (n / m))

    def shift(self, a: float) -> "PeriodicFunction":
        """The function ``x -> f(x + a)``."""
        k = np.arange(self.spectrum.size)
        return PeriodicFunction(np.fft.irfft(self.spectrum * np.exp(2j * np.pi * k * a), n=self.n))

    # -- arithmetic -----------------------------------------------------
    def _lift(self, other):
        if isinstance(other, PeriodicFunction):
            if other.n != self.n:
                raise ValueError("grid sizes differ")
            return other.values
        return float(other)

    def __add__(self, other):
        return PeriodicFunction(self.values + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PeriodicFunction(self.values - self._lift(other))

    def __rsub__(self, other):
        return PeriodicFunction(self._lift(other) - self.values)

    def __mul__(self, other):
        return PeriodicFunction(self.values * self._lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return PeriodicFunction(self.values / self._lift(other))

    def __neg__(self):
        return PeriodicFunction(-self.values)

    def __repr__(self):
        return f"PeriodicFunction(n={self.n}, max_abs={self.max_abs():.3g})"


def differentiate(f: PeriodicFunction, order: int = 1) -> PeriodicFunction:
    """Spectral derivative of the given order (Nyquist mode discarded)."""
    if order < 1:
        raise ValueError("order must be a positive integer")
    spec = f.spectrum
    k = np.arange(spec.size)
    factor = (2j * np.pi * k) ** order
    if f.n % 2 == 0:
        factor[-1] = 0.0
    factor[np.abs(spec) < SPECTRAL_FLOOR * np.max(np.abs(spec))] = 0.0
    return PeriodicFunction(np.fft.irfft(spec * factor, n=f.n))


def antiderivative(f: PeriodicFunction) -> tuple[float, PeriodicFunction]:
    """Split ``int_0^x f`` into ``mean * x + P(x)`` with periodic ``P(0) = 0``."""
    k = np.arange(f.spectrum.size)
    spec = np.zeros_like(f.spectrum)
    spec[1:] = f.spectrum[1:] / (2j * np.pi * k[1:])
    if f.n % 2 == 0:
        spec[-1] = 0.0
    p = np.fft.irfft(spec, n=f.n)
    return integrate_period(f), PeriodicFunction(p - p[0])


def integrate_period(f: PeriodicFunction) -> float:
    """Trapezoid rule over one period; exact for harmonics below N."""
    return float(np.mean(f.values))


def inner(f: PeriodicFunction, g: PeriodicFunction) -> float:
    return float(np.mean(f.values * g.values))


def random_band_limited(rng: np.random.Generator, n: int, harmonics: int,
                        decay: float = 1.0) -> PeriodicFunction:
    """Random trig polynomial with Gaussian amplitudes ~ ``(1 + k)^-decay``."""
    k = np.arange(harmonics + 1)
    amp = (1.0 + k) ** (-decay)
    coeffs = rng.standard_normal((harmonics + 1, 2)) * amp[:, None]
    coeffs[0, 1] = 0.0
    return PeriodicFunction.from_coeffs(coeffs, n)


# ---------------------------------------------------------------------------
# sign changes and zeros

@dataclass(frozen=True)
class SignChanges:
    count: int
    crossings: np.ndarray
    grid_size: int

    def __iter__(self):
        return iter((self.count, self.crossings))


@dataclass(frozen=True)
class ZeroCluster:
    x: float
    multiplicity: int
    members: int = 1


def _zero_threshold(f: PeriodicFunction, scale: float | None, settings: NumericSettings) -> float:
    m = f.max_abs()
    if scale is None:
        degenerate = m < settings.zero_floor
    else:
        degenerate = m < settings.zero_tol * scale
    if degenerate or m == 0.0:
        raise IndistinguishableFromZero(
            f"max|f| = {m:.3e} is indistinguishable from zero", max_abs=m)
    return settings.zero_tol * m


def _cyclic_change_brackets(values: np.ndarray, thr: float) -> list[tuple[int, int]]:
    """Index pairs (i, j) of consecutive significant samples with opposite sign."""
    idx = np.flatnonzero(np.abs(values) > thr)
    if idx.size < 2:
        return []
    s = np.sign(values[idx])
    nxt = np.roll(np.arange(idx.size), -1)
    flips = np.flatnonzero(s != s[nxt])
    return [(int(idx[i]), int(idx[nxt[i]])) for i in flips]


def _bisect(func, a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    """Vectorised bisection; ``func(a)`` and ``func(b)`` must differ in sign."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    if a.size == 0:
        return a
    fa = func(a)
    while np.max(b - a) > tol:
        mid = 0.5 * (a + b)
        fm = func(mid)
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, mid, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, mid)
    return 0.5 * (a + b)


def _crossings_at(f: PeriodicFunction, n: int, thr: float, tol: float) -> np.ndarray:
    values = f.resample(n).values
    brackets = _cyclic_change_brackets(values, thr)
    if not brackets:
        return np.empty(0)
    lo = np.array([i for i, _ in brackets], dtype=float) / n
    hi = np.array([j for _, j in brackets], dtype=float) / n
    hi = np.where(hi <= lo, hi + 1.0, hi)
    return np.sort(np.mod(_bisect(f, lo, hi, tol), 1.0))


def count_sign_changes(f: PeriodicFunction, *, scale: float | None = None,
                       settings: NumericSettings = DEFAULT_SETTINGS) -> SignChanges:
    """Count transversal sign changes of ``f`` around the circle.

    Samples below ``zero_tol * max|f|`` are ignored. The count is taken at
    N and 2N; when these disagree a 4N pass decides. Pairs of crossings
    inside a single cell of the finest grid are then searched for near
    same-sign dips of ``|f|``.
    """
    thr = _zero_threshold(f, scale, settings)
    n = f.n
    first = _crossings_at(f, n, thr, settings.bisect_tol)
    second = _crossings_at(f, 2 * n, thr, settings.bisect_tol)
    if first.size == second.size:
        found, grid, dips = first, n, 2 * n
    else:
        found = _crossings_at(f, 4 * n, thr, settings.bisect_tol)
        grid = dips = 4 * n
    hidden = _hidden_pairs(f, dips, thr, settings.bisect_tol)
    if hidden.size:
        found = np.sort(np.concatenate([found, hidden]))
    return SignChanges(int(found.size), found, grid)


def _hidden_pairs(f: PeriodicFunction, n: int, thr: float, tol: float,
                  samples: int = 64) -> np.ndarray:
    """Crossings missed on the ``n``-grid because two of them share a cell.

    A root within one cell of node i forces ``|f_i| <= max|f'| / n``; only
    same-sign local minima of ``|f|`` passing this bound are sampled finely.
    """
    v = f.resample(n).values
    left, right = np.roll(v, 1), np.roll(v, -1)
    a = np.abs(v)
    slope = differentiate(f).max_abs() / n
    side = np.sign(left)
    # node i may itself sit on one of the two roots (value below thr)
    dip = ((a <= np.abs(left)) & (a < np.abs(right)) & (a <= slope) & (side != 0)
           & (np.sign(right) == side) & ((np.sign(v) == side) | (a <= thr)))
    out = []
    for i in np.flatnonzero(dip):
        x = (i - 1 + 2.0 * np.arange(samples + 1) / samples) / n
        brackets = [(x[p], x[q]) for p, q in _cyclic_change_brackets(f(x), thr) if q > p]
        if brackets:
            lo, hi = np.array(brackets).T
            out.append(_bisect(f, lo, hi, tol))
    if not out:
        return np.empty(0)
    pts = np.sort(np.mod(np.concatenate(out), 1.0))
    return pts[np.concatenate([[True], np.diff(pts) > 10 * tol])]


def _merge_cyclic(points: np.ndarray, tol: float, joined=None) -> list[np.ndarray]:
    """Group sorted cyclic points closer than ``tol``; ``joined(a, b)`` may
    additionally declare neighbours ``a < b`` inseparable."""
    if points.size == 0:
        return []
    pts = np.sort(np.mod(points, 1.0))

    def close(a, b):
        return b - a <= tol or (joined is not None and joined(a, b))

    groups = [[pts[0]]]
    for p in pts[1:]:
        if close(groups[-1][-1], p):
            groups[-1].append(p)
        else:
            groups.append([p])
    if len(groups) > 1 and close(groups[-1][-1], groups[0][0] + 1.0):
        groups[0] = [p - 1.0 for p in groups.pop()] + groups[0]
    return [np.array(g) for g in groups]


def locate_zero_clusters(f: PeriodicFunction, *, scale: float | None = None,
                         max_order: int = 8,
                         settings: NumericSettings = DEFAULT_SETTINGS) -> list[ZeroCluster]:
    """Zeros of ``f`` (sign changes and tangential touches) with multiplicities.

    Candidates closer than ``cluster_tol``, or separated only by values below
    the zero threshold, form one cluster; near a zero of order m the roots
    are resolved only to about ``thr**(1/m)``.
    """
    thr = _zero_threshold(f, scale, settings)
    m = f.max_abs()
    n = 4 * f.n
    fine = f.resample(n).values
    crossings = count_sign_changes(f, scale=scale, settings=settings).crossings
    candidates = [crossings]

    # tangential zeros: local minima of |f| refined as critical points of f
    absf = np.abs(fine)
    left, right = np.roll(absf, 1), np.roll(absf, -1)
    minima = np.flatnonzero((absf <= left) & (absf < right) & (absf < 0.1 * m))
    if minima.size:
        df = differentiate(f)
        lo = (minima - 1) / n
        hi = (minima + 1) / n
        ok = np.sign(df(lo)) != np.sign(df(hi))
        crit = _bisect(df, lo[ok], hi[ok], settings.bisect_tol)
        on_grid = minima[~ok] / n  # exact zero sample without a bracketable extremum
        crit = np.concatenate([crit, on_grid])
        if crit.size:
            crit = crit[np.abs(f(crit)) <= thr]
            candidates.append(np.mod(crit, 1.0))

    def joined(a, b):
        if b - a > 4.0 / f.n:
            return False
        return bool(np.max(np.abs(f(np.linspace(a, b, 33)))) <= thr)

    groups = _merge_cyclic(np.concatenate(candidates), settings.cluster_tol, joined)
    derivs = [differentiate(f, k) for k in range(1, max_order + 1)]
    scales = [d.max_abs() for d in derivs]
    clusters = []
    for g in groups:
        # a bracketed sign change is located far more sharply than a touch
        sharp = [x for x in g if np.min(np.abs((crossings - x + 0.5) % 1.0 - 0.5), initial=1.0) < 1e-12]
        x0 = float(np.mod(np.mean(sharp if sharp else g), 1.0))
        mult = max_order
        for order, (d, s) in enumerate(zip(derivs, scales), start=1):
            if abs(float(d(x0))) > settings.deriv_tol * s:
                mult = order
                break
        # the root offset of a high-order zero biases the derivative test; the
        # presence of a sign change fixes the parity
        if mult % 2 == (0 if sharp else 1):
            mult += 1
        clusters.append(ZeroCluster(x0, mult, int(g.size)))
    return sorted(clusters, key=lambda c: c.x)
