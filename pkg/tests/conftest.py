import numpy as np
import pytest

from sixvertex import ClosedCurve, affine_curvature, curve_to_ode, reparametrize_affine

TWO_PI = 2.0 * np.pi

# x = cos th + 0.05 cos 2th, y = sin th - 0.05 sin 2th
PERTURBED_ELLIPSE = ([[0, 0], [1.0, 0], [0.05, 0]], [[0, 0], [0, 1.0], [0, -0.05]])


def ellipse(a=2.0, b=1.0, n=512):
    return ClosedCurve.from_fourier([[0, 0], [a, 0]], [[0, 0], [0, b]], n)


def circle(r=1.0, n=512):
    return ellipse(r, r, n)


def perturbed_ellipse(n=512):
    return ClosedCurve.from_fourier(*PERTURBED_ELLIPSE, n)


def chain(c):
    p = reparametrize_affine(c)
    k = affine_curvature(p)
    ode, lift = curve_to_ode(p, k)
    return p, k, ode, lift


def random_convex_curve(rng, harmonics=4, amplitude=0.1, n=512):
    """Unit circle plus a random perturbation of total coefficient mass
    ``amplitude`` spread over harmonics 2..``harmonics``; redrawn until convex."""
    from sixvertex import check_convexity

    while True:
        fx = [[0.0, 0.0], [1.0, 0.0]]
        fy = [[0.0, 0.0], [0.0, 1.0]]
        raw = rng.normal(size=(harmonics - 1, 4))
        raw *= amplitude * rng.uniform(0.3, 1.0) / np.sum(np.abs(raw))
        for row in raw:
            fx.append([row[0], row[1]])
            fy.append([row[2], row[3]])
        c = ClosedCurve.from_fourier(fx, fy, n)
        if check_convexity(c).globally_convex:
            return c, (fx, fy)


@pytest.fixture(scope="session")
def pe_chain():
    return chain(perturbed_ellipse())


@pytest.fixture(scope="session")
def ellipse_chain():
    return chain(ellipse())
