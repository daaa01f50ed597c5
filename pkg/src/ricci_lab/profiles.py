"""Named warped profiles used as initial data and as test oracles."""

import math

import numpy as np

from ricci_lab.errors import InvalidParameterError
from ricci_lab.geometry import make_warped, uniform_grid
from ricci_lab.models import MetricState


def round_profile(n: int, m: int, c: float = 1.0, t: float = 0.0) -> MetricState:
    """Round sphere of scale c in warped coordinates: phi = sqrt(c), psi = sqrt(c) sin x."""
    x = uniform_grid(m)
    root = math.sqrt(c)
    return make_warped(n, root * np.sin(x), np.full_like(x, root), t=t)


def reparametrized_round_profile(n: int, m: int, eps: float, c: float = 1.0) -> MetricState:
    """Round sphere written in the nonuniform coordinate theta = x + eps sin 2x.

    The metric is exactly round, so curvature and flow have closed forms, while
    the discrete profiles are genuinely nonconstant.
    """
    if not abs(eps) < 0.5:
        raise InvalidParameterError(f"|eps| must be below 1/2, got {eps}")
    x = uniform_grid(m)
    root = math.sqrt(c)
    theta = x + eps * np.sin(2.0 * x)
    return make_warped(n, root * np.sin(theta), root * (1.0 + 2.0 * eps * np.cos(2.0 * x)))


def dumbbell_profile(n: int, m: int, a: float = 0.6) -> MetricState:
    """psi = sin x (1 - a sin^2 x), phi = 1; a neck forms at x = pi/2 once a > 1/3."""
    if not 0 <= a < 1:
        raise InvalidParameterError(f"dumbbell depth must lie in [0, 1), got {a}")
    x = uniform_grid(m)
    return make_warped(n, np.sin(x) * (1.0 - a * np.sin(x) ** 2))


def flat_cap_profile(n: int, m: int, width: float = 0.1) -> MetricState:
    """Two flat discs glued along their rims, the seam smoothed over ``width``.

    psi is a soft minimum of x and pi - x normalized to vanish at both poles, so
    the caps around each pole are flat up to terms of order exp(-pi / (2 width)).
    """
    if not width > 0:
        raise InvalidParameterError(f"smoothing width must be positive, got {width}")
    x = uniform_grid(m)
    psi = -width * (
        np.logaddexp(-x / width, -(math.pi - x) / width) - math.log1p(math.exp(-math.pi / width))
    )
    return make_warped(n, psi)
