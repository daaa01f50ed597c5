"""Metrics, curvature, volumes and distances for the two supported symmetry classes.

Warped metrics ``g = phi^2 dx^2 + psi^2 g_{S^{n-1}}`` live on a uniform grid of
``[0, pi]``. Derivatives are taken on the factorization ``psi = sin(x) w(x)``
where ``w`` is even about both poles; this keeps the quotients ``psi_ss/psi``
and ``(1 - psi_s^2)/psi^2`` uniformly second order up to the poles, and makes
the round profile exact.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from ricci_lab.defaults import (
    INEQUALITY_ABS_SLACK,
    INEQUALITY_REL_SLACK,
    MIN_GRID_INTERVALS,
    POLE_SNAP_RELATIVE,
    POLE_TOLERANCE_FACTOR,
    POLE_TOLERANCE_FLOOR,
    SPHERE_AXIAL_INTERVALS,
)
from ricci_lab.errors import InvalidParameterError, InvalidProfileError, ResolutionError
from ricci_lab.models import (
    WHOLE_MANIFOLD,
    BallVolumeReport,
    CurvatureField,
    MetricState,
    Region,
    RoundSphere,
    Warped,
)

logger = logging.getLogger(__name__)


def sphere_measure(k: int) -> float:
    """Return alpha(k), the k-dimensional measure of the unit sphere S^k."""
    if k < 1:
        raise InvalidParameterError(f"sphere dimension must be >= 1, got {k}")
    return float(2.0 * math.pi ** ((k + 1) / 2.0) / special.gamma((k + 1) / 2.0))


def riemann_scalar_factor(n: int) -> float:
    """Return C(n) with |Rm| = C(n) |R| on space forms."""
    _check_dimension(n)
    return math.sqrt(2.0 / (n * (n - 1)))


def pole_tolerance(h: float) -> float:
    return max(POLE_TOLERANCE_FLOOR, POLE_TOLERANCE_FACTOR * h * h)


def _check_dimension(n: int) -> None:
    if int(n) != n or n < 2:
        raise InvalidParameterError(f"dimension must be an integer >= 2, got {n}")


def uniform_grid(m: int) -> np.ndarray:
    """Uniform partition of [0, pi] with m + 1 nodes."""
    return np.linspace(0.0, math.pi, m + 1)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def make_round_sphere(n: int, c: float, t: float = 0.0) -> MetricState:
    """Build the round metric c * g_s on S^n."""
    _check_dimension(n)
    if not c > 0 or not math.isfinite(c):
        raise InvalidParameterError(f"scale factor must be positive, got {c}")
    return MetricState(n=int(n), t=float(t), form=RoundSphere(c=float(c)))


def make_warped(
    n: int,
    psi_profile: Sequence[float],
    phi_profile: Optional[Sequence[float]] = None,
    t: float = 0.0,
) -> MetricState:
    """Build and validate a warped state from nodal profiles on a uniform grid.

    ``phi_profile`` defaults to 1. Pole values of ``psi`` within round-off of
    zero are snapped to exactly zero.

    Raises:
        InvalidProfileError: If positivity or pole regularity fails.
        ResolutionError: If the grid has fewer than 8 intervals.
    """
    _check_dimension(n)
    psi = np.array(psi_profile, dtype=float)
    phi = np.ones_like(psi) if phi_profile is None else np.array(phi_profile, dtype=float)
    if psi.ndim != 1 or phi.shape != psi.shape:
        raise InvalidProfileError("psi and phi must be one-dimensional and of equal length")
    m = len(psi) - 1
    if m < MIN_GRID_INTERVALS:
        raise ResolutionError(f"need at least {MIN_GRID_INTERVALS} grid intervals, got {m}")
    if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(phi))):
        raise InvalidProfileError("profiles contain non-finite values")

    snap = POLE_SNAP_RELATIVE * max(float(np.max(np.abs(psi))), 1.0)
    for pole in (0, m):
        if abs(psi[pole]) <= snap:
            psi[pole] = 0.0

    state = MetricState(n=int(n), t=float(t), form=Warped(x=uniform_grid(m), phi=phi, psi=psi))
    validate_warped(state)
    return state


def validate_warped(state: MetricState) -> None:
    """Check the warped-metric invariants, raising InvalidProfileError on failure."""
    form = state.form
    assert isinstance(form, Warped)
    if np.any(form.phi <= 0):
        raise InvalidProfileError("phi must be positive at every node")
    if np.any(form.psi[1:-1] <= 0):
        bad = int(np.argmin(form.psi[1:-1])) + 1
        raise InvalidProfileError(f"psi must be positive at interior nodes (node {bad})")
    if form.psi[0] != 0.0 or form.psi[-1] != 0.0:
        raise InvalidProfileError("psi must vanish at both poles")
    slopes = pole_slopes(form)
    tol = pole_tolerance(form.h)
    for name, slope in zip(("x=0", "x=pi"), slopes):
        if abs(abs(slope) - 1.0) > tol:
            raise InvalidProfileError(
                f"pole regularity fails at {name}: |psi_s| = {abs(slope):.3e} (tolerance {tol:.1e})"
            )


def pole_slopes(form: Warped) -> Tuple[float, float]:
    """Return psi_s at both poles from the parity limit of w = psi / sin x."""
    w = sine_factor(form.x, form.psi)
    return float(w[0] / form.phi[0]), float(-w[-1] / form.phi[-1])


def axial_profile(state: MetricState, m: Optional[int] = None) -> Warped:
    """Sample any state as a warped profile; a round sphere becomes phi = sqrt(c), psi = sqrt(c) sin x."""
    if isinstance(state.form, Warped):
        return state.form
    intervals = m or SPHERE_AXIAL_INTERVALS
    x = uniform_grid(intervals)
    root = math.sqrt(state.form.c)
    psi = root * np.sin(x)
    psi[0] = psi[-1] = 0.0
    return Warped(x=x, phi=np.full_like(x, root), psi=psi)


def as_warped(state: MetricState, m: Optional[int] = None) -> MetricState:
    """Return ``state`` in the warped representation."""
    if isinstance(state.form, Warped):
        return state
    return MetricState(n=state.n, t=state.t, form=axial_profile(state, m))


# ---------------------------------------------------------------------------
# Discrete calculus on the axis
# ---------------------------------------------------------------------------


def _even_limit(first: float, second: float) -> float:
    """Pole value of an even function from its values one and two cells away."""
    return (4.0 * first - second) / 3.0


def _fill_poles(interior: np.ndarray) -> np.ndarray:
    full = np.empty(len(interior) + 2)
    full[1:-1] = interior
    full[0] = _even_limit(interior[0], interior[1])
    full[-1] = _even_limit(interior[-1], interior[-2])
    return full


def sine_factor(x: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """w = psi / sin x with pole values by even parity."""
    return _fill_poles(psi[1:-1] / np.sin(x[1:-1]))


def _central(f: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """First and second central differences at interior nodes."""
    return (f[2:] - f[:-2]) / (2.0 * h), (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)


@dataclass(frozen=True)
class _AxisTerms:
    """Interior-node quantities shared by curvature and the Laplacian."""

    cot: np.ndarray
    w: np.ndarray
    w_x: np.ndarray
    w_xx: np.ndarray
    phi: np.ndarray
    phi_x: np.ndarray

    @property
    def log_psi_x(self) -> np.ndarray:
        """psi_x / psi."""
        return self.cot + self.w_x / self.w


def _axis_terms(form: Warped) -> _AxisTerms:
    h = form.h
    w = sine_factor(form.x, form.psi)
    w_x, w_xx = _central(w, h)
    phi_x, _ = _central(form.phi, h)
    xi = form.x[1:-1]
    return _AxisTerms(
        cot=np.cos(xi) / np.sin(xi),
        w=w[1:-1],
        w_x=w_x,
        w_xx=w_xx,
        phi=form.phi[1:-1],
        phi_x=phi_x,
    )


def sectional_curvatures(form: Warped) -> Tuple[np.ndarray, np.ndarray]:
    """Radial and spherical sectional curvatures at every node.

    Both share the even-parity limit at the poles.
    """
    a = _axis_terms(form)
    # psi_ss / psi through the chain rule ds = phi dx
    psi_xx_over_psi = -1.0 + 2.0 * a.cot * a.w_x / a.w + a.w_xx / a.w
    k_rad = -(psi_xx_over_psi - (a.phi_x / a.phi) * a.log_psi_x) / a.phi**2

    # (1 - psi_s^2) / psi^2 with rho = w / phi; exact on round profiles
    rho = a.w / a.phi
    sin2 = 1.0 / (1.0 + a.cot**2)
    wx_phi = a.w_x / a.phi
    k_sph = ((1.0 - rho**2) / sin2 + rho**2 - 2.0 * rho * a.cot * wx_phi - wx_phi**2) / a.w**2

    k_rad_full = _fill_poles(k_rad)
    k_sph_full = _fill_poles(k_sph)
    for pole in (0, -1):
        limit = 0.5 * (k_rad_full[pole] + k_sph_full[pole])
        k_rad_full[pole] = k_sph_full[pole] = limit
    return k_rad_full, k_sph_full


def psi_slope(form: Warped) -> np.ndarray:
    """psi_s = psi_x / phi at every node."""
    w = sine_factor(form.x, form.psi)
    w_x, _ = _central(w, form.h)
    xi = form.x[1:-1]
    slope = np.empty_like(form.psi)
    slope[1:-1] = (np.cos(xi) * w[1:-1] + np.sin(xi) * w_x) / form.phi[1:-1]
    slope[0], slope[-1] = pole_slopes(form)
    return slope


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------


def _field_from_sectional(n: int, k_rad: np.ndarray, k_sph: np.ndarray) -> CurvatureField:
    ric_radial = (n - 1) * k_rad
    ric_sphere = k_rad + (n - 2) * k_sph
    R = ric_radial + (n - 1) * ric_sphere
    rm_norm = np.sqrt(4.0 * (n - 1) * k_rad**2 + 2.0 * (n - 1) * (n - 2) * k_sph**2)
    nu_min = k_rad.copy() if n == 2 else np.minimum(k_rad, k_sph)
    ric_inf = float(min(np.min(ric_radial), np.min(ric_sphere)))
    return CurvatureField(
        n=n,
        R=R,
        ric_radial=ric_radial,
        ric_sphere=ric_sphere,
        rm_norm=rm_norm,
        nu_min=nu_min,
        ric_inf=ric_inf,
        k_radial=k_rad,
        k_sphere=k_sph,
    )


def curvature(state: MetricState) -> CurvatureField:
    """Compute every pointwise curvature quantity of ``state``.

    Raises:
        ResolutionError: If a warped grid has fewer than 8 intervals.
    """
    if isinstance(state.form, RoundSphere):
        k = np.array([1.0 / state.form.c])
        return _field_from_sectional(state.n, k, k.copy())
    if state.form.intervals < MIN_GRID_INTERVALS:
        raise ResolutionError(
            f"need at least {MIN_GRID_INTERVALS} grid intervals, got {state.form.intervals}"
        )
    k_rad, k_sph = sectional_curvatures(state.form)
    return _field_from_sectional(state.n, k_rad, k_sph)


def laplacian(state: MetricState, values: np.ndarray) -> np.ndarray:
    """Laplacian of a rotationally symmetric function sampled like ``curvature(state)``."""
    values = np.asarray(values, dtype=float)
    if isinstance(state.form, RoundSphere):
        return np.zeros_like(values)
    a = _axis_terms(state.form)
    f_x, f_xx = _central(values, state.form.h)
    f_s = f_x / a.phi
    f_ss = (f_xx - (a.phi_x / a.phi) * f_x) / a.phi**2
    lap = f_ss + (state.n - 1) * (a.log_psi_x / a.phi) * f_s
    return _fill_poles(lap)


# ---------------------------------------------------------------------------
# Volumes and distances
# ---------------------------------------------------------------------------


def volume_density(state: MetricState) -> np.ndarray:
    """alpha(n-1) phi psi^(n-1), the volume per unit x of the orbit at each node."""
    form = state.form
    assert isinstance(form, Warped)
    return sphere_measure(state.n - 1) * form.phi * form.psi ** (state.n - 1)


def total_volume(state: MetricState) -> float:
    """Volume of the whole manifold."""
    if isinstance(state.form, RoundSphere):
        return state.form.c ** (state.n / 2.0) * sphere_measure(state.n)
    return float(integrate.trapezoid(volume_density(state), state.form.x))


def arclength(form: Warped) -> np.ndarray:
    """Arclength from the x = 0 pole to every node."""
    return integrate.cumulative_trapezoid(form.phi, form.x, initial=0.0)


def diameter(state: MetricState) -> float:
    """Pole-to-pole axis length (exact for round spheres and for |psi_s| <= 1)."""
    if isinstance(state.form, RoundSphere):
        return math.pi * math.sqrt(state.form.c)
    return float(integrate.trapezoid(state.form.phi, state.form.x))


def diameter_is_exact(state: MetricState) -> bool:
    """Whether ``diameter`` is exact rather than a lower bound."""
    if isinstance(state.form, RoundSphere):
        return True
    tol = pole_tolerance(state.form.h)
    return bool(np.max(np.abs(psi_slope(state.form))) <= 1.0 + tol)


def stable_timestep(state: MetricState, safety: float) -> float:
    """Explicit parabolic stability bound for one step of the warped flow.

    ``safety * h^2 min(phi)^2 / (2 max(1, 1 / psi_neck^2))``, where psi_neck
    is the smallest interior local minimum of psi; without a neck the
    effective diffusivity is 1. Round spheres are unconstrained.
    """
    if isinstance(state.form, RoundSphere):
        return math.inf
    form = state.form
    diffusivity = 1.0
    psi = form.psi
    interior = psi[1:-1]
    necks = (interior <= psi[:-2]) & (interior <= psi[2:])
    if np.any(necks):
        diffusivity = max(1.0, 1.0 / float(np.min(interior[necks])) ** 2)
    return safety * form.h**2 * float(np.min(form.phi)) ** 2 / (2.0 * diffusivity)


def _round_ball_volume(n: int, c: float, r: float) -> float:
    root = math.sqrt(c)
    theta = min(r / root, math.pi)
    angular, _ = integrate.quad(lambda s: math.sin(s) ** (n - 1), 0.0, theta, epsabs=0.0, epsrel=1e-13)
    return sphere_measure(n - 1) * c ** (n / 2.0) * angular


def _cumulative_volume(state: MetricState) -> np.ndarray:
    return integrate.cumulative_trapezoid(volume_density(state), state.form.x, initial=0.0)


def ball_volume_ratio(
    state: MetricState,
    center: int,
    r: float,
    kappa_threshold: Optional[float] = None,
    scale_quantity: str = "R",
) -> BallVolumeReport:
    """Measure Vol(B(center, r)) / r^n.

    On warped states the ball is measured by arclength along the axis; for an
    interior center this is the neighbourhood of the orbit through that node.
    Radii beyond the reach of the ball clamp to the whole manifold and set
    ``clamped``. ``curvature_scale_ok`` reports whether sup |quantity| <= r^-2
    on the ball, the scale hypothesis of the non-collapsing estimates.
    """
    if not r > 0:
        raise InvalidParameterError(f"ball radius must be positive, got {r}")
    curv = curvature(state)
    values = np.abs(curv.quantity(scale_quantity))

    if isinstance(state.form, RoundSphere):
        reach = diameter(state)
        clamped = r > reach
        volume = total_volume(state) if r >= reach else _round_ball_volume(state.n, state.form.c, r)
        ball_values = values
    else:
        form = state.form
        if not 0 <= center <= form.intervals:
            raise InvalidParameterError(f"center node {center} outside the grid")
        s = arclength(form)
        s_c = s[center]
        reach = max(s_c, s[-1] - s_c)
        clamped = r > reach
        cumulative = _cumulative_volume(state)
        upper = np.interp(min(s_c + r, s[-1]), s, cumulative)
        lower = np.interp(max(s_c - r, 0.0), s, cumulative)
        volume = float(upper - lower)
        ball_values = values[np.abs(s - s_c) <= r]
        if ball_values.size == 0:
            ball_values = values[[center]]

    if clamped:
        logger.debug("ball radius %.3g exceeds reach %.3g; clamped to whole manifold", r, reach)
    ratio = volume / r**state.n
    return BallVolumeReport(
        center=int(center),
        radius=float(r),
        volume=volume,
        ratio=ratio,
        kappa_threshold=kappa_threshold,
        clamped=bool(clamped),
        curvature_scale_ok=bool(np.max(ball_values) <= r**-2),
        noncollapsed=None if kappa_threshold is None else bool(ratio >= kappa_threshold),
    )


def region_weights(
    state: MetricState,
    region: Region = WHOLE_MANIFOLD,
    reference: Optional[MetricState] = None,
) -> np.ndarray:
    """Volume weights of the samples of ``curvature(state)`` restricted to ``region``.

    The ball radius is measured in ``reference`` (default: ``state`` itself),
    so a ball fixed at one time can be integrated over other slices.
    """
    ref = reference or state
    if isinstance(state.form, RoundSphere):
        if region.whole:
            return np.array([total_volume(state)])
        assert isinstance(ref.form, RoundSphere) and region.radius is not None
        ref_volume = _round_ball_volume(state.n, ref.form.c, region.radius)
        return np.array([ref_volume * (state.form.c / ref.form.c) ** (state.n / 2.0)])

    form = state.form
    h = form.h
    cell = np.full(len(form.x), h)
    cell[0] = cell[-1] = h / 2.0
    weights = volume_density(state) * cell
    if region.whole:
        return weights
    assert region.radius is not None
    assert isinstance(ref.form, Warped)
    return weights * _ball_fractions(ref.form, region.center, region.radius)


def _ball_fractions(form: Warped, center: int, radius: float) -> np.ndarray:
    """Fraction of each dual cell lying within arclength ``radius`` of ``center``."""
    s = arclength(form)
    edges_x = np.concatenate(([form.x[0]], 0.5 * (form.x[1:] + form.x[:-1]), [form.x[-1]]))
    edges_s = np.interp(edges_x, form.x, s)
    lo, hi = edges_s[:-1], edges_s[1:]
    a, b = s[center] - radius, s[center] + radius
    overlap = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    width = hi - lo
    return np.where(width > 0, overlap / np.where(width > 0, width, 1.0), 0.0)


def ball_distances(form: Warped, center: int) -> np.ndarray:
    """Arclength distance along the axis from ``center`` to every node."""
    s = arclength(form)
    return np.abs(s - s[center])


# ---------------------------------------------------------------------------
# Pointwise inequalities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhatReport:
    """Outcome of the |Ric|^2 <= Rhat^2 - 2B Rhat + nB^2 check."""

    lhs: float
    rhs: float
    holds: bool
    hypothesis_met: bool


def rhat_inequality_check(eigenvalues: Sequence[float], B: float) -> RhatReport:
    """Check |Ric|^2 <= Rhat^2 - 2 B Rhat + n B^2 with Rhat = R + n B.

    A tuple with an eigenvalue below -B violates the hypothesis Ric >= -B; the
    inequality is still evaluated and the violation is reported, not raised.
    """
    if B < 0:
        raise InvalidParameterError(f"B must be nonnegative, got {B}")
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.size
    rhat = float(np.sum(lam)) + n * B
    lhs = float(np.sum(lam**2))
    rhs = rhat * rhat - 2.0 * B * rhat + n * B * B
    slack = INEQUALITY_ABS_SLACK + INEQUALITY_REL_SLACK * abs(rhs)
    return RhatReport(
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs + slack,
        hypothesis_met=bool(np.all(lam >= -B)),
    )
