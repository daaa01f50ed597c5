"""Moser iteration on normalized flow windows.

Every check here runs on a window rescaled to the unit time span [0, 1]. The
spatial domain is the geodesic ball of radius r about the x = 0 pole,
measured in the metric at time 1, and round spheres are sampled on the axis.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from ricci_lab.constants.ledger import (
    _log_C_b,
    _log_delta_b,
    _log_sigma_argument,
    energy_coefficient,
    interpolation_exponent,
    safe_exp,
    sobolev_sigma,
    tilde_volume,
)
from ricci_lab.defaults import (
    INEQUALITY_ABS_SLACK,
    INEQUALITY_REL_SLACK,
    SPHERE_AXIAL_INTERVALS,
)
from ricci_lab.errors import InvalidParameterError, InvalidTestFieldError
from ricci_lab.geometry import (
    arclength,
    as_warped,
    ball_distances,
    ball_volume_ratio,
    curvature,
    region_weights,
)
from ricci_lab.models import CurvatureField, FlowTrajectory, MetricState, Region
from ricci_lab.norms import NormQuery, spacetime_norm, time_integral

logger = logging.getLogger(__name__)

UNIT_WINDOW_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# Domains and cutoffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MoserDomains:
    """Nested parabolic domains D_k = B(p, r_k) x [t_k, 1] inside D = B(p, r) x [0, 1].

    t_k = 1/2 - 2^-(k+1) increases to 1/2 and r_k = (1/2 + 2^-(k+1)) r
    decreases to r/2, so every D_k contains D' = B(p, r/2) x [1/2, 1].
    """

    r: float
    k_max: int
    B: float = 0.0

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise InvalidParameterError(f"base radius must be positive, got {self.r}")
        if self.k_max < 1:
            raise InvalidParameterError(f"k_max must be >= 1, got {self.k_max}")
        if self.B < 0:
            raise InvalidParameterError(f"B must be nonnegative, got {self.B}")

    def t(self, k: int) -> float:
        return 0.5 - 2.0 ** -(k + 1)

    def radius(self, k: int) -> float:
        return (0.5 + 2.0 ** -(k + 1)) * self.r

    @property
    def times(self) -> np.ndarray:
        return np.array([self.t(k) for k in range(self.k_max + 1)])

    @property
    def radii(self) -> np.ndarray:
        return np.array([self.radius(k) for k in range(self.k_max + 1)])

    def time_derivative_bound(self, k: int) -> float:
        """Bound on |d eta_k / dt|."""
        return 2.0 ** (k + 2)

    def gradient_bound(self, k: int) -> float:
        """Bound on |grad eta_k| in any slice of a window with Ric >= -B."""
        return math.exp(self.B) * 2.0 ** (k + 2) / self.r


def moser_domains(r: float, k_max: int, B: float = 0.0) -> MoserDomains:
    return MoserDomains(r=r, k_max=k_max, B=B)


def smoothstep(s: np.ndarray) -> np.ndarray:
    """C^1 step 3s^2 - 2s^3, clamped to [0, 1]; slope at most 3/2."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def cutoff(domains: MoserDomains, k: int, distance: np.ndarray, t: float) -> np.ndarray:
    """eta_k = gamma_k(t) rho_k(distance), 1 on D_k and 0 off D_(k-1)."""
    if not 1 <= k <= domains.k_max:
        raise InvalidParameterError(f"cutoff index {k} outside 1..{domains.k_max}")
    t_prev, t_k = domains.t(k - 1), domains.t(k)
    r_prev, r_k = domains.radius(k - 1), domains.radius(k)
    gamma = smoothstep(np.asarray((t - t_prev) / (t_k - t_prev)))
    rho = 1.0 - smoothstep((np.asarray(distance, dtype=float) - r_k) / (r_prev - r_k))
    return gamma * rho


# ---------------------------------------------------------------------------
# Window sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Window:
    """Warped samples of a unit window with distances from the pole at time 1."""

    states: List[MetricState]
    curvatures: List[CurvatureField]
    reference: MetricState
    distance: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def weights(self, radius: Optional[float] = None) -> List[np.ndarray]:
        region = Region(center=0, radius=radius)
        return [region_weights(s, region, reference=self.reference) for s in self.states]


def _check_unit_window(traj: FlowTrajectory) -> None:
    if abs(traj.t_start) > UNIT_WINDOW_TOLERANCE or abs(traj.t_end - 1.0) > UNIT_WINDOW_TOLERANCE:
        raise InvalidParameterError(
            f"window [{traj.t_start}, {traj.t_end}] is not normalized to [0, 1]; rescale it first"
        )


def _sample_window(traj: FlowTrajectory) -> _Window:
    _check_unit_window(traj)
    states = [as_warped(s, SPHERE_AXIAL_INTERVALS) for s in traj.states]
    if traj.is_round:
        curvatures = [curvature(s) for s in states]
    else:
        curvatures = list(traj.curvatures)
    reference = states[-1]
    return _Window(
        states=states,
        curvatures=curvatures,
        reference=reference,
        distance=ball_distances(reference.form, 0),
    )


def _spacetime_power(window: _Window, values: Sequence[np.ndarray], p: float, t0: float, radius: float) -> float:
    """Integral of |v|^p over B(p, radius) x [t0, 1]."""
    weights = window.weights(radius)
    slices = [float(np.sum(w * np.abs(v) ** p)) for w, v in zip(weights, values)]
    return time_integral(window.times, slices, t0, 1.0)


def _spacetime_lp(window: _Window, values: Sequence[np.ndarray], p: float, t0: float, radius: float) -> float:
    """L^p norm over B(p, radius) x [t0, 1], scaled by the maximum to stay in range."""
    scale = max(float(np.max(np.abs(v))) for v in values)
    if scale == 0:
        return 0.0
    scaled = [v / scale for v in values]
    return scale * _spacetime_power(window, scaled, p, t0, radius) ** (1.0 / p)


def _inner_sup(window: _Window, values: Sequence[np.ndarray], radius: float, t0: float) -> float:
    """Sup over B(p, radius) x [t0, 1], with the slice at t0 interpolated."""
    inside = window.distance <= radius
    inside[0] = True
    times = window.times
    best = max(
        (float(np.max(v[inside])) for v, t in zip(values, times) if t >= t0),
        default=-math.inf,
    )
    j = int(np.searchsorted(times, t0))
    if 0 < j < len(times):
        lam = (t0 - times[j - 1]) / (times[j] - times[j - 1])
        between = (1.0 - lam) * values[j - 1] + lam * values[j]
        best = max(best, float(np.max(between[inside])))
    return best


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------


FieldFunction = Callable[[CurvatureField], np.ndarray]


@dataclass(frozen=True, eq=False)
class MoserProblem:
    """A subsolution du/dt <= Lap u + f u + h, with v = u + kappa_shift."""

    q: float
    B: float
    u: FieldFunction
    f: FieldFunction
    h: FieldFunction
    kappa_shift: float = 0.0
    name: str = "custom"

    def v(self, curv: CurvatureField) -> np.ndarray:
        return self.u(curv) + self.kappa_shift


def _domain_measure(window: _Window, radius: float) -> float:
    slices = [float(np.sum(w)) for w in window.weights(radius)]
    return time_integral(window.times, slices, 0.0, 1.0)


def scalar_curvature_problem(
    traj: FlowTrajectory, domains: MoserDomains, B: float, q: Optional[float] = None
) -> MoserProblem:
    """u = R + nB, f = 2(u - 2B), h = 2nB^2, shifted by the L^q norm of h over D."""
    n = traj.n
    q = (n + 2) ** 2 / (2.0 * n) if q is None else q
    window = _sample_window(traj)
    shift = 2.0 * n * B * B * _domain_measure(window, domains.r) ** (1.0 / q)
    return MoserProblem(
        q=q,
        B=B,
        u=lambda curv: curv.R + n * B,
        f=lambda curv: 2.0 * (curv.R + n * B - 2.0 * B),
        h=lambda curv: np.full_like(curv.R, 2.0 * n * B * B),
        kappa_shift=shift,
        name="scalar-curvature",
    )


# ---------------------------------------------------------------------------
# Rung factors
# ---------------------------------------------------------------------------


def _log_base_factors(n: int, nu: float, C0: float, r: float, B: float, log_sigma: float) -> float:
    """log(C1' C3') with C1' = 2 sigma^s max(1, C0^(1+nu) (2 sigma^s)^nu) and C3' = e^(2B)/r^2 + 1."""
    log_two_s = math.log(2.0) + n / (n + 2.0) * log_sigma
    log_C1 = log_two_s + max(0.0, (1.0 + nu) * math.log(C0) + nu * log_two_s)
    log_C3 = math.log(math.exp(2.0 * B) / (r * r) + 1.0)
    return log_C1 + log_C3


def log_moser_rung_factors(
    n: int,
    q: float,
    C0: float,
    r: float,
    B: float,
    k_max: int,
    sigma: Optional[float] = None,
    log_sigma: Optional[float] = None,
) -> np.ndarray:
    """log F_k for k = 2..k_max, where ||v||_(lambda^k, D_k) <= F_k ||v||_(lambda^(k-1), D_(k-1))."""
    nu = interpolation_exponent(n, q)
    base = _log_base_factors(n, nu, C0, r, B, _log_sigma_argument(sigma, log_sigma))
    lam = (n + 2.0) / n
    logs = []
    for k in range(2, k_max + 1):
        beta = lam ** (k - 1)
        logs.append((base + (k + 2) * math.log(4.0) + (1.0 + nu) * math.log(energy_coefficient(beta))) / beta)
    return np.array(logs)


def moser_rung_factors(
    n: int,
    q: float,
    sigma: Optional[float],
    C0: float,
    r: float,
    B: float,
    k_max: int,
    log_sigma: Optional[float] = None,
) -> np.ndarray:
    return np.array([safe_exp(v) for v in log_moser_rung_factors(n, q, C0, r, B, k_max, sigma, log_sigma)])


def log_moser_ladder_constant(
    n: int,
    q: float,
    C0: float,
    r: float,
    B: float,
    sigma: Optional[float] = None,
    log_sigma: Optional[float] = None,
) -> float:
    """log C7, the log of the infinite product of rung factors.

    Terms are summed explicitly while beta = lambda^(k-1) < 2; past that
    Lambda(beta) = 6 beta and the remaining series is summed in closed form.
    """
    nu = interpolation_exponent(n, q)
    base = _log_base_factors(n, nu, C0, r, B, _log_sigma_argument(sigma, log_sigma))
    lam = (n + 2.0) / n
    total = 0.0
    J = 2
    while lam ** (J - 1) < 2.0:
        beta = lam ** (J - 1)
        total += (base + (J + 2) * math.log(4.0) + (1.0 + nu) * math.log(energy_coefficient(beta))) / beta
        J += 1
    x = 1.0 / lam
    S0 = x ** (J - 1) / (1.0 - x)
    S1 = x ** (J - 1) * ((J - 1) * (1.0 - x) + x) / (1.0 - x) ** 2
    log4 = math.log(4.0)
    total += S0 * (base + 3.0 * log4 + (1.0 + nu) * math.log(6.0))
    total += S1 * (log4 + (1.0 + nu) * math.log(lam))
    return total


def moser_ladder_constant(
    n: int,
    q: float,
    sigma: Optional[float],
    C0: float,
    r: float,
    B: float,
    log_sigma: Optional[float] = None,
) -> float:
    """C7(n, q, sigma, C0, r, B) (inf when it overflows)."""
    return safe_exp(log_moser_ladder_constant(n, q, C0, r, B, sigma, log_sigma))


@dataclass(frozen=True)
class EpsilonRegularityConstants:
    beta: float
    Lambda: float
    C0: float
    V_tilde: float
    log_delta_b: float
    log_C_b: float
    log_delta: float
    log_C_a: float
    log_C_eps: float

    @property
    def delta_b(self) -> float:
        return safe_exp(self.log_delta_b)

    @property
    def C_b(self) -> float:
        return safe_exp(self.log_C_b)

    @property
    def delta(self) -> float:
        return safe_exp(self.log_delta)

    @property
    def C_a(self) -> float:
        return safe_exp(self.log_C_a)

    @property
    def C_eps(self) -> float:
        return safe_exp(self.log_C_eps)


def epsilon_regularity_constants(
    n: int,
    sigma: Optional[float],
    r: float,
    q: Optional[float] = None,
    log_sigma: Optional[float] = None,
) -> EpsilonRegularityConstants:
    """delta and C of the scalar-curvature sup bound, with B = 1 and beta = (n+2)/2."""
    q = (n + 2) ** 2 / (2.0 * n) if q is None else q
    ls = _log_sigma_argument(sigma, log_sigma)
    beta = 0.5 * (n + 2)
    Lambda = energy_coefficient(beta)
    log_delta_b = _log_delta_b(n, ls, Lambda)
    log_C_b = _log_C_b(n, ls, Lambda, r, 1.0, beta)
    C0 = (3.0 * safe_exp(log_C_b) + 1.0) * safe_exp(log_delta_b) + 1.0
    V = tilde_volume(n, r)["V_tilde"]
    log_C_a = log_moser_ladder_constant(n, q, C0, r, 1.0, log_sigma=ls)
    log_C_eps = (
        math.log(3.0 * n) + float(np.logaddexp(log_C_b, 0.0)) + log_C_a + (n + 4.0) / (n + 2.0) * math.log(V)
    )
    return EpsilonRegularityConstants(
        beta=beta,
        Lambda=Lambda,
        C0=C0,
        V_tilde=V,
        log_delta_b=log_delta_b,
        log_C_b=log_C_b,
        log_delta=log_delta_b - math.log(3.0 * n * V),
        log_C_a=log_C_a,
        log_C_eps=log_C_eps,
    )


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _le(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + INEQUALITY_ABS_SLACK + INEQUALITY_REL_SLACK * abs(rhs)


def _measured_log_sigma(window: _Window, n: int, r: float) -> float:
    kappa = ball_volume_ratio(window.reference, 0, r).ratio
    logger.debug("measured kappa %.6g on B(p, %.3g)", kappa, r)
    return sobolev_sigma(n, kappa).log_sigma


def _resolve_log_sigma(
    window: _Window, n: int, r: float, sigma: Optional[float], log_sigma: Optional[float]
) -> float:
    if sigma is None and log_sigma is None:
        return _measured_log_sigma(window, n, r)
    return _log_sigma_argument(sigma, log_sigma)


@dataclass(frozen=True)
class SobolevCheck:
    """Both sides of the parabolic Sobolev inequality for one test field."""

    lhs: float
    rhs: float
    log_rhs: float
    holds: bool

    @property
    def slack(self) -> float:
        """rhs / lhs (inf when lhs vanishes)."""
        if self.lhs == 0:
            return math.inf
        return safe_exp(self.log_rhs - math.log(self.lhs))


TestField = Callable[[np.ndarray, float], np.ndarray]


def parabolic_sobolev_check(
    traj: FlowTrajectory,
    domains: MoserDomains,
    test_fields: Sequence[TestField],
    sigma: Optional[float] = None,
    log_sigma: Optional[float] = None,
) -> List[SobolevCheck]:
    """Evaluate int v^(2(n+2)/n) <= sigma max_t ||v||_2^(4/n) int |grad v|^2 over D.

    Each test field is called as ``v(distance, t)`` with distances from the
    pole in the metric at time 1. ``sigma`` defaults to the uniform Sobolev
    constant for the measured volume ratio of the ball.

    Raises:
        InvalidTestFieldError: If a field does not vanish on the boundary of the ball.
    """
    n = traj.n
    window = _sample_window(traj)
    r = domains.r
    ls = _resolve_log_sigma(window, n, r, sigma, log_sigma)
    weights = window.weights()
    inside = window.distance <= r
    results = []
    for index, v_field in enumerate(test_fields):
        lhs_slices, l2_slices, grad_slices = [], [], []
        for state, w in zip(window.states, weights):
            trace = np.asarray(v_field(np.array([r]), state.t), dtype=float)
            values = np.asarray(v_field(window.distance, state.t), dtype=float)
            if abs(float(trace[0])) > 1e-10 * max(1.0, float(np.max(np.abs(values)))):
                raise InvalidTestFieldError(
                    f"test field {index} has boundary value {float(trace[0]):.3g} at t = {state.t:.6g}"
                )
            v = np.where(inside, values, 0.0)
            grad = np.gradient(v, arclength(state.form))
            lhs_slices.append(float(np.sum(w * np.abs(v) ** (2.0 * (n + 2) / n))))
            l2_slices.append(float(np.sum(w * v * v)))
            grad_slices.append(float(np.sum(w * grad * grad)))
        times = window.times
        lhs = time_integral(times, lhs_slices, 0.0, 1.0)
        energy = time_integral(times, grad_slices, 0.0, 1.0)
        l2_max = max(l2_slices)
        if l2_max == 0 or energy == 0:
            log_rhs = -math.inf
        else:
            log_rhs = ls + (2.0 / n) * math.log(l2_max) + math.log(energy)
        rhs = safe_exp(log_rhs)
        holds = lhs <= INEQUALITY_ABS_SLACK or math.log(lhs) <= log_rhs + INEQUALITY_REL_SLACK
        results.append(SobolevCheck(lhs=lhs, rhs=rhs, log_rhs=log_rhs, holds=holds))
    return results


@dataclass(frozen=True)
class MoserRung:
    k: int
    exponent: float
    measured: float
    predicted: float
    holds: bool


@dataclass(frozen=True)
class MoserTrace:
    """Measured L^(lambda^k) norms over D_k against the analytic ladder.

    ``hypothesis_met`` reports ||f||_q + ||R_-||_q + 1 <= C0 over D.
    """

    rungs: List[MoserRung]
    sup_norm: float
    C0: float
    C0_required: float
    hypothesis_met: bool
    nonnegative: bool
    log_sigma: float
    problem: str = "custom"
    notes: List[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(rung.holds for rung in self.rungs)

    @property
    def sup_relative_gap(self) -> float:
        """|last rung - sup| / sup over D'."""
        if self.sup_norm == 0:
            return 0.0 if self.rungs[-1].measured == 0 else math.inf
        return abs(self.rungs[-1].measured - self.sup_norm) / self.sup_norm


def moser_iteration_trace(
    traj: FlowTrajectory,
    domains: MoserDomains,
    problem: MoserProblem,
    sigma: Optional[float] = None,
    C0: Optional[float] = None,
    log_sigma: Optional[float] = None,
) -> MoserTrace:
    """Measure ||v||_(lambda^k, D_k) for k = 1..k_max and the bound ladder from rung 1.

    ``C0`` defaults to the smallest admissible value ||f||_q + ||R_-||_q + 1.
    """
    n = traj.n
    window = _sample_window(traj)
    ls = _resolve_log_sigma(window, n, domains.r, sigma, log_sigma)
    v = [problem.v(curv) for curv in window.curvatures]
    u_min = min(float(np.min(problem.u(curv)[window.distance <= domains.r])) for curv in window.curvatures)
    nonnegative = u_min >= -INEQUALITY_ABS_SLACK

    f_norm = _spacetime_lp(window, [problem.f(c) for c in window.curvatures], problem.q, 0.0, domains.r)
    r_minus = _spacetime_lp(window, [np.maximum(-c.R, 0.0) for c in window.curvatures], problem.q, 0.0, domains.r)
    required = f_norm + r_minus + 1.0
    C0 = required if C0 is None else C0
    hypothesis_met = C0 >= required * (1.0 - INEQUALITY_REL_SLACK)
    notes = []
    if not hypothesis_met:
        notes.append(f"C0 = {C0:.6g} below the required {required:.6g}")
        logger.info("Moser hypothesis violated: %s", notes[-1])
    if not nonnegative:
        notes.append(f"u takes the negative value {u_min:.3g} on D")
        logger.info("Moser hypothesis violated: %s", notes[-1])

    lam = (n + 2.0) / n
    log_factors = log_moser_rung_factors(n, problem.q, C0, domains.r, domains.B, domains.k_max, log_sigma=ls)
    rungs: List[MoserRung] = []
    base = 0.0
    for k in range(1, domains.k_max + 1):
        exponent = lam**k
        measured = _spacetime_lp(window, v, exponent, domains.t(k), domains.radius(k))
        if k == 1:
            base = measured
            predicted = measured
        elif base == 0:
            predicted = 0.0
        else:
            predicted = safe_exp(math.log(base) + float(np.sum(log_factors[: k - 1])))
        rungs.append(
            MoserRung(k=k, exponent=exponent, measured=measured, predicted=predicted, holds=_le(measured, predicted))
        )
    sup_norm = _inner_sup(window, [np.abs(x) for x in v], 0.5 * domains.r, 0.5)
    return MoserTrace(
        rungs=rungs,
        sup_norm=sup_norm,
        C0=C0,
        C0_required=required,
        hypothesis_met=hypothesis_met,
        nonnegative=nonnegative,
        log_sigma=ls,
        problem=problem.name,
        notes=notes,
    )


@dataclass(frozen=True)
class EpsilonRegularityReport:
    """Sup bound of R_+ on D' from the critical norm of R on D.

    ``holds`` is None when the check is not applicable; ``reasons`` lists the
    failed hypotheses ("ricci-lower-bound", "ricci-upper-bound", "gate").
    """

    delta: float
    C_eps: float
    log_C_eps: float
    norm_in: float
    sup_out: float
    applicable: bool
    holds: Optional[bool]
    reasons: List[str] = field(default_factory=list)

    @property
    def slack(self) -> float:
        """C_eps norm_in / sup_out (inf when sup_out vanishes)."""
        if self.sup_out <= 0:
            return math.inf
        return safe_exp(self.log_C_eps + math.log(self.norm_in) - math.log(self.sup_out))


def epsilon_regularity_check(
    traj: FlowTrajectory,
    ball: Region,
    B: float,
    sigma: Optional[float] = None,
    q: Optional[float] = None,
    log_sigma: Optional[float] = None,
) -> EpsilonRegularityReport:
    """Check ||R_+||_(inf, D') <= C (||R||_((n+2)/2, D) + B) when the norm is below delta.

    ``ball`` must be centred at the x = 0 pole; its radius is measured at time 1.

    Raises:
        InvalidParameterError: If B lies outside [0, 1] or the window is not [0, 1].
    """
    if not 0 <= B <= 1:
        raise InvalidParameterError(f"B must lie in [0, 1], got {B}")
    if ball.whole or ball.center != 0:
        raise InvalidParameterError("the ball must have a radius and be centred at the pole (node 0)")
    assert ball.radius is not None
    n = traj.n
    r = ball.radius
    window = _sample_window(traj)
    ls = _resolve_log_sigma(window, n, r, sigma, log_sigma)
    constants = epsilon_regularity_constants(n, None, r, q=q, log_sigma=ls)

    reasons: List[str] = []
    in_ball = window.distance <= r
    in_ball[0] = True
    ric_low = min(float(np.min(np.minimum(c.ric_radial, c.ric_sphere)[in_ball])) for c in window.curvatures)
    ric_high = max(float(np.max(np.maximum(c.ric_radial, c.ric_sphere)[in_ball])) for c in window.curvatures)
    if ric_low < -B - INEQUALITY_ABS_SLACK:
        reasons.append("ricci-lower-bound")
    if ric_high > n - 1 + INEQUALITY_ABS_SLACK:
        reasons.append("ricci-upper-bound")

    norm = spacetime_norm(
        traj, NormQuery(quantity="R", alpha=0.5 * (n + 2), region=ball, interval=(0.0, 1.0), reference_time=1.0)
    )
    norm_in = norm + B
    if norm_in > constants.delta:
        reasons.append("gate")
    sup_out = max(0.0, _inner_sup(window, [np.maximum(c.R, 0.0) for c in window.curvatures], 0.5 * r, 0.5))

    applicable = not reasons
    holds: Optional[bool] = None
    if applicable:
        if norm_in > 0:
            holds = sup_out == 0 or math.log(sup_out) <= constants.log_C_eps + math.log(norm_in) + INEQUALITY_REL_SLACK
        else:
            holds = sup_out <= INEQUALITY_ABS_SLACK
    else:
        logger.info("epsilon-regularity not applicable: %s", ", ".join(reasons))
    return EpsilonRegularityReport(
        delta=constants.delta,
        C_eps=constants.C_eps,
        log_C_eps=constants.log_C_eps,
        norm_in=norm_in,
        sup_out=sup_out,
        applicable=applicable,
        holds=holds,
        reasons=reasons,
    )
