"""Space-time and slice L^alpha norms of curvature quantities.

The time integral runs over stored snapshots. On singular trajectories each
sub-interval is integrated with the exact power law A (T_hat - t)^p through
its endpoint values, and the interval past the last snapshot extends the last
such law, so divergent tails near T_hat are captured instead of cut off.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ricci_lab.defaults import (
    CAUCHY_RELATIVE_TOLERANCE,
    DEFAULT_EPS_EXPONENTS,
    INEQUALITY_ABS_SLACK,
    INEQUALITY_REL_SLACK,
    POWER_EXPONENT_THRESHOLD,
    QUANTITIES,
)
from ricci_lab.errors import InvalidParameterError, NotApplicableError, OutOfRangeError
from ricci_lab.geometry import curvature, region_weights, sphere_measure
from ricci_lab.models import (
    WHOLE_MANIFOLD,
    CurvatureField,
    FlowTrajectory,
    MetricState,
    Region,
)

logger = logging.getLogger(__name__)

# Conclusion codes of extension_verdict when the Ricci-lower-bound or the curvature-norm criterion holds
CONCLUSION_RICCI_LOWER_BOUND = "extendable-per-Thm1.1"
CONCLUSION_CURVATURE_NORM = "extendable-per-Thm1.2"


@dataclass(frozen=True)
class NormQuery:
    """A norm of ``quantity`` over ``region`` and the time ``interval``.

    ``interval`` defaults to the whole trajectory. A ball region is fixed in
    the metric at ``reference_time`` (default: the last snapshot not after the
    end of the interval).
    """

    quantity: str = "R"
    alpha: float = 2.0
    region: Region = WHOLE_MANIFOLD
    interval: Optional[Tuple[float, float]] = None
    reference_time: Optional[float] = None

    def __post_init__(self) -> None:
        if self.quantity not in QUANTITIES:
            raise InvalidParameterError(f"unknown quantity {self.quantity!r}")
        _check_alpha(self.alpha)
        if self.interval is not None and not self.interval[0] <= self.interval[1]:
            raise InvalidParameterError(f"interval {self.interval} is not ordered")


def _check_alpha(alpha: float) -> None:
    if not (alpha >= 1 or math.isinf(alpha)) or math.isnan(alpha):
        raise InvalidParameterError(f"alpha must be >= 1, got {alpha}")


def signed_parts(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Split samples into F+ = max(F, 0) and F- = max(-F, 0)."""
    values = np.asarray(values, dtype=float)
    return np.maximum(values, 0.0), np.maximum(-values, 0.0)


# ---------------------------------------------------------------------------
# Slices
# ---------------------------------------------------------------------------


def _region_samples(state: MetricState, weights: np.ndarray, region: Region) -> np.ndarray:
    mask = weights > 0
    if region.whole:
        mask[:] = True
    elif not state.is_round:
        mask[region.center] = True
    return mask


def _slice_integral(
    state: MetricState,
    curv: CurvatureField,
    quantity: str,
    alpha: float,
    region: Region = WHOLE_MANIFOLD,
    reference: Optional[MetricState] = None,
) -> float:
    """Integral of |F|^alpha over the region, or sup |F| for alpha = inf."""
    values = np.abs(curv.quantity(quantity))
    weights = region_weights(state, region, reference=reference)
    if math.isinf(alpha):
        return float(np.max(values[_region_samples(state, weights, region)]))
    return float(np.sum(weights * values**alpha))


def slice_norm(
    state: MetricState,
    quantity: str,
    alpha: float,
    region: Region = WHOLE_MANIFOLD,
    reference: Optional[MetricState] = None,
) -> float:
    """Spatial L^alpha norm of ``quantity`` on one time slice; alpha = inf gives the sup."""
    _check_alpha(alpha)
    value = _slice_integral(state, curvature(state), quantity, alpha, region, reference)
    return value if math.isinf(alpha) else value ** (1.0 / alpha)


def sup_norm_track(
    traj: FlowTrajectory, quantity: str = "R", region: Region = WHOLE_MANIFOLD
) -> np.ndarray:
    """Per-snapshot sup of |quantity| over the region."""
    reference = traj.states[-1]
    return np.array(
        [
            _slice_integral(s, c, quantity, math.inf, region, reference)
            for s, c in zip(traj.states, traj.curvatures)
        ]
    )


# ---------------------------------------------------------------------------
# Time quadrature
# ---------------------------------------------------------------------------


def _power_exponent(t0: float, f0: float, t1: float, f1: float, T: Optional[float]) -> Optional[float]:
    """Exponent p of A (T - t)^p through two samples, or None when no such law fits."""
    if T is None or not (f0 > 0 and f1 > 0 and T > t1 > t0):
        return None
    return math.log(f1 / f0) / math.log((T - t1) / (T - t0))


def _power_piece(t0: float, f0: float, p: float, T: float, u: float, v: float) -> float:
    """Integral over [u, v] of f0 ((T - t) / (T - t0))^p."""
    du, dv = T - u, T - v
    f_u = f0 * (du / (T - t0)) ** p
    q = p + 1.0
    log_ratio = math.log(dv / du)
    factor = -log_ratio if q == 0 else -math.expm1(q * log_ratio) / q
    return f_u * du * factor


def _linear_piece(t0: float, f0: float, t1: float, f1: float, u: float, v: float) -> float:
    slope = (f1 - f0) / (t1 - t0)
    return 0.5 * (v - u) * (2.0 * f0 + slope * ((u - t0) + (v - t0)))


def time_integral(
    times: Sequence[float],
    values: Sequence[float],
    a: float,
    b: float,
    T: Optional[float] = None,
) -> float:
    """Integrate sampled ``values`` over [a, b].

    With ``T`` set, sub-intervals whose endpoint values are positive use the
    power law through them, and [t_last, b] extends the final law.

    Raises:
        OutOfRangeError: If [a, b] leaves the samples and no tail law applies.
    """
    t = np.asarray(times, dtype=float)
    f = np.asarray(values, dtype=float)
    if a < t[0] or a > b:
        raise OutOfRangeError(f"interval [{a}, {b}] starts outside [{t[0]}, {t[-1]}]")
    if b > t[-1] and (T is None or b >= T):
        raise OutOfRangeError(f"interval end {b} beyond the trajectory (last {t[-1]}, T_hat {T})")

    total = 0.0
    for j in range(len(t) - 1):
        u, v = max(a, t[j]), min(b, t[j + 1])
        if v <= u:
            continue
        p = _power_exponent(t[j], f[j], t[j + 1], f[j + 1], T)
        if p is None:
            total += _linear_piece(t[j], f[j], t[j + 1], f[j + 1], u, v)
        else:
            assert T is not None
            total += _power_piece(t[j], f[j], p, T, u, v)

    if b > t[-1]:
        p = _power_exponent(t[-2], f[-2], t[-1], f[-1], T) if len(t) > 1 else None
        if p is None:
            raise OutOfRangeError("no power law available to extend past the last snapshot")
        assert T is not None
        total += _power_piece(t[-1], f[-1], p, T, max(a, t[-1]), b)
    return total


def _sup_until(times: np.ndarray, sups: np.ndarray, a: float, b: float, T: Optional[float]) -> float:
    """Sup over [a, b] of sampled sups, extrapolating past the last sample."""
    inside = (times >= a) & (times <= b)
    best = float(np.max(sups[inside])) if np.any(inside) else 0.0
    best = max(best, float(np.interp(a, times, sups)), float(np.interp(min(b, times[-1]), times, sups)))
    if b > times[-1] and len(times) > 1:
        p = _power_exponent(times[-2], sups[-2], times[-1], sups[-1], T)
        if p is None:
            raise OutOfRangeError("no power law available to extend past the last snapshot")
        assert T is not None
        best = max(best, sups[-1] * ((T - b) / (T - times[-1])) ** p)
    return best


def _model_time(traj: FlowTrajectory) -> Optional[float]:
    return traj.T_hat if traj.singular else None


def _interval(traj: FlowTrajectory, query: NormQuery) -> Tuple[float, float]:
    a, b = query.interval if query.interval is not None else (traj.t_start, traj.t_end)
    if a < traj.t_start:
        raise OutOfRangeError(f"interval start {a} before the trajectory start {traj.t_start}")
    if b > traj.t_end and not (traj.singular and traj.T_hat is not None and b < traj.T_hat):
        raise OutOfRangeError(f"interval end {b} beyond the trajectory end {traj.t_end}")
    return a, b


def _reference_state(traj: FlowTrajectory, query: NormQuery, b: float) -> Optional[MetricState]:
    if query.region.whole:
        return None
    t_ref = query.reference_time if query.reference_time is not None else b
    candidates = [s for s in traj.states if s.t <= t_ref]
    return candidates[-1] if candidates else traj.states[0]


def slice_integrals(
    traj: FlowTrajectory,
    quantity: str,
    alpha: float,
    region: Region = WHOLE_MANIFOLD,
    reference: Optional[MetricState] = None,
) -> np.ndarray:
    """Per-snapshot integral of |quantity|^alpha over the region."""
    return np.array(
        [
            _slice_integral(s, c, quantity, alpha, region, reference)
            for s, c in zip(traj.states, traj.curvatures)
        ]
    )


def spacetime_integral(traj: FlowTrajectory, query: NormQuery) -> float:
    """Double integral of |F|^alpha (the alpha-th power of the norm); sup for alpha = inf."""
    a, b = _interval(traj, query)
    reference = _reference_state(traj, query, b)
    values = slice_integrals(traj, query.quantity, query.alpha, query.region, reference)
    if math.isinf(query.alpha):
        return _sup_until(traj.times, values, a, b, _model_time(traj))
    return time_integral(traj.times, values, a, b, _model_time(traj))


def spacetime_norm(traj: FlowTrajectory, query: NormQuery) -> float:
    """The space-time L^alpha norm of ``query.quantity``.

    Raises:
        OutOfRangeError: If the interval leaves the span covered by ``traj``.
    """
    value = spacetime_integral(traj, query)
    return value if math.isinf(query.alpha) else value ** (1.0 / query.alpha)


def closed_form_sphere_norm(n: int, V0: float, T: float, alpha: float, eps: float = 0.0) -> float:
    """Exact norm of R over [0, T - eps] x S^n for the shrinking round sphere.

    The sphere has volume V0 at t = 0 and extinction time T. With eps = 0 the
    value is infinite exactly when alpha >= n/2 + 1.
    """
    if not (V0 > 0 and T > 0):
        raise InvalidParameterError("V0 and T must be positive")
    if not 0 <= eps < T:
        raise InvalidParameterError(f"eps must lie in [0, T), got {eps}")
    _check_alpha(alpha)
    if math.isinf(alpha):
        if eps == 0:
            return math.inf
        # R(T - eps) = (n/2) / eps on every sphere of this family
        return 0.5 * n / eps
    exponent = 0.5 * n - alpha
    if eps == 0 and exponent <= -1:
        return math.inf
    if exponent == -1:
        integral = math.log(T / eps)
    else:
        q = exponent + 1.0
        integral = (T**q - eps**q) / q
    return 0.5 * n * V0 ** (1.0 / alpha) * T ** (-n / (2.0 * alpha)) * integral ** (1.0 / alpha)


def sphere_initial_volume(n: int, c0: float) -> float:
    return c0 ** (n / 2.0) * sphere_measure(n)


# ---------------------------------------------------------------------------
# Divergence scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    """Partial norms over [t_start, T_hat - eps] and the divergence classification."""

    alpha: float
    eps: Tuple[float, ...]
    partial_norms: Tuple[float, ...]
    exponent: float
    classification: str

    @property
    def limit(self) -> float:
        """Best estimate of the norm (the last partial norm, or inf when diverging)."""
        return self.partial_norms[-1] if self.classification == "finite" else math.inf


def default_eps_sequence(traj: FlowTrajectory) -> List[float]:
    if traj.T_hat is None:
        raise NotApplicableError("the default epsilon ladder needs T_hat")
    span = traj.T_hat - traj.t_start
    return [span * 4.0**-k for k in DEFAULT_EPS_EXPONENTS]


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    good = np.isfinite(x) & np.isfinite(y)
    if np.count_nonzero(good) < 2:
        return math.nan
    return float(np.polyfit(x[good], y[good], 1)[0])


def _classify(exponent: float, norms: Sequence[float]) -> str:
    if exponent > POWER_EXPONENT_THRESHOLD:
        return "power-divergent"
    last, previous = norms[-1], norms[-2]
    cauchy = abs(last - previous) <= CAUCHY_RELATIVE_TOLERANCE * abs(last)
    if exponent < -POWER_EXPONENT_THRESHOLD or cauchy or math.isnan(exponent):
        return "finite"
    return "log-divergent"


def alpha_threshold_scan(
    traj: FlowTrajectory,
    quantity: str = "R",
    alphas: Sequence[float] = (2.0, 2.5, 3.0),
    eps_sequence: Optional[Sequence[float]] = None,
    region: Region = WHOLE_MANIFOLD,
) -> List[ScanResult]:
    """Classify how the norm of ``quantity`` behaves as the cut-off eps -> 0.

    For finite alpha the exponent is the slope of log(increment) against
    log(1/eps), where the increments are the integrals of |F|^alpha between
    successive cut-offs: positive for power divergence, zero for logarithmic
    divergence, negative for convergence. For alpha = inf the partial sup norms
    themselves are fitted.

    Raises:
        NotApplicableError: If the trajectory is not singular.
    """
    if not traj.singular or traj.T_hat is None:
        raise NotApplicableError("an alpha scan needs a singular trajectory")
    eps = list(eps_sequence) if eps_sequence is not None else default_eps_sequence(traj)
    if len(eps) < 3:
        raise InvalidParameterError("the eps sequence needs at least three values")
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidParameterError("eps sequence must be positive and strictly decreasing")
    if traj.T_hat - eps[0] < traj.t_start:
        raise InvalidParameterError("largest eps reaches before the trajectory start")

    ends = [traj.T_hat - e for e in eps]
    log_inv_eps = -np.log(np.asarray(eps))
    reference = traj.states[-1] if not region.whole else None
    results = []
    for alpha in alphas:
        _check_alpha(alpha)
        values = slice_integrals(traj, quantity, alpha, region, reference)
        if math.isinf(alpha):
            norms = [_sup_until(traj.times, values, traj.t_start, b, traj.T_hat) for b in ends]
            with np.errstate(divide="ignore"):
                exponent = _fit_slope(log_inv_eps, np.log(norms))
        else:
            partials = [time_integral(traj.times, values, traj.t_start, b, traj.T_hat) for b in ends]
            norms = [p ** (1.0 / alpha) for p in partials]
            increments = np.diff(partials)
            with np.errstate(divide="ignore", invalid="ignore"):
                exponent = _fit_slope(log_inv_eps[:-1], np.log(increments))
        classification = _classify(exponent, norms)
        logger.debug("alpha=%g: exponent %.4f, %s", alpha, exponent, classification)
        results.append(
            ScanResult(
                alpha=float(alpha),
                eps=tuple(float(e) for e in eps),
                partial_norms=tuple(float(v) for v in norms),
                exponent=exponent,
                classification=classification,
            )
        )
    return results


# ---------------------------------------------------------------------------
# Hoelder consistency
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HolderReport:
    """||F||_alpha <= ||F||_inf ||1||_alpha on the query's domain."""

    norm: float
    sup: float
    measure: float
    holds: bool


def holder_check(traj: FlowTrajectory, query: NormQuery) -> HolderReport:
    if math.isinf(query.alpha):
        raise InvalidParameterError("the Hoelder check needs a finite alpha")
    a, b = _interval(traj, query)
    reference = _reference_state(traj, query, b)
    T = _model_time(traj)
    norm = spacetime_norm(traj, query)
    sups = slice_integrals(traj, query.quantity, math.inf, query.region, reference)
    sup = _sup_until(traj.times, sups, a, b, T)
    volumes = np.array(
        [float(np.sum(region_weights(s, query.region, reference=reference))) for s in traj.states]
    )
    measure = time_integral(traj.times, volumes, a, b, T) ** (1.0 / query.alpha)
    bound = sup * measure
    return HolderReport(
        norm=norm,
        sup=sup,
        measure=measure,
        holds=norm <= bound + INEQUALITY_ABS_SLACK + INEQUALITY_REL_SLACK * bound,
    )


# ---------------------------------------------------------------------------
# Extension verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormStatus:
    """``finite`` with a value, or ``diverging`` with a rate exponent."""

    kind: str
    value: Optional[float] = None
    exponent: Optional[float] = None
    classification: Optional[str] = None

    @property
    def finite(self) -> bool:
        return self.kind == "finite"


@dataclass(frozen=True)
class ExtensionVerdict:
    """Whether the measured data meet the hypotheses of the two extension criteria.

    The first criterion needs a Ricci lower bound -A together with a finite
    norm of R at alpha >= (n+2)/2. The second needs a finite norm of |Rm| at
    the same exponents.
    """

    A: float
    alpha: float
    norm_status: NormStatus
    rm_norm_status: NormStatus
    theorem1_hypotheses_met: bool
    theorem2_hypotheses_met: bool
    conclusion: str
    failures: Dict[str, List[str]] = field(default_factory=dict)
    consistent: bool = True


def _norm_status(
    traj: FlowTrajectory, quantity: str, alpha: float, eps_sequence: Optional[Sequence[float]]
) -> NormStatus:
    if not traj.singular:
        value = spacetime_norm(traj, NormQuery(quantity=quantity, alpha=alpha))
        return NormStatus(kind="finite", value=value, classification="finite")
    scan = alpha_threshold_scan(traj, quantity, [alpha], eps_sequence)[0]
    if scan.classification == "finite":
        return NormStatus(kind="finite", value=scan.limit, exponent=scan.exponent, classification="finite")
    return NormStatus(kind="diverging", exponent=scan.exponent, classification=scan.classification)


def extension_verdict(
    traj: FlowTrajectory, alpha: float, eps_sequence: Optional[Sequence[float]] = None
) -> ExtensionVerdict:
    """Measure A = sup Ric_- and decide which extension hypotheses hold.

    A singular trajectory must fail at least one hypothesis of each criterion;
    ``consistent`` records whether it does.
    """
    _check_alpha(alpha)
    n = traj.n
    A = max(0.0, -min(curv.ric_inf for curv in traj.curvatures))
    threshold = 0.5 * (n + 2)
    r_status = _norm_status(traj, "R", alpha, eps_sequence)
    rm_status = _norm_status(traj, "|Rm|", alpha, eps_sequence)

    first: List[str] = []
    second: List[str] = []
    if not alpha >= threshold:
        first.append("alpha")
        second.append("alpha")
    if not math.isfinite(A):
        first.append("ricci-lower-bound")
    if not r_status.finite:
        first.append("norm")
    if not rm_status.finite:
        second.append("rm-norm")

    met1, met2 = not first, not second
    if met1:
        conclusion = CONCLUSION_RICCI_LOWER_BOUND
    elif met2:
        conclusion = CONCLUSION_CURVATURE_NORM
    else:
        conclusion = f"hypotheses-fail({','.join(first)})"
    consistent = not (traj.singular and (met1 or met2))
    if not consistent:
        logger.warning("singular trajectory meets extension hypotheses; numerical data unreliable")
    elif first or second:
        logger.info("extension hypotheses failed: %s / %s", first, second)
    return ExtensionVerdict(
        A=A,
        alpha=float(alpha),
        norm_status=r_status,
        rm_norm_status=rm_status,
        theorem1_hypotheses_met=met1,
        theorem2_hypotheses_met=met2,
        conclusion=conclusion,
        failures={"ricci-lower-bound": first, "curvature-norm": second},
        consistent=consistent,
    )


def round_sphere_reference(n: int, c0: float) -> Tuple[float, float]:
    """(V0, T) of the shrinking sphere of scale c0, the inputs of the closed form."""
    return sphere_initial_volume(n, c0), c0 / (2.0 * (n - 1))

