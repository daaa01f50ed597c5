"""Parabolic rescaling of trajectories and blow-up sequences.

A rescaling with factor Q about t_center is the flow Q g(t / Q + t_center):
lengths grow by sqrt(Q), curvature shrinks by 1/Q and time stretches by Q.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ricci_lab.errors import InvalidParameterError, OutOfRangeError
from ricci_lab.flow import assemble_trajectory, curvature_maximizing_sequence
from ricci_lab.geometry import ball_volume_ratio, diameter
from ricci_lab.models import (
    CurvatureMaximum,
    FlowTrajectory,
    MetricState,
    Region,
    RoundSphere,
    Warped,
)
from ricci_lab.norms import NormQuery, spacetime_integral

logger = logging.getLogger(__name__)

TIME_MATCH_RELATIVE = 1e-12


@dataclass(frozen=True)
class RescaleSpec:
    """Curvature scale Q, time anchor and base point of a parabolic rescaling."""

    Q: float
    t_center: float = 0.0
    base_point: int = 0

    def __post_init__(self) -> None:
        if not (self.Q > 0 and math.isfinite(self.Q)):
            raise InvalidParameterError(f"Q must be positive, got {self.Q}")

    def to_source(self, t: float) -> float:
        return t / self.Q + self.t_center

    def to_rescaled(self, t: float) -> float:
        return self.Q * (t - self.t_center)

    def inverse(self) -> "RescaleSpec":
        """The rescaling that undoes this one."""
        return RescaleSpec(Q=1.0 / self.Q, t_center=-self.Q * self.t_center, base_point=self.base_point)


def _scale_state(state: MetricState, Q: float, t: float) -> MetricState:
    if isinstance(state.form, RoundSphere):
        return MetricState(n=state.n, t=t, form=RoundSphere(c=Q * state.form.c))
    root = math.sqrt(Q)
    form = state.form
    return MetricState(n=state.n, t=t, form=Warped(x=form.x, phi=root * form.phi, psi=root * form.psi))


def _interpolate(traj: FlowTrajectory, t: float, tol: float) -> MetricState:
    """State at source time ``t``: linear in c, or nodewise linear in (phi, psi)."""
    times = traj.times
    j = int(np.searchsorted(times, t))
    for k in (j - 1, j):
        if 0 <= k < len(times) and abs(times[k] - t) <= tol:
            return traj.states[k]
    j = min(max(j, 1), len(times) - 1)
    left, right = traj.states[j - 1], traj.states[j]
    lam = (t - left.t) / (right.t - left.t)
    if isinstance(left.form, RoundSphere):
        assert isinstance(right.form, RoundSphere)
        c = (1.0 - lam) * left.form.c + lam * right.form.c
        return MetricState(n=left.n, t=t, form=RoundSphere(c=c))
    assert isinstance(right.form, Warped)
    phi = (1.0 - lam) * left.form.phi + lam * right.form.phi
    psi = (1.0 - lam) * left.form.psi + lam * right.form.psi
    return MetricState(n=left.n, t=t, form=Warped(x=left.form.x, phi=phi, psi=psi))


def parabolic_rescale(
    traj: FlowTrajectory, spec: RescaleSpec, new_interval: Tuple[float, float]
) -> FlowTrajectory:
    """Rescale ``traj`` and restrict it to ``new_interval`` in rescaled time.

    The new snapshots are the interval endpoints and the images of every source
    snapshot inside it. T_hat maps to Q (T_hat - t_center).

    Raises:
        OutOfRangeError: If the interval maps outside the source span.
    """
    a, b = new_interval
    if not a < b:
        raise InvalidParameterError(f"interval [{a}, {b}] is empty")
    src_a, src_b = spec.to_source(a), spec.to_source(b)
    tol = TIME_MATCH_RELATIVE * max(1.0, abs(traj.t_start), abs(traj.t_end))
    if src_a < traj.t_start - tol or src_b > traj.t_end + tol:
        raise OutOfRangeError(
            f"rescaled interval [{a}, {b}] maps to [{src_a}, {src_b}], "
            f"outside [{traj.t_start}, {traj.t_end}]"
        )
    src_a, src_b = max(src_a, traj.t_start), min(src_b, traj.t_end)

    sources = [src_a]
    sources += [t for t in traj.times if src_a + tol < t < src_b - tol]
    sources.append(src_b)
    new_times = [a] + [spec.to_rescaled(t) for t in sources[1:-1]] + [b]

    states = [
        _scale_state(_interpolate(traj, t_src, tol), spec.Q, t_new)
        for t_src, t_new in zip(sources, new_times)
    ]
    T_hat = spec.to_rescaled(traj.T_hat) if traj.T_hat is not None else None
    return assemble_trajectory(
        states,
        singular=traj.singular,
        T_hat=T_hat,
        termination=traj.termination,
        config=traj.config,
    )


@dataclass(frozen=True)
class InvarianceReport:
    """Integral of |Rm|^alpha over a window before and after rescaling.

    ``predicted_ratio`` is Q^((n+2)/2 - alpha); it equals 1 at the critical
    exponent.
    """

    before: float
    after: float
    relative_diff: float
    alpha: float
    ratio: float
    predicted_ratio: float


def critical_integral_invariance(
    traj: FlowTrajectory,
    spec: RescaleSpec,
    window: Optional[Tuple[float, float]] = None,
    alpha: Optional[float] = None,
) -> InvarianceReport:
    """Compare the space-time integral of |Rm|^alpha over ``window`` (source time) and its image.

    ``alpha`` defaults to the critical exponent (n+2)/2, where the integral is
    scale invariant.
    """
    n = traj.n
    alpha = 0.5 * (n + 2) if alpha is None else alpha
    a, b = window if window is not None else (traj.t_start, traj.t_end)
    image = (spec.to_rescaled(a), spec.to_rescaled(b))
    rescaled = parabolic_rescale(traj, spec, image)
    before = spacetime_integral(traj, NormQuery(quantity="|Rm|", alpha=alpha, interval=(a, b)))
    after = spacetime_integral(
        rescaled, NormQuery(quantity="|Rm|", alpha=alpha, interval=(rescaled.t_start, rescaled.t_end))
    )
    ratio = after / before if before else math.nan
    return InvarianceReport(
        before=before,
        after=after,
        relative_diff=abs(after - before) / abs(before) if before else abs(after),
        alpha=alpha,
        ratio=ratio,
        predicted_ratio=spec.Q ** (0.5 * (n + 2) - alpha),
    )


def dimensionless_products(traj: FlowTrajectory) -> np.ndarray:
    """max R times diameter squared at every snapshot; unchanged by rescaling."""
    return np.array(
        [float(np.max(curv.R)) * diameter(state) ** 2 for state, curv in zip(traj.states, traj.curvatures)]
    )


@dataclass(frozen=True, eq=False)
class BlowupElement:
    """One normalized window g_i(t) = Q_i g(Q_i^{-1}(t - 1) + t_i) on [0, 1].

    ``anchor_curvature`` is the curvature at the base point at rescaled time 1
    (equal to 1 by construction); ``max_curvature`` is its maximum over the
    window. ``critical_integral`` is the integral of |Rm|^((n+2)/2) over
    [0, 1] x B(anchor, 1) and ``kappa`` the volume ratio of that ball at time 1.
    """

    anchor: CurvatureMaximum
    spec: RescaleSpec
    trajectory: FlowTrajectory
    anchor_curvature: float
    max_curvature: float
    ric_lower_bound: float
    critical_integral: float
    kappa: float

    @property
    def normalized(self) -> bool:
        return self.max_curvature <= 1.0 + 1e-9


def blowup_sequence(
    traj: FlowTrajectory, count: int, quantity: str = "R"
) -> List[BlowupElement]:
    """Normalized rescalings around a curvature-maximizing sequence.

    Anchors whose window would begin before the trajectory start are skipped;
    when fewer than ``count`` remain a warning is logged and the usable ones
    are returned.
    """
    anchors = curvature_maximizing_sequence(traj, count, quantity)
    A = max(0.0, -min(curv.ric_inf for curv in traj.curvatures))
    n = traj.n
    elements: List[BlowupElement] = []
    for anchor in anchors:
        Q = anchor.value
        t_center = anchor.time - 1.0 / Q
        if t_center < traj.t_start:
            logger.debug("anchor at t = %.6g needs a window before the start; skipped", anchor.time)
            continue
        spec = RescaleSpec(Q=Q, t_center=t_center, base_point=anchor.node)
        rescaled = parabolic_rescale(traj, spec, (0.0, 1.0))
        last = rescaled.curvatures[-1].quantity(quantity)
        node = 0 if rescaled.is_round else anchor.node
        window_max = max(float(np.max(curv.quantity(quantity))) for curv in rescaled.curvatures)
        ball = Region(center=node, radius=1.0)
        critical = spacetime_integral(
            rescaled,
            NormQuery(quantity="|Rm|", alpha=0.5 * (n + 2), region=ball, interval=(0.0, 1.0), reference_time=1.0),
        )
        kappa = ball_volume_ratio(rescaled.states[-1], node, 1.0).ratio
        elements.append(
            BlowupElement(
                anchor=anchor,
                spec=spec,
                trajectory=rescaled,
                anchor_curvature=float(last[node]),
                max_curvature=window_max,
                ric_lower_bound=-A / Q,
                critical_integral=critical,
                kappa=kappa,
            )
        )
    if len(elements) < count:
        logger.warning("blow-up sequence truncated: %d of %d windows usable", len(elements), count)
    return elements
