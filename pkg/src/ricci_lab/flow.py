"""Ricci flow in time.

Round spheres follow the exact solution c(t) = c0 - 2(n-1)t. Warped products
are integrated with an explicit midpoint scheme on a fixed grid; phi absorbs
the radial change of the metric and the pole values of phi are re-projected
after every stage so the stored states stay regular.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ricci_lab.config import FlowConfig
from ricci_lab.defaults import (
    DT_COLLAPSE,
    INEQUALITY_ABS_SLACK,
    INEQUALITY_REL_SLACK,
    PINCH_EPS_FACTOR,
)
from ricci_lab.errors import (
    InvalidParameterError,
    InvalidProfileError,
    NotApplicableError,
    NumericalBlowupError,
    OutOfRangeError,
    PastSingularityError,
    SingularitySignal,
    StepRejectedError,
)
from ricci_lab.geometry import (
    arclength,
    curvature,
    diameter,
    laplacian,
    make_round_sphere,
    region_weights,
    sine_factor,
    stable_timestep,
    total_volume,
    validate_warped,
)
from ricci_lab.models import (
    WHOLE_MANIFOLD,
    CurvatureField,
    CurvatureMaximum,
    FlowTrajectory,
    MetricState,
    Region,
    RoundSphere,
    Warped,
)

logger = logging.getLogger(__name__)

PINCH_THRESHOLD = PINCH_EPS_FACTOR * float(np.finfo(float).eps)


def maximal_time(n: int, c0: float) -> float:
    """Extinction time c0 / (2(n-1)) of the round sphere of scale c0."""
    return c0 / (2.0 * (n - 1))


def evolve_round_sphere(n: int, c0: float, t: float) -> MetricState:
    """Exact Ricci flow of the round sphere c0 * g_s, evaluated at time ``t``.

    Raises:
        PastSingularityError: If ``t`` is not before the extinction time.
    """
    T = maximal_time(n, c0)
    if t >= T:
        raise PastSingularityError(t, T)
    return make_round_sphere(n, c0 - 2.0 * (n - 1) * t, t=t)


# ---------------------------------------------------------------------------
# Warped stepping
# ---------------------------------------------------------------------------


def _rates(state: MetricState) -> Tuple[np.ndarray, np.ndarray]:
    form = state.form
    assert isinstance(form, Warped)
    curv = curvature(state)
    return -curv.ric_radial * form.phi, -curv.ric_sphere * form.psi


def _advance(
    n: int, t: float, base: Warped, rates: Tuple[np.ndarray, np.ndarray], dt: float
) -> MetricState:
    phi = base.phi + dt * rates[0]
    psi = base.psi + dt * rates[1]
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(psi))):
        raise NumericalBlowupError(f"non-finite profile values at t = {t + dt:.17g}")
    psi[0] = psi[-1] = 0.0
    if np.min(psi[1:-1]) < PINCH_THRESHOLD:
        raise SingularitySignal(f"psi pinched to {np.min(psi[1:-1]):.3e} at t = {t + dt:.17g}")
    w = sine_factor(base.x, psi)
    phi[0], phi[-1] = w[0], w[-1]
    return MetricState(n=n, t=t + dt, form=Warped(x=base.x, phi=phi, psi=psi))


def step_warped(state: MetricState, dt: float) -> MetricState:
    """Take one explicit midpoint step of length ``dt``.

    Raises:
        StepRejectedError: If the new state violates positivity or pole regularity.
        SingularitySignal: If the interior minimum of psi falls to machine precision.
        NumericalBlowupError: If a stage produces non-finite values.
    """
    if not isinstance(state.form, Warped):
        raise InvalidParameterError("step_warped needs a warped state")
    if dt < 0:
        raise InvalidParameterError(f"time step must be nonnegative, got {dt}")
    if dt == 0:
        return state

    base = state.form
    mid = _advance(state.n, state.t, base, _rates(state), 0.5 * dt)
    try:
        validate_warped(mid)
    except InvalidProfileError as e:
        raise StepRejectedError(f"midpoint stage invalid: {e}") from e
    new = _advance(state.n, state.t, base, _rates(mid), dt)
    try:
        validate_warped(new)
    except InvalidProfileError as e:
        raise StepRejectedError(str(e)) from e
    return new


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def _running_records(
    times: Sequence[float], fields: Sequence[CurvatureField], quantity: str
) -> List[CurvatureMaximum]:
    """Snapshots at which ``quantity`` sets a new space-time maximum."""
    records: List[CurvatureMaximum] = []
    for t, curv in zip(times, fields):
        values = curv.quantity(quantity)
        node = int(np.argmax(values))
        value = float(values[node])
        if not records or value > records[-1].value:
            records.append(CurvatureMaximum(time=float(t), node=node, value=value))
    return records


def extrapolate_maximal_time(times: Sequence[float], rm_max: Sequence[float]) -> float:
    """Estimate T by a linear fit of 1 / max|Rm| over the last three samples.

    The two secant slopes must both be negative and within a factor two of
    each other (a type-I rate); the line through the last two samples is then
    followed to zero, otherwise the last time is returned. No higher-order
    correction is applied.
    """
    t_last = float(times[-1])
    if len(times) < 3:
        return t_last
    t = np.asarray(times[-3:], dtype=float)
    y = 1.0 / np.asarray(rm_max[-3:], dtype=float)
    s1 = (y[1] - y[0]) / (t[1] - t[0])
    s2 = (y[2] - y[1]) / (t[2] - t[1])
    if s1 < 0 and s2 < 0 and 0.5 <= s2 / s1 <= 2.0:
        return t_last - y[2] / s2
    return t_last


def assemble_trajectory(
    states: Sequence[MetricState],
    singular: bool = False,
    T_hat: Optional[float] = None,
    termination: str = "completed",
    config: Optional[FlowConfig] = None,
    curvatures: Optional[Sequence[CurvatureField]] = None,
) -> FlowTrajectory:
    """Build a trajectory from snapshots, computing curvature and the R-maximum track."""
    if not states:
        raise InvalidParameterError("a trajectory needs at least one state")
    times = [s.t for s in states]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise InvalidParameterError("snapshot times must be strictly increasing")
    if any(s.n != states[0].n or s.kind != states[0].kind for s in states):
        raise InvalidParameterError("snapshots must share dimension and metric form")
    fields = list(curvatures) if curvatures is not None else [curvature(s) for s in states]
    return FlowTrajectory(
        states=tuple(states),
        curvatures=tuple(fields),
        singular=singular,
        T_hat=T_hat,
        max_curvature_track=tuple(_running_records(times, fields, "R")),
        termination=termination,
        config=config,
    )


@dataclass
class _Recorder:
    """Snapshot bookkeeping for one run."""

    stride: int
    states: List[MetricState] = field(default_factory=list)
    fields: List[CurvatureField] = field(default_factory=list)
    accepted: int = 0

    def offer(self, state: MetricState, curv: CurvatureField, force: bool = False) -> None:
        self.accepted += 1
        if force or self.accepted % self.stride == 0:
            self.keep(state, curv)

    def keep(self, state: MetricState, curv: CurvatureField) -> None:
        if self.states and self.states[-1].t == state.t:
            return
        self.states.append(state)
        self.fields.append(curv)

    def finish(
        self, config: FlowConfig, singular: bool, termination: str, last: MetricState, last_curv: CurvatureField
    ) -> FlowTrajectory:
        self.keep(last, last_curv)
        T_hat = None
        if singular:
            T_hat = extrapolate_maximal_time(
                [s.t for s in self.states], [float(np.max(c.rm_norm)) for c in self.fields]
            )
        return assemble_trajectory(
            self.states,
            singular=singular,
            T_hat=T_hat,
            termination=termination,
            config=config,
            curvatures=self.fields,
        )


def _timestep(state: MetricState, rm_max: float, config: FlowConfig) -> float:
    dt = min(
        stable_timestep(state, 1.0),
        config.curvature_step_fraction / rm_max if rm_max > 0 else math.inf,
        config.dt_initial,
    )
    return config.safety * dt


def _sphere_origin(state: MetricState) -> float:
    """Scale factor the exact sphere solution through ``state`` has at t = 0."""
    if isinstance(state.form, RoundSphere):
        return state.form.c + 2.0 * (state.n - 1) * state.t
    return math.nan


def _take_step(
    state: MetricState, dt: float, c_origin: float
) -> Tuple[Optional[MetricState], bool]:
    """Advance one step, halving ``dt`` on rejection.

    Returns the new state (None once dt collapses) and whether it was refined.
    """
    if isinstance(state.form, RoundSphere):
        return evolve_round_sphere(state.n, c_origin, state.t + dt), False
    trial = dt
    while trial >= DT_COLLAPSE:
        try:
            return step_warped(state, trial), trial < dt
        except StepRejectedError as e:
            logger.debug("step of %.3e rejected at t = %.10g: %s", trial, state.t, e)
            trial *= 0.5
    return None, True


def run_flow(initial: MetricState, config: Optional[FlowConfig] = None) -> FlowTrajectory:
    """Integrate the Ricci flow from ``initial`` until a stopping rule fires.

    The run stops at ``t_max``, when max|Rm| reaches ``curvature_ceiling``, when
    the step size collapses, or when a warped profile pinches. Every
    ``output_stride`` accepted steps are stored, as are steps taken after a
    rejection and the final state.

    Raises:
        NumericalBlowupError: On non-finite values; ``partial`` holds the
            trajectory accumulated so far.
    """
    config = config or FlowConfig()
    if isinstance(initial.form, Warped):
        validate_warped(initial)
    logger.info(
        "starting %s flow: n=%d, t0=%.6g, t_max=%.6g, ceiling=%.3g",
        initial.kind,
        initial.n,
        initial.t,
        config.t_max,
        config.curvature_ceiling,
    )

    recorder = _Recorder(stride=config.output_stride)
    state = initial
    curv = curvature(state)
    recorder.keep(state, curv)

    if float(np.max(curv.rm_norm)) >= config.curvature_ceiling:
        logger.info("initial max|Rm| already exceeds the ceiling; stopping at t0")
        return FlowTrajectory(
            states=(state,),
            curvatures=(curv,),
            singular=True,
            T_hat=state.t,
            max_curvature_track=tuple(_running_records([state.t], [curv], "R")),
            termination="ceiling",
            config=config,
        )

    c_origin = _sphere_origin(state)
    singular = False
    termination = "completed"
    steps = 0
    while True:
        rm_max = float(np.max(curv.rm_norm))
        if rm_max >= config.curvature_ceiling:
            logger.info("max|Rm| = %.3g crossed the ceiling at t = %.10g", rm_max, state.t)
            singular, termination = True, "ceiling"
            break
        if state.t >= config.t_max:
            break
        if steps >= config.max_steps:
            logger.warning("stopping after %d steps at t = %.10g", steps, state.t)
            termination = "max-steps"
            break

        dt = min(_timestep(state, rm_max, config), config.t_max - state.t)
        try:
            new_state, refined = _take_step(state, dt, c_origin)
        except SingularitySignal as e:
            logger.info("profile pinched: %s", e)
            singular, termination = True, "singularity-signal"
            break
        except NumericalBlowupError as e:
            logger.warning("numerical blow-up: %s", e)
            partial = recorder.finish(config, False, "numerical-blowup", state, curv)
            raise NumericalBlowupError(str(e), partial=partial) from e
        if new_state is None:
            logger.info("step size collapsed below %.0e at t = %.10g", DT_COLLAPSE, state.t)
            singular, termination = True, "dt-collapse"
            break

        new_curv = curvature(new_state)
        if not np.all(np.isfinite(new_curv.rm_norm)):
            logger.warning("non-finite curvature at t = %.10g", new_state.t)
            partial = recorder.finish(config, False, "numerical-blowup", state, curv)
            raise NumericalBlowupError(f"non-finite curvature at t = {new_state.t:.17g}", partial=partial)
        steps += 1
        state, curv = new_state, new_curv
        recorder.offer(state, curv, force=refined)

    trajectory = recorder.finish(config, singular, termination, state, curv)
    logger.info(
        "flow stopped (%s) at t = %.10g after %d steps, %d snapshots%s",
        termination,
        trajectory.t_end,
        steps,
        len(trajectory),
        f", T_hat = {trajectory.T_hat:.10g}" if trajectory.T_hat is not None else "",
    )
    return trajectory


# ---------------------------------------------------------------------------
# Evolution identities
# ---------------------------------------------------------------------------


def _check_interior(traj: FlowTrajectory, i: int) -> None:
    if not 0 < i < len(traj) - 1:
        raise InvalidParameterError(f"index {i} is not an interior snapshot of {len(traj)}")


def scalar_evolution_residual(traj: FlowTrajectory, i: int) -> np.ndarray:
    """dR/dt - Delta R - 2|Ric|^2 at snapshot ``i`` with a central time difference."""
    _check_interior(traj, i)
    before, here, after = traj.curvatures[i - 1], traj.curvatures[i], traj.curvatures[i + 1]
    span = traj.states[i + 1].t - traj.states[i - 1].t
    dR_dt = (after.R - before.R) / span
    return dR_dt - laplacian(traj.states[i], here.R) - 2.0 * here.ric_norm**2


def integrated_scalar_curvature(state: MetricState, curv: Optional[CurvatureField] = None) -> float:
    """The total scalar curvature, the integral of R over the manifold."""
    curv = curv or curvature(state)
    return float(np.sum(region_weights(state) * curv.R))


def volume_evolution_residual(traj: FlowTrajectory, i: int) -> float:
    """|dV/dt + integral of R dmu| at snapshot ``i``."""
    _check_interior(traj, i)
    span = traj.states[i + 1].t - traj.states[i - 1].t
    dV_dt = (total_volume(traj.states[i + 1]) - total_volume(traj.states[i - 1])) / span
    return abs(dV_dt + integrated_scalar_curvature(traj.states[i], traj.curvatures[i]))


# ---------------------------------------------------------------------------
# Volume and diameter bounds on a unit window
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VolumeDiameterReport:
    """Volume and diameter comparisons over a window rescaled to unit length.

    ``tau`` is rescaled time, with the last snapshot of the window at tau = 1.
    ``status`` is ``holds``, ``violated`` or ``hypothesis-violated``.
    """

    tau: np.ndarray
    volumes: np.ndarray
    diameters: np.ndarray
    volume_lower_ok: bool
    volume_upper_ok: bool
    diameter_ok: bool
    ric_low: float
    ric_high: float
    measured_ric_min: float
    measured_ric_max: float
    hypothesis_met: bool
    status: str

    @property
    def holds(self) -> bool:
        return self.volume_lower_ok and self.volume_upper_ok and self.diameter_ok


def _window_states(traj: FlowTrajectory, window: Optional[Tuple[float, float]]) -> List[int]:
    if window is None:
        return list(range(len(traj)))
    t0, t1 = window
    if t0 < traj.t_start or t1 > traj.t_end or not t0 < t1:
        raise OutOfRangeError(f"window [{t0}, {t1}] outside [{traj.t_start}, {traj.t_end}]")
    return [i for i, s in enumerate(traj.states) if t0 <= s.t <= t1]


def _extent(state: MetricState, region: Region, reference: MetricState) -> float:
    """Length of the axial segment covered by ``region``, measured at ``state``."""
    if region.whole:
        return diameter(state)
    assert region.radius is not None
    if isinstance(state.form, RoundSphere):
        assert isinstance(reference.form, RoundSphere)
        ref_length = min(2.0 * region.radius, math.pi * math.sqrt(reference.form.c))
        return ref_length * math.sqrt(state.form.c / reference.form.c)
    assert isinstance(reference.form, Warped)
    s_ref = arclength(reference.form)
    s_c = s_ref[region.center]
    lo = np.interp(max(s_c - region.radius, 0.0), s_ref, reference.form.x)
    hi = np.interp(min(s_c + region.radius, s_ref[-1]), s_ref, reference.form.x)
    s_now = arclength(state.form)
    return float(np.interp(hi, state.form.x, s_now) - np.interp(lo, state.form.x, s_now))


def _le(lhs: np.ndarray, rhs: np.ndarray) -> bool:
    slack = INEQUALITY_ABS_SLACK + INEQUALITY_REL_SLACK * np.abs(rhs)
    return bool(np.all(lhs <= rhs + slack))


def volume_diameter_bound_check(
    traj: FlowTrajectory,
    region: Region = WHOLE_MANIFOLD,
    bounds: Optional[Tuple[float, float]] = None,
    window: Optional[Tuple[float, float]] = None,
) -> VolumeDiameterReport:
    """Check the volume and diameter evolution bounds on a window.

    The window is rescaled parabolically to unit length, so Ricci eigenvalues
    are compared with ``bounds = (ric_low, ric_high)`` after division by the
    rescaling factor Q = 1 / (t1 - t0). Volume and length ratios are scale
    free and are measured directly. With the default bounds
    ``(-(n-1), n-1)`` the checks read

        Vol(tau) >= e^{n(n-1)(tau-1)} Vol(1)
        Vol(tau) <= e^{n(n-1)(1-tau)} Vol(1)
        D(tau)   <= e^{(n-1)(1-tau)} D(1)

    The ball region is fixed in the metric at tau = 1.
    """
    n = traj.n
    ric_low, ric_high = bounds if bounds is not None else (-(n - 1.0), n - 1.0)
    if not ric_low <= ric_high:
        raise InvalidParameterError("bounds must satisfy ric_low <= ric_high")
    indices = _window_states(traj, window)
    if len(indices) < 2:
        raise OutOfRangeError("the window must contain at least two snapshots")

    states = [traj.states[i] for i in indices]
    reference = states[-1]
    t0, t1 = states[0].t, reference.t
    Q = 1.0 / (t1 - t0)
    tau = np.array([(s.t - t0) * Q for s in states])

    volumes = np.array(
        [float(np.sum(region_weights(s, region, reference=reference))) for s in states]
    )
    diameters = np.array([_extent(s, region, reference) for s in states])

    ric_min, ric_max = math.inf, -math.inf
    for i, state in zip(indices, states):
        curv = traj.curvatures[i]
        mask = _region_mask(state, region, reference)
        eigen = np.concatenate((curv.ric_radial[mask], curv.ric_sphere[mask]))
        ric_min = min(ric_min, float(np.min(eigen)) / Q)
        ric_max = max(ric_max, float(np.max(eigen)) / Q)
    hypothesis_met = ric_low <= ric_min and ric_max <= ric_high * (1.0 + INEQUALITY_REL_SLACK) + INEQUALITY_ABS_SLACK

    lower = volumes[-1] * np.exp(n * ric_low * (1.0 - tau))
    upper = volumes[-1] * np.exp(n * ric_high * (1.0 - tau))
    d_upper = diameters[-1] * np.exp(ric_high * (1.0 - tau))
    lower_ok = _le(lower, volumes)
    upper_ok = _le(volumes, upper)
    diameter_ok = _le(diameters, d_upper)

    if not hypothesis_met:
        status = "hypothesis-violated"
        logger.info(
            "Ricci bounds [%.3g, %.3g] violated on the window: measured [%.3g, %.3g]",
            ric_low,
            ric_high,
            ric_min,
            ric_max,
        )
    elif lower_ok and upper_ok and diameter_ok:
        status = "holds"
    else:
        status = "violated"
    return VolumeDiameterReport(
        tau=tau,
        volumes=volumes,
        diameters=diameters,
        volume_lower_ok=lower_ok,
        volume_upper_ok=upper_ok,
        diameter_ok=diameter_ok,
        ric_low=ric_low,
        ric_high=ric_high,
        measured_ric_min=ric_min,
        measured_ric_max=ric_max,
        hypothesis_met=hypothesis_met,
        status=status,
    )


def _region_mask(state: MetricState, region: Region, reference: MetricState) -> np.ndarray:
    if region.whole:
        samples = 1 if isinstance(state.form, RoundSphere) else len(state.form.x)
        return np.ones(samples, dtype=bool)
    weights = region_weights(state, region, reference=reference)
    mask = weights > 0
    if isinstance(state.form, Warped) and not region.whole:
        mask[region.center] = True
    return mask if np.any(mask) else np.ones_like(mask)


# ---------------------------------------------------------------------------
# Blow-up diagnostics
# ---------------------------------------------------------------------------


def curvature_maximizing_sequence(
    traj: FlowTrajectory, k: int, quantity: str = "R"
) -> List[CurvatureMaximum]:
    """Pick ``k`` snapshots realizing the running space-time maximum of ``quantity``.

    The points are spread geometrically in curvature between the first and the
    final record and always end with the final record, so Q grows towards the
    ceiling. Fewer points are returned, with a warning, when the run has fewer
    records.

    Raises:
        NotApplicableError: If the trajectory is not singular.
    """
    if not traj.singular:
        raise NotApplicableError("curvature-maximizing sequences need a singular trajectory")
    if k < 1:
        raise InvalidParameterError(f"k must be positive, got {k}")
    records = (
        list(traj.max_curvature_track)
        if quantity == "R"
        else _running_records(traj.times, traj.curvatures, quantity)
    )
    records = [r for r in records if r.value > 0]
    if not records:
        raise NotApplicableError(f"{quantity} never becomes positive on this trajectory")
    if k == 1:
        return [records[-1]]

    first, last = records[0].value, records[-1].value
    targets = first * (last / first) ** (np.arange(k) / (k - 1))
    picked: List[CurvatureMaximum] = []
    values = np.array([r.value for r in records])
    for target in targets:
        j = int(np.searchsorted(values, target * (1.0 - 1e-12)))
        j = min(j, len(records) - 1)
        if not picked or records[j].time > picked[-1].time:
            picked.append(records[j])
    if picked[-1] is not records[-1]:
        picked.append(records[-1])
    if len(picked) < k:
        logger.warning("only %d of %d curvature-maximizing points available", len(picked), k)
    return picked[-k:]


def type_one_constant(traj: FlowTrajectory) -> float:
    """sup over snapshots of max|Rm| (T_hat - t); finite for type-I blow-up.

    Raises:
        NotApplicableError: If the trajectory is not singular.
    """
    if not traj.singular or traj.T_hat is None:
        raise NotApplicableError("the type-I constant needs a singular trajectory")
    return max(
        float(np.max(curv.rm_norm)) * (traj.T_hat - state.t)
        for state, curv in zip(traj.states, traj.curvatures)
    )
