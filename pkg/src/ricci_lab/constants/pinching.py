"""Hamilton-Ivey pinching monitor for three-dimensional flows."""

import logging
import math

import numpy as np
import pandas as pd

from ricci_lab.defaults import INEQUALITY_ABS_SLACK, INEQUALITY_REL_SLACK
from ricci_lab.errors import NotApplicableError
from ricci_lab.models import FlowTrajectory, RoundSphere

logger = logging.getLogger(__name__)

COLUMNS = ["node", "x", "t", "R", "nu", "rhs_as_written", "rhs", "holds"]


def hamilton_ivey_rhs(nu: np.ndarray, t: float) -> np.ndarray:
    """|nu| (log |nu| + log(1 + t) - 3), taken as 0 where nu = 0."""
    nu = np.asarray(nu, dtype=float)
    magnitude = np.abs(nu)
    with np.errstate(divide="ignore"):
        logs = np.log(np.where(magnitude > 0, magnitude, 1.0))
    return np.where(magnitude > 0, magnitude * (logs + math.log1p(t) - 3.0), 0.0)


def hamilton_ivey_check(traj: FlowTrajectory) -> pd.DataFrame:
    """Evaluate R >= |nu| (log |nu| + log(1 + t) - 3) at every stored sample.

    The inequality is enforced where nu < 0; where nu >= 0 the pinching
    conclusion reduces to R >= 0 and the effective rhs is 0. ``rhs_as_written``
    keeps the formula's value for reference. ``df.attrs["normalized"]``
    records whether inf nu(., 0) >= -1.

    Raises:
        NotApplicableError: If the flow is not three-dimensional.
    """
    if traj.n != 3:
        raise NotApplicableError(f"Hamilton-Ivey pinching needs n = 3, got n = {traj.n}")
    frames = []
    for state, curv in zip(traj.states, traj.curvatures):
        nu = curv.nu_min
        written = hamilton_ivey_rhs(nu, state.t)
        rhs = np.where(nu < 0, written, 0.0)
        holds = curv.R >= rhs - INEQUALITY_ABS_SLACK - INEQUALITY_REL_SLACK * np.abs(rhs)
        x = np.full(len(nu), np.nan) if isinstance(state.form, RoundSphere) else state.form.x
        frames.append(
            pd.DataFrame(
                {
                    "node": np.arange(len(nu)),
                    "x": x,
                    "t": state.t,
                    "R": curv.R,
                    "nu": nu,
                    "rhs_as_written": written,
                    "rhs": rhs,
                    "holds": holds,
                }
            )
        )
    df = pd.concat(frames, ignore_index=True)[COLUMNS]
    normalized = float(np.min(traj.curvatures[0].nu_min)) >= -1.0
    if not normalized:
        logger.info("initial data not normalized (inf nu = %.3g < -1); rescale advised", np.min(traj.curvatures[0].nu_min))
    failures = int((~df["holds"]).sum())
    if failures:
        logger.info("Hamilton-Ivey pinching fails at %d of %d samples", failures, len(df))
    df.attrs["normalized"] = normalized
    return df
