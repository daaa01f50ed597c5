"""Data models shared across ricci-lab.

All models are immutable values. Sampled fields are numpy arrays; a round
sphere is sampled by a single value per field because it is homogeneous.
"""

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional, Tuple, Union

import numpy as np

if TYPE_CHECKING:
    from ricci_lab.config import FlowConfig


@dataclass(frozen=True)
class RoundSphere:
    """Round metric g = c * g_s on S^n."""

    c: float


@dataclass(frozen=True, eq=False)
class Warped:
    """Warped metric g = phi^2 dx^2 + psi^2 g_{S^{n-1}} on a uniform grid of [0, pi]."""

    x: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @property
    def intervals(self) -> int:
        """Number of grid intervals m (the grid has m + 1 nodes)."""
        return len(self.x) - 1

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])


MetricForm = Union[RoundSphere, Warped]


@dataclass(frozen=True, eq=False)
class MetricState:
    """A time slice of a metric in one of the two supported symmetry classes."""

    n: int
    t: float
    form: MetricForm

    @property
    def is_round(self) -> bool:
        return isinstance(self.form, RoundSphere)

    @property
    def kind(self) -> str:
        return "sphere" if self.is_round else "warped"

    def at_time(self, t: float) -> "MetricState":
        """Return the same metric relabelled with time ``t``."""
        return replace(self, t=float(t))


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Sampled curvature of a metric state.

    Samples follow the nodes of a warped grid, or a single sample for a round
    sphere. ``k_radial`` and ``k_sphere`` are the two sectional curvatures the
    Ricci eigenvalues are built from.
    """

    n: int
    R: np.ndarray
    ric_radial: np.ndarray
    ric_sphere: np.ndarray
    rm_norm: np.ndarray
    nu_min: np.ndarray
    ric_inf: float
    k_radial: np.ndarray
    k_sphere: np.ndarray

    @property
    def samples(self) -> int:
        return len(self.R)

    @property
    def ric_norm(self) -> np.ndarray:
        """|Ric| at every sample (ric_sphere has multiplicity n - 1)."""
        return np.sqrt(self.ric_radial**2 + (self.n - 1) * self.ric_sphere**2)

    def quantity(self, name: str) -> np.ndarray:
        """Return the sampled field called ``name`` (one of ``defaults.QUANTITIES``)."""
        if name == "R":
            return self.R
        if name == "|R|":
            return np.abs(self.R)
        if name == "R+":
            return np.maximum(self.R, 0.0)
        if name == "R-":
            return np.maximum(-self.R, 0.0)
        if name == "|Rm|":
            return self.rm_norm
        if name == "|Ric|":
            return self.ric_norm
        raise KeyError(name)


@dataclass(frozen=True)
class BallVolumeReport:
    """Volume ratio of a geodesic ball, the quantity bounded below by non-collapsing."""

    center: int
    radius: float
    volume: float
    ratio: float
    kappa_threshold: Optional[float] = None
    clamped: bool = False
    curvature_scale_ok: bool = True
    noncollapsed: Optional[bool] = None


@dataclass(frozen=True)
class Region:
    """A geodesic ball, or the whole manifold when ``radius`` is None.

    ``center`` is a node index on warped grids; it is ignored on round spheres.
    """

    center: int = 0
    radius: Optional[float] = None

    @property
    def whole(self) -> bool:
        return self.radius is None


WHOLE_MANIFOLD = Region()


@dataclass(frozen=True)
class CurvatureMaximum:
    """Running maximum of a curvature quantity and the sample realizing it."""

    time: float
    node: int
    value: float


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    """Time-ordered snapshots of a Ricci flow with their curvature summaries."""

    states: Tuple[MetricState, ...]
    curvatures: Tuple[CurvatureField, ...]
    singular: bool = False
    T_hat: Optional[float] = None
    max_curvature_track: Tuple[CurvatureMaximum, ...] = field(default_factory=tuple)
    termination: str = "completed"
    config: Optional["FlowConfig"] = None

    @property
    def n(self) -> int:
        return self.states[0].n

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def t_start(self) -> float:
        return self.states[0].t

    @property
    def t_end(self) -> float:
        return self.states[-1].t

    @property
    def t_last(self) -> float:
        """Raw last accepted time, reported next to the extrapolated T_hat."""
        return self.t_end

    @property
    def is_round(self) -> bool:
        return self.states[0].is_round

    def __len__(self) -> int:
        return len(self.states)

