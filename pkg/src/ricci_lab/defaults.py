"""Numerical tolerances and defaults shared across ricci-lab.

Values here are the single source for every tolerance the library applies;
modules import them rather than repeating literals.
"""

from typing import List

# Smallest grid (number of intervals) on which the poles are resolved
MIN_GRID_INTERVALS: int = 8

# Pole regularity tolerance is max(POLE_TOLERANCE_FLOOR, POLE_TOLERANCE_FACTOR * h**2)
POLE_TOLERANCE_FLOOR: float = 1e-6
POLE_TOLERANCE_FACTOR: float = 10.0

# Pole values of psi smaller than this (relative to max psi) are snapped to zero
POLE_SNAP_RELATIVE: float = 1e-12

# Inequality checks accept lhs <= rhs + ABS_SLACK + REL_SLACK * |rhs|
INEQUALITY_ABS_SLACK: float = 1e-12
INEQUALITY_REL_SLACK: float = 1e-9

# Interior psi below this multiple of machine epsilon signals a pinch
PINCH_EPS_FACTOR: float = 10.0

# Step-size collapse threshold for the adaptive integrator
DT_COLLAPSE: float = 1e-14

# Default number of intervals when a round sphere is sampled on the axis
SPHERE_AXIAL_INTERVALS: int = 1024

# Divergence classification thresholds
POWER_EXPONENT_THRESHOLD: float = 0.05
CAUCHY_RELATIVE_TOLERANCE: float = 1e-3

# Default epsilon ladder exponents, eps_k = span * 4**(-k)
DEFAULT_EPS_EXPONENTS: List[int] = list(range(2, 11))

# Format version written into every manifest and report
FORMAT_VERSION: str = "1.0"

# Quantities understood by the norm machinery
QUANTITIES: List[str] = ["R", "|R|", "R+", "R-", "|Rm|", "|Ric|"]

# Intervals used when a round-sphere snapshot is written as a profile file
SNAPSHOT_SPHERE_INTERVALS: int = 64
