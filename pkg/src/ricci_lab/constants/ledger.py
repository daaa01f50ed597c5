"""Named analytic constants of the non-collapsing and Sobolev estimates.

Several constants involve integrals of sinh^k over intervals of length e^(n-1)
and their high powers, so they leave the double range for n >= 4. Every
constant is therefore computed through its logarithm; the plain value is
``exp(log_value)`` and becomes inf when it is not representable.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from scipy import integrate, optimize, special

from ricci_lab.defaults import FORMAT_VERSION
from ricci_lab.errors import InvalidParameterError, NotApplicableError
from ricci_lab.geometry import sphere_measure

logger = logging.getLogger(__name__)

ROOT_RELATIVE_TOLERANCE = 1e-12


def log_sphere_measure(k: int) -> float:
    """log alpha(k), usable where alpha(k) itself underflows."""
    if k < 1:
        raise InvalidParameterError(f"sphere dimension must be >= 1, got {k}")
    return math.log(2.0) + 0.5 * (k + 1) * math.log(math.pi) - float(special.gammaln(0.5 * (k + 1)))


def safe_exp(log_value: float) -> float:
    """exp that returns inf instead of raising on overflow."""
    return math.exp(log_value) if log_value < 709.0 else math.inf


def log_sinh_power_integral(k: int, X: float) -> float:
    """log of the integral of sinh(s)^k over [0, X]."""
    if X <= 0:
        return -math.inf
    if k == 0:
        return math.log(X)
    if X <= 20.0:
        value, _ = integrate.quad(lambda s: math.sinh(s) ** k, 0.0, X, epsabs=0.0, epsrel=1e-14, limit=200)
        return math.log(value)
    # sinh(s)^k = e^{kX} ((e^{s-X} - e^{-s-X}) / 2)^k; the scaled integrand peaks at s = X
    def scaled(s: float) -> float:
        return (0.5 * (math.exp(s - X) - math.exp(-s - X))) ** k

    lower = max(0.0, X - 60.0 / k)
    value, _ = integrate.quad(scaled, lower, X, epsabs=0.0, epsrel=1e-14, limit=200)
    return k * X + math.log(value)


def sinh_power_integral(k: int, X: float) -> float:
    """Integral of sinh(s)^k over [0, X] (inf when it overflows)."""
    return safe_exp(log_sinh_power_integral(k, X))


# ---------------------------------------------------------------------------
# Isoperimetric constants
# ---------------------------------------------------------------------------


def croke_constants(n: int) -> Dict[str, float]:
    """C1(n) = pi alpha(n) / (2 alpha(n-1)) and C2(n) = 2^(n-1) alpha(n-1)^n / alpha(n)^(n-1)."""
    if n < 2:
        raise InvalidParameterError(f"dimension must be >= 2, got {n}")
    a_n, a_prev = sphere_measure(n), sphere_measure(n - 1)
    return {
        "C1": math.pi * a_n / (2.0 * a_prev),
        "C2": 2.0 ** (n - 1) * a_prev**n / a_n ** (n - 1),
    }


def log_croke_c2(n: int) -> float:
    return (n - 1) * math.log(2.0) + n * log_sphere_measure(n - 1) - (n - 1) * log_sphere_measure(n)


@dataclass(frozen=True)
class OmegaTildeBound:
    """Lower bound for the visibility ratio; ``vacuous`` when the volume gap is negative."""

    value: float
    vacuous: bool = False


def omega_tilde_lower_bound(vol_N2: float, vol_N1: float, D: float, K: float, n: int) -> OmegaTildeBound:
    """(Vol N2 - Vol N1) / (alpha(n-1) integral_0^D (sinh(K r)/K)^(n-1) dr).

    K = 0 uses the Euclidean limit r^(n-1).
    """
    if not D > 0 or K < 0 or vol_N1 < 0:
        raise InvalidParameterError("need D > 0, K >= 0 and nonnegative volumes")
    gap = vol_N2 - vol_N1
    if gap < 0:
        logger.warning("volume gap %.3g is negative; isoperimetric bound is vacuous", gap)
        return OmegaTildeBound(value=0.0, vacuous=True)
    if gap == 0:
        return OmegaTildeBound(value=0.0)
    if K == 0:
        log_integral = n * math.log(D) - math.log(n)
    else:
        log_integral = log_sinh_power_integral(n - 1, K * D) - n * math.log(K)
    log_denominator = log_sphere_measure(n - 1) + log_integral
    return OmegaTildeBound(value=safe_exp(math.log(gap) - log_denominator))


def isoperimetric_lower_bound(omega_tilde: float, n: int) -> float:
    """C2(n) omega^(n+1), the lower bound for Area(dN)^n / Vol(N)^(n-1)."""
    if not 0 <= omega_tilde <= 1:
        raise InvalidParameterError(f"omega must lie in [0, 1], got {omega_tilde}")
    return croke_constants(n)["C2"] * omega_tilde ** (n + 1)


# ---------------------------------------------------------------------------
# Non-collapsing radius and Sobolev constant
# ---------------------------------------------------------------------------


def _r_kappa_log_target(n: int, kappa: float) -> float:
    return math.log(kappa) - math.log(2.0) - log_sphere_measure(n - 1) - 2.0 * n * (n - 1)


def r_kappa(n: int, kappa: float) -> float:
    """Radius r with integral_0^r sinh(s)^(n-1) ds = kappa / (2 alpha(n-1) e^(2n(n-1))).

    Bracketed root finding on the log of the strictly increasing integral,
    then Newton polishing.
    """
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    if n < 2:
        raise InvalidParameterError(f"dimension must be >= 2, got {n}")
    log_target = _r_kappa_log_target(n, kappa)

    def residual(r: float) -> float:
        return log_sinh_power_integral(n - 1, r) - log_target

    # small-r expansion: integral ~ r^n / n
    guess = math.exp((log_target + math.log(n)) / n)
    lo, hi = 0.5 * guess, 2.0 * guess
    while residual(lo) > 0:
        lo *= 0.5
    while residual(hi) < 0:
        hi *= 2.0
    r = optimize.brentq(residual, lo, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps)
    for _ in range(3):
        # d/dr log F = sinh^(n-1)(r) / F
        step = residual(r) / math.exp((n - 1) * math.log(math.sinh(r)) - log_sinh_power_integral(n - 1, r))
        r -= step
        if abs(step) <= ROOT_RELATIVE_TOLERANCE * r:
            break
    return r


@dataclass(frozen=True)
class SobolevConstants:
    """C3(n, kappa), C4(n, kappa) and sigma(n, kappa) with their logarithms."""

    n: int
    kappa: float
    log_C3: float
    log_C4: float
    log_sigma: float

    @property
    def C3(self) -> float:
        return safe_exp(self.log_C3)

    @property
    def C4(self) -> float:
        return safe_exp(self.log_C4)

    @property
    def sigma(self) -> float:
        return safe_exp(self.log_sigma)


def sobolev_sigma(n: int, kappa: float) -> SobolevConstants:
    """Uniform Sobolev constant of B(p, r(kappa)) on every slice of a normalized window.

    Raises:
        NotApplicableError: For n = 2, where the Sobolev exponent degenerates.
    """
    if n == 2:
        raise NotApplicableError("the Sobolev constant needs n >= 3")
    if n < 2:
        raise InvalidParameterError(f"dimension must be >= 3, got {n}")
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    log_C3 = (
        math.log(kappa)
        - n * (n - 1)
        - math.log(2.0)
        - log_sphere_measure(n - 1)
        - log_sinh_power_integral(n - 1, 2.0 * math.exp(n - 1))
    )
    log_C4 = log_croke_c2(n) + (n + 1) * log_C3
    log_sigma = 2.0 * (math.log(2.0 * (n - 1)) - log_C4 - math.log(n - 2))
    return SobolevConstants(n=n, kappa=kappa, log_C3=log_C3, log_C4=log_C4, log_sigma=log_sigma)


# ---------------------------------------------------------------------------
# Moser iteration constants
# ---------------------------------------------------------------------------


def energy_coefficient(beta: float) -> float:
    """Lambda(beta) = 6 max(beta, 2)."""
    if not beta > 1:
        raise InvalidParameterError(f"beta must exceed 1, got {beta}")
    return 6.0 * max(beta, 2.0)


def interpolation_exponent(n: int, q: float) -> float:
    """nu = (n+2) / (2q - n - 2).

    Raises:
        NotApplicableError: If q <= (n+2)/2, where nu is undefined.
    """
    if not q > 0.5 * (n + 2):
        raise NotApplicableError(f"nu needs q > (n+2)/2 = {0.5 * (n + 2)}, got {q}")
    return (n + 2.0) / (2.0 * q - n - 2.0)


def cutoff_energy_bound(r: float, B: float) -> float:
    """C8(r, B) = 64 e^(2B) / r^2 + 16, bounding |grad eta_1|^2 + 2 eta_1 |d_t eta_1|."""
    return 64.0 * math.exp(2.0 * B) / (r * r) + 16.0


@dataclass(frozen=True)
class MoserConstants:
    """Lambda(beta), nu, delta_b and C_b of the critical-exponent iteration step."""

    Lambda: float
    nu: float
    log_delta_b: float
    log_C_b: float

    @property
    def delta_b(self) -> float:
        return safe_exp(self.log_delta_b)

    @property
    def C_b(self) -> float:
        return safe_exp(self.log_C_b)


def _log_sigma_argument(sigma: Optional[float], log_sigma: Optional[float]) -> float:
    if log_sigma is not None:
        return log_sigma
    if sigma is None or not sigma > 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    return math.log(sigma)


def _log_delta_b(n: int, log_sigma: float, Lambda: float) -> float:
    return -math.log(4.0) - n / (n + 2.0) * log_sigma - math.log(Lambda)


def _log_C_b(n: int, log_sigma: float, Lambda: float, r: float, B: float, beta: float) -> float:
    log_s = n / (n + 2.0) * log_sigma
    log_C9 = (math.log(2.0) + log_s + math.log(Lambda) + math.log(cutoff_energy_bound(r, B))) / beta
    # log(4 sigma^s Lambda + 1)
    log_l = float(np.logaddexp(math.log(4.0) + log_s + math.log(Lambda), 0.0))
    return log_C9 + log_l


def moser_constants(
    n: int,
    q: float,
    sigma: Optional[float],
    C0: float,
    r: float,
    B: float,
    beta: float,
    log_sigma: Optional[float] = None,
) -> MoserConstants:
    """Constants of one iteration step; ``log_sigma`` may replace an overflowing sigma."""
    if not (r > 0 and B >= 0 and C0 > 0):
        raise InvalidParameterError("need r > 0, B >= 0 and C0 > 0")
    ls = _log_sigma_argument(sigma, log_sigma)
    Lambda = energy_coefficient(beta)
    return MoserConstants(
        Lambda=Lambda,
        nu=interpolation_exponent(n, q),
        log_delta_b=_log_delta_b(n, ls, Lambda),
        log_C_b=_log_C_b(n, ls, Lambda, r, B, beta),
    )


def tilde_volume(n: int, r: float) -> Dict[str, float]:
    """C10(n, r) = alpha(n-1) integral_0^(e^(n-1) r) sinh^(n-1), and V_tilde = max(C10, 1)."""
    if not r > 0:
        raise InvalidParameterError(f"radius must be positive, got {r}")
    C10 = safe_exp(log_sphere_measure(n - 1) + log_sinh_power_integral(n - 1, math.exp(n - 1) * r))
    return {"C10": C10, "V_tilde": max(C10, 1.0)}


# ---------------------------------------------------------------------------
# Ledger
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerEntry:
    name: str
    log_value: float
    formula: str
    inputs: Dict[str, Any] = field(default_factory=dict)

    @property
    def value(self) -> float:
        return safe_exp(self.log_value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "log_value": self.log_value,
            "formula": self.formula,
            "inputs": dict(self.inputs),
        }


@dataclass(frozen=True)
class ConstantLedger:
    """Every named constant for one set of inputs, with its formula."""

    n: int
    inputs: Dict[str, Any]
    entries: Dict[str, LedgerEntry]

    def __getitem__(self, name: str) -> float:
        return self.entries[name].value

    def log(self, name: str) -> float:
        return self.entries[name].log_value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "n": self.n,
            "inputs": dict(self.inputs),
            "entries": [entry.to_dict() for entry in self.entries.values()],
        }


def build_ledger(
    n: int,
    kappa: float,
    r: float,
    q: Optional[float] = None,
    beta: Optional[float] = None,
    B: float = 1.0,
    C0: Optional[float] = None,
) -> ConstantLedger:
    """Evaluate the whole constant chain for dimension ``n`` (n >= 3).

    Defaults follow the scalar-curvature estimate: q = (n+2)^2 / (2n),
    beta = (n+2)/2 and C0 = (3 C_b + 1) delta_b + 1.
    """
    from ricci_lab.constants.moser import log_moser_ladder_constant

    q = (n + 2) ** 2 / (2.0 * n) if q is None else q
    beta = 0.5 * (n + 2) if beta is None else beta
    croke = croke_constants(n)
    sob = sobolev_sigma(n, kappa)
    Lambda = energy_coefficient(beta)
    nu = interpolation_exponent(n, q)
    log_delta_b = _log_delta_b(n, sob.log_sigma, Lambda)
    log_C_b = _log_C_b(n, sob.log_sigma, Lambda, r, B, beta)
    if C0 is None:
        C0 = (3.0 * safe_exp(log_C_b) + 1.0) * safe_exp(log_delta_b) + 1.0
    volumes = tilde_volume(n, r)
    log_V = math.log(volumes["V_tilde"])
    log_delta = log_delta_b - math.log(3.0 * n) - log_V
    log_C_a = log_moser_ladder_constant(n, q, C0, r, B, log_sigma=sob.log_sigma)
    log_C_eps = (
        math.log(3.0 * n)
        + float(np.logaddexp(log_C_b, 0.0))
        + log_C_a
        + (n + 4.0) / (n + 2.0) * log_V
    )
    r_k = r_kappa(n, kappa)

    rows: List[LedgerEntry] = [
        LedgerEntry("alpha_n", log_sphere_measure(n), "2 pi^((n+1)/2) / Gamma((n+1)/2)", {"n": n}),
        LedgerEntry("alpha_n_minus_1", log_sphere_measure(n - 1), "alpha(n-1)", {"n": n}),
        LedgerEntry("C1", math.log(croke["C1"]), "pi alpha(n) / (2 alpha(n-1))", {"n": n}),
        LedgerEntry("C2", log_croke_c2(n), "2^(n-1) alpha(n-1)^n / alpha(n)^(n-1)", {"n": n}),
        LedgerEntry(
            "C3",
            sob.log_C3,
            "kappa e^(-n(n-1)) / (2 alpha(n-1) int_0^(2 e^(n-1)) sinh^(n-1))",
            {"n": n, "kappa": kappa},
        ),
        LedgerEntry("C4", sob.log_C4, "C2 C3^(n+1)", {"n": n, "kappa": kappa}),
        LedgerEntry(
            "r_kappa",
            math.log(r_k),
            "int_0^r sinh^(n-1) = kappa / (2 alpha(n-1) e^(2n(n-1)))",
            {"n": n, "kappa": kappa},
        ),
        LedgerEntry("sigma", sob.log_sigma, "(2(n-1) / (C4 (n-2)))^2", {"n": n, "kappa": kappa}),
        LedgerEntry("Lambda_beta", math.log(Lambda), "6 max(beta, 2)", {"beta": beta}),
        LedgerEntry("nu_exponent", math.log(nu), "(n+2) / (2q - n - 2)", {"n": n, "q": q}),
        LedgerEntry(
            "delta_b", log_delta_b, "1 / (4 sigma^(n/(n+2)) Lambda(beta))", {"n": n, "beta": beta}
        ),
        LedgerEntry(
            "C_b",
            log_C_b,
            "(2 sigma^(n/(n+2)) Lambda C8)^(1/beta) (4 sigma^(n/(n+2)) Lambda + 1)",
            {"n": n, "r": r, "B": B, "beta": beta},
        ),
        LedgerEntry(
            "C10",
            math.log(volumes["C10"]) if volumes["C10"] > 0 else -math.inf,
            "alpha(n-1) int_0^(e^(n-1) r) sinh^(n-1)",
            {"n": n, "r": r},
        ),
        LedgerEntry("V_tilde", log_V, "max(C10, 1)", {"n": n, "r": r}),
        LedgerEntry("delta", log_delta, "delta_b / (3 n V_tilde)", {"n": n, "r": r}),
        LedgerEntry("C_a", log_C_a, "product of Moser rung factors", {"n": n, "q": q, "C0": C0, "r": r, "B": B}),
        LedgerEntry(
            "C_eps",
            log_C_eps,
            "3 n (C_b + 1) C_a V_tilde^((n+4)/(n+2))",
            {"n": n, "r": r},
        ),
    ]
    for row in rows:
        if not math.isfinite(row.log_value):
            logger.warning("ledger entry %s has non-finite logarithm %r", row.name, row.log_value)
    return ConstantLedger(
        n=n,
        inputs={"kappa": kappa, "r": r, "q": q, "beta": beta, "B": B, "C0": C0},
        entries={row.name: row for row in rows},
    )
