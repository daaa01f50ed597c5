"""Acceptance suites run by ``ricci-lab verify``.

Each suite builds its own inputs, runs the library and returns one
``CheckResult`` per assertion. Suites never raise on a failed comparison;
the CLI turns any failed check into a nonzero exit code.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List

import numpy as np
from scipy import special

from ricci_lab.config import FlowConfig
from ricci_lab.constants.ledger import (
    croke_constants,
    energy_coefficient,
    log_sinh_power_integral,
    log_sphere_measure,
    moser_constants,
    r_kappa,
    sobolev_sigma,
)
from ricci_lab.constants.moser import (
    epsilon_regularity_check,
    moser_domains,
    moser_iteration_trace,
    scalar_curvature_problem,
)
from ricci_lab.constants.pinching import hamilton_ivey_check
from ricci_lab.flow import (
    run_flow,
    scalar_evolution_residual,
    volume_evolution_residual,
)
from ricci_lab.geometry import ball_volume_ratio, make_round_sphere, rhat_inequality_check
from ricci_lab.models import FlowTrajectory, Region
from ricci_lab.norms import (
    NormQuery,
    alpha_threshold_scan,
    closed_form_sphere_norm,
    extension_verdict,
    round_sphere_reference,
    spacetime_norm,
)
from ricci_lab.profiles import flat_cap_profile, reparametrized_round_profile
from ricci_lab.rescaling import RescaleSpec, blowup_sequence, critical_integral_invariance, parabolic_rescale

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    name: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, suite: str, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckResult(suite=suite, name=name, passed=bool(passed), detail=detail))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


@lru_cache(maxsize=1)
def unit_sphere_flow() -> FlowTrajectory:
    """Unit S^3 flowed to the curvature ceiling; shared by several suites."""
    return run_flow(make_round_sphere(3, 1.0))


@lru_cache(maxsize=1)
def unit_sphere_window() -> FlowTrajectory:
    """Unit S^3 on [0, 0.05], rescaled by Q = 20 to the unit window."""
    traj = run_flow(make_round_sphere(3, 1.0), FlowConfig(t_max=0.05))
    return parabolic_rescale(traj, RescaleSpec(Q=20.0), (0.0, 1.0))


@lru_cache(maxsize=1)
def near_flat_window() -> FlowTrajectory:
    """Flat-capped warped S^3 on [0, 0.05], rescaled by Q = 20 to the unit window."""
    traj = run_flow(flat_cap_profile(3, 512, 0.1), FlowConfig(t_max=0.05, output_stride=10))
    return parabolic_rescale(traj, RescaleSpec(Q=20.0), (0.0, 1.0))


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def sphere_closed_form(report: SuiteReport, seed: int = 0) -> None:
    suite = "sphere-closed-form"
    traj = unit_sphere_flow()
    path_error = max(abs(s.form.c - (1.0 - 4.0 * s.t)) for s in traj.states)
    report.add(suite, "exact path c(t) = 1 - 4t", path_error <= 1e-12, f"max error {path_error:.2e}")
    assert traj.T_hat is not None
    report.add(
        suite,
        "T_hat = 1/4",
        traj.singular and abs(traj.T_hat - 0.25) <= 1e-6,
        f"T_hat = {traj.T_hat:.12g}, singular = {traj.singular}",
    )
    norm = spacetime_norm(traj, NormQuery(quantity="R", alpha=2.0, interval=(0.0, 0.25 - 1e-6)))
    report.add(suite, "||R||_2 = 6 pi", _rel(norm, 6.0 * math.pi) <= 5e-3, f"{norm:.8g}")
    V0, T = round_sphere_reference(3, 1.0)
    exact = closed_form_sphere_norm(3, V0, T, 2.0, eps=1e-6)
    report.add(suite, "closed form agrees", _rel(norm, exact) <= 5e-3, f"closed form {exact:.8g}")


def threshold(report: SuiteReport, seed: int = 0) -> None:
    suite = "threshold"
    results = {r.alpha: r for r in alpha_threshold_scan(unit_sphere_flow(), "R", [2.0, 2.5, 3.0])}
    expected = {2.0: "finite", 2.5: "log-divergent", 3.0: "power-divergent"}
    for alpha, label in expected.items():
        got = results[alpha]
        report.add(
            suite,
            f"alpha = {alpha:g} is {label}",
            got.classification == label,
            f"{got.classification}, exponent {got.exponent:.4f}",
        )
    exponent = results[3.0].exponent
    report.add(suite, "alpha = 3 exponent 1/2", _rel(exponent, 0.5) <= 0.05, f"{exponent:.4f}")


def scale_invariance(report: SuiteReport, seed: int = 0) -> None:
    suite = "scale-invariance"
    traj = unit_sphere_flow()
    for Q in (1e-3, 1e3):
        spec = RescaleSpec(Q=Q)
        critical = critical_integral_invariance(traj, spec, window=(0.0, 0.2))
        report.add(
            suite,
            f"critical integral invariant, Q = {Q:g}",
            critical.relative_diff <= 1e-10,
            f"relative difference {critical.relative_diff:.2e}",
        )
        off = critical_integral_invariance(traj, spec, window=(0.0, 0.2), alpha=2.0)
        mismatch = _rel(off.ratio, off.predicted_ratio)
        report.add(
            suite,
            f"alpha = 2 scales as Q^(1/2), Q = {Q:g}",
            mismatch <= 1e-8,
            f"ratio {off.ratio:.10g} vs {off.predicted_ratio:.10g}",
        )


def _residual_at(traj: FlowTrajectory, t: float) -> tuple:
    i = int(np.argmin(np.abs(traj.times - t)))
    i = min(max(i, 1), len(traj) - 2)
    scalar = float(np.max(np.abs(scalar_evolution_residual(traj, i)[1:-1])))
    return scalar, volume_evolution_residual(traj, i)


def evolution_identities(report: SuiteReport, seed: int = 0) -> None:
    suite = "evolution-identities"
    # truncation error of the time difference is O(dt^2)
    sphere = run_flow(make_round_sphere(3, 1.0), FlowConfig(t_max=0.1, dt_initial=1e-5))
    scalar, volume = _residual_at(sphere, 0.05)
    report.add(suite, "exact sphere residuals", scalar <= 1e-6 and volume <= 1e-6, f"{scalar:.2e}, {volume:.2e}")

    errors = []
    for m in (64, 128, 256):
        traj = run_flow(reparametrized_round_profile(3, m, 0.1), FlowConfig(t_max=0.01))
        errors.append(_residual_at(traj, 0.005))
    for k, label in enumerate(("scalar", "volume")):
        values = [e[k] for e in errors]
        orders = [math.log2(values[j] / values[j + 1]) for j in range(2)]
        report.add(
            suite,
            f"{label} residual order >= 1.8",
            min(orders) >= 1.8,
            "orders " + ", ".join(f"{o:.2f}" for o in orders),
        )


def space_form_relation(report: SuiteReport, seed: int = 0) -> None:
    suite = "space-form-relation"
    traj = unit_sphere_flow()
    for alpha in (1.0, 2.0, 2.5):
        rm = spacetime_norm(traj, NormQuery(quantity="|Rm|", alpha=alpha, interval=(0.0, 0.2)))
        r = spacetime_norm(traj, NormQuery(quantity="R", alpha=alpha, interval=(0.0, 0.2)))
        mismatch = _rel(rm, r / math.sqrt(3.0))
        report.add(suite, f"||Rm|| = ||R|| / sqrt 3, alpha = {alpha:g}", mismatch <= 1e-8, f"{mismatch:.2e}")


def constant_chain(report: SuiteReport, seed: int = 0) -> None:
    suite = "constant-chain"
    croke = croke_constants(2)
    report.add(suite, "C1(2) = pi", _rel(croke["C1"], math.pi) <= 1e-12, f"{croke['C1']:.15g}")
    report.add(suite, "C2(2) = 2 pi", _rel(croke["C2"], 2.0 * math.pi) <= 1e-12, f"{croke['C2']:.15g}")

    kappa = 1e-2
    r = r_kappa(3, kappa)
    log_target = math.log(kappa) - math.log(2.0) - log_sphere_measure(2) - 12.0
    residual = abs(math.expm1(log_sinh_power_integral(2, r) - log_target))
    report.add(suite, "r(kappa) root residual", residual <= 1e-12, f"{residual:.2e}")

    ratio = math.exp(sobolev_sigma(3, 1e-3).log_sigma - sobolev_sigma(3, 1e-2).log_sigma)
    report.add(suite, "sigma ~ kappa^(-2(n+1))", _rel(ratio, 1e8) <= 1e-10, f"ratio {ratio:.12g}")

    report.add(suite, "Lambda(2) = 12", energy_coefficient(2.0) == 12.0, f"{energy_coefficient(2.0)}")
    sigma = 10.0
    delta_b = moser_constants(3, 25.0 / 6.0, sigma, 1.0, 1.0, 0.0, 2.0).delta_b
    expected = 1.0 / (4.0 * sigma ** 0.6 * 12.0)
    report.add(suite, "delta_b recomputed", _rel(delta_b, expected) <= 1e-12, f"{delta_b:.15g}")
    alpha_3 = math.exp(log_sphere_measure(3))
    gamma_form = 2.0 * math.pi**2 / float(special.gamma(2.0))
    report.add(suite, "alpha(3) = 2 pi^2", _rel(alpha_3, gamma_form) <= 1e-12, f"{alpha_3:.15g}")


def pointwise_inequality(report: SuiteReport, seed: int = 0) -> None:
    suite = "pointwise-inequality"
    rng = np.random.default_rng(seed)
    failures = 0
    draws = 10_000
    for _ in range(draws):
        n = int(rng.integers(2, 8))
        B = float(rng.uniform(0.0, 2.0))
        eigenvalues = -B + rng.exponential(1.0, size=n)
        if not rhat_inequality_check(eigenvalues, B).holds:
            failures += 1
    report.add(suite, "|Ric|^2 <= Rhat^2 - 2B Rhat + nB^2", failures == 0, f"{failures} of {draws} failed")


def moser_ladder(report: SuiteReport, seed: int = 0) -> None:
    suite = "moser-ladder"
    window = unit_sphere_window()
    domains = moser_domains(r=1.0, k_max=12)
    trace = moser_iteration_trace(window, domains, scalar_curvature_problem(window, domains, B=0.0))
    report.add(suite, "measured <= predicted at every rung", trace.holds, f"{len(trace.rungs)} rungs")
    report.add(
        suite,
        "lambda^k norm approaches the sup on D'",
        trace.sup_relative_gap <= 0.02,
        f"gap {trace.sup_relative_gap:.4f}",
    )


def epsilon_regularity(report: SuiteReport, seed: int = 0) -> None:
    suite = "epsilon-regularity"
    flat = epsilon_regularity_check(near_flat_window(), Region(center=0, radius=0.1), B=1e-4, sigma=1.0)
    report.add(
        suite,
        "near-flat window: gate met and bound holds",
        flat.applicable and bool(flat.holds),
        f"norm {flat.norm_in:.3g} vs delta {flat.delta:.3g}, sup {flat.sup_out:.3g}",
    )
    element = blowup_sequence(unit_sphere_flow(), 3)[-1]
    sphere = epsilon_regularity_check(element.trajectory, Region(center=0, radius=1.0), B=0.0)
    report.add(
        suite,
        "sphere blow-up window: gate fails",
        not sphere.applicable and "gate" in sphere.reasons,
        f"reasons {sphere.reasons}",
    )


def hamilton_ivey(report: SuiteReport, seed: int = 0) -> None:
    suite = "hamilton-ivey"
    df = hamilton_ivey_check(unit_sphere_flow())
    report.add(
        suite,
        "pinching holds on the unit S^3 flow",
        bool(df["holds"].all()) and bool(df.attrs["normalized"]),
        f"{int((~df['holds']).sum())} of {len(df)} samples fail",
    )


def non_collapsing(report: SuiteReport, seed: int = 0) -> None:
    suite = "non-collapsing"
    ratio = ball_volume_ratio(make_round_sphere(3, 1.0), 0, 0.05).ratio
    euclid = 4.0 * math.pi / 3.0
    report.add(suite, "small ball ratio ~ 4 pi / 3", _rel(ratio, euclid) <= 0.02, f"{ratio:.6g}")
    kappas = [element.kappa for element in blowup_sequence(unit_sphere_flow(), 5)]
    report.add(
        suite,
        "kappa bounded below along the blow-up sequence",
        bool(kappas) and min(kappas) > 0 and min(kappas) >= 0.5 * max(kappas),
        "kappa " + ", ".join(f"{k:.4g}" for k in kappas),
    )


def extension_consistency(report: SuiteReport, seed: int = 0) -> None:
    suite = "extension-consistency"
    traj = unit_sphere_flow()
    for alpha in (2.5, 3.0):
        verdict = extension_verdict(traj, alpha)
        report.add(
            suite,
            f"singular run fails both criteria, alpha = {alpha:g}",
            verdict.consistent and not verdict.theorem1_hypotheses_met and not verdict.theorem2_hypotheses_met,
            verdict.conclusion,
        )


SUITES: Dict[str, Callable[[SuiteReport, int], None]] = {
    "sphere-closed-form": sphere_closed_form,
    "threshold": threshold,
    "scale-invariance": scale_invariance,
    "evolution-identities": evolution_identities,
    "space-form-relation": space_form_relation,
    "constant-chain": constant_chain,
    "pointwise-inequality": pointwise_inequality,
    "moser-ladder": moser_ladder,
    "epsilon-regularity": epsilon_regularity,
    "hamilton-ivey": hamilton_ivey,
    "non-collapsing": non_collapsing,
    "extension-consistency": extension_consistency,
}


def suite_names() -> List[str]:
    return [*SUITES, "all"]


def run_suite(name: str, seed: int = 0) -> SuiteReport:
    """Run the named suite, or every suite for ``all``.

    Raises:
        KeyError: If the suite name is unknown.
    """
    if name != "all" and name not in SUITES:
        raise KeyError(name)
    report = SuiteReport(name=name)
    for suite_name in SUITES if name == "all" else [name]:
        logger.info("running suite %s", suite_name)
        SUITES[suite_name](report, seed)
    return report
