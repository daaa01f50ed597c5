"""Test the analytic constant chain and the ledger export."""

import math

import numpy as np
import pytest

from ricci_lab.constants import (
    build_ledger,
    croke_constants,
    energy_coefficient,
    interpolation_exponent,
    isoperimetric_lower_bound,
    moser_constants,
    omega_tilde_lower_bound,
    r_kappa,
    sobolev_sigma,
    tilde_volume,
)
from ricci_lab.constants.ledger import (
    cutoff_energy_bound,
    log_sinh_power_integral,
    log_sphere_measure,
    safe_exp,
    sinh_power_integral,
)
from ricci_lab.errors import InvalidParameterError, NotApplicableError
from ricci_lab.geometry import sphere_measure


def test_log_sphere_measure_matches_direct_value():
    """Test log alpha(k) against alpha(k) where both are representable."""
    for k in (1, 2, 3, 10, 50):
        assert log_sphere_measure(k) == pytest.approx(math.log(sphere_measure(k)))


def test_safe_exp_overflow():
    """Test exp of huge logs returns inf instead of raising."""
    assert safe_exp(0.0) == 1.0
    assert safe_exp(800.0) == math.inf


class TestSinhIntegrals:
    """Integrals of sinh^k over [0, X]."""

    def test_closed_forms(self):
        """Test k = 0, 1, 2 against their antiderivatives."""
        assert sinh_power_integral(0, 2.0) == pytest.approx(2.0)
        assert sinh_power_integral(1, 2.0) == pytest.approx(math.cosh(2.0) - 1.0)
        assert sinh_power_integral(2, 2.0) == pytest.approx((math.sinh(4.0) - 4.0) / 4.0)

    def test_large_argument_in_log_space(self):
        """Test the scaled branch for X > 20, where sinh^k overflows."""
        X = 60.0
        # int_0^X sinh^2 ~ e^(2X) / 8 for large X
        assert log_sinh_power_integral(2, X) == pytest.approx(2 * X - math.log(8.0), rel=1e-12)
        assert math.isfinite(log_sinh_power_integral(40, 2.0 * math.e**3))

    def test_nonpositive_upper_limit(self):
        """Test an empty interval has log integral -inf."""
        assert log_sinh_power_integral(2, 0.0) == -math.inf


class TestIsoperimetricConstants:
    """Croke constants and the visibility bound."""

    def test_croke_constants_in_two_dimensions(self):
        """Test C1(2) = pi and C2(2) = 2 pi."""
        croke = croke_constants(2)

        assert croke["C1"] == pytest.approx(math.pi)
        assert croke["C2"] == pytest.approx(2 * math.pi)

    def test_croke_c1_in_three_dimensions(self):
        """Test C1(3) = pi alpha(3) / (2 alpha(2)) = pi^2 / 4."""
        assert croke_constants(3)["C1"] == pytest.approx(math.pi**2 / 4)

    def test_omega_tilde_euclidean_limit(self):
        """Test K = 0 uses the Euclidean ball volume."""
        bound = omega_tilde_lower_bound(2.0, 1.0, 1.0, 0.0, 3)

        assert bound.value == pytest.approx(3.0 / (4.0 * math.pi))
        assert not bound.vacuous

    def test_omega_tilde_decreases_with_curvature(self):
        """Test a hyperbolic comparison volume lowers the bound."""
        flat = omega_tilde_lower_bound(2.0, 1.0, 1.0, 0.0, 3).value
        curved = omega_tilde_lower_bound(2.0, 1.0, 1.0, 1.0, 3).value

        assert 0 < curved < flat

    def test_negative_gap_is_vacuous(self):
        """Test Vol(N2) < Vol(N1) gives a vacuous zero bound."""
        bound = omega_tilde_lower_bound(1.0, 2.0, 1.0, 0.0, 3)

        assert bound.vacuous
        assert bound.value == 0.0

    def test_invalid_inputs(self):
        """Test D must be positive and K nonnegative."""
        with pytest.raises(InvalidParameterError):
            omega_tilde_lower_bound(2.0, 1.0, 0.0, 0.0, 3)
        with pytest.raises(InvalidParameterError):
            omega_tilde_lower_bound(2.0, 1.0, 1.0, -1.0, 3)

    def test_isoperimetric_lower_bound(self):
        """Test C2(n) omega^(n+1), and omega outside [0, 1]."""
        assert isoperimetric_lower_bound(1.0, 2) == pytest.approx(2 * math.pi)
        assert isoperimetric_lower_bound(0.5, 2) == pytest.approx(2 * math.pi / 8)
        with pytest.raises(InvalidParameterError):
            isoperimetric_lower_bound(1.5, 2)


class TestNonCollapsingRadius:
    """The radius r(kappa)."""

    def test_two_dimensional_closed_form(self):
        """Test cosh r - 1 = kappa / (2 alpha(1) e^4) for n = 2."""
        kappa = 0.5
        r = r_kappa(2, kappa)

        assert 2.0 * math.sinh(r / 2.0) ** 2 == pytest.approx(kappa / (4.0 * math.pi * math.e**4), rel=1e-10)

    @pytest.mark.parametrize("kappa", [1e-2, 1.0, 10.0])
    def test_three_dimensional_series(self, kappa):
        """Test (sinh 2r - 2r) / 4 = kappa / (8 pi e^12), summed as a series."""
        r = r_kappa(3, kappa)
        x = 2.0 * r
        series = sum(x ** (2 * k + 1) / math.factorial(2 * k + 1) for k in range(1, 12)) / 4.0

        assert series == pytest.approx(kappa / (8.0 * math.pi * math.e**12), rel=1e-10)

    def test_radius_increases_with_kappa(self):
        """Test r(kappa) is increasing."""
        radii = [r_kappa(4, k) for k in (1e-3, 1e-2, 1e-1, 1.0)]

        assert all(b > a for a, b in zip(radii, radii[1:]))

    def test_invalid_kappa(self):
        """Test kappa must be positive."""
        with pytest.raises(InvalidParameterError):
            r_kappa(3, 0.0)


class TestSobolevConstant:
    """sigma(n, kappa) and its scaling."""

    def test_kappa_scaling(self):
        """Test sigma scales as kappa^(-2(n+1)), a factor 1e8 per decade for n = 3."""
        ratio = math.exp(sobolev_sigma(3, 0.1).log_sigma - sobolev_sigma(3, 1.0).log_sigma)

        assert ratio == pytest.approx(1e8, rel=1e-10)

    def test_two_dimensions_not_applicable(self):
        """Test n = 2 raises NotApplicableError."""
        with pytest.raises(NotApplicableError):
            sobolev_sigma(2, 1.0)

    def test_high_dimension_overflows_to_inf(self):
        """Test an unrepresentable sigma keeps a finite logarithm."""
        constants = sobolev_sigma(6, 1e-3)

        assert math.isfinite(constants.log_sigma)
        assert constants.log_sigma > 709
        assert constants.sigma == math.inf

    def test_c4_is_c2_times_c3_power(self):
        """Test log C4 = log C2 + (n+1) log C3."""
        constants = sobolev_sigma(3, 0.5)
        C2 = croke_constants(3)["C2"]

        assert constants.log_C4 == pytest.approx(math.log(C2) + 4 * constants.log_C3)


class TestMoserConstants:
    """Lambda(beta), nu, delta_b and C_b."""

    @pytest.mark.parametrize(
        "beta, expected",
        [(2.0, 12.0), (2.5, 15.0), (5.0 / 3.0, 12.0), (1.5, 12.0), (1.1, 12.0), (4.0, 24.0)],
    )
    def test_energy_coefficient(self, beta, expected):
        """Test Lambda(beta) at representative exponents."""
        assert energy_coefficient(beta) == pytest.approx(expected)

    def test_energy_coefficient_needs_beta_above_one(self):
        """Test beta <= 1 is rejected."""
        with pytest.raises(InvalidParameterError):
            energy_coefficient(1.0)

    def test_interpolation_exponent(self):
        """Test nu = (n+2) / (2q - n - 2) and its domain."""
        assert interpolation_exponent(3, 25.0 / 6.0) == pytest.approx(5.0 / (25.0 / 3.0 - 5.0))
        with pytest.raises(NotApplicableError):
            interpolation_exponent(3, 2.5)

    def test_cutoff_energy_bound(self):
        """Test C8 = 64 e^(2B) / r^2 + 16."""
        assert cutoff_energy_bound(2.0, 0.0) == pytest.approx(32.0)

    def test_step_constants(self):
        """Test delta_b = 1/60 for sigma = 1 and beta = 5/2."""
        constants = moser_constants(3, 25.0 / 6.0, 1.0, 2.0, 1.0, 0.0, 2.5)
        C8 = 64.0 + 16.0
        C9 = (2.0 * 15.0 * C8) ** (1.0 / 2.5)

        assert constants.Lambda == 15.0
        assert constants.delta_b == pytest.approx(1.0 / 60.0)
        assert constants.C_b == pytest.approx(C9 * 61.0)

    def test_log_sigma_replaces_sigma(self):
        """Test a log sigma gives the same constants as sigma."""
        direct = moser_constants(3, 5.0, 10.0, 2.0, 1.0, 1.0, 2.5)
        via_log = moser_constants(3, 5.0, None, 2.0, 1.0, 1.0, 2.5, log_sigma=math.log(10.0))

        assert via_log.log_delta_b == pytest.approx(direct.log_delta_b)
        assert via_log.log_C_b == pytest.approx(direct.log_C_b)

    def test_invalid_sigma(self):
        """Test a missing or nonpositive sigma is rejected."""
        with pytest.raises(InvalidParameterError):
            moser_constants(3, 5.0, 0.0, 2.0, 1.0, 1.0, 2.5)


def test_tilde_volume_is_monotone():
    """Test C10 increases with r and V_tilde is at least one."""
    small, large = tilde_volume(3, 0.01), tilde_volume(3, 0.5)

    assert small["C10"] < large["C10"]
    assert small["V_tilde"] == 1.0
    assert large["V_tilde"] >= 1.0


class TestLedger:
    """The complete constant chain."""

    @pytest.fixture(scope="class")
    def ledger(self):
        return build_ledger(3, 1.0, 0.5)

    def test_entries_are_present(self, ledger):
        """Test every named constant is in the ledger."""
        expected = {
            "alpha_n",
            "alpha_n_minus_1",
            "C1",
            "C2",
            "C3",
            "C4",
            "r_kappa",
            "sigma",
            "Lambda_beta",
            "nu_exponent",
            "delta_b",
            "C_b",
            "C10",
            "V_tilde",
            "delta",
            "C_a",
            "C_eps",
        }
        assert set(ledger.entries) == expected

    def test_defaults(self, ledger):
        """Test q = (n+2)^2/(2n) and beta = (n+2)/2 by default."""
        assert ledger.inputs["q"] == pytest.approx(25.0 / 6.0)
        assert ledger.inputs["beta"] == pytest.approx(2.5)
        assert ledger["Lambda_beta"] == pytest.approx(15.0)
        assert ledger["alpha_n"] == pytest.approx(2 * math.pi**2)

    def test_small_beta_keeps_lambda_at_twelve(self):
        """Test beta below 2 records and uses Lambda = 12."""
        small = build_ledger(3, 1.0, 0.5, beta=1.5)

        assert small["Lambda_beta"] == pytest.approx(12.0)
        assert small.entries["Lambda_beta"].formula == "6 max(beta, 2)"
        assert small.log("delta_b") == pytest.approx(
            -math.log(4.0) - 0.6 * small.log("sigma") - math.log(12.0)
        )

    def test_values_agree_with_direct_computation(self, ledger):
        """Test ledger entries against the functions they come from."""
        assert ledger["r_kappa"] == pytest.approx(r_kappa(3, 1.0))
        assert ledger.log("sigma") == pytest.approx(sobolev_sigma(3, 1.0).log_sigma)
        assert ledger.log("delta") == pytest.approx(ledger.log("delta_b") - math.log(9.0 * ledger["V_tilde"]))

    def test_to_dict(self, ledger):
        """Test the export carries the format version and one row per entry."""
        data = ledger.to_dict()

        assert data["format_version"] == "1.0"
        assert data["n"] == 3
        assert len(data["entries"]) == len(ledger.entries)
        assert {"name", "value", "log_value", "formula", "inputs"} <= set(data["entries"][0])

    def test_all_logarithms_are_finite(self, ledger):
        """Test no entry has an infinite logarithm at moderate inputs."""
        assert all(np.isfinite(entry.log_value) for entry in ledger.entries.values())

    def test_two_dimensions_not_applicable(self):
        """Test the chain needs n >= 3."""
        with pytest.raises(NotApplicableError):
            build_ledger(2, 1.0, 0.5)
