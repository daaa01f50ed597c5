"""Test space-time norms, the divergence scan and the extension verdicts."""

import math

import numpy as np
import pytest

from ricci_lab.errors import InvalidParameterError, NotApplicableError, OutOfRangeError
from ricci_lab.geometry import make_round_sphere
from ricci_lab.models import Region
from ricci_lab.norms import (
    CONCLUSION_CURVATURE_NORM,
    CONCLUSION_RICCI_LOWER_BOUND,
    NormQuery,
    alpha_threshold_scan,
    closed_form_sphere_norm,
    extension_verdict,
    holder_check,
    round_sphere_reference,
    signed_parts,
    slice_norm,
    spacetime_integral,
    spacetime_norm,
    sup_norm_track,
    time_integral,
)


def test_norm_query_validation():
    """Test unknown quantities and exponents below one are rejected."""
    with pytest.raises(InvalidParameterError):
        NormQuery(quantity="Ric")
    with pytest.raises(InvalidParameterError):
        NormQuery(alpha=0.5)
    with pytest.raises(InvalidParameterError):
        NormQuery(interval=(1.0, 0.0))
    assert NormQuery(alpha=math.inf).alpha == math.inf


def test_signed_parts():
    """Test F = F+ - F- with both parts nonnegative."""
    plus, minus = signed_parts(np.array([-2.0, 0.0, 3.0]))

    np.testing.assert_array_equal(plus, [0.0, 0.0, 3.0])
    np.testing.assert_array_equal(minus, [2.0, 0.0, 0.0])


def test_round_sphere_reference():
    """Test (V0, T) for the unit S^3."""
    V0, T = round_sphere_reference(3, 1.0)

    assert V0 == pytest.approx(2 * math.pi**2)
    assert T == pytest.approx(0.25)


class TestClosedForm:
    """The exact norm of R on the shrinking sphere."""

    def test_unit_s3_alpha_two(self):
        """Test ||R||_2 over [0, 1/4) x S^3 equals 6 pi."""
        V0, T = round_sphere_reference(3, 1.0)

        assert closed_form_sphere_norm(3, V0, T, 2.0) == pytest.approx(6 * math.pi)

    @pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0])
    def test_divergent_exponents(self, alpha):
        """Test the norm is infinite for alpha >= n/2 + 1."""
        V0, T = round_sphere_reference(3, 1.0)

        assert closed_form_sphere_norm(3, V0, T, alpha) == math.inf
        assert math.isfinite(closed_form_sphere_norm(3, V0, T, alpha, eps=1e-3))

    def test_sup_norm(self):
        """Test the sup of R up to T - eps is n / (2 eps)."""
        assert closed_form_sphere_norm(3, 1.0, 0.25, math.inf, eps=0.01) == pytest.approx(150.0)

    def test_eps_out_of_range(self):
        """Test eps must lie in [0, T)."""
        with pytest.raises(InvalidParameterError):
            closed_form_sphere_norm(3, 1.0, 0.25, 2.0, eps=0.25)


class TestTimeIntegral:
    """Quadrature over stored snapshots."""

    def test_linear_pieces(self):
        """Test the trapezoid rule is exact for linear data."""
        assert time_integral([0.0, 1.0], [0.0, 1.0], 0.0, 1.0) == pytest.approx(0.5)
        assert time_integral([0.0, 1.0], [0.0, 1.0], 0.25, 0.75) == pytest.approx(0.25)

    def test_power_law_tail(self):
        """Test the tail past the last sample extends the power law towards T."""
        times = [0.0, 0.5]
        values = [(1.0 - t) ** -0.5 for t in times]

        result = time_integral(times, values, 0.0, 0.9, T=1.0)

        assert result == pytest.approx(2.0 * (1.0 - math.sqrt(0.1)))

    def test_out_of_range(self):
        """Test intervals beyond the samples or T raise."""
        with pytest.raises(OutOfRangeError):
            time_integral([0.0, 1.0], [1.0, 1.0], 0.0, 2.0)
        with pytest.raises(OutOfRangeError):
            time_integral([0.0, 0.5], [1.0, 2.0], 0.0, 1.0, T=1.0)
        with pytest.raises(OutOfRangeError):
            time_integral([0.0, 1.0], [1.0, 1.0], -1.0, 0.5)


class TestSpacetimeNorms:
    """Norms of sampled trajectories."""

    def test_slice_norms(self):
        """Test L^2 and sup norms of R on the unit S^3."""
        state = make_round_sphere(3, 1.0)

        assert slice_norm(state, "R", 2.0) == pytest.approx(6.0 * math.sqrt(2.0) * math.pi)
        assert slice_norm(state, "R", math.inf) == pytest.approx(6.0)

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 2.5, 3.0])
    def test_matches_closed_form(self, sphere_flow, alpha):
        """Test the norm over [0, 0.2] against the closed form with eps = 0.05."""
        V0, T = round_sphere_reference(3, 1.0)
        norm = spacetime_norm(sphere_flow, NormQuery(quantity="R", alpha=alpha, interval=(0.0, 0.2)))

        assert norm == pytest.approx(closed_form_sphere_norm(3, V0, T, alpha, eps=0.05), rel=1e-8)

    def test_integral_is_the_power(self, sphere_flow):
        """Test spacetime_integral is the alpha-th power of the norm."""
        query = NormQuery(quantity="|Rm|", alpha=2.0, interval=(0.0, 0.1))

        assert spacetime_integral(sphere_flow, query) == pytest.approx(spacetime_norm(sphere_flow, query) ** 2)

    def test_space_form_relation(self, sphere_flow):
        """Test ||Rm|| = ||R|| / sqrt(3) on the shrinking S^3."""
        rm = spacetime_norm(sphere_flow, NormQuery(quantity="|Rm|", alpha=2.0, interval=(0.0, 0.2)))
        r = spacetime_norm(sphere_flow, NormQuery(quantity="R", alpha=2.0, interval=(0.0, 0.2)))

        assert rm == pytest.approx(r / math.sqrt(3.0))

    def test_ball_norm_is_smaller(self, short_sphere_flow):
        """Test a ball norm does not exceed the whole-manifold norm."""
        whole = spacetime_norm(short_sphere_flow, NormQuery(alpha=2.0))
        ball = spacetime_norm(short_sphere_flow, NormQuery(alpha=2.0, region=Region(center=0, radius=0.3)))

        assert 0 < ball < whole

    def test_sup_track(self, short_sphere_flow):
        """Test the per-snapshot sup of R equals 6 / c(t)."""
        track = sup_norm_track(short_sphere_flow)

        np.testing.assert_allclose(track, 6.0 / (1.0 - 4.0 * short_sphere_flow.times))

    def test_interval_past_the_end(self, short_sphere_flow):
        """Test a nonsingular trajectory cannot be integrated past its end."""
        with pytest.raises(OutOfRangeError):
            spacetime_norm(short_sphere_flow, NormQuery(interval=(0.0, 0.2)))

    def test_holder_inequality(self, short_sphere_flow):
        """Test ||R||_alpha <= ||R||_inf ||1||_alpha."""
        report = holder_check(short_sphere_flow, NormQuery(alpha=3.0))

        assert report.holds
        assert report.norm <= report.sup * report.measure


class TestThresholdScan:
    """Classification of the norm of R near the extinction time."""

    @pytest.fixture(scope="class")
    def scan(self, sphere_flow):
        return {r.alpha: r for r in alpha_threshold_scan(sphere_flow, "R", [2.0, 2.5, 3.0, math.inf])}

    def test_classifications(self, scan):
        """Test the three regimes around the critical exponent 5/2."""
        assert scan[2.0].classification == "finite"
        assert scan[2.5].classification == "log-divergent"
        assert scan[3.0].classification == "power-divergent"
        assert scan[math.inf].classification == "power-divergent"

    def test_exponents(self, scan):
        """Test fitted exponents 1/2 for alpha = 3 and 1 for the sup."""
        assert scan[3.0].exponent == pytest.approx(0.5, rel=0.05)
        assert scan[2.5].exponent == pytest.approx(0.0, abs=0.05)
        assert scan[math.inf].exponent == pytest.approx(1.0, rel=0.05)

    def test_finite_limit(self, scan):
        """Test the finite alpha = 2 norm converges to 6 pi."""
        assert scan[2.0].limit == pytest.approx(6 * math.pi, rel=1e-3)
        assert scan[3.0].limit == math.inf

    def test_nonsingular_trajectory(self, short_sphere_flow):
        """Test a scan needs a singular trajectory."""
        with pytest.raises(NotApplicableError):
            alpha_threshold_scan(short_sphere_flow)

    def test_short_eps_sequence(self, sphere_flow):
        """Test the eps ladder needs at least three decreasing values."""
        with pytest.raises(InvalidParameterError):
            alpha_threshold_scan(sphere_flow, eps_sequence=[1e-2, 1e-3])
        with pytest.raises(InvalidParameterError):
            alpha_threshold_scan(sphere_flow, eps_sequence=[1e-3, 1e-2, 1e-4])


class TestExtensionVerdict:
    """Hypotheses of the two extension criteria."""

    def test_smooth_run_meets_both(self, short_sphere_flow):
        """Test a run stopped before the singularity meets both criteria."""
        verdict = extension_verdict(short_sphere_flow, 2.5)

        assert verdict.A == 0.0
        assert verdict.theorem1_hypotheses_met
        assert verdict.theorem2_hypotheses_met
        assert verdict.conclusion == CONCLUSION_RICCI_LOWER_BOUND == "extendable-per-Thm1.1"
        assert verdict.consistent

    def test_subcritical_exponent(self, short_sphere_flow):
        """Test alpha below (n+2)/2 fails both criteria."""
        verdict = extension_verdict(short_sphere_flow, 2.0)

        assert verdict.conclusion == "hypotheses-fail(alpha)"
        assert "alpha" in verdict.failures["curvature-norm"]

    def test_conclusion_codes(self):
        """Test the codes reported when one criterion holds."""
        assert CONCLUSION_RICCI_LOWER_BOUND == "extendable-per-Thm1.1"
        assert CONCLUSION_CURVATURE_NORM == "extendable-per-Thm1.2"

    @pytest.mark.parametrize("alpha", [2.5, 3.0])
    def test_singular_run_fails_both(self, sphere_flow, alpha):
        """Test the singular sphere fails the norm hypotheses, consistently."""
        verdict = extension_verdict(sphere_flow, alpha)

        assert not verdict.theorem1_hypotheses_met
        assert not verdict.theorem2_hypotheses_met
        assert verdict.consistent
        assert verdict.failures["ricci-lower-bound"] == ["norm"]
        assert verdict.failures["curvature-norm"] == ["rm-norm"]
        assert not verdict.norm_status.finite
