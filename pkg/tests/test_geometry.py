"""Test curvature, volumes and the pointwise Ricci inequality."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ricci_lab.errors import InvalidParameterError, InvalidProfileError, ResolutionError
from ricci_lab.geometry import (
    as_warped,
    ball_volume_ratio,
    curvature,
    diameter,
    diameter_is_exact,
    laplacian,
    make_round_sphere,
    make_warped,
    rhat_inequality_check,
    riemann_scalar_factor,
    sphere_measure,
    stable_timestep,
    total_volume,
    uniform_grid,
)
from ricci_lab.profiles import dumbbell_profile, reparametrized_round_profile, round_profile


def test_sphere_measures():
    """Test alpha(k) against the familiar values."""
    assert sphere_measure(1) == pytest.approx(2 * math.pi)
    assert sphere_measure(2) == pytest.approx(4 * math.pi)
    assert sphere_measure(3) == pytest.approx(2 * math.pi**2)
    with pytest.raises(InvalidParameterError):
        sphere_measure(0)


class TestRoundSphere:
    """Closed-form curvature of c * g_s."""

    @pytest.mark.parametrize("n", [2, 3, 4, 7])
    def test_curvature_of_unit_sphere(self, n):
        """Test R = n(n-1), Ric = (n-1) g and |Rm|^2 = 2n(n-1)."""
        curv = curvature(make_round_sphere(n, 1.0))

        assert curv.R[0] == pytest.approx(n * (n - 1))
        assert curv.ric_radial[0] == pytest.approx(n - 1)
        assert curv.ric_sphere[0] == pytest.approx(n - 1)
        assert curv.rm_norm[0] == pytest.approx(math.sqrt(2 * n * (n - 1)))
        assert curv.nu_min[0] == pytest.approx(1.0)

    def test_space_form_relation(self):
        """Test |Rm| = C(n) |R| on a round sphere."""
        for n in (3, 4, 5):
            curv = curvature(make_round_sphere(n, 2.5))
            assert curv.rm_norm[0] == pytest.approx(riemann_scalar_factor(n) * curv.R[0])

    def test_scale_factor(self):
        """Test curvature scales as 1/c and volume as c^(n/2)."""
        curv = curvature(make_round_sphere(3, 4.0))

        assert curv.R[0] == pytest.approx(6.0 / 4.0)
        assert total_volume(make_round_sphere(3, 4.0)) == pytest.approx(8.0 * 2 * math.pi**2)
        assert diameter(make_round_sphere(3, 4.0)) == pytest.approx(2 * math.pi)

    def test_invalid_scale_is_rejected(self):
        """Test that a nonpositive scale factor raises."""
        with pytest.raises(InvalidParameterError):
            make_round_sphere(3, 0.0)
        with pytest.raises(InvalidParameterError):
            make_round_sphere(1, 1.0)

    def test_unconstrained_timestep(self):
        """Round spheres have no explicit stability limit."""
        assert stable_timestep(make_round_sphere(3, 1.0), 0.5) == math.inf

    def test_timestep_without_neck(self, warped_round):
        """Test the round profile has unit diffusivity, dt = safety h^2 / 2."""
        h = warped_round.form.h

        assert stable_timestep(warped_round, 0.5) == pytest.approx(0.5 * h**2 / 2.0, rel=1e-14)

    def test_timestep_at_a_neck(self):
        """Test a neck of radius 0.1 divides the diffusive limit by 1 / 0.1^2."""
        state = dumbbell_profile(3, 64, a=0.9)
        h = state.form.h

        assert state.form.psi[32] == pytest.approx(0.1)
        assert stable_timestep(state, 0.5) == pytest.approx(0.5 * h**2 * 0.1**2 / 2.0, rel=1e-12)


class TestWarpedConstruction:
    """Profile validation at construction time."""

    def test_round_profile_is_exact(self, warped_round):
        """Test the round profile reproduces R = 6 at every node, poles included."""
        curv = curvature(warped_round)

        assert_allclose(curv.R, 6.0, rtol=1e-12)
        assert_allclose(curv.k_radial, curv.k_sphere, rtol=1e-12)
        assert_allclose(curv.rm_norm, math.sqrt(12.0), rtol=1e-12)

    def test_pole_values_are_snapped(self):
        """Test tiny pole values of psi become exactly zero."""
        x = uniform_grid(32)
        psi = np.sin(x)
        psi[-1] = 1e-15
        state = make_warped(3, psi)

        assert state.form.psi[0] == 0.0
        assert state.form.psi[-1] == 0.0

    def test_cone_point_is_rejected(self):
        """Test psi = 2 sin x fails pole regularity."""
        x = uniform_grid(32)
        with pytest.raises(InvalidProfileError, match="pole regularity"):
            make_warped(3, 2.0 * np.sin(x))

    def test_nonpositive_interior_is_rejected(self):
        """Test a profile that touches zero inside the interval."""
        x = uniform_grid(32)
        psi = np.sin(x) * np.cos(x)
        with pytest.raises(InvalidProfileError):
            make_warped(3, psi)

    def test_nonpositive_phi_is_rejected(self):
        """Test phi must be positive at every node."""
        x = uniform_grid(32)
        phi = np.ones_like(x)
        phi[10] = 0.0
        with pytest.raises(InvalidProfileError, match="phi"):
            make_warped(3, np.sin(x), phi)

    def test_coarse_grid_is_rejected(self):
        """Test fewer than 8 intervals raises ResolutionError."""
        x = uniform_grid(4)
        with pytest.raises(ResolutionError):
            make_warped(3, np.sin(x))

    def test_mismatched_lengths_are_rejected(self):
        """Test psi and phi must share a grid."""
        x = uniform_grid(16)
        with pytest.raises(InvalidProfileError):
            make_warped(3, np.sin(x), np.ones(10))


class TestWarpedCurvature:
    """Finite-difference curvature on nonconstant profiles."""

    @staticmethod
    def _error(m: int) -> float:
        curv = curvature(reparametrized_round_profile(3, m, 0.1))
        return float(np.max(np.abs(curv.R - 6.0)))

    def test_reparametrized_sphere_converges(self):
        """Test R of a reparametrized round sphere converges at second order."""
        coarse, fine = self._error(64), self._error(128)

        assert fine < 0.05
        assert coarse / fine > 3.0

    def test_fine_grid_accuracy(self):
        """Test the reparametrized sphere is accurate on a 256-interval grid."""
        assert self._error(256) < 1e-2

    def test_ricci_eigenvalues_build_scalar_curvature(self):
        """Test R = ric_radial + (n-1) ric_sphere on a generic profile."""
        state = reparametrized_round_profile(4, 64, 0.2)
        curv = curvature(state)

        assert_allclose(curv.R, curv.ric_radial + 3 * curv.ric_sphere)
        assert_allclose(curv.nu_min, np.minimum(curv.k_radial, curv.k_sphere))
        assert curv.ric_inf == pytest.approx(min(curv.ric_radial.min(), curv.ric_sphere.min()))

    def test_laplacian_of_first_eigenfunction(self):
        """Test Delta cos x = -n cos x on the unit round S^n."""
        state = round_profile(3, 256)
        f = np.cos(state.form.x)

        assert_allclose(laplacian(state, f), -3.0 * f, atol=1e-3)

    def test_laplacian_of_constant_vanishes(self, warped_round):
        """Test constants are harmonic."""
        assert_allclose(laplacian(warped_round, np.full(65, 2.0)), 0.0, atol=1e-12)

    def test_sphere_sampled_on_the_axis(self):
        """Test as_warped gives the same curvature as the round representation."""
        state = as_warped(make_round_sphere(3, 2.0), 128)

        assert state.form.intervals == 128
        assert_allclose(curvature(state).R, 3.0, rtol=1e-10)


class TestVolumesAndBalls:
    """Volume, diameter and ball volume ratios."""

    def test_warped_volume_and_diameter(self, warped_round):
        """Test the warped round sphere has volume 2 pi^2 and diameter pi."""
        assert total_volume(warped_round) == pytest.approx(2 * math.pi**2, rel=1e-10)
        assert diameter(warped_round) == pytest.approx(math.pi)
        assert diameter_is_exact(warped_round)

    def test_small_ball_is_euclidean(self):
        """Test Vol(B(p, r)) / r^3 tends to 4 pi / 3 for small r."""
        report = ball_volume_ratio(make_round_sphere(3, 1.0), 0, 0.05)

        assert report.ratio == pytest.approx(4.0 * math.pi / 3.0, rel=1e-3)
        assert not report.clamped

    def test_warped_ball_matches_round_ball(self):
        """Test the axial ball volume against the exact round value."""
        exact = ball_volume_ratio(make_round_sphere(3, 1.0), 0, 0.5)
        sampled = ball_volume_ratio(round_profile(3, 256), 0, 0.5)

        assert sampled.volume == pytest.approx(exact.volume, rel=1e-3)

    def test_large_ball_clamps(self):
        """Test a radius beyond the diameter covers the whole manifold."""
        report = ball_volume_ratio(make_round_sphere(3, 1.0), 0, 4.0)

        assert report.clamped
        assert report.volume == pytest.approx(2 * math.pi**2)

    def test_curvature_scale_and_threshold(self):
        """Test the curvature-scale flag and the kappa verdict."""
        report = ball_volume_ratio(make_round_sphere(3, 1.0), 0, 0.1, kappa_threshold=1.0)

        assert report.curvature_scale_ok
        assert report.noncollapsed
        assert not ball_volume_ratio(make_round_sphere(3, 1.0), 0, 1.0).curvature_scale_ok

    def test_invalid_radius(self, warped_round):
        """Test nonpositive radii and centers off the grid raise."""
        with pytest.raises(InvalidParameterError):
            ball_volume_ratio(warped_round, 0, 0.0)
        with pytest.raises(InvalidParameterError):
            ball_volume_ratio(warped_round, 100, 0.5)


class TestRhatInequality:
    """The pointwise bound |Ric|^2 <= Rhat^2 - 2B Rhat + nB^2."""

    def test_einstein_tuple(self):
        """Test the inequality on Ric = g."""
        report = rhat_inequality_check([1.0, 1.0, 1.0], 0.0)

        assert report.lhs == pytest.approx(3.0)
        assert report.rhs == pytest.approx(9.0)
        assert report.holds
        assert report.hypothesis_met

    def test_equality_with_one_nonzero_shifted_eigenvalue(self):
        """Test equality when all but one eigenvalue sit at -B."""
        report = rhat_inequality_check([-1.0, -1.0, 3.0], 1.0)

        assert report.lhs == pytest.approx(report.rhs)
        assert report.holds

    def test_random_admissible_tuples(self):
        """Test random tuples with every eigenvalue >= -B."""
        rng = np.random.default_rng(7)
        for _ in range(500):
            n = int(rng.integers(2, 8))
            B = float(rng.uniform(0.0, 2.0))
            assert rhat_inequality_check(-B + rng.exponential(size=n), B).holds

    def test_hypothesis_violation_is_reported(self):
        """Test an eigenvalue below -B is flagged rather than raised."""
        report = rhat_inequality_check([-2.0, 0.0, 0.0], 1.0)

        assert not report.hypothesis_met

    def test_negative_B_raises(self):
        """Test B must be nonnegative."""
        with pytest.raises(InvalidParameterError):
            rhat_inequality_check([1.0, 1.0], -0.1)
