"""Test the Hamilton-Ivey pinching monitor."""

import math

import numpy as np
import pytest

from ricci_lab.config import FlowConfig
from ricci_lab.constants import hamilton_ivey_check, hamilton_ivey_rhs
from ricci_lab.constants.pinching import COLUMNS
from ricci_lab.errors import NotApplicableError
from ricci_lab.flow import run_flow
from ricci_lab.geometry import make_round_sphere
from ricci_lab.profiles import dumbbell_profile


def test_rhs_values():
    """Test the right-hand side at a few exact points."""
    np.testing.assert_allclose(hamilton_ivey_rhs(np.array([-1.0, 0.0, -math.e**3]), 0.0), [-3.0, 0.0, 0.0], atol=1e-12)
    assert float(hamilton_ivey_rhs(-1.0, math.e - 1.0)) == pytest.approx(-2.0)


def test_other_dimensions_are_rejected():
    """Test n != 3 raises NotApplicableError."""
    traj = run_flow(make_round_sphere(4, 1.0), FlowConfig(t_max=0.01))
    with pytest.raises(NotApplicableError):
        hamilton_ivey_check(traj)


class TestShrinkingSphere:
    """Pinching on the round S^3."""

    @pytest.fixture(scope="class")
    def table(self, sphere_flow):
        return hamilton_ivey_check(sphere_flow)

    def test_columns(self, table, sphere_flow):
        """Test the table has one row per sample and the documented columns."""
        assert list(table.columns) == COLUMNS
        assert len(table) == sum(len(c.R) for c in sphere_flow.curvatures)

    def test_holds_everywhere(self, table):
        """Test positive curvature operators satisfy the bound trivially."""
        assert table["holds"].all()
        assert (table["rhs"] == 0.0).all()
        assert table.attrs["normalized"]

    def test_round_rows_have_no_coordinate(self, table):
        """Test x is undefined for the closed-form sphere."""
        assert table["x"].isna().all()


class TestWarpedProfile:
    """Pinching on a dumbbell."""

    @pytest.fixture(scope="class")
    def table(self):
        traj = run_flow(dumbbell_profile(3, 64), FlowConfig(t_max=0.005))
        return hamilton_ivey_check(traj)

    def test_coordinates_are_recorded(self, table):
        """Test warped rows carry their grid coordinate."""
        assert table["x"].notna().all()
        assert table["x"].min() == 0.0
        assert table["x"].max() == pytest.approx(math.pi)

    def test_rhs_vanishes_off_negative_nu(self, table):
        """Test the effective rhs is the formula where nu < 0 and zero elsewhere."""
        negative = table["nu"] < 0

        assert (table.loc[~negative, "rhs"] == 0.0).all()
        np.testing.assert_allclose(table.loc[negative, "rhs"], table.loc[negative, "rhs_as_written"])
