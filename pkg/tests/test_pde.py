import math

import numpy as np
import pytest

from gksrom import Grid, GksParams, StabilityInfo, State, ValidationError, stability_info


class TestGrid:
    def test_dx_times_m_is_length(self):
        grid = Grid(256, 60.0)
        assert grid.dx * grid.num_points == 60.0

    def test_nodes(self):
        grid = Grid(4, 8.0)
        assert np.array_equal(grid.nodes(), [0.0, 2.0, 4.0, 6.0])

    @pytest.mark.parametrize("m,length", [(0, 1.0), (-3, 1.0), (4, 0.0),
                                          (4, -1.0), (4, math.inf)])
    def test_rejects_bad_inputs(self, m, length):
        with pytest.raises(ValidationError):
            Grid(m, length)


class TestParams:
    def test_rejects_nonfinite_gamma(self):
        with pytest.raises(ValidationError):
            GksParams(math.nan, Grid(8, 1.0))

    def test_rejects_negative_gamma(self):
        with pytest.raises(ValidationError):
            GksParams(-0.5, Grid(8, 1.0))


class TestState:
    def test_rejects_nonfinite_values(self):
        with pytest.raises(ValidationError):
            State(values=np.array([1.0, np.nan]), time=0.0)

    def test_rejects_negative_time(self):
        with pytest.raises(ValidationError):
            State(values=np.zeros(4), time=-1.0)


class TestStabilityInfo:
    def test_l_equals_two_pi_gives_one_unstable_mode(self):
        info = stability_info(GksParams(0.0, Grid(8, 2.0 * math.pi)))
        assert info.num_unstable == 1

    def test_l_equals_pi_gives_none(self):
        info = stability_info(GksParams(0.0, Grid(8, math.pi)))
        assert info.num_unstable == 0

    def test_reference_domain(self):
        info = stability_info(GksParams(0.0, Grid(256, 60.0)))
        assert info.num_unstable == 9
        # most unstable index is L / (2 sqrt(2) pi) ~ 6.75, i.e. wavenumber 7
        assert info.most_unstable == pytest.approx(6.7523723711782955, rel=1e-12)
        assert round(info.most_unstable) == 7

    def test_returns_dataclass(self):
        info = stability_info(GksParams(1.0, Grid(8, 10.0)))
        assert isinstance(info, StabilityInfo)
