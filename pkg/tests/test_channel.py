import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rislink import channel
from rislink.allocation import AllocationSchedule
from rislink.channel import (
    BOLTZMANN,
    LinkPowerTables,
    PhysParams,
    antenna_gain,
    direct_power,
    interference_sum,
    max_concurrent,
    noise_power,
    path_gain,
    ris_power,
    sinr,
)

PARAMS = PhysParams()  # 1 mW, 28 GHz, 10 degrees, 200 elements, 290 K, 20 MHz


class TestAntennaGain:
    def test_ten_degrees(self):
        assert antenna_gain(math.radians(10)) == pytest.approx(525.58, abs=0.01)

    def test_hemisphere(self):
        assert antenna_gain(math.radians(180 - 1e-9)) == pytest.approx(2.0, rel=1e-6)

    def test_sixty_degrees(self):
        assert antenna_gain(math.radians(60)) == pytest.approx(14.928, abs=1e-3)

    @given(st.floats(0.01, 3.0))
    @settings(max_examples=100)
    def test_matches_closed_form(self, theta):
        assert antenna_gain(theta) == pytest.approx(2.0 / (1.0 - math.cos(theta / 2)), rel=1e-12)

    def test_diverges_near_zero(self):
        assert antenna_gain(1e-6) > 1e10


class TestPathGain:
    def test_reference_value(self):
        assert path_gain(28e9, 10.0) == pytest.approx(8.521e-5, rel=1e-3)

    def test_inverse_distance(self):
        assert path_gain(28e9, 20.0) == pytest.approx(path_gain(28e9, 10.0) / 2, rel=1e-12)

    def test_inverse_frequency(self):
        assert path_gain(56e9, 10.0) == pytest.approx(path_gain(28e9, 10.0) / 2, rel=1e-12)

    def test_near_field_clamp(self):
        assert path_gain(28e9, 1e-6) == path_gain(28e9, channel.MIN_DISTANCE)


class TestNoisePower:
    def test_reference_value(self):
        assert noise_power(290.0, 20e6) == pytest.approx(8.008e-14, rel=1e-3)

    def test_linear_in_bandwidth(self):
        assert noise_power(290.0, 40e6) == pytest.approx(2 * noise_power(290.0, 20e6), rel=1e-12)

    def test_per_hertz_floor(self):
        assert noise_power(290.0, 1.0) == pytest.approx(4.004e-21, rel=1e-3)
        assert noise_power(290.0, 1.0) == pytest.approx(BOLTZMANN * 290.0, rel=1e-12)


class TestReceivedPowers:
    def test_direct_reference(self):
        assert direct_power(PARAMS, 10.0) == pytest.approx(7.261e-12, rel=5e-3)

    def test_inverse_square(self):
        assert direct_power(PARAMS, 20.0) == pytest.approx(direct_power(PARAMS, 10.0) / 4, rel=1e-12)

    def test_linear_in_transmit_power(self):
        # vanishing transmit power drives the received power to zero
        p = PhysParams(p_bs=1e-30)
        assert direct_power(p, 10.0) == pytest.approx(1e-27 * direct_power(PARAMS, 10.0), rel=1e-12)

    def test_ris_reference(self):
        assert ris_power(PARAMS, 10.0, 5.0) == pytest.approx(8.44e-15, rel=2e-3)

    def test_quadratic_in_elements(self):
        doubled = PhysParams(n_elements=400)
        assert ris_power(doubled, 10.0, 5.0) == pytest.approx(4 * ris_power(PARAMS, 10.0, 5.0), rel=1e-12)

    def test_symmetric_in_hops(self):
        assert ris_power(PARAMS, 7.0, 13.0) == pytest.approx(ris_power(PARAMS, 13.0, 7.0), rel=1e-12)

    @given(st.floats(0.2, 100), st.floats(0.2, 100))
    @settings(max_examples=100)
    def test_cascade_identity(self, d1, d2):
        # relayed power equals the product of the two hop powers times E^2/P_b
        lhs = ris_power(PARAMS, d1, d2)
        rhs = direct_power(PARAMS, d1) * direct_power(PARAMS, d2) * PARAMS.n_elements**2 / PARAMS.p_bs
        assert lhs == pytest.approx(rhs, rel=1e-12)

    @given(st.floats(0.01, 200), st.floats(0.01, 200))
    @settings(max_examples=100)
    def test_powers_positive_and_finite(self, d1, d2):
        for v in (direct_power(PARAMS, d1), ris_power(PARAMS, d1, d2)):
            assert v > 0
            assert math.isfinite(v)


class TestMaxConcurrent:
    def test_table_value(self):
        assert max_concurrent(200) == 10

    def test_small_counts(self):
        # 2*2*1 = 4 is not strictly below 4, so U stays 1
        assert max_concurrent(4) == 1
        assert max_concurrent(1) == 1
        assert max_concurrent(5) == 2

    @given(st.integers(1, 20000))
    @settings(max_examples=300)
    def test_matches_exhaustive_scan(self, e):
        best = 1
        for u in range(1, 200):
            if 2 * u * (u - 1) < e:
                best = u
        assert max_concurrent(e) == best


def hand_tables(n_bs=1, n_ris=0, n_robots=1, n_slots=1):
    gain = antenna_gain(PARAMS.theta)
    return LinkPowerTables(
        p_direct=np.zeros((n_slots, n_bs, n_robots)),
        p_ris=np.zeros((n_slots, n_ris, n_robots)),
        xi_bs=np.zeros((n_slots, n_bs, n_robots, n_robots)),
        xi_ris=np.zeros((n_slots, n_ris, n_robots, n_robots)),
        gain_bs=gain,
        gain_robot=gain,
        noise=noise_power(290.0, 20e6),
    )


class TestInterferenceAndSinr:
    def test_lone_robot_reference_sinr(self):
        t = hand_tables()
        t.p_direct[0, 0, 0] = direct_power(PARAMS, 10.0)
        alloc = AllocationSchedule.all_outage(1, 1)
        alloc.assign_bs(0, 0, 0)
        assert interference_sum(t, alloc, 0, 0) == 0.0
        assert sinr(t, alloc, 0, 0) == pytest.approx(2.51e7, rel=5e-3)

    def test_same_surface_robots_do_not_interfere(self):
        t = hand_tables(n_bs=0, n_ris=1, n_robots=2)
        t.p_ris[0, 0, :] = ris_power(PARAMS, 15.0, 8.0)
        t.xi_ris[0, 0, 0, 1] = 1e-9
        t.xi_ris[0, 0, 1, 0] = 1e-9
        alloc = AllocationSchedule.all_outage(2, 1)
        alloc.assign_ris(0, 0, 0)
        alloc.assign_ris(1, 0, 0)
        assert interference_sum(t, alloc, 0, 0, own_ris=0) == 0.0
        assert interference_sum(t, alloc, 1, 0, own_ris=0) == 0.0
        # without the nulling exclusion the terms do count
        assert interference_sum(t, alloc, 0, 0) == pytest.approx(1e-9)

    def test_two_robots_sharing_a_beam(self):
        # symmetric pair served by one BS, each inside the other's beam
        t = hand_tables(n_bs=1, n_ris=0, n_robots=2)
        g2 = t.gain_bs * t.gain_robot
        p = direct_power(PARAMS, 12.0)
        for r in (0, 1):
            t.p_direct[0, 0, r] = p
            t.xi_bs[0, 0, 1 - r, r] = p * g2
        alloc = AllocationSchedule.all_outage(2, 1)
        alloc.assign_bs(0, 0, 0)
        alloc.assign_bs(1, 0, 0)
        expected = p * g2 / (t.noise + p * g2)
        for r in (0, 1):
            assert interference_sum(t, alloc, r, 0) == pytest.approx(p * g2, rel=1e-12)
            assert sinr(t, alloc, r, 0) == pytest.approx(expected, rel=1e-12)
        assert sinr(t, alloc, 0, 0) < 1.0

    def test_unallocated_robot_rejected(self):
        t = hand_tables()
        alloc = AllocationSchedule.all_outage(1, 1)
        with pytest.raises(ValueError, match="unallocated"):
            sinr(t, alloc, 0, 0)

    @given(st.floats(0, 1e-6))
    @settings(max_examples=50)
    def test_sinr_monotone_in_interference(self, extra):
        t = hand_tables(n_bs=1, n_ris=0, n_robots=2)
        t.p_direct[0, 0, :] = direct_power(PARAMS, 10.0)
        t.xi_bs[0, 0, 1, 0] = 1e-9
        alloc = AllocationSchedule.all_outage(2, 1)
        alloc.assign_bs(0, 0, 0)
        alloc.assign_bs(1, 0, 0)
        base = sinr(t, alloc, 0, 0)
        t.xi_bs[0, 0, 1, 0] += extra
        assert sinr(t, alloc, 0, 0) <= base

    def test_distinct_surfaces_no_bs_no_interference(self):
        t = hand_tables(n_bs=0, n_ris=2, n_robots=2)
        t.p_ris[0, :, :] = ris_power(PARAMS, 15.0, 8.0)
        alloc = AllocationSchedule.all_outage(2, 1)
        alloc.assign_ris(0, 0, 0)
        alloc.assign_ris(1, 0, 1)
        # cone gating produced no cross terms, so the sums stay zero
        assert interference_sum(t, alloc, 0, 0, own_ris=0) == 0.0
        assert interference_sum(t, alloc, 1, 0, own_ris=1) == 0.0
