import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graysid.lti import DiscreteStateSpace, TransferFunction, c2d_zoh, prbs, simulate, tf_to_ss
from graysid.subspace import HankelConfig, block_hankel, pi_moesp, select_order


def random_stable(rng, n=2, radius=0.9):
    # random similarity of a real block with known complex pole pair
    r, th = radius * rng.uniform(0.5, 1.0), rng.uniform(0.2, 2.5)
    blk = r * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    t = rng.normal(size=(n, n)) + 2 * np.eye(n)
    a = t @ blk @ np.linalg.inv(t)
    return DiscreteStateSpace(a, rng.normal(size=(n, 1)), rng.normal(size=(1, n)), [[0.0]], 1.0)


class TestHankel:
    def test_scalar(self):
        np.testing.assert_array_equal(block_hankel([1, 2, 3, 4], 2, 3), [[1, 2, 3], [2, 3, 4]])

    def test_two_channels(self):
        x = np.array([[1, 10], [2, 20], [3, 30]])
        np.testing.assert_array_equal(block_hankel(x, 2, 2), [[1, 2], [10, 20], [2, 3], [20, 30]])

    def test_too_short(self):
        with pytest.raises(ValueError):
            block_hankel([1, 2, 3], 2, 3)
        with pytest.raises(ValueError):
            block_hankel([1, 2, 3], 0, 3)

    @given(st.integers(1, 6), st.integers(1, 6))
    def test_constant_antidiagonals(self, rows, cols):
        x = np.arange(rows + cols + 3.0)
        h = block_hankel(x, rows, cols)
        i, j = np.indices(h.shape)
        np.testing.assert_array_equal(h, x[i + j])


class TestSelectOrder:
    def test_gap(self):
        assert select_order([10, 9, 1e-8, 1e-9], 1e-3) == 2

    def test_override(self):
        assert select_order([10, 9, 1e-8], 1e-3, order=3) == 3

    def test_zero(self):
        assert select_order([0.0, 0.0]) == 0
        with pytest.raises(ValueError):
            select_order([])


class TestPiMoesp:
    def test_noise_free_roundtrip(self):
        rng = np.random.default_rng(4)
        true = random_stable(rng)
        u = prbs(12, 1, 2000, 1.0, seed=9)
        y = simulate(true, u).y
        res = pi_moesp(u, y, HankelConfig(10, 10, detrend=False))
        assert res.order == 2
        np.testing.assert_allclose(np.sort_complex(res.model.poles()), np.sort_complex(true.poles()), atol=1e-6)
        np.testing.assert_allclose(simulate(res.model, u, x0=res.x0).y, y, atol=1e-6)

    @settings(max_examples=10)
    @given(st.integers(0, 10_000))
    def test_roundtrip_property(self, seed):
        rng = np.random.default_rng(seed)
        true = random_stable(rng)
        u = rng.normal(size=600)
        y = simulate(true, u).y
        res = pi_moesp(u, y, HankelConfig(8, 8, order=2, detrend=False))
        np.testing.assert_allclose(np.sort_complex(res.model.poles()), np.sort_complex(true.poles()), atol=1e-6)

    def test_fourth_order_plant(self):
        plant = c2d_zoh(tf_to_ss(TransferFunction([100, 1500], [1, 11, 130, 1020, 2000])), 0.05)
        u = prbs(12, 1, 3000, 1.0, seed=1)
        y = simulate(plant, u).y
        res = pi_moesp(u, y, HankelConfig(12, 12, threshold=1e-6, detrend=False), ts=0.05)
        assert res.order == 4
        np.testing.assert_allclose(np.sort_complex(res.model.poles()), np.sort_complex(plant.poles()), atol=1e-6)
        assert res.model.ts == 0.05

    def test_two_output_channels(self):
        rng = np.random.default_rng(2)
        a = np.diag([0.8, -0.5])
        true = DiscreteStateSpace(a, [[1.0], [1.0]], [[1.0, 0.0], [0.5, 1.0]], [[0.0], [0.2]], 1.0)
        u = rng.normal(size=800)
        res = pi_moesp(u, simulate(true, u).y, HankelConfig(6, 6, order=2, detrend=False))
        np.testing.assert_allclose(np.sort(res.model.poles().real), [-0.5, 0.8], atol=1e-8)
        np.testing.assert_allclose(res.model.d, [[0.0], [0.2]], atol=1e-8)

    def test_zero_output(self):
        u = prbs(10, 1, 500, seed=1)
        with pytest.raises(ValueError, match="rank"):
            pi_moesp(u, np.zeros(500))

    def test_short_data(self):
        with pytest.raises(ValueError, match="too short"):
            pi_moesp(np.ones(30), np.ones(30))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pi_moesp(np.ones(300), np.ones(299))

    def test_bad_horizons(self):
        with pytest.raises(ValueError):
            HankelConfig(0, 5)
        with pytest.raises(ValueError):
            HankelConfig(5, 5, order=0)
