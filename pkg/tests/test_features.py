import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graysid.features import (BoundedPriors, FeatureConfig, PriorEstimates, StepFeatures,
                              aggregate_priors, apply_tuning, extract_features,
                              priors_from_features, regions_from_priors)
from graysid.lti import c2d_zoh, second_order_tf, step_response, tf_to_ss


def features(os=None, td=None, ts1=None):
    return StepFeatures(os, td, ts1, None, None, 0.0, 1.0)


def plant(k=0.7, zeta=0.2, wn=1.0, ts=0.3):
    return c2d_zoh(tf_to_ss(second_order_tf(k, zeta, wn)), ts)


class TestExtraction:
    def test_noise_free_half_period(self):
        f = extract_features(step_response(plant(ts=0.05), 60.0), FeatureConfig(window=1))
        os_true = 100 * math.exp(-0.2 * math.pi / math.sqrt(0.96))
        assert os_true == pytest.approx(52.66, abs=0.01)
        assert f.os == pytest.approx(os_true, abs=0.01)
        assert f.td == pytest.approx(2 * math.pi / math.sqrt(0.96), abs=0.01)
        assert f.td == pytest.approx(6.41, abs=0.01)

    def test_coarse_sampling_interpolation(self):
        f = extract_features(step_response(plant(ts=0.3), 60.0), FeatureConfig(window=1))
        assert f.os == pytest.approx(52.66, abs=0.1)
        assert f.td == pytest.approx(6.41, abs=0.05)

    def test_full_period_selector(self):
        cfg = FeatureConfig(window=1, selector="full")
        f = extract_features(step_response(plant(ts=0.05), 60.0), cfg)
        assert f.td == pytest.approx(6.4127, abs=0.01)

    def test_settling_time_oracle(self):
        rec = step_response(plant(ts=0.01), 60.0)
        f = extract_features(rec, FeatureConfig(window=1, final_fraction=0.01))
        yn = rec.y[:, 0] / 0.7
        outside = np.flatnonzero(np.abs(yn - 1) > 0.01)
        assert f.ts1 == pytest.approx(rec.t[outside[-1] + 1])
        # envelope bound 4.6 / (zeta wn) is an upper estimate
        assert f.ts1 < 4.6 / 0.2

    def test_pure_gain(self):
        t = np.arange(20) * 0.1
        f = extract_features((t, np.full(20, 2.0)))
        assert f.os == 0.0 and f.extrema == [] and f.ts1 == 0.0

    def test_unit_step_of_static_gain_settles_at_first_sample(self):
        t = np.arange(20) * 0.1
        y = np.where(t > 0, 2.0, 0.0)
        f = extract_features((t, y))
        assert f.os == 0.0 and f.extrema == []
        assert f.ts1 == pytest.approx(0.1)

    def test_overdamped(self):
        t = np.linspace(0, 20, 401)
        f = extract_features((t, 1 - np.exp(-t)))
        assert f.td is None
        assert f.os == 0.0
        assert f.ts1 == pytest.approx(4.6, abs=0.06)

    def test_explicit_extrema(self):
        rec = step_response(plant(ts=0.05), 60.0)
        f = extract_features(rec, FeatureConfig(window=1, extrema=[(64, "peak"), (128, "valley")],
                                                interpolate=False))
        assert f.td == pytest.approx(2 * (rec.t[128] - rec.t[64]))
        assert f.provenance["extrema_source"] == "explicit"

    def test_bad_kind(self):
        rec = step_response(plant(), 20.0)
        with pytest.raises(ValueError):
            extract_features(rec, FeatureConfig(extrema=[(3, "summit")]))

    def test_unknown_selector(self):
        with pytest.raises(ValueError):
            extract_features(step_response(plant(), 40.0), FeatureConfig(selector="quarter"))

    def test_too_short(self):
        with pytest.raises(ValueError):
            extract_features((np.zeros(1), np.zeros(1)))

    @given(st.floats(0.1, 0.6), st.floats(0.5, 3.0))
    def test_noise_free_priors_recover_wd(self, zeta, wn):
        ts = 0.02 / wn
        rec = step_response(plant(1.0, zeta, wn, ts), 30.0 / (zeta * wn))
        f = extract_features(rec, FeatureConfig(window=1, prominence=1e-3))
        pri = priors_from_features(f, exact=True)
        assert pri.wd == pytest.approx(wn * math.sqrt(1 - zeta**2), rel=2e-3)
        assert pri.zeta == pytest.approx(zeta, abs=2e-3)


class TestPriors:
    def test_overshoot_rule(self):
        assert priors_from_features(features(os=40)).zeta == pytest.approx(0.36)

    def test_period_inversion(self):
        assert priors_from_features(features(td=4.9474)).wd == pytest.approx(1.27, abs=5e-5)

    def test_settling(self):
        assert priors_from_features(features(ts1=8.33)).zeta_wn == pytest.approx(0.552, abs=5e-4)

    def test_exact_decrement(self):
        os_ = 100 * math.exp(-0.3 * math.pi / math.sqrt(1 - 0.09))
        assert priors_from_features(features(os=os_), exact=True).zeta == pytest.approx(0.3)

    def test_overshoot_too_large(self):
        with pytest.raises(ValueError):
            priors_from_features(features(os=100))

    def test_nothing_usable(self):
        with pytest.raises(ValueError):
            priors_from_features(features())

    def test_estimate_domain(self):
        with pytest.raises(ValueError):
            PriorEstimates(zeta=1.2)
        with pytest.raises(ValueError):
            PriorEstimates(wd=-1)


class TestAggregation:
    def test_single(self):
        p = PriorEstimates(0.3, 1.0, 0.5)
        mean, spread = aggregate_priors([p])
        assert (mean.zeta, mean.wd, mean.zeta_wn) == (0.3, 1.0, 0.5)
        assert spread == {"zeta": 0.0, "wd": 0.0, "zeta_wn": 0.0}

    def test_range_rule_pair(self):
        mean, spread = aggregate_priors([PriorEstimates(wd=7.17, zeta_wn=0.55),
                                         PriorEstimates(wd=10.49, zeta_wn=0.69)], rule="range")
        b = apply_tuning(mean, delta_wd=spread["wd"], delta_zeta_wn=spread["zeta_wn"])
        # 8.83 + 3.32; the reference 12.14 was computed from unrounded inputs
        assert b.wd_max == pytest.approx(12.15, abs=1e-9)
        assert b.wd_max == pytest.approx(12.14, abs=0.011)
        assert b.zeta_wn_min == pytest.approx(0.48, abs=1e-9)
        assert mean.zeta is None and spread["zeta"] is None

    def test_std_rule(self):
        _, spread = aggregate_priors([PriorEstimates(wd=1.0), PriorEstimates(wd=2.0), PriorEstimates(wd=3.0)])
        assert spread["wd"] == pytest.approx(1.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            aggregate_priors([])
        with pytest.raises(ValueError):
            aggregate_priors([PriorEstimates(wd=1.0), PriorEstimates(wd=2.0)], rule="iqr")


class TestTuning:
    def test_zero_deltas(self):
        b = apply_tuning(PriorEstimates(0.36, 1.27, 0.5))
        assert (b.zeta_min, b.wd_max, b.zeta_wn_min) == (0.36, 1.27, 0.5)

    def test_bound_violation(self):
        with pytest.raises(ValueError, match="zeta_min"):
            apply_tuning(PriorEstimates(zeta=0.36), delta_zeta=0.4)
        with pytest.raises(ValueError):
            apply_tuning(PriorEstimates(zeta_wn=0.3), delta_zeta_wn=0.3)
        with pytest.raises(ValueError):
            apply_tuning(PriorEstimates(zeta=0.3), delta_zeta=-0.1)

    def test_quarter_sampling_rule(self):
        with pytest.raises(ValueError, match="ws/4"):
            apply_tuning(PriorEstimates(wd=6.0), ts=0.3)
        assert apply_tuning(PriorEstimates(wd=5.0), ts=0.3).wd_max == 5.0

    @given(st.floats(0.05, 0.9), st.floats(0, 0.04), st.floats(0.1, 3), st.floats(0, 2))
    def test_monotone(self, z, dz, wd, dwd):
        b = apply_tuning(PriorEstimates(zeta=z, wd=wd), dz, dwd)
        assert b.zeta_min <= z and b.wd_max >= wd


class TestRegionsFromPriors:
    def test_conservative_conic(self):
        reg = regions_from_priors(BoundedPriors(0.36, 1.27, None), 0.3, overshoot="conservative", conic=True)
        assert reg.size == 4
        assert [s["kind"] for s in reg.shapes] == ["ellipse", "conic"]
        assert reg.shapes[1]["theta"] == pytest.approx(0.381)

    def test_settling_only(self):
        reg = regions_from_priors(BoundedPriors(None, None, 0.48), 0.05, settling=True)
        assert reg.shapes[0]["r"] == pytest.approx(0.976286, abs=1e-6)

    def test_no_flags(self):
        with pytest.raises(ValueError, match="no region"):
            regions_from_priors(BoundedPriors(0.36, 1.27, 0.5), 0.3)

    def test_missing_prior(self):
        with pytest.raises(ValueError):
            regions_from_priors(BoundedPriors(None, 1.0, None), 0.3, overshoot="inner")
        with pytest.raises(ValueError):
            regions_from_priors(BoundedPriors(0.3, None, None), 0.3, conic=True)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            regions_from_priors(BoundedPriors(0.3, None, None), 0.3, overshoot="hexagon")

    def test_all_flags(self):
        reg = regions_from_priors(BoundedPriors(0.3, 1.0, 0.2), 0.3, "circle", True, True, True)
        assert reg.size == 8
