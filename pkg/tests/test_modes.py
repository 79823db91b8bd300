import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopamc.modes import (AmcMode, ModeSet, db_to_linear, linear_to_db,
                           per_instantaneous, validate_mode_set)


class TestPerInstantaneous:
    def test_below_cutoff(self, mode_a2g1):
        assert per_instantaneous(mode_a2g1, 0.1) == 1.0

    def test_direct_substitution(self, mode_a2g1):
        assert per_instantaneous(mode_a2g1, 2 * math.log(2)) == pytest.approx(0.5, abs=1e-15)

    def test_continuity_at_cutoff(self, mode_a2g1):
        # a e^{-g ln2} = 1: both branches agree exactly at the cutoff.
        assert per_instantaneous(mode_a2g1, math.log(2)) == 1.0

    def test_clamped_when_fit_exceeds_one(self):
        # Cutoff below the curve's crossing of 1: the clamp keeps probability
        # semantics in [cutoff, log(a)/g).
        mode = AmcMode(1, 1.0, 4.0, 1.0, 0.5)
        assert per_instantaneous(mode, 0.6) == 1.0
        assert per_instantaneous(mode, 3.0) == pytest.approx(4 * math.exp(-3), abs=1e-15)

    def test_array_input(self, mode_a2g1):
        out = per_instantaneous(mode_a2g1, np.array([0.0, math.log(2), 10.0]))
        assert out.shape == (3,)
        assert out[0] == 1.0

    def test_negative_snr_rejected(self, mode_a2g1):
        with pytest.raises(ValueError):
            per_instantaneous(mode_a2g1, -0.1)

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0.5, 300.0), g=st.floats(0.05, 8.0),
           g1=st.floats(0.0, 40.0), g2=st.floats(0.0, 40.0))
    def test_monotone_and_bounded(self, a, g, g1, g2):
        mode = AmcMode(1, 1.0, a, g, math.log(max(a, 1.0)) / g)
        lo, hi = min(g1, g2), max(g1, g2)
        p_lo, p_hi = per_instantaneous(mode, lo), per_instantaneous(mode, hi)
        assert 0.0 <= p_hi <= p_lo <= 1.0


class TestValidateModeSet:
    def test_good_five_mode_set(self, hiperlan_modes):
        report = validate_mode_set(hiperlan_modes)
        assert report.ok
        # The published cutoffs are rounded to 1e-4 dB, so the fitted curve
        # may poke microscopically above 1 there; that is warning material,
        # never a violation (the clamp covers it).
        for mode in hiperlan_modes.modes:
            overshoot = mode.fit_a * math.exp(-mode.fit_g * mode.fit_gamma_pl)
            assert overshoot < 1.001

    def test_duplicate_rate(self, mode_a2g1):
        ms = ModeSet((mode_a2g1, AmcMode(2, 1.0, 3.0, 0.5, 3.0)))
        report = validate_mode_set(ms)
        assert not report.ok
        assert any("non-increasing rates" in v.message for v in report.violations)

    def test_zero_packet_length(self, mode_a2g1):
        report = validate_mode_set(ModeSet((mode_a2g1,), packet_length=0))
        assert any("packet length" in v.message for v in report.violations)

    def test_discontinuous_fit_warns(self):
        ms = ModeSet((AmcMode(1, 1.0, 4.0, 1.0, 0.5),))
        report = validate_mode_set(ms)
        assert report.ok
        assert report.warnings

    def test_bad_index(self, mode_a2g1):
        ms = ModeSet((AmcMode(3, 1.0, 2.0, 1.0, 0.5),))
        report = validate_mode_set(ms)
        assert not report.ok


class TestDbConversion:
    def test_round_trip(self):
        assert linear_to_db(db_to_linear(7.3)) == pytest.approx(7.3, abs=1e-12)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            linear_to_db(0.0)


class TestModeSetAccess:
    def test_mode_lookup_is_one_based(self, hiperlan_modes):
        assert hiperlan_modes.mode(1).rate == 0.5
        assert hiperlan_modes.mode(5).rate == 3.0
        with pytest.raises(IndexError):
            hiperlan_modes.mode(0)
        with pytest.raises(IndexError):
            hiperlan_modes.mode(6)

    def test_cutoffs_increase_with_rate(self, hiperlan_modes):
        assert (np.diff(hiperlan_modes.gamma_pl) > 0).all()
