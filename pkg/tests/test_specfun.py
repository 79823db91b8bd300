import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from coopamc.specfun import bessel_i0, bessel_i0e, marcum_q1


def i0_series_oracle(x: float, terms: int = 60) -> float:
    """Plain power-series evaluation, independent of the implementation."""
    total, term = 1.0, 1.0
    for k in range(1, terms):
        term *= (x * x / 4.0) / (k * k)
        total += term
    return total


def marcum_series_oracle(a: float, b: float) -> float:
    """Canonical Bessel series, summed with scipy Bessels to a 1e-14 tail."""
    if b == 0.0:
        return 1.0
    total = 0.0
    for k in range(0, 2000):
        term = (a / b) ** k * special.ive(k, a * b)
        total += term
        if k > 5 and term < 1e-14 * max(total, 1e-300):
            break
    return math.exp(-0.5 * (a - b) ** 2) * total


class TestBesselI0:
    def test_at_zero(self):
        assert bessel_i0(0.0) == 1.0

    def test_series_oracle_one(self):
        assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-12)
        assert bessel_i0(1.0) == pytest.approx(i0_series_oracle(1.0), rel=1e-13)

    def test_series_oracle_ten(self):
        assert bessel_i0(10.0) == pytest.approx(2815.7166284662544, rel=1e-11)
        assert bessel_i0(10.0) == pytest.approx(i0_series_oracle(10.0), rel=1e-13)

    def test_relative_error_on_range(self):
        xs = np.linspace(0.0, 700.0, 401)
        ref = special.i0e(xs) * np.exp(xs)
        mine = bessel_i0(xs)
        rel = np.abs(mine - ref) / np.maximum(ref, 1e-300)
        assert rel.max() < 1e-10

    def test_scaled_form_matches(self):
        xs = np.geomspace(1e-3, 700.0, 200)
        assert np.allclose(bessel_i0e(xs), special.i0e(xs), rtol=1e-11, atol=0)


class TestMarcumQ1:
    def test_b_zero_is_one(self):
        for a in (0.0, 0.3, 2.0, 50.0):
            assert marcum_q1(a, 0.0) == 1.0

    def test_a_zero_closed_form(self):
        assert marcum_q1(0.0, 1.0) == pytest.approx(0.6065306597126334, abs=1e-12)
        for b in (0.1, 1.7, 4.0):
            assert marcum_q1(0.0, b) == pytest.approx(math.exp(-b * b / 2), abs=1e-12)

    def test_series_oracle_one_one(self):
        assert marcum_q1(1.0, 1.0) == pytest.approx(marcum_series_oracle(1.0, 1.0),
                                                    abs=1e-12)

    def test_against_noncentral_chi2(self):
        rng = np.random.default_rng(7)
        for _ in range(400):
            a = rng.uniform(0.0, 20.0)
            b = rng.uniform(0.0, 20.0)
            ref = stats.ncx2.sf(b * b, 2, a * a)
            assert marcum_q1(a, b) == pytest.approx(ref, abs=1e-10)

    def test_extreme_arguments(self):
        assert marcum_q1(0.5, 300.0) == 0.0
        assert marcum_q1(300.0, 0.5) == 1.0
        big = marcum_q1(120.0, 120.0)
        assert big == pytest.approx(stats.ncx2.sf(120.0 ** 2, 2, 120.0 ** 2), abs=1e-10)

    def test_domain(self):
        with pytest.raises(ValueError):
            marcum_q1(-1.0, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0.0, 12.0), b=st.floats(0.0, 12.0),
           bump=st.floats(1e-6, 3.0))
    def test_monotone(self, a, b, bump):
        base = marcum_q1(a, b)
        assert marcum_q1(a, b + bump) <= base + 1e-12
        assert marcum_q1(a + bump, b) >= base - 1e-12

    def test_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            q = marcum_q1(rng.uniform(0, 40), rng.uniform(0, 40))
            assert 0.0 <= q <= 1.0
