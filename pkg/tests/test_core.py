import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from splitrx.core import (ChannelModel, LinkParams, ReceiverKind, db_to_linear,
                          is_power_of_two, q_function, snr, validate_params)


def q_by_integration(x):
    """Oracle: integrate the standard normal density over (x, inf)."""
    val, _ = integrate.quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), x, math.inf,
                            epsabs=1e-14, epsrel=1e-12)
    return val


class TestQFunction:
    def test_zero(self):
        assert q_function(0.0) == 0.5

    def test_reference_value(self):
        expected = q_by_integration(2.8184)
        assert q_function(2.8184) == pytest.approx(expected, rel=1e-4)
        assert q_function(2.8184) == pytest.approx(2.41e-3, abs=1e-5)

    def test_far_tail_does_not_overflow(self):
        v = q_function(40.0)
        assert 0.0 <= v < 1e-300

    def test_vectorised(self):
        out = q_function(np.array([-1.0, 0.0, 1.0]))
        assert out.shape == (3,)
        assert out[1] == 0.5

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(ValueError):
            q_function(bad)

    @given(st.floats(-30, 30))
    def test_symmetry(self, x):
        assert q_function(x) + q_function(-x) == pytest.approx(1.0, abs=1e-14)

    # below about -5 neighbouring values round to the same double near 1
    @given(st.floats(-5, 8), st.floats(1e-3, 2))
    def test_strictly_decreasing(self, x, dx):
        assert q_function(x) > q_function(x + dx)

    @given(st.floats(-8, 8))
    def test_open_unit_interval(self, x):
        assert 0.0 < q_function(x) < 1.0

    @given(st.floats(-6, 6))
    def test_matches_integration(self, x):
        assert q_function(x) == pytest.approx(q_by_integration(x), rel=1e-8, abs=1e-15)


class TestValidation:
    def test_default_valid(self):
        rep = validate_params(LinkParams(m_order=2, rho=0.5, c_dim=50))
        assert rep.valid and not rep.warnings

    def test_non_power_of_two(self):
        rep = validate_params(LinkParams(m_order=3))
        assert not rep.valid
        assert any("power of two" in e for e in rep.errors)

    def test_small_c_warns(self):
        p = LinkParams(c_dim=10)
        rep = validate_params(p)
        assert rep.valid and rep.warnings
        assert p.approximation_warning

    @pytest.mark.parametrize("kw", [dict(rho=-0.1), dict(rho=1.1), dict(c_dim=0),
                                    dict(ns=0), dict(sigma_e2=-1e-3), dict(ep=0)])
    def test_invalid_fields(self, kw):
        assert not validate_params(LinkParams(**kw)).valid

    def test_check_raises(self):
        with pytest.raises(ValueError):
            LinkParams(m_order=6).check()

    def test_bits_per_symbol(self):
        assert LinkParams(m_order=8).bits_per_symbol == 3


class TestSnr:
    def test_from_db(self):
        p = LinkParams.from_snr_db(9.0)
        assert p.n0 == 1.0
        assert p.ep == pytest.approx(7.943282347, rel=1e-9)
        assert p.snr_db == pytest.approx(9.0)

    @given(st.floats(1e-3, 10), st.floats(1e-2, 100), st.floats(1e-2, 10))
    def test_instantaneous(self, h, ep, n0):
        p = LinkParams(ep=ep, n0=n0)
        assert snr(p, h) == pytest.approx(h * h * ep / n0)

    def test_unit_gain_is_nominal(self):
        p = LinkParams.from_snr_db(6.0)
        assert snr(p, 1.0) == pytest.approx(p.snr)


def test_power_of_two():
    assert [n for n in range(1, 20) if is_power_of_two(n)] == [1, 2, 4, 8, 16]
    assert not is_power_of_two(2.0)


def test_db_roundtrip():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(0.0) == 1.0


class TestReceiverKind:
    def test_parse(self):
        assert ReceiverKind.parse("SDJD") is ReceiverKind.SDJD
        with pytest.raises(ValueError):
            ReceiverKind.parse("mrc")

    def test_effective_rho(self):
        assert ReceiverKind.CD.effective_rho(0.3) == 1.0
        assert ReceiverKind.ED.effective_rho(0.3) == 0.0
        assert ReceiverKind.SDSD.effective_rho(0.3) == 0.3


class TestChannelModel:
    @pytest.mark.parametrize("params", [(1.12, 0.05, 0.59), (1.0, 1.0, 1.0), (3.0, 2.0, 1.7),
                                        (0.6, 0.2, 0.4)])
    def test_pdf_integrates_to_one(self, params):
        ch = ChannelModel.nakagami(*params)
        total, _ = integrate.quad(ch.pdf, 0, math.inf, limit=400, epsabs=1e-12)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_rayleigh_special_case(self):
        ch = ChannelModel.nakagami(1.0, 1.0, 1.0)
        h = np.linspace(0.01, 4, 50)
        np.testing.assert_allclose(ch.pdf(h), stats.rayleigh(scale=math.sqrt(0.5)).pdf(h), rtol=1e-10)

    def test_second_moment_by_integration(self, nakagami):
        val, _ = integrate.quad(lambda h: h * h * nakagami.pdf(h), 0, math.inf, limit=400)
        assert nakagami.raw_second_moment() == pytest.approx(val, rel=1e-7)

    def test_normalisation_scale(self, nakagami):
        ch = ChannelModel.nakagami(1.12, 0.05, 0.59, normalize=True)
        assert ch.raw_second_moment() * ch.amplitude_scale() ** 2 == pytest.approx(1.0)
        assert nakagami.amplitude_scale() == 1.0

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            ChannelModel.nakagami(bad, 0.05, 0.59)

    def test_gaussian_has_no_density(self):
        with pytest.raises(ValueError):
            ChannelModel.gaussian().pdf(1.0)
        assert ChannelModel.gaussian().describe() == "gaussian"
