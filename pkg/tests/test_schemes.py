import numpy as np
import pytest

from fedhda import codec, phy, schemes


def channel(snr_db, seed=0, p_total=1.0):
    return phy.ChannelConfig.for_power(p_total, snr_db, seed)


def cfg(kind, budget=2000, **kw):
    return schemes.SchemeConfig(kind=kind, symbol_budget=budget, **kw)


class TestHybrid:
    def test_noiseless_exact(self):
        rng = np.random.default_rng(1)
        v = rng.normal(0, 0.2, 500)
        out, rep = schemes.hybrid_transmit(v, cfg("hybrid", 1000), channel(300.0))
        assert rep.success
        assert np.linalg.norm(out - v) / np.linalg.norm(v) < 1e-6

    def test_beats_digital_at_20db(self):
        rng = np.random.default_rng(2)
        v = rng.normal(0, 0.2, 1000)
        ch = channel(20.0, seed=5)
        mse_h = schemes.hybrid_transmit(v, cfg("hybrid"), ch)[1].mse
        mse_d = schemes.digital_transmit(v, cfg("digital"), ch)[1].mse
        assert mse_h < mse_d

    def test_failure_rate_at_0db_fixed_plan(self):
        rng = np.random.default_rng(3)
        v = rng.normal(0, 0.2, 500)
        c = cfg("hybrid", 1000)
        fails = sum(
            schemes.hybrid_transmit(v, c, channel(0.0, seed=i))[0] is None
            for i in range(100)
        )
        assert fails > 50

    def test_failure_reported_not_raised(self):
        rng = np.random.default_rng(4)
        v = rng.normal(0, 0.2, 300)
        out, rep = schemes.hybrid_transmit(v, cfg("hybrid", 700), channel(-10.0, seed=1))
        assert out is None
        assert not rep.success
        assert "checksum" in rep.failure_cause

    def test_degenerates_to_analog_when_plan_skips_digital(self):
        # P_th = N0*gamma0 > P_t forces P_d = 0
        rng = np.random.default_rng(5)
        v = rng.normal(0, 0.2, 400)
        ch = channel(12.0, seed=42)
        hybrid_cfg = cfg("hybrid", 1000, noise_power=1.0, gamma_0_db=5.0)
        analog_cfg = cfg("analog", 1000, noise_power=1.0, gamma_0_db=5.0)
        out_h, rep_h = schemes.hybrid_transmit(v, hybrid_cfg, ch)
        out_a, rep_a = schemes.analog_transmit(v, analog_cfg, ch)
        assert rep_h.p_digital == 0.0
        assert np.array_equal(out_h, out_a)

    def test_budget_accounting_max_of_streams(self):
        rng = np.random.default_rng(6)
        v = rng.normal(0, 0.2, 400)
        out, rep = schemes.hybrid_transmit(v, cfg("hybrid", 2000), channel(20.0, seed=2))
        assert rep.n_analog == 400
        assert rep.symbols_used == max(rep.n_digital, rep.n_analog)
        assert rep.budget_ok and rep.symbols_used <= 2000

    def test_track_channel_mode_recovers_at_low_snr(self):
        # with N0 tracked, 4 dB still cannot afford the 5 dB digital target,
        # so the plan degenerates to pure analog instead of failing
        rng = np.random.default_rng(7)
        v = rng.normal(0, 0.2, 300)
        c = cfg("hybrid", 700, track_channel=True)
        out, rep = schemes.hybrid_transmit(v, c, channel(4.0, seed=3))
        assert out is not None
        assert rep.p_digital == 0.0

    def test_mse_reported_on_success(self):
        rng = np.random.default_rng(8)
        v = rng.normal(0, 0.2, 300)
        out, rep = schemes.hybrid_transmit(v, cfg("hybrid", 700), channel(15.0, seed=4))
        if rep.success:
            assert rep.mse == pytest.approx(float(np.mean((out - v) ** 2)))


class TestDigital:
    def test_noiseless_hits_quantization_floor(self):
        rng = np.random.default_rng(9)
        v = rng.normal(0, 0.2, 2000)
        out, rep = schemes.digital_transmit(v, cfg("digital", 8000), channel(300.0))
        assert rep.success
        np.testing.assert_allclose(
            out, codec.dequantize(codec.quantize(v, rep.delta)), atol=0
        )
        # uniform quantization noise oracle at a fine step
        assert rep.mse == pytest.approx(rep.delta**2 / 12.0, rel=0.25)

    def test_4qam_halves_symbols_for_equal_bits(self):
        # direct check at matched delta: same coded bits, half the symbols
        rng = np.random.default_rng(23)
        v = rng.normal(0, 0.2, 500)
        from fedhda import convcode

        q = codec.quantize(v, 0.05)
        coded = convcode.conv_encode(codec.entropy_encode(q))
        assert phy.qam_modulate(coded, 4, 1.0).shape[0] * 2 == phy.qam_modulate(
            coded, 2, 1.0
        ).shape[0]

    def test_low_snr_cliff(self):
        rng = np.random.default_rng(11)
        v = rng.normal(0, 0.2, 500)
        out, rep = schemes.digital_transmit(v, cfg("digital", 1200), channel(-5.0, seed=1))
        assert out is None and not rep.success


class TestAnalog:
    def test_noiseless_exact(self):
        rng = np.random.default_rng(12)
        v = rng.normal(0, 0.2, 640)
        out, rep = schemes.analog_transmit(v, cfg("analog", 640), channel(300.0))
        assert rep.success
        np.testing.assert_allclose(out, v, atol=1e-10)

    def test_never_fails_and_uses_m_symbols(self):
        rng = np.random.default_rng(13)
        v = rng.normal(0, 0.2, 123)
        out, rep = schemes.analog_transmit(v, cfg("analog", 123), channel(-20.0, seed=9))
        assert out is not None and rep.success
        assert rep.symbols_used == 123

    def test_mse_decreasing_in_snr(self):
        rng = np.random.default_rng(14)
        v = rng.normal(0, 0.2, 400)
        c = cfg("analog", 400)
        means = []
        for snr in (0, 5, 10, 15, 20):
            mses = [
                schemes.analog_transmit(v, c, channel(snr, seed=s))[1].mse
                for s in range(100)
            ]
            means.append(float(np.mean(mses)))
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_hybrid_beats_analog_at_20db_on_quantization_friendly_v(self):
        # sparse values sitting near a coarse grid compress into few bits,
        # leaving tiny residuals for the analog stage
        rng = np.random.default_rng(15)
        k = rng.integers(-2, 3, 800) * (rng.random(800) < 0.15)
        v = 0.25 * k.astype(np.float64) + rng.normal(0, 0.004, 800)
        ch = channel(20.0, seed=77)
        mse_h = schemes.hybrid_transmit(v, cfg("hybrid", 2400), ch)[1].mse
        mse_a = schemes.analog_transmit(v, cfg("analog", 2400), ch)[1].mse
        assert mse_h < mse_a

    def test_iq_packing_halves_symbols(self):
        rng = np.random.default_rng(16)
        v = rng.normal(0, 0.2, 401)
        out, rep = schemes.analog_transmit(
            v, cfg("analog", 401, analog_iq=True), channel(300.0)
        )
        assert rep.symbols_used == 201
        np.testing.assert_allclose(out, v, atol=1e-10)

    def test_zero_vector_survives(self):
        out, rep = schemes.analog_transmit(np.zeros(64), cfg("analog", 64), channel(10.0))
        assert not out.any() and rep.success


class TestInterface:
    def test_totality_all_kinds(self):
        rng = np.random.default_rng(17)
        v = rng.normal(0, 0.2, 300)
        for kind in schemes.SCHEME_KINDS:
            out, rep = schemes.transmit(v, cfg(kind, 700), channel(10.0, seed=1))
            assert (out is None and not rep.success) or (
                out is not None and out.shape == v.shape
            )

    def test_perfect_identity(self):
        rng = np.random.default_rng(18)
        v = rng.normal(size=50)
        out, rep = schemes.transmit(v, cfg("perfect", 1), channel(0.0))
        assert np.array_equal(out, v) and rep.success

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            schemes.SchemeConfig(kind="quantum", symbol_budget=10)

    def test_budget_too_small_for_container(self):
        rng = np.random.default_rng(19)
        v = rng.normal(size=100)
        with pytest.raises(ValueError):
            schemes.hybrid_transmit(v, cfg("hybrid", 64), channel(10.0))
