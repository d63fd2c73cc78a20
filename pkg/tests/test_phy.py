import numpy as np
import pytest

from fedhda import convcode, phy


GAMMA_5DB = 10.0 ** 0.5


class TestPowerPlan:
    def test_split_at_5db_requirement(self):
        plan = phy.plan_power(10.0, 1.0, GAMMA_5DB)
        assert plan.p_threshold == 1.0 * GAMMA_5DB
        assert plan.p_digital == plan.p_threshold
        assert plan.p_analog == 10.0 - plan.p_digital

    def test_otherwise_branch(self):
        plan = phy.plan_power(1.0, 1.0, GAMMA_5DB)
        assert plan.p_digital == 0.0
        assert plan.p_analog == 1.0

    def test_boundary_inclusive(self):
        plan = phy.plan_power(2.0, 1.0, 2.0)
        assert plan.p_digital == 2.0
        assert plan.p_analog == 0.0

    def test_rejects_nonpositive(self):
        for bad in ((0, 1, 1), (1, -1, 1), (1, 1, 0)):
            with pytest.raises(ValueError):
                phy.plan_power(*bad)

    def test_piecewise_law_on_grid(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            p_t = float(rng.uniform(0.1, 20.0))
            n0 = float(rng.uniform(0.01, 5.0))
            g0 = float(rng.uniform(0.1, 10.0))
            plan = phy.plan_power(p_t, n0, g0)
            p_th = n0 * g0
            assert plan.p_threshold == p_th
            assert plan.p_digital == (p_th if p_th <= p_t else 0.0)
            assert plan.p_analog == p_t - plan.p_digital


class TestNormalization:
    def test_by_hand(self):
        m = phy.normalization_factor(np.array([1.0, -1.0, 1.0, 1.0]), 2.0)
        assert m == pytest.approx(np.sqrt(2.0), rel=1e-12)

    def test_unit_power_identity(self):
        r = np.array([1.0, -1.0, 1.0, -1.0])
        assert phy.normalization_factor(r, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_degenerate_cases(self):
        assert phy.normalization_factor(np.zeros(5), 3.0) == 0.0
        assert phy.normalization_factor(np.ones(5), 0.0) == 0.0


class TestHybridFrame:
    def plan(self, p_d=1.0, p_a=1.0):
        return phy.PowerPlan(
            p_total=p_d + p_a,
            noise_power=0.1,
            gamma_0=GAMMA_5DB,
            p_threshold=p_d,
            p_digital=p_d,
            p_analog=p_a,
        )

    def test_superposition_by_hand(self):
        # one bit 0 at P_d=1 on I, one residual 0.5 with P_a making m=2
        frame = phy.modulate_hybrid(
            np.array([0], dtype=np.uint8), np.array([0.5]), self.plan(1.0, 1.0)
        )
        assert frame.m == pytest.approx(2.0)
        assert frame.symbols[0] == pytest.approx(1.0 + 1j * 1.0)

    def test_zero_digital_power(self):
        frame = phy.modulate_hybrid(
            np.array([0, 1], dtype=np.uint8), np.array([0.3]), self.plan(0.0, 2.0)
        )
        assert not frame.symbols.real.any()

    def test_padding_rule(self):
        frame = phy.modulate_hybrid(
            np.zeros(6, dtype=np.uint8), np.ones(4), self.plan()
        )
        assert len(frame) == 6
        assert frame.n_digital == 6 and frame.n_analog == 4
        assert not frame.symbols.imag[4:].any()
        assert frame.symbols.real[4:].any()

    def test_power_conservation_fully_occupied(self):
        rng = np.random.default_rng(1)
        bits = rng.integers(0, 2, 4096).astype(np.uint8)
        residuals = rng.normal(0, 0.3, 4096)
        plan = self.plan(0.7, 1.8)
        frame = phy.modulate_hybrid(bits, residuals, plan)
        mean_power = float(np.mean(np.abs(frame.symbols) ** 2))
        assert mean_power == pytest.approx(plan.p_total, rel=1e-12)
        assert float(np.mean(frame.symbols.imag**2)) == pytest.approx(
            plan.p_analog, rel=1e-12
        )

    def test_digital_path_blind_to_analog_payload(self):
        rng = np.random.default_rng(2)
        bits = rng.integers(0, 2, 200).astype(np.uint8)
        coded = convcode.conv_encode(bits)
        plan = self.plan(1.0, 1.0)
        cfg = phy.ChannelConfig.for_power(plan.p_total, 8.0, seed=99)
        decoded = []
        for scale in (0.0, 1.0, 50.0):
            residuals = scale * rng.normal(0, 1, coded.shape[0])
            frame = phy.modulate_hybrid(coded, residuals, plan)
            received = phy.awgn_channel(frame, cfg)
            llrs = phy.compute_llr(
                received.symbols.real[: frame.n_digital], plan.p_digital, cfg.sigma2
            )
            decoded.append(convcode.viterbi_decode(llrs))
        assert np.array_equal(decoded[0], decoded[1])
        assert np.array_equal(decoded[1], decoded[2])


class TestChannel:
    def test_noiseless_limit(self):
        frame = phy.modulate_hybrid(
            np.array([0, 1, 1], dtype=np.uint8),
            np.array([0.1, -0.2, 0.3]),
            phy.PowerPlan(2.0, 0.1, 1.0, 1.0, 1.0, 1.0),
        )
        cfg = phy.ChannelConfig.for_power(2.0, 320.0, seed=0)
        received = phy.awgn_channel(frame, cfg)
        np.testing.assert_allclose(received.symbols, frame.symbols, atol=1e-12)

    def test_deterministic_given_seed(self):
        frame = phy.SymbolFrame(np.zeros(64, dtype=complex), 0, 64, 1.0, None)
        cfg = phy.ChannelConfig.for_power(1.0, 10.0, seed=123)
        a = phy.awgn_channel(frame, cfg)
        b = phy.awgn_channel(frame, cfg)
        assert np.array_equal(a.symbols, b.symbols)

    def test_empirical_variance_within_one_percent(self):
        n = 10**6
        frame = phy.SymbolFrame(np.zeros(n, dtype=complex), 0, n, 1.0, None)
        cfg = phy.ChannelConfig.for_power(1.0, 3.0, seed=7)
        received = phy.awgn_channel(frame, cfg)
        var_i = float(np.var(received.symbols.real))
        var_q = float(np.var(received.symbols.imag))
        assert abs(var_i - cfg.sigma2) / cfg.sigma2 < 0.01
        assert abs(var_q - cfg.sigma2) / cfg.sigma2 < 0.01

    def test_sigma2_definition(self):
        cfg = phy.ChannelConfig.for_power(4.0, 10.0, seed=0)
        assert cfg.sigma2 == pytest.approx(4.0 / (2 * 10.0), rel=1e-12)
        assert cfg.noise_power == pytest.approx(2 * cfg.sigma2, rel=1e-12)


class TestLlr:
    def test_formula(self):
        llr = phy.compute_llr(np.array([1.0]), p_digital=1.0, sigma2=1.0)
        assert llr[0] == pytest.approx(2.0)

    def test_zero_observation_uninformative(self):
        assert phy.compute_llr(np.array([0.0]), 1.0, 0.5)[0] == 0.0

    def test_rejects_absent_digital_stream(self):
        with pytest.raises(ValueError):
            phy.compute_llr(np.array([1.0]), 0.0, 1.0)

    def test_scaling(self):
        y = np.array([0.3, -0.7, 1.1])
        a = phy.compute_llr(y, 2.0, 0.5)
        b = phy.compute_llr(y, 2.0, 1.0)
        np.testing.assert_allclose(a, 2 * b)


class TestMmse:
    def test_noiseless_passthrough(self):
        out = phy.mmse_denoise(np.array([0.7]), m=1.0, sigma2=0.0)
        assert out[0] == pytest.approx(0.7)

    def test_by_hand(self):
        out = phy.mmse_denoise(np.array([2.0]), m=1.0, sigma2=1.0)
        assert out[0] == pytest.approx(1.0)

    def test_full_shrinkage(self):
        out = phy.mmse_denoise(np.array([5.0]), m=1.0, sigma2=1e12)
        assert abs(out[0]) < 1e-10

    def test_zero_m_returns_zeros(self):
        out = phy.mmse_denoise(np.array([1.0, 2.0]), m=0.0, sigma2=0.0)
        assert not out.any()

    def test_shrinkage_monotone_in_sigma2(self):
        y = 1.7
        vals = [
            abs(phy.mmse_denoise(np.array([y]), 0.8, s2)[0])
            for s2 in (0.0, 0.1, 1.0, 10.0, 100.0)
        ]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_distortion_law(self):
        # E[(r - r_hat)^2] = sigma2/(m^2 + sigma2) for unit-variance r
        rng = np.random.default_rng(11)
        n = 10**5
        r = rng.standard_normal(n)
        for m in (0.5, 1.0, 2.0):
            for sigma2 in (0.1, 1.0):
                y = m * r + rng.normal(0, np.sqrt(sigma2), n)
                r_hat = phy.mmse_denoise(y, m, sigma2)
                emp = float(np.mean((r - r_hat) ** 2))
                assert emp == pytest.approx(sigma2 / (m * m + sigma2), rel=0.03)


class TestQam:
    def test_bpsk_map(self):
        np.testing.assert_allclose(
            phy.qam_modulate(np.array([0, 1], dtype=np.uint8), 2, 1.0),
            [1.0 + 0j, -1.0 + 0j],
        )

    def test_4qam_gray_map(self):
        sym = phy.qam_modulate(np.array([0, 0], dtype=np.uint8), 4, 2.0)
        assert sym[0] == pytest.approx(1.0 + 1.0j)
        sym = phy.qam_modulate(np.array([1, 0], dtype=np.uint8), 4, 2.0)
        assert sym[0] == pytest.approx(-1.0 + 1.0j)

    def test_4qam_noiseless_roundtrip(self):
        rng = np.random.default_rng(12)
        bits = rng.integers(0, 2, 600).astype(np.uint8)
        sym = phy.qam_modulate(bits, 4, 3.0)
        llrs = phy.qam_llr(sym, 4, 3.0, sigma2=0.25)
        hard = (llrs < 0).astype(np.uint8)[: bits.shape[0]]
        assert np.array_equal(hard, bits)

    def test_4qam_halves_symbols(self):
        bits = np.zeros(100, dtype=np.uint8)
        assert phy.qam_modulate(bits, 4, 1.0).shape[0] == 50
        assert phy.qam_modulate(bits, 2, 1.0).shape[0] == 100

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            phy.qam_modulate(np.zeros(4, dtype=np.uint8), 16, 1.0)
