import numpy as np
import pytest

from crnpc.constraints import (
    threshold_ratios,
    ConstraintSet,
    InequalityPair,
    binary_to_pair,
    feedback_to_pair,
    gamma_ratios,
    window_filter,
)
from crnpc.errors import ObservedAboveReference
from crnpc.pu_link import (
    OUTAGE,
    AcmProtocol,
    dbm_to_mw,
    interference_thresholds,
    pu_sinr,
    select_mcs,
)

REF = 5  # 16QAM 1/2 in the default ladder


@pytest.fixture
def ratios():
    return gamma_ratios(AcmProtocol.default(), REF)


class TestGammaRatios:
    def test_reference_ratio_is_one(self, ratios):
        assert ratios.ratio(REF) == pytest.approx(1.0, abs=1e-15)

    def test_linear_scale_values(self, ratios):
        # 10^((gamma_j - gamma_ref)/10), frozen from that arithmetic
        assert ratios.ratio(4) == pytest.approx(0.3981071705534972, rel=1e-12)
        assert ratios.ratio(3) == pytest.approx(0.251188643150958, rel=1e-12)
        assert ratios.ratio(1) == pytest.approx(0.15848931924611134, rel=1e-12)

    def test_strictly_increasing(self, ratios):
        assert np.all(np.diff(ratios.c) > 0)


class TestFeedbackToPair:
    def test_no_degradation_keeps_single_lower_cut(self, ratios):
        p = np.array([1.0, 2.0])
        pair = feedback_to_pair(p, REF, ratios, flop=3)
        assert pair.p_upper is None
        assert pair.p_lower == pytest.approx(p)

    def test_one_step_down(self, ratios):
        p = np.array([0.5, 1.5])
        pair = feedback_to_pair(p, 4, ratios, flop=1)
        assert pair.p_upper == pytest.approx(1.0 * p)
        assert pair.p_lower == pytest.approx(0.3981071705534972 * p)

    def test_two_steps_down(self, ratios):
        p = np.array([2.0])
        pair = feedback_to_pair(p, 3, ratios, flop=1)
        assert pair.p_upper == pytest.approx(0.3981071705534972 * p)
        assert pair.p_lower == pytest.approx(0.251188643150958 * p)

    def test_outage_keeps_single_upper_cut(self, ratios):
        p = np.array([3.0])
        pair = feedback_to_pair(p, OUTAGE, ratios, flop=1)
        assert pair.p_lower is None
        assert pair.p_upper == pytest.approx(0.15848931924611134 * p)

    def test_above_reference_rejected(self, ratios):
        r4 = gamma_ratios(AcmProtocol.default(), 4)
        with pytest.raises(ObservedAboveReference):
            feedback_to_pair(np.array([1.0]), 5, r4, flop=2)

    def test_truth_satisfies_generated_pair(self):
        # End-to-end algebra: whatever MCS the PU picks under a probe, the
        # true normalized gains satisfy both stored inequalities when cuts
        # are scaled by the exact threshold ratios (the simulator's path).
        from crnpc.scenario import Topology

        proto = AcmProtocol.default()
        i_th_mw = dbm_to_mw(interference_thresholds(proto, -83.0, -103.0))
        i_th_ref = i_th_mw[REF - 1]
        exact = threshold_ratios(proto, -83.0, -103.0, REF)
        rng = np.random.default_rng(11)
        for _ in range(300):
            g = rng.uniform(1e-13, 3e-11, size=3)
            topo = Topology(g ** -0.25, g, np.ones(3), -83.0, -103.0)
            g_norm = g / i_th_ref
            p = rng.uniform(0.0, 200.0, size=3)
            observed = select_mcs(pu_sinr(topo, p), proto)
            if observed > REF:
                continue
            pair = feedback_to_pair(p, observed, exact, flop=1)
            if pair.p_lower is not None:
                assert float(g_norm @ pair.p_lower) <= 1.0 + 1e-9
            if pair.p_upper is not None:
                assert float(g_norm @ pair.p_upper) > 1.0 - 1e-9

    def test_threshold_ratios_match_gamma_ratios_at_high_snr(self):
        # The exact ratios converge to the plain SINR ratios as the
        # clear-channel SNR grows (noise term becomes negligible).
        proto = AcmProtocol.default()
        plain = gamma_ratios(proto, REF)
        exact = threshold_ratios(proto, -23.0, -103.0, REF)  # 80 dB SNR
        assert exact.c == pytest.approx(plain.c, rel=1e-4)
        assert exact.ratio(REF) == pytest.approx(1.0, abs=1e-15)
        assert np.all(np.diff(exact.c) > 0)


class TestBinaryToPair:
    def test_not_degraded(self):
        p = np.array([1.0, 1.0])
        pair = binary_to_pair(p, degraded=False, flop=1)
        assert pair.p_upper is None and pair.p_lower == pytest.approx(p)

    def test_degraded(self):
        p = np.array([1.0, 1.0])
        pair = binary_to_pair(p, degraded=True, flop=1)
        assert pair.p_lower is None and pair.p_upper == pytest.approx(p)

    def test_mcc_pair_implies_binary_cut(self, ratios):
        # For a one-step degradation the MCC cuts are at least as tight as the
        # binary cut on both sides: c_j <= 1 <= c_{j+1} scaling.
        p = np.array([1.0, 2.0, 0.5])
        mcc = feedback_to_pair(p, 4, ratios, flop=1)
        binary = binary_to_pair(p, degraded=True, flop=1)
        # any g with g . p_upper(mcc) > 1 has g . p_upper(binary) >= that
        assert np.all(mcc.p_upper <= binary.p_upper + 1e-15)
        assert float(ratios.ratio(4)) <= 1.0 <= float(ratios.ratio(5))


class TestWindowFilter:
    def make_set(self, flops):
        cs = ConstraintSet(prior_g_ub=1.0)
        for t in flops:
            cs.append(InequalityPair(flop=t, p_upper=None, p_lower=np.array([float(t)])))
        return cs

    def test_window_bounds(self):
        cs = self.make_set(range(1, 101))
        kept = window_filter(cs, t=100, t_w=50)
        assert [p.flop for p in kept.pairs] == list(range(50, 101))

    def test_startup_keeps_everything(self):
        cs = self.make_set(range(1, 11))
        assert len(window_filter(cs, t=10, t_w=50)) == 10

    def test_paper_window_arithmetic(self):
        assert 250 // 5 == 50

    def test_flop_indices_must_increase(self):
        cs = self.make_set([1, 2])
        with pytest.raises(ValueError):
            cs.append(InequalityPair(flop=2, p_upper=None, p_lower=np.array([1.0])))

    def test_pair_needs_one_side(self):
        with pytest.raises(ValueError):
            InequalityPair(flop=1, p_upper=None, p_lower=None)
