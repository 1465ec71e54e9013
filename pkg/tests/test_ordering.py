"""Unit tests for side-information channel ordering."""

import numpy as np
import pytest

from secrd.binary import BecBscParams, build_source
from secrd.ordering import (
    OrderingVerdict,
    classify_bec_bsc,
    is_degraded,
    is_more_capable,
    less_noisy_search,
    side_channels,
)
from secrd.probs import InvalidArgument, binary_entropy, bsc, bec, compose


class TestParams:
    def test_domain_checks(self):
        with pytest.raises(InvalidArgument):
            BecBscParams(p=0.6, eps=0.1)
        with pytest.raises(InvalidArgument):
            BecBscParams(p=0.1, eps=1.2)


class TestDegradedness:
    def test_cascaded_bsc_is_degraded(self):
        first = bsc(0.1)
        second = compose(first, bsc(0.15))
        verdict, witness = is_degraded(first, second)
        assert verdict
        np.testing.assert_allclose(first.rows @ witness.rows, second.rows,
                                   atol=1e-8)

    def test_reverse_direction_fails(self):
        first = bsc(0.1)
        second = compose(first, bsc(0.15))
        verdict, witness = is_degraded(second, first)
        assert not verdict and witness is None

    def test_bec_bsc_threshold(self):
        # BSC(p) is a degraded version of BEC(eps) exactly when eps <= 2p
        assert is_degraded(bec(0.19), bsc(0.1))[0]
        assert not is_degraded(bec(0.21), bsc(0.1))[0]

    def test_input_alphabet_mismatch(self):
        from secrd.probs import ConditionalPmf

        ternary_in = ConditionalPmf(bec(0.1).output, bec(0.1).output, np.eye(3))
        with pytest.raises(InvalidArgument):
            is_degraded(bec(0.1), ternary_in)


class TestMoreCapable:
    def test_matches_threshold_on_binary_model(self):
        h = binary_entropy(0.1)
        below = build_source(BecBscParams(0.1, h - 0.01))
        above = build_source(BecBscParams(0.1, h + 0.01))
        assert is_more_capable(below) == (True, False)
        assert is_more_capable(above) == (False, True)


class TestClassify:
    def test_thresholds_at_p01(self):
        for eps, expect in [
            (0.19, ("yes", "yes", "yes")),
            (0.21, ("no", "yes", "yes")),
            (0.35, ("no", "yes", "yes")),
            (0.37, ("no", "no", "yes")),
            (0.46, ("no", "no", "yes")),
            (0.48, ("no", "no", "no")),
        ]:
            v = classify_bec_bsc(BecBscParams(0.1, eps))
            got = ("yes" if v.degraded[0] else "no", v.less_noisy[0],
                   "yes" if v.more_capable[0] else "no")
            assert got == expect, f"eps={eps}"

    def test_reverse_direction_degenerate_only(self):
        assert classify_bec_bsc(BecBscParams(0.0, 0.3)).degraded[1]
        assert not classify_bec_bsc(BecBscParams(0.1, 0.3)).degraded[1]

    def test_record_format(self):
        rec = classify_bec_bsc(BecBscParams(0.1, 0.1)).to_record()
        assert rec == ("degraded=yes less_noisy=yes more_capable=yes "
                       "rev_degraded=no rev_less_noisy=no rev_more_capable=no")


class TestVerdictHierarchy:
    def test_degraded_implies_less_noisy(self):
        with pytest.raises(InvalidArgument):
            OrderingVerdict((True, False), ("no", "no"), (True, False))

    def test_less_noisy_implies_more_capable(self):
        with pytest.raises(InvalidArgument):
            OrderingVerdict((False, False), ("yes", "no"), (False, False))


class TestLessNoisySearch:
    def test_finds_counterexample_between_thresholds(self):
        # more capable but not less noisy: 4p(1-p) < eps < h2(p)
        src = build_source(BecBscParams(0.1, 0.40))
        tag, channel = less_noisy_search(src, resolution=40)
        assert tag == "counterexample"
        assert channel.rows.shape == (2, 2)

    def test_no_violation_inside_less_noisy_zone(self):
        src = build_source(BecBscParams(0.1, 0.30))
        tag, _ = less_noisy_search(src, resolution=40)
        assert tag == "no-violation"

    def test_u_size_cap(self):
        src = build_source(BecBscParams(0.1, 0.3))
        with pytest.raises(InvalidArgument):
            less_noisy_search(src, u_size=4)


def test_side_channels_recover_constructors():
    src = build_source(BecBscParams(0.1, 0.4))
    ch_b, ch_e = side_channels(src)
    np.testing.assert_allclose(ch_b.rows, bec(0.4).rows, atol=1e-12)
    np.testing.assert_allclose(ch_e.rows, bsc(0.1).rows, atol=1e-12)
