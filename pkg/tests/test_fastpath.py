import numpy as np
import pytest

from cohmdi import fastpath
from cohmdi.channel import ChannelModel
from cohmdi.keyrate import key_rate


def test_backend_reported():
    assert fastpath.BACKEND in ("compiled", "python")


def test_python_fallback_matches_reference_exactly():
    eps9 = np.full(9, 1e-6)
    ch = ChannelModel.from_loss_db(8.0, 1e-8)
    ref = key_rate(0.21, 0.0, 1e-6, ch).R
    assert fastpath.rate_scalar_python(0.21, 0.0, eps9, ch.eta, ch.p_d,
                                       1.16, 1.0, True) == ref


@pytest.mark.skipif(fastpath.rate_scalar_compiled is None,
                    reason="compiled extension not built")
class TestCompiledKernel:
    def test_matches_reference_over_grid(self):
        worst = 0.0
        for alpha in (0.05, 0.1, 0.3, 0.7, 1.2, 1.5):
            for loss in (0.0, 5.0, 13.0, 25.0):
                for eps in (0.0, 1e-7, 1e-6, 1e-4):
                    ch = ChannelModel.from_loss_db(loss, 1e-8)
                    ref = key_rate(alpha, 0.0, eps, ch).R
                    fast = fastpath.rate_scalar(alpha, 0.0, np.full(9, eps),
                                                ch.eta, ch.p_d, 1.16, 1.0, True)
                    worst = max(worst, abs(ref - fast))
        assert worst < 1e-12

    def test_union_mode_matches(self):
        ch = ChannelModel.from_loss_db(6.0, 1e-8)
        ref = key_rate(0.3, 0.0, 1e-6, ch, povm="union").R
        fast = fastpath.rate_scalar(0.3, 0.0, np.full(9, 1e-6), ch.eta, ch.p_d,
                                    1.16, 1.0, False)
        assert fast == pytest.approx(ref, abs=1e-12)

    def test_per_pair_epsilon(self):
        eps = np.full((3, 3), 1e-6)
        eps[2, 2] = 1e-4
        ch = ChannelModel.from_loss_db(4.0, 1e-8)
        ref = key_rate(0.25, 0.0, eps, ch).R
        fast = fastpath.rate_scalar(0.25, 0.0, eps.reshape(-1).copy(), ch.eta,
                                    ch.p_d, 1.16, 1.0, True)
        assert fast == pytest.approx(ref, abs=1e-12)

    def test_third_state_amplitude(self):
        import math
        gamma = math.sqrt(1e-5)
        ch = ChannelModel.from_loss_db(4.0, 1e-8)
        ref = key_rate(0.25, gamma, 1e-6, ch).R
        fast = fastpath.rate_scalar(0.25, gamma, np.full(9, 1e-6), ch.eta,
                                    ch.p_d, 1.16, 1.0, True)
        assert fast == pytest.approx(ref, abs=1e-12)

    def test_degenerate_inputs_return_zero(self):
        eps9 = np.zeros(9)
        assert fastpath.rate_scalar_compiled(0.0, 0.0, eps9, 1.0, 0.0, 1.16, 1.0, True) == 0.0
        assert fastpath.rate_scalar_compiled(1e-9, 0.0, eps9, 1.0, 0.0, 1.16, 1.0, True) == 0.0
        bad = np.full(9, 2.0)
        assert fastpath.rate_scalar_compiled(0.3, 0.0, bad, 1.0, 0.0, 1.16, 1.0, True) == 0.0

    def test_p_key_scaling(self):
        eps9 = np.full(9, 1e-7)
        ch = ChannelModel.from_loss_db(2.0, 1e-8)
        full = fastpath.rate_scalar(0.2, 0.0, eps9, ch.eta, ch.p_d, 1.16, 1.0, True)
        half = fastpath.rate_scalar(0.2, 0.0, eps9, ch.eta, ch.p_d, 1.16, 0.5, True)
        assert half == pytest.approx(0.25 * full, rel=1e-12)
