import math

import numpy as np
import pytest

from cohmdi.bounds import (
    BoundInputs,
    G_minus,
    G_plus,
    ZeroGainError,
    aggregated_gamma_upper,
    delta_vir_lower,
    g_pm,
    gamma_ref_upper,
    phase_error_upper,
)
from cohmdi.channel import ChannelModel, YieldTable, gain_and_gamma_obs, yield_tables
from cohmdi.keyrate import key_rate
from cohmdi.states import SourceModel, build_embedding, delta_table
from cohmdi.virtual_bloch import build_bloch_system, reference_pair_states, virtual_states


def random_bounded_operator(rng, dim, real=False):
    g = rng.standard_normal((dim, dim))
    if not real:
        g = g + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(g)
    return (q * rng.uniform(0.0, 1.0, dim)) @ q.conj().T


class TestGPM:
    def test_perfect_overlap_is_identity(self):
        for y in np.linspace(0.0, 1.0, 21):
            assert g_pm(y, 1.0, +1) == pytest.approx(y, abs=1e-15)
            assert g_pm(y, 1.0, -1) == pytest.approx(y, abs=1e-15)

    def test_endpoints(self):
        for d in np.linspace(0.0, 1.0, 11):
            assert g_pm(0.0, d, +1) == pytest.approx(1.0 - d * d, abs=1e-15)
            assert g_pm(1.0, d, -1) == pytest.approx(d * d, abs=1e-15)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            g_pm(-0.1, 0.5, +1)
        with pytest.raises(ValueError):
            g_pm(0.5, 1.1, +1)


class TestGPlusMinus:
    def test_saturation_cases(self):
        for d in (0.0, 0.4, 0.9):
            for y in np.linspace(d * d, 1.0, 7):
                assert G_plus(y, d) == 1.0
            for y in np.linspace(0.0, 1.0 - d * d, 7):
                assert G_minus(y, d) == 0.0

    def test_order(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            y, d = rng.uniform(0, 1, 2)
            assert G_minus(y, d) <= G_plus(y, d)
            assert 0.0 <= G_minus(y, d) <= 1.0
            assert 0.0 <= G_plus(y, d) <= 1.0

    def test_sandwich_random_states(self):
        # Y_A bracketed by G-+(Y_R, |<A|R>|) for random projective data
        rng = np.random.default_rng(42)
        for _ in range(2000):
            dim = int(rng.integers(2, 7))
            op = random_bounded_operator(rng, dim)
            a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            a /= np.linalg.norm(a)
            r = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            r /= np.linalg.norm(r)
            delta = abs(np.vdot(a, r))
            y_a = min(1.0, max(0.0, float(np.real(a.conj() @ op @ a))))
            y_r = min(1.0, max(0.0, float(np.real(r.conj() @ op @ r))))
            assert G_minus(y_r, delta) - 1e-12 <= y_a <= G_plus(y_r, delta) + 1e-12

    def test_concavity_and_monotonicity(self):
        ys = np.linspace(0.0, 1.0, 41)
        for d in (0.0, 0.3, 0.8, 0.99, 1.0):
            gp = [G_plus(y, d) for y in ys]
            gm = [G_minus(y, d) for y in ys]
            assert all(b >= a - 1e-15 for a, b in zip(gp, gp[1:]))
            assert all(b >= a - 1e-15 for a, b in zip(gm, gm[1:]))
            for i in range(len(ys)):
                for j in range(i, len(ys), 5):
                    mid = (ys[i] + ys[j]) / 2
                    assert G_plus(mid, d) >= (gp[i] + gp[j]) / 2 - 1e-12
                    assert G_minus(mid, d) <= (gm[i] + gm[j]) / 2 + 1e-12

    def test_monotone_in_delta(self):
        # weaker overlap floor can only loosen the upper bound
        for y in np.linspace(0.0, 1.0, 11):
            ds = np.linspace(0.0, 1.0, 21)
            vals = [G_plus(y, d) for d in ds]
            assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


class TestDeltaVirLower:
    def test_uniform(self):
        for eps in (0.0, 1e-6, 0.3):
            assert delta_vir_lower(np.full(4, eps)) == pytest.approx(
                math.sqrt(1.0 - eps), abs=1e-15
            )

    def test_mixed(self):
        assert delta_vir_lower([0.0, 0.0, 1.0, 1.0]) == pytest.approx(0.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            delta_vir_lower([0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            delta_vir_lower([0.0, 0.0, 0.0, 1.5])


class TestGammaRefUpper:
    def _system(self, alpha=0.3, gamma=0.0):
        emb = build_embedding(alpha, gamma)
        return emb, build_bloch_system(emb)

    def test_tight_at_unit_delta(self):
        # with delta = 1 the bound reduces to the exact linear functional
        rng = np.random.default_rng(1)
        emb, system = self._system()
        pairs = reference_pair_states(emb).reshape(9, 4)
        ens = virtual_states(emb)
        for _ in range(50):
            op = random_bounded_operator(rng, 4, real=True)
            y_ref = np.array([float(p @ op @ p) for p in pairs]).reshape(3, 3)
            gamma_ref = sum(
                ens.p_vir[j, j] * float(ens.vir_states[j, j] @ op @ ens.vir_states[j, j])
                for j in (0, 1)
            )
            got = gamma_ref_upper(y_ref, np.ones((3, 3)), system.f_obj_table)
            assert got == pytest.approx(gamma_ref, abs=1e-10)

    def test_zero_yields(self):
        _, system = self._system()
        f = system.f_obj_table
        deltas = np.full((3, 3), 0.9)
        expected = float(np.sum(f[f > 0.0]) * (1.0 - 0.81))
        assert gamma_ref_upper(np.zeros((3, 3)), deltas, f) == pytest.approx(
            expected, abs=1e-12
        )

    def test_monotone_in_positive_yields(self):
        emb, system = self._system()
        f = system.f_obj_table
        deltas = delta_table(np.full((3, 3), 1e-6), emb)
        rng = np.random.default_rng(9)
        base = rng.uniform(0.1, 0.9, (3, 3))
        base_val = gamma_ref_upper(base, deltas, f)
        for i in range(3):
            for j in range(3):
                if f[i, j] > 0:
                    bumped = base.copy()
                    bumped[i, j] = min(1.0, bumped[i, j] + 0.05)
                    assert gamma_ref_upper(bumped, deltas, f) >= base_val - 1e-12

    def test_concave_in_yields(self):
        emb, system = self._system()
        f = system.f_obj_table
        deltas = delta_table(np.full((3, 3), 1e-3), emb)
        rng = np.random.default_rng(17)
        for _ in range(200):
            y1 = rng.uniform(0, 1, (3, 3))
            y2 = rng.uniform(0, 1, (3, 3))
            mid = (y1 + y2) / 2
            assert gamma_ref_upper(mid, deltas, f) >= (
                gamma_ref_upper(y1, deltas, f) + gamma_ref_upper(y2, deltas, f)
            ) / 2 - 1e-12


def _bound_inputs(alpha=0.3, eps=1e-6, eta=0.5, p_d=1e-8):
    emb = build_embedding(alpha, 0.0)
    system = build_bloch_system(emb)
    src = SourceModel.uniform(alpha, eps)
    ch = ChannelModel(eta=eta, p_d=p_d)
    yields = yield_tables(src, ch)
    _, gamma_obs = gain_and_gamma_obs(src, ch, yields)
    return BoundInputs(
        yields=yields,
        deltas=delta_table(src.epsilon, emb),
        delta_vir_L=delta_vir_lower(src.key_epsilons()),
        f_obj=system.f_obj_table,
        gamma_obs=gamma_obs,
    )


class TestPhaseErrorUpper:
    def test_zero_gain_raises(self):
        inp = _bound_inputs()
        bad = BoundInputs(yields=inp.yields, deltas=inp.deltas,
                          delta_vir_L=inp.delta_vir_L, f_obj=inp.f_obj,
                          gamma_obs=0.0)
        with pytest.raises(ZeroGainError):
            phase_error_upper(bad)

    def test_no_fidelity_information_is_vacuous(self):
        inp = _bound_inputs()
        vacuous = BoundInputs(yields=inp.yields, deltas=inp.deltas,
                              delta_vir_L=0.0, f_obj=inp.f_obj,
                              gamma_obs=inp.gamma_obs)
        for povm in ("split", "union"):
            bound = phase_error_upper(vacuous, povm=povm)
            assert bound.gamma_U == 1.0
            assert bound.e_ph_U == 1.0

    def test_saturated_reference_bound(self):
        # force Gamma_ref^U >= 1: all positive-coefficient yields at 1
        inp = _bound_inputs()
        f = np.asarray(inp.f_obj)
        ones = np.where(f > 0, 1.0, 0.0)
        tab = YieldTable(y_c=ones, y_d=np.zeros((3, 3)))
        sat = BoundInputs(yields=tab, deltas=np.ones((3, 3)), delta_vir_L=0.9,
                          f_obj=inp.f_obj, gamma_obs=0.5)
        bound = phase_error_upper(sat, povm="union")
        assert gamma_ref_upper(tab.y_success, np.ones((3, 3)), f) >= 1.0
        assert bound.gamma_U == 1.0

    def test_split_vs_union_both_valid(self):
        inp = _bound_inputs()
        split = phase_error_upper(inp, povm="split")
        union = phase_error_upper(inp, povm="union")
        assert 0.0 <= union.e_ph_U <= 1.0
        assert 0.0 <= split.e_ph_U <= 1.0
        assert split.gamma_U >= 0.0 and union.gamma_U >= 0.0
        assert split.e_ph_U == pytest.approx(
            min(1.0, split.gamma_U / inp.gamma_obs), abs=1e-15
        )

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            phase_error_upper(_bound_inputs(), povm="bogus")

    def test_e_ph_monotone_in_epsilon(self):
        ch = ChannelModel(eta=0.5, p_d=1e-8)
        values = [
            key_rate(0.3, 0.0, eps, ch).e_ph_U
            for eps in (0.0, 1e-7, 1e-6, 1e-5, 1e-4)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestAggregatedGammaUpper:
    def _setup(self):
        emb = build_embedding(0.3, 0.0)
        system = build_bloch_system(emb)
        deltas = delta_table(np.full((3, 3), 1e-3), emb)
        d_vir = math.sqrt(1 - 1e-3)
        p_pair = np.full((3, 3), 1 / 9)
        p_test = np.full((3, 3), 0.5)
        p_key = 1.0 - float((p_pair * p_test).sum())
        return system.f_obj_table, deltas, d_vir, p_pair, p_test, p_key

    def test_iid_equality(self):
        f, deltas, d_vir, p_pair, p_test, p_key = self._setup()
        rng = np.random.default_rng(2)
        n = 40
        for _ in range(20):
            y_star = rng.uniform(0, 1, (3, 3))
            counts = n * y_star * p_pair * p_test
            agg = aggregated_gamma_upper(counts, n, p_pair, p_test, p_key,
                                         deltas, d_vir, f)
            inner = min(1.0, max(0.0, gamma_ref_upper(y_star, deltas, f)))
            single = n * p_key * G_plus(inner, d_vir)
            assert agg == pytest.approx(single, abs=1e-10)

    def test_jensen_dominance(self):
        f, deltas, d_vir, p_pair, p_test, p_key = self._setup()
        rng = np.random.default_rng(8)
        n = 30
        for _ in range(100):
            rounds = rng.uniform(0, 1, (n, 3, 3))
            counts = rounds.sum(axis=0) * p_pair * p_test
            agg = aggregated_gamma_upper(counts, n, p_pair, p_test, p_key,
                                         deltas, d_vir, f)
            per_round = sum(
                p_key * G_plus(min(1.0, max(0.0, gamma_ref_upper(y, deltas, f))), d_vir)
                for y in rounds
            )
            assert agg >= per_round - 1e-10

    def test_single_round_reduction(self):
        f, deltas, d_vir, p_pair, p_test, p_key = self._setup()
        y = np.full((3, 3), 0.2)
        counts = y * p_pair * p_test
        agg = aggregated_gamma_upper(counts, 1, p_pair, p_test, p_key,
                                     deltas, d_vir, f)
        inner = min(1.0, max(0.0, gamma_ref_upper(y, deltas, f)))
        assert agg == pytest.approx(p_key * G_plus(inner, d_vir), abs=1e-12)

    def test_zero_probability_with_counts_rejected(self):
        f, deltas, d_vir, p_pair, p_test, p_key = self._setup()
        p_test = p_test.copy()
        p_test[2, 2] = 0.0
        counts = np.full((3, 3), 0.1)
        with pytest.raises(ValueError):
            aggregated_gamma_upper(counts, 10, p_pair, p_test, p_key,
                                   deltas, d_vir, f)
