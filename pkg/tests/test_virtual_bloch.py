import math

import numpy as np
import pytest

from cohmdi.states import build_embedding
from cohmdi.virtual_bloch import (
    DegenerateStateError,
    SingularBlochError,
    bloch_vector,
    build_bloch_system,
    reference_pair_states,
    virtual_states,
)


def direct_virtual_states(emb):
    """Independent construction: (1/4) sum (-1)^(jj'+ss') |K_j'> (x) |K_s'>."""
    key = [emb.ref_coords[0], emb.ref_coords[1]]
    raw = {}
    for j in (0, 1):
        for s in (0, 1):
            vec = np.zeros(4)
            for jp in (0, 1):
                for sp in (0, 1):
                    vec += (-1.0) ** (j * jp + s * sp) * np.kron(key[jp], key[sp])
            raw[(j, s)] = vec / 4.0
    return raw


def random_real_bounded_operator(rng, dim=4):
    g = rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(g)
    return (q * rng.uniform(0.0, 1.0, dim)) @ q.T


class TestVirtualStates:
    def test_against_direct_construction(self):
        for alpha in (0.2, 0.5, 1.0):
            emb = build_embedding(alpha, 0.0)
            ens = virtual_states(emb)
            raw = direct_virtual_states(emb)
            for j in (0, 1):
                for s in (0, 1):
                    norm_sq = float(raw[(j, s)] @ raw[(j, s)])
                    assert ens.p_vir[j, s] == pytest.approx(norm_sq, abs=1e-14)
                    np.testing.assert_allclose(
                        ens.vir_states[j, s], raw[(j, s)] / math.sqrt(norm_sq),
                        atol=1e-12,
                    )

    def test_weights_closed_form(self):
        emb = build_embedding(0.5, 0.0)
        ens = virtual_states(emb)
        kappa = emb.kappa
        assert ens.p_vir[0, 0] == pytest.approx(((1 + kappa) / 2) ** 2, abs=1e-14)
        assert ens.p_vir[0, 1] == pytest.approx(
            (1 + kappa) / 2 * (1 - kappa) / 2, abs=1e-14
        )

    def test_completeness_and_norms(self):
        for alpha in (0.1, 0.7, 1.4):
            ens = virtual_states(build_embedding(alpha, 0.0))
            assert ens.p_vir.sum() == pytest.approx(1.0, abs=1e-12)
            for j in (0, 1):
                for s in (0, 1):
                    v = ens.vir_states[j, s]
                    assert float(v @ v) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_state_error(self):
        # alpha just above the embedding floor: odd-cat weight squared
        # underflows the normalization guard
        emb = build_embedding(2e-8, 0.0)
        with pytest.raises(DegenerateStateError):
            virtual_states(emb)


class TestBlochVector:
    def test_basis_state(self):
        np.testing.assert_allclose(bloch_vector([1.0, 0.0]), [1.0, 0.0, 1.0])

    def test_minus_alpha_state(self):
        emb = build_embedding(0.5, 0.0)
        kappa = emb.kappa
        s = math.sqrt(1 - kappa * kappa)
        np.testing.assert_allclose(
            bloch_vector([kappa, s]),
            [1.0, 2 * kappa * s, 2 * kappa * kappa - 1.0],
            atol=1e-14,
        )

    def test_pure_states_on_sphere(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            v = rng.standard_normal(2)
            v /= np.linalg.norm(v)
            _, x, z = bloch_vector(v)
            assert x * x + z * z == pytest.approx(1.0, abs=1e-12)

    def test_rejects_complex(self):
        with pytest.raises(ValueError):
            bloch_vector(np.array([1.0 / math.sqrt(2), 1j / math.sqrt(2)]))


class TestBlochSystem:
    def test_kronecker_structure(self):
        system = build_bloch_system(build_embedding(0.4, 0.0))
        np.testing.assert_allclose(
            system.S, np.kron(system.single, system.single), atol=1e-14
        )

    def test_solve_residual(self):
        for alpha, gamma in [(0.1, 0.0), (0.5, 1e-3), (1.2, 0.0)]:
            system = build_bloch_system(build_embedding(alpha, gamma))
            residual = system.f_obj @ system.S - system.p_vir_diag @ system.S_vir
            assert np.max(np.abs(residual)) < 1e-10
            assert np.all(np.isfinite(system.f_obj))

    def test_reconstruction_identity(self):
        # objective-weighted reference yields = direct virtual expectation
        rng = np.random.default_rng(0)
        for alpha, gamma in [(0.3, 0.0), (0.8, 0.0), (0.3, math.sqrt(1e-5))]:
            emb = build_embedding(alpha, gamma)
            system = build_bloch_system(emb)
            pairs = reference_pair_states(emb).reshape(9, 4)
            ens = virtual_states(emb)
            for _ in range(200):
                op = random_real_bounded_operator(rng)
                lhs = sum(
                    system.f_obj[i] * float(pairs[i] @ op @ pairs[i]) for i in range(9)
                )
                rhs = sum(
                    ens.p_vir[j, j]
                    * float(ens.vir_states[j, j] @ op @ ens.vir_states[j, j])
                    for j in (0, 1)
                )
                assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_identity_operator(self):
        emb = build_embedding(0.5, 0.0)
        system = build_bloch_system(emb)
        ens = virtual_states(emb)
        assert system.f_obj.sum() * 1.0 == pytest.approx(
            ens.p_vir[0, 0] + ens.p_vir[1, 1], abs=1e-12
        )

    def test_zero_operator(self):
        emb = build_embedding(0.5, 0.0)
        system = build_bloch_system(emb)
        pairs = reference_pair_states(emb).reshape(9, 4)
        op = np.zeros((4, 4))
        lhs = sum(system.f_obj[i] * float(pairs[i] @ op @ pairs[i]) for i in range(9))
        assert lhs == 0.0

    def test_bloch_points_distinct_noncollinear(self):
        for alpha in np.linspace(0.05, 1.5, 15):
            for gamma in (0.0, 1e-3):
                system = build_bloch_system(build_embedding(alpha, gamma))
                pts = system.single[:, 1:]  # (X, Z) coordinates
                for i in range(3):
                    for j in range(i + 1, 3):
                        assert np.linalg.norm(pts[i] - pts[j]) > 1e-9
                v1, v2 = pts[1] - pts[0], pts[2] - pts[0]
                area = abs(v1[0] * v2[1] - v1[1] * v2[0])
                assert area > 1e-12

    def test_singular_error_nearly_collinear(self):
        with pytest.raises(SingularBlochError):
            build_bloch_system(build_embedding(1e-6, 0.0))
