"""Coherent-state algebra and the qubit embedding of the reference set.

Each party chooses between two key states |a>, |-a> and a third state |g>
used for parameter estimation (g = 0 is a perfect vacuum).  The two key
states span a qubit; the third reference state is the normalized projection
of |g> onto that span.  Everything downstream (Bloch decompositions,
fidelity floors) is expressed in the orthonormal basis {|0_o>, |1_o>} with
|0_o> along |a>.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

# Canonical ordering of the per-party settings.  All 3x3 tables in this
# package (yields, epsilons, fidelity floors, objective coefficients) are
# indexed [row = Alice's setting, column = Bob's setting] in this order.
SETTINGS = ("plus", "minus", "third")
PLUS, MINUS, THIRD = range(3)

# Radicands within this distance below zero are treated as rounding noise
# and clipped before taking square roots.
_RADICAND_TOL = 1e-12


class DegenerateEmbeddingError(ValueError):
    """The two key states are too close to span a qubit (alpha too small)."""


def _setting_index(setting) -> int:
    if isinstance(setting, str):
        return SETTINGS.index(setting)
    idx = int(setting)
    if idx not in (0, 1, 2):
        raise ValueError(f"invalid setting {setting!r}")
    return idx


def coherent_overlap(nu: complex, omega: complex) -> complex:
    """Inner product <nu|omega> of two coherent states.

    Closed form exp(-(|nu|^2 + |omega|^2)/2 + conj(nu)*omega); the modulus
    never exceeds 1.
    """
    nu = complex(nu)
    omega = complex(omega)
    return cmath.exp(-(abs(nu) ** 2 + abs(omega) ** 2) / 2.0 + nu.conjugate() * omega)


def _clipped_sqrt(x: float) -> float:
    if x < 0.0:
        if x < -_RADICAND_TOL:
            raise ValueError(f"radicand {x} below tolerance")
        x = 0.0
    return math.sqrt(x)


@dataclass(frozen=True)
class QubitEmbedding:
    """Qubit-space coordinates of the reference set {|a>, |-a>, |g'>}.

    kappa      overlap <a|-a> = exp(-2 a^2) for real a
    c1, c2     expansion coefficients of |g> over {|1_o>, |2_o>}
    xi         squared norm of the projection of |g> onto the qubit span
    ref_coords rows are the (|0_o>, |1_o>) coordinates of |a>, |-a>, |g'>
    """

    alpha: float
    gamma: float
    kappa: float
    c1: float
    c2: float
    xi: float
    ref_coords: np.ndarray = field(repr=False)

    def overlap_alpha_gamma(self) -> float:
        """<a|g> for the stored (real) amplitudes."""
        return coherent_overlap(self.alpha, self.gamma).real


def build_embedding(alpha: float, gamma: float = 0.0) -> QubitEmbedding:
    """Construct the qubit embedding for key amplitude alpha and third-state
    amplitude gamma (both real, gamma >= 0; gamma = 0 is the vacuum).

    Solves the two constraint equations
        <-a|g> = <-a|a><a|g> + c1*sqrt(1-kappa^2)
        |<a|g>|^2 + c1^2 + c2^2 = 1
    with c2 chosen real nonnegative.

    Raises
    ------
    DegenerateEmbeddingError
        if 1 - kappa^2 < 1e-15, i.e. |a> and |-a> do not span a qubit.
    ValueError
        if gamma coincides with +alpha or -alpha (the third state must be
        distinct from the key states, else the Bloch system is singular).
    """
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be positive and finite, got {alpha}")
    if not (gamma >= 0.0 and math.isfinite(gamma)):
        raise ValueError(f"gamma must be >= 0 and finite, got {gamma}")
    if abs(gamma - alpha) < 1e-12 or abs(gamma + alpha) < 1e-12:
        raise ValueError("gamma must differ from +alpha and -alpha")

    kappa = coherent_overlap(alpha, -alpha).real
    one_minus_k2 = 1.0 - kappa * kappa
    if one_minus_k2 < 1e-15:
        raise DegenerateEmbeddingError(
            f"1 - kappa^2 = {one_minus_k2:.3e} at alpha={alpha}; key states "
            "nearly identical"
        )
    s = math.sqrt(one_minus_k2)

    g_plus = coherent_overlap(alpha, gamma).real    # <a|g>
    g_minus = coherent_overlap(-alpha, gamma).real  # <-a|g>
    c1 = (g_minus - kappa * g_plus) / s
    xi = g_plus * g_plus + c1 * c1
    c2 = _clipped_sqrt(1.0 - xi)

    sqrt_xi = math.sqrt(xi)
    ref_coords = np.array(
        [
            [1.0, 0.0],
            [kappa, s],
            [g_plus / sqrt_xi, c1 / sqrt_xi],
        ]
    )
    return QubitEmbedding(
        alpha=alpha, gamma=gamma, kappa=kappa, c1=c1, c2=c2, xi=xi,
        ref_coords=ref_coords,
    )


def varsigma(nu, omega, emb: QubitEmbedding) -> float:
    """Overlap between the ideal pair state and the reference pair state.

    Equals xi when both settings are the third state, sqrt(xi) when exactly
    one is, and 1 for key-key pairs.
    """
    n_third = (_setting_index(nu) == THIRD) + (_setting_index(omega) == THIRD)
    if n_third == 2:
        return emb.xi
    if n_third == 1:
        return math.sqrt(emb.xi)
    return 1.0


def varsigma_table(emb: QubitEmbedding) -> np.ndarray:
    """All nine varsigma values as a 3x3 array in SETTINGS order."""
    out = np.ones((3, 3))
    sq = math.sqrt(emb.xi)
    out[THIRD, :] = sq
    out[:, THIRD] = sq
    out[THIRD, THIRD] = emb.xi
    return out


def delta_pair_lower(nu, omega, epsilon: float, emb: QubitEmbedding) -> float:
    """Fidelity floor between the transmitted and reference pair states.

    max(0, sqrt(1-eps)*varsigma - sqrt(eps)*sqrt(1-varsigma^2)); the value
    is clamped at zero because a negative floor carries no information and
    the deviation bounds require delta in [0, 1].
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    vs = varsigma(nu, omega, emb)
    val = math.sqrt(1.0 - epsilon) * vs - math.sqrt(epsilon) * _clipped_sqrt(1.0 - vs * vs)
    return max(0.0, val)


def delta_table(epsilon: np.ndarray, emb: QubitEmbedding) -> np.ndarray:
    """Fidelity floors for all nine setting pairs (3x3, SETTINGS order)."""
    eps = np.asarray(epsilon, dtype=float)
    vs = varsigma_table(emb)
    val = np.sqrt(1.0 - eps) * vs - np.sqrt(eps) * np.sqrt(np.clip(1.0 - vs * vs, 0.0, None))
    return np.maximum(0.0, val)


@dataclass(frozen=True)
class SourceModel:
    """Transmitter description: amplitudes, side-channel budget, priors.

    epsilon is a 3x3 table of per-pair fidelity parameters in SETTINGS
    order; p gives each party's selection probabilities over SETTINGS.
    """

    alpha: float
    gamma: float
    epsilon: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.epsilon, dtype=float)
        if eps.shape != (3, 3):
            raise ValueError(f"epsilon table must be 3x3, got {eps.shape}")
        if np.any(eps < 0.0) or np.any(eps > 1.0):
            raise ValueError("all epsilon values must lie in [0, 1]")
        p = np.asarray(self.p, dtype=float)
        if p.shape != (3,):
            raise ValueError(f"p must have 3 entries, got {p.shape}")
        if np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("selection probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "p", p)

    @classmethod
    def uniform(cls, alpha: float, epsilon: float, gamma: float = 0.0,
                p=(0.5, 0.5, 0.0)) -> "SourceModel":
        """Source with the same epsilon on all nine setting pairs."""
        return cls(alpha=alpha, gamma=gamma,
                   epsilon=np.full((3, 3), float(epsilon)), p=np.asarray(p, dtype=float))

    @property
    def p_key(self) -> float:
        """Each party's total key-state probability."""
        return float(self.p[PLUS] + self.p[MINUS])

    @property
    def gamma_sq(self) -> float:
        return self.gamma * self.gamma

    def amplitudes(self) -> np.ndarray:
        """Per-setting field amplitudes in SETTINGS order."""
        return np.array([self.alpha, -self.alpha, self.gamma])

    def key_epsilons(self) -> np.ndarray:
        """2x2 block of epsilon over the four key-key setting pairs."""
        return self.epsilon[:2, :2]
