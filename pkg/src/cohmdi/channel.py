"""Analytic click statistics of the untrusted middle node.

Both pulses meet on a 50:50 beamsplitter followed by two threshold
detectors D_c (constructive port) and D_d (destructive port).  Loss from
each transmitter to the node is a beamsplitter of intensity transmittance
sqrt(eta), so the overall system loss is 10*log10(1/eta) dB.  A round
succeeds when exactly one detector clicks.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .states import SourceModel


@dataclass(frozen=True)
class ChannelModel:
    """Overall transmittance eta in (0, 1] and per-gate dark-count
    probability p_d in [0, 1)."""

    eta: float
    p_d: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0.0 <= self.p_d < 1.0:
            raise ValueError(f"p_d must lie in [0, 1), got {self.p_d}")

    @classmethod
    def from_loss_db(cls, loss_db: float, p_d: float = 0.0) -> "ChannelModel":
        if loss_db < 0.0:
            raise ValueError(f"loss_db must be >= 0, got {loss_db}")
        return cls(eta=10.0 ** (-loss_db / 10.0), p_d=p_d)

    @property
    def loss_db(self) -> float:
        return 10.0 * math.log10(1.0 / self.eta)

    @property
    def sqrt_eta(self) -> float:
        """Intensity transmittance of each arm."""
        return math.sqrt(self.eta)


def yield_omega_c(nu: complex, omega: complex, ch: ChannelModel) -> float:
    """Probability that only D_c clicks, given input amplitudes (nu, omega).

    (1-p_d)^2 * exp(-A) * (1 - exp(-B)) + p_d (1-p_d), where A and B are the
    post-splitter intensities of the destructive and constructive ports:
        A = sqrt(eta) * ((|nu|^2+|omega|^2)/2 - |nu||omega| cos(phi_A-phi_B))
        B = sqrt(eta) * ((|nu|^2+|omega|^2)/2 + |nu||omega| cos(phi_A-phi_B))
    The relative phase cos(phi_A - phi_B) is kept so the model generalizes,
    although the evaluation assumes no channel misalignment.
    """
    nu = complex(nu)
    omega = complex(omega)
    r1, r2 = abs(nu), abs(omega)
    cos_rel = math.cos(cmath.phase(nu) - cmath.phase(omega)) if r1 > 0 and r2 > 0 else 1.0
    half_sum = (r1 * r1 + r2 * r2) / 2.0
    cross = r1 * r2 * cos_rel
    a = ch.sqrt_eta * (half_sum - cross)
    b = ch.sqrt_eta * (half_sum + cross)
    pd = ch.p_d
    return (1.0 - pd) ** 2 * math.exp(-a) * (-math.expm1(-b)) + pd * (1.0 - pd)


def yield_omega_d(nu: complex, omega: complex, ch: ChannelModel) -> float:
    """Probability that only D_d clicks; equals the D_c expression with the
    phase of omega flipped (Bob's bit flip)."""
    return yield_omega_c(nu, -omega, ch)


def yield_success(nu: complex, omega: complex, ch: ChannelModel) -> float:
    """Probability that exactly one detector clicks (either port)."""
    return yield_omega_c(nu, omega, ch) + yield_omega_d(nu, omega, ch)


@dataclass(frozen=True)
class YieldTable:
    """Per-pair click probabilities for the nine setting pairs.

    y_c and y_d are the exclusive one-detector outcomes; y_success is their
    union.  All tables are 3x3 in SETTINGS order.
    """

    y_c: np.ndarray
    y_d: np.ndarray

    @property
    def y_success(self) -> np.ndarray:
        return self.y_c + self.y_d


def yield_tables(src: SourceModel, ch: ChannelModel) -> YieldTable:
    """Evaluate the click model on all nine setting pairs of a source."""
    amps = src.amplitudes()
    y_c = np.array([[yield_omega_c(n, o, ch) for o in amps] for n in amps])
    y_d = np.array([[yield_omega_d(n, o, ch) for o in amps] for n in amps])
    return YieldTable(y_c=y_c, y_d=y_d)


def bit_error_rate(alpha: float, ch: ChannelModel) -> float:
    """Key-round bit error rate p_d / (2 p_d + exp(2 sqrt(eta) alpha^2) - 1).

    Vanishes with p_d and tends to 1/2 as the signal dies out.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    denom = 2.0 * ch.p_d + math.expm1(2.0 * ch.sqrt_eta * alpha * alpha)
    if denom <= 0.0:
        return 0.5
    return min(0.5, ch.p_d / denom)


def gain_and_gamma_obs(src: SourceModel, ch: ChannelModel,
                       yields: YieldTable | None = None) -> tuple[float, float]:
    """Gain Q and the key-round success probability gamma_obs.

    gamma_obs averages the success yield over the four key-key pairs; the
    gain multiplies by both parties' key-state priors.
    """
    if yields is None:
        yields = yield_tables(src, ch)
    gamma_obs = float(yields.y_success[:2, :2].mean())
    q = src.p_key ** 2 * gamma_obs
    return q, gamma_obs
