"""Truncated-Fock-space simulation of the measurement node.

Independent brute-force route used to validate the closed-form click model
and the phase-error machinery: coherent states are expanded in the number
basis, the 50:50 beamsplitter acts as the exact photon-number-conserving
unitary, and threshold detectors reduce to vacuum/non-vacuum projectors.
Loss is applied in the amplitude domain, which is exact for the coherent
superpositions this protocol emits; the lost light is kept as explicit
environment factors where it matters (the virtual phase-error oracle).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import ChannelModel
from .states import coherent_overlap

_TAIL_LIMIT = 1e-12


class CutoffError(ValueError):
    """Photon-number cutoff too small for the requested amplitude."""


def default_n_max(alpha: float) -> int:
    """Cutoff rule sized for the largest post-interference amplitude
    sqrt(2)*alpha: max(20, ceil(8 * (sqrt(2) alpha)^2 + 15))."""
    return max(20, math.ceil(8.0 * 2.0 * alpha * alpha + 15.0))


def _poisson_tail(mean: float, n_max: int) -> float:
    """sum_{n > n_max} e^-mean mean^n / n!, summed directly in log space."""
    if mean == 0.0:
        return 0.0
    total = 0.0
    log_mean = math.log(mean)
    for n in range(n_max + 1, n_max + 400):
        term = math.exp(-mean + n * log_mean - math.lgamma(n + 1))
        total += term
        if term < total * 1e-18 or term == 0.0:
            break
    return total


@dataclass(frozen=True)
class FockState:
    """Amplitudes over the truncated number basis (1-D for one mode, 2-D
    with layout [n_first, n_second] for two).  No renormalization is
    applied; the neglected weight is carried in ``tail``."""

    n_max: int
    amplitudes: np.ndarray = field(repr=False)
    tail: float = 0.0

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def coherent_fock(beta: complex, n_max: int) -> FockState:
    """Expand |beta> over |0..n_max>: coefficients e^{-|b|^2/2} b^n/sqrt(n!).

    Raises CutoffError when the truncated weight exceeds 1e-12.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    beta = complex(beta)
    mean = abs(beta) ** 2
    tail = _poisson_tail(mean, n_max)
    if tail > _TAIL_LIMIT:
        raise CutoffError(
            f"truncation tail {tail:.3e} at n_max={n_max} for |beta|^2={mean:.4f}; "
            f"need n_max >= {default_n_max(abs(beta) / math.sqrt(2)):d}"
        )
    n = np.arange(n_max + 1)
    if mean == 0.0:
        amps = np.zeros(n_max + 1)
        amps[0] = 1.0
    else:
        mags = np.exp(
            -mean / 2.0 + n * math.log(abs(beta))
            - 0.5 * np.array([math.lgamma(k + 1) for k in n])
        )
        if beta.imag == 0.0:
            amps = mags if beta.real > 0.0 else mags * (-1.0) ** n
        else:
            amps = mags * (beta / abs(beta)) ** n
    return FockState(n_max=n_max, amplitudes=amps, tail=tail)


def two_mode(first: FockState, second: FockState) -> FockState:
    """Product state of two single-mode states with matching cutoffs."""
    if first.n_max != second.n_max:
        raise ValueError("cutoffs differ between modes")
    return FockState(
        n_max=first.n_max,
        amplitudes=np.outer(first.amplitudes, second.amplitudes),
        tail=first.tail + second.tail,
    )


@lru_cache(maxsize=8)
def _bs_matrix(n_max: int) -> np.ndarray:
    """Matrix of the 50:50 splitter on the two-mode truncated basis.

    Input |n, m> with n + m = N maps onto sum_p amp(p) |p, N-p> with
    amp(p) = 2^{-N/2} sqrt(p!(N-p)!/(n!m!)) [x^p] (1+x)^n (x-1)^m,
    the Hadamard convention a -> (c+d)/sqrt2, b -> (c-d)/sqrt2.  Exact and
    unitary on every complete total-photon sector N <= n_max; sectors above
    the per-mode cutoff lose the weight that falls outside the box.
    """
    d = n_max + 1
    rows = [np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)
            for n in range(d)]
    lg = np.array([math.lgamma(k + 1) for k in range(2 * d)])
    u = np.zeros((d * d, d * d))
    for n in range(d):
        for m in range(d):
            total = n + m
            signed = rows[m] * ((-1.0) ** (m - np.arange(m + 1)))
            conv = np.convolve(rows[n], signed)  # coefficients over p = 0..N
            p = np.arange(total + 1)
            amp = conv * np.exp(
                0.5 * (lg[p] + lg[total - p] - lg[n] - lg[m]) - 0.5 * total * math.log(2.0)
            )
            valid = (p <= n_max) & (total - p <= n_max)
            pv = p[valid]
            u[pv * d + (total - pv), n * d + m] = amp[valid]
    return u


def beamsplitter_5050(state: FockState) -> FockState:
    """Apply the 50:50 splitter unitary to a two-mode state."""
    if state.amplitudes.ndim != 2:
        raise ValueError("beamsplitter_5050 expects a two-mode state")
    d = state.n_max + 1
    out = (_bs_matrix(state.n_max) @ state.amplitudes.reshape(d * d)).reshape(d, d)
    return FockState(n_max=state.n_max, amplitudes=out, tail=state.tail)


@dataclass(frozen=True)
class ClickDistribution:
    """Joint threshold-detector outcome probabilities for one round."""

    p_c_only: float
    p_d_only: float
    p_both: float
    p_none: float

    @property
    def p_success(self) -> float:
        return self.p_c_only + self.p_d_only

    @property
    def total(self) -> float:
        return self.p_c_only + self.p_d_only + self.p_both + self.p_none


def threshold_click_distribution(state: FockState, p_d: float = 0.0) -> ClickDistribution:
    """Click statistics of two threshold detectors on a two-mode state.

    A detector clicks photonically unless its mode is in vacuum; dark
    counts fire independently with probability p_d per detector.
    """
    if state.amplitudes.ndim != 2:
        raise ValueError("expected a two-mode state")
    if not 0.0 <= p_d < 1.0:
        raise ValueError(f"p_d must lie in [0, 1), got {p_d}")
    prob = np.abs(state.amplitudes) ** 2
    total = float(prob.sum())
    vac_c = float(prob[0, :].sum())   # first mode (D_c) in vacuum
    vac_d = float(prob[:, 0].sum())   # second mode (D_d) in vacuum
    vac_cd = float(prob[0, 0])
    no = 1.0 - p_d
    p_none = no * no * vac_cd
    p_c_only = no * (vac_d - no * vac_cd)
    p_d_only = no * (vac_c - no * vac_cd)
    p_both = total - no * vac_c - no * vac_d + no * no * vac_cd
    return ClickDistribution(p_c_only=p_c_only, p_d_only=p_d_only,
                             p_both=p_both, p_none=p_none)


def apply_loss(amplitude: complex, arm_transmittance: float) -> complex:
    """Scale a coherent amplitude through a loss beamsplitter of intensity
    transmittance arm_transmittance (amplitude factor is its square root).
    Coherent inputs stay coherent, so loss commutes with Fock expansion."""
    if not 0.0 < arm_transmittance <= 1.0:
        raise ValueError(f"arm transmittance must lie in (0, 1], got {arm_transmittance}")
    return amplitude * math.sqrt(arm_transmittance)


def click_distribution_oracle(nu: complex, omega: complex, ch: ChannelModel,
                              n_max: int | None = None) -> ClickDistribution:
    """Full pipeline: loss, Fock expansion, splitter, threshold detectors."""
    if n_max is None:
        n_max = default_n_max(max(abs(complex(nu)), abs(complex(omega))))
    nu_in = apply_loss(nu, ch.sqrt_eta)
    om_in = apply_loss(omega, ch.sqrt_eta)
    state = two_mode(coherent_fock(nu_in, n_max), coherent_fock(om_in, n_max))
    return threshold_click_distribution(beamsplitter_5050(state), ch.p_d)


@dataclass(frozen=True)
class VirtualPhaseError:
    """Oracle output: the true phase-error rate of the ideal protocol and
    the weight of the anticorrelated Bell component conditioned on a D_c
    success."""

    p_identical_x_given_success: float
    smallness_witness: float
    success_probability: float


def virtual_phase_error_oracle(alpha: float, ch: ChannelModel,
                               n_max: int | None = None) -> VirtualPhaseError:
    """Phase-error rate of the side-channel-free protocol, brute force.

    Builds the four-branch ancilla (x) optical virtual state, routes each
    branch's coherent amplitudes through the loss splitters (keeping the
    lost light as environment modes) and the 50:50 splitter in truncated
    Fock space, projects on the exclusive one-detector outcomes, and reads
    off the conditional probability of identical x-basis ancilla outcomes.
    The smallness witness is the overlap of the D_c-conditioned ancilla
    state with (|0_x 1_x> + |1_x 0_x>)/sqrt(2), which the small-amplitude
    expansion predicts to dominate.
    """
    if ch.p_d != 0.0:
        raise ValueError("virtual phase-error oracle requires p_d = 0")
    if n_max is None:
        n_max = default_n_max(alpha)
    t_amp = math.sqrt(ch.sqrt_eta)              # surviving amplitude factor
    r_amp = math.sqrt(1.0 - ch.sqrt_eta)        # amplitude routed to the environment
    branches = [(j, s) for j in (0, 1) for s in (0, 1)]
    post_bs = []
    for j, s in branches:
        nu = (-1) ** j * alpha
        om = (-1) ** s * alpha
        state = two_mode(coherent_fock(t_amp * nu, n_max), coherent_fock(t_amp * om, n_max))
        post_bs.append(beamsplitter_5050(state).amplitudes)

    # Gram matrices of the success projectors between branches; environment
    # overlaps are closed-form coherent inner products.
    m_c = np.zeros((4, 4))
    m_d = np.zeros((4, 4))
    env = np.zeros((4, 4))
    for bi, (j, s) in enumerate(branches):
        for bj, (jp, sp) in enumerate(branches):
            ci, cj = post_bs[bi], post_bs[bj]
            m_c[bj, bi] = float(np.dot(cj[1:, 0], ci[1:, 0]))
            m_d[bj, bi] = float(np.dot(cj[0, 1:], ci[0, 1:]))
            env[bj, bi] = (
                coherent_overlap(r_amp * (-1) ** jp * alpha, r_amp * (-1) ** j * alpha)
                * coherent_overlap(r_amp * (-1) ** sp * alpha, r_amp * (-1) ** s * alpha)
            ).real
    rho_c = 0.25 * m_c * env
    rho_d = 0.25 * m_d * env

    # Ancilla z-basis order |00>, |01>, |10>, |11>.
    same_00 = 0.5 * np.array([1.0, 1.0, 1.0, 1.0])     # |0_x 0_x>
    same_11 = 0.5 * np.array([1.0, -1.0, -1.0, 1.0])   # |1_x 1_x>
    anti = np.array([1.0, 0.0, 0.0, -1.0]) / math.sqrt(2.0)  # (|0x1x>+|1x0x>)/sqrt2

    def expect(vec: np.ndarray, rho: np.ndarray) -> float:
        return float(vec @ rho @ vec)

    succ_c = float(np.trace(rho_c))
    succ_d = float(np.trace(rho_d))
    if succ_c + succ_d <= 0.0:
        raise ValueError("zero success probability; increase alpha or eta")
    identical = (
        expect(same_00, rho_c) + expect(same_11, rho_c)
        + expect(same_00, rho_d) + expect(same_11, rho_d)
    )
    return VirtualPhaseError(
        p_identical_x_given_success=identical / (succ_c + succ_d),
        smallness_witness=expect(anti, rho_c) / succ_c,
        success_probability=succ_c + succ_d,
    )
