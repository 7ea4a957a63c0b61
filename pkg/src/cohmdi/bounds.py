"""Fidelity-deviation bounds and the phase-error upper bound.

For any measurement operator 0 <= O <= 1 and pure states |A>, |R> with
overlap delta = |<A|R>|, the expectations Y_A, Y_R obey
    G_minus(Y_R, delta) <= Y_A <= G_plus(Y_R, delta).
Applying these per setting pair to the observed yields converts the
reference phase-error functional into an experimentally computable upper
bound, which a final deviation step (through the virtual-state fidelity
floor) turns into a bound on the actual phase-error probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import YieldTable

# Guard for radicands at the g_pm endpoints (Y near 0 or 1, delta near 1).
_RADICAND_TOL = 1e-14


class ZeroGainError(ValueError):
    """No successful key rounds: the phase-error rate is undefined."""


def g_pm(y: float, delta: float, sign: int) -> float:
    """Deviation-bound kernel Y + (1-d^2)(1-2Y) +/- 2d sqrt((1-d^2)Y(1-Y)).

    Clamped to [0, 1]; radicands within -1e-14 of zero are clipped before
    the square root.
    """
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"Y must lie in [0, 1], got {y}")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    one_m_d2 = 1.0 - delta * delta
    rad = one_m_d2 * y * (1.0 - y)
    if rad < 0.0:
        if rad < -_RADICAND_TOL:
            raise ValueError(f"negative radicand {rad}")
        rad = 0.0
    val = y + one_m_d2 * (1.0 - 2.0 * y) + sign * 2.0 * delta * math.sqrt(rad)
    return min(1.0, max(0.0, val))


def G_plus(y: float, delta: float) -> float:
    """Largest expectation compatible with reference value y and overlap
    delta: g_plus below the saturation point y = delta^2, else 1."""
    if y < delta * delta:
        return g_pm(y, delta, +1)
    return 1.0


def G_minus(y: float, delta: float) -> float:
    """Smallest compatible expectation: g_minus above y = 1 - delta^2,
    else 0."""
    if y > 1.0 - delta * delta:
        return g_pm(y, delta, -1)
    return 0.0


def delta_vir_lower(epsilon_keys) -> float:
    """Fidelity floor of the virtual state: the mean of sqrt(1 - eps) over
    the four key-key setting pairs."""
    eps = np.asarray(epsilon_keys, dtype=float).reshape(-1)
    if eps.size != 4:
        raise ValueError(f"expected the four key-pair epsilons, got {eps.size}")
    if np.any(eps < 0.0) or np.any(eps > 1.0):
        raise ValueError("epsilon values must lie in [0, 1]")
    return float(np.sqrt(1.0 - eps).mean())


def gamma_ref_upper(yields: np.ndarray, deltas: np.ndarray,
                    f_obj: np.ndarray) -> float:
    """Upper bound on the reference phase-error functional from observed
    yields.

    Positive objective coefficients take G_plus of the corresponding yield,
    negative ones G_minus; the result may exceed 1 (callers clamp before
    the final deviation step).
    """
    y = np.asarray(yields, dtype=float).reshape(-1)
    d = np.asarray(deltas, dtype=float).reshape(-1)
    f = np.asarray(f_obj, dtype=float).reshape(-1)
    if not (y.size == d.size == f.size == 9):
        raise ValueError("yields, deltas and f_obj must each have 9 entries")
    total = 0.0
    for fi, yi, di in zip(f, y, d):
        if fi > 0.0:
            total += fi * G_plus(yi, di)
        elif fi < 0.0:
            total += fi * G_minus(yi, di)
    return total


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class BoundInputs:
    """Everything the phase-error bound consumes.

    yields      observed per-pair click statistics
    deltas      3x3 fidelity floors delta^L per setting pair
    delta_vir_L fidelity floor of the virtual state
    f_obj       3x3 objective coefficients (from the Bloch inversion)
    gamma_obs   observed key-round success probability
    """

    yields: YieldTable
    deltas: np.ndarray
    delta_vir_L: float
    f_obj: np.ndarray
    gamma_obs: float


@dataclass(frozen=True)
class PhaseErrorBound:
    """gamma_ref_U is the pre-deviation bound (sum of the per-outcome parts
    when the split estimator is used); gamma_U the bound on the phase-error
    probability; e_ph_U = min(1, gamma_U / gamma_obs)."""

    gamma_ref_U: float
    gamma_U: float
    e_ph_U: float
    gamma_ref_U_parts: tuple[float, ...] = ()


def phase_error_upper(inp: BoundInputs, povm: str = "split") -> PhaseErrorBound:
    """Upper-bound the phase-error rate from observed statistics.

    povm="split" (default) applies the deviation bounds separately to the
    exclusive D_c and D_d outcome statistics and adds the two resulting
    bounds; povm="union" applies them once to the combined success
    statistics.  Both are valid upper bounds; the split estimator is the
    one the evaluation curves use.
    """
    if inp.gamma_obs <= 0.0:
        raise ZeroGainError("gamma_obs <= 0: no successful key rounds")
    if povm == "split":
        parts = tuple(
            gamma_ref_upper(tab, inp.deltas, inp.f_obj)
            for tab in (inp.yields.y_c, inp.yields.y_d)
        )
    elif povm == "union":
        parts = (gamma_ref_upper(inp.yields.y_success, inp.deltas, inp.f_obj),)
    else:
        raise ValueError(f"unknown povm mode {povm!r}")
    gamma_u = min(1.0, sum(G_plus(_clamp01(p), inp.delta_vir_L) for p in parts))
    return PhaseErrorBound(
        gamma_ref_U=sum(parts),
        gamma_U=gamma_u,
        e_ph_U=min(1.0, gamma_u / inp.gamma_obs),
        gamma_ref_U_parts=parts,
    )


def aggregated_gamma_upper(counts: np.ndarray, n_rounds: int,
                           p_pair: np.ndarray, p_test_given_pair: np.ndarray,
                           p_key: float, deltas: np.ndarray,
                           delta_vir_L: float, f_obj: np.ndarray) -> float:
    """Coherent-attack bound on the total phase-error count over n_rounds.

    counts[i, j] is the expected number of successful parameter-estimation
    rounds with setting pair (i, j); dividing by n_rounds * p_pair * p_test
    gives the round-averaged yields, to which the single-round machinery
    applies unchanged thanks to the concavity of each bounding step.  In
    the asymptotic regime the expected counts stand in for the observed
    ones.
    """
    counts = np.asarray(counts, dtype=float)
    p_pair = np.asarray(p_pair, dtype=float)
    p_test = np.asarray(p_test_given_pair, dtype=float)
    if n_rounds <= 0:
        raise ValueError(f"n_rounds must be positive, got {n_rounds}")
    if not 0.0 <= p_key <= 1.0:
        raise ValueError(f"p_key must lie in [0, 1], got {p_key}")
    denom = n_rounds * p_pair * p_test
    if np.any((denom == 0.0) & (counts > 0.0)):
        raise ValueError("nonzero count for a setting pair with zero probability")
    y_bar = np.divide(counts, denom, out=np.zeros_like(counts), where=denom > 0.0)
    inner = _clamp01(gamma_ref_upper(y_bar, deltas, f_obj))
    return n_rounds * p_key * G_plus(inner, delta_vir_L)
