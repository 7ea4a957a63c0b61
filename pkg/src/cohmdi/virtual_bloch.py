"""Virtual states of the entanglement-based picture and their Bloch algebra.

In the entanglement-based picture each party keeps an ancilla qubit that
records the key choice.  Measuring both ancillas in the x basis leaves the
optical systems in one of four (sub-normalized) two-qubit states; phase
errors are the identical-outcome events (0,0) and (1,1).  Because every
state involved is real in the embedded basis, the Pauli decomposition only
needs {I, X, Z} per party, giving a 9-dimensional coefficient space.

Ordering convention for all 9-dimensional objects: rows/entries run over
setting pairs lexicographically (Alice-major) in SETTINGS order, columns
over Pauli pairs (i, k) lexicographically (i-major) with i, k in (I, X, Z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .states import QubitEmbedding

# Condition-number ceiling for the single-party Bloch matrix; above this the
# three reference states are effectively collinear on the Bloch circle.
_COND_LIMIT = 1e12

_IMAG_TOL = 1e-12


class SingularBlochError(ValueError):
    """Reference states too close to collinear for the linear inversion."""


class DegenerateStateError(ValueError):
    """A virtual state has vanishing norm and cannot be normalized."""


@dataclass(frozen=True)
class VirtualEnsemble:
    """Virtual-measurement decomposition of the key-state preparation.

    p_vir[j, s] is the probability of x-basis outcome (j, s); vir_states
    [j, s] is the corresponding normalized two-qubit state (4-vector over
    the embedded product basis, Alice-major).
    """

    p_vir: np.ndarray
    vir_states: np.ndarray = field(repr=False)


def _cat_arms(emb: QubitEmbedding):
    """Single-arm (|a> +/- |-a>)/2 in embedded coordinates, with weights.

    Returns (vectors, weights): vectors[j] is the unnormalized arm state for
    x outcome j, weights[j] its squared norm (1 +/- kappa)/2.
    """
    kappa = emb.kappa
    s = math.sqrt(1.0 - kappa * kappa)
    vectors = [
        np.array([(1.0 + kappa) / 2.0, s / 2.0]),
        np.array([(1.0 - kappa) / 2.0, -s / 2.0]),
    ]
    weights = [(1.0 + kappa) / 2.0, (1.0 - kappa) / 2.0]
    return vectors, weights


def virtual_states(emb: QubitEmbedding) -> VirtualEnsemble:
    """Build the four virtual states of the x-basis measurement.

    For outcome (j, s) the unnormalized state is
        (1/4) sum_{j', s'} (-1)^(j j' + s s') |K_{j'}> (x) |K_{s'}>,
    with K_0 = |a>, K_1 = |-a>; it factorizes into single-arm cat states,
    so p_vir[j, s] is a product of single-arm weights.
    """
    arms, weights = _cat_arms(emb)
    p_vir = np.empty((2, 2))
    vir = np.empty((2, 2, 4))
    for j in (0, 1):
        for s in (0, 1):
            norm_sq = weights[j] * weights[s]
            if norm_sq < 1e-30:
                raise DegenerateStateError(
                    f"virtual state ({j},{s}) has norm^2 {norm_sq:.3e}"
                )
            p_vir[j, s] = norm_sq
            vir[j, s] = np.kron(arms[j], arms[s]) / math.sqrt(norm_sq)
    return VirtualEnsemble(p_vir=p_vir, vir_states=vir)


def bloch_vector(state) -> np.ndarray:
    """(Tr rho, Tr rho sX, Tr rho sZ) of a pure qubit state (a, b).

    Only real-coefficient states are supported; a Y component would
    otherwise be required.
    """
    state = np.asarray(state)
    if state.shape != (2,):
        raise ValueError(f"expected a qubit amplitude pair, got shape {state.shape}")
    if np.iscomplexobj(state) and np.max(np.abs(state.imag)) > _IMAG_TOL:
        raise ValueError("state has imaginary components; sigma_Y not supported")
    a, b = float(np.real(state[0])), float(np.real(state[1]))
    return np.array([1.0, 2.0 * a * b, a * a - b * b])


@dataclass(frozen=True)
class BlochSystem:
    """Linear system relating reference-pair yields to the phase-error
    functional.

    S        9x9 Bloch coefficients of the nine reference pair states
    S_vir    2x9 Bloch coefficients of the (0,0) and (1,1) virtual states
    p_vir_diag  weights (p_vir[0,0], p_vir[1,1])
    f_obj    9-vector solving f S = p_vir_diag S_vir
    single   3x3 single-party Bloch matrix (S = single (x) single)
    """

    S: np.ndarray = field(repr=False)
    S_vir: np.ndarray = field(repr=False)
    p_vir_diag: np.ndarray
    f_obj: np.ndarray
    single: np.ndarray = field(repr=False)

    @property
    def f_obj_table(self) -> np.ndarray:
        """f_obj reshaped to the 3x3 setting-pair layout."""
        return self.f_obj.reshape(3, 3)


def build_bloch_system(emb: QubitEmbedding) -> BlochSystem:
    """Assemble the Bloch matrices and solve for the objective vector.

    The convention ties rows to states and columns to Pauli pairs so that
    Y = S q with q_{i,k} = (1/4) Tr[D sigma_i (x) sigma_k]; f_obj is found
    by a linear solve of f S = p_vir_diag S_vir (no explicit inverse).
    """
    single = np.array([bloch_vector(coords) for coords in emb.ref_coords])
    cond = np.linalg.cond(single)
    if cond > _COND_LIMIT:
        raise SingularBlochError(
            f"single-party Bloch matrix condition number {cond:.3e} exceeds "
            f"{_COND_LIMIT:.0e}; reference states nearly collinear"
        )
    S = np.kron(single, single)

    arms, weights = _cat_arms(emb)
    arm_bloch = [bloch_vector(arms[j] / math.sqrt(weights[j])) for j in (0, 1)]
    s_vir = np.array([np.kron(b, b) for b in arm_bloch])
    p_diag = np.array([weights[0] ** 2, weights[1] ** 2])

    f_obj = np.linalg.solve(S.T, p_diag @ s_vir)
    return BlochSystem(S=S, S_vir=s_vir, p_vir_diag=p_diag, f_obj=f_obj, single=single)


def reference_pair_states(emb: QubitEmbedding) -> np.ndarray:
    """The nine two-qubit reference product states as a (3, 3, 4) array."""
    coords = emb.ref_coords
    out = np.empty((3, 3, 4))
    for i in range(3):
        for j in range(3):
            out[i, j] = np.kron(coords[i], coords[j])
    return out
