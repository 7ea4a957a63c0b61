"""Self-check suites behind the `verify` CLI command.

Each suite exercises one load-bearing identity of the engine against an
independent route (brute-force Fock simulation, direct state sampling, or
two-qubit matrix algebra) with a fixed seed, and reports its worst
deviation.  The same oracles back the pytest suite; here they are packaged
for one-shot command-line runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import G_minus, G_plus, aggregated_gamma_upper, gamma_ref_upper
from .channel import ChannelModel, yield_omega_c, yield_success
from .fock_oracle import CutoffError, click_distribution_oracle
from .states import build_embedding, delta_table
from .virtual_bloch import build_bloch_system, reference_pair_states, virtual_states

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"


@dataclass(frozen=True)
class SuiteResult:
    name: str
    status: str
    max_deviation: float
    detail: str = ""


def random_bounded_operator(rng: np.random.Generator, dim: int,
                            real: bool = False) -> np.ndarray:
    """Random operator with spectrum in [0, 1] (a valid POVM element)."""
    shape = (dim, dim)
    g = rng.standard_normal(shape)
    if not real:
        g = g + 1j * rng.standard_normal(shape)
    q, _ = np.linalg.qr(g)
    eigs = rng.uniform(0.0, 1.0, dim)
    return (q * eigs) @ q.conj().T


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def suite_oracle(seed: int = 0, n_max: int | None = None) -> SuiteResult:
    """Closed-form click model vs truncated-Fock simulation at p_d = 0."""
    n_max = 30 if n_max is None else n_max
    worst = 0.0
    worst_at = ""
    for alpha in (0.1, 0.3, 0.7, 1.0):
        for eta in (1.0, 0.1, 0.01):
            ch = ChannelModel(eta=eta, p_d=0.0)
            amps = (alpha, -alpha, 0.0)
            for nu in amps:
                for om in amps:
                    try:
                        clicks = click_distribution_oracle(nu, om, ch, n_max=n_max)
                    except CutoffError as exc:
                        return SuiteResult("oracle", SKIP, math.nan,
                                           f"cutoff too small: {exc}")
                    dev = max(
                        abs(clicks.p_c_only - yield_omega_c(nu, om, ch)),
                        abs(clicks.p_success - yield_success(nu, om, ch)),
                    )
                    if dev > worst:
                        worst = dev
                        worst_at = f"(nu={nu}, omega={om}, alpha={alpha}, eta={eta})"
    status = PASS if worst <= 1e-8 else FAIL
    return SuiteResult("oracle", status, worst, worst_at)


def suite_gpm(seed: int = 0, trials: int = 10_000) -> SuiteResult:
    """Sandwich G-(Y_R, d) <= Y_A <= G+(Y_R, d) on random states/operators."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_at = ""
    for k in range(trials):
        dim = int(rng.integers(2, 7))
        op = random_bounded_operator(rng, dim)
        a = random_pure_state(rng, dim)
        r = random_pure_state(rng, dim)
        delta = abs(np.vdot(a, r))
        y_a = float(np.real(a.conj() @ op @ a))
        y_r = float(np.real(r.conj() @ op @ r))
        y_a = min(1.0, max(0.0, y_a))
        y_r = min(1.0, max(0.0, y_r))
        violation = max(G_minus(y_r, delta) - y_a, y_a - G_plus(y_r, delta))
        if violation > worst:
            worst = violation
            worst_at = f"(trial={k}, dim={dim}, delta={delta:.6f})"
    status = PASS if worst <= 1e-12 else FAIL
    return SuiteResult("gpm", status, worst, worst_at)


def suite_reconstruction(seed: int = 0, operators: int = 1000) -> SuiteResult:
    """Bloch-inversion identity: objective-weighted reference yields equal
    the direct virtual-state expectation for random real operators."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_at = ""
    cases = [(0.1, 0.0), (0.3, 0.0), (0.8, 0.0), (0.3, math.sqrt(1e-5))]
    per_case = max(1, operators // len(cases))
    for alpha, gamma in cases:
        emb = build_embedding(alpha, gamma)
        system = build_bloch_system(emb)
        pairs = reference_pair_states(emb).reshape(9, 4)
        ens = virtual_states(emb)
        f = system.f_obj
        for k in range(per_case):
            op = random_bounded_operator(rng, 4, real=True)
            lhs = sum(f[i] * float(pairs[i] @ op @ pairs[i]) for i in range(9))
            rhs = sum(
                ens.p_vir[j, j] * float(ens.vir_states[j, j] @ op @ ens.vir_states[j, j])
                for j in (0, 1)
            )
            dev = abs(lhs - rhs)
            if dev > worst:
                worst = dev
                worst_at = f"(alpha={alpha}, gamma={gamma:.4f}, op={k})"
    status = PASS if worst <= 1e-10 else FAIL
    return SuiteResult("reconstruction", status, worst, worst_at)


def suite_concavity(seed: int = 0, sequences: int = 100) -> SuiteResult:
    """Midpoint concavity of the bounding functions and the Jensen steps
    the coherent-attack aggregation relies on.

    Sub-checks carry their own tolerances: 1e-12 for the midpoint tests,
    1e-10 slack for Jensen dominance and the constant-sequence equality.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_at = ""
    failed = False

    def record(dev: float, tol: float, where: str):
        nonlocal worst, worst_at, failed
        if dev > worst:
            worst, worst_at = dev, where
        if dev > tol:
            failed = True

    # G+ concave, G- convex (midpoint tests on a grid)
    ys = np.linspace(0.0, 1.0, 41)
    for delta in (0.0, 0.3, 0.7, 0.95, 0.999, 1.0):
        for i, y1 in enumerate(ys):
            for y2 in ys[i:]:
                mid = (y1 + y2) / 2.0
                record(
                    (G_plus(y1, delta) + G_plus(y2, delta)) / 2.0 - G_plus(mid, delta),
                    1e-12, f"(G+ midpoint, delta={delta}, y=({y1},{y2}))",
                )
                record(
                    G_minus(mid, delta) - (G_minus(y1, delta) + G_minus(y2, delta)) / 2.0,
                    1e-12, f"(G- midpoint, delta={delta}, y=({y1},{y2}))",
                )

    # Gamma_ref^U concave in the yield table, and the aggregated bound
    # dominating the per-round average (equality for constant rounds).
    emb = build_embedding(0.3, 0.0)
    system = build_bloch_system(emb)
    f_obj = system.f_obj_table
    deltas = delta_table(np.full((3, 3), 1e-3), emb)
    d_vir = math.sqrt(1.0 - 1e-3)
    p_pair = np.full((3, 3), 1.0 / 9.0)
    p_test = np.full((3, 3), 0.5)
    p_key = 1.0 - float((p_pair * p_test).sum())
    n_rounds = 50
    for k in range(sequences):
        y1 = rng.uniform(0.0, 1.0, (3, 3))
        y2 = rng.uniform(0.0, 1.0, (3, 3))
        mid = (y1 + y2) / 2.0
        record(
            (gamma_ref_upper(y1, deltas, f_obj) + gamma_ref_upper(y2, deltas, f_obj))
            / 2.0 - gamma_ref_upper(mid, deltas, f_obj),
            1e-12, f"(gamma_ref midpoint, seq={k})",
        )
        rounds = rng.uniform(0.0, 1.0, (n_rounds, 3, 3))
        counts = rounds.sum(axis=0) * p_pair * p_test
        agg = aggregated_gamma_upper(counts, n_rounds, p_pair, p_test, p_key,
                                     deltas, d_vir, f_obj)
        per_round = sum(
            p_key * G_plus(min(1.0, max(0.0, gamma_ref_upper(y, deltas, f_obj))), d_vir)
            for y in rounds
        )
        record(per_round - agg, 1e-10, f"(jensen dominance, seq={k})")

    y_const = rng.uniform(0.0, 1.0, (3, 3))
    counts = n_rounds * y_const * p_pair * p_test
    agg = aggregated_gamma_upper(counts, n_rounds, p_pair, p_test, p_key,
                                 deltas, d_vir, f_obj)
    single = n_rounds * p_key * G_plus(
        min(1.0, max(0.0, gamma_ref_upper(y_const, deltas, f_obj))), d_vir
    )
    record(abs(agg - single), 1e-10, "(iid equality)")

    return SuiteResult("concavity", FAIL if failed else PASS, worst, worst_at)


SUITES = {
    "oracle": suite_oracle,
    "gpm": suite_gpm,
    "reconstruction": suite_reconstruction,
    "concavity": suite_concavity,
}


def run_suites(names=None, seed: int = 0, n_max: int | None = None) -> list[SuiteResult]:
    names = list(SUITES) if not names else list(names)
    results = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
        if name == "oracle":
            results.append(SUITES[name](seed=seed, n_max=n_max))
        else:
            results.append(SUITES[name](seed=seed))
    return results
