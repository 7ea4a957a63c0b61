"""Numerical security analysis for a coherent-state MDI-QKD protocol with
uncharacterized transmitter side-channels.

The public surface mirrors the pipeline: coherent-state embedding
(`states`), click statistics (`channel`), virtual-state Bloch inversion
(`virtual_bloch`), fidelity-deviation bounds (`bounds`), rate assembly and
sweeps (`keyrate`), and the brute-force Fock oracle (`fock_oracle`).
`fastpath.BACKEND` reports whether the compiled kernel or the pure-Python
fallback is in use.
"""
from .bounds import (
    BoundInputs,
    G_minus,
    G_plus,
    PhaseErrorBound,
    ZeroGainError,
    aggregated_gamma_upper,
    delta_vir_lower,
    g_pm,
    gamma_ref_upper,
    phase_error_upper,
)
from .channel import (
    ChannelModel,
    YieldTable,
    bit_error_rate,
    gain_and_gamma_obs,
    yield_omega_c,
    yield_omega_d,
    yield_success,
    yield_tables,
)
from .fastpath import BACKEND
from .fock_oracle import (
    ClickDistribution,
    CutoffError,
    FockState,
    VirtualPhaseError,
    apply_loss,
    beamsplitter_5050,
    click_distribution_oracle,
    coherent_fock,
    threshold_click_distribution,
    two_mode,
    virtual_phase_error_oracle,
)
from .keyrate import (
    KeyRatePoint,
    SearchConfig,
    SweepResult,
    binary_entropy,
    key_rate,
    optimize_alpha,
    sweep,
)
from .states import (
    SETTINGS,
    DegenerateEmbeddingError,
    QubitEmbedding,
    SourceModel,
    build_embedding,
    coherent_overlap,
    delta_pair_lower,
    varsigma,
)
from .virtual_bloch import (
    BlochSystem,
    SingularBlochError,
    VirtualEnsemble,
    bloch_vector,
    build_bloch_system,
    virtual_states,
)

__version__ = "0.1.0"
