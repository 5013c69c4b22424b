"""Entanglement of identical particles in the occupation-number representation."""

from .dynamics import (
    OperatorMatrix,
    ResponseFit,
    evolve_exact,
    first_order_map,
    hubbard_onsite,
    one_body_operator,
    response_order,
    spinflip_hopping,
)
from .entropy import (
    DensityMatrix,
    EntanglementReport,
    density_from_state,
    occupancy_sector_decompose,
    partial_trace,
    reduced_density,
    von_neumann_entropy,
)
from .errors import (
    DestroyedStateError,
    FockentError,
    InvalidDensityMatrix,
    ModeError,
    NormalizationError,
    SectorError,
    SymmetryError,
    SystemMismatchError,
    ZeroNormError,
)
from .fock import (
    FockSpace,
    ModeLabel,
    QuantumState,
    Spin,
    Statistics,
    apply_annihilation,
    apply_creation,
    basis_state,
    build_from_ops,
    load_state,
    save_state,
    two_site_modes,
    vacuum,
)
from .measures import (
    WMatrix,
    reduced_blocks_closed_form,
    schliemann_eta,
    site_entropy_measure,
    slater_decompose,
    slater_rank,
    state_from_w,
    w_from_state,
    wootters_report,
    wootters_state,
)
from .omar import (
    ApparatusState,
    ChannelVariant,
    beam_splitter,
    build_input_state,
    channel_equivalence_report,
    depolarizing_channel,
    omar_experiment,
    run_apparatus,
    virtual_qubit_map,
)
from .overlap import BellKind, OverlapBellState, bell_state_nonorthogonal, eta_vs_overlap_curve
from .teleport import (
    CoherentSource,
    Isomorphism,
    ProtocolResult,
    ProtocolRun,
    channel_state,
    cnot_hamiltonian_coherent,
    run_protocol,
    virtual_cnot_ideal,
)

__version__ = "0.1.0"
