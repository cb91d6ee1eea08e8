"""Qubit state transfer through long-range interacting ferromagnetic spin chains."""

from .chain import (
    ChainSpec,
    CouplingTable,
    HamiltonianMatrix,
    build_couplings,
    build_full_space_hamiltonian,
    build_single_excitation_hamiltonian,
    project_to_single_excitation,
)
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegeneracyError,
    FlatChannelError,
    LRSpinError,
    NumericalError,
    ValidationError,
)
from .spectral import ProjectionSet, SpectralData, eigendecompose, gap_delta12, projections
from .transfer import (
    TransferReport,
    decompose_fm_ft,
    estimate_transfer_time,
    fidelity,
    find_transfer_event,
    ideal_transfer_time,
    propagator_amplitude,
)

__version__ = "0.1.0"
