"""Simulator for two-photon hyperentanglement concentration and purification.

Four photons in two pairs, each photon carrying binary polarization,
spatial-path and frequency degrees of freedom. The package models the
optical gadgets (cross-Kerr parity checks, DOF-transfer stages, pair
erasers) as exact sparse-state channels, drives the two protocol schemes
over their full error-case catalogues, and ships an independent dense
density-matrix oracle plus a reporting CLI.
"""

__version__ = "0.1.0"

from .errors import (
    AliasingError,
    CoherenceLossError,
    CompletenessError,
    ConfigError,
    DegenerateStateError,
    HyperEcpError,
    NormalizationError,
    PreconditionError,
    ProtocolOrderError,
    ShapeError,
)
from .hyperstate import (
    BasisKet,
    Branch,
    DensityMatrix,
    Dof,
    Ensemble,
    Photon,
    PureState,
    entanglement_entropy,
    extract_photons,
    fidelity,
    mix,
    reduced_density,
    superpose,
    tensor,
)
from .optics import (
    CouplingTable,
    HomodyneOutcome,
    KerrRule,
    ProbeBeam,
    TaggedState,
    apply_dof_unitary,
    apply_pol_unitary,
    homodyne_classify,
    kerr_tag,
    measure_diagonal,
    overwrite_dof_from,
    prepare_dof,
    relabel_dof,
)
from .gadgets import (
    GadgetOutcome,
    diagonalize_and_correlate,
    erase_pair,
    gadget_trace,
    pol_freq_transform,
    qnd1,
    qnd2,
    spatial_freq_transform,
)
from .protocols import (
    CasePair,
    ProtocolOutcome,
    SchemeParams,
    build_initial_scheme1,
    build_initial_scheme2,
    run_mixed,
    scheme1_enumerate,
    scheme1_run,
    scheme2_enumerate,
    scheme2_run,
    success_law,
    target_ab,
)
from .oracle import compare, densify, apply_dense, verify_all

__all__ = [name for name in dir() if not name.startswith("_")]
