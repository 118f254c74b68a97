"""Reduction steps between weighted Hamiltonian and circuit problems."""
from __future__ import annotations

from .artifacts import ReductionArtifact
from .classical import ClassicalCircuit, random_classical_circuit, reversibilize_classical
from .clock import grid_embed, grid_step, history_state, wpcsat_to_sparse_ham
from .energy import energy_measurement_gadget, wlh_to_wpcsat
from .indset import indset_to_wlh
from .lightcone import cone_projector, light_cone, sqw1_to_qsat
from .mini import encode_state, mini_to_wpcsat
from .qsvt import PhaseSequence, PhaseSolverError, qsvt_amplify
from .weft1 import sparse_ham_to_weft1

__all__ = [
    "ClassicalCircuit",
    "PhaseSequence",
    "PhaseSolverError",
    "ReductionArtifact",
    "cone_projector",
    "encode_state",
    "energy_measurement_gadget",
    "grid_embed",
    "grid_step",
    "history_state",
    "indset_to_wlh",
    "light_cone",
    "mini_to_wpcsat",
    "qsvt_amplify",
    "random_classical_circuit",
    "reversibilize_classical",
    "sparse_ham_to_weft1",
    "sqw1_to_qsat",
    "wlh_to_wpcsat",
    "wpcsat_to_sparse_ham",
]
