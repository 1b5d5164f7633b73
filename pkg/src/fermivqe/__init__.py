"""Variational ground-state search with fermionic and qubit circuit models."""

from __future__ import annotations

from .circuits import Ansatz, apply_ansatz, build_ansatz, count_resources
from .exactsolver import GroundSolution, fidelity, global_ground, sector_solution
from .fock import reference_mask, reference_state
from .hamiltonian import (
    FermionHamiltonian,
    build_spinful_hubbard,
    build_spinless_hubbard,
    jw_transform,
    load_molecular_hamiltonian,
)
from .kernels import BACKEND
from .lattice import build_geometry, edge_color, register_map
from .vqe import VqeConfig, run_vqe

__version__ = "0.1.0"

__all__ = [
    "Ansatz",
    "BACKEND",
    "FermionHamiltonian",
    "GroundSolution",
    "VqeConfig",
    "apply_ansatz",
    "build_ansatz",
    "build_geometry",
    "build_spinful_hubbard",
    "build_spinless_hubbard",
    "count_resources",
    "edge_color",
    "fidelity",
    "global_ground",
    "jw_transform",
    "load_molecular_hamiltonian",
    "reference_mask",
    "reference_state",
    "register_map",
    "run_vqe",
    "sector_solution",
]
