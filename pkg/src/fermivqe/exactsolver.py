"""Sector-resolved exact diagonalization: ground energies, ground subspaces
and particle-number staircases."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse.linalg as spla

from .fock import num_modes_of, sector_indices
from .hamiltonian import FermionHamiltonian, build_spinful_hubbard, build_spinless_hubbard
from .lattice import Geometry

DENSE_LIMIT = 1024
DEGENERACY_TOL = 1e-9


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundSolution:
    energy: float
    n_particles: int
    vectors: np.ndarray  # (degeneracy, 2**M), orthonormal rows
    degeneracy_tol: float = DEGENERACY_TOL
    tied_sectors: tuple[int, ...] = ()
    sector_energies: dict[int, float] = field(default_factory=dict, compare=False)

    @property
    def degeneracy(self) -> int:
        return self.vectors.shape[0]

    @property
    def num_modes(self) -> int:
        return num_modes_of(self.vectors[0])


def _sector_eigen(h: FermionHamiltonian, n_particles: int, k: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Lowest eigenpairs of the sector block; columns of the second array are
    sector-packed eigenvectors."""
    block = h.sector_matrix(n_particles)
    dim = block.shape[0]
    if block.nnz == 0 or abs(block.imag).max() == 0:
        block = block.real
    if dim <= DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(block.toarray())
        return vals, vecs
    k = min(k, dim - 2)
    rng = np.random.default_rng(12345)
    v0 = rng.standard_normal(dim)
    for attempt in range(3):
        ncv = min(dim, max(2 * k + 1, 20) * (attempt + 1))
        try:
            vals, vecs = spla.eigsh(block, k=k, which="SA", v0=v0, ncv=ncv, tol=1e-13, maxiter=20 * dim)
        except spla.ArpackNoConvergence:
            continue
        order = np.argsort(vals)
        return vals[order], vecs[:, order]
    raise SolverError(f"Lanczos did not converge in sector N_f={n_particles} (dim {dim}) after 3 restarts")


def _collect(h: FermionHamiltonian, n_particles: int, vals: np.ndarray, vecs: np.ndarray, tol: float) -> np.ndarray:
    idx = sector_indices(h.num_modes, n_particles)
    sel = np.flatnonzero(vals <= vals[0] + tol)
    full = np.zeros((sel.size, h.dim), dtype=np.complex128)
    full[:, idx] = vecs[:, sel].T
    # re-orthonormalize the (possibly iterative) degenerate block
    q, _ = np.linalg.qr(full.T)
    return np.ascontiguousarray(q.T)


def ground_in_sector(h: FermionHamiltonian, n_particles: int, tol: float = DEGENERACY_TOL) -> tuple[float, np.ndarray]:
    """Lowest energy of the N_f sector and its eigenvectors embedded in the full space."""
    if not 0 <= n_particles <= h.num_modes:
        raise ValueError(f"sector N_f={n_particles} outside [0, {h.num_modes}]")
    if len(sector_indices(h.num_modes, n_particles)) == 1:
        idx = sector_indices(h.num_modes, n_particles)
        e = float(h.sector_matrix(n_particles).toarray()[0, 0].real)
        vec = np.zeros((1, h.dim), dtype=np.complex128)
        vec[0, idx[0]] = 1.0
        return e, vec
    vals, vecs = _sector_eigen(h, n_particles)
    return float(vals[0]), _collect(h, n_particles, vals, vecs, tol)


def sector_solution(h: FermionHamiltonian, n_particles: int, tol: float = DEGENERACY_TOL) -> GroundSolution:
    e, vecs = ground_in_sector(h, n_particles, tol)
    return GroundSolution(e, n_particles, vecs, tol, sector_energies={n_particles: e})


def global_ground(h: FermionHamiltonian, tol: float = DEGENERACY_TOL, sectors: Sequence[int] | None = None) -> GroundSolution:
    """Minimum over particle-number sectors, ties resolved toward smaller N_f."""
    if not h.conserves_number:
        raise SolverError("global_ground needs a number-conserving Hamiltonian")
    scan = sorted(sectors) if sectors is not None else range(h.num_modes + 1)
    energies: dict[int, float] = {}
    best: tuple[float, int, np.ndarray] | None = None
    for nf in scan:
        e, vecs = ground_in_sector(h, nf, tol)
        energies[nf] = e
        if best is None or e < best[0] - tol:
            best = (e, nf, vecs)
    assert best is not None
    e0, nf0, vecs0 = best
    ties = tuple(nf for nf, e in energies.items() if nf != nf0 and abs(e - e0) <= tol)
    return GroundSolution(e0, nf0, vecs0, tol, ties, energies)


def fidelity(psi: np.ndarray, ground: GroundSolution) -> float:
    """Squared norm of the projection of ``psi`` onto the ground subspace."""
    if psi.shape[0] != ground.vectors.shape[1]:
        raise ValueError(f"dimension mismatch: state {psi.shape[0]} vs ground {ground.vectors.shape[1]}")
    overlaps = ground.vectors.conj() @ psi
    return float(np.vdot(overlaps, overlaps).real)


@dataclass(frozen=True)
class StaircasePoint:
    coupling: float
    energy: float
    n_particles: int


def staircase(
    geometry: Geometry,
    grid: Sequence[float],
    spinful: bool = False,
    vary: str = "V",
    t: float = 1.0,
    U: float = 0.0,
    V: float = 0.0,
    mu: float = 0.0,
) -> list[StaircasePoint]:
    """Ground-state particle number along a grid of ``V`` (or ``U``) values."""
    grid = [float(x) for x in grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("coupling grid must be monotone non-decreasing")
    if vary not in ("V", "U") or (vary == "U" and not spinful):
        raise ValueError(f"cannot vary {vary!r} for this model")
    points = []
    for x in grid:
        if spinful:
            kw = {"U": U, "V": V, vary: x}
            h = build_spinful_hubbard(geometry, t=t, mu=mu, **kw)
        else:
            h = build_spinless_hubbard(geometry, t=t, V=x, mu=mu)
        sol = global_ground(h)
        points.append(StaircasePoint(x, sol.energy, sol.n_particles))
    return points
