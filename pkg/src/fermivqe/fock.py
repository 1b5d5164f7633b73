"""Occupation-number basis bookkeeping.

A state vector is a plain complex128 array of length ``2**M``; bit ``m`` of
a basis index is the occupation of mode ``m`` (bit 0 least significant).
"""

from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .lattice import DOWN, UP, RegisterMap


def popcount(mask: int) -> int:
    return int(mask).bit_count()


@lru_cache(maxsize=32)
def particle_numbers(num_modes: int) -> np.ndarray:
    """Particle count of every basis index, as a read-only array."""
    counts = np.bitwise_count(np.arange(1 << num_modes, dtype=np.uint64)).astype(np.int64)
    counts.flags.writeable = False
    return counts


@lru_cache(maxsize=64)
def sector_indices(num_modes: int, n_particles: int) -> np.ndarray:
    if not 0 <= n_particles <= num_modes:
        raise ValueError(f"sector N_f={n_particles} outside [0, {num_modes}]")
    idx = np.flatnonzero(particle_numbers(num_modes) == n_particles)
    assert idx.size == comb(num_modes, n_particles)
    idx.flags.writeable = False
    return idx


def num_modes_of(psi: np.ndarray) -> int:
    m = int(psi.shape[0]).bit_length() - 1
    if psi.ndim != 1 or (1 << m) != psi.shape[0]:
        raise ValueError(f"state of length {psi.shape[0]} is not a 2**M vector")
    return m


def parity_between(mask: int, j: int, k: int) -> int:
    """Jordan-Wigner string sign between modes ``j`` and ``k``.

    Counts occupied modes strictly between the two; the occupations of ``j``
    and ``k`` themselves never enter.
    """
    if j == k:
        raise ValueError("parity_between needs two distinct modes")
    lo, hi = min(j, k), max(j, k)
    between = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    return -1 if popcount(mask & between) % 2 else 1


def basis_state(num_modes: int, mask: int) -> np.ndarray:
    if not 0 <= mask < (1 << num_modes):
        raise ValueError(f"mask {mask:#b} does not fit in {num_modes} modes")
    psi = np.zeros(1 << num_modes, dtype=np.complex128)
    psi[mask] = 1.0
    return psi


def _spread_positions(n_slots: int, n_items: int) -> list[int]:
    return [(k * n_slots) // n_items for k in range(n_items)]


def reference_mask(
    num_modes: int,
    n_particles: int,
    pattern: str | int | Sequence[int] = "spread",
    register: RegisterMap | None = None,
) -> int:
    """Occupation mask of a reference Fock state.

    Patterns: ``"spread"`` places fermions at maximally even spacing (on a
    spinful register it alternates spins site by site, Neel-like),
    ``"paired"`` (spinful only) spreads the up and the down fermions over the
    same sites, a closed-shell determinant, and ``"lowest"`` fills modes
    ``0..N_f-1``. An int is taken as an explicit mask and a sequence as the
    list of occupied modes.
    """
    if not 0 <= n_particles <= num_modes:
        raise ValueError(f"cannot place {n_particles} fermions in {num_modes} modes")

    if isinstance(pattern, (int, np.integer)):
        mask = int(pattern)
    elif not isinstance(pattern, str):
        mask = 0
        for m in pattern:
            mask |= 1 << int(m)
    elif pattern == "lowest":
        mask = (1 << n_particles) - 1
    elif pattern in ("spread", "neel"):
        if register is not None and register.spinful:
            mask = _neel_mask(register, n_particles)
        elif n_particles == 0:
            mask = 0
        else:
            mask = sum(1 << p for p in _spread_positions(num_modes, n_particles))
    elif pattern == "paired":
        if register is None or not register.spinful:
            raise ValueError("the paired pattern needs a spinful register")
        mask = _paired_mask(register, n_particles)
    else:
        raise ValueError(f"unknown reference pattern {pattern!r}")

    if mask >= (1 << num_modes) or popcount(mask) != n_particles:
        raise ValueError(f"reference mask {mask:#b} does not hold {n_particles} fermions in {num_modes} modes")
    return mask


def _neel_mask(register: RegisterMap, n_particles: int) -> int:
    n = register.num_sites
    mask = 0
    if n_particles <= n:
        for k, site in enumerate(_spread_positions(n, n_particles) if n_particles else []):
            mask |= 1 << register.mode_of(site, UP if k % 2 == 0 else DOWN)
        return mask
    for site in range(n):
        mask |= 1 << register.mode_of(site, UP if site % 2 == 0 else DOWN)
    # doubly occupy spread sites, keeping the two spin counts balanced
    even, odd = list(range(0, n, 2)), list(range(1, n, 2))
    extra_up = (n_particles + 1) // 2 - len(even)
    extra_down = n_particles // 2 - len(odd)
    for sites, count, spin in ((odd, extra_up, UP), (even, extra_down, DOWN)):
        for k in _spread_positions(len(sites), count) if count else []:
            mask |= 1 << register.mode_of(sites[k], spin)
    return mask


def _paired_mask(register: RegisterMap, n_particles: int) -> int:
    n = register.num_sites
    n_up = (n_particles + 1) // 2
    n_down = n_particles // 2
    if n_up > n:
        raise ValueError(f"cannot pair {n_particles} fermions on {n} sites")
    mask = 0
    for spin, count in ((UP, n_up), (DOWN, n_down)):
        for site in _spread_positions(n, count) if count else []:
            mask |= 1 << register.mode_of(site, spin)
    return mask


def reference_state(
    num_modes: int,
    n_particles: int,
    pattern: str | int | Sequence[int] = "spread",
    register: RegisterMap | None = None,
) -> np.ndarray:
    return basis_state(num_modes, reference_mask(num_modes, n_particles, pattern, register))


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def sector_weight(psi: np.ndarray, n_particles: int) -> float:
    """Squared norm of the component of ``psi`` inside the N_f sector."""
    m = num_modes_of(psi)
    idx = sector_indices(m, n_particles)
    return float(np.vdot(psi[idx], psi[idx]).real)


def support_leak(psi: np.ndarray, n_particles: int) -> float:
    """Norm of the amplitude outside the N_f sector."""
    m = num_modes_of(psi)
    outside = particle_numbers(m) != n_particles
    return float(np.linalg.norm(psi[outside]))
