"""Parameterized gates for the fermionic and qubit paradigms, layered
ansatz construction, and resource counting.

Gate conventions (``p`` is the first mode of a pair, ``q`` the second):

* tunneling   ``exp(-i[(t1/2)(e^{-i t2} c+_p c_q + e^{i t2} c+_q c_p) + (t3/2)(n_p - n_q)])``
* interaction ``exp(-i t n_p n_q)``
* XY+ZZ       ``exp(+i[t_par (X_p X_q + Y_p Y_q) + t_perp Z_p Z_q])``
* phase       ``exp(-i (t/2) Z_p)``

Occupied modes are qubit ``|1>``, so the qubit gates act on the same
amplitude array as the fermionic ones, only without parity signs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from . import kernels
from .fock import num_modes_of
from .lattice import DOWN, UP, Geometry, RegisterMap, edge_color, register_map

FERMIONIC = "fermionic"
QUBIT = "qubit"
PARADIGMS = (FERMIONIC, QUBIT)

# gate kind codes
TUN, INT, XYZZ, RZ = 0, 1, 2, 3
N_PARAMS = {TUN: 3, INT: 1, XYZZ: 2, RZ: 1}
ENTANGLERS = {TUN: 1, INT: 1, XYZZ: 3, RZ: 0}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Tunneling:
    p: int
    q: int
    step: int = 0
    kind = TUN


@dataclass(frozen=True)
class Interaction:
    p: int
    q: int
    step: int = 0
    kind = INT


@dataclass(frozen=True)
class XYPlusZZ:
    p: int
    q: int
    step: int = 0
    kind = XYZZ


@dataclass(frozen=True)
class PhaseRotation:
    p: int
    step: int = 0
    kind = RZ
    q = -1


Gate = Union[Tunneling, Interaction, XYPlusZZ, PhaseRotation]


# --- block records --------------------------------------------------------------


def _sinc_terms(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sin(r)/r and (cos(r) - sin(r)/r)/r**2, series-expanded near 0."""
    small = r < 1e-3
    rs = np.where(small, 1.0, r)
    r2 = r * r
    f1 = np.where(small, 1 - r2 / 6 + r2 * r2 / 120, np.sin(rs) / rs)
    f2 = np.where(small, -1 / 3 + r2 / 30 - r2 * r2 / 840, (np.cos(rs) - np.sin(rs) / rs) / (rs * rs))
    return f1, f2


def _sigma(a1, a2, a3):
    return a3, a1 - 1j * a2, a1 + 1j * a2, -a3


def tunneling_blocks(t1, t2, t3) -> np.ndarray:
    t1, t2, t3 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (t1, t2, t3)))
    a1, a2, a3 = t1 / 2 * np.cos(t2), t1 / 2 * np.sin(t2), t3 / 2
    r = np.sqrt(a1**2 + a2**2 + a3**2)
    f1, _ = _sinc_terms(r)
    c = np.cos(r)
    s00, s01, s10, s11 = _sigma(a1, a2, a3)
    out = np.empty(t1.shape + (6,), dtype=np.complex128)
    out[..., 0] = c - 1j * f1 * s00
    out[..., 1] = -1j * f1 * s01
    out[..., 2] = -1j * f1 * s10
    out[..., 3] = c - 1j * f1 * s11
    out[..., 4] = 1.0
    out[..., 5] = 1.0
    return out


def tunneling_derivatives(t1, t2, t3) -> np.ndarray:
    """d(block)/d(t1, t2, t3); shape (..., 3, 6)."""
    t1, t2, t3 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (t1, t2, t3)))
    a = np.stack([t1 / 2 * np.cos(t2), t1 / 2 * np.sin(t2), t3 / 2], axis=-1)
    zero = np.zeros_like(t1)
    da = np.stack(
        [
            np.stack([np.cos(t2) / 2, np.sin(t2) / 2, zero], axis=-1),
            np.stack([-t1 / 2 * np.sin(t2), t1 / 2 * np.cos(t2), zero], axis=-1),
            np.stack([zero, zero, zero + 0.5], axis=-1),
        ],
        axis=-2,
    )
    r = np.linalg.norm(a, axis=-1)
    f1, f2 = _sinc_terms(r)
    adot = np.einsum("...k,...jk->...j", a, da)
    sa = _sigma(a[..., 0], a[..., 1], a[..., 2])
    sd = _sigma(da[..., 0], da[..., 1], da[..., 2])
    f1 = f1[..., None]
    f2 = f2[..., None]
    ident = (1.0, 0.0, 0.0, 1.0)
    out = np.zeros(t1.shape + (3, 6), dtype=np.complex128)
    for e in range(4):
        out[..., e] = -f1 * adot * ident[e] - 1j * (f2 * adot * sa[e][..., None] + f1 * sd[e])
    return out


def interaction_blocks(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (6,), dtype=np.complex128)
    out[..., 0] = out[..., 3] = out[..., 4] = 1.0
    out[..., 5] = np.exp(-1j * theta)
    return out


def interaction_derivatives(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (1, 6), dtype=np.complex128)
    out[..., 0, 5] = -1j * np.exp(-1j * theta)
    return out


def xyzz_blocks(t_par, t_perp) -> np.ndarray:
    t_par, t_perp = np.broadcast_arrays(np.asarray(t_par, dtype=float), np.asarray(t_perp, dtype=float))
    ph = np.exp(-1j * t_perp)
    out = np.empty(t_par.shape + (6,), dtype=np.complex128)
    out[..., 0] = out[..., 3] = ph * np.cos(2 * t_par)
    out[..., 1] = out[..., 2] = ph * 1j * np.sin(2 * t_par)
    out[..., 4] = out[..., 5] = np.conj(ph)
    return out


def xyzz_derivatives(t_par, t_perp) -> np.ndarray:
    t_par, t_perp = np.broadcast_arrays(np.asarray(t_par, dtype=float), np.asarray(t_perp, dtype=float))
    ph = np.exp(-1j * t_perp)
    blocks = xyzz_blocks(t_par, t_perp)
    out = np.zeros(t_par.shape + (2, 6), dtype=np.complex128)
    out[..., 0, 0] = out[..., 0, 3] = -2 * ph * np.sin(2 * t_par)
    out[..., 0, 1] = out[..., 0, 2] = 2j * ph * np.cos(2 * t_par)
    out[..., 1, :4] = -1j * blocks[..., :4]
    out[..., 1, 4:] = 1j * blocks[..., 4:]
    return out


def phase_blocks(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (6,), dtype=np.complex128)
    out[..., 0] = out[..., 3] = 1.0
    out[..., 4] = np.exp(-0.5j * theta)
    out[..., 5] = np.exp(0.5j * theta)
    return out


def phase_derivatives(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (1, 6), dtype=np.complex128)
    out[..., 0, 4] = -0.5j * np.exp(-0.5j * theta)
    out[..., 0, 5] = 0.5j * np.exp(0.5j * theta)
    return out


# --- single-gate application ------------------------------------------------------


def _check_modes(psi: np.ndarray, *modes: int) -> int:
    m = num_modes_of(psi)
    for mode in modes:
        if not 0 <= mode < m:
            raise CircuitError(f"mode {mode} outside [0, {m})")
    if len(modes) == 2 and modes[0] == modes[1]:
        raise CircuitError("two-mode gate needs distinct modes")
    return m


def _run_single(psi: np.ndarray, p: int, q: int, signed: bool, block: np.ndarray) -> np.ndarray:
    m = _check_modes(psi, p, q) if q >= 0 else _check_modes(psi, p)
    out = np.array(psi, dtype=np.complex128, copy=True)
    kernels.apply_gates(
        out, m,
        np.array([p], dtype=np.int32), np.array([q], dtype=np.int32),
        np.array([signed], dtype=np.uint8), np.ascontiguousarray(block.reshape(1, 6)),
    )
    return out


def apply_tunneling(psi: np.ndarray, j: int, k: int, t1: float, t2: float, t3: float) -> np.ndarray:
    return _run_single(psi, j, k, True, tunneling_blocks(t1, t2, t3))


def apply_interaction(psi: np.ndarray, j: int, k: int, theta: float) -> np.ndarray:
    return _run_single(psi, j, k, True, interaction_blocks(theta))


def apply_xy_zz(psi: np.ndarray, j: int, k: int, t_par: float, t_perp: float) -> np.ndarray:
    return _run_single(psi, j, k, False, xyzz_blocks(t_par, t_perp))


def apply_phase_rotation(psi: np.ndarray, j: int, theta: float) -> np.ndarray:
    return _run_single(psi, j, -1, False, phase_blocks(theta))


# --- ansatz ---------------------------------------------------------------------


@dataclass(frozen=True)
class Resources:
    R_Q: int
    l_p: int
    depth: int
    depth_per_layer: int
    layers: int

    def as_dict(self) -> dict[str, int]:
        return {"R_Q": self.R_Q, "l_p": self.l_p, "depth": self.depth, "depth_per_layer": self.depth_per_layer}


@dataclass(frozen=True)
class Ansatz:
    paradigm: str
    layers: int
    num_modes: int
    gates: tuple[Gate, ...]
    depth_per_layer: int

    @cached_property
    def kinds(self) -> np.ndarray:
        return np.array([g.kind for g in self.gates], dtype=np.int8)

    @cached_property
    def p(self) -> np.ndarray:
        return np.array([g.p for g in self.gates], dtype=np.int32)

    @cached_property
    def q(self) -> np.ndarray:
        return np.array([g.q for g in self.gates], dtype=np.int32)

    @cached_property
    def signed(self) -> np.ndarray:
        return np.array([g.kind in (TUN, INT) for g in self.gates], dtype=np.uint8)

    @cached_property
    def offsets(self) -> np.ndarray:
        sizes = np.array([N_PARAMS[g.kind] for g in self.gates], dtype=np.int64)
        return np.concatenate([[0], np.cumsum(sizes)])

    @property
    def num_params(self) -> int:
        return int(self.offsets[-1])

    @cached_property
    def _slots(self) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        # kind -> (gate indices, (n_gates, n_params) parameter slots)
        out = {}
        for kind, width in N_PARAMS.items():
            gidx = np.flatnonzero(self.kinds == kind)
            slots = self.offsets[gidx][:, None] + np.arange(width)[None, :]
            out[kind] = (gidx, slots)
        return out

    def blocks(self, params: np.ndarray) -> np.ndarray:
        """Block record of every gate for the given parameter vector."""
        params = self.check_params(params)
        mats = np.empty((len(self.gates), 6), dtype=np.complex128)
        for kind, (gidx, slots) in self._slots.items():
            if gidx.size == 0:
                continue
            th = params[slots]
            if kind == TUN:
                mats[gidx] = tunneling_blocks(th[:, 0], th[:, 1], th[:, 2])
            elif kind == INT:
                mats[gidx] = interaction_blocks(th[:, 0])
            elif kind == XYZZ:
                mats[gidx] = xyzz_blocks(th[:, 0], th[:, 1])
            else:
                mats[gidx] = phase_blocks(th[:, 0])
        return mats

    def derivative_blocks(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(d-block per parameter, owning gate per parameter)."""
        params = self.check_params(params)
        dmats = np.empty((self.num_params, 6), dtype=np.complex128)
        owner = np.empty(self.num_params, dtype=np.int64)
        for kind, (gidx, slots) in self._slots.items():
            if gidx.size == 0:
                continue
            th = params[slots]
            if kind == TUN:
                d = tunneling_derivatives(th[:, 0], th[:, 1], th[:, 2])
            elif kind == INT:
                d = interaction_derivatives(th[:, 0])
            elif kind == XYZZ:
                d = xyzz_derivatives(th[:, 0], th[:, 1])
            else:
                d = phase_derivatives(th[:, 0])
            dmats[slots.ravel()] = d.reshape(-1, 6)
            owner[slots.ravel()] = np.repeat(gidx, slots.shape[1])
        return dmats, owner

    def check_params(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.num_params,):
            raise CircuitError(f"expected {self.num_params} parameters, got shape {params.shape}")
        return params

    def resources(self) -> Resources:
        return count_resources(self)


def count_resources(ansatz: Ansatz) -> Resources:
    rq = sum(ENTANGLERS[g.kind] for g in ansatz.gates)
    return Resources(rq, ansatz.num_params, ansatz.layers * ansatz.depth_per_layer, ansatz.depth_per_layer, ansatz.layers)


def _spinless_layer(geometry: Geometry, reg: RegisterMap, paradigm: str) -> tuple[list[Gate], int]:
    steps = edge_color(geometry).steps
    chi = len(steps)
    gates: list[Gate] = []
    if paradigm == FERMIONIC:
        for s, step in enumerate(steps):
            gates += [Tunneling(reg.mode_of(b.a), reg.mode_of(b.b), s) for b in step]
        for s, step in enumerate(steps):
            gates += [Interaction(reg.mode_of(b.a), reg.mode_of(b.b), chi + s) for b in step]
        return gates, 2 * chi
    for s, step in enumerate(steps):
        gates += [XYPlusZZ(reg.mode_of(b.a), reg.mode_of(b.b), s) for b in step]
    gates += [PhaseRotation(reg.mode_of(site), chi) for site in range(geometry.num_sites)]
    return gates, chi + 1


_SAME_SPIN = ((UP, UP), (DOWN, DOWN))
_CROSS_SPIN = ((UP, DOWN), (DOWN, UP))


def _spinful_layer(geometry: Geometry, reg: RegisterMap, paradigm: str) -> tuple[list[Gate], int]:
    steps = edge_color(geometry).steps
    chi = len(steps)
    gates: list[Gate] = []

    def pairs(step, combos):
        return [(reg.mode_of(b.a, sa), reg.mode_of(b.b, sb)) for b in step for sa, sb in combos]

    if paradigm == FERMIONIC:
        for s, step in enumerate(steps):
            gates += [Tunneling(p, q, s) for p, q in pairs(step, _SAME_SPIN)]
        for cls, combos in enumerate((_SAME_SPIN, _CROSS_SPIN)):
            for s, step in enumerate(steps):
                gates += [Interaction(p, q, chi * (1 + cls) + s) for p, q in pairs(step, combos)]
        return gates, 3 * chi
    for cls, combos in enumerate((_SAME_SPIN, _CROSS_SPIN)):
        for s, step in enumerate(steps):
            gates += [XYPlusZZ(p, q, chi * cls + s) for p, q in pairs(step, combos)]
    gates += [PhaseRotation(reg.mode_of(site, sp), 2 * chi) for site in range(geometry.num_sites) for sp in (UP, DOWN)]
    return gates, 2 * chi + 1


def build_ansatz(
    geometry: Geometry,
    paradigm: str,
    spinful: bool = False,
    layers: int = 1,
    register: RegisterMap | None = None,
) -> Ansatz:
    """Layered, particle-number conserving ansatz on the bonds of ``geometry``.

    Each layer runs all two-mode gates of one family over the bond colouring
    before the next family (tunneling then interaction, or XY+ZZ then the
    phase rotations).
    """
    if paradigm not in PARADIGMS:
        raise CircuitError(f"unknown paradigm {paradigm!r}")
    if layers < 1:
        raise CircuitError("an ansatz needs at least one layer")
    reg = register or register_map(geometry, spinful=spinful)
    if reg.spinful != spinful:
        raise CircuitError("register map spin flag does not match the ansatz")
    layer, depth = (_spinful_layer if spinful else _spinless_layer)(geometry, reg, paradigm)
    return Ansatz(paradigm, layers, reg.num_modes, tuple(layer) * layers, depth)


def apply_ansatz(ansatz: Ansatz, params: Sequence[float] | np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Return ``U(params)|reference>``; the reference is left untouched."""
    if num_modes_of(reference) != ansatz.num_modes:
        raise CircuitError("reference state does not match the ansatz register")
    mats = ansatz.blocks(np.asarray(params, dtype=float))
    psi = np.array(reference, dtype=np.complex128, copy=True)
    kernels.apply_gates(psi, ansatz.num_modes, ansatz.p, ansatz.q, ansatz.signed, mats)
    return psi
