from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

import oracle
from fermivqe import kernels
from fermivqe.circuits import (
    CircuitError,
    apply_ansatz,
    apply_interaction,
    apply_phase_rotation,
    apply_tunneling,
    apply_xy_zz,
    build_ansatz,
    count_resources,
    interaction_blocks,
    interaction_derivatives,
    phase_blocks,
    phase_derivatives,
    tunneling_blocks,
    tunneling_derivatives,
    xyzz_blocks,
    xyzz_derivatives,
)
from fermivqe.fock import basis_state, particle_numbers, reference_state, support_leak
from fermivqe.lattice import build_geometry, register_map

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Zm = np.diag([1.0, -1.0]).astype(complex)


def pauli(letter_at: dict[int, np.ndarray], m: int) -> np.ndarray:
    out = np.eye(1)
    for j in reversed(range(m)):
        out = np.kron(out, letter_at.get(j, np.eye(2)))
    return out


def tunneling_generator(m, p, q, t1, t2, t3):
    c, cd, n = oracle.ops(m)
    c, cd, n = [x.toarray() for x in c], [x.toarray() for x in cd], [x.toarray() for x in n]
    sx = cd[q] @ c[p] + cd[p] @ c[q]
    sy = 1j * cd[q] @ c[p] - 1j * cd[p] @ c[q]
    sz = n[p] - n[q]
    return t1 / 2 * (np.cos(t2) * sx + np.sin(t2) * sy) + t3 / 2 * sz


def random_state(m, rng, nf=None):
    psi = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    if nf is not None:
        psi[particle_numbers(m) != nf] = 0
    return psi / np.linalg.norm(psi)


PAIRS = [(2, 0, 1), (2, 1, 0), (4, 0, 3), (4, 3, 0), (4, 1, 3), (4, 2, 0)]


@pytest.mark.parametrize("m,p,q", PAIRS)
def test_tunneling_matches_exponential(m, p, q):
    rng = np.random.default_rng(m + 7 * p + q)
    for _ in range(3):
        th = rng.uniform(-np.pi, np.pi, 3)
        u = sla.expm(-1j * tunneling_generator(m, p, q, *th))
        psi = random_state(m, rng)
        assert np.abs(apply_tunneling(psi, p, q, *th) - u @ psi).max() < 1e-10


def test_tunneling_sign_with_occupied_intervening_mode():
    # mode 1 occupied between the pair: transfer picks up a minus sign
    th = (np.pi, 0.0, 0.0)
    out = apply_tunneling(basis_state(4, 0b0011), 0, 2, *th)
    u = sla.expm(-1j * tunneling_generator(4, 0, 2, *th))
    assert np.allclose(out, u @ basis_state(4, 0b0011))
    assert np.isclose(abs(out[0b0110]), 1)
    free = apply_tunneling(basis_state(4, 0b0001), 0, 2, *th)
    assert np.isclose(out[0b0110] / free[0b0100], -1)


@pytest.mark.parametrize("m,p,q", PAIRS)
def test_interaction_matches_exponential(m, p, q):
    _, _, n = oracle.ops(m)
    rng = np.random.default_rng(11 + p + q)
    theta = rng.uniform(-3, 3)
    u = sla.expm(-1j * theta * (n[p] @ n[q]).toarray())
    psi = random_state(m, rng)
    assert np.abs(apply_interaction(psi, p, q, theta) - u @ psi).max() < 1e-10


@pytest.mark.parametrize("m,p,q", PAIRS)
def test_xy_zz_matches_exponential(m, p, q):
    rng = np.random.default_rng(5 + p + q)
    tp, tz = rng.uniform(-3, 3, 2)
    gen = tp * (pauli({p: X, q: X}, m) + pauli({p: Y, q: Y}, m)) + tz * pauli({p: Zm, q: Zm}, m)
    u = sla.expm(1j * gen)
    psi = random_state(m, rng)
    assert np.abs(apply_xy_zz(psi, p, q, tp, tz) - u @ psi).max() < 1e-10


@pytest.mark.parametrize("m,p", [(2, 0), (2, 1), (4, 2)])
def test_phase_rotation_matches_exponential(m, p):
    rng = np.random.default_rng(p)
    theta = rng.uniform(-3, 3)
    u = sla.expm(-0.5j * theta * pauli({p: Zm}, m))
    psi = random_state(m, rng)
    assert np.abs(apply_phase_rotation(psi, p, theta) - u @ psi).max() < 1e-10


def test_gate_examples():
    psi = basis_state(2, 0b01)
    assert np.allclose(apply_tunneling(psi, 0, 1, 0, 0, 0), psi)
    assert np.isclose(abs(apply_tunneling(psi, 0, 1, np.pi, 0, 0)[0b10]), 1)
    both = basis_state(2, 0b11)
    assert np.allclose(apply_tunneling(both, 0, 1, 0.3, 1.1, 0.7), both)
    assert np.allclose(apply_interaction(both, 0, 1, np.pi), -both)
    assert np.allclose(apply_interaction(psi, 0, 1, 0.8), psi)
    sup = (basis_state(2, 0) + both) / np.sqrt(2)
    out = apply_interaction(sup, 0, 1, np.pi / 2)
    assert np.isclose(out[3] / out[0], -1j)
    assert np.allclose(apply_xy_zz(basis_state(2, 0), 0, 1, 0, 0.4), np.exp(0.4j) * basis_state(2, 0))
    assert np.allclose(apply_xy_zz(basis_state(2, 0b10), 0, 1, np.pi / 4, 0), 1j * basis_state(2, 0b01))
    assert np.allclose(apply_xy_zz(psi, 0, 1, 0, 0), psi)
    one = basis_state(1, 1)
    assert np.allclose(apply_phase_rotation(one, 0, np.pi), 1j * one)
    assert np.allclose(apply_phase_rotation(basis_state(1, 0), 0, 2 * np.pi), -basis_state(1, 0))


def test_gate_argument_checks():
    with pytest.raises((CircuitError, ValueError)):
        apply_tunneling(basis_state(2, 1), 0, 0, 1, 1, 1)
    with pytest.raises((CircuitError, ValueError)):
        apply_interaction(basis_state(2, 1), 0, 5, 1)


@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4))
def test_blocks_are_unitary(t1, t2, t3):
    for blk in (tunneling_blocks(t1, t2, t3), interaction_blocks(t1), xyzz_blocks(t1, t2), phase_blocks(t3)):
        m = np.asarray(blk).reshape(6)
        u = np.array([[m[0], m[1]], [m[2], m[3]]])
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
        assert np.isclose(abs(m[4]), 1) and np.isclose(abs(m[5]), 1)


@pytest.mark.parametrize(
    "fn,dfn,nargs",
    [(tunneling_blocks, tunneling_derivatives, 3), (interaction_blocks, interaction_derivatives, 1),
     (xyzz_blocks, xyzz_derivatives, 2), (phase_blocks, phase_derivatives, 1)],
)
@pytest.mark.parametrize("scale", [1.0, 1e-9, 0.0])
def test_block_derivatives(fn, dfn, nargs, scale):
    rng = np.random.default_rng(nargs)
    x = rng.uniform(-2, 2, nargs) * scale
    d = np.asarray(dfn(*x)).reshape(nargs, 6)
    h = 1e-6
    for k in range(nargs):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        fd = (np.asarray(fn(*xp)).reshape(6) - np.asarray(fn(*xm)).reshape(6)) / (2 * h)
        assert np.abs(fd - d[k]).max() < 1e-8


@pytest.mark.parametrize(
    "shape,paradigm,spinful,L,expected",
    [
        (("chain", 1, 12), "fermionic", False, 4, (88, 176, 4)),
        (("chain", 1, 12), "qubit", False, 6, (198, 204, 3)),
        (("ladder", 2, 6), "fermionic", False, 3, (96, 192, 6)),
        (("ladder", 2, 6), "qubit", False, 3, (144, 132, 4)),
        (("rectangle", 3, 4), "fermionic", False, 3, (102, 204, 8)),
        (("rectangle", 3, 4), "qubit", False, 6, (306, 276, 5)),
        (("chain", 1, 6), "fermionic", True, 5, (150, 250, 6)),
        (("chain", 1, 6), "qubit", True, 7, (420, 364, 5)),
        (("ladder", 2, 3), "fermionic", True, 5, (210, 350, 9)),
        (("ladder", 2, 3), "qubit", True, 6, (504, 408, 7)),
        (("chain", 1, 12), "fermionic", False, 1, (22, 44, 4)),
    ],
)
def test_resource_counts(shape, paradigm, spinful, L, expected):
    res = count_resources(build_ansatz(build_geometry(*shape), paradigm, spinful=spinful, layers=L))
    assert (res.R_Q, res.l_p, res.depth_per_layer) == expected
    assert res.depth == L * res.depth_per_layer
    n_bonds = build_geometry(*shape).num_bonds
    n = build_geometry(*shape).num_sites
    closed = {
        (False, "fermionic"): (2 * n_bonds * L, 4 * n_bonds * L),
        (False, "qubit"): (3 * n_bonds * L, (2 * n_bonds + n) * L),
        (True, "fermionic"): (6 * n_bonds * L, 10 * n_bonds * L),
        (True, "qubit"): (12 * n_bonds * L, (8 * n_bonds + 2 * n) * L),
    }[(spinful, paradigm)]
    assert (res.R_Q, res.l_p) == closed


def test_zero_layers_rejected():
    with pytest.raises(CircuitError):
        build_ansatz(build_geometry("chain", 1, 4), "fermionic", layers=0)
    with pytest.raises(CircuitError):
        build_ansatz(build_geometry("chain", 1, 4), "photonic")


def test_single_bond_transfer():
    a = build_ansatz(build_geometry("chain", 1, 2), "fermionic")
    params = np.zeros(a.num_params)
    params[0] = np.pi
    out = apply_ansatz(a, params, basis_state(2, 0b01))
    assert np.isclose(abs(out[0b10]), 1)


ANSATZ_CASES = [
    (("chain", 1, 5), False, "fermionic"),
    (("chain", 1, 5), False, "qubit"),
    (("ladder", 2, 3), False, "fermionic"),
    (("chain", 1, 3), True, "fermionic"),
    (("chain", 1, 3), True, "qubit"),
]


@given(st.sampled_from(ANSATZ_CASES), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_ansatz_unitary_and_number_conserving(case, layers, seed):
    shape, spinful, paradigm = case
    g = build_geometry(*shape)
    a = build_ansatz(g, paradigm, spinful=spinful, layers=layers)
    rng = np.random.default_rng(seed)
    m = a.num_modes
    nf = int(rng.integers(0, m + 1))
    ref = reference_state(m, nf)
    assert np.array_equal(apply_ansatz(a, np.zeros(a.num_params), ref), ref)
    out = apply_ansatz(a, rng.uniform(-np.pi, np.pi, a.num_params), ref)
    assert abs(np.linalg.norm(out) - 1) < 1e-12
    assert support_leak(out, nf) == 0.0


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="compiled kernels not built")
@given(st.sampled_from(ANSATZ_CASES), st.integers(0, 2**32 - 1))
def test_backends_agree(case, seed):
    shape, spinful, paradigm = case
    a = build_ansatz(build_geometry(*shape), paradigm, spinful=spinful, layers=2)
    rng = np.random.default_rng(seed)
    mats = a.blocks(rng.uniform(-3, 3, a.num_params))
    psi = random_state(a.num_modes, rng)
    lam = random_state(a.num_modes, rng)
    out = {}
    for name, mod in kernels.available_backends().items():
        x, y = psi.copy(), psi.copy()
        mod.apply_gates(x, a.num_modes, a.p, a.q, a.signed, mats)
        mod.apply_gates_dagger(y, a.num_modes, a.p, a.q, a.signed, mats)
        sums = mod.adjoint_sums(x.copy(), lam.copy(), a.num_modes, a.p, a.q, a.signed, mats)
        out[name] = (x, y, sums)
    for k in range(3):
        assert np.abs(out["python"][k] - out["cython"][k]).max() < 1e-12
    # forward then reverse returns the input
    back = out["cython"][0].copy()
    kernels.apply_gates_dagger(back, a.num_modes, a.p, a.q, a.signed, mats)
    assert np.abs(back - psi).max() < 1e-12


def test_register_ordering_only_permutes_modes():
    g = build_geometry("ladder", 2, 3)
    a = build_ansatz(g, "fermionic", register=register_map(g, ordering="snake"))
    assert count_resources(a).R_Q == 2 * g.num_bonds
