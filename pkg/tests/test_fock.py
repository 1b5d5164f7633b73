from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermivqe.fock import (
    basis_state,
    inner_product,
    parity_between,
    particle_numbers,
    popcount,
    reference_mask,
    reference_state,
    sector_indices,
    sector_weight,
    support_leak,
)
from fermivqe.lattice import build_geometry, register_map


@pytest.mark.parametrize("mask,j,k,sign", [(0b010, 0, 2, -1), (0b000, 0, 5, 1), (0b0110, 0, 3, 1), (0b1111, 1, 2, 1)])
def test_parity_between(mask, j, k, sign):
    assert parity_between(mask, j, k) == sign


@given(st.integers(0, 2**10 - 1), st.integers(0, 9), st.integers(0, 9))
def test_parity_is_symmetric_and_ignores_endpoints(mask, j, k):
    if j == k:
        with pytest.raises(ValueError):
            parity_between(mask, j, k)
        return
    s = parity_between(mask, j, k)
    assert s == parity_between(mask, k, j)
    assert s == parity_between(mask ^ (1 << j), j, k) == parity_between(mask ^ (1 << k), j, k)


def test_sector_sizes():
    assert len(sector_indices(12, 6)) == 924
    assert particle_numbers(4).tolist() == [popcount(i) for i in range(16)]
    with pytest.raises(ValueError):
        sector_indices(4, 5)


def test_reference_patterns():
    assert reference_mask(12, 6) == 0b010101010101
    assert reference_mask(4, 0) == 0
    assert reference_mask(4, 4) == 0b1111
    assert reference_mask(6, 3, "lowest") == 0b111
    assert reference_mask(6, 2, [1, 4]) == 0b10010
    reg = register_map(build_geometry("chain", 1, 4), spinful=True)
    assert reference_mask(8, 4, "spread", reg) == 0b10011001
    assert reference_mask(8, 4, "paired", reg) == 0b00110011
    with pytest.raises(ValueError):
        reference_mask(4, 2, 0b111)
    with pytest.raises(ValueError):
        reference_mask(4, 2, "paired")
    with pytest.raises(ValueError):
        reference_mask(4, 5)


@given(st.integers(1, 10), st.data())
def test_reference_state_has_right_particle_number(m, data):
    nf = data.draw(st.integers(0, m))
    psi = reference_state(m, nf)
    assert np.isclose(np.linalg.norm(psi), 1)
    assert sector_weight(psi, nf) == 1.0
    assert support_leak(psi, nf) == 0.0


@given(st.integers(2, 6), st.data())
def test_spinful_patterns_fill_both_spins(n, data):
    reg = register_map(build_geometry("chain", 1, n), spinful=True)
    nf = data.draw(st.integers(0, 2 * n))
    mask = reference_mask(2 * n, nf, "spread", reg)
    assert popcount(mask) == nf
    up = popcount(mask & int("01" * n, 2))
    assert abs(2 * up - nf) <= 1


def test_inner_products():
    rng = np.random.default_rng(3)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    assert np.isclose(inner_product(psi, psi), 1)
    assert inner_product(basis_state(4, 3), basis_state(4, 5)) == 0
    phi = 0.7
    assert np.isclose(inner_product(psi, np.exp(1j * phi) * psi), np.exp(1j * phi))
    with pytest.raises(ValueError):
        inner_product(psi, psi[:8])
