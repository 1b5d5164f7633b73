"""Numpy fallback for the compiled kernels in ``_ckernels.pyx``.

Same block-record convention and the same call signatures; used when the
extension is not built or ``FERMIVQE_KERNELS=python`` is set.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=1024)
def _pair_layout(nmodes: int, p: int, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    idx = np.arange(1 << nmodes, dtype=np.int64)
    bp, bq = 1 << p, 1 << q
    i00 = idx[(idx & (bp | bq)) == 0]
    lo, hi = min(p, q), max(p, q)
    between = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    sign = np.where(np.bitwise_count(i00 & between) & 1, -1.0, 1.0)
    return i00, i00 | bp, i00 | bq, i00 | bp | bq, sign


@lru_cache(maxsize=256)
def _single_layout(nmodes: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << nmodes, dtype=np.int64)
    occ = (idx >> p) & 1 == 1
    return idx[~occ], idx[occ]


def _apply_one(psi, nmodes, p, q, signed, m00, m01, m10, m11, e00, e11):
    if q < 0:
        empty, full = _single_layout(nmodes, p)
        psi[empty] *= e00
        psi[full] *= e11
        return
    i00, i10, i01, i11, sign = _pair_layout(nmodes, p, q)
    a = psi[i10]
    c = psi[i01]
    if signed:
        psi[i10] = m00 * a + sign * (m01 * c)
        psi[i01] = sign * (m10 * a) + m11 * c
    else:
        psi[i10] = m00 * a + m01 * c
        psi[i01] = m10 * a + m11 * c
    if e00 != 1:
        psi[i00] *= e00
    if e11 != 1:
        psi[i11] *= e11


def _dagger(row):
    m00, m01, m10, m11, e00, e11 = np.conj(row)
    return m00, m10, m01, m11, e00, e11


def apply_gates(psi, nmodes, p, q, signed, mats):
    for k in range(len(p)):
        _apply_one(psi, nmodes, int(p[k]), int(q[k]), bool(signed[k]), *mats[k])


def apply_gates_dagger(psi, nmodes, p, q, signed, mats):
    for k in range(len(p) - 1, -1, -1):
        _apply_one(psi, nmodes, int(p[k]), int(q[k]), bool(signed[k]), *_dagger(mats[k]))


def _sums_one(lam, psi, nmodes, p, q, signed):
    out = np.zeros(6, dtype=np.complex128)
    if q < 0:
        empty, full = _single_layout(nmodes, p)
        out[4] = np.vdot(lam[empty], psi[empty])
        out[5] = np.vdot(lam[full], psi[full])
        return out
    i00, i10, i01, i11, sign = _pair_layout(nmodes, p, q)
    l10 = lam[i10].conj()
    l01 = lam[i01].conj()
    s = sign if signed else 1.0
    out[0] = l10 @ psi[i10]
    out[1] = (s * l10) @ psi[i01]
    out[2] = (s * l01) @ psi[i10]
    out[3] = l01 @ psi[i01]
    out[4] = np.vdot(lam[i00], psi[i00])
    out[5] = np.vdot(lam[i11], psi[i11])
    return out


def adjoint_sums(psi, lam, nmodes, p, q, signed, mats):
    K = len(p)
    out = np.zeros((K, 6), dtype=np.complex128)
    for k in range(K - 1, -1, -1):
        args = (nmodes, int(p[k]), int(q[k]), bool(signed[k]))
        dag = _dagger(mats[k])
        _apply_one(psi, *args, *dag)
        out[k] = _sums_one(lam, psi, *args)
        _apply_one(lam, *args, *dag)
    return out
