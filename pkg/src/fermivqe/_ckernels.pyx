# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels.

Every gate is a pair of modes (p, q) plus a block record
``[m00, m01, m10, m11, e00, e11]``: a 2x2 matrix acting on the
(n_p, n_q) = (1, 0) / (0, 1) amplitudes and two phases for (0, 0) and
(1, 1). ``signed`` gates multiply the off-diagonal entries by the
Jordan-Wigner parity of the modes strictly between p and q. A negative q
marks a single-mode gate: e00 multiplies n_p = 0 amplitudes, e11 n_p = 1.

Complex arithmetic is spelled out on real and imaginary parts so that the
compiler never falls back to the IEEE-checked complex multiply routine.
"""

import numpy as np
cimport numpy as cnp

ctypedef unsigned long long u64

cdef struct cplx:
    double re
    double im


cdef inline int _parity(u64 x) noexcept nogil:
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    return (0x6996 >> (x & 0xF)) & 1


cdef inline u64 _insert_zero(u64 x, int pos) noexcept nogil:
    return ((x >> pos) << (pos + 1)) | (x & ((1ULL << pos) - 1ULL))


cdef inline cplx _c(double complex z) noexcept nogil:
    cdef cplx out
    out.re = z.real
    out.im = z.imag
    return out


cdef inline cplx _conj(cplx z) noexcept nogil:
    z.im = -z.im
    return z


cdef inline cplx _neg(cplx z) noexcept nogil:
    z.re = -z.re
    z.im = -z.im
    return z


cdef void _apply_one(double* v, int nmodes, int p, int q, bint signed,
                     cplx m00, cplx m01, cplx m10, cplx m11, cplx e00, cplx e11) noexcept nogil:
    # v holds interleaved (re, im) pairs
    cdef u64 n = 1ULL << nmodes
    cdef u64 bp, bq, between, i00, i10, i01, i11, b
    cdef int lo, hi
    cdef double ar, ai, cr, ci, xr, xi
    cdef cplx u01, u10, ph
    cdef bint unit00 = e00.re == 1.0 and e00.im == 0.0
    cdef bint unit11 = e11.re == 1.0 and e11.im == 0.0
    if q < 0:
        bp = 1ULL << p
        for b in range(n):
            ph = e11 if b & bp else e00
            xr = v[2 * b]
            xi = v[2 * b + 1]
            v[2 * b] = xr * ph.re - xi * ph.im
            v[2 * b + 1] = xr * ph.im + xi * ph.re
        return
    lo = p if p < q else q
    hi = q if p < q else p
    bp = 1ULL << p
    bq = 1ULL << q
    between = ((1ULL << hi) - 1ULL) & ~((1ULL << (lo + 1)) - 1ULL)
    for b in range(n >> 2):
        i00 = _insert_zero(_insert_zero(b, lo), hi)
        i10 = i00 | bp
        i01 = i00 | bq
        i11 = i10 | bq
        if signed and _parity(i00 & between):
            u01 = _neg(m01)
            u10 = _neg(m10)
        else:
            u01 = m01
            u10 = m10
        ar = v[2 * i10]
        ai = v[2 * i10 + 1]
        cr = v[2 * i01]
        ci = v[2 * i01 + 1]
        v[2 * i10] = m00.re * ar - m00.im * ai + u01.re * cr - u01.im * ci
        v[2 * i10 + 1] = m00.re * ai + m00.im * ar + u01.re * ci + u01.im * cr
        v[2 * i01] = u10.re * ar - u10.im * ai + m11.re * cr - m11.im * ci
        v[2 * i01 + 1] = u10.re * ai + u10.im * ar + m11.re * ci + m11.im * cr
        if not unit00:
            xr = v[2 * i00]
            xi = v[2 * i00 + 1]
            v[2 * i00] = xr * e00.re - xi * e00.im
            v[2 * i00 + 1] = xr * e00.im + xi * e00.re
        if not unit11:
            xr = v[2 * i11]
            xi = v[2 * i11 + 1]
            v[2 * i11] = xr * e11.re - xi * e11.im
            v[2 * i11 + 1] = xr * e11.im + xi * e11.re


cdef inline void _forward(double* v, int nmodes, int p, int q, bint signed, const double complex* row) noexcept nogil:
    _apply_one(v, nmodes, p, q, signed, _c(row[0]), _c(row[1]), _c(row[2]), _c(row[3]), _c(row[4]), _c(row[5]))


cdef inline void _backward(double* v, int nmodes, int p, int q, bint signed, const double complex* row) noexcept nogil:
    # conjugate transpose of the block
    _apply_one(v, nmodes, p, q, signed,
               _conj(_c(row[0])), _conj(_c(row[2])), _conj(_c(row[1])), _conj(_c(row[3])),
               _conj(_c(row[4])), _conj(_c(row[5])))


def apply_gates(double complex[::1] psi, int nmodes, int[::1] p, int[::1] q,
                cnp.uint8_t[::1] signed, double complex[:, ::1] mats):
    """Apply gates 0..K-1 in order, in place."""
    cdef Py_ssize_t k
    cdef double* v = <double*> &psi[0]
    with nogil:
        for k in range(p.shape[0]):
            _forward(v, nmodes, p[k], q[k], signed[k], &mats[k, 0])


def apply_gates_dagger(double complex[::1] psi, int nmodes, int[::1] p, int[::1] q,
                       cnp.uint8_t[::1] signed, double complex[:, ::1] mats):
    """Apply the inverse of the sequence (gates K-1..0, each conjugate-transposed)."""
    cdef Py_ssize_t k
    cdef double* v = <double*> &psi[0]
    with nogil:
        for k in range(p.shape[0] - 1, -1, -1):
            _backward(v, nmodes, p[k], q[k], signed[k], &mats[k, 0])


cdef void _sums_one(const double* l, const double* v, int nmodes, int p, int q, bint signed,
                    double* out) noexcept nogil:
    # out receives 6 complex sums as 12 doubles: sum conj(l_x) * v_y
    cdef u64 n = 1ULL << nmodes
    cdef u64 bp, bq, between, i00, i10, i01, i11, b
    cdef int lo, hi, j
    cdef double s
    cdef double acc[12]
    cdef double l10r, l10i, l01r, l01i, v10r, v10i, v01r, v01i
    for j in range(12):
        acc[j] = 0.0
    if q < 0:
        bp = 1ULL << p
        for b in range(n):
            j = 10 if b & bp else 8
            acc[j] += l[2 * b] * v[2 * b] + l[2 * b + 1] * v[2 * b + 1]
            acc[j + 1] += l[2 * b] * v[2 * b + 1] - l[2 * b + 1] * v[2 * b]
    else:
        lo = p if p < q else q
        hi = q if p < q else p
        bp = 1ULL << p
        bq = 1ULL << q
        between = ((1ULL << hi) - 1ULL) & ~((1ULL << (lo + 1)) - 1ULL)
        for b in range(n >> 2):
            i00 = _insert_zero(_insert_zero(b, lo), hi)
            i10 = i00 | bp
            i01 = i00 | bq
            i11 = i10 | bq
            s = -1.0 if signed and _parity(i00 & between) else 1.0
            l10r = l[2 * i10]
            l10i = l[2 * i10 + 1]
            l01r = l[2 * i01]
            l01i = l[2 * i01 + 1]
            v10r = v[2 * i10]
            v10i = v[2 * i10 + 1]
            v01r = v[2 * i01]
            v01i = v[2 * i01 + 1]
            acc[0] += l10r * v10r + l10i * v10i
            acc[1] += l10r * v10i - l10i * v10r
            acc[2] += s * (l10r * v01r + l10i * v01i)
            acc[3] += s * (l10r * v01i - l10i * v01r)
            acc[4] += s * (l01r * v10r + l01i * v10i)
            acc[5] += s * (l01r * v10i - l01i * v10r)
            acc[6] += l01r * v01r + l01i * v01i
            acc[7] += l01r * v01i - l01i * v01r
            acc[8] += l[2 * i00] * v[2 * i00] + l[2 * i00 + 1] * v[2 * i00 + 1]
            acc[9] += l[2 * i00] * v[2 * i00 + 1] - l[2 * i00 + 1] * v[2 * i00]
            acc[10] += l[2 * i11] * v[2 * i11] + l[2 * i11 + 1] * v[2 * i11 + 1]
            acc[11] += l[2 * i11] * v[2 * i11 + 1] - l[2 * i11 + 1] * v[2 * i11]
    for j in range(12):
        out[j] = acc[j]


def adjoint_sums(double complex[::1] psi, double complex[::1] lam, int nmodes, int[::1] p, int[::1] q,
                 cnp.uint8_t[::1] signed, double complex[:, ::1] mats):
    """Reverse sweep: for each gate k (last to first) return the bilinear block
    sums between lam after gate k and psi before gate k.

    ``psi`` must hold the circuit output and ``lam`` H applied to it; both
    are overwritten (they end as the circuit input and its adjoint image).
    """
    cdef Py_ssize_t K = p.shape[0]
    cdef Py_ssize_t k
    out_arr = np.zeros((K, 6), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double* v = <double*> &psi[0]
    cdef double* l = <double*> &lam[0]
    with nogil:
        for k in range(K - 1, -1, -1):
            _backward(v, nmodes, p[k], q[k], signed[k], &mats[k, 0])
            _sums_one(l, v, nmodes, p[k], q[k], signed[k], <double*> &out[k, 0])
            _backward(l, nmodes, p[k], q[k], signed[k], &mats[k, 0])
    return out_arr
