"""Numba statevector kernels.  Internal; semantics mirror qedc.sim exactly.

Both engines consume the same precomputed uniform stream in the same order,
so shot records are identical between them for a given (seed, shot index).
"""

import numpy as np

try:
    from numba import njit, prange
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*a, **k):
        def deco(f):
            return f
        if a and callable(a[0]):
            return a[0]
        return deco

    prange = range

OP_G1 = 0
OP_G2 = 1
OP_MEASURE = 2
OP_RESET = 3
OP_BARRIER = 4


@njit(cache=True)
def _apply_1q(psi, m, q, nq):
    stride = 1 << (nq - 1 - q)
    period = stride << 1
    m00, m01, m10, m11 = m[0], m[1], m[2], m[3]
    for base in range(0, psi.size, period):
        for i in range(base, base + stride):
            a = psi[i]
            b = psi[i + stride]
            psi[i] = m00 * a + m01 * b
            psi[i + stride] = m10 * a + m11 * b


@njit(cache=True)
def _apply_2q(psi, m, q0, q1, nq):
    s0 = 1 << (nq - 1 - q0)
    s1 = 1 << (nq - 1 - q1)
    mask = s0 | s1
    for i in range(psi.size):
        if i & mask == 0:
            a = psi[i]
            b = psi[i + s1]
            c = psi[i + s0]
            d = psi[i + s0 + s1]
            psi[i] = m[0] * a + m[1] * b + m[2] * c + m[3] * d
            psi[i + s1] = m[4] * a + m[5] * b + m[6] * c + m[7] * d
            psi[i + s0] = m[8] * a + m[9] * b + m[10] * c + m[11] * d
            psi[i + s0 + s1] = m[12] * a + m[13] * b + m[14] * c + m[15] * d


@njit(cache=True)
def _apply_pauli(psi, p, q, nq):
    # p: 1=X, 2=Y, 3=Z
    stride = 1 << (nq - 1 - q)
    period = stride << 1
    if p == 1:
        for base in range(0, psi.size, period):
            for i in range(base, base + stride):
                a = psi[i]
                psi[i] = psi[i + stride]
                psi[i + stride] = a
    elif p == 2:
        for base in range(0, psi.size, period):
            for i in range(base, base + stride):
                a = psi[i]
                psi[i] = -1j * psi[i + stride]
                psi[i + stride] = 1j * a
    elif p == 3:
        for base in range(0, psi.size, period):
            for i in range(base + stride, base + 2 * stride):
                psi[i] = -psi[i]


@njit(cache=True)
def _prob0(psi, q, nq):
    stride = 1 << (nq - 1 - q)
    period = stride << 1
    acc = 0.0
    for base in range(0, psi.size, period):
        for i in range(base, base + stride):
            v = psi[i]
            acc += v.real * v.real + v.imag * v.imag
    return acc


@njit(cache=True)
def _project(psi, q, outcome, norm, nq):
    stride = 1 << (nq - 1 - q)
    period = stride << 1
    inv = 1.0 / np.sqrt(norm)
    for base in range(0, psi.size, period):
        for i in range(base, base + stride):
            if outcome == 0:
                psi[i] *= inv
                psi[i + stride] = 0.0
            else:
                psi[i] = 0.0
                psi[i + stride] *= inv


@njit(cache=True)
def run_trajectory(nq, opcodes, q0s, q1s, cbits, mats, p1, p2, pspam, uniforms, psi, outbits):
    psi[:] = 0.0
    psi[0] = 1.0
    uidx = 0
    for q in range(nq):
        if pspam > 0.0 and uniforms[uidx] < pspam:
            _apply_pauli(psi, 1, q, nq)
        uidx += 1
    for i in range(opcodes.size):
        op = opcodes[i]
        if op == OP_BARRIER:
            continue
        if op == OP_G1:
            _apply_1q(psi, mats[i], q0s[i], nq)
            u = uniforms[uidx]
            uidx += 1
            if u < p1:
                j = int(u / p1 * 3.0)
                if j > 2:
                    j = 2
                _apply_pauli(psi, j + 1, q0s[i], nq)
        elif op == OP_G2:
            _apply_2q(psi, mats[i], q0s[i], q1s[i], nq)
            u = uniforms[uidx]
            uidx += 1
            if u < p2:
                j = int(u / p2 * 15.0)
                if j > 14:
                    j = 14
                pa = (j + 1) >> 2
                pb = (j + 1) & 3
                if pa != 0:
                    _apply_pauli(psi, pa, q0s[i], nq)
                if pb != 0:
                    _apply_pauli(psi, pb, q1s[i], nq)
        elif op == OP_MEASURE:
            q = q0s[i]
            p0 = _prob0(psi, q, nq)
            u = uniforms[uidx]
            uidx += 1
            if u < p0:
                outcome = 0
                _project(psi, q, 0, p0, nq)
            else:
                outcome = 1
                _project(psi, q, 1, 1.0 - p0, nq)
            us = uniforms[uidx]
            uidx += 1
            if pspam > 0.0 and us < pspam:
                outcome = 1 - outcome
            outbits[cbits[i]] = outcome
        elif op == OP_RESET:
            q = q0s[i]
            p0 = _prob0(psi, q, nq)
            u = uniforms[uidx]
            uidx += 1
            if u < p0:
                _project(psi, q, 0, p0, nq)
            else:
                _project(psi, q, 1, 1.0 - p0, nq)
                _apply_pauli(psi, 1, q, nq)


@njit(cache=True, parallel=True)
def run_batch(nq, opcodes, q0s, q1s, cbits, mats, p1, p2, pspam, uniforms, outbits):
    dim = 1 << nq
    for s in prange(uniforms.shape[0]):
        psi = np.empty(dim, np.complex128)
        run_trajectory(nq, opcodes, q0s, q1s, cbits, mats, p1, p2, pspam,
                       uniforms[s], psi, outbits[s])
